//! Return panels with a monotone missingness pattern.
//!
//! A panel is an `n × m` grid whose columns are asset return histories.
//! Row 0 holds the most recent observation. Each column is observed on a
//! contiguous prefix of rows and missing afterwards, so once the columns
//! are sorted by history length the observed cells form a staircase.

use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Token written for missing cells. Empty cells are also read as missing.
pub const MISSING_TOKEN: &str = "NA";

/// Raw rectangular grid of possibly-missing cells, as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    labels: Vec<String>,
    n_rows: usize,
    // row-major
    cells: Vec<Option<f64>>,
}

impl Grid {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let m = labels.len();
        let mut cells = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InconsistentRowWidth {
                    line: i + 1,
                    expected: m,
                    found: row.len(),
                });
            }
            cells.extend_from_slice(row);
        }
        Ok(Self {
            labels,
            n_rows: rows.len(),
            cells,
        })
    }

    /// Grid with default labels `V1..Vm`.
    pub fn from_rows(rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        Self::new(default_labels(m), rows)
    }

    /// Fully observed grid from a matrix.
    pub fn from_matrix(values: &DMatrix<f64>, labels: Option<Vec<String>>) -> Self {
        let labels = labels.unwrap_or_else(|| default_labels(values.ncols()));
        let mut cells = Vec::with_capacity(values.len());
        for i in 0..values.nrows() {
            for j in 0..values.ncols() {
                cells.push(Some(values[(i, j)]));
            }
        }
        Self {
            labels,
            n_rows: values.nrows(),
            cells,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[row * self.n_cols() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Option<f64>) {
        let m = self.n_cols();
        self.cells[row * m + col] = value;
    }

    pub fn column(&self, col: usize) -> Vec<Option<f64>> {
        (0..self.n_rows).map(|i| self.get(i, col)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<Option<f64>>> {
        self.cells
            .chunks(self.n_cols().max(1))
            .take(self.n_rows)
            .map(<[_]>::to_vec)
            .collect()
    }

    /// Grid with rows in reverse order (oldest-first files become most-recent-first).
    pub fn reversed_rows(&self) -> Self {
        let mut rows = self.rows();
        rows.reverse();
        Self::new(self.labels.clone(), rows).expect("same width")
    }

    /// Concatenate columns of `other` after the columns of `self`.
    pub fn hstack(&self, other: &Grid) -> Result<Self> {
        if self.n_rows != other.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "row counts differ: {} vs {}",
                self.n_rows, other.n_rows
            )));
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let rows = self
            .rows()
            .into_iter()
            .zip(other.rows())
            .map(|(mut a, b)| {
                a.extend(b);
                a
            })
            .collect();
        Self::new(labels, rows)
    }

    pub fn missing_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }
}

pub(crate) fn default_labels(m: usize) -> Vec<String> {
    (1..=m).map(|j| format!("V{j}")).collect()
}

/// Validated panel. Columns keep their original order; `MonotoneOrder`
/// describes how to walk them from longest to shortest history.
#[derive(Debug, Clone)]
pub struct ReturnPanel {
    labels: Vec<String>,
    // n × m, NaN in missing cells
    values: DMatrix<f64>,
    lengths: Vec<usize>,
}

impl ReturnPanel {
    /// Number of rows (the longest history).
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of columns.
    pub fn m(&self) -> usize {
        self.values.ncols()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Observed history length of each column, in original column order.
    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Observed prefix of column `col` (original index).
    pub fn observed(&self, col: usize) -> DVector<f64> {
        let len = self.lengths[col];
        DVector::from_iterator(len, (0..len).map(|i| self.values[(i, col)]))
    }

    /// Value at `(row, col)` or `None` when missing.
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        (row < self.lengths[col]).then(|| self.values[(row, col)])
    }

    pub fn to_grid(&self) -> Grid {
        let rows = (0..self.n())
            .map(|i| (0..self.m()).map(|j| self.get(i, j)).collect())
            .collect();
        Grid::new(self.labels.clone(), rows).expect("rectangular")
    }

    /// Columns `cols` (original indices) over the first `rows` rows.
    /// Every requested cell must be observed.
    pub fn submatrix(&self, rows: usize, cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols.len(), |i, k| {
            debug_assert!(i < self.lengths[cols[k]]);
            self.values[(i, cols[k])]
        })
    }
}

/// Column ordering by non-increasing history length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneOrder {
    /// `columns[k]` is the original index of the column at monotone position `k`.
    pub columns: Vec<usize>,
    /// `positions[j]` is the monotone position of original column `j`.
    pub positions: Vec<usize>,
    /// History lengths in monotone order, non-increasing.
    pub lengths: Vec<usize>,
    /// Maximal runs of monotone positions sharing one history length.
    pub blocks: Vec<Range<usize>>,
}

impl MonotoneOrder {
    pub fn m(&self) -> usize {
        self.columns.len()
    }
}

/// Check the monotone pattern and sort columns by history length.
///
/// Trailing rows that are missing in every column carry no data and are
/// trimmed. Ties in length keep the original column order.
pub fn validate_and_order(raw: &Grid) -> Result<(ReturnPanel, MonotoneOrder)> {
    let m = raw.n_cols();
    if raw.n_rows() == 0 || m == 0 {
        return Err(Error::InvalidConfig("panel must have at least one row and one column".into()));
    }
    let mut lengths = Vec::with_capacity(m);
    for j in 0..m {
        let mut len = 0;
        let mut seen_gap = None;
        for i in 0..raw.n_rows() {
            match raw.get(i, j) {
                Some(v) => {
                    if !v.is_finite() {
                        return Err(Error::NonFiniteValue { row: i + 1, column: j + 1 });
                    }
                    if let Some(gap) = seen_gap {
                        return Err(Error::NonMonotonePattern {
                            column: raw.labels()[j].clone(),
                            row: gap + 1,
                        });
                    }
                    len = i + 1;
                }
                None => {
                    seen_gap.get_or_insert(i);
                }
            }
        }
        if len == 0 {
            return Err(Error::EmptyColumn { column: raw.labels()[j].clone() });
        }
        lengths.push(len);
    }
    let n = *lengths.iter().max().expect("m > 0");
    let values = DMatrix::from_fn(n, m, |i, j| raw.get(i, j).unwrap_or(f64::NAN));

    let mut columns: Vec<usize> = (0..m).collect();
    // stable: ties stay in original order
    columns.sort_by(|&a, &b| lengths[b].cmp(&lengths[a]));
    let mut positions = vec![0; m];
    for (k, &j) in columns.iter().enumerate() {
        positions[j] = k;
    }
    let sorted: Vec<usize> = columns.iter().map(|&j| lengths[j]).collect();
    let mut blocks = Vec::new();
    let mut start = 0;
    for k in 1..=m {
        if k == m || sorted[k] != sorted[start] {
            blocks.push(start..k);
            start = k;
        }
    }

    let panel = ReturnPanel {
        labels: raw.labels().to_vec(),
        values,
        lengths,
    };
    let order = MonotoneOrder {
        columns,
        positions,
        lengths: sorted,
        blocks,
    };
    Ok((panel, order))
}

/// Design matrix and response for the column at monotone position `j`
/// (0-based, `j >= 1`): the first `n_j` rows of monotone columns `0..j`,
/// and the observed cells of column `j`. No intercept column is included.
pub fn design_slice(
    panel: &ReturnPanel,
    order: &MonotoneOrder,
    j: usize,
) -> (DMatrix<f64>, DVector<f64>) {
    assert!(j >= 1 && j < order.m(), "design_slice needs 1 <= j < m");
    let n_j = order.lengths[j];
    let x = panel.submatrix(n_j, &order.columns[..j]);
    let y = panel.observed(order.columns[j]);
    (x, y)
}

/// Multi-response variant of [`design_slice`] for monotone positions
/// `block` sharing one history length.
pub fn design_block(
    panel: &ReturnPanel,
    order: &MonotoneOrder,
    block: Range<usize>,
) -> (DMatrix<f64>, DMatrix<f64>) {
    assert!(block.start >= 1 && block.end <= order.m() && !block.is_empty());
    let n_b = order.lengths[block.start];
    assert!(block.clone().all(|k| order.lengths[k] == n_b), "block lengths differ");
    let x = panel.submatrix(n_b, &order.columns[..block.start]);
    let y = panel.submatrix(n_b, &order.columns[block]);
    (x, y)
}

/// Parse a panel CSV. A first row containing any non-numeric, non-missing
/// cell is taken as the header.
pub fn parse_panel<R: Read>(reader: R) -> Result<Grid> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(idx + 1, |p| p.line() as usize),
            column: 0,
            message: e.to_string(),
        })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let line = rec.position().map_or(idx + 1, |p| p.line() as usize);
        records.push((line, rec.iter().map(str::to_owned).collect::<Vec<_>>()));
    }
    if records.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 0,
            message: "empty file".into(),
        });
    }
    let is_header = records[0]
        .1
        .iter()
        .any(|c| !c.is_empty() && c != MISSING_TOKEN && c.parse::<f64>().is_err());
    let (labels, body) = if is_header {
        let (_, first) = &records[0];
        (first.clone(), &records[1..])
    } else {
        (default_labels(records[0].1.len()), &records[..])
    };
    let mut rows = Vec::with_capacity(body.len());
    for (line, cells) in body {
        if cells.len() != labels.len() {
            return Err(Error::InconsistentRowWidth {
                line: *line,
                expected: labels.len(),
                found: cells.len(),
            });
        }
        let mut row = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.is_empty() || cell == MISSING_TOKEN {
                row.push(None);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line: *line,
                column: c + 1,
                message: format!("not a number: {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    row: rows.len() + 1,
                    column: c + 1,
                });
            }
            row.push(Some(v));
        }
        rows.push(row);
    }
    Grid::new(labels, rows)
}

pub fn read_panel(path: impl AsRef<Path>) -> Result<Grid> {
    let file = std::fs::File::open(path)?;
    parse_panel(std::io::BufReader::new(file))
}

/// Write a grid with a header row. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn write_grid<W: Write>(grid: &Grid, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(grid.labels()).map_err(io)?;
    for row in grid.rows() {
        let cells: Vec<String> = row
            .iter()
            .map(|c| c.map_or_else(|| MISSING_TOKEN.to_string(), |v| format!("{v:?}")))
            .collect();
        w.write_record(&cells).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_panel(grid: &Grid, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_grid(grid, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: Vec<Vec<Option<f64>>>) -> Grid {
        Grid::from_rows(rows).unwrap()
    }

    #[test]
    fn already_monotone() {
        let g = grid(vec![
            vec![Some(1.0), Some(4.0)],
            vec![Some(2.0), Some(5.0)],
            vec![Some(3.0), None],
        ]);
        let (panel, order) = validate_and_order(&g).unwrap();
        assert_eq!(order.columns, vec![0, 1]);
        assert_eq!(order.lengths, vec![3, 2]);
        assert_eq!(panel.n(), 3);
        assert_eq!(order.blocks, vec![0..1, 1..2]);
    }

    #[test]
    fn reordered_columns_are_sorted() {
        let g = grid(vec![
            vec![Some(4.0), Some(1.0)],
            vec![Some(5.0), Some(2.0)],
            vec![None, Some(3.0)],
        ]);
        let (_, order) = validate_and_order(&g).unwrap();
        assert_eq!(order.columns, vec![1, 0]);
        assert_eq!(order.positions, vec![1, 0]);
        assert_eq!(order.lengths, vec![3, 2]);
    }

    #[test]
    fn gap_is_rejected() {
        let g = grid(vec![
            vec![Some(1.0), Some(4.0)],
            vec![Some(2.0), None],
            vec![Some(3.0), Some(6.0)],
        ]);
        match validate_and_order(&g) {
            Err(Error::NonMonotonePattern { column, row }) => {
                assert_eq!(column, "V2");
                assert_eq!(row, 2);
            }
            other => panic!("expected NonMonotonePattern, got {other:?}"),
        }
    }

    #[test]
    fn empty_and_nonfinite_columns() {
        let g = grid(vec![vec![Some(1.0), None], vec![Some(2.0), None]]);
        assert!(matches!(validate_and_order(&g), Err(Error::EmptyColumn { .. })));
        let g = grid(vec![vec![Some(1.0), Some(f64::NAN)]]);
        assert!(matches!(validate_and_order(&g), Err(Error::NonFiniteValue { .. })));
    }

    #[test]
    fn ties_keep_original_order_and_form_blocks() {
        let g = grid(vec![
            vec![Some(1.0), Some(1.0), Some(1.0)],
            vec![None, Some(2.0), None],
        ]);
        let (_, order) = validate_and_order(&g).unwrap();
        assert_eq!(order.columns, vec![1, 0, 2]);
        assert_eq!(order.blocks, vec![0..1, 1..3]);
    }

    #[test]
    fn design_slices() {
        let g = grid(vec![
            vec![Some(1.0), Some(4.0), Some(7.0)],
            vec![Some(2.0), Some(5.0), None],
            vec![Some(3.0), None, None],
        ]);
        let (panel, order) = validate_and_order(&g).unwrap();
        let (x, y) = design_slice(&panel, &order, 1);
        assert_eq!(x.shape(), (2, 1));
        assert_eq!(y.len(), 2);
        let (x, y) = design_slice(&panel, &order, 2);
        assert_eq!(x.shape(), (1, 2));
        assert_eq!(y.as_slice(), &[7.0]);
        assert!(x.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn csv_with_missing_and_header() {
        let g = parse_panel("1.0,NA\n2.0,3.0".as_bytes()).unwrap();
        assert_eq!(g.n_rows(), 2);
        assert_eq!(g.get(0, 1), None);
        assert_eq!(g.get(1, 1), Some(3.0));

        let g = parse_panel("a,b\n1,\n2,3\n".as_bytes()).unwrap();
        assert_eq!(g.labels(), &["a".to_string(), "b".to_string()]);
        assert_eq!(g.n_rows(), 2);
        assert_eq!(g.get(0, 1), None);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(
            parse_panel("1.0,inf\n".as_bytes()),
            Err(Error::NonFiniteValue { column: 2, .. })
        ));
        assert!(matches!(
            parse_panel("a,b\n1,2\n3\n".as_bytes()),
            Err(Error::InconsistentRowWidth { line: 3, .. })
        ));
        assert!(matches!(
            parse_panel("a,b\n1,x2\n".as_bytes()),
            Err(Error::Parse { line: 2, column: 2, .. })
        ));
    }

    #[test]
    fn trailing_empty_rows_trimmed() {
        let g = grid(vec![vec![Some(1.0)], vec![Some(2.0)], vec![None]]);
        let (panel, order) = validate_and_order(&g).unwrap();
        assert_eq!(panel.n(), 2);
        assert_eq!(order.lengths, vec![2]);
    }
}
