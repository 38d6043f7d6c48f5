//! Plain CSV input/output for sample matrices, correlation matrices and
//! dense tensor dumps.
//!
//! Convention: comma separator, decimal point, no header row unless stated;
//! one realisation per row, one marginal per column.

use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::symtensor::BlockSymTensor;
use crate::{Error, Result, SampleMatrix};

/// Write a matrix as headerless CSV with full float round-trip precision.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_matrix(&mut w, m, false)
}

/// Write a matrix as CSV with an optional `c1,c2,...` header row.
pub fn write_matrix_csv_header(path: &Path, m: &DMatrix<f64>, header: bool) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_matrix(&mut w, m, header)
}

fn write_matrix<W: Write>(w: &mut W, m: &DMatrix<f64>, header: bool) -> Result<()> {
    if header {
        let names: Vec<String> = (1..=m.ncols()).map(|c| format!("c{c}")).collect();
        writeln!(w, "{}", names.join(","))?;
    }
    let mut line = String::new();
    for i in 0..m.nrows() {
        line.clear();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(',');
            }
            // shortest representation that round-trips f64
            line.push_str(&format!("{:?}", m[(i, j)]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Read a headerless (or `--header`-style) CSV matrix.
pub fn read_matrix_csv(path: &Path, header: bool) -> Result<SampleMatrix> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if lineno == 0 && header {
            continue;
        }
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = trimmed
            .split(',')
            .map(|tok| tok.trim().parse::<f64>())
            .collect();
        let row = row.map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty CSV input".into()));
    }
    let (t, n) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(t, n, |i, j| rows[i][j]))
}

/// Dump a tensor densely: a `d,n,b` header line followed by one line of
/// `n^d` row-major values. Intended for test oracles, not as a wire format.
pub fn write_dense_tensor_csv(path: &Path, t: &BlockSymTensor) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{},{},{}", t.order(), t.dim(), t.block_size())?;
    let dense = t.to_dense();
    let body: Vec<String> = dense.iter().map(|v| format!("{v:?}")).collect();
    writeln!(w, "{}", body.join(","))?;
    Ok(())
}

/// Read a dense tensor dump written by [`write_dense_tensor_csv`].
pub fn read_dense_tensor_csv(path: &Path) -> Result<BlockSymTensor> {
    let content = std::fs::read_to_string(path)?;
    let mut lines = content.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("missing tensor header".into()))?;
    let dims: Vec<usize> = header
        .split(',')
        .map(|tok| tok.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("tensor header: {e}")))?;
    if dims.len() != 3 {
        return Err(Error::Parse("tensor header must be d,n,b".into()));
    }
    let (d, n, b) = (dims[0], dims[1], dims[2]);
    let body = lines
        .next()
        .ok_or_else(|| Error::Parse("missing tensor body".into()))?;
    let values: Vec<f64> = body
        .split(',')
        .map(|tok| tok.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse(format!("tensor body: {e}")))?;
    BlockSymTensor::from_dense(n, d, b, &values)
}
