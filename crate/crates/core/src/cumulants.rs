//! Estimation of multivariate moment and cumulant tensors (orders 1-6)
//! and the norm-based non-Gaussianity measure.
//!
//! Estimators weigh every realisation by `1/t` (no bias-corrected
//! variants). Cumulants are assembled from central moments:
//! orders 2 and 3 equal the central moments, order 4 subtracts the
//! symmetrized pair products of the covariance, order 5 the symmetrized
//! covariance-by-third-cumulant products, order 6 the three symmetrized
//! combinations of lower cumulants.

use crate::symtensor::{default_block_size, sym_outer, sym_outer3, BlockInfo, BlockSymTensor};
use crate::{Error, Result, SampleMatrix};

/// Supported maximum cumulant order.
pub const MAX_CUMULANT_ORDER: usize = 6;

/// Cumulant tensors of orders `1..=d_max` of one sample matrix.
#[derive(Clone, Debug)]
pub struct CumulantSet {
    tensors: Vec<BlockSymTensor>,
    t: usize,
    n: usize,
}

impl CumulantSet {
    /// Cumulant tensor of the given order (1-based), if estimated.
    pub fn order(&self, d: usize) -> Option<&BlockSymTensor> {
        if d >= 1 && d <= self.tensors.len() {
            Some(&self.tensors[d - 1])
        } else {
            None
        }
    }

    pub fn max_order(&self) -> usize {
        self.tensors.len()
    }

    pub fn source_rows(&self) -> usize {
        self.t
    }

    pub fn source_dim(&self) -> usize {
        self.n
    }
}

fn check_input(x: &SampleMatrix, d: usize) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::DimensionMismatch("empty sample matrix".into()));
    }
    if !(1..=MAX_CUMULANT_ORDER).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "moment/cumulant order must lie in 1..={MAX_CUMULANT_ORDER}, got {d}"
        )));
    }
    Ok(())
}

// Accumulate sum over rows of the index-products for one block. Rows are
// processed in chunks with per-mode running products so each tree node
// costs one multiply per row.
fn accumulate_block(cols: &[&[f64]], info: &BlockInfo, out: &mut [f64]) {
    let t = cols[0].len();
    let d = info.ranges.len();
    const CHUNK: usize = 1024;
    let mut bufs = vec![vec![0.0f64; CHUNK]; d.saturating_sub(1)];

    #[allow(clippy::too_many_arguments)]
    fn rec(
        cols: &[&[f64]],
        ranges: &[(usize, usize)],
        bufs: &mut [Vec<f64>],
        out: &mut [f64],
        level: usize,
        pos: usize,
        row0: usize,
        clen: usize,
    ) {
        let (start, edge) = ranges[level];
        let last = level + 1 == ranges.len();
        for g in start..start + edge {
            let col = &cols[g][row0..row0 + clen];
            let next_pos = pos * edge + (g - start);
            if last {
                let mut s = 0.0;
                if level == 0 {
                    for &c in col {
                        s += c;
                    }
                } else {
                    let (head, _) = bufs.split_at(level);
                    let prev = &head[level - 1];
                    for (i, &c) in col.iter().enumerate() {
                        s += prev[i] * c;
                    }
                }
                out[next_pos] += s;
            } else {
                if level == 0 {
                    let buf = &mut bufs[0];
                    buf[..clen].copy_from_slice(col);
                } else {
                    let (head, tail) = bufs.split_at_mut(level);
                    let prev = &head[level - 1];
                    let buf = &mut tail[0];
                    for i in 0..clen {
                        buf[i] = prev[i] * col[i];
                    }
                }
                rec(cols, ranges, bufs, out, level + 1, next_pos, row0, clen);
            }
        }
    }

    let mut row0 = 0;
    while row0 < t {
        let clen = CHUNK.min(t - row0);
        if d == 1 {
            let (start, edge) = info.ranges[0];
            for g in start..start + edge {
                let s: f64 = cols[g][row0..row0 + clen].iter().sum();
                out[g - start] += s;
            }
        } else {
            rec(cols, &info.ranges, &mut bufs, out, 0, 0, row0, clen);
        }
        row0 += clen;
    }
}

fn moment_tensor_of_columns(cols: &[&[f64]], d: usize, b: usize) -> Result<BlockSymTensor> {
    let n = cols.len();
    let t = cols[0].len() as f64;
    BlockSymTensor::from_block_fn_parallel(n, d, b, |info, block| {
        accumulate_block(cols, info, block);
        for v in block.iter_mut() {
            *v /= t;
        }
    })
}

fn column_slices(x: &SampleMatrix) -> Vec<&[f64]> {
    let t = x.nrows();
    let data = x.as_slice();
    (0..x.ncols()).map(|j| &data[j * t..(j + 1) * t]).collect()
}

/// Raw moment tensor `m[i] = (1/t) sum_j prod_k x[j, i_k]` with the default
/// block size for the order.
pub fn moment_tensor(x: &SampleMatrix, d: usize) -> Result<BlockSymTensor> {
    check_input(x, d)?;
    moment_tensor_of_columns(&column_slices(x), d, default_block_size(x.ncols(), d))
}

/// Raw moment tensor with an explicit block size.
pub fn moment_tensor_with_block(x: &SampleMatrix, d: usize, b: usize) -> Result<BlockSymTensor> {
    check_input(x, d)?;
    moment_tensor_of_columns(&column_slices(x), d, b)
}

/// Column-wise centered copy of the input.
pub fn centered(x: &SampleMatrix) -> SampleMatrix {
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / col.len() as f64;
        col.add_scalar_mut(-mean);
    }
    out
}

/// Central moment tensor: moment tensor of the column-centered input.
pub fn central_moment_tensor(x: &SampleMatrix, d: usize) -> Result<BlockSymTensor> {
    check_input(x, d)?;
    let xt = centered(x);
    moment_tensor_of_columns(&column_slices(&xt), d, default_block_size(x.ncols(), d))
}

/// Cumulant tensors of orders `1..=d_max` (2 <= d_max <= 6).
pub fn cumulant_tensors(x: &SampleMatrix, d_max: usize) -> Result<CumulantSet> {
    if !(2..=MAX_CUMULANT_ORDER).contains(&d_max) {
        return Err(Error::InvalidParameter(format!(
            "cumulant orders supported in 2..={MAX_CUMULANT_ORDER}, got {d_max}"
        )));
    }
    check_input(x, d_max)?;
    let n = x.ncols();
    let t = x.nrows();

    let means: Vec<f64> = (0..n).map(|c| x.column(c).sum() / t as f64).collect();
    let xt = centered(x);
    let cols = column_slices(&xt);

    let c1 = BlockSymTensor::from_fn(n, 1, n, |idx| means[idx[0]])?;
    let mut central: Vec<BlockSymTensor> = Vec::with_capacity(d_max);
    for d in 2..=d_max {
        central.push(moment_tensor_of_columns(&cols, d, default_block_size(n, d))?);
    }
    let m = |d: usize| -> &BlockSymTensor { &central[d - 2] };

    let mut tensors = vec![c1];
    tensors.push(m(2).clone());
    if d_max >= 3 {
        tensors.push(m(3).clone());
    }
    if d_max >= 4 {
        let c4 = m(4).sub(&sym_outer(&tensors[1], &tensors[1])?)?;
        tensors.push(c4);
    }
    if d_max >= 5 {
        let c5 = m(5).sub(&sym_outer(&tensors[1], &tensors[2])?)?;
        tensors.push(c5);
    }
    if d_max >= 6 {
        let c6 = m(6)
            .sub(&sym_outer(&tensors[3], &tensors[1])?)?
            .sub(&sym_outer(&tensors[2], &tensors[2])?)?
            .sub(&sym_outer3(&tensors[1], &tensors[1], &tensors[1])?)?;
        tensors.push(c6);
    }
    Ok(CumulantSet { tensors, t, n })
}

/// Norm-based non-Gaussianity measure `|C_d| / |C_2|^{d/2}` for `d >= 3`.
pub fn h_norm(c2: &BlockSymTensor, cd: &BlockSymTensor) -> Result<f64> {
    if c2.order() != 2 {
        return Err(Error::InvalidParameter(
            "first argument must be the second cumulant".into(),
        ));
    }
    if cd.order() < 3 {
        return Err(Error::InvalidParameter(
            "h_norm is defined for orders d >= 3".into(),
        ));
    }
    if cd.dim() != c2.dim() {
        return Err(Error::DimensionMismatch(
            "cumulants of different dimension".into(),
        ));
    }
    let denom = c2.frobenius_norm();
    if denom == 0.0 {
        return Err(Error::Degenerate("second cumulant has zero norm".into()));
    }
    Ok(cd.frobenius_norm() / denom.powf(cd.order() as f64 / 2.0))
}
