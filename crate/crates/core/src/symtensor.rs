//! Block storage and algebra for super-symmetric tensors.
//!
//! A super-symmetric `d`-mode tensor of dimension `n` satisfies
//! `t[i] == t[perm(i)]` for every permutation of the multi-index, so only
//! one hyper-pyramid of blocks has to be kept. The tensor is split into
//! cubes of edge `b` (the last block along each mode may be smaller when
//! `b` does not divide `n`) and only blocks whose block multi-index is
//! non-decreasing are stored; the stored-block count equals the number of
//! multisets of size `d` over `ceil(n/b)` symbols. For `n >> b` this saves
//! close to a `1/d!` factor of memory and work.

use rayon::prelude::*;

use crate::{Error, Result};

/// Highest tensor order handled by the block scheme.
pub const MAX_ORDER: usize = 8;

/// Super-symmetric `d`-mode tensor of dimension `n`, stored in blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSymTensor {
    order: usize,
    dim: usize,
    block_size: usize,
    nbar: usize,
    // cumulative rank table: rank_cum[rem][v] = number of non-decreasing
    // tails of length rem+1 that start with a value below v
    rank_cum: Vec<Vec<u64>>,
    blocks: Vec<Vec<f64>>,
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Number of non-decreasing `len`-tuples over an alphabet of `m` symbols.
fn multiset_count(m: usize, len: usize) -> u64 {
    binomial((m + len - 1) as u64, len as u64)
}

/// Block size used when none is requested: 2 for orders >= 3 (block
/// overhead vs redundancy trade-off), full dimension for matrices/vectors.
pub fn default_block_size(n: usize, d: usize) -> usize {
    if d >= 3 {
        2.min(n)
    } else {
        n
    }
}

/// Per-block metadata handed to block-filling closures.
#[derive(Clone, Debug)]
pub struct BlockInfo {
    /// Non-decreasing block multi-index.
    pub coords: Vec<usize>,
    /// Global index range `start..start+edge` covered along each mode.
    pub ranges: Vec<(usize, usize)>,
}

impl BlockSymTensor {
    /// All-zero tensor with the given block size.
    pub fn zeros(n: usize, d: usize, b: usize) -> Result<Self> {
        if n < 1 || d < 1 {
            return Err(Error::InvalidParameter(format!(
                "tensor needs n >= 1 and d >= 1, got n={n}, d={d}"
            )));
        }
        if d > MAX_ORDER {
            return Err(Error::InvalidParameter(format!(
                "tensor order {d} above supported maximum {MAX_ORDER}"
            )));
        }
        if b < 1 || b > n {
            return Err(Error::InvalidParameter(format!(
                "block size must satisfy 1 <= b <= n, got b={b}, n={n}"
            )));
        }
        let nbar = n.div_ceil(b);
        let mut rank_cum = Vec::with_capacity(d);
        for rem in 0..d {
            let mut cum = Vec::with_capacity(nbar + 1);
            let mut acc = 0u64;
            cum.push(0);
            for w in 0..nbar {
                acc += multiset_count(nbar - w, rem);
                cum.push(acc);
            }
            rank_cum.push(cum);
        }
        let nblocks = multiset_count(nbar, d) as usize;
        let mut tensor = Self {
            order: d,
            dim: n,
            block_size: b,
            nbar,
            rank_cum,
            blocks: Vec::with_capacity(nblocks),
        };
        let mut coords = vec![0usize; d];
        loop {
            let len = coords.iter().map(|&c| tensor.edge(c)).product();
            tensor.blocks.push(vec![0.0; len]);
            if !next_nondecreasing(&mut coords, nbar) {
                break;
            }
        }
        debug_assert_eq!(tensor.blocks.len(), nblocks);
        Ok(tensor)
    }

    /// Identity tensor: ones on the super-diagonal, zeros elsewhere.
    pub fn new_identity(n: usize, d: usize) -> Result<Self> {
        let mut t = Self::zeros(n, d, default_block_size(n, d))?;
        let mut idx = vec![0usize; d];
        for i in 0..n {
            idx.iter_mut().for_each(|v| *v = i);
            t.set_sym(&idx, 1.0)?;
        }
        Ok(t)
    }

    /// Tensor filled from a function of the global multi-index. Every stored
    /// block position is evaluated, so `f` should be symmetric in its index
    /// for the result to honour the super-symmetry contract.
    pub fn from_fn<F>(n: usize, d: usize, b: usize, f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> f64,
    {
        let mut t = Self::zeros(n, d, b)?;
        let mut idx = vec![0usize; d];
        for rank in 0..t.blocks.len() {
            let info = t.block_info(rank);
            let mut block = std::mem::take(&mut t.blocks[rank]);
            for (flat, v) in block.iter_mut().enumerate() {
                info.unflatten(flat, &mut idx);
                *v = f(&idx);
            }
            t.blocks[rank] = block;
        }
        Ok(t)
    }

    /// Like [`from_fn`](Self::from_fn) but block-parallel; each block is
    /// written by exactly one task.
    pub fn from_block_fn_parallel<F>(n: usize, d: usize, b: usize, fill: F) -> Result<Self>
    where
        F: Fn(&BlockInfo, &mut [f64]) + Sync,
    {
        let mut t = Self::zeros(n, d, b)?;
        let infos: Vec<BlockInfo> = (0..t.blocks.len()).map(|r| t.block_info(r)).collect();
        t.blocks
            .par_iter_mut()
            .zip(infos.par_iter())
            .for_each(|(block, info)| fill(info, block));
        Ok(t)
    }

    /// Tensor from a dense row-major array of `n^d` values. Only canonical
    /// block positions are read; a super-symmetric input round-trips exactly.
    pub fn from_dense(n: usize, d: usize, b: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n.pow(d as u32) {
            return Err(Error::DimensionMismatch(format!(
                "dense input has {} values, expected n^d = {}",
                data.len(),
                n.pow(d as u32)
            )));
        }
        Self::from_fn(n, d, b, |idx| {
            let mut flat = 0usize;
            for &i in idx {
                flat = flat * n + i;
            }
            data[flat]
        })
    }

    /// Dense row-major array of all `n^d` entries.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n.pow(self.order as u32)];
        let mut idx = vec![0usize; self.order];
        for (flat, v) in out.iter_mut().enumerate() {
            let mut rest = flat;
            for k in (0..self.order).rev() {
                idx[k] = rest % n;
                rest /= n;
            }
            *v = self.get(&idx).expect("index in range");
        }
        out
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Number of stored blocks.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    fn edge(&self, block_coord: usize) -> usize {
        if block_coord + 1 == self.nbar {
            self.dim - block_coord * self.block_size
        } else {
            self.block_size
        }
    }

    fn block_info(&self, rank: usize) -> BlockInfo {
        // invert the rank by walking the non-decreasing enumeration
        let mut coords = vec![0usize; self.order];
        let mut r = rank as u64;
        let mut prev = 0usize;
        for (pos, coord) in coords.iter_mut().enumerate() {
            let rem = self.order - pos - 1;
            let cum = &self.rank_cum[rem];
            let mut v = prev;
            while cum[v + 1] - cum[prev] <= r {
                v += 1;
            }
            r -= cum[v] - cum[prev];
            *coord = v;
            prev = v;
        }
        let ranges = coords
            .iter()
            .map(|&c| (c * self.block_size, self.edge(c)))
            .collect();
        BlockInfo { coords, ranges }
    }

    fn block_rank(&self, coords: &[usize]) -> usize {
        let mut rank = 0u64;
        let mut prev = 0usize;
        for pos in 0..self.order {
            let rem = self.order - pos - 1;
            let cum = &self.rank_cum[rem];
            rank += cum[coords[pos]] - cum[prev];
            prev = coords[pos];
        }
        rank as usize
    }

    fn check_index(&self, idx: &[usize]) -> Result<()> {
        if idx.len() != self.order {
            return Err(Error::DimensionMismatch(format!(
                "index length {} does not match order {}",
                idx.len(),
                self.order
            )));
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.dim) {
            return Err(Error::IndexOutOfRange(format!(
                "index component {bad} outside 0..{}",
                self.dim
            )));
        }
        Ok(())
    }

    // (block rank, flat offset) of a sorted index
    fn locate_sorted(&self, sorted: &[usize]) -> (usize, usize) {
        let mut coords = [0usize; MAX_ORDER];
        for (c, &i) in coords.iter_mut().zip(sorted) {
            *c = i / self.block_size;
        }
        let rank = self.block_rank(&coords[..self.order]);
        let mut flat = 0usize;
        for (k, &i) in sorted.iter().enumerate() {
            flat = flat * self.edge(coords[k]) + (i - coords[k] * self.block_size);
        }
        (rank, flat)
    }

    /// Value at a multi-index; any permutation of the index reads the same
    /// entry.
    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        self.check_index(idx)?;
        let mut sorted = [0usize; MAX_ORDER];
        sorted[..self.order].copy_from_slice(idx);
        sorted[..self.order].sort_unstable();
        let (rank, flat) = self.locate_sorted(&sorted[..self.order]);
        Ok(self.blocks[rank][flat])
    }

    /// Write a value into the whole symmetry orbit of the index.
    pub fn set_sym(&mut self, idx: &[usize], value: f64) -> Result<()> {
        self.check_index(idx)?;
        let mut perm = [0usize; MAX_ORDER];
        perm[..self.order].copy_from_slice(idx);
        perm[..self.order].sort_unstable();
        // lexicographic next-permutation visits each distinct permutation once
        loop {
            let mut coords = [0usize; MAX_ORDER];
            for (c, &i) in coords.iter_mut().zip(&perm[..self.order]) {
                *c = i / self.block_size;
            }
            if coords[..self.order].windows(2).all(|w| w[0] <= w[1]) {
                let rank = self.block_rank(&coords[..self.order]);
                let mut flat = 0usize;
                for (k, &i) in perm[..self.order].iter().enumerate() {
                    flat = flat * self.edge(coords[k]) + (i - coords[k] * self.block_size);
                }
                self.blocks[rank][flat] = value;
            }
            if !next_permutation(&mut perm[..self.order]) {
                break;
            }
        }
        Ok(())
    }

    /// Frobenius norm over all `n^d` entries, counting every symmetry orbit
    /// with its full multiplicity.
    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for rank in 0..self.blocks.len() {
            let info = self.block_info(rank);
            let mult = distinct_permutation_count(&info.coords) as f64;
            let ss: f64 = self.blocks[rank].iter().map(|v| v * v).sum();
            acc += mult * ss;
        }
        acc.sqrt()
    }

    /// Tensor with every entry touching marginal `r` removed and indices
    /// above `r` shifted down by one.
    pub fn fiber_cut(&self, r: usize) -> Result<Self> {
        if self.dim < 2 {
            return Err(Error::Degenerate(
                "cannot cut fibres of a 1-dimensional tensor".into(),
            ));
        }
        if r >= self.dim {
            return Err(Error::IndexOutOfRange(format!(
                "fibre index {r} outside 0..{}",
                self.dim
            )));
        }
        let n = self.dim - 1;
        let b = self.block_size.min(n);
        Self::from_fn(n, self.order, b, |idx| {
            let mut buf = [0usize; MAX_ORDER];
            for (k, &i) in idx.iter().enumerate() {
                buf[k] = if i < r { i } else { i + 1 };
            }
            self.get(&buf[..self.order]).expect("index in range")
        })
    }

    /// Multi-mode product: contracts every mode with the `n' x n` matrix
    /// `a`, giving a super-symmetric tensor of dimension `n'`.
    /// `t'[i_1..i_d] = sum a[i_1,j_1] ... a[i_d,j_d] t[j_1..j_d]`.
    pub fn mode_multiply(&self, a: &nalgebra::DMatrix<f64>) -> Result<Self> {
        if a.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} columns, tensor dimension is {}",
                a.ncols(),
                self.dim
            )));
        }
        let n = self.dim;
        let np = a.nrows();
        let d = self.order;
        let mut cur = self.to_dense();
        // Contract the front mode, then rotate it to the back. Untransformed
        // modes stay ahead of transformed ones, so the front mode has length
        // n on every pass and after d passes the mode order is restored.
        for _ in 0..d {
            let rest = cur.len() / n;
            let mut next = vec![0.0; np * rest];
            for (i, row) in next.chunks_mut(rest).enumerate() {
                for j in 0..n {
                    let w = a[(i, j)];
                    if w == 0.0 {
                        continue;
                    }
                    let src = &cur[j * rest..(j + 1) * rest];
                    for (o, &s) in row.iter_mut().zip(src) {
                        *o += w * s;
                    }
                }
            }
            let mut rotated = vec![0.0; next.len()];
            for i in 0..np {
                for r in 0..rest {
                    rotated[r * np + i] = next[i * rest + r];
                }
            }
            cur = rotated;
        }
        Self::from_dense(np, d, default_block_size(np, d), &cur)
    }

    /// Contraction with itself in all modes but the first:
    /// `b[j1,j2] = sum_{i2..id} t[j1,i2..id] t[j2,i2..id]`, the Gram matrix
    /// of the mode-1 unfold.
    pub fn contract_self(&self) -> Result<nalgebra::DMatrix<f64>> {
        if self.order < 2 {
            return Err(Error::InvalidParameter(
                "contraction needs order >= 2".into(),
            ));
        }
        let n = self.dim;
        let dense = self.to_dense();
        let rest = dense.len() / n;
        let mut b = nalgebra::DMatrix::zeros(n, n);
        for j1 in 0..n {
            let v1 = &dense[j1 * rest..(j1 + 1) * rest];
            for j2 in j1..n {
                let v2 = &dense[j2 * rest..(j2 + 1) * rest];
                let dot: f64 = v1.iter().zip(v2).map(|(x, y)| x * y).sum();
                b[(j1, j2)] = dot;
                b[(j2, j1)] = dot;
            }
        }
        Ok(b)
    }

    /// Iterate over stored blocks as `(info, values)` pairs.
    pub fn blocks(&self) -> impl Iterator<Item = (BlockInfo, &[f64])> + '_ {
        (0..self.blocks.len()).map(|r| (self.block_info(r), self.blocks[r].as_slice()))
    }

    /// Element-wise linear combination `self - other` (same shape required).
    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.order != other.order || self.dim != other.dim {
            return Err(Error::DimensionMismatch(
                "tensor shapes differ in subtraction".into(),
            ));
        }
        let mut out = self.clone();
        if self.block_size == other.block_size {
            for (ob, rb) in out.blocks.iter_mut().zip(&other.blocks) {
                for (o, r) in ob.iter_mut().zip(rb) {
                    *o -= r;
                }
            }
        } else {
            let mut idx = vec![0usize; self.order];
            for rank in 0..out.blocks.len() {
                let info = out.block_info(rank);
                let mut block = std::mem::take(&mut out.blocks[rank]);
                for (flat, v) in block.iter_mut().enumerate() {
                    info.unflatten(flat, &mut idx);
                    *v -= other.get(&idx).expect("index in range");
                }
                out.blocks[rank] = block;
            }
        }
        Ok(out)
    }
}

impl BlockInfo {
    /// Global multi-index of a flat in-block offset.
    pub fn unflatten(&self, mut flat: usize, idx: &mut [usize]) {
        for k in (0..self.ranges.len()).rev() {
            let (start, edge) = self.ranges[k];
            idx[k] = start + flat % edge;
            flat /= edge;
        }
    }

    /// Number of values stored in this block.
    pub fn len(&self) -> usize {
        self.ranges.iter().map(|&(_, e)| e).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Symmetrized sum of outer products of two super-symmetric tensors:
/// one term per distinct assignment of index positions to the factors
/// (3 terms for two matrices, 10 for matrix x 3-tensor, and so on).
pub fn sym_outer(t1: &BlockSymTensor, t2: &BlockSymTensor) -> Result<BlockSymTensor> {
    if t1.dim() != t2.dim() {
        return Err(Error::DimensionMismatch(
            "sym_outer factors must share the dimension".into(),
        ));
    }
    let d = t1.order() + t2.order();
    let parts = position_partitions_2(d, t1.order(), t1.order() == t2.order());
    let n = t1.dim();
    let (d1, d2) = (t1.order(), t2.order());
    BlockSymTensor::from_fn(n, d, default_block_size(n, d), |idx| {
        let mut b1 = [0usize; MAX_ORDER];
        let mut b2 = [0usize; MAX_ORDER];
        let mut acc = 0.0;
        for (p1, p2) in &parts {
            for (k, &p) in p1.iter().enumerate() {
                b1[k] = idx[p];
            }
            for (k, &p) in p2.iter().enumerate() {
                b2[k] = idx[p];
            }
            acc += t1.get(&b1[..d1]).unwrap() * t2.get(&b2[..d2]).unwrap();
        }
        acc
    })
}

/// Symmetrized sum of outer products of three equal-order tensors
/// (15 terms for three matrices).
pub fn sym_outer3(
    t1: &BlockSymTensor,
    t2: &BlockSymTensor,
    t3: &BlockSymTensor,
) -> Result<BlockSymTensor> {
    if t1.dim() != t2.dim() || t1.dim() != t3.dim() {
        return Err(Error::DimensionMismatch(
            "sym_outer3 factors must share the dimension".into(),
        ));
    }
    if t1.order() != t2.order() || t1.order() != t3.order() {
        return Err(Error::DimensionMismatch(
            "sym_outer3 expects equal-order factors".into(),
        ));
    }
    let d = 3 * t1.order();
    let parts = position_partitions_3(d, t1.order());
    let n = t1.dim();
    let m = t1.order();
    BlockSymTensor::from_fn(n, d, default_block_size(n, d), |idx| {
        let mut b1 = [0usize; MAX_ORDER];
        let mut b2 = [0usize; MAX_ORDER];
        let mut b3 = [0usize; MAX_ORDER];
        let mut acc = 0.0;
        for (p1, p2, p3) in &parts {
            for k in 0..m {
                b1[k] = idx[p1[k]];
                b2[k] = idx[p2[k]];
                b3[k] = idx[p3[k]];
            }
            acc += t1.get(&b1[..m]).unwrap() * t2.get(&b2[..m]).unwrap() * t3.get(&b3[..m]).unwrap();
        }
        acc
    })
}

/// Distinct assignments of `d` index positions to a first factor of order
/// `d1` and a second of order `d - d1`. When the factors have equal order
/// the two groups are interchangeable, so position 0 is pinned to group 1.
pub fn position_partitions_2(
    d: usize,
    d1: usize,
    equal_orders: bool,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let mut comb: Vec<usize> = (0..d1).collect();
    loop {
        if !(equal_orders && !comb.contains(&0)) {
            let rest: Vec<usize> = (0..d).filter(|p| !comb.contains(p)).collect();
            out.push((comb.clone(), rest));
        }
        // next combination of d1 out of d
        let mut k = d1;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if comb[k] < d - (d1 - k) {
                comb[k] += 1;
                for j in k + 1..d1 {
                    comb[j] = comb[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Distinct assignments of `d = 3m` positions to three unordered groups of
/// size `m`: groups are canonicalized by their smallest element.
pub fn position_partitions_3(d: usize, m: usize) -> Vec<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    for (g1, rest) in position_partitions_2(d, m, false) {
        if g1[0] != 0 {
            continue; // group containing position 0 first
        }
        let r = rest.len();
        for (g2i, g3i) in position_partitions_2(r, m, false) {
            let g2: Vec<usize> = g2i.iter().map(|&i| rest[i]).collect();
            let g3: Vec<usize> = g3i.iter().map(|&i| rest[i]).collect();
            if g2[0] < g3[0] {
                out.push((g1.clone(), g2, g3));
            }
        }
    }
    out
}

fn distinct_permutation_count(coords: &[usize]) -> u64 {
    let mut fact = [1u64; MAX_ORDER + 1];
    for i in 1..=MAX_ORDER {
        fact[i] = fact[i - 1] * i as u64;
    }
    let mut count = fact[coords.len()];
    let mut run = 1usize;
    for w in coords.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            count /= fact[run];
            run = 1;
        }
    }
    count / fact[run]
}

fn next_nondecreasing(coords: &mut [usize], m: usize) -> bool {
    let d = coords.len();
    for k in (0..d).rev() {
        if coords[k] + 1 < m {
            let v = coords[k] + 1;
            coords[k..].iter_mut().for_each(|c| *c = v);
            return true;
        }
    }
    false
}

fn next_permutation(seq: &mut [usize]) -> bool {
    let n = seq.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && seq[i - 1] >= seq[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while seq[j] <= seq[i - 1] {
        j -= 1;
    }
    seq.swap(i - 1, j);
    seq[i..].reverse();
    true
}
