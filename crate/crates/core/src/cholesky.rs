//! Implicit Cholesky factor of the search covariance.
//!
//! The factor `A` (with `C = A·Aᵀ`) is never stored. It is defined by a short
//! chronological list of rank-one updates
//!
//! ```text
//! A₀ = I,    A_j = a·A_{j−1} + b_j·p_j·v_jᵀ,    v_j = A_{j−1}⁻¹·p_j
//! ```
//!
//! with `a = sqrt(1 − c1)`, which gives `A_j·A_jᵀ = (1 − c1)·A_{j−1}·A_{j−1}ᵀ + c1·p_j·p_jᵀ`.
//! Products `A·z` and `A⁻¹·z` are replayed from the stored pairs in `O(n·m)`.

use crate::error::{Error, Result};

/// Squared norms below this use the series limit of the coefficients.
pub const DEGENERATE_NORM_SQ: f64 = 1e-30;

/// Largest dimension for which [`PairArchive::explicit_factor`] will build a dense matrix.
pub const EXPLICIT_FACTOR_LIMIT: usize = 64;

#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Forward and inverse rank-one coefficients `(b, d)` for a pair whose
/// transformed vector has squared norm `v_norm_sq`.
pub fn pair_coefficients(v_norm_sq: f64, c1: f64) -> (f64, f64) {
    let a = (1.0 - c1).sqrt();
    let gamma = c1 / (1.0 - c1);
    if v_norm_sq < DEGENERATE_NORM_SQ {
        return (a * gamma / 2.0, gamma / (2.0 * a));
    }
    // b = (a/w)·(r − 1) and d = (1/(a·w))·(1 − 1/r) with r = sqrt(1 + γ·w),
    // rewritten through r − 1 = γ·w/(r + 1) to avoid cancellation for small w.
    let root = (1.0 + gamma * v_norm_sq).sqrt();
    let b = a * gamma / (root + 1.0);
    let d = gamma / (a * root * (root + 1.0));
    (b, d)
}

/// One stored rank-one term of the implicit factor.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEntry {
    /// Evaluation index at which the pair was saved.
    pub t: u64,
    /// Evolution path at save time.
    pub p: Vec<f64>,
    /// `p` mapped through the inverse factor of all earlier entries.
    pub v: Vec<f64>,
    pub v_norm_sq: f64,
    pub b: f64,
    pub d: f64,
}

/// Counts the vector kernels executed by a product. Used to check the
/// `O(n·m)` cost contract.
pub trait OpTally {
    fn inner_product(&mut self) {}
    fn axpy(&mut self) {}
}

impl OpTally for () {}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCount {
    pub inner_products: usize,
    pub axpys: usize,
}

impl OpTally for OpCount {
    fn inner_product(&mut self) {
        self.inner_products += 1;
    }
    fn axpy(&mut self) {
        self.axpys += 1;
    }
}

/// The `m` most useful vector pairs, kept in chronological order.
#[derive(Debug, Clone, PartialEq)]
pub struct PairArchive {
    dim: usize,
    capacity: usize,
    c1: f64,
    a: f64,
    entries: Vec<PairEntry>,
}

impl PairArchive {
    pub fn new(dim: usize, capacity: usize, c1: f64) -> Result<Self> {
        if dim == 0 || capacity == 0 {
            return Err(Error::contract(
                "archive dimension and capacity must be positive",
            ));
        }
        if !(c1 > 0.0 && c1 < 1.0) {
            return Err(Error::contract(format!("c1 = {c1} outside (0, 1)")));
        }
        Ok(Self {
            dim,
            capacity,
            c1,
            a: (1.0 - c1).sqrt(),
            entries: Vec::with_capacity(capacity + 1),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// Per-update shrink factor `sqrt(1 − c1)`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn entries(&self) -> &[PairEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    /// `A·z`.
    pub fn az(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.az_into(z, &mut out, &mut ())?;
        Ok(out)
    }

    /// `A·z` written into `out`, reporting each vector kernel to `tally`.
    pub fn az_into<T: OpTally>(&self, z: &[f64], out: &mut [f64], tally: &mut T) -> Result<()> {
        self.check_dim(z.len())?;
        self.check_dim(out.len())?;
        out.copy_from_slice(z);
        let a = self.a;
        for e in &self.entries {
            // The projection is always taken against the original input.
            let k = e.b * dot(&e.v, z);
            tally.inner_product();
            for (x, p) in out.iter_mut().zip(&e.p) {
                *x = a * *x + k * p;
            }
            tally.axpy();
        }
        Ok(())
    }

    /// `A⁻¹·z` using the first `prefix_len` entries (all entries when `None`).
    pub fn ainvz(&self, z: &[f64], prefix_len: Option<usize>) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.ainvz_into(z, prefix_len, &mut out, &mut ())?;
        Ok(out)
    }

    pub fn ainvz_into<T: OpTally>(
        &self,
        z: &[f64],
        prefix_len: Option<usize>,
        out: &mut [f64],
        tally: &mut T,
    ) -> Result<()> {
        self.check_dim(z.len())?;
        self.check_dim(out.len())?;
        let prefix = prefix_len.unwrap_or(self.entries.len());
        if prefix > self.entries.len() {
            return Err(Error::PrefixOutOfRange {
                prefix,
                len: self.entries.len(),
            });
        }
        out.copy_from_slice(z);
        inverse_sweep(&self.entries[..prefix], 1.0 / self.a, out, tally);
        Ok(())
    }

    /// Appends the pair `(p, A⁻¹·p)` saved at stamp `t`. When the archive
    /// overflows, one entry is evicted by the spacing rule (see
    /// [`eviction_index`]) and every later entry is recomputed. Returns the
    /// position of the evicted entry, if any.
    pub fn insert_pair(&mut self, p: &[f64], t: u64, n_steps: u64) -> Result<Option<usize>> {
        self.check_dim(p.len())?;
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(last) = self.entries.last() {
            if t <= last.t {
                return Err(Error::StaleStamp {
                    stamp: t,
                    latest: last.t,
                });
            }
        }
        let v = self.ainvz(p, None)?;
        let v_norm_sq = dot(&v, &v);
        let (b, d) = pair_coefficients(v_norm_sq, self.c1);
        self.entries.push(PairEntry {
            t,
            p: p.to_vec(),
            v,
            v_norm_sq,
            b,
            d,
        });

        if self.entries.len() <= self.capacity {
            return Ok(None);
        }
        let stamps: Vec<u64> = self.entries.iter().map(|e| e.t).collect();
        let victim = eviction_index(&stamps, n_steps);
        self.entries.remove(victim);
        self.rebuild_suffix(victim);
        Ok(Some(victim))
    }

    /// Removes the entry at `index` and recomputes the entries after it.
    pub fn remove(&mut self, index: usize) -> Result<PairEntry> {
        if index >= self.entries.len() {
            return Err(Error::PrefixOutOfRange {
                prefix: index,
                len: self.entries.len(),
            });
        }
        let removed = self.entries.remove(index);
        self.rebuild_suffix(index);
        Ok(removed)
    }

    /// Recomputes `v`, `‖v‖²`, `b` and `d` for every entry at or after
    /// `from_index` so that each `v_j` is again `A⁻¹·p_j` over the entries
    /// before it.
    pub fn rebuild_suffix(&mut self, from_index: usize) {
        let inv_a = 1.0 / self.a;
        let c1 = self.c1;
        for j in from_index.min(self.entries.len())..self.entries.len() {
            let (prefix, rest) = self.entries.split_at_mut(j);
            let entry = &mut rest[0];
            entry.v.copy_from_slice(&entry.p);
            inverse_sweep(prefix, inv_a, &mut entry.v, &mut ());
            entry.v_norm_sq = dot(&entry.v, &entry.v);
            let (b, d) = pair_coefficients(entry.v_norm_sq, c1);
            entry.b = b;
            entry.d = d;
        }
    }

    /// Dense `A`, row-major. Only for testing small instances.
    pub fn explicit_factor(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.dim;
        if n > EXPLICIT_FACTOR_LIMIT {
            return Err(Error::TooLarge(n));
        }
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for e in &self.entries {
            for (i, row) in m.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell = self.a * *cell + e.b * e.p[i] * e.v[j];
                }
            }
        }
        Ok(m)
    }
}

fn inverse_sweep<T: OpTally>(entries: &[PairEntry], inv_a: f64, y: &mut [f64], tally: &mut T) {
    for e in entries {
        let k = e.d * dot(&e.v, y);
        tally.inner_product();
        for (yi, vi) in y.iter_mut().zip(&e.v) {
            *yi = inv_a * *yi - k * vi;
        }
        tally.axpy();
    }
}

/// Chooses which entry to drop from an over-full archive given its stamps
/// (chronological, one more than capacity).
///
/// If some consecutive gap is shorter than `n_steps`, the entry closing the
/// shortest such gap goes (earliest on ties). Otherwise the oldest entry goes.
pub fn eviction_index(stamps: &[u64], n_steps: u64) -> usize {
    let mut best: Option<(u64, usize)> = None;
    for (i, w) in stamps.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if gap < n_steps && best.is_none_or(|(g, _)| gap < g) {
            best = Some((gap, i + 1));
        }
    }
    best.map_or(0, |(_, i)| i)
}
