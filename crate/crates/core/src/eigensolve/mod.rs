//! Lowest eigenpairs of real symmetric operators.
//!
//! [`lanczos_lowest`] runs Lanczos with full reorthogonalization. Converged
//! Ritz pairs are locked and the next run starts from a fresh random vector in
//! their orthogonal complement, which is how degenerate partners missed by a
//! single Krylov sequence are recovered. A run whose lowest converged Ritz
//! value lies above the `m`-th locked level (and outside its degeneracy group)
//! certifies that nothing below has been missed.

mod resolved;

pub use resolved::{full_spectrum, lowest_levels, parity_ground_states, Solver};

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A real symmetric linear map `y = A x`.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Relative tolerance below which two levels count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Largest operator handed to the dense eigensolver.
pub const DENSE_MAX_DIM: usize = 4096;

#[inline]
pub fn degenerate(a: f64, b: f64) -> bool {
    (a - b).abs() < DEGENERACY_TOL * a.abs().max(1.0)
}

/// The `m` lowest eigenpairs of an operator.
#[derive(Debug, Clone)]
pub struct SpectrumSlice {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    /// `‖A v − e v‖` per pair
    pub residuals: Vec<f64>,
    /// Every eigenvalue strictly below this bound is present in the slice.
    pub complete_below: f64,
    pub converged: bool,
}

impl SpectrumSlice {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Index ranges of consecutive eigenvalues closer than the degeneracy tolerance.
    pub fn degeneracy_groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut groups = Vec::new();
        let mut start = 0;
        for k in 1..=self.len() {
            if k == self.len() || !degenerate(self.eigenvalues[k - 1], self.eigenvalues[k]) {
                groups.push(start..k);
                start = k;
            }
        }
        groups
    }

    /// Number of leading levels needed to hold `m` levels without splitting a
    /// degeneracy group. Fails if the closing group may extend past the slice.
    pub fn closed_count(&self, m: usize) -> Result<usize> {
        if m == 0 || m > self.len() {
            return Err(Error::InvalidArgument(format!(
                "requested {m} levels from a slice of {}",
                self.len()
            )));
        }
        let mut end = m;
        while end < self.len() && degenerate(self.eigenvalues[end - 1], self.eigenvalues[end]) {
            end += 1;
        }
        if end == self.len() && !degenerate_free_above(self.eigenvalues[end - 1], self.complete_below) {
            return Err(Error::DegeneracyTruncated(format!(
                "level {} at {} may have partners beyond the computed slice",
                end,
                self.eigenvalues[end - 1]
            )));
        }
        Ok(end)
    }

    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged(format!(
                "{} pairs, largest residual {:e}",
                self.len(),
                self.residuals.iter().cloned().fold(0.0, f64::max)
            )))
        }
    }
}

fn degenerate_free_above(e: f64, bound: f64) -> bool {
    bound > e && !degenerate(e, bound)
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Total matrix-vector products allowed across all restarts.
    pub max_iter: usize,
    /// Residual tolerance `‖A v − θ v‖` for a converged pair.
    pub tol: f64,
    pub seed: u64,
    /// Krylov dimension cap per run; `0` picks one from `m`.
    pub krylov_dim: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { max_iter: 200_000, tol: 1e-10, seed: 0x5eed, krylov_dim: 0 }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two passes of classical Gram–Schmidt against every vector in `sets`.
fn orthogonalize(w: &mut [f64], sets: &[&[Vec<f64>]]) {
    for _ in 0..2 {
        for set in sets {
            for v in set.iter() {
                let c = dot(v, w);
                axpy(-c, v, w);
            }
        }
    }
}

/// Eigen-decomposition of a small dense symmetric matrix, ascending.
pub(crate) fn symmetric_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NotConverged(format!("dense eigensolver: {e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
    let vectors = evd.U().to_owned();
    // faer returns ascending order; keep it explicit
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    if order.iter().enumerate().all(|(k, &o)| k == o) {
        return Ok((values, vectors));
    }
    let sorted = order.iter().map(|&o| values[o]).collect();
    let u = Mat::from_fn(vectors.nrows(), vectors.ncols(), |i, j| vectors[(i, order[j])]);
    Ok((sorted, u))
}

struct RunOutcome {
    pairs: Vec<(f64, Vec<f64>, f64)>,
    /// lowest Ritz value of this run and whether it converged
    lowest: Option<(f64, bool)>,
}

struct Lanczos<'a, O: SymmetricOperator + ?Sized> {
    op: &'a O,
    tol: f64,
    matvecs: usize,
    max_iter: usize,
}

impl<O: SymmetricOperator + ?Sized> Lanczos<'_, O> {
    fn residual(&self, theta: f64, v: &[f64], scratch: &mut [f64]) -> f64 {
        self.op.apply(v, scratch);
        scratch.iter().zip(v).map(|(av, x)| (av - theta * x).powi(2)).sum::<f64>().sqrt()
    }

    /// One Krylov sequence in the complement of `locked`.
    fn run(&mut self, locked: &[Vec<f64>], start: Vec<f64>, need: usize, kmax: usize) -> Result<RunOutcome> {
        let dim = self.op.dim();
        let mut q = start;
        orthogonalize(&mut q, &[locked]);
        let nq = norm(&q);
        if nq < 1e-8 {
            return Ok(RunOutcome { pairs: Vec::new(), lowest: None });
        }
        q.iter_mut().for_each(|x| *x /= nq);

        let mut basis: Vec<Vec<f64>> = vec![q];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut w = vec![0.0; dim];
        let mut scale = 0.0f64;

        let (theta, s, last_beta) = loop {
            let j = basis.len() - 1;
            self.op.apply(&basis[j], &mut w);
            self.matvecs += 1;
            let alpha = dot(&basis[j], &w);
            axpy(-alpha, &basis[j], &mut w);
            if j > 0 {
                axpy(-betas[j - 1], &basis[j - 1], &mut w);
            }
            orthogonalize(&mut w, &[locked, &basis]);
            let beta = norm(&w);
            alphas.push(alpha);
            scale = scale.max(alpha.abs() + beta);

            let k = alphas.len();
            let breakdown = beta <= 1e-12 * scale.max(1.0);
            let exhausted = k >= kmax || self.matvecs >= self.max_iter;
            let check = breakdown || exhausted || k >= need && (k < 40 || k % 10 == 0);
            if check {
                let t = Mat::from_fn(k, k, |r, c| {
                    if r == c {
                        alphas[r]
                    } else if r + 1 == c {
                        betas[r]
                    } else if c + 1 == r {
                        betas[c]
                    } else {
                        0.0
                    }
                });
                let (theta, s) = symmetric_eigen(&t)?;
                let est = |i: usize| if breakdown { 0.0 } else { (beta * s[(k - 1, i)]).abs() };
                let converged = (0..k.min(need)).all(|i| est(i) <= 0.1 * self.tol);
                if breakdown || exhausted || converged {
                    break (theta, s, if breakdown { 0.0 } else { beta });
                }
            }
            betas.push(beta);
            w.iter_mut().for_each(|x| *x /= beta);
            basis.push(std::mem::replace(&mut w, vec![0.0; dim]));
        };

        let k = theta.len();
        let mut pairs = Vec::new();
        let mut scratch = vec![0.0; dim];
        let mut lowest = None;
        for i in 0..k {
            let est = (last_beta * s[(k - 1, i)]).abs();
            if est > self.tol {
                if i == 0 {
                    lowest = Some((theta[0], false));
                }
                continue;
            }
            let mut v = vec![0.0; dim];
            for (l, b) in basis.iter().enumerate() {
                axpy(s[(l, i)], b, &mut v);
            }
            let nv = norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            let res = self.residual(theta[i], &v, &mut scratch);
            self.matvecs += 1;
            if i == 0 {
                lowest = Some((theta[0], res <= self.tol));
            }
            if res <= self.tol {
                pairs.push((theta[i], v, res));
            }
        }
        Ok(RunOutcome { pairs, lowest })
    }
}

/// The `m` lowest eigenpairs of `op` (more if the `m`-th level is degenerate).
///
/// Non-convergence within `opts.max_iter` matrix-vector products is reported
/// through [`SpectrumSlice::converged`] with whatever pairs were locked.
pub fn lanczos_lowest<O: SymmetricOperator + ?Sized>(
    op: &O,
    m: usize,
    opts: &LanczosOptions,
) -> Result<SpectrumSlice> {
    let dim = op.dim();
    if m == 0 || m > dim {
        return Err(Error::InvalidArgument(format!("cannot compute {m} levels of a {dim}-dimensional operator")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut solver = Lanczos { op, tol: opts.tol, matvecs: 0, max_iter: opts.max_iter };

    let mut values: Vec<f64> = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    let mut residuals: Vec<f64> = Vec::new();
    let mut complete_below = f64::NEG_INFINITY;
    let mut converged = false;
    let mut stalled_runs = 0;

    while solver.matvecs < solver.max_iter {
        let remaining = dim - vectors.len();
        if remaining == 0 {
            complete_below = f64::INFINITY;
            converged = true;
            break;
        }
        let need = m.saturating_sub(vectors.len()).max(1).min(remaining);
        let base = if opts.krylov_dim > 0 { opts.krylov_dim } else { (2 * need + 60).max(100) };
        // a stalled restart gets a longer Krylov space
        let kmax = (base << stalled_runs.min(6)).min(remaining);
        let start: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
        let outcome = solver.run(&vectors, start, need, kmax)?;

        let threshold = {
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.get(m - 1).copied()
        };
        // certification: the complement's lowest level sits above the m-th level
        if let (Some(e_m), Some((low, true))) = (threshold, outcome.lowest) {
            if low > e_m && !degenerate(e_m, low) {
                complete_below = low;
                converged = true;
                break;
            }
        }
        if outcome.pairs.is_empty() {
            if outcome.lowest.is_none() {
                // start vector fell inside the locked span: the space is exhausted
                complete_below = f64::INFINITY;
                converged = vectors.len() >= m;
                break;
            }
            stalled_runs += 1;
            if stalled_runs >= 8 {
                break;
            }
            continue;
        }
        stalled_runs = 0;
        for (theta, v, res) in outcome.pairs {
            values.push(theta);
            vectors.push(v);
            residuals.push(res);
        }
    }

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut slice = SpectrumSlice {
        eigenvalues: order.iter().map(|&o| values[o]).collect(),
        eigenvectors: Vec::with_capacity(order.len()),
        residuals: order.iter().map(|&o| residuals[o]).collect(),
        complete_below,
        converged,
    };
    let mut vectors: Vec<Option<Vec<f64>>> = vectors.into_iter().map(Some).collect();
    for &o in &order {
        slice.eigenvectors.push(vectors[o].take().expect("each vector moved once"));
    }
    if converged {
        truncate_closed(&mut slice, m);
    }
    Ok(slice)
}

/// Keeps the lowest `m` levels plus the rest of the `m`-th degeneracy group.
pub(crate) fn truncate_closed(slice: &mut SpectrumSlice, m: usize) {
    let mut end = m.min(slice.len());
    while end < slice.len() && degenerate(slice.eigenvalues[end - 1], slice.eigenvalues[end]) {
        end += 1;
    }
    if end < slice.len() {
        slice.complete_below = slice.complete_below.min(slice.eigenvalues[end]);
        slice.eigenvalues.truncate(end);
        slice.eigenvectors.truncate(end);
        slice.residuals.truncate(end);
    }
}

/// Complete eigendecomposition of a dense symmetric matrix.
pub fn dense_spectrum(matrix: &Mat<f64>) -> Result<SpectrumSlice> {
    let d = matrix.nrows();
    if d != matrix.ncols() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    if d > DENSE_MAX_DIM {
        return Err(Error::SizeLimit { what: "dense spectrum", n: d.trailing_zeros() as usize, max: 12 });
    }
    let (values, u) = symmetric_eigen(matrix)?;
    let au = matrix * &u;
    let residuals = (0..d)
        .map(|j| (0..d).map(|i| (au[(i, j)] - values[j] * u[(i, j)]).powi(2)).sum::<f64>().sqrt())
        .collect();
    let eigenvectors: Vec<Vec<f64>> = (0..d).map(|j| u.col(j).iter().copied().collect()).collect();
    Ok(SpectrumSlice { eigenvalues: values, eigenvectors, residuals, complete_below: f64::INFINITY, converged: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{assemble_dense, HamiltonianOp, ParitySectorOp};
    use crate::model::{Falloff, ModelSpec};

    struct Diagonal(Vec<f64>);

    impl SymmetricOperator for Diagonal {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.0) {
                *yi = d * xi;
            }
        }
    }

    #[test]
    fn recovers_degenerate_levels_of_a_diagonal_operator() {
        let mut d: Vec<f64> = (0..200).map(|k| 1.0 + k as f64 * 0.1).collect();
        d[5] = -3.0;
        d[17] = -3.0;
        d[101] = -3.0;
        d[60] = -2.0;
        let s = lanczos_lowest(&Diagonal(d), 4, &LanczosOptions::default()).unwrap();
        assert!(s.converged);
        assert_eq!(s.len(), 4);
        for e in &s.eigenvalues[..3] {
            assert!((e + 3.0).abs() < 1e-12);
        }
        assert!((s.eigenvalues[3] + 2.0).abs() < 1e-12);
        assert_eq!(s.degeneracy_groups(), vec![0..3, 3..4]);
    }

    #[test]
    fn closes_degeneracy_group_past_m() {
        let d = vec![0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let s = lanczos_lowest(&Diagonal(d), 2, &LanczosOptions::default()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.closed_count(2).unwrap(), 3);
    }

    #[test]
    fn two_site_ising_is_doubly_degenerate() {
        let spec = ModelSpec::new(2, 1, 1.0, 0.0, Falloff::Exponential, 2.0).unwrap();
        let op = HamiltonianOp::new(&spec);
        let s = lanczos_lowest(&op, 1, &LanczosOptions::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.eigenvalues[0] + 0.5).abs() < 1e-12);
        assert!((s.eigenvalues[1] + 0.5).abs() < 1e-12);
        let dense = dense_spectrum(&assemble_dense(&op).unwrap()).unwrap();
        let expected = [-0.5, -0.5, 0.5, 0.5];
        for (e, x) in dense.eigenvalues.iter().zip(expected) {
            assert!((e - x).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_dense_lowest_four() {
        let spec = ModelSpec::new(8, 1, 0.5, 0.5, Falloff::Exponential, 2.0).unwrap();
        let op = HamiltonianOp::new(&spec);
        let s = lanczos_lowest(&op, 4, &LanczosOptions::default()).unwrap();
        let dense = dense_spectrum(&assemble_dense(&op).unwrap()).unwrap();
        for k in 0..4 {
            assert!((s.eigenvalues[k] - dense.eigenvalues[k]).abs() < 1e-10);
            assert!(s.residuals[k] <= 1e-10);
        }
    }

    #[test]
    fn dense_spectrum_is_orthonormal_and_reconstructs() {
        let spec = ModelSpec::new(6, 3, 0.3, 1.2, Falloff::PowerLaw, 1.0).unwrap();
        let h = assemble_dense(&HamiltonianOp::new(&spec)).unwrap();
        let s = dense_spectrum(&h).unwrap();
        let d = h.nrows();
        for a in 0..d {
            for b in 0..d {
                let overlap = dot(&s.eigenvectors[a], &s.eigenvectors[b]);
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((overlap - expected).abs() < 1e-12);
                let rebuilt: f64 =
                    (0..d).map(|k| s.eigenvectors[k][a] * s.eigenvalues[k] * s.eigenvectors[k][b]).sum();
                assert!((rebuilt - h[(a, b)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn table_one_nearest_neighbour_ground_energy() {
        let spec = ModelSpec::new(14, 1, 0.5, 0.75f64.sqrt(), Falloff::Exponential, 2.0).unwrap();
        let mut best = f64::INFINITY;
        for p in 0..2 {
            let op = ParitySectorOp::new(&spec, p);
            let s = lanczos_lowest(&op, 1, &LanczosOptions::default()).unwrap().require_converged().unwrap();
            best = best.min(s.eigenvalues[0]);
        }
        assert!((best + 7.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_impossible_requests() {
        let op = Diagonal(vec![1.0, 2.0]);
        assert!(lanczos_lowest(&op, 0, &LanczosOptions::default()).is_err());
        assert!(lanczos_lowest(&op, 3, &LanczosOptions::default()).is_err());
    }

    #[test]
    fn reports_non_convergence() {
        let d: Vec<f64> = (0..500).map(|k| (k as f64).sqrt()).collect();
        let opts = LanczosOptions { max_iter: 5, ..Default::default() };
        let s = lanczos_lowest(&Diagonal(d), 3, &opts).unwrap();
        assert!(!s.converged);
        assert!(s.require_converged().is_err());
    }
}
