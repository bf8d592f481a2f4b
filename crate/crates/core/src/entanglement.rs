//! Two-site reduced states, logarithmic negativity and the quantities built
//! from entanglement profiles.
//!
//! Two-qubit matrices use the basis `{00, 01, 10, 11}` with the first label
//! for site `i`; label `0` is a cleared bit (`σ^z = +1`). All matrices are real
//! because every eigenvector of the Hamiltonian is.

use faer::{Mat, Side};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::states::StateEnsemble;

/// Entanglement below this is reported as exactly zero.
pub const ZERO_CLAMP: f64 = 1e-12;

/// Threshold above which entanglement counts as nonvanishing.
pub const ACTIVATION_EPS: f64 = 1e-4;

/// Largest `N` for which a mixed ensemble can be cut one-versus-rest.
pub const MIXED_CUT_MAX_SITES: usize = 12;

/// Reduced state `ϱ_ij` of sites `i` and `j`, separated by `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    pub rho: [[f64; 4]; 4],
    pub i: usize,
    pub j: usize,
    pub r: usize,
}

impl TwoQubitState {
    pub fn trace(&self) -> f64 {
        (0..4).map(|k| self.rho[k][k]).sum()
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..4 {
            for b in 0..4 {
                worst = worst.max((self.rho[a][b] - self.rho[b][a]).abs());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Result<[f64; 4]> {
        symmetric_eigenvalues4(&self.rho)
    }

    /// Partial transpose over the first site.
    pub fn partial_transpose(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        out[2 * a + b][2 * c + d] = self.rho[2 * c + b][2 * a + d];
                    }
                }
            }
        }
        out
    }

    /// Weighted sum of two-site states of the same pair.
    pub fn mix(states: &[TwoQubitState], weights: &[f64]) -> TwoQubitState {
        let first = states[0];
        let mut rho = [[0.0; 4]; 4];
        for (s, &w) in states.iter().zip(weights) {
            for a in 0..4 {
                for b in 0..4 {
                    rho[a][b] += w * s.rho[a][b];
                }
            }
        }
        TwoQubitState { rho, ..first }
    }
}

fn symmetric_eigenvalues4(m: &[[f64; 4]; 4]) -> Result<[f64; 4]> {
    let mat = Mat::from_fn(4, 4, |i, j| m[i][j]);
    let values = mat
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NotConverged(format!("4x4 eigenvalues: {e:?}")))?;
    let mut out = [0.0; 4];
    out.copy_from_slice(&values);
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// `Tr_{rest} |v⟩⟨v|` for sites `i`, `j`.
fn reduce_vector(v: &[f64], i: usize, j: usize) -> [[f64; 4]; 4] {
    let (bi, bj) = (1usize << i, 1usize << j);
    let mask = bi | bj;
    let mut rho = [[0.0; 4]; 4];
    for env in (0..v.len()).filter(|s| s & mask == 0) {
        let amp = [v[env], v[env | bj], v[env | bi], v[env | bi | bj]];
        for a in 0..4 {
            if amp[a] == 0.0 {
                continue;
            }
            for b in a..4 {
                rho[a][b] += amp[a] * amp[b];
            }
        }
    }
    for a in 0..4 {
        for b in 0..a {
            rho[a][b] = rho[b][a];
        }
    }
    rho
}

fn check_sites(n_sites: usize, i: usize, j: usize) -> Result<usize> {
    if i == j || i >= n_sites || j >= n_sites {
        return Err(Error::InvalidArgument(format!("site pair ({i}, {j}) invalid for N = {n_sites}")));
    }
    let d = i.abs_diff(j);
    Ok(d.min(n_sites - d))
}

/// Per-vector reduced states of one site pair, in ensemble order.
pub fn reduce_each(vectors: &[Vec<f64>], n_sites: usize, i: usize, j: usize) -> Result<Vec<TwoQubitState>> {
    let r = check_sites(n_sites, i, j)?;
    Ok(vectors
        .par_iter()
        .map(|v| TwoQubitState { rho: reduce_vector(v, i, j), i, j, r })
        .collect())
}

/// `ϱ_ij = Σ_k w_k Tr_{rest} |v_k⟩⟨v_k|`.
pub fn reduce_two_site(ensemble: &StateEnsemble<'_>, i: usize, j: usize) -> Result<TwoQubitState> {
    let n = ensemble.n_sites();
    let each = reduce_each(&ensemble.vectors, n, i, j)?;
    Ok(TwoQubitState::mix(&each, &ensemble.weights))
}

/// Only the diagonal and the `ρ_14`, `ρ_23` corners are nonzero.
pub fn is_x_state(rho: &TwoQubitState, tol: f64) -> bool {
    let m = &rho.rho;
    [m[0][1], m[0][2], m[1][3], m[2][3], m[1][0], m[2][0], m[3][1], m[3][2]]
        .iter()
        .all(|x| x.abs() < tol)
}

fn from_negativity(negativity: f64) -> f64 {
    let e = (2.0 * negativity + 1.0).log2();
    if e < ZERO_CLAMP {
        0.0
    } else {
        e
    }
}

/// `E = log₂(2𝒩 + 1)` from the full partial-transpose spectrum.
pub fn log_negativity(rho: &TwoQubitState) -> Result<f64> {
    if rho.asymmetry() > 1e-10 {
        return Err(Error::InvalidState(format!("not Hermitian (asymmetry {:e})", rho.asymmetry())));
    }
    let pt = symmetric_eigenvalues4(&rho.partial_transpose())?;
    let negativity: f64 = -pt.iter().filter(|&&x| x < 0.0).sum::<f64>();
    Ok(from_negativity(negativity))
}

/// Closed form for X states from the two 2×2 partial-transpose blocks.
pub fn x_state_log_negativity(rho: &TwoQubitState) -> Result<f64> {
    if !is_x_state(rho, 1e-8) {
        return Err(Error::InvalidState("not an X state".into()));
    }
    let m = &rho.rho;
    let mu1 = 0.5 * ((m[0][0] + m[3][3]) - ((m[0][0] - m[3][3]).powi(2) + 4.0 * m[1][2].powi(2)).sqrt());
    let mu2 = 0.5 * ((m[1][1] + m[2][2]) - ((m[1][1] - m[2][2]).powi(2) + 4.0 * m[0][3].powi(2)).sqrt());
    Ok(from_negativity(-mu1.min(mu2).min(0.0)))
}

/// `{E_r : r = 1 … N/2}` of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementProfile {
    /// `values[r - 1] = E_r`
    pub values: Vec<f64>,
    pub n_sites: usize,
    pub beta: f64,
}

impl EntanglementProfile {
    pub fn get(&self, r: usize) -> f64 {
        self.values[r - 1]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// All two-site states `ϱ_{0,r}` for `r = 1 … N/2`.
pub fn reduced_states(ensemble: &StateEnsemble<'_>) -> Result<Vec<TwoQubitState>> {
    let n = ensemble.n_sites();
    (1..=n / 2).map(|r| reduce_two_site(ensemble, 0, r)).collect()
}

pub fn profile(ensemble: &StateEnsemble<'_>) -> Result<EntanglementProfile> {
    let values = reduced_states(ensemble)?.iter().map(log_negativity).collect::<Result<_>>()?;
    Ok(EntanglementProfile { values, n_sites: ensemble.n_sites(), beta: ensemble.beta })
}

/// `E_sum = 2 Σ_r E_r`.
pub fn e_sum(profile: &EntanglementProfile) -> f64 {
    2.0 * profile.total()
}

/// Logarithmic negativity of the cut between site 0 and the rest.
pub fn one_vs_rest_entanglement(ensemble: &StateEnsemble<'_>) -> Result<f64> {
    let n = ensemble.n_sites();
    let live: Vec<(f64, &Vec<f64>)> =
        ensemble.weights.iter().zip(ensemble.vectors.iter()).filter(|(w, _)| **w > 0.0).map(|(w, v)| (*w, v)).collect();
    if live.len() == 1 {
        let v = live[0].1;
        let (mut p0, mut p1, mut c) = (0.0, 0.0, 0.0);
        for s in (0..v.len()).step_by(2) {
            p0 += v[s] * v[s];
            p1 += v[s + 1] * v[s + 1];
            c += v[s] * v[s + 1];
        }
        let tr = p0 + p1;
        let disc = ((p0 - p1).powi(2) + 4.0 * c * c).sqrt();
        let l1 = (0.5 * (tr + disc)).max(0.0);
        let l2 = (0.5 * (tr - disc)).max(0.0);
        let trace_norm = (l1.sqrt() + l2.sqrt()).powi(2);
        return Ok(from_negativity(0.5 * (trace_norm - 1.0)));
    }
    if n > MIXED_CUT_MAX_SITES {
        return Err(Error::SizeLimit { what: "mixed one-versus-rest entanglement", n, max: MIXED_CUT_MAX_SITES });
    }
    mixed_cut_trace_norm(&live).map(|t| from_negativity(0.5 * (t - 1.0)))
}

/// `‖ϱ^{T_0}‖₁` of a mixed ensemble. Writing `v_k = |0⟩|a_k⟩ + |1⟩|b_k⟩`,
/// the partial transpose lives on `C² ⊗ span{a_k, b_k}`, which is where it is
/// diagonalized.
fn mixed_cut_trace_norm(live: &[(f64, &Vec<f64>)]) -> Result<f64> {
    let half = live[0].1.len() / 2;
    let parts: Vec<[Vec<f64>; 2]> = live
        .iter()
        .map(|(_, v)| [(0..half).map(|s| v[2 * s]).collect(), (0..half).map(|s| v[2 * s + 1]).collect()])
        .collect();

    // orthonormal basis of the rest-space support
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for part in parts.iter().flat_map(|p| p.iter()) {
        let mut u = part.clone();
        for _ in 0..2 {
            for q in &basis {
                let c: f64 = q.iter().zip(&u).map(|(a, b)| a * b).sum();
                u.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nu > 1e-10 {
            u.iter_mut().for_each(|x| *x /= nu);
            basis.push(u);
        }
        if basis.len() == half {
            break;
        }
    }
    let d = basis.len();
    let coeffs: Vec<[Vec<f64>; 2]> = parts
        .iter()
        .map(|p| {
            let proj = |c: &Vec<f64>| basis.iter().map(|q| q.iter().zip(c).map(|(a, b)| a * b).sum()).collect();
            [proj(&p[0]), proj(&p[1])]
        })
        .collect();
    // ⟨y,p| ϱ^{T_0} |x,q⟩ = Σ_k w_k c^k_x[p] c^k_y[q]
    let pt = Mat::<f64>::from_fn(2 * d, 2 * d, |row, col| {
        let (y, p) = (row / d, row % d);
        let (x, q) = (col / d, col % d);
        live.iter().zip(&coeffs).map(|((w, _), c)| w * c[x][p] * c[y][q]).sum::<f64>()
    });
    let values = pt
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NotConverged(format!("partial transpose spectrum: {e:?}")))?;
    Ok(values.iter().map(|x: &f64| x.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::borrow::Cow;

    fn bell() -> TwoQubitState {
        let mut rho = [[0.0; 4]; 4];
        rho[0][0] = 0.5;
        rho[3][3] = 0.5;
        rho[0][3] = 0.5;
        rho[3][0] = 0.5;
        TwoQubitState { rho, i: 0, j: 1, r: 1 }
    }

    fn werner(p: f64) -> TwoQubitState {
        let b = bell();
        let mut rho = [[0.0; 4]; 4];
        for a in 0..4 {
            for c in 0..4 {
                rho[a][c] = p * b.rho[a][c] + if a == c { (1.0 - p) / 4.0 } else { 0.0 };
            }
        }
        TwoQubitState { rho, ..b }
    }

    fn ensemble(vectors: Vec<Vec<f64>>, weights: Vec<f64>) -> StateEnsemble<'static> {
        let k = weights.len();
        StateEnsemble { weights, energies: vec![0.0; k], vectors: Cow::Owned(vectors), beta: f64::INFINITY, truncation: k }
    }

    #[test]
    fn product_state_reduces_to_projector() {
        let mut v = vec![0.0; 256];
        v[0] = 1.0;
        let st = StateEnsemble::pure(v, 0.0);
        let rho = reduce_two_site(&st, 2, 5).unwrap();
        assert_eq!(rho.rho[0][0], 1.0);
        assert_eq!(rho.trace(), 1.0);
        assert_eq!(log_negativity(&rho).unwrap(), 0.0);
    }

    #[test]
    fn two_site_bell_vector_is_recovered() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let st = StateEnsemble::pure(vec![s, 0.0, 0.0, s], 0.0);
        let rho = reduce_two_site(&st, 0, 1).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((rho.rho[a][b] - bell().rho[a][b]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bell_state_has_unit_negativity() {
        assert!((log_negativity(&bell()).unwrap() - 1.0).abs() < 1e-12);
        assert!((x_state_log_negativity(&bell()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn werner_half_closed_form() {
        let w = werner(0.5);
        let expected = (5.0f64 / 4.0).log2();
        assert!((log_negativity(&w).unwrap() - expected).abs() < 1e-12);
        assert!((x_state_log_negativity(&w).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn x_state_detection() {
        let mut m = [[0.0; 4]; 4];
        for k in 0..4 {
            m[k][k] = 0.25;
        }
        let diag = TwoQubitState { rho: m, i: 0, j: 1, r: 1 };
        assert!(is_x_state(&diag, 1e-8));
        assert_eq!(x_state_log_negativity(&diag).unwrap(), 0.0);
        m[0][1] = 0.1;
        m[1][0] = 0.1;
        let not_x = TwoQubitState { rho: m, ..diag };
        assert!(!is_x_state(&not_x, 1e-8));
        assert!(x_state_log_negativity(&not_x).is_err());
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let mut b = bell();
        b.rho[0][3] = 0.4;
        assert!(matches!(log_negativity(&b), Err(Error::InvalidState(_))));
    }

    #[test]
    fn one_vs_rest_of_product_and_bell() {
        let mut v = vec![0.0; 16];
        v[3] = 1.0;
        assert_eq!(one_vs_rest_entanglement(&StateEnsemble::pure(v, 0.0)).unwrap(), 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![0.0; 16];
        v[0] = s;
        v[0b1111] = s;
        assert!((one_vs_rest_entanglement(&StateEnsemble::pure(v, 0.0)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_cut_matches_pure_formula_and_separable_mixtures() {
        // a single vector routed through the mixed path
        let v: Vec<f64> = (0..32).map(|k| ((k * 7 % 5) as f64 - 2.0) / 3.0).collect();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let v: Vec<f64> = v.iter().map(|x| x / nv).collect();
        let pure = one_vs_rest_entanglement(&StateEnsemble::pure(v.clone(), 0.0)).unwrap();
        let t = mixed_cut_trace_norm(&[(1.0, &v)]).unwrap();
        assert!((from_negativity(0.5 * (t - 1.0)) - pure).abs() < 1e-12);
        // mixture of |0…0⟩ and |1…1⟩ is separable
        let mut a = vec![0.0; 16];
        a[0] = 1.0;
        let mut b = vec![0.0; 16];
        b[15] = 1.0;
        let e = one_vs_rest_entanglement(&ensemble(vec![a, b], vec![0.5, 0.5])).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn mixed_cut_refused_for_large_chains() {
        let mut a = vec![0.0; 1 << 14];
        a[0] = 1.0;
        let mut b = vec![0.0; 1 << 14];
        b[1] = 1.0;
        assert!(matches!(
            one_vs_rest_entanglement(&ensemble(vec![a, b], vec![0.5, 0.5])),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn e_sum_doubles_total() {
        let p = EntanglementProfile { values: vec![0.3, 0.1, 0.0], n_sites: 6, beta: f64::INFINITY };
        assert!((e_sum(&p) - 0.8).abs() < 1e-15);
        let zero = EntanglementProfile { values: vec![0.0; 3], n_sites: 6, beta: f64::INFINITY };
        assert_eq!(e_sum(&zero), 0.0);
    }
}
