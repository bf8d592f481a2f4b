//! Oracles built without any of the library's Hamiltonian code.
#![allow(dead_code)]

use std::f64::consts::PI;

use xyrange::{Falloff, ModelSpec};

/// Ground energy of the nearest-neighbour ring from its Jordan–Wigner modes.
///
/// The chain maps to free fermions with single-particle energy
/// `ε_k = 2√((λ − cos k)² + γ² sin² k)` in units where the hop is one.
/// Even fermion parity takes antiperiodic momenta, odd parity periodic ones,
/// where `k = 0, π` are unpaired and the odd sector needs one extra fermion.
/// The library's normalization is half of that.
pub fn free_fermion_ground_energy(n: usize, gamma: f64, lambda: f64) -> f64 {
    let eps = |k: f64| 2.0 * ((lambda - k.cos()).powi(2) + (gamma * k.sin()).powi(2)).sqrt();
    let nf = n as f64;
    let even: f64 = -0.5 * (0..n).map(|m| eps((2 * m + 1) as f64 * PI / nf)).sum::<f64>();

    let paired: Vec<f64> = (0..n).filter(|&m| m != 0 && 2 * m != n).map(|m| eps(2.0 * PI * m as f64 / nf)).collect();
    let base = -0.5 * paired.iter().sum::<f64>();
    let xi0 = 2.0 * (lambda - 1.0);
    let xi_pi = 2.0 * (lambda + 1.0);
    let vacuum = -0.5 * (xi0 + xi_pi);
    let cheapest = paired.iter().cloned().fold(f64::INFINITY, f64::min);
    let odd = base
        + vacuum
        + [xi0, xi_pi, cheapest, xi0 + xi_pi + cheapest].into_iter().fold(f64::INFINITY, f64::min);

    0.5 * even.min(odd)
}

/// Relative coupling, recomputed from the fall-off laws.
pub fn relative_coupling(falloff: Falloff, alpha: f64, d: usize) -> f64 {
    match falloff {
        Falloff::Exponential => alpha.powi(-(d as i32 - 1)),
        Falloff::PowerLaw => (d as f64).powf(-alpha),
    }
}

type Dense = Vec<Vec<f64>>;

const ID: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];
const X: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, 0.0]];
/// `iY`, real; `Y ⊗ Y = −(iY ⊗ iY)`.
const IY: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];
/// `σ^z` with `|0⟩ ↦ +1`.
const Z: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];

fn kron(a: &Dense, b: &[[f64; 2]; 2]) -> Dense {
    let n = a.len();
    let mut out = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            if a[i][j] == 0.0 {
                continue;
            }
            for p in 0..2 {
                for q in 0..2 {
                    out[2 * i + p][2 * j + q] = a[i][j] * b[p][q];
                }
            }
        }
    }
    out
}

/// `⊗_k ops[k]` with site `k` on bit `k` of the basis index.
fn site_product(ops: &[[[f64; 2]; 2]]) -> Dense {
    let mut m = vec![vec![1.0]];
    for op in ops.iter().rev() {
        m = kron(&m, op);
    }
    m
}

fn add_scaled(acc: &mut Dense, m: &Dense, c: f64) {
    for (ra, rm) in acc.iter_mut().zip(m) {
        for (a, x) in ra.iter_mut().zip(rm) {
            *a += c * x;
        }
    }
}

/// `H = Σ_{i<j, d≤Z} (J c_d/4)[(1+γ)σˣσˣ + (1−γ)σʸσʸ] + (h/2)Σσᶻ` from Pauli
/// Kronecker products, `J = −1`, `h = λJ`. Every unordered pair appears once.
pub fn pauli_hamiltonian(spec: &ModelSpec) -> Dense {
    let n = spec.n_sites();
    let dim = 1usize << n;
    let g = spec.anisotropy();
    let j = -1.0;
    let h = spec.field_ratio() * j;
    let mut out = vec![vec![0.0; dim]; dim];
    for a in 0..n {
        for b in a + 1..n {
            let d = (b - a).min(n - (b - a));
            if d > spec.range() {
                continue;
            }
            let c = j * relative_coupling(spec.falloff(), spec.alpha(), d) / 4.0;
            let mut ops = vec![ID; n];
            ops[a] = X;
            ops[b] = X;
            add_scaled(&mut out, &site_product(&ops), c * (1.0 + g));
            ops[a] = IY;
            ops[b] = IY;
            add_scaled(&mut out, &site_product(&ops), -c * (1.0 - g));
        }
    }
    for a in 0..n {
        let mut ops = vec![ID; n];
        ops[a] = Z;
        add_scaled(&mut out, &site_product(&ops), h / 2.0);
    }
    out
}

pub fn dense_apply(m: &Dense, v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Dense) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j].powi(2)).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn spec(n: usize, z: usize, gamma: f64, lambda: f64, falloff: Falloff) -> ModelSpec {
    let alpha = match falloff {
        Falloff::Exponential => 2.0,
        Falloff::PowerLaw => 1.0,
    };
    ModelSpec::new(n, z, gamma, lambda, falloff, alpha).unwrap()
}
