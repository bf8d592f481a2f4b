//! Energy of fully factorized states and its minimization.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{bonds, ModelSpec};

/// Site-wise Bloch angles of a product state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductAnsatz {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

impl ProductAnsatz {
    pub fn uniform(n_sites: usize, theta: f64, phi: f64) -> Self {
        ProductAnsatz { theta: vec![theta; n_sites], phi: vec![phi; n_sites] }
    }

    /// Maps angles into `θ ∈ [0, π]`, `φ ∈ [0, 2π)` without changing the state.
    pub fn canonical(mut self) -> Self {
        for (t, p) in self.theta.iter_mut().zip(self.phi.iter_mut()) {
            *t = t.rem_euclid(TAU);
            if *t > PI {
                *t = TAU - *t;
                *p += PI;
            }
            *p = p.rem_euclid(TAU);
        }
        self
    }
}

/// `⟨ψ_P|H|ψ_P⟩` as a function of the angles, with its gradient.
#[derive(Debug, Clone)]
pub struct ProductEnergy {
    n_sites: usize,
    /// `(i, j, J_ij (1+γ)/4, J_ij (1−γ)/4)`
    pairs: Vec<(usize, usize, f64, f64)>,
    half_field: f64,
}

impl ProductEnergy {
    pub fn new(spec: &ModelSpec) -> Self {
        let g = spec.anisotropy();
        let pairs =
            bonds(spec).into_iter().map(|b| (b.i, b.j, b.coupling * (1.0 + g) / 4.0, b.coupling * (1.0 - g) / 4.0)).collect();
        ProductEnergy { n_sites: spec.n_sites(), pairs, half_field: 0.5 * spec.field() }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn spins(&self, a: &ProductAnsatz) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let sx = a.theta.iter().zip(&a.phi).map(|(t, p)| t.sin() * p.cos()).collect();
        let sy = a.theta.iter().zip(&a.phi).map(|(t, p)| t.sin() * p.sin()).collect();
        let sz = a.theta.iter().map(|t| t.cos()).collect();
        (sx, sy, sz)
    }

    pub fn energy(&self, a: &ProductAnsatz) -> f64 {
        let (sx, sy, sz) = self.spins(a);
        let bonds: f64 = self.pairs.iter().map(|&(i, j, ax, ay)| ax * sx[i] * sx[j] + ay * sy[i] * sy[j]).sum();
        bonds + self.half_field * sz.iter().sum::<f64>()
    }

    /// Energy and `(∂E/∂θ_i, ∂E/∂φ_i)`.
    pub fn gradient(&self, a: &ProductAnsatz) -> (f64, Vec<f64>, Vec<f64>) {
        let (sx, sy, sz) = self.spins(a);
        let n = self.n_sites;
        let mut bx = vec![0.0; n];
        let mut by = vec![0.0; n];
        let mut e = self.half_field * sz.iter().sum::<f64>();
        for &(i, j, ax, ay) in &self.pairs {
            e += ax * sx[i] * sx[j] + ay * sy[i] * sy[j];
            bx[i] += ax * sx[j];
            bx[j] += ax * sx[i];
            by[i] += ay * sy[j];
            by[j] += ay * sy[i];
        }
        let mut gt = vec![0.0; n];
        let mut gp = vec![0.0; n];
        for k in 0..n {
            let (st, ct) = a.theta[k].sin_cos();
            let (sp, cp) = a.phi[k].sin_cos();
            gt[k] = ct * cp * bx[k] + ct * sp * by[k] - self.half_field * st;
            gp[k] = -st * sp * bx[k] + st * cp * by[k];
        }
        (e, gt, gp)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProductOptions {
    pub restarts: usize,
    /// Gradient-norm convergence threshold.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for ProductOptions {
    fn default() -> Self {
        ProductOptions { restarts: 32, tol: 1e-9, max_iter: 20_000, seed: 0x5eed }
    }
}

#[derive(Debug, Clone)]
pub struct ProductMinimum {
    pub energy: f64,
    pub ansatz: ProductAnsatz,
    pub converged_restarts: usize,
    pub restarts: usize,
}

/// Gradient descent with Armijo backtracking. Returns `(E, ansatz, converged)`.
fn descend(f: &ProductEnergy, mut a: ProductAnsatz, opts: &ProductOptions) -> (f64, ProductAnsatz, bool) {
    let mut step = 1.0;
    let (mut e, mut gt, mut gp) = f.gradient(&a);
    for _ in 0..opts.max_iter {
        let g2: f64 = gt.iter().chain(&gp).map(|g| g * g).sum();
        if g2.sqrt() < opts.tol {
            return (e, a, true);
        }
        loop {
            let trial = ProductAnsatz {
                theta: a.theta.iter().zip(&gt).map(|(t, g)| t - step * g).collect(),
                phi: a.phi.iter().zip(&gp).map(|(p, g)| p - step * g).collect(),
            };
            let et = f.energy(&trial);
            if et <= e - 1e-4 * step * g2 {
                if e - et <= 8.0 * f64::EPSILON * e.abs() && g2.sqrt() < opts.tol.sqrt() {
                    // the energy has hit its rounding floor
                    return (et, trial, true);
                }
                a = trial;
                step = (step * 2.0).min(16.0);
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                // no further decrease is representable
                return (e, a, g2.sqrt() < opts.tol.sqrt());
            }
        }
        (e, gt, gp) = f.gradient(&a);
    }
    let g2: f64 = gt.iter().chain(&gp).map(|g| g * g).sum();
    (e, a, g2.sqrt() < opts.tol)
}

/// Bond strength per site, counting the antipodal bond once. The uniform
/// stationary point is `cos θ = −h / ((1+γ) s)`.
fn effective_coordination(spec: &ModelSpec) -> f64 {
    let n = spec.n_sites() as f64;
    bonds(spec).iter().map(|b| b.coupling.abs()).sum::<f64>() / n
}

fn warm_starts(spec: &ModelSpec) -> Vec<ProductAnsatz> {
    let n = spec.n_sites();
    let s = effective_coordination(spec).max(f64::MIN_POSITIVE);
    let z = (-spec.field() / ((1.0 + spec.anisotropy()) * s)).clamp(-1.0, 1.0);
    let theta = z.acos();
    let alternating = ProductAnsatz {
        theta: vec![theta; n],
        phi: (0..n).map(|k| if k % 2 == 0 { 0.0 } else { PI }).collect(),
    };
    vec![ProductAnsatz::uniform(n, theta, 0.0), alternating, ProductAnsatz::uniform(n, theta, 0.5 * PI)]
}

/// Minimum of `⟨ψ_P|H|ψ_P⟩` over product states, multi-start.
pub fn product_energy_min(spec: &ModelSpec, opts: &ProductOptions) -> Result<ProductMinimum> {
    if opts.restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let f = ProductEnergy::new(spec);
    let n = spec.n_sites();
    let mut starts = warm_starts(spec);
    starts.truncate(opts.restarts);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    while starts.len() < opts.restarts {
        starts.push(ProductAnsatz {
            theta: (0..n).map(|_| rng.gen_range(0.0..PI)).collect(),
            phi: (0..n).map(|_| rng.gen_range(0.0..TAU)).collect(),
        });
    }
    let results: Vec<(f64, ProductAnsatz, bool)> = starts.into_par_iter().map(|a| descend(&f, a, opts)).collect();
    let converged_restarts = results.iter().filter(|r| r.2).count();
    if converged_restarts == 0 {
        return Err(Error::NotConverged(format!("none of {} product-state restarts converged", opts.restarts)));
    }
    let (energy, ansatz, _) = results
        .into_iter()
        .filter(|r| r.2)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one converged restart");
    Ok(ProductMinimum { energy, ansatz: ansatz.canonical(), converged_restarts, restarts: opts.restarts })
}
