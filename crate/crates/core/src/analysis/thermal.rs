//! Thermal entanglement, the energy witness, the critical temperature `β*`
//! and its rigidity under changes of the field.
//!
//! A [`ThermalLadder`] keeps, for every computed level, its energy and its
//! two-site reduced states. Any canonical state over those levels then reduces
//! to a weighted sum of `4 × 4` matrices, so scanning `β` never touches the
//! `2^N`-dimensional vectors again.

use rayon::prelude::*;

use crate::eigensolve::{degenerate, full_spectrum, lowest_levels, Solver, SpectrumSlice};
use crate::entanglement::{log_negativity, reduce_each, TwoQubitState, ACTIVATION_EPS};
use crate::error::{Error, Result};
use crate::hamiltonian::DENSE_MAX_SITES;
use crate::model::ModelSpec;
use crate::states::boltzmann_weights;

#[derive(Debug, Clone)]
pub struct ThermalLadder {
    energies: Vec<f64>,
    separations: Vec<usize>,
    /// `states[s][k]`: level `k` reduced onto sites `(0, separations[s])`
    states: Vec<Vec<TwoQubitState>>,
    /// every level below this is in the ladder
    complete_below: f64,
}

impl ThermalLadder {
    pub fn new(spectrum: &SpectrumSlice, separations: &[usize]) -> Result<Self> {
        let n = spectrum.eigenvectors.first().map_or(0, |v| v.len().trailing_zeros() as usize);
        let states = separations
            .iter()
            .map(|&r| reduce_each(&spectrum.eigenvectors, n, 0, r))
            .collect::<Result<_>>()?;
        Ok(ThermalLadder {
            energies: spectrum.eigenvalues.clone(),
            separations: separations.to_vec(),
            states,
            complete_below: spectrum.complete_below,
        })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// The lowest `m` levels, extended to close the `m`-th degeneracy group.
    pub fn truncated(&self, m: usize) -> Result<ThermalLadder> {
        if m == 0 || m > self.len() {
            return Err(Error::InvalidArgument(format!("truncation {m} outside 1..={}", self.len())));
        }
        let mut end = m;
        while end < self.len() && degenerate(self.energies[end - 1], self.energies[end]) {
            end += 1;
        }
        if end == self.len() && self.complete_below.is_finite() && degenerate(self.energies[end - 1], self.complete_below) {
            return Err(Error::DegeneracyTruncated(format!("level {end} may have uncomputed partners")));
        }
        Ok(ThermalLadder {
            energies: self.energies[..end].to_vec(),
            separations: self.separations.clone(),
            states: self.states.iter().map(|s| s[..end].to_vec()).collect(),
            complete_below: if end < self.len() { self.energies[end] } else { self.complete_below },
        })
    }

    pub fn weights(&self, beta: f64) -> Result<Vec<f64>> {
        boltzmann_weights(&self.energies, beta)
    }

    /// `⟨H⟩_β`.
    pub fn energy(&self, beta: f64) -> Result<f64> {
        Ok(self.weights(beta)?.iter().zip(&self.energies).map(|(w, e)| w * e).sum())
    }

    pub fn reduced(&self, beta: f64, r: usize) -> Result<TwoQubitState> {
        let s = self
            .separations
            .iter()
            .position(|&x| x == r)
            .ok_or_else(|| Error::InvalidArgument(format!("separation {r} was not prepared")))?;
        Ok(TwoQubitState::mix(&self.states[s], &self.weights(beta)?))
    }

    /// `E_r` of the canonical state at `β`.
    pub fn entanglement(&self, beta: f64, r: usize) -> Result<f64> {
        log_negativity(&self.reduced(beta, r)?)
    }
}

/// Spectrum holding at least `m` closed levels: exact for `N <= 12`.
pub fn thermal_spectrum(spec: &ModelSpec, m: Option<usize>) -> Result<SpectrumSlice> {
    match m {
        None if spec.n_sites() <= DENSE_MAX_SITES => full_spectrum(spec),
        None => Err(Error::InvalidArgument(format!("N = {} needs a truncation m", spec.n_sites()))),
        Some(m) => lowest_levels(spec, m.min(spec.dim()), Solver::default()),
    }
}

/// Ladder of the canonical state of `spec` truncated to `m` levels (`None`: all).
pub fn thermal_ladder(spec: &ModelSpec, m: Option<usize>, separations: &[usize]) -> Result<ThermalLadder> {
    let spectrum = thermal_spectrum(spec, m)?;
    let ladder = ThermalLadder::new(&spectrum, separations)?;
    match m {
        Some(m) => ladder.truncated(m.min(ladder.len())),
        None => Ok(ladder),
    }
}

/// Coarse grid plus bisection used to locate `β*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaScan {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub resolution: f64,
    pub eps: f64,
}

impl Default for BetaScan {
    fn default() -> Self {
        BetaScan { start: 0.0, stop: 10.0, step: 0.01, resolution: 1e-3, eps: ACTIVATION_EPS }
    }
}

impl BetaScan {
    pub fn grid(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaStar {
    /// upper end of the final bracket: `E_1 > ε` here
    pub beta: f64,
    /// lower end: `E_1 <= ε`, or equal to `beta` if the scan starts entangled
    pub below: f64,
}

/// Smallest `β` on the scan at which `E_1` exceeds `ε`, refined by bisection.
pub fn beta_star_on(ladder: &ThermalLadder, scan: &BetaScan) -> Result<Option<BetaStar>> {
    let active = |beta: f64| -> Result<bool> { Ok(ladder.entanglement(beta, 1)? > scan.eps) };
    let grid = scan.grid();
    let mut prev: Option<f64> = None;
    for &b in &grid {
        if active(b)? {
            let Some(mut lo) = prev else {
                return Ok(Some(BetaStar { beta: b, below: b }));
            };
            let mut hi = b;
            while hi - lo > scan.resolution {
                let mid = 0.5 * (lo + hi);
                if active(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(Some(BetaStar { beta: hi, below: lo }));
        }
        prev = Some(b);
    }
    Ok(None)
}

/// `β*` of `spec`, truncated to `m` levels (`None`: exact, `N <= 12`).
pub fn beta_star(spec: &ModelSpec, m: Option<usize>, scan: &BetaScan) -> Result<Option<BetaStar>> {
    beta_star_on(&thermal_ladder(spec, m, &[1])?, scan)
}

/// `W(β) = ⟨H⟩_β − E_P`.
pub fn witness_on(ladder: &ThermalLadder, beta: f64, product_energy: f64) -> Result<f64> {
    Ok(ladder.energy(beta)? - product_energy)
}

/// Witness of the canonical state of `spec` at `β`.
pub fn witness(spec: &ModelSpec, beta: f64, m: Option<usize>, product_energy: f64) -> Result<f64> {
    let spectrum = thermal_spectrum(spec, m)?;
    let count = match m {
        Some(m) => spectrum.closed_count(m.min(spectrum.len()))?,
        None => spectrum.len(),
    };
    let w = boltzmann_weights(&spectrum.eigenvalues[..count], beta)?;
    let e: f64 = w.iter().zip(&spectrum.eigenvalues).map(|(w, e)| w * e).sum();
    Ok(e - product_energy)
}

/// One point of a rigidity scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidityPoint {
    pub lambda: f64,
    pub beta_star: Option<f64>,
}

/// Maximal run of consecutive points sharing one `β*` level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub lambda_from: f64,
    pub lambda_to: f64,
    /// upper edge of the shared cell
    pub beta_star: f64,
    pub points: usize,
}

/// `β*(λ)` at `Z = N/2` over a field grid.
pub fn rigidity_scan(spec: &ModelSpec, lambdas: &[f64], m: Option<usize>, scan: &BetaScan) -> Result<Vec<RigidityPoint>> {
    let base = spec.with_range(spec.n_sites() / 2)?;
    lambdas
        .par_iter()
        .map(|&lambda| {
            let s = base.with_field_ratio(lambda)?;
            Ok(RigidityPoint { lambda, beta_star: beta_star(&s, m, scan)?.map(|b| b.beta) })
        })
        .collect()
}

/// Default `β*` cell for plateau extraction.
pub const PLATEAU_CELL: f64 = 0.02;

/// Groups consecutive points whose `β*` falls in the same cell of a grid
/// of width `cell` (the cell `(k−1)·cell < β* ≤ k·cell`). `β*(λ)` is smooth,
/// so plateaus only exist relative to such a quantization. Points without a
/// `β*` break plateaus.
pub fn plateaus(points: &[RigidityPoint], cell: f64) -> Vec<Plateau> {
    let mut out: Vec<Plateau> = Vec::new();
    let mut open: Option<i64> = None;
    for p in points {
        let Some(b) = p.beta_star else {
            open = None;
            continue;
        };
        let k = (b / cell - 1e-9).ceil() as i64;
        match out.last_mut() {
            Some(last) if open == Some(k) => {
                last.lambda_to = p.lambda;
                last.points += 1;
            }
            _ => {
                out.push(Plateau { lambda_from: p.lambda, lambda_to: p.lambda, beta_star: k as f64 * cell, points: 1 });
                open = Some(k);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Falloff;

    #[test]
    fn plateau_grouping() {
        let pts: Vec<RigidityPoint> = [0.995, 1.0, 1.195, 1.2, 1.2, 1.5]
            .iter()
            .enumerate()
            .map(|(k, &b)| RigidityPoint { lambda: k as f64 * 0.1, beta_star: Some(b) })
            .collect();
        let p = plateaus(&pts, 0.01);
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].points, 2);
        assert_eq!(p[1].points, 3);
        assert!((p[1].lambda_to - 0.4).abs() < 1e-12);
    }

    #[test]
    fn ladder_matches_explicit_ensemble() {
        let spec = ModelSpec::new(8, 2, 0.5, 0.45, Falloff::Exponential, 2.0).unwrap();
        let spectrum = full_spectrum(&spec).unwrap();
        let ladder = ThermalLadder::new(&spectrum, &[1, 3]).unwrap();
        let ens = crate::states::thermal_state(&spectrum, 1.3).unwrap();
        for r in [1, 3] {
            let a = ladder.reduced(1.3, r).unwrap();
            let b = crate::entanglement::reduce_two_site(&ens, 0, r).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert!((a.rho[i][j] - b.rho[i][j]).abs() < 1e-12);
                }
            }
        }
        assert!((ladder.energy(1.3).unwrap() - ens.energy()).abs() < 1e-12);
    }

    #[test]
    fn beta_star_brackets_the_threshold() {
        let spec = ModelSpec::new(8, 4, 0.5, 0.45, Falloff::Exponential, 2.0).unwrap();
        let ladder = thermal_ladder(&spec, None, &[1]).unwrap();
        let scan = BetaScan::default();
        let b = beta_star_on(&ladder, &scan).unwrap().expect("entangled at low temperature");
        assert!(b.beta - b.below <= scan.resolution + 1e-15);
        assert!(ladder.entanglement(b.beta, 1).unwrap() > scan.eps);
        assert!(ladder.entanglement(b.below, 1).unwrap() <= scan.eps);
    }

    #[test]
    fn truncation_closes_degenerate_groups() {
        let spec = ModelSpec::new(8, 1, 0.0, 0.0, Falloff::Exponential, 2.0).unwrap();
        let ladder = thermal_ladder(&spec, None, &[1]).unwrap();
        let t = ladder.truncated(1).unwrap();
        let g = ladder.energies().iter().filter(|&&e| degenerate(e, ladder.energies()[0])).count();
        assert_eq!(t.len(), g);
    }
}
