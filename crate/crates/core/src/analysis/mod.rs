//! Derived analyses: factorization points, product-state energies, thermal
//! robustness, entanglement length and maximal-entanglement gaps.

pub mod factorization;
pub mod length;
pub mod product;
pub mod thermal;

pub use factorization::{
    factorization_report, observed_factorization, predicted_factorization, FactorizationReport, LambdaScan,
    ObservedFactorization,
};
pub use length::{entanglement_length, fit_exponential, LengthFit};
pub use product::{product_energy_min, ProductAnsatz, ProductEnergy, ProductMinimum, ProductOptions};
pub use thermal::{
    beta_star, beta_star_on, plateaus, rigidity_scan, thermal_ladder, witness, witness_on, BetaScan, BetaStar, Plateau,
    RigidityPoint, ThermalLadder, PLATEAU_CELL,
};

use crate::eigensolve::{parity_ground_states, Solver};
use crate::entanglement::{profile, EntanglementProfile};
use crate::error::Result;
use crate::model::ModelSpec;
use crate::states::{ground_mixture, DOUBLET_SPLIT_TOL};

/// Ground energy and zero-temperature entanglement profile, with a
/// quasi-degenerate parity doublet mixed in equal parts.
pub fn ground_profile(spec: &ModelSpec) -> Result<(f64, EntanglementProfile)> {
    let spectrum = parity_ground_states(spec, Solver::default(), DOUBLET_SPLIT_TOL)?;
    let state = ground_mixture(&spectrum)?;
    Ok((spectrum.eigenvalues[0], profile(&state)?))
}

/// `Δ_r = E_r^max − E_{r+1}^max` with maxima taken over the profiles.
pub fn max_entanglement_gaps(profiles: &[EntanglementProfile]) -> Vec<f64> {
    let maxima = max_entanglements(profiles);
    maxima.windows(2).map(|w| w[0] - w[1]).collect()
}

/// `E_r^max` over the profiles, `r = 1 … N/2`.
pub fn max_entanglements(profiles: &[EntanglementProfile]) -> Vec<f64> {
    let len = profiles.iter().map(|p| p.values.len()).max().unwrap_or(0);
    (0..len)
        .map(|k| profiles.iter().filter_map(|p| p.values.get(k)).cloned().fold(0.0, f64::max))
        .collect()
}
