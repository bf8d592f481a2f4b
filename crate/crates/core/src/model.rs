//! Model parameterization of the variable-range anisotropic XY ring.
//!
//! A [`ModelSpec`] fixes the chain length `N`, the interaction range `Z`
//! (number of neighbours coupled on each side), the anisotropy `γ`, the field
//! ratio `λ = h/J` and the law by which couplings decay with distance. The
//! overall coupling is ferromagnetic and fixed at `J = -1`.

use std::fmt;

use crate::error::{Error, Result};

/// Overall coupling constant. Ferromagnetic.
pub const J: f64 = -1.0;

/// Largest chain length the basis encoding and eigensolvers support.
pub const MAX_SITES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Falloff {
    /// `J_d / J = alpha^{-(d-1)}`
    Exponential,
    /// `J_d / J = d^{-alpha}`
    PowerLaw,
}

impl Falloff {
    pub fn as_str(self) -> &'static str {
        match self {
            Falloff::Exponential => "exponential",
            Falloff::PowerLaw => "power",
        }
    }
}

impl fmt::Display for Falloff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Falloff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exponential" | "exp" | "e" => Ok(Falloff::Exponential),
            "power" | "powerlaw" | "power-law" | "power_law" | "p" => Ok(Falloff::PowerLaw),
            other => Err(Error::InvalidModel(format!("unknown fall-off law '{other}'"))),
        }
    }
}

/// Full parameterization of one Hamiltonian instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    n_sites: usize,
    range: usize,
    anisotropy: f64,
    field_ratio: f64,
    falloff: Falloff,
    alpha: f64,
}

impl ModelSpec {
    pub fn new(
        n_sites: usize,
        range: usize,
        anisotropy: f64,
        field_ratio: f64,
        falloff: Falloff,
        alpha: f64,
    ) -> Result<Self> {
        let spec = ModelSpec { n_sites, range, anisotropy, field_ratio, falloff, alpha };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_sites;
        if n < 2 || n % 2 != 0 || n > MAX_SITES {
            return Err(Error::InvalidModel(format!(
                "N must be even with 2 <= N <= {MAX_SITES}, got {n}"
            )));
        }
        if self.range == 0 || self.range > n / 2 {
            return Err(Error::InvalidModel(format!(
                "range Z must satisfy 1 <= Z <= N/2 = {}, got {}",
                n / 2,
                self.range
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidModel(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.anisotropy) {
            return Err(Error::InvalidModel(format!(
                "anisotropy must lie in [0, 1], got {}",
                self.anisotropy
            )));
        }
        if !self.field_ratio.is_finite() {
            return Err(Error::InvalidModel("field ratio must be finite".into()));
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn anisotropy(&self) -> f64 {
        self.anisotropy
    }

    pub fn field_ratio(&self) -> f64 {
        self.field_ratio
    }

    pub fn falloff(&self) -> Falloff {
        self.falloff
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Transverse field `h = λ J`.
    pub fn field(&self) -> f64 {
        self.field_ratio * J
    }

    /// Hilbert-space dimension `2^N`.
    pub fn dim(&self) -> usize {
        1usize << self.n_sites
    }

    pub fn with_field_ratio(&self, field_ratio: f64) -> Result<Self> {
        ModelSpec { field_ratio, ..*self }.validate_into()
    }

    pub fn with_range(&self, range: usize) -> Result<Self> {
        ModelSpec { range, ..*self }.validate_into()
    }

    pub fn with_anisotropy(&self, anisotropy: f64) -> Result<Self> {
        ModelSpec { anisotropy, ..*self }.validate_into()
    }

    pub fn with_n_sites(&self, n_sites: usize) -> Result<Self> {
        ModelSpec { n_sites, ..*self }.validate_into()
    }

    fn validate_into(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} Z={} gamma={} lambda={} falloff={} alpha={}",
            self.n_sites, self.range, self.anisotropy, self.field_ratio, self.falloff, self.alpha
        )
    }
}

/// Relative coupling strengths `c_d = J_d / J` indexed by circular distance.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTable {
    strengths: Vec<f64>,
}

impl CouplingTable {
    /// `c_d` for `d = 1..=Z`; zero beyond the range.
    pub fn get(&self, distance: usize) -> f64 {
        if distance == 0 {
            return 0.0;
        }
        self.strengths.get(distance - 1).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.strengths
    }

    pub fn range(&self) -> usize {
        self.strengths.len()
    }
}

pub fn build_couplings(spec: &ModelSpec) -> CouplingTable {
    let strengths = (1..=spec.range)
        .map(|d| relative_strength(spec.falloff, spec.alpha, d))
        .collect();
    CouplingTable { strengths }
}

fn relative_strength(falloff: Falloff, alpha: f64, distance: usize) -> f64 {
    let d = distance as f64;
    match falloff {
        Falloff::Exponential => alpha.powf(-(d - 1.0)),
        Falloff::PowerLaw => d.powf(-alpha),
    }
}

/// `Σ_{d=1}^{Z} c_d`, the one-sided coordination sum.
pub fn coordination_sum(spec: &ModelSpec) -> f64 {
    build_couplings(spec).as_slice().iter().sum()
}

/// One interacting pair on the ring, `i < j`, with coupling `J_ij = J c_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub i: usize,
    pub j: usize,
    pub distance: usize,
    pub coupling: f64,
}

/// Circular distance `min(|i-j|, N-|i-j|)`.
pub fn circular_distance(i: usize, j: usize, n_sites: usize) -> usize {
    let d = i.abs_diff(j) % n_sites;
    d.min(n_sites - d)
}

/// Every unordered pair at circular distance `d <= Z`, each listed once.
///
/// Pairs at `d = N/2` are diametrically opposite and appear only `N/2` times.
pub fn bonds(spec: &ModelSpec) -> Vec<Bond> {
    let n = spec.n_sites;
    let table = build_couplings(spec);
    let mut out = Vec::with_capacity(n * spec.range);
    for d in 1..=spec.range {
        let coupling = J * table.get(d);
        let starts = if 2 * d == n { n / 2 } else { n };
        for i in 0..starts {
            let j = (i + d) % n;
            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
            out.push(Bond { i: lo, j: hi, distance: d, coupling });
        }
    }
    out
}
