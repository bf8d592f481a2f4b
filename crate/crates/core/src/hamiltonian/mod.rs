//! Action of the XY Hamiltonian on the `2^N` computational basis.
//!
//! Basis states are bit strings: bit `k` set means site `k` is in `|1⟩`,
//! i.e. `σ^z_k = -1`. Every bond flips two bits at a time, so the Hamiltonian
//! conserves `popcount mod 2` and is real symmetric in this basis:
//!
//! * anti-aligned pair (`01`, `10`) ↔ swapped, amplitude `J_ij / 2`
//! * aligned pair (`00`, `11`) ↔ both flipped, amplitude `γ J_ij / 2`
//! * diagonal `(h/2) Σ_k z_k`

mod blocks;

pub use blocks::{BlockKey, SymmetryBlock, TranslationTable};

use faer::Mat;
use rayon::prelude::*;

use crate::eigensolve::SymmetricOperator;
use crate::error::{Error, Result};
use crate::model::{bonds, ModelSpec};

/// Largest `N` for which a dense `2^N × 2^N` matrix is ever assembled.
pub const DENSE_MAX_SITES: usize = 12;

/// `popcount(state) mod 2`.
#[inline]
pub fn parity(state: usize) -> u32 {
    state.count_ones() & 1
}

/// `z_k = +1` for a cleared bit and `-1` for a set bit.
#[inline]
pub fn spin_z(state: usize, site: usize) -> f64 {
    if state >> site & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy)]
struct FlipTerm {
    mask: usize,
    i: usize,
    j: usize,
    hop: f64,
    pair: f64,
}

impl FlipTerm {
    #[inline]
    fn amplitude(&self, state: usize) -> f64 {
        if (state >> self.i ^ state >> self.j) & 1 == 0 {
            self.pair
        } else {
            self.hop
        }
    }
}

/// Matrix-free Hamiltonian on the full Hilbert space.
#[derive(Debug, Clone)]
pub struct HamiltonianOp {
    spec: ModelSpec,
    terms: Vec<FlipTerm>,
    half_field: f64,
}

impl HamiltonianOp {
    pub fn new(spec: &ModelSpec) -> Self {
        let gamma = spec.anisotropy();
        let terms = bonds(spec)
            .into_iter()
            .map(|b| FlipTerm {
                mask: (1 << b.i) | (1 << b.j),
                i: b.i,
                j: b.j,
                hop: 0.5 * b.coupling,
                pair: 0.5 * gamma * b.coupling,
            })
            .collect();
        HamiltonianOp { spec: *spec, terms, half_field: 0.5 * spec.field() }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Diagonal element `(h/2) Σ_k z_k`.
    #[inline]
    pub fn diagonal(&self, state: usize) -> f64 {
        let n = self.spec.n_sites() as f64;
        self.half_field * (n - 2.0 * state.count_ones() as f64)
    }

    /// `⟨state'|H|state⟩` for every `state'` connected to `state`, including the
    /// diagonal entry first.
    pub fn row(&self, state: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        std::iter::once((state, self.diagonal(state)))
            .chain(self.terms.iter().map(move |t| (state ^ t.mask, t.amplitude(state))))
    }

    /// Returns `H v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        const CHUNK: usize = 4096;
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, block)| {
            let base = c * CHUNK;
            for (k, y) in block.iter_mut().enumerate() {
                let s = base + k;
                let mut acc = self.diagonal(s) * v[s];
                for t in &self.terms {
                    acc += t.amplitude(s) * v[s ^ t.mask];
                }
                *y = acc;
            }
        });
    }
}

impl SymmetricOperator for HamiltonianOp {
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_into(x, y);
    }
}

/// Explicit `2^N × 2^N` matrix. Oracle use only.
pub fn assemble_dense(op: &HamiltonianOp) -> Result<Mat<f64>> {
    let n = op.spec().n_sites();
    if n > DENSE_MAX_SITES {
        return Err(Error::SizeLimit { what: "dense assembly", n, max: DENSE_MAX_SITES });
    }
    let dim = op.dim();
    let mut m = Mat::<f64>::zeros(dim, dim);
    for col in 0..dim {
        for (row, value) in op.row(col) {
            m[(row, col)] += value;
        }
    }
    Ok(m)
}

/// Basis states split by `popcount mod 2`: `(even, odd)`.
pub fn parity_sectors(n_sites: usize) -> (Vec<usize>, Vec<usize>) {
    (0..1usize << n_sites).partition(|&s| parity(s) == 0)
}

/// Hamiltonian restricted to one parity sector, matrix-free.
///
/// Within a sector bit 0 is fixed by the parity of the remaining bits, so the
/// compact index of a state is simply `state >> 1`.
#[derive(Debug, Clone)]
pub struct ParitySectorOp {
    full: HamiltonianOp,
    parity: u32,
}

impl ParitySectorOp {
    pub fn new(spec: &ModelSpec, parity: u32) -> Self {
        ParitySectorOp { full: HamiltonianOp::new(spec), parity: parity & 1 }
    }

    pub fn parity(&self) -> u32 {
        self.parity
    }

    #[inline]
    pub fn state(&self, index: usize) -> usize {
        let high = index << 1;
        high | ((high.count_ones() & 1) ^ self.parity) as usize
    }

    /// Embeds a sector vector into the full `2^N` space.
    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.full.dim()];
        for (k, &value) in x.iter().enumerate() {
            full[self.state(k)] = value;
        }
        full
    }
}

impl SymmetricOperator for ParitySectorOp {
    fn dim(&self) -> usize {
        self.full.dim() / 2
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        const CHUNK: usize = 4096;
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, block)| {
            let base = c * CHUNK;
            for (k, out) in block.iter_mut().enumerate() {
                let s = self.state(base + k);
                let mut acc = self.full.diagonal(s) * x[base + k];
                for t in &self.full.terms {
                    acc += t.amplitude(s) * x[(s ^ t.mask) >> 1];
                }
                *out = acc;
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Falloff;

    fn spec(n: usize, z: usize, gamma: f64, lambda: f64) -> ModelSpec {
        ModelSpec::new(n, z, gamma, lambda, Falloff::Exponential, 2.0).unwrap()
    }

    fn basis(dim: usize, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        v
    }

    #[test]
    fn hopping_swaps_antialigned_pair() {
        let op = HamiltonianOp::new(&spec(2, 1, 0.0, 0.0));
        // |01⟩: site 0 in |1⟩
        let out = op.matvec(&basis(4, 0b01)).unwrap();
        assert_eq!(out, vec![0.0, 0.0, -0.5, 0.0]);
    }

    #[test]
    fn pairing_flips_aligned_pair() {
        let op = HamiltonianOp::new(&spec(2, 1, 1.0, 0.0));
        let out = op.matvec(&basis(4, 0b00)).unwrap();
        assert_eq!(out, vec![0.0, 0.0, 0.0, -0.5]);
    }

    #[test]
    fn field_is_diagonal() {
        let op = HamiltonianOp::new(&spec(4, 1, 0.3, 0.8));
        // h = -0.8, all spins up: (h/2) * 4
        assert!((op.diagonal(0) - (-1.6)).abs() < 1e-15);
        assert!((op.diagonal(0b1111) - 1.6).abs() < 1e-15);
        assert_eq!(op.diagonal(0b0101), 0.0);
    }

    #[test]
    fn dense_two_site_ising() {
        let m = assemble_dense(&HamiltonianOp::new(&spec(2, 1, 1.0, 0.0))).unwrap();
        assert_eq!(m[(0b00, 0b11)], -0.5);
        assert_eq!(m[(0b11, 0b00)], -0.5);
        assert_eq!(m[(0b01, 0b10)], -0.5);
        assert_eq!(m[(0b10, 0b01)], -0.5);
        for i in 0..4 {
            assert_eq!(m[(i, i)], 0.0);
        }
    }

    #[test]
    fn dense_is_symmetric() {
        let m = assemble_dense(&HamiltonianOp::new(&spec(6, 3, 0.4, -1.1))).unwrap();
        for i in 0..64 {
            for j in 0..64 {
                assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
    }

    #[test]
    fn dense_refuses_large_chains() {
        let op = HamiltonianOp::new(&spec(14, 1, 0.5, 0.5));
        assert!(matches!(assemble_dense(&op), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn matvec_length_checked() {
        let op = HamiltonianOp::new(&spec(4, 1, 0.5, 0.5));
        assert!(matches!(op.matvec(&[0.0; 8]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sectors_split_evenly() {
        let (even, odd) = parity_sectors(2);
        assert_eq!(even, vec![0b00, 0b11]);
        assert_eq!(odd, vec![0b01, 0b10]);
        let (even, odd) = parity_sectors(4);
        assert_eq!((even.len(), odd.len()), (8, 8));
    }

    #[test]
    fn no_coupling_between_parity_sectors() {
        let m = assemble_dense(&HamiltonianOp::new(&spec(6, 2, 0.7, 0.3))).unwrap();
        let (even, odd) = parity_sectors(6);
        for &e in &even {
            for &o in &odd {
                assert_eq!(m[(e, o)], 0.0);
            }
        }
    }

    #[test]
    fn sector_op_matches_full_op() {
        let s = spec(8, 3, 0.6, 0.9);
        let full = HamiltonianOp::new(&s);
        for p in 0..2 {
            let sector = ParitySectorOp::new(&s, p);
            let x: Vec<f64> = (0..sector.dim()).map(|k| ((k * 37 % 11) as f64 - 5.0) / 7.0).collect();
            let mut y = vec![0.0; sector.dim()];
            sector.apply(&x, &mut y);
            let expected = full.matvec(&sector.embed(&x)).unwrap();
            let got = sector.embed(&y);
            for (a, b) in expected.iter().zip(&got) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }
}
