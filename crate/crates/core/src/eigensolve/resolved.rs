//! Spectra of the full Hamiltonian assembled from its symmetry blocks.

use rayon::prelude::*;

use super::{dense_spectrum, degenerate, lanczos_lowest, LanczosOptions, SpectrumSlice, DEGENERACY_TOL};
use crate::eigensolve::SymmetricOperator;
use crate::error::{Error, Result};
use crate::hamiltonian::{BlockKey, SymmetryBlock, TranslationTable, DENSE_MAX_SITES};
use crate::model::ModelSpec;

/// Blocks up to this real dimension are diagonalized densely.
pub const BLOCK_DENSE_MAX: usize = 1400;

/// How each symmetry block is diagonalized.
#[derive(Debug, Clone, Copy)]
pub enum Solver {
    /// Dense for small blocks, Lanczos otherwise.
    Auto(LanczosOptions),
    Dense,
    Lanczos(LanczosOptions),
}

impl Default for Solver {
    fn default() -> Self {
        Solver::Auto(LanczosOptions::default())
    }
}

struct BlockSpectrum {
    block: SymmetryBlock,
    slice: SpectrumSlice,
}

fn solve_block(block: SymmetryBlock, m: usize, solver: Solver) -> Result<BlockSpectrum> {
    let dim = block.dim();
    let dense = match solver {
        Solver::Dense => true,
        Solver::Lanczos(_) => false,
        Solver::Auto(_) => dim <= BLOCK_DENSE_MAX || m >= dim,
    };
    let slice = if dense {
        dense_spectrum(&block.to_dense())?
    } else {
        let opts = match solver {
            Solver::Auto(o) | Solver::Lanczos(o) => o,
            Solver::Dense => unreachable!(),
        };
        // distinct seeds per block keep start vectors independent
        let seed = opts.seed ^ ((block.key().parity as u64) << 32 | block.key().momentum as u64);
        lanczos_lowest(&block, m.min(dim), &LanczosOptions { seed, ..opts })?.require_converged()?
    };
    Ok(BlockSpectrum { block, slice })
}

fn merge(spectra: &[BlockSpectrum], m: usize) -> Result<SpectrumSlice> {
    let mut levels: Vec<(f64, usize, usize)> = Vec::new();
    let mut complete_below = f64::INFINITY;
    for (b, s) in spectra.iter().enumerate() {
        complete_below = complete_below.min(s.slice.complete_below);
        levels.extend(s.slice.eigenvalues.iter().enumerate().map(|(k, &e)| (e, b, k)));
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    levels.retain(|l| l.0 < complete_below);
    if levels.len() < m.min(spectra.iter().map(|s| s.block.dim()).sum()) {
        return Err(Error::NotConverged(format!("only {} certified levels, {m} requested", levels.len())));
    }
    let mut end = m.min(levels.len());
    while end < levels.len() && degenerate(levels[end - 1].0, levels[end].0) {
        end += 1;
    }
    if end < levels.len() {
        complete_below = levels[end].0;
    } else if degenerate(levels[end - 1].0, complete_below) {
        return Err(Error::DegeneracyTruncated(format!(
            "level {end} at {} touches the certified bound",
            levels[end - 1].0
        )));
    }
    levels.truncate(end);
    let eigenvectors = levels.par_iter().map(|&(_, b, k)| spectra[b].block.embed(&spectra[b].slice.eigenvectors[k])).collect();
    Ok(SpectrumSlice {
        eigenvalues: levels.iter().map(|l| l.0).collect(),
        eigenvectors,
        residuals: levels.iter().map(|&(_, b, k)| spectra[b].slice.residuals[k]).collect(),
        complete_below,
        converged: true,
    })
}

fn blocks(spec: &ModelSpec, keys: &[BlockKey]) -> Vec<SymmetryBlock> {
    let table = TranslationTable::new(spec.n_sites());
    keys.par_iter().map(|&k| SymmetryBlock::new(spec, &table, k)).collect()
}

/// The `m` lowest levels (more if the `m`-th is degenerate) with eigenvectors
/// in the full `2^N` space, solved block by block.
pub fn lowest_levels(spec: &ModelSpec, m: usize, solver: Solver) -> Result<SpectrumSlice> {
    if m == 0 || m > spec.dim() {
        return Err(Error::InvalidArgument(format!("cannot compute {m} of {} levels", spec.dim())));
    }
    let keys = TranslationTable::new(spec.n_sites()).block_keys();
    let spectra: Vec<BlockSpectrum> = blocks(spec, &keys)
        .into_par_iter()
        .filter(|b| b.dim() > 0)
        .map(|b| solve_block(b, m, solver))
        .collect::<Result<_>>()?;
    merge(&spectra, m)
}

/// Complete eigendecomposition, `N <= 12`.
pub fn full_spectrum(spec: &ModelSpec) -> Result<SpectrumSlice> {
    if spec.n_sites() > DENSE_MAX_SITES {
        return Err(Error::SizeLimit { what: "full spectrum", n: spec.n_sites(), max: DENSE_MAX_SITES });
    }
    lowest_levels(spec, spec.dim(), Solver::Dense)
}

/// The ground level, together with the lowest level of the other parity
/// sector when it lies within `split` of it (or is degenerate with it).
///
/// Every off-diagonal element of `H` is nonpositive and, for `γ > 0`, each
/// parity sector is connected by the flip terms. The sector ground state is
/// then unique, positive and therefore translation invariant, so only the
/// zero-momentum blocks are diagonalized.
pub fn parity_ground_states(spec: &ModelSpec, solver: Solver, split: f64) -> Result<SpectrumSlice> {
    if spec.anisotropy() <= 0.0 {
        // magnetization is conserved and the sectors split further
        let mut s = lowest_levels(spec, 1, solver)?;
        let g = s.closed_count(1)?;
        s.eigenvalues.truncate(g);
        s.eigenvectors.truncate(g);
        s.residuals.truncate(g);
        return Ok(s);
    }
    let keys = [BlockKey { parity: 0, momentum: 0 }, BlockKey { parity: 1, momentum: 0 }];
    let spectra: Vec<BlockSpectrum> = blocks(spec, &keys)
        .into_iter()
        .filter(|b| b.dim() > 0)
        .map(|b| solve_block(b, 1, solver))
        .collect::<Result<_>>()?;
    let mut ground: Vec<(f64, &BlockSpectrum)> = spectra.iter().map(|s| (s.slice.eigenvalues[0], s)).collect();
    ground.sort_by(|a, b| a.0.total_cmp(&b.0));
    if ground.len() == 2 && !degenerate(ground[0].0, ground[1].0) && ground[1].0 - ground[0].0 > split {
        ground.truncate(1);
    }
    let top = ground.last().expect("at least one parity sector").0;
    Ok(SpectrumSlice {
        eigenvalues: ground.iter().map(|g| g.0).collect(),
        eigenvectors: ground.iter().map(|g| g.1.block.embed(&g.1.slice.eigenvectors[0])).collect(),
        residuals: ground.iter().map(|g| g.1.slice.residuals[0]).collect(),
        // nothing else lies within the degeneracy window of the ground level
        complete_below: top + 2.0 * DEGENERACY_TOL * top.abs().max(1.0),
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{assemble_dense, HamiltonianOp};
    use crate::model::Falloff;

    #[test]
    fn full_spectrum_matches_dense_assembly() {
        for (n, z, falloff) in [(6, 3, Falloff::PowerLaw), (8, 2, Falloff::Exponential), (8, 4, Falloff::PowerLaw)] {
            let spec = ModelSpec::new(n, z, 0.4, 0.7, falloff, 1.5).unwrap();
            let blocks = full_spectrum(&spec).unwrap();
            let dense = dense_spectrum(&assemble_dense(&HamiltonianOp::new(&spec)).unwrap()).unwrap();
            assert_eq!(blocks.len(), dense.len());
            for (a, b) in blocks.eigenvalues.iter().zip(&dense.eigenvalues) {
                assert!((a - b).abs() < 1e-11);
            }
            let op = HamiltonianOp::new(&spec);
            for (e, v) in blocks.eigenvalues.iter().zip(&blocks.eigenvectors) {
                let hv = op.matvec(v).unwrap();
                let res: f64 = hv.iter().zip(v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt();
                assert!(res < 1e-10);
            }
        }
    }

    #[test]
    fn lanczos_blocks_agree_with_dense_blocks() {
        let spec = ModelSpec::new(10, 3, 0.3, 0.4, Falloff::Exponential, 2.0).unwrap();
        let a = lowest_levels(&spec, 12, Solver::Lanczos(LanczosOptions::default())).unwrap();
        let b = lowest_levels(&spec, 12, Solver::Dense).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn parity_grounds_match_full_spectrum() {
        for lambda in [0.2, 0.9, 1.6] {
            let spec = ModelSpec::new(8, 2, 0.5, lambda, Falloff::PowerLaw, 1.0).unwrap();
            let g = parity_ground_states(&spec, Solver::default(), 0.0).unwrap();
            let full = full_spectrum(&spec).unwrap();
            assert!((g.eigenvalues[0] - full.eigenvalues[0]).abs() < 1e-11);
            let degenerate_count = full.eigenvalues.iter().filter(|&&e| degenerate(e, full.eigenvalues[0])).count();
            assert_eq!(g.len(), degenerate_count);
        }
    }

    #[test]
    fn split_window_keeps_the_partner_sector() {
        let spec = ModelSpec::new(8, 1, 0.5, 1.2, Falloff::Exponential, 2.0).unwrap();
        let strict = parity_ground_states(&spec, Solver::default(), 0.0).unwrap();
        let loose = parity_ground_states(&spec, Solver::default(), 10.0).unwrap();
        assert_eq!((strict.len(), loose.len()), (1, 2));
        let p: Vec<u32> = loose.eigenvectors.iter().map(|v| crate::hamiltonian::parity(v.iter().position(|x| x.abs() > 1e-8).unwrap())).collect();
        assert_ne!(p[0], p[1]);
    }

    #[test]
    fn xx_limit_falls_back_to_all_blocks() {
        let spec = ModelSpec::new(6, 1, 0.0, 0.3, Falloff::Exponential, 2.0).unwrap();
        let g = parity_ground_states(&spec, Solver::default(), 0.0).unwrap();
        let full = full_spectrum(&spec).unwrap();
        assert!((g.eigenvalues[0] - full.eigenvalues[0]).abs() < 1e-11);
    }

    #[test]
    fn full_spectrum_refuses_large_chains() {
        let spec = ModelSpec::new(14, 1, 0.5, 0.5, Falloff::Exponential, 2.0).unwrap();
        assert!(matches!(full_spectrum(&spec), Err(Error::SizeLimit { .. })));
    }
}
