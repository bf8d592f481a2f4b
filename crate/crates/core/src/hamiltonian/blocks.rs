//! Parity × lattice-momentum blocks of the ring Hamiltonian.
//!
//! Translation `T` rotates every bit one site forward. Each orbit under `T`
//! is labelled by its smallest member (the representative `r`, period `R_r`).
//! For momentum `k = 2πq/N` the normalized Bloch state is
//! `|r,k⟩ = R_r^{-1/2} Σ_{a<R_r} e^{ika} T^a |r⟩`, nonzero only when
//! `q R_r ≡ 0 (mod N)`, and
//!
//! `⟨r',k|H|r,k⟩ = Σ_{t ∈ orbit(r')} h_{t,r} e^{-ikℓ_t} (R_r / R_r')^{1/2}`
//!
//! where `t = T^{ℓ_t} r'` ranges over the basis states reached from `r`.
//!
//! Momenta `q` and `N - q` carry complex-conjugate blocks, so the pair is
//! handled together through the real representation `[[A, -B], [B, A]]` of
//! `A + iB`. Its eigenvectors map isometrically onto real eigenvectors of the
//! full Hamiltonian, so every block works in real arithmetic and the union of
//! all blocks for `q = 0..=N/2` reproduces the whole spectrum.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;

use crate::eigensolve::SymmetricOperator;
use crate::hamiltonian::HamiltonianOp;
use crate::model::ModelSpec;

/// Representative lookup for every basis state of an `N`-site ring.
#[derive(Debug, Clone)]
pub struct TranslationTable {
    n_sites: usize,
    /// index into `reps` of the orbit containing each state
    orbit: Vec<u32>,
    /// `ℓ` with `T^ℓ rep = state`
    shift: Vec<u8>,
    reps: Vec<usize>,
    periods: Vec<usize>,
}

#[inline]
fn rotate(state: usize, n_sites: usize) -> usize {
    let mask = (1usize << n_sites) - 1;
    ((state << 1) | (state >> (n_sites - 1))) & mask
}

impl TranslationTable {
    pub fn new(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        let mut orbit = vec![u32::MAX; dim];
        let mut shift = vec![0u8; dim];
        let mut reps = Vec::new();
        let mut periods = Vec::new();
        for s in 0..dim {
            if orbit[s] != u32::MAX {
                continue;
            }
            // s is the smallest unvisited state, hence the minimum of its orbit
            let id = reps.len() as u32;
            let mut t = s;
            let mut a = 0usize;
            loop {
                orbit[t] = id;
                shift[t] = a as u8;
                t = rotate(t, n_sites);
                a += 1;
                if t == s {
                    break;
                }
            }
            reps.push(s);
            periods.push(a);
        }
        TranslationTable { n_sites, orbit, shift, reps, periods }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn orbit_count(&self) -> usize {
        self.reps.len()
    }

    /// `(orbit index, ℓ)` with `T^ℓ r = state`.
    #[inline]
    pub fn locate(&self, state: usize) -> (usize, usize) {
        (self.orbit[state] as usize, self.shift[state] as usize)
    }

    pub fn representative(&self, orbit: usize) -> usize {
        self.reps[orbit]
    }

    pub fn period(&self, orbit: usize) -> usize {
        self.periods[orbit]
    }

    /// Every `(parity, q)` block, `q = 0..=N/2`.
    pub fn block_keys(&self) -> Vec<BlockKey> {
        (0..2)
            .flat_map(|parity| (0..=self.n_sites / 2).map(move |momentum| BlockKey { parity, momentum }))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockKey {
    pub parity: u32,
    /// `q` in `k = 2πq/N`, `0 <= q <= N/2`
    pub momentum: usize,
}

impl BlockKey {
    /// Momenta 0 and π have real Bloch phases.
    pub fn is_real(&self, n_sites: usize) -> bool {
        self.momentum == 0 || 2 * self.momentum == n_sites
    }
}

/// One symmetry block in its real representation, matrix-free in the field.
#[derive(Debug, Clone)]
pub struct SymmetryBlock {
    key: BlockKey,
    n_sites: usize,
    real: bool,
    /// orbit indices of the Bloch basis
    orbits: Vec<usize>,
    reps: Vec<usize>,
    periods: Vec<usize>,
    /// CSR rows of the field-independent part
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
    /// `(N - 2 popcount(r)) / 2` per basis state; multiplied by `h`
    field_diag: Vec<f64>,
    field: f64,
}

impl SymmetryBlock {
    pub fn new(spec: &ModelSpec, table: &TranslationTable, key: BlockKey) -> Self {
        let n = spec.n_sites();
        assert_eq!(n, table.n_sites(), "translation table built for a different N");
        let q = key.momentum;
        let real = key.is_real(n);

        let mut block_index = vec![u32::MAX; table.orbit_count()];
        let mut orbits = Vec::new();
        for o in 0..table.orbit_count() {
            let r = table.representative(o);
            if (r.count_ones() & 1) == key.parity && (q * table.period(o)) % n == 0 {
                block_index[o] = orbits.len() as u32;
                orbits.push(o);
            }
        }
        let reps: Vec<usize> = orbits.iter().map(|&o| table.representative(o)).collect();
        let periods: Vec<usize> = orbits.iter().map(|&o| table.period(o)).collect();

        let phases: Vec<Complex64> =
            (0..n).map(|l| Complex64::from_polar(1.0, 2.0 * PI * (q * l) as f64 / n as f64)).collect();

        // Zero-field operator; the field enters only through `field_diag`.
        let op = HamiltonianOp::new(&spec.with_field_ratio(0.0).expect("zero field is valid"));
        let mut row_ptr = Vec::with_capacity(reps.len() + 1);
        let mut cols = Vec::new();
        let mut vals: Vec<Complex64> = Vec::new();
        row_ptr.push(0);
        let mut row: Vec<(u32, Complex64)> = Vec::new();
        for (a, (&r, &period)) in reps.iter().zip(&periods).enumerate() {
            row.clear();
            for (t, amp) in op.row(r).skip(1) {
                let (o, l) = table.locate(t);
                let b = block_index[o];
                if b == u32::MAX {
                    continue;
                }
                let ratio = (period as f64 / periods[b as usize] as f64).sqrt();
                // row `a` holds the conjugate of column `a`'s entries
                row.push((b, phases[l] * (amp * ratio)));
            }
            row.sort_by_key(|&(b, _)| b);
            let start = cols.len();
            for &(b, v) in &row {
                if cols.len() > start && *cols.last().unwrap() == b {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(b);
                    vals.push(v);
                }
            }
            debug_assert!(a + 1 == row_ptr.len());
            row_ptr.push(cols.len());
        }
        let field_diag = reps.iter().map(|&r| 0.5 * (n as f64 - 2.0 * r.count_ones() as f64)).collect();

        SymmetryBlock {
            key,
            n_sites: n,
            real,
            orbits,
            reps,
            periods,
            row_ptr,
            cols,
            vals,
            field_diag,
            field: spec.field(),
        }
    }

    pub fn key(&self) -> BlockKey {
        self.key
    }

    /// Number of Bloch states in the block.
    pub fn bloch_dim(&self) -> usize {
        self.reps.len()
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Rebinds the block to a new transverse field `h`.
    pub fn set_field(&mut self, field: f64) {
        self.field = field;
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    /// Orbit indices (into the translation table) of the Bloch basis.
    pub fn orbits(&self) -> &[usize] {
        &self.orbits
    }

    /// Maps a block eigenvector onto the corresponding real vector of the full
    /// `2^N` space. The map is an isometry intertwining the block with `H`.
    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        let n = self.n_sites;
        let nb = self.bloch_dim();
        let mut full = vec![0.0; 1usize << n];
        let k = 2.0 * PI * self.key.momentum as f64 / n as f64;
        let scale = if self.real { 1.0 } else { std::f64::consts::SQRT_2 };
        for a in 0..nb {
            let coeff = if self.real {
                Complex64::new(x[a], 0.0)
            } else {
                Complex64::new(x[a], x[nb + a])
            };
            if coeff == Complex64::new(0.0, 0.0) {
                continue;
            }
            let period = self.periods[a];
            let norm = scale / (period as f64).sqrt();
            let mut s = self.reps[a];
            for shift in 0..period {
                let phase = Complex64::from_polar(1.0, k * shift as f64);
                full[s] = (coeff * phase).re * norm;
                s = rotate(s, n);
            }
        }
        full
    }

    /// Dense real-representation matrix. Oracle and small-block use.
    pub fn to_dense(&self) -> Mat<f64> {
        let d = self.dim();
        let mut m = Mat::<f64>::zeros(d, d);
        let mut e = vec![0.0; d];
        let mut y = vec![0.0; d];
        for c in 0..d {
            e[c] = 1.0;
            self.apply(&e, &mut y);
            for r in 0..d {
                m[(r, c)] = y[r];
            }
            e[c] = 0.0;
        }
        m
    }
}

impl SymmetricOperator for SymmetryBlock {
    fn dim(&self) -> usize {
        if self.real {
            self.reps.len()
        } else {
            2 * self.reps.len()
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nb = self.bloch_dim();
        if self.real {
            for a in 0..nb {
                let mut acc = self.field * self.field_diag[a] * x[a];
                for p in self.row_ptr[a]..self.row_ptr[a + 1] {
                    acc += self.vals[p].re * x[self.cols[p] as usize];
                }
                y[a] = acc;
            }
        } else {
            let (xr, xi) = x.split_at(nb);
            let (yr, yi) = y.split_at_mut(nb);
            for a in 0..nb {
                let d = self.field * self.field_diag[a];
                let mut re = d * xr[a];
                let mut im = d * xi[a];
                for p in self.row_ptr[a]..self.row_ptr[a + 1] {
                    let v = self.vals[p];
                    let b = self.cols[p] as usize;
                    re += v.re * xr[b] - v.im * xi[b];
                    im += v.im * xr[b] + v.re * xi[b];
                }
                yr[a] = re;
                yi[a] = im;
            }
        }
    }
}
