//! Small clusters of nuclear spins ½ as the bath, either fully interacting
//! or treated as independent flip-flop pairs.
//!
//! Bath basis states are indexed by bit strings: bit `n - 1 - k` of the index
//! is 1 when spin `k` points down, so spin 0 is the most significant.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::floquet::{
    coherence_numeric_cell, unit_cell, ConditionalHamiltonians, PulseSequence, UnitCell,
};
use crate::linalg::{eigh, kron_with_limit, spin_operators, ComplexMatrix, MAX_DIM};
use crate::pseudospin::coherence_analytic;
use crate::sensors::{track_levels, DonorModel, PairTarget};
use crate::Error;

/// Largest supported number of bath spins.
pub const MAX_CLUSTER_SPINS: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct SpinCluster {
    a: Vec<f64>,
    c: Vec<Vec<f64>>,
}

impl SpinCluster {
    /// `a[k]`: hyperfine couplings (rad/s); `c`: symmetric dipolar matrix
    /// with zero diagonal (rad/s).
    pub fn new(a: Vec<f64>, c: Vec<Vec<f64>>) -> Result<Self, Error> {
        let n = a.len();
        if n == 0 {
            return Err(Error::Validation("cluster needs at least one spin".into()));
        }
        if n > MAX_CLUSTER_SPINS {
            return Err(Error::Capacity { count: n, max: MAX_CLUSTER_SPINS });
        }
        if c.len() != n || c.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!("dipolar matrix must be {n}x{n}")));
        }
        for j in 0..n {
            if c[j][j] != 0.0 {
                return Err(Error::Validation("dipolar matrix must have a zero diagonal".into()));
            }
            for k in 0..n {
                if c[j][k] != c[k][j] {
                    return Err(Error::Validation("dipolar matrix must be symmetric".into()));
                }
            }
        }
        if a.iter().chain(c.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("couplings must be finite".into()));
        }
        Ok(Self { a, c })
    }

    /// Three spins with `C_12`, `C_23`, `C_31`.
    pub fn triangle(a: [f64; 3], c12: f64, c23: f64, c31: f64) -> Self {
        Self {
            a: a.to_vec(),
            c: vec![vec![0.0, c12, c31], vec![c12, 0.0, c23], vec![c31, c23, 0.0]],
        }
    }

    /// The 3-cluster of nuclear impurities used as the reference example.
    pub fn reference_triangle() -> Self {
        Self::triangle([180e3, 0.0, 100e3], 1.05e3, 1.05e3, 2.2e3)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn c(&self, j: usize, k: usize) -> f64 {
        self.c[j][k]
    }

    /// `Δ_jk = A_j - A_k`.
    pub fn delta(&self, j: usize, k: usize) -> f64 {
        self.a[j] - self.a[k]
    }

    pub fn with_hyperfine_offset(&self, offset: f64) -> Self {
        Self {
            a: self.a.iter().map(|a| a + offset).collect(),
            c: self.c.clone(),
        }
    }

    fn spin_down(&self, state: usize, k: usize) -> bool {
        (state >> (self.n() - 1 - k)) & 1 == 1
    }

    /// `2 I_z^(k)` of a basis state.
    fn sz(&self, state: usize, k: usize) -> f64 {
        if self.spin_down(state, k) {
            -1.0
        } else {
            1.0
        }
    }

    /// Total `I_z` of a basis state.
    pub fn total_iz(&self, state: usize) -> f64 {
        0.5 * (0..self.n()).map(|k| self.sz(state, k)).sum::<f64>()
    }
}

/// `(P/2) Σ_k A_k I_z^k + Σ_{j<k} C_jk [I_z^j I_z^k - ¼(σ_+^j σ_-^k + σ_-^j σ_+^k)]`.
pub fn cluster_hamiltonian(cl: &SpinCluster, p: f64) -> ComplexMatrix {
    let n = cl.n();
    let dim = cl.dim();
    let mut h = ComplexMatrix::zeros(dim);
    for s in 0..dim {
        let mut diag = 0.0;
        for k in 0..n {
            diag += 0.5 * p * cl.a[k] * 0.5 * cl.sz(s, k);
            for j in 0..k {
                diag += cl.c[j][k] * 0.25 * cl.sz(s, j) * cl.sz(s, k);
            }
        }
        h[(s, s)] = Complex64::new(diag, 0.0);
        for k in 0..n {
            for j in 0..k {
                if cl.spin_down(s, j) != cl.spin_down(s, k) {
                    let mask = (1 << (n - 1 - j)) | (1 << (n - 1 - k));
                    h[(s ^ mask, s)] = Complex64::new(-0.25 * cl.c[j][k], 0.0);
                }
            }
        }
    }
    h
}

pub fn conditional_cluster_hamiltonians(
    cl: &SpinCluster,
    p_u: f64,
    p_d: f64,
) -> Result<ConditionalHamiltonians, Error> {
    if cl.n() > MAX_CLUSTER_SPINS {
        return Err(Error::Capacity { count: cl.n(), max: MAX_CLUSTER_SPINS });
    }
    ConditionalHamiltonians::new(cluster_hamiltonian(cl, p_u), cluster_hamiltonian(cl, p_d))
}

/// Independent flip-flop pairs `(ΔA, C)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSet {
    pub pairs: Vec<PairTarget>,
}

impl PairSet {
    /// Pairs (1,2), (2,3), (3,1) of a cluster, each with its own coupling and
    /// hyperfine difference, interactions with the third spin dropped.
    pub fn from_cluster(cl: &SpinCluster) -> Self {
        let n = cl.n();
        let pairs = (0..n)
            .filter(|&j| n > 2 || j + 1 < n)
            .map(|j| {
                let k = (j + 1) % n;
                PairTarget { delta_a: cl.delta(j, k), c12: cl.c[j][k] }
            })
            .collect();
        Self { pairs }
    }
}

/// Product of the per-pair bath-averaged coherences.
pub fn independent_pairs_coherence(ps: &PairSet, p_u: f64, p_d: f64, seq: &PulseSequence) -> Result<f64, Error> {
    let mut total = 1.0;
    for pair in &ps.pairs {
        let model = pair.two_state(p_u, p_d)?;
        total *= coherence_analytic(&model, seq.tau, seq.n_p)?.value;
    }
    Ok(total)
}

/// Uniform ensemble over the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ThermalEnsemble {
    pub dim: usize,
    pub weights: Vec<f64>,
}

impl ThermalEnsemble {
    pub fn uniform(dim: usize) -> Self {
        Self { dim, weights: vec![1.0 / dim as f64; dim] }
    }

    pub fn basis_state(&self, j: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim];
        v[j] = Complex64::new(1.0, 0.0);
        v
    }
}

/// `Re <L>` for every basis state of the ensemble, in index order.
pub fn basis_state_coherences(cell: &UnitCell, n_p: u32, ens: &ThermalEnsemble) -> Result<Vec<f64>, Error> {
    if ens.dim != cell.t_u2.dim() {
        return Err(Error::Validation(format!(
            "ensemble dimension {} does not match the bath dimension {}",
            ens.dim,
            cell.t_u2.dim()
        )));
    }
    (0..ens.dim)
        .map(|j| Ok(coherence_numeric_cell(cell, n_p, &ens.basis_state(j))?.re))
        .collect()
}

/// Weighted average of the basis-state coherences.
pub fn thermal_coherence(ch: &ConditionalHamiltonians, seq: &PulseSequence, ens: &ThermalEnsemble) -> Result<f64, Error> {
    let cell = unit_cell(ch, seq)?;
    let per_state = basis_state_coherences(&cell, seq.n_p, ens)?;
    Ok(per_state.iter().zip(&ens.weights).map(|(l, w)| l * w).sum())
}

const CYCLIC: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];

/// `ε_l = ½(A_i - A_j - A_k)(P_u + P_d) + C_ij + C_ik - C_jk` for the three
/// cyclic orders `(i, j, k)`.
///
/// These are `-2` times the diagonal of `H_u + H_d` on the states with spin
/// `i` down and the others up (total `I_z = +½`).
pub fn secular_quasienergies(cl: &SpinCluster, p_u: f64, p_d: f64) -> Result<[f64; 3], Error> {
    secular_quasienergies_in_block(cl, p_u, p_d, 1.0)
}

/// As [`secular_quasienergies`] for the `I_z = sign·½` block; in the
/// `-½` block the flipped spin points up and the hyperfine term changes sign.
pub fn secular_quasienergies_in_block(cl: &SpinCluster, p_u: f64, p_d: f64, sign: f64) -> Result<[f64; 3], Error> {
    if cl.n() != 3 {
        return Err(Error::Unsupported(format!("secular estimates need 3 spins, got {}", cl.n())));
    }
    let s = p_u + p_d;
    Ok(CYCLIC.map(|(i, j, k)| {
        sign * 0.5 * (cl.a[i] - cl.a[j] - cl.a[k]) * s + cl.c[i][j] + cl.c[i][k] - cl.c[j][k]
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipEstimate {
    pub tau: f64,
    /// 0-based spins whose flip-flop produces the dip.
    pub pair: (usize, usize),
    /// `+1` for the `I_z = +½` block, `-1` for `-½`.
    pub block: i8,
}

impl DipEstimate {
    pub fn label(&self) -> String {
        let sign = if self.block > 0 { '+' } else { '-' };
        format!("{sign}{}{}", self.pair.0 + 1, self.pair.1 + 1)
    }
}

/// `τ ≈ 2π / |ε_l - ε_m|` for both `I_z = ±½` blocks, sorted by τ.
///
/// For the pair (i, j) with third spin k this is
/// `2π / |Δ_ij (P_u + P_d) ± 2(C_ik - C_jk)|`.
pub fn doublet_dip_estimates(cl: &SpinCluster, p_u: f64, p_d: f64) -> Result<Vec<DipEstimate>, Error> {
    let mut out = Vec::new();
    for (block, sign) in [(1i8, 1.0), (-1i8, -1.0)] {
        let eps = secular_quasienergies_in_block(cl, p_u, p_d, sign)?;
        for (l, m) in [(0usize, 1usize), (1, 2), (2, 0)] {
            let gap = (eps[l] - eps[m]).abs();
            if gap <= 1e-12 * (eps[l].abs() + eps[m].abs()) || gap == 0.0 {
                continue;
            }
            // ε_l flips spin CYCLIC[l].0, ε_m flips CYCLIC[m].0.
            let (a, b) = (CYCLIC[l].0, CYCLIC[m].0);
            out.push(DipEstimate {
                tau: 2.0 * PI / gap,
                pair: (a.min(b), a.max(b)),
                block,
            });
        }
    }
    out.sort_by(|x, y| x.tau.total_cmp(&y.tau).then(x.block.cmp(&y.block)));
    Ok(out)
}

/// Conditional bath Hamiltonians from the joint donor-cluster Hamiltonian,
/// projected on the donor eigenstates `level_u` and `level_d` at `b0`.
///
/// The donor level energy is subtracted from each projection; it only adds
/// a global phase and would otherwise swamp the bath scale.
pub fn joint_full_model(d: &DonorModel, cl: &SpinCluster, b0: f64) -> Result<ConditionalHamiltonians, Error> {
    let n_bath = cl.dim();
    let n_donor = d.dim();
    let total = n_bath * n_donor;
    if total > MAX_DIM {
        return Err(crate::LinalgError::Capacity { dim: total, max: MAX_DIM }.into());
    }
    let h_donor = crate::sensors::donor_hamiltonian(d, b0)?;
    let h_bath = cluster_hamiltonian(cl, 0.0);
    let (sz, _, _) = spin_operators(0.5);
    let s_z = kron_with_limit(&sz, &ComplexMatrix::identity(d.dim() / 2), MAX_DIM)?;
    let mut hf_bath = ComplexMatrix::zeros(n_bath);
    for s in 0..n_bath {
        let v: f64 = (0..cl.n()).map(|k| cl.a[k] * 0.5 * cl.sz(s, k)).sum();
        hf_bath[(s, s)] = Complex64::new(v, 0.0);
    }
    let h_total = &(&kron_with_limit(&h_donor, &ComplexMatrix::identity(n_bath), MAX_DIM)?
        + &kron_with_limit(&s_z, &hf_bath, MAX_DIM)?)
        + &kron_with_limit(&ComplexMatrix::identity(n_donor), &h_bath, MAX_DIM)?;

    let levels = &track_levels(d, &[b0])?[0];
    let project = |level: usize| {
        let psi = &levels.states[level - 1];
        let block = ComplexMatrix::from_fn(n_bath, |b1, b2| {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in 0..n_donor {
                if psi[x] == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for y in 0..n_donor {
                    acc += psi[x].conj() * h_total[(x * n_bath + b1, y * n_bath + b2)] * psi[y];
                }
            }
            acc
        })
        .hermitian_part();
        &block - &ComplexMatrix::identity(n_bath).scale_real(levels.energies[level - 1])
    };
    ConditionalHamiltonians::new(project(d.level_u), project(d.level_d))
}

/// Lowest eigenvalue gap of a Hermitian matrix, for diagnostics.
pub fn min_level_spacing(h: &ComplexMatrix) -> Result<f64, Error> {
    let e = eigh(h)?;
    Ok(e.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min))
}
