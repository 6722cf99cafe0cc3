//! CPMG unit cells, Floquet spectra of the two sensor-conditional cells, and
//! the coherence of the sensor computed either by direct propagation or from
//! the Floquet modes.

use num_complex::Complex64;

use crate::linalg::{
    self, eig_unitary, eigh, inner, norm, phase_distance, propagator_from_eigen, wrap_phase,
    ComplexMatrix, EigenSystem, HermitianEigen, LinalgError, UnitaryPropagator,
};
use crate::Error;

/// Phases of the two conditional cells must agree to this tolerance.
pub const PHASE_MATCH_TOL: f64 = 1e-8;
/// Largest tolerated half-period residual outside degenerate subspaces.
pub const HALF_PERIOD_TOL: f64 = 1e-8;
/// Largest tolerated norm drift during direct propagation.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

/// Sensor state selecting the conditional bath Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    U,
    D,
}

impl Branch {
    pub fn flipped(self) -> Branch {
        match self {
            Branch::U => Branch::D,
            Branch::D => Branch::U,
        }
    }
}

/// One piece of a periodic cell, in time order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Segment {
    /// Free evolution under the conditional Hamiltonian of `branch`.
    Free { branch: Branch, duration: f64 },
    /// A π pulse of the given total length; the bath evolves under the
    /// intra-pulse Hamiltonian (identity when none is set).
    Pulse { duration: f64 },
}

#[derive(Clone, Debug)]
pub struct PulseSequence {
    pub tau: f64,
    pub n_p: u32,
    /// Half of the pulse length (each π pulse lasts `2 * pulse_duration`).
    pub pulse_duration: f64,
    pub intra_pulse_hamiltonian: Option<ComplexMatrix>,
}

impl PulseSequence {
    pub fn ideal(tau: f64, n_p: u32) -> Result<Self, Error> {
        Self::new(tau, n_p, 0.0, None)
    }

    pub fn new(
        tau: f64,
        n_p: u32,
        pulse_duration: f64,
        intra_pulse_hamiltonian: Option<ComplexMatrix>,
    ) -> Result<Self, Error> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Validation(format!("pulse interval must be positive, got {tau}")));
        }
        if !(pulse_duration.is_finite() && pulse_duration >= 0.0) {
            return Err(Error::Validation(format!(
                "pulse duration must be non-negative, got {pulse_duration}"
            )));
        }
        if let Some(h) = &intra_pulse_hamiltonian {
            h.check_hermitian()?;
        }
        Ok(Self {
            tau,
            n_p,
            pulse_duration,
            intra_pulse_hamiltonian,
        })
    }

    pub fn with_n_p(&self, n_p: u32) -> Self {
        Self { n_p, ..self.clone() }
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self { tau, ..self.clone() }
    }

    /// Cell length `4 (τ + δ)`.
    pub fn period(&self) -> f64 {
        4.0 * (self.tau + self.pulse_duration)
    }

    pub fn total_time(&self) -> f64 {
        self.n_p as f64 * self.period()
    }

    /// Time-ordered segments of the cell that starts with the sensor in
    /// `start`. The cell starting in the other state is the branch-swapped
    /// list.
    pub fn segments(&self, start: Branch) -> Vec<Segment> {
        let other = start.flipped();
        let mut segs = vec![Segment::Free { branch: start, duration: self.tau }];
        if self.pulse_duration > 0.0 {
            segs.push(Segment::Pulse { duration: 2.0 * self.pulse_duration });
        }
        segs.push(Segment::Free { branch: other, duration: 2.0 * self.tau });
        if self.pulse_duration > 0.0 {
            segs.push(Segment::Pulse { duration: 2.0 * self.pulse_duration });
        }
        segs.push(Segment::Free { branch: start, duration: self.tau });
        segs
    }
}

/// Bath Hamiltonians conditioned on the sensor being in `u` or `d` (rad/s).
#[derive(Clone, Debug)]
pub struct ConditionalHamiltonians {
    pub h_u: ComplexMatrix,
    pub h_d: ComplexMatrix,
}

impl ConditionalHamiltonians {
    pub fn new(h_u: ComplexMatrix, h_d: ComplexMatrix) -> Result<Self, Error> {
        if h_u.dim() != h_d.dim() {
            return Err(LinalgError::DimensionMismatch(h_u.dim(), h_d.dim()).into());
        }
        h_u.check_hermitian()?;
        h_d.check_hermitian()?;
        Ok(Self { h_u, h_d })
    }

    pub fn dim(&self) -> usize {
        self.h_u.dim()
    }

    pub fn get(&self, b: Branch) -> &ComplexMatrix {
        match b {
            Branch::U => &self.h_u,
            Branch::D => &self.h_d,
        }
    }

    /// Diagonalizes both Hamiltonians once so many cells can be built cheaply.
    pub fn prepare(&self) -> Result<PreparedHamiltonians, Error> {
        Ok(PreparedHamiltonians {
            eig_u: eigh(&self.h_u)?,
            eig_d: eigh(&self.h_d)?,
            dim: self.dim(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct PreparedHamiltonians {
    eig_u: HermitianEigen,
    eig_d: HermitianEigen,
    dim: usize,
}

impl PreparedHamiltonians {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn evolve(&self, b: Branch, t: f64) -> UnitaryPropagator {
        let eig = match b {
            Branch::U => &self.eig_u,
            Branch::D => &self.eig_d,
        };
        UnitaryPropagator {
            matrix: propagator_from_eigen(eig, t),
            duration: t,
        }
    }
}

/// The two conditional one-period propagators and their first halves.
///
/// `t_u2 = half_d_then * half_u_first`: for the cell that starts in `u`,
/// `half_u` is the propagator over its first half and `t_u2` the full cell.
#[derive(Clone, Debug)]
pub struct UnitCell {
    pub t_u2: UnitaryPropagator,
    pub t_d2: UnitaryPropagator,
    /// First half (in time) of the `u`-started cell; maps u-modes to d-modes.
    pub half_u: UnitaryPropagator,
    /// First half (in time) of the `d`-started cell; maps d-modes to u-modes.
    pub half_d: UnitaryPropagator,
}

pub fn unit_cell(ch: &ConditionalHamiltonians, seq: &PulseSequence) -> Result<UnitCell, Error> {
    unit_cell_prepared(&ch.prepare()?, seq)
}

pub fn unit_cell_prepared(
    prep: &PreparedHamiltonians,
    seq: &PulseSequence,
) -> Result<UnitCell, Error> {
    let dim = prep.dim();
    let pulse = match &seq.intra_pulse_hamiltonian {
        Some(h) if seq.pulse_duration > 0.0 => {
            if h.dim() != dim {
                return Err(LinalgError::DimensionMismatch(h.dim(), dim).into());
            }
            linalg::expm_hermitian(h, 2.0 * seq.pulse_duration)?
        }
        _ => UnitaryPropagator {
            matrix: ComplexMatrix::identity(dim),
            duration: 2.0 * seq.pulse_duration,
        },
    };
    let tu = prep.evolve(Branch::U, seq.tau);
    let td = prep.evolve(Branch::D, seq.tau);
    // First half of the u-started cell: u for τ, pulse, d for τ.
    let half_u = td.after(&pulse).after(&tu);
    let half_d = tu.after(&pulse).after(&td);
    Ok(UnitCell {
        t_u2: half_d.after(&half_u),
        t_d2: half_u.after(&half_d),
        half_u,
        half_d,
    })
}

/// Floquet spectra of both conditional cells and the mode correspondence.
#[derive(Clone, Debug)]
pub struct FloquetPair {
    pub spectrum_u: EigenSystem,
    pub spectrum_d: EigenSystem,
    /// `pairing[l]` is the index of the d-mode whose phase matches u-mode `l`.
    pub pairing: Vec<usize>,
    /// `overlap[l'][l] = <Φ_{d l'} | Φ_{u l}>`, with d-modes already reordered
    /// through `pairing` so that d-mode `l` carries phase `E_l`.
    pub overlap: Vec<Vec<Complex64>>,
}

impl FloquetPair {
    pub fn dim(&self) -> usize {
        self.pairing.len()
    }

    /// Phases `E_l` indexed as the u-spectrum.
    pub fn phases(&self) -> &[f64] {
        &self.spectrum_u.phases
    }

    /// d-mode paired with u-mode `l`.
    pub fn d_mode(&self, l: usize) -> &[Complex64] {
        &self.spectrum_d.modes[self.pairing[l]]
    }

    pub fn d_phase(&self, l: usize) -> f64 {
        self.spectrum_d.phases[self.pairing[l]]
    }

    /// Largest circular difference between paired phases.
    pub fn phase_mismatch(&self) -> f64 {
        (0..self.dim())
            .map(|l| phase_distance(self.spectrum_u.phases[l], self.d_phase(l)))
            .fold(0.0, f64::max)
    }
}

pub fn floquet_pair(cell: &UnitCell) -> Result<FloquetPair, Error> {
    let su = eig_unitary(&cell.t_u2)?;
    let sd = eig_unitary(&cell.t_d2)?;
    pair_spectra(su, sd)
}

/// Matches u- and d-modes by phase; inside groups of equal phase the
/// assignment maximizes `|<Φ_d|Φ_u>|` greedily.
pub fn pair_spectra(su: EigenSystem, sd: EigenSystem) -> Result<FloquetPair, Error> {
    let n = su.dim();
    if sd.dim() != n {
        return Err(LinalgError::DimensionMismatch(n, sd.dim()).into());
    }
    let raw: Vec<Vec<Complex64>> = (0..n)
        .map(|lp| (0..n).map(|l| inner(&sd.modes[lp], &su.modes[l])).collect())
        .collect();

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for l in 0..n {
        for lp in 0..n {
            if phase_distance(su.phases[l], sd.phases[lp]) < PHASE_MATCH_TOL {
                candidates.push((raw[lp][l].norm(), l, lp));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut pairing = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for &(_, l, lp) in &candidates {
        if pairing[l] == usize::MAX && !taken[lp] {
            pairing[l] = lp;
            taken[lp] = true;
        }
    }
    if pairing.contains(&usize::MAX) {
        pairing = cyclic_sorted_pairing(&su.phases, &sd.phases);
    }
    let mismatch = (0..n)
        .map(|l| phase_distance(su.phases[l], sd.phases[pairing[l]]))
        .fold(0.0, f64::max);
    if mismatch > PHASE_MATCH_TOL {
        return Err(Error::SymmetryViolation(format!(
            "u and d Floquet phases differ by {mismatch:e}"
        )));
    }
    let overlap = (0..n)
        .map(|lp| (0..n).map(|l| raw[pairing[lp]][l]).collect())
        .collect();
    Ok(FloquetPair {
        spectrum_u: su,
        spectrum_d: sd,
        pairing,
        overlap,
    })
}

// Both lists are sorted ascending on (-π, π]; equal multisets then differ
// at most by a cyclic shift when phases straddle the branch cut.
fn cyclic_sorted_pairing(pu: &[f64], pd: &[f64]) -> Vec<usize> {
    let n = pu.len();
    let mut best = (f64::INFINITY, 0);
    for shift in 0..n {
        let worst = (0..n)
            .map(|l| phase_distance(pu[l], pd[(l + shift) % n]))
            .fold(0.0, f64::max);
        if worst < best.0 {
            best = (worst, shift);
        }
    }
    (0..n).map(|l| (l + best.1) % n).collect()
}

/// Result of the half-period relation check.
#[derive(Clone, Copy, Debug)]
pub struct HalfPeriodReport {
    /// `max_l min_μ ‖half_u |Φ_ul> - e^{-iμ} |Φ_dl>‖`, and the same for the
    /// reverse map, over non-degenerate levels.
    pub max_residual: f64,
    /// `max_l |μ_ld + μ_lu - E_l|` (mod 2π) over non-degenerate levels.
    pub max_phase_sum_error: f64,
    /// For levels inside degenerate groups: largest norm of the part of the
    /// mapped mode lying outside the partner subspace.
    pub max_subspace_leak: f64,
}

/// Checks that each Floquet mode of one conditional cell is the half-period
/// evolution of its partner, `half_u |Φ_ul> = e^{-iμ_ld} |Φ_dl>` and
/// `half_d |Φ_dl> = e^{-iμ_lu} |Φ_ul>`, with `μ_ld + μ_lu = E_l`.
pub fn half_period_check(cell: &UnitCell, pair: &FloquetPair) -> Result<HalfPeriodReport, Error> {
    let n = pair.dim();
    let phases = pair.phases();
    let degenerate: Vec<bool> = (0..n)
        .map(|l| {
            (0..n).any(|k| k != l && phase_distance(phases[l], phases[k]) < linalg::DEGENERACY_TOL)
        })
        .collect();
    let mut report = HalfPeriodReport {
        max_residual: 0.0,
        max_phase_sum_error: 0.0,
        max_subspace_leak: 0.0,
    };
    for l in 0..n {
        let phi_u = &pair.spectrum_u.modes[l];
        let phi_d = pair.d_mode(l);
        let mapped_u = cell.half_u.matrix.apply(phi_u);
        let mapped_d = cell.half_d.matrix.apply(phi_d);
        if degenerate[l] {
            let group: Vec<usize> = (0..n)
                .filter(|&k| phase_distance(phases[l], phases[k]) < linalg::DEGENERACY_TOL)
                .collect();
            let leak_into = |v: &[Complex64], basis: &dyn Fn(usize) -> Vec<Complex64>| {
                let mut rest = v.to_vec();
                for &k in &group {
                    let b = basis(k);
                    let c = inner(&b, v);
                    for (r, bi) in rest.iter_mut().zip(&b) {
                        *r -= c * bi;
                    }
                }
                norm(&rest)
            };
            let leak_d = leak_into(&mapped_u, &|k| pair.d_mode(k).to_vec());
            let leak_u = leak_into(&mapped_d, &|k| pair.spectrum_u.modes[k].clone());
            report.max_subspace_leak = report.max_subspace_leak.max(leak_d).max(leak_u);
            continue;
        }
        // Best phase: e^{-iμ} = <Φ_d|mapped>/|...|.
        let c_d = inner(phi_d, &mapped_u);
        let c_u = inner(phi_u, &mapped_d);
        let mu_ld = -c_d.arg();
        let mu_lu = -c_u.arg();
        let resid = |mapped: &[Complex64], target: &[Complex64], mu: f64| {
            let ph = Complex64::from_polar(1.0, -mu);
            let diff: Vec<Complex64> = mapped.iter().zip(target).map(|(a, b)| a - ph * b).collect();
            norm(&diff)
        };
        let r = resid(&mapped_u, phi_d, mu_ld).max(resid(&mapped_d, phi_u, mu_lu));
        report.max_residual = report.max_residual.max(r);
        let sum_err = wrap_phase(mu_ld + mu_lu - phases[l]).abs();
        report.max_phase_sum_error = report.max_phase_sum_error.max(sum_err);
    }
    if report.max_residual > HALF_PERIOD_TOL || report.max_subspace_leak > HALF_PERIOD_TOL {
        return Err(Error::SymmetryViolation(format!(
            "half-period relation violated: residual {:e}, subspace leak {:e}",
            report.max_residual, report.max_subspace_leak
        )));
    }
    Ok(report)
}

/// `<(T_u2)^N B | (T_d2)^N B>` by direct propagation of one bath state.
pub fn coherence_numeric(
    ch: &ConditionalHamiltonians,
    seq: &PulseSequence,
    initial: &[Complex64],
) -> Result<Complex64, Error> {
    let cell = unit_cell(ch, seq)?;
    coherence_numeric_cell(&cell, seq.n_p, initial)
}

pub fn coherence_numeric_cell(
    cell: &UnitCell,
    n_p: u32,
    initial: &[Complex64],
) -> Result<Complex64, Error> {
    let dim = cell.t_u2.dim();
    if initial.len() != dim {
        return Err(LinalgError::DimensionMismatch(initial.len(), dim).into());
    }
    let n0 = norm(initial);
    if (n0 - 1.0).abs() > 1e-10 {
        return Err(Error::Validation(format!("initial bath state has norm {n0}, expected 1")));
    }
    if n_p == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let pu = cell.t_u2.matrix.unitary_power(n_p as u64);
    let pd = cell.t_d2.matrix.unitary_power(n_p as u64);
    let bu = pu.apply(initial);
    let bd = pd.apply(initial);
    let drift = (norm(&bu) - 1.0).abs().max((norm(&bd) - 1.0).abs());
    if drift > NORM_DRIFT_TOL {
        return Err(Error::NumericalStability(format!("norm drift {drift:e} after {n_p} cells")));
    }
    Ok(inner(&bu, &bd))
}

/// Bath average of [`coherence_numeric`] over the computational basis
/// (uniform weights); returns the real part.
pub fn thermal_coherence_numeric(cell: &UnitCell, n_p: u32) -> Result<f64, Error> {
    let dim = cell.t_u2.dim();
    if n_p == 0 {
        return Ok(1.0);
    }
    let pu = cell.t_u2.matrix.unitary_power(n_p as u64);
    let pd = cell.t_d2.matrix.unitary_power(n_p as u64);
    // Σ_j <e_j| Pu^dag Pd |e_j> = tr(Pu^dag Pd), summed in fixed order.
    let mut acc = 0.0;
    for j in 0..dim {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..dim {
            s += pu[(i, j)].conj() * pd[(i, j)];
        }
        acc += s.re;
    }
    Ok(acc / dim as f64)
}

/// Real and imaginary parts of the Floquet-basis bath average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloquetCoherence {
    pub re: f64,
    pub im: f64,
}

/// `(1/D) Σ_{l,l'} e^{i N (E_l - E_l')} |<Φ_{dl'}|Φ_{ul}>|^2`.
pub fn coherence_floquet_complex(pair: &FloquetPair, n_p: u32) -> FloquetCoherence {
    let n = pair.dim();
    let nf = n_p as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    for l in 0..n {
        let el = pair.spectrum_u.phases[l];
        for lp in 0..n {
            let w = pair.overlap[lp][l].norm_sqr();
            if w == 0.0 {
                continue;
            }
            let arg = nf * (el - pair.d_phase(lp));
            re += w * arg.cos();
            im += w * arg.sin();
        }
    }
    FloquetCoherence {
        re: re / n as f64,
        im: im / n as f64,
    }
}

/// Real part of the bath-averaged coherence from the Floquet spectrum.
pub fn coherence_floquet(pair: &FloquetPair, n_p: u32) -> f64 {
    coherence_floquet_complex(pair, n_p).re
}

/// One `(l, l')` contribution to the pairwise form of the coherence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeTerm {
    pub l: usize,
    pub lp: usize,
    /// `(2/D) (|<Φ_{dl'}|Φ_{ul}>|^2 + |<Φ_{dl}|Φ_{ul'}>|^2)`.
    pub coefficient: f64,
    /// `E_l - E_l'`.
    pub phase_difference: f64,
}

#[derive(Clone, Debug)]
pub struct EnvelopeDecomposition {
    pub terms: Vec<EnvelopeTerm>,
    /// `1 - Σ coefficients`, the pulse-number independent lower bound.
    pub envelope: f64,
}

impl EnvelopeDecomposition {
    /// `1 - Σ c_{ll'} sin^2(N (E_l - E_l') / 2)`.
    pub fn coherence(&self, n_p: u32) -> f64 {
        let nf = n_p as f64;
        1.0 - self
            .terms
            .iter()
            .map(|t| t.coefficient * (0.5 * nf * t.phase_difference).sin().powi(2))
            .sum::<f64>()
    }
}

pub fn envelope_general(pair: &FloquetPair) -> EnvelopeDecomposition {
    let n = pair.dim();
    let scale = 2.0 / n as f64;
    let mut terms = Vec::with_capacity(n * (n - 1) / 2);
    for l in 0..n {
        for lp in (l + 1)..n {
            let coefficient =
                scale * (pair.overlap[lp][l].norm_sqr() + pair.overlap[l][lp].norm_sqr());
            terms.push(EnvelopeTerm {
                l,
                lp,
                coefficient,
                phase_difference: pair.spectrum_u.phases[l] - pair.spectrum_u.phases[lp],
            });
        }
    }
    let envelope = 1.0 - terms.iter().map(|t| t.coefficient).sum::<f64>();
    EnvelopeDecomposition { terms, envelope }
}

/// Eigenphase trajectories over a τ grid.
#[derive(Clone, Debug)]
pub struct SpectrumScan {
    pub taus: Vec<f64>,
    /// `phases[i][k]`: phase of trajectory `k` at `taus[i]`, in `(-π, π]`.
    pub phases: Vec<Vec<f64>>,
    /// Smallest circular gap between distinct trajectories at each τ.
    pub min_gap: Vec<f64>,
    pub crossing: Vec<bool>,
}

/// Floquet phases of the u-started cell along `taus`, with trajectories
/// continued by maximal mode overlap between neighbouring samples.
pub fn spectrum_scan(
    ch: &ConditionalHamiltonians,
    base: &PulseSequence,
    taus: &[f64],
    crossing_threshold: f64,
) -> Result<SpectrumScan, Error> {
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("τ grid must be strictly ascending".into()));
    }
    let prep = ch.prepare()?;
    let n = ch.dim();
    let mut prev_modes: Option<Vec<Vec<Complex64>>> = None;
    let mut phases = Vec::with_capacity(taus.len());
    let mut min_gap = Vec::with_capacity(taus.len());
    let mut crossing = Vec::with_capacity(taus.len());
    for &tau in taus {
        let cell = unit_cell_prepared(&prep, &base.with_tau(tau))?;
        let es = eig_unitary(&cell.t_u2)?;
        let order: Vec<usize> = match &prev_modes {
            None => (0..n).collect(),
            Some(prev) => {
                let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
                for (k, pm) in prev.iter().enumerate() {
                    for (j, m) in es.modes.iter().enumerate() {
                        cand.push((inner(pm, m).norm(), k, j));
                    }
                }
                cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
                let mut assign = vec![usize::MAX; n];
                let mut used = vec![false; n];
                for &(_, k, j) in &cand {
                    if assign[k] == usize::MAX && !used[j] {
                        assign[k] = j;
                        used[j] = true;
                    }
                }
                assign
            }
        };
        let row: Vec<f64> = order.iter().map(|&j| es.phases[j]).collect();
        let mut gap = f64::INFINITY;
        for a in 0..n {
            for b in (a + 1)..n {
                gap = gap.min(phase_distance(row[a], row[b]));
            }
        }
        crossing.push(gap < crossing_threshold);
        min_gap.push(gap);
        phases.push(row);
        prev_modes = Some(order.iter().map(|&j| es.modes[j].clone()).collect());
    }
    Ok(SpectrumScan {
        taus: taus.to_vec(),
        phases,
        min_gap,
        crossing,
    })
}
