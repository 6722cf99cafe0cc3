//! Sensor models producing two-state baths: the NV centre with a single
//! nuclear spin, and a Si:Bi donor detecting a flip-flopping nuclear pair.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::{eigh, inner, kron, spin_operators, ComplexMatrix};
use crate::pseudospin::{PseudoField, TwoStateModel};
use crate::Error;

/// Field at which adiabatic level labels are assigned (ascending energy).
pub const LABEL_FIELD_TESLA: f64 = 1e-4;
/// Largest field step between tracked diagonalizations.
pub const TRACK_STEP_TESLA: f64 = 2e-3;
/// Tolerance of [`owp_locate`].
pub const OWP_TOL_TESLA: f64 = 1e-6;

const MIN_TRACK_OVERLAP: f64 = 0.75;
const MAX_STEP_HALVINGS: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NVModel {
    pub omega_x: f64,
    pub omega_z: f64,
    pub a_par: f64,
}

/// `h_u = (ω_x, A_∥ + ω_z)`, `h_d = (ω_x, ω_z)`.
pub fn nv_two_state(nv: &NVModel) -> Result<TwoStateModel, Error> {
    if !(nv.a_par.is_finite() && nv.a_par >= 0.0) {
        return Err(Error::Validation(format!("A_par must be non-negative, got {}", nv.a_par)));
    }
    Ok(TwoStateModel::new(
        PseudoField::new(nv.omega_x, nv.a_par + nv.omega_z)?,
        PseudoField::new(nv.omega_x, nv.omega_z)?,
    ))
}

/// Electron spin ½ coupled to a nuclear spin `I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DonorModel {
    /// Isotropic hyperfine constant, rad/s.
    pub hyperfine_a: f64,
    /// Nuclear spin `I`; must be a positive multiple of ½.
    pub nuclear_spin: f64,
    /// Electron gyromagnetic ratio, rad/s/T.
    pub gamma_e: f64,
    /// `γ_N / γ_e`.
    pub delta_gamma: f64,
    /// 1-based adiabatic level index of the `u` state.
    pub level_u: usize,
    pub level_d: usize,
}

impl DonorModel {
    /// Si:Bi with the 12 → 9 transition.
    pub fn si_bi() -> Self {
        Self {
            hyperfine_a: 2.0 * PI * 1.4754e9,
            nuclear_spin: 4.5,
            gamma_e: 2.0 * PI * 27.997e9,
            delta_gamma: 2.488e-4,
            level_u: 12,
            level_d: 9,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.nuclear_dim()
    }

    fn nuclear_dim(&self) -> usize {
        (2.0 * self.nuclear_spin).round() as usize + 1
    }

    pub fn validate(&self) -> Result<(), Error> {
        let two_i = 2.0 * self.nuclear_spin;
        if !(two_i >= 1.0 && (two_i - two_i.round()).abs() < 1e-12 && two_i <= 40.0) {
            return Err(Error::Validation(format!(
                "nuclear spin must be a positive half-integer, got {}",
                self.nuclear_spin
            )));
        }
        for (name, v) in [
            ("hyperfine_a", self.hyperfine_a),
            ("gamma_e", self.gamma_e),
            ("delta_gamma", self.delta_gamma),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite")));
            }
        }
        let n = self.dim();
        for l in [self.level_u, self.level_d] {
            if l == 0 || l > n {
                return Err(Error::Validation(format!("level {l} outside 1..={n}")));
            }
        }
        if self.level_u == self.level_d {
            return Err(Error::Validation("u and d levels must differ".into()));
        }
        Ok(())
    }
}

/// `γ_e B0 (S_z - δ_γ I_z) + A S·I` on electron ⊗ nucleus, electron
/// `m_s = +½` first and nuclear `m_I` descending.
pub fn donor_hamiltonian(d: &DonorModel, b0: f64) -> Result<ComplexMatrix, Error> {
    d.validate()?;
    if !(b0.is_finite() && b0 >= 0.0) {
        return Err(Error::Validation(format!("B0 must be non-negative, got {b0}")));
    }
    let (sz, sp, sm) = spin_operators(0.5);
    let (iz, ip, im) = spin_operators(d.nuclear_spin);
    let e1 = ComplexMatrix::identity(2);
    let n1 = ComplexMatrix::identity(d.nuclear_dim());
    let zeeman = &kron(&sz, &n1)? - &kron(&e1, &iz)?.scale_real(d.delta_gamma);
    let contact = &kron(&sz, &iz)? + &(&kron(&sp, &im)? + &kron(&sm, &ip)?).scale_real(0.5);
    Ok(&zeeman.scale_real(d.gamma_e * b0) + &contact.scale_real(d.hyperfine_a))
}

/// `2 S_z` on the donor space.
fn electron_polarization_operator(d: &DonorModel) -> Result<ComplexMatrix, Error> {
    let (sz, _, _) = spin_operators(0.5);
    Ok(kron(&sz, &ComplexMatrix::identity(d.nuclear_dim()))?.scale_real(2.0))
}

/// Eigenstates at one field, ordered by adiabatic label.
#[derive(Clone, Debug)]
pub struct TrackedLevels {
    pub b0: f64,
    pub energies: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
}

impl TrackedLevels {
    /// `2<l|S_z|l>` for 1-based `level`.
    pub fn polarization(&self, d: &DonorModel, level: usize) -> Result<f64, Error> {
        let op = electron_polarization_operator(d)?;
        let v = &self.states[level - 1];
        Ok(inner(v, &op.apply(v)).re.clamp(-1.0, 1.0))
    }
}

fn diagonalize(d: &DonorModel, b0: f64) -> Result<TrackedLevels, Error> {
    let eig = eigh(&donor_hamiltonian(d, b0)?)?;
    Ok(TrackedLevels {
        b0,
        states: eig.vectors,
        energies: eig.values,
    })
}

// Relabels `next` so that each label continues the state of `prev` it
// overlaps most. Returns None when the assignment is not clear-cut.
fn continue_labels(prev: &TrackedLevels, next: TrackedLevels) -> Option<TrackedLevels> {
    let n = prev.states.len();
    let mut order = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (k, pv) in prev.states.iter().enumerate() {
        let overlaps: Vec<f64> = next.states.iter().map(|w| inner(pv, w).norm_sqr()).collect();
        let (best, &o) = overlaps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        if o < MIN_TRACK_OVERLAP || used[best] {
            return None;
        }
        order[k] = best;
        used[best] = true;
    }
    Some(TrackedLevels {
        b0: next.b0,
        energies: order.iter().map(|&j| next.energies[j]).collect(),
        states: order.iter().map(|&j| next.states[j].clone()).collect(),
    })
}

fn advance(d: &DonorModel, prev: &TrackedLevels, target: f64, depth: u32) -> Result<TrackedLevels, Error> {
    if let Some(t) = continue_labels(prev, diagonalize(d, target)?) {
        return Ok(t);
    }
    if depth >= MAX_STEP_HALVINGS {
        return Err(Error::Tracking { field: target });
    }
    let mid = 0.5 * (prev.b0 + target);
    let half = advance(d, prev, mid, depth + 1)?;
    advance(d, &half, target, depth + 1)
}

/// Levels at every field of an ascending grid, labelled adiabatically from
/// the low-field ordering.
pub fn track_levels(d: &DonorModel, fields: &[f64]) -> Result<Vec<TrackedLevels>, Error> {
    d.validate()?;
    if fields.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation("field grid must be ascending".into()));
    }
    if fields.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
        return Err(Error::Validation("fields must be finite and non-negative".into()));
    }
    let mut current = diagonalize(d, LABEL_FIELD_TESLA)?;
    let mut out = Vec::with_capacity(fields.len());
    for &b in fields {
        // Walk down as well as up, so fields below the label field work too.
        let span = b - current.b0;
        let steps = (span.abs() / TRACK_STEP_TESLA).ceil().max(1.0) as usize;
        let start = current.b0;
        for s in 1..=steps {
            let target = if s == steps { b } else { start + span * s as f64 / steps as f64 };
            current = advance(d, &current, target, 0)?;
        }
        out.push(current.clone());
    }
    Ok(out)
}

/// `P = 2<level|S_z|level>` at `b0`, following the level adiabatically.
pub fn donor_polarization(d: &DonorModel, b0: f64, level: usize) -> Result<f64, Error> {
    let n = d.dim();
    if level == 0 || level > n {
        return Err(Error::Validation(format!("level {level} outside 1..={n}")));
    }
    track_levels(d, &[b0])?[0].polarization(d, level)
}

/// `(P_u, P_d)` along an ascending field grid.
pub fn donor_polarization_sweep(d: &DonorModel, fields: &[f64]) -> Result<Vec<(f64, f64)>, Error> {
    track_levels(d, fields)?
        .iter()
        .map(|t| Ok((t.polarization(d, d.level_u)?, t.polarization(d, d.level_d)?)))
        .collect()
}

/// Nuclear pair seen by the donor: `ΔA = A_1 - A_2` and `C_12`, rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairTarget {
    pub delta_a: f64,
    pub c12: f64,
}

impl PairTarget {
    pub fn from_ratio(delta_a: f64, r: f64) -> Self {
        Self { delta_a, c12: delta_a / r }
    }

    /// `R = ΔA / C_12`.
    pub fn ratio(&self) -> f64 {
        self.delta_a / self.c12
    }

    /// `h_i = ½(C_12, ΔA P_i)`.
    pub fn two_state(&self, p_u: f64, p_d: f64) -> Result<TwoStateModel, Error> {
        TwoStateModel::from_xz(0.5 * self.c12, 0.5 * self.delta_a * p_u, 0.5 * self.delta_a * p_d)
    }
}

pub fn donor_pair_two_state(d: &DonorModel, t: &PairTarget, b0: f64) -> Result<TwoStateModel, Error> {
    let levels = &track_levels(d, &[b0])?[0];
    t.two_state(levels.polarization(d, d.level_u)?, levels.polarization(d, d.level_d)?)
}

/// Field in `[lo, hi]` where `P_u = P_d`, by bisection.
pub fn owp_locate(d: &DonorModel, _t: &PairTarget, b0_range: (f64, f64)) -> Result<f64, Error> {
    let (lo, hi) = b0_range;
    if !(lo < hi) {
        return Err(Error::Validation(format!("empty field range [{lo}, {hi}]")));
    }
    let diff = |b: f64| -> Result<f64, Error> {
        let (pu, pd) = donor_polarization_sweep(d, &[b])?[0];
        Ok(pu - pd)
    };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (diff(a)?, diff(b)?);
    let tiny = 1e-12;
    if fa.abs() < tiny && fb.abs() < tiny && diff(0.5 * (a + b))?.abs() < tiny {
        return Err(Error::DegenerateInput("P_u and P_d coincide across the range".into()));
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::NotFound(format!("P_u - P_d keeps its sign on [{lo}, {hi}] T")));
    }
    while b - a > OWP_TOL_TESLA {
        let m = 0.5 * (a + b);
        let fm = diff(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudospin::{envelope, regime_classify, Regime};

    #[test]
    fn nv_without_transverse_field_is_silent() {
        let m = nv_two_state(&NVModel { omega_x: 0.0, omega_z: 0.0, a_par: 2.0 * PI * 50e3 }).unwrap();
        assert_eq!(m.theta_u(), 0.0);
        assert_eq!(m.theta_d(), 0.0);
        for i in 1..100 {
            let e = envelope(&m, i as f64 * 1.3e-6).unwrap();
            assert!((e.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nv_weak_coupling() {
        let nv = NVModel { omega_x: 2.0 * PI * 5e3, omega_z: 2.0 * PI * 500e3, a_par: 2.0 * PI * 1e3 };
        let m = nv_two_state(&nv).unwrap();
        assert_eq!(regime_classify(&m), Regime::WeakCouplingI);
    }

    #[test]
    fn negative_hyperfine_rejected() {
        assert!(nv_two_state(&NVModel { omega_x: 1.0, omega_z: 0.0, a_par: -1.0 }).is_err());
    }

    #[test]
    fn zero_field_multiplets() {
        let d = DonorModel::si_bi();
        let h = donor_hamiltonian(&d, 0.0).unwrap();
        let eig = eigh(&h).unwrap();
        let a = d.hyperfine_a;
        let low = -a * 5.5 / 2.0;
        let high = a * 4.5 / 2.0;
        let n_low = eig.values.iter().filter(|&&e| (e - low).abs() < 1e-6 * a).count();
        let n_high = eig.values.iter().filter(|&&e| (e - high).abs() < 1e-6 * a).count();
        assert_eq!((n_low, n_high), (9, 11));
    }

    #[test]
    fn hamiltonian_is_traceless() {
        let d = DonorModel::si_bi();
        for b in [0.0, 0.1, 0.37, 2.0] {
            assert!(donor_hamiltonian(&d, b).unwrap().trace().norm() < 1e-10 * d.hyperfine_a);
        }
    }

    #[test]
    fn invalid_levels_rejected() {
        let mut d = DonorModel::si_bi();
        d.level_u = 21;
        assert!(d.validate().is_err());
        d.level_u = 9;
        assert!(d.validate().is_err());
    }

    #[test]
    fn high_field_polarizations_saturate() {
        let d = DonorModel::si_bi();
        let t = &track_levels(&d, &[5.0]).unwrap()[0];
        for l in 1..=20 {
            assert!(t.polarization(&d, l).unwrap().abs() > 0.98);
        }
    }

    #[test]
    fn polarizations_stay_in_range() {
        let d = DonorModel::si_bi();
        let fields: Vec<f64> = (0..=40).map(|i| 0.01 * i as f64).collect();
        for (pu, pd) in donor_polarization_sweep(&d, &fields).unwrap() {
            assert!(pu.abs() <= 1.0 && pd.abs() <= 1.0);
        }
    }

    #[test]
    fn owp_needs_sign_change() {
        let d = DonorModel::si_bi();
        let t = PairTarget::from_ratio(2.0 * PI * 10e3, 100.0);
        assert!(matches!(owp_locate(&d, &t, (0.25, 0.3)), Err(Error::NotFound(_))));
    }

    #[test]
    fn symmetric_model_is_degenerate() {
        let d = DonorModel {
            hyperfine_a: 0.0,
            nuclear_spin: 0.5,
            gamma_e: 1e10,
            delta_gamma: 0.0,
            level_u: 3,
            level_d: 4,
        };
        let t = PairTarget::from_ratio(1e4, 10.0);
        assert!(matches!(owp_locate(&d, &t, (0.1, 0.2)), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn zero_detuning_gives_identical_fields() {
        let d = DonorModel::si_bi();
        let t = PairTarget { delta_a: 0.0, c12: 1e3 };
        let m = donor_pair_two_state(&d, &t, 0.1).unwrap();
        assert_eq!(m.h_u, m.h_d);
    }
}
