//! Closed-form Floquet theory of a two-state bath.
//!
//! The bath is a spin (or the flip-flop pseudospin of a nuclear pair) with
//! conditional Hamiltonians `H_i = ½ h_i·σ`, `h_i = (X_i, 0, Z_i)`. Every
//! propagator is then an SU(2) rotation, which is how the phases below are
//! computed: products of unit quaternions, with the angle taken by `atan2`
//! so that it stays accurate next to `E = 0` and `E = π`.

use std::f64::consts::PI;

use crate::floquet::{
    envelope_general, floquet_pair, thermal_coherence_numeric, unit_cell, ConditionalHamiltonians,
    PulseSequence,
};
use crate::linalg::{sigma_x, sigma_z, ComplexMatrix};
use crate::Error;

/// `|cos(E(τ)/2)|` below which the closed form is 0/0 and the numeric
/// engine is used instead.
pub const CROSSING_GUARD: f64 = 1e-8;
/// Largest violation of the dip condition accepted by [`dip_depth`].
pub const DIP_CONDITION_TOL: f64 = 1e-6;
pub const DEFAULT_REGIME_THRESHOLD: f64 = 10.0;

/// Effective field `h = (x, 0, z)` in rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoField {
    pub x: f64,
    pub z: f64,
}

impl PseudoField {
    pub fn new(x: f64, z: f64) -> Result<Self, Error> {
        if !(x.is_finite() && z.is_finite()) {
            return Err(Error::Validation(format!("field components must be finite, got ({x}, {z})")));
        }
        Ok(Self { x, z })
    }

    pub fn magnitude(&self) -> f64 {
        self.x.hypot(self.z)
    }

    /// `½ h·σ`.
    pub fn hamiltonian(&self) -> ComplexMatrix {
        &sigma_x().scale_real(0.5 * self.x) + &sigma_z().scale_real(0.5 * self.z)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoStateModel {
    pub h_u: PseudoField,
    pub h_d: PseudoField,
}

impl TwoStateModel {
    pub fn new(h_u: PseudoField, h_d: PseudoField) -> Self {
        Self { h_u, h_d }
    }

    /// Common transverse component `x` with `z_u`, `z_d`.
    pub fn from_xz(x: f64, z_u: f64, z_d: f64) -> Result<Self, Error> {
        Ok(Self {
            h_u: PseudoField::new(x, z_u)?,
            h_d: PseudoField::new(x, z_d)?,
        })
    }

    pub fn omega_u(&self) -> f64 {
        0.5 * self.h_u.magnitude()
    }

    pub fn omega_d(&self) -> f64 {
        0.5 * self.h_d.magnitude()
    }

    pub fn theta_u(&self) -> f64 {
        self.h_u.x.atan2(self.h_u.z)
    }

    pub fn theta_d(&self) -> f64 {
        self.h_d.x.atan2(self.h_d.z)
    }

    /// `cos(θ_u - θ_d)` from the field directions; 1 when a field vanishes.
    pub fn cos_dtheta(&self) -> f64 {
        let m = self.h_u.magnitude() * self.h_d.magnitude();
        if m == 0.0 {
            return 1.0;
        }
        ((self.h_u.x * self.h_d.x + self.h_u.z * self.h_d.z) / m).clamp(-1.0, 1.0)
    }

    /// `sin^2(θ_u - θ_d)`, computed from the cross product.
    fn sin2_dtheta(&self) -> f64 {
        let m = self.h_u.magnitude() * self.h_d.magnitude();
        if m == 0.0 {
            return 0.0;
        }
        let s = (self.h_u.x * self.h_d.z - self.h_u.z * self.h_d.x) / m;
        s * s
    }

    pub fn conditional_hamiltonians(&self) -> ConditionalHamiltonians {
        ConditionalHamiltonians {
            h_u: self.h_u.hamiltonian(),
            h_d: self.h_d.hamiltonian(),
        }
    }
}

// Unit quaternion (w, v) standing for w·I - i v·σ.
#[derive(Clone, Copy)]
struct Quat {
    w: f64,
    v: [f64; 3],
}

impl Quat {
    fn rotation(field: &PseudoField, t: f64) -> Quat {
        let mag = field.magnitude();
        if mag == 0.0 {
            return Quat { w: 1.0, v: [0.0; 3] };
        }
        let (s, c) = (0.5 * mag * t).sin_cos();
        Quat {
            w: c,
            v: [s * field.x / mag, 0.0, s * field.z / mag],
        }
    }

    fn mul(self, o: Quat) -> Quat {
        let (a, b) = (self.v, o.v);
        let cross = [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ];
        Quat {
            w: self.w * o.w - (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]),
            v: [
                self.w * b[0] + o.w * a[0] + cross[0],
                self.w * b[1] + o.w * a[1] + cross[1],
                self.w * b[2] + o.w * a[2] + cross[2],
            ],
        }
    }

    fn angle(self) -> f64 {
        let n = (self.v[0] * self.v[0] + self.v[1] * self.v[1] + self.v[2] * self.v[2]).sqrt();
        n.atan2(self.w)
    }
}

fn cell_phase(model: &TwoStateModel, s: f64) -> f64 {
    let qu = Quat::rotation(&model.h_u, s);
    let qd = Quat::rotation(&model.h_d, 2.0 * s);
    qu.mul(qd).mul(qu).angle()
}

/// Floquet phase `E(s) ∈ [0, π]` of the cell `T_u(s) T_d(2s) T_u(s)`.
///
/// The returned value is the rotation angle of the quaternion product. The
/// trace relation `cos E = cos 2ω_u s cos 2ω_d s - sin 2ω_u s sin 2ω_d s
/// cos(θ_u - θ_d)` is evaluated alongside as a consistency check.
pub fn floquet_phase(model: &TwoStateModel, s: f64) -> Result<f64, Error> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Validation(format!("s must be non-negative, got {s}")));
    }
    let (wu, wd) = (model.omega_u(), model.omega_d());
    let rhs = (2.0 * wu * s).cos() * (2.0 * wd * s).cos()
        - (2.0 * wu * s).sin() * (2.0 * wd * s).sin() * model.cos_dtheta();
    if rhs.abs() > 1.0 + 1e-9 {
        return Err(Error::NumericalConsistency(format!("cos E = {rhs} lies outside [-1, 1]")));
    }
    let e = cell_phase(model, s);
    if (e.cos() - rhs.clamp(-1.0, 1.0)).abs() > 1e-9 {
        return Err(Error::NumericalConsistency(format!(
            "trace relation gives cos E = {rhs}, quaternion product gives {}",
            e.cos()
        )));
    }
    Ok(e)
}

/// Pieces of the closed form at one τ.
#[derive(Clone, Copy, Debug)]
struct Closed {
    /// `E(τ)`.
    e: f64,
    /// `cos^2(E(τ)/2)`.
    c2_full: f64,
    /// `F(τ)`.
    f: f64,
}

fn closed_form(model: &TwoStateModel, tau: f64) -> Closed {
    let (su, cu) = (model.omega_u() * tau).sin_cos();
    let (sd, cd) = (model.omega_d() * tau).sin_cos();
    // cos E(τ/2) and the part of cos^2(E(τ)/2) that vanishes for parallel fields.
    let c_half = cu * cd - su * sd * model.cos_dtheta();
    let k2 = su * su * sd * sd * model.sin2_dtheta();
    let c2_full = c_half * c_half + k2;
    let f = if c2_full > 0.0 { k2 / c2_full } else { 0.0 };
    Closed {
        e: cell_phase(model, tau),
        c2_full,
        f,
    }
}

/// One coherence sample; `numeric_fallback` marks samples at a true crossing
/// that were evaluated by direct propagation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherenceSample {
    pub value: f64,
    pub numeric_fallback: bool,
}

fn check_tau(tau: f64) -> Result<(), Error> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Validation(format!("τ must be positive, got {tau}")));
    }
    Ok(())
}

/// `L = 1 - 2 F(τ) sin^2(N_p E(τ))`, bath-averaged.
pub fn coherence_analytic(model: &TwoStateModel, tau: f64, n_p: u32) -> Result<CoherenceSample, Error> {
    check_tau(tau)?;
    let c = closed_form(model, tau);
    if c.c2_full.sqrt() < CROSSING_GUARD {
        let ch = model.conditional_hamiltonians();
        let cell = unit_cell(&ch, &PulseSequence::ideal(tau, n_p)?)?;
        return Ok(CoherenceSample {
            value: thermal_coherence_numeric(&cell, n_p)?,
            numeric_fallback: true,
        });
    }
    Ok(CoherenceSample {
        value: coherence_from_parts(c.f, c.e, n_p),
        numeric_fallback: false,
    })
}

fn coherence_from_parts(f: f64, e: f64, n_p: u32) -> f64 {
    1.0 - 2.0 * f * (n_p as f64 * e).sin().powi(2)
}

/// `1 - 2 F(τ)`, the `N_p`-independent lower bound of the coherence.
pub fn envelope(model: &TwoStateModel, tau: f64) -> Result<CoherenceSample, Error> {
    check_tau(tau)?;
    let c = closed_form(model, tau);
    if c.c2_full.sqrt() < CROSSING_GUARD {
        let ch = model.conditional_hamiltonians();
        let cell = unit_cell(&ch, &PulseSequence::ideal(tau, 1)?)?;
        let pair = floquet_pair(&cell)?;
        return Ok(CoherenceSample {
            value: envelope_general(&pair).envelope,
            numeric_fallback: true,
        });
    }
    Ok(CoherenceSample {
        value: 1.0 - 2.0 * c.f,
        numeric_fallback: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipRecord {
    pub tau_dip: f64,
    /// 1 for the first root in ascending τ.
    pub harmonic_index: u32,
    /// Level repulsion `|π - E(τ_dip)|`.
    pub delta: f64,
    /// `1 - 2 sin^2(N_p δ)`.
    pub depth: f64,
}

/// Every root of `cos E(τ/2) = 0` in `(0, tau_max]`, with the level
/// repulsion and depth after `n_p` cells.
pub fn dip_positions(model: &TwoStateModel, tau_max: f64, n_p: u32) -> Result<Vec<DipRecord>, Error> {
    check_tau(tau_max)?;
    let wsum = model.omega_u() + model.omega_d();
    if wsum == 0.0 {
        return Ok(Vec::new());
    }
    let step = (PI / (20.0 * wsum)).min(tau_max / 1000.0);
    let n_steps = (tau_max / step).ceil();
    if n_steps > 5e7 {
        return Err(Error::Validation(format!(
            "τ range spans {n_steps:e} bracketing steps; reduce tau_max"
        )));
    }
    let n_steps = n_steps as usize;
    let (wu, wd, cdt) = (model.omega_u(), model.omega_d(), model.cos_dtheta());
    let g = |tau: f64| (wu * tau).cos() * (wd * tau).cos() - (wu * tau).sin() * (wd * tau).sin() * cdt;

    let mut roots = Vec::new();
    let mut a = 0.0;
    let mut ga = g(a);
    for i in 1..=n_steps {
        let b = (i as f64 * step).min(tau_max);
        let gb = g(b);
        if gb == 0.0 {
            roots.push(b);
        } else if ga * gb < 0.0 {
            roots.push(bisect(&g, a, b, ga));
        }
        a = b;
        ga = gb;
    }
    roots
        .into_iter()
        .enumerate()
        .map(|(i, tau)| {
            let delta = PI - cell_phase(model, tau);
            Ok(DipRecord {
                tau_dip: tau,
                harmonic_index: i as u32 + 1,
                delta,
                depth: 1.0 - 2.0 * (n_p as f64 * delta).sin().powi(2),
            })
        })
        .collect()
}

fn bisect(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut ga: f64) -> f64 {
    while b - a > 1e-10 * b {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if ga * gm < 0.0 {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
    }
    0.5 * (a + b)
}

/// `(δ, 1 - 2 sin^2(N_p δ))` at a root of the dip condition.
pub fn dip_depth(model: &TwoStateModel, tau_dip: f64, n_p: u32) -> Result<(f64, f64), Error> {
    check_tau(tau_dip)?;
    let half = cell_phase(model, 0.5 * tau_dip);
    let violation = (half - PI / 2.0).abs();
    if violation > DIP_CONDITION_TOL {
        return Err(Error::Contract(format!(
            "E(τ/2) misses π/2 by {violation:e} rad at τ = {tau_dip:e} s"
        )));
    }
    let delta = (PI - cell_phase(model, tau_dip)).abs();
    Ok((delta, 1.0 - 2.0 * (n_p as f64 * delta).sin().powi(2)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AverageHamiltonianDip {
    pub tau_bar: f64,
    /// `½ |(h_u + h_d)/2|`.
    pub omega_av: f64,
}

/// First dip predicted by the average Hamiltonian `½(H_u + H_d)`.
pub fn avg_hamiltonian_dip(model: &TwoStateModel) -> Result<AverageHamiltonianDip, Error> {
    let (wu, wd) = (model.omega_u(), model.omega_d());
    let den = wu * wu + wd * wd + 2.0 * wu * wd * model.cos_dtheta();
    let scale = (wu + wd).powi(2);
    if !(den > 1e-14 * scale) || scale == 0.0 {
        return Err(Error::Divergence("the mean field vanishes".into()));
    }
    let xa = 0.5 * (model.h_u.x + model.h_d.x);
    let za = 0.5 * (model.h_u.z + model.h_d.z);
    Ok(AverageHamiltonianDip {
        tau_bar: PI / (2.0 * den.sqrt()),
        omega_av: 0.5 * xa.hypot(za),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `|h_u + h_d| ≫ |h_u - h_d|`.
    WeakCouplingI,
    /// `|h_u - h_d| ≫ |h_u + h_d|`.
    AntialignedII,
    Intermediate,
}

pub fn regime_classify(model: &TwoStateModel) -> Regime {
    regime_classify_with(model, DEFAULT_REGIME_THRESHOLD)
}

pub fn regime_classify_with(model: &TwoStateModel, threshold: f64) -> Regime {
    let sum = (model.h_u.x + model.h_d.x).hypot(model.h_u.z + model.h_d.z);
    let diff = (model.h_u.x - model.h_d.x).hypot(model.h_u.z - model.h_d.z);
    if diff == 0.0 || sum >= threshold * diff {
        Regime::WeakCouplingI
    } else if diff >= threshold * sum {
        Regime::AntialignedII
    } else {
        Regime::Intermediate
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiamondBoundaries {
    /// `π / (2(ω_d + ω_u))`.
    pub tau_plus: f64,
    /// `π / (2|ω_d - ω_u|)`, absent when the frequencies coincide.
    pub tau_minus: Option<f64>,
}

pub fn diamond_boundaries(model: &TwoStateModel) -> Result<DiamondBoundaries, Error> {
    let (wu, wd) = (model.omega_u(), model.omega_d());
    if wu + wd == 0.0 {
        return Err(Error::Validation("both fields vanish".into()));
    }
    let diff = (wd - wu).abs();
    Ok(DiamondBoundaries {
        tau_plus: PI / (2.0 * (wd + wu)),
        tau_minus: (diff > 0.0).then(|| PI / (2.0 * diff)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{coherence_numeric_cell, floquet_pair};
    use crate::linalg::eig_unitary;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_model(rng: &mut impl Rng) -> TwoStateModel {
        TwoStateModel::from_xz(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
            .unwrap()
    }

    #[test]
    fn aligned_fields_reach_pi() {
        let m = TwoStateModel::from_xz(0.0, 2.0, 2.0).unwrap();
        assert!((floquet_phase(&m, PI / 4.0).unwrap() - PI).abs() < 1e-12);
        assert_eq!(floquet_phase(&m, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn phase_matches_cell_eigenphase() {
        // ω_u = 0.6, ω_d = 1.1, θ_u - θ_d = 0.7.
        let (tu, td) = (0.9_f64, 0.2_f64);
        let m = TwoStateModel::new(
            PseudoField::new(1.2 * tu.sin(), 1.2 * tu.cos()).unwrap(),
            PseudoField::new(2.2 * td.sin(), 2.2 * td.cos()).unwrap(),
        );
        let e = floquet_phase(&m, 0.5).unwrap();
        let cell = unit_cell(&m.conditional_hamiltonians(), &PulseSequence::ideal(0.5, 1).unwrap()).unwrap();
        let es = eig_unitary(&cell.t_u2).unwrap();
        let top = es.phases.iter().cloned().fold(f64::MIN, f64::max);
        assert!((e - top).abs() < 1e-12);
    }

    #[test]
    fn identical_fields_never_decohere() {
        let m = TwoStateModel::from_xz(0.7, -0.3, -0.3).unwrap();
        for tau in [0.1, 1.0, 7.3] {
            assert!((coherence_analytic(&m, tau, 9).unwrap().value - 1.0).abs() < 1e-15);
            assert!((envelope(&m, tau).unwrap().value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn collinear_fields_have_flat_envelope() {
        let m = TwoStateModel::from_xz(0.0, 1.7, -0.4).unwrap();
        for i in 1..200 {
            let env = envelope(&m, i as f64 * 0.037).unwrap();
            assert!((env.value - 1.0).abs() < 1e-12 || env.numeric_fallback);
        }
    }

    #[test]
    fn matches_direct_propagation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let m = random_model(&mut rng);
            let tau = rng.gen_range(0.05..4.0);
            let cell = unit_cell(&m.conditional_hamiltonians(), &PulseSequence::ideal(tau, 10).unwrap()).unwrap();
            let mut acc = 0.0;
            for j in 0..2 {
                let mut e = vec![Complex64::new(0.0, 0.0); 2];
                e[j] = Complex64::new(1.0, 0.0);
                acc += coherence_numeric_cell(&cell, 10, &e).unwrap().re;
            }
            let got = coherence_analytic(&m, tau, 10).unwrap();
            assert!((got.value - acc / 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn revival_when_oscillation_vanishes() {
        let m = TwoStateModel::from_xz(0.8, 1.1, -0.5).unwrap();
        // E grows from 0; find τ with 3 E(τ) = π.
        let h = |t: f64| cell_phase(&m, t) - PI / 3.0;
        let mut hi = 1e-3;
        while h(hi) < 0.0 {
            hi *= 1.5;
        }
        let tau = bisect(&h, 1e-6, hi, h(1e-6));
        assert!(closed_form(&m, tau).f > 1e-3);
        assert!((coherence_analytic(&m, tau, 3).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn branch_choice_does_not_matter() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let f = rng.gen_range(0.0..1.0);
            let e = rng.gen_range(0.0..PI);
            let n = rng.gen_range(1..50);
            let base = coherence_from_parts(f, e, n);
            assert!((coherence_from_parts(f, 2.0 * PI - e, n) - base).abs() < 1e-9);
            assert!((coherence_from_parts(f, e + 2.0 * PI, n) - base).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_matches_mode_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let m = random_model(&mut rng);
            let tau = rng.gen_range(0.05..3.0);
            let cell = unit_cell(&m.conditional_hamiltonians(), &PulseSequence::ideal(tau, 1).unwrap()).unwrap();
            let pair = floquet_pair(&cell).unwrap();
            let o = pair.overlap[1][0].norm_sqr();
            assert!((envelope(&m, tau).unwrap().value - (1.0 - 2.0 * o)).abs() < 1e-8);
        }
    }

    #[test]
    fn crossing_uses_numeric_path() {
        // Collinear fields cross exactly at E(τ) = π.
        let m = TwoStateModel::from_xz(0.0, 1.0, 1.0).unwrap();
        let s = coherence_analytic(&m, PI / 2.0, 4).unwrap();
        assert!(s.numeric_fallback);
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_tau_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_model(&mut rng);
            let (wu, wd) = (m.omega_u(), m.omega_d());
            let eps0 = 0.5 * (wu * wu + wd * wd + 2.0 * wu * wd * m.cos_dtheta()).sqrt();
            let tau = 1e-6 / eps0;
            let slope = floquet_phase(&m, tau).unwrap() / tau;
            assert!((slope / (4.0 * eps0) - 1.0).abs() < 1e-4);
            assert!((coherence_analytic(&m, 1e-9, 10).unwrap().value - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn collinear_dip_positions() {
        let m = TwoStateModel::from_xz(0.0, 1.0, 3.0).unwrap();
        let (wu, wd) = (m.omega_u(), m.omega_d());
        let dips = dip_positions(&m, 10.0, 10).unwrap();
        assert!(!dips.is_empty());
        for (k, d) in dips.iter().enumerate() {
            let want = (2 * k + 1) as f64 * PI / (2.0 * (wu + wd));
            assert!((d.tau_dip / want - 1.0).abs() < 1e-9);
            assert_eq!(d.harmonic_index, k as u32 + 1);
            assert!(d.delta.abs() < 1e-7);
        }
    }

    #[test]
    fn dip_depth_matches_coherence() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let m = random_model(&mut rng);
            let dips = dip_positions(&m, 40.0, 10).unwrap();
            let Some(first) = dips.first() else { continue };
            let (delta, depth) = dip_depth(&m, first.tau_dip, 10).unwrap();
            assert!((delta - first.delta).abs() < 1e-12);
            let l = coherence_analytic(&m, first.tau_dip, 10).unwrap().value;
            assert!((l - depth).abs() < 1e-9);
        }
    }

    #[test]
    fn dip_depth_rejects_off_dip_tau() {
        let m = TwoStateModel::from_xz(0.5, 1.0, 0.2).unwrap();
        let d = dip_positions(&m, 20.0, 1).unwrap()[0];
        assert!(matches!(dip_depth(&m, d.tau_dip * 1.01, 1), Err(Error::Contract(_))));
    }

    #[test]
    fn average_hamiltonian_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let m = random_model(&mut rng);
            let a = avg_hamiltonian_dip(&m).unwrap();
            assert!((a.tau_bar * 4.0 * a.omega_av / PI - 1.0).abs() < 1e-12);
        }
        let m = TwoStateModel::from_xz(0.0, 1.0, 3.0).unwrap();
        let a = avg_hamiltonian_dip(&m).unwrap();
        assert!((a.tau_bar - PI / (2.0 * (m.omega_u() + m.omega_d()))).abs() < 1e-15);
        let anti = TwoStateModel::from_xz(0.0, 1.0, -1.0).unwrap();
        assert!(matches!(avg_hamiltonian_dip(&anti), Err(Error::Divergence(_))));
    }

    #[test]
    fn regimes() {
        let same = TwoStateModel::from_xz(0.3, 1.0, 1.0).unwrap();
        assert_eq!(regime_classify(&same), Regime::WeakCouplingI);
        let anti = TwoStateModel::new(PseudoField::new(0.3, 1.0).unwrap(), PseudoField::new(-0.3, -1.0).unwrap());
        assert_eq!(regime_classify(&anti), Regime::AntialignedII);
        let mid = TwoStateModel::from_xz(1.0, 1.0, 0.0).unwrap();
        assert_eq!(regime_classify(&mid), Regime::Intermediate);
    }

    #[test]
    fn diamond_boundary_ordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let m = random_model(&mut rng);
            let b = diamond_boundaries(&m).unwrap();
            if let Some(tm) = b.tau_minus {
                assert!(b.tau_plus < tm);
            }
        }
        let eq = TwoStateModel::from_xz(1.0, 2.0, -2.0).unwrap();
        assert!(diamond_boundaries(&eq).unwrap().tau_minus.is_none());
    }
}
