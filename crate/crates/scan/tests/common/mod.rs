#![allow(dead_code)]

use floquet_dd::floquet::ConditionalHamiltonians;
use floquet_dd::pseudospin::TwoStateModel;
use floquet_dd::ComplexMatrix;
use num_complex::Complex64;
use rand::Rng;

/// Hermitian matrix with entries of order `scale`.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> ComplexMatrix {
    let raw = ComplexMatrix::from_fn(dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
    });
    raw.hermitian_part()
}

pub fn random_conditional<R: Rng>(rng: &mut R, dim: usize) -> ConditionalHamiltonians {
    let h_u = random_hermitian(rng, dim, 1.0);
    let h_d = random_hermitian(rng, dim, 1.0);
    ConditionalHamiltonians::new(h_u, h_d).unwrap()
}

/// Pseudofields with components in `[-2, 2]` and a transverse part bounded
/// away from zero.
pub fn random_two_state<R: Rng>(rng: &mut R) -> TwoStateModel {
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    TwoStateModel::from_xz(
        sign * rng.gen_range(0.1..2.0),
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
    )
    .unwrap()
}

/// `ε0 = ½ |ω_u e_u + ω_d e_d|`: small-τ slope of the cell phase is `4 ε0`.
pub fn epsilon0(m: &TwoStateModel) -> f64 {
    let (wu, wd) = (m.omega_u(), m.omega_d());
    0.5 * (wu * wu + wd * wd + 2.0 * wu * wd * m.cos_dtheta()).sqrt()
}

/// Golden-section minimization of `f` on `[a, b]`.
pub fn golden_min(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (a.abs() + b.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
