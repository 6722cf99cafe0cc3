//! Dense complex linear algebra for the small Hilbert spaces used here.
//!
//! Matrices are square, row-major and owned. Hermitian eigenproblems are
//! solved by cyclic Jacobi rotations; unitary eigenproblems are reduced to a
//! sequence of Hermitian ones (see [`eig_unitary`]).

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Largest matrix dimension any constructor in this crate will produce.
pub const MAX_DIM: usize = 2048;

/// Elementwise tolerance used for the Hermitian check, relative to the
/// largest entry (absolute for matrices with entries below one).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `max |U U^† - I|` accepted by [`eig_unitary`].
pub const UNITARY_TOL: f64 = 1e-10;
/// Phases closer than this are treated as one degenerate level.
pub const DEGENERACY_TOL: f64 = 1e-9;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max |M - M^dag| = {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not unitary (max |U U^dag - I| = {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension {dim} exceeds the configured maximum {max}")]
    Capacity { dim: usize, max: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("evolution time must be finite and non-negative, got {0}")]
    InvalidTime(f64),
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4e}{:+.4e}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            dim,
            data: vec![C0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C1;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics unless `data.len()` is a
    /// perfect square.
    pub fn from_row_major(data: Vec<Complex64>) -> Self {
        let dim = (data.len() as f64).sqrt().round() as usize;
        assert_eq!(dim * dim, data.len(), "row-major data is not square");
        assert!(dim >= 1);
        Self { dim, data }
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        Self {
            dim,
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |M - M^dag|` elementwise.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |U U^dag - I|` elementwise.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self * &self.adjoint();
        p.max_abs_diff(&Self::identity(self.dim))
    }

    pub fn check_hermitian(&self) -> Result<(), LinalgError> {
        if !self.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let defect = self.hermitian_defect();
        if defect > HERMITIAN_TOL * self.max_abs().max(1.0) {
            return Err(LinalgError::NotHermitian { defect });
        }
        Ok(())
    }

    /// Averages the matrix with its adjoint.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                let row = &self.data[i * self.dim..(i + 1) * self.dim];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn from_columns(cols: &[Vec<Complex64>]) -> Self {
        let dim = cols.len();
        let mut m = Self::zeros(dim);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), dim);
            for (i, &z) in c.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        m
    }

    /// Restriction `P^dag M P` to the span of the given orthonormal columns.
    pub fn project(&self, basis: &[Vec<Complex64>]) -> Self {
        let k = basis.len();
        let images: Vec<Vec<Complex64>> = basis.iter().map(|b| self.apply(b)).collect();
        Self::from_fn(k, |i, j| inner(&basis[i], &images[j]))
    }

    /// Integer power by binary exponentiation. When the running product
    /// drifts from unitarity by more than `1e-12` (checked every 32
    /// squarings and at the end) it is pulled back with a Newton-Schulz
    /// polar step.
    pub fn unitary_power(&self, n: u64) -> Self {
        let mut result = Self::identity(self.dim);
        let mut base = self.clone();
        let mut e = n;
        let mut squarings = 0u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
                squarings += 1;
                if squarings.is_multiple_of(32) {
                    base = base.reunitarize();
                }
            }
        }
        result.reunitarize()
    }

    fn reunitarize(self) -> Self {
        let mut u = self;
        for _ in 0..3 {
            if u.unitarity_defect() <= 1e-12 {
                break;
            }
            // U <- U (3 I - U^dag U) / 2
            let g = &u.adjoint() * &u;
            let corr = &Self::identity(u.dim).scale_real(3.0) - &g;
            u = (&u * &corr).scale_real(0.5);
        }
        u
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = vec![C0; n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C0 {
                    continue;
                }
                let brow = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix { dim: n, data: out }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `<a|b>` with the first argument conjugated.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Kronecker product, `(A ⊗ B)[(i*dB + k), (j*dB + l)] = A[i,j] B[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    kron_with_limit(a, b, MAX_DIM)
}

pub fn kron_with_limit(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    max_dim: usize,
) -> Result<ComplexMatrix, LinalgError> {
    let dim = a
        .dim
        .checked_mul(b.dim)
        .ok_or(LinalgError::Capacity { dim: usize::MAX, max: max_dim })?;
    if dim > max_dim {
        return Err(LinalgError::Capacity { dim, max: max_dim });
    }
    let db = b.dim;
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..a.dim {
        for j in 0..a.dim {
            let aij = a[(i, j)];
            if aij == C0 {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    m[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(m)
}

/// Pauli matrices.
pub fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn sigma_y() -> ComplexMatrix {
    ComplexMatrix::from_row_major(vec![C0, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), C0])
}

pub fn sigma_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0])
}

/// Angular momentum operators `(J_z, J_+, J_-)` for spin `j` in the
/// `|j, m>` basis ordered `m = j, j-1, ..., -j`.
pub fn spin_operators(j: f64) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let dim = (2.0 * j).round() as usize + 1;
    let m = |k: usize| j - k as f64;
    let jz = ComplexMatrix::from_fn(dim, |a, b| {
        if a == b {
            Complex64::new(m(a), 0.0)
        } else {
            C0
        }
    });
    // J_+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>; row index a has m(a) = m(b) + 1.
    let jp = ComplexMatrix::from_fn(dim, |a, b| {
        if b == a + 1 {
            let mb = m(b);
            Complex64::new((j * (j + 1.0) - mb * (mb + 1.0)).sqrt(), 0.0)
        } else {
            C0
        }
    });
    let jm = jp.adjoint();
    (jz, jp, jm)
}

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// the matching orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Cyclic Jacobi diagonalization.
pub fn eigh(h: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    h.check_hermitian()?;
    Ok(jacobi_eigh(&h.hermitian_part()))
}

fn jacobi_eigh(h: &ComplexMatrix) -> HermitianEigen {
    let n = h.dim;
    let mut a = h.clone();
    let mut v = ComplexMatrix::identity(n);
    if n > 1 {
        let frob: f64 = a.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut prev_off = f64::INFINITY;
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            // Stop once converged to rounding or when a sweep no longer helps.
            if off.sqrt() <= 1e-17 * frob || off == 0.0 || (off >= prev_off && off.sqrt() <= 1e-13 * frob) {
                break;
            }
            prev_off = off;
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    HermitianEigen {
        values: order.iter().map(|&i| diag[i]).collect(),
        vectors: order.iter().map(|&i| v.column(i)).collect(),
    }
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let n = a.dim;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / r; // e^{i phi}
    let zeta = (aqq - app) / (2.0 * r);
    let t = if zeta >= 0.0 {
        1.0 / (zeta + (zeta * zeta + 1.0).sqrt())
    } else {
        -1.0 / (-zeta + (zeta * zeta + 1.0).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let pc = phase.conj(); // e^{-i phi}
    // G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] acting on the (p, q) plane.
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * pc * s;
        a[(k, q)] = akp * s + akq * pc * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * s + aqk * phase * c;
    }
    a[(p, q)] = C0;
    a[(q, p)] = C0;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * pc * s;
        v[(k, q)] = vkp * s + vkq * pc * c;
    }
}

/// One-period (or any) propagator together with the time it spans.
#[derive(Clone, Debug)]
pub struct UnitaryPropagator {
    pub matrix: ComplexMatrix,
    pub duration: f64,
}

impl UnitaryPropagator {
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            duration: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `self` applied after `first`: the product `self * first`.
    pub fn after(&self, first: &UnitaryPropagator) -> UnitaryPropagator {
        UnitaryPropagator {
            matrix: &self.matrix * &first.matrix,
            duration: self.duration + first.duration,
        }
    }
}

/// `exp(-i H t)` through the Hermitian eigendecomposition of `H`.
pub fn expm_hermitian(h: &ComplexMatrix, t: f64) -> Result<UnitaryPropagator, LinalgError> {
    if !t.is_finite() || t < 0.0 {
        return Err(LinalgError::InvalidTime(t));
    }
    h.check_hermitian()?;
    if t == 0.0 {
        return Ok(UnitaryPropagator::identity(h.dim()));
    }
    let eig = jacobi_eigh(&h.hermitian_part());
    Ok(UnitaryPropagator {
        matrix: propagator_from_eigen(&eig, t),
        duration: t,
    })
}

/// `exp(-i H t)` for an already diagonalized `H`.
pub fn propagator_from_eigen(eig: &HermitianEigen, t: f64) -> ComplexMatrix {
    let n = eig.values.len();
    let phases: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&e| Complex64::from_polar(1.0, -e * t))
        .collect();
    let mut u = ComplexMatrix::zeros(n);
    for (l, vec) in eig.vectors.iter().enumerate() {
        let ph = phases[l];
        for i in 0..n {
            let vi = vec[i] * ph;
            if vi == C0 {
                continue;
            }
            for j in 0..n {
                u[(i, j)] += vi * vec[j].conj();
            }
        }
    }
    u
}

/// Floquet phases and modes of a unitary: `U |Φ_l> = exp(-i E_l) |Φ_l>`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Ascending, each in `(-π, π]`.
    pub phases: Vec<f64>,
    pub modes: Vec<Vec<Complex64>>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    /// `Φ diag(e^{-iE}) Φ^dag`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let eig = HermitianEigen {
            values: self.phases.clone(),
            vectors: self.modes.clone(),
        };
        propagator_from_eigen(&eig, 1.0)
    }
}

/// Maps a phase onto `(-π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Distance between two phases on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

// Rotation angles for the Hermitian combinations Re(e^{-iα} U); chosen
// incommensurate so that accidental coincidences at one level are lifted at
// the next.
const MIXING_ANGLES: [f64; 4] = [0.618_033_988_749_895, 2.236_067_977_499_79, 1.324_717_957_244_746, std::f64::consts::E];
const CLUSTER_GAP: f64 = 1e-5;

/// Eigen-decomposition of a unitary matrix.
///
/// The eigenvectors of a unitary `U` are those of every Hermitian
/// combination `Re(e^{-iα} U) = (e^{-iα} U + e^{iα} U^dag)/2`, whose
/// eigenvalues are `cos(E + α)`. Near-coincident eigenvalues of that
/// combination are re-split inside their subspace with a different `α`;
/// phases are then read off the Rayleigh quotients `<Φ|U|Φ>`.
pub fn eig_unitary(u: &UnitaryPropagator) -> Result<EigenSystem, LinalgError> {
    eig_unitary_matrix(&u.matrix)
}

pub fn eig_unitary_matrix(u: &ComplexMatrix) -> Result<EigenSystem, LinalgError> {
    if !u.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(LinalgError::NotUnitary { defect });
    }
    let n = u.dim();
    let basis: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut e = vec![C0; n];
            e[i] = C1;
            e
        })
        .collect();
    let mut modes = Vec::with_capacity(n);
    split_invariant_subspace(u, &basis, 0, &mut modes);

    let mut pairs: Vec<(f64, Vec<Complex64>)> = modes
        .into_iter()
        .map(|m| {
            let lambda = inner(&m, &u.apply(&m));
            let mut e = -lambda.arg();
            if e <= -PI {
                e += 2.0 * PI;
            }
            (e, m)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (phases, modes) = pairs.into_iter().unzip();
    Ok(EigenSystem { phases, modes })
}

fn split_invariant_subspace(
    u: &ComplexMatrix,
    basis: &[Vec<Complex64>],
    level: usize,
    out: &mut Vec<Vec<Complex64>>,
) {
    let k = basis.len();
    if k == 1 || level >= MIXING_ANGLES.len() {
        out.extend(basis.iter().cloned());
        return;
    }
    let restricted = u.project(basis);
    let rot = Complex64::from_polar(1.0, -MIXING_ANGLES[level]);
    let mixed = ComplexMatrix::from_fn(k, |i, j| {
        (restricted[(i, j)] * rot + restricted[(j, i)].conj() * rot.conj()) * 0.5
    });
    let eig = jacobi_eigh(&mixed);
    // Lift the small eigenvectors back into the full space.
    let lifted: Vec<Vec<Complex64>> = eig
        .vectors
        .iter()
        .map(|c| {
            let mut v = vec![C0; u.dim()];
            for (coef, b) in c.iter().zip(basis) {
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi += coef * bi;
                }
            }
            v
        })
        .collect();
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && eig.values[end] - eig.values[end - 1] < CLUSTER_GAP {
            end += 1;
        }
        if end - start == 1 {
            out.push(lifted[start].clone());
        } else {
            split_invariant_subspace(u, &lifted[start..end], level + 1, out);
        }
        start = end;
    }
}
