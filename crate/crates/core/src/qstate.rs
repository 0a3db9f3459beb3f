//! Two-level states, observables and evolution operators.
//!
//! Every matrix is expressed in the ordered basis `(|1⟩, |0⟩)`, i.e. spin-up
//! first. `σ_z = diag(+1, −1)` in this ordering.

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Mul;

use nalgebra::{Matrix2, Vector2, Vector3};
use num_complex::Complex64;

use crate::constants::{BLOCH_SLACK, EXACT_TOL};
use crate::error::{Error, Result};

pub type Mat2 = Matrix2<Complex64>;
pub type Ket = Vector2<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

fn max_abs(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn is_hermitian(m: &Mat2, tol: f64) -> bool {
    max_abs(&(m - m.adjoint())) <= tol
}

/// Eigenvalues of a Hermitian 2×2 matrix, ascending.
fn hermitian_eigenvalues(m: &Mat2) -> [f64; 2] {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
    [mean - radius, mean + radius]
}

/// Pure spin state, normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState(Ket);

impl PureState {
    /// Wraps amplitudes `(c_up, c_down)`; they must already be normalized.
    pub fn new(up: Complex64, down: Complex64) -> Result<Self> {
        let ket = Ket::new(up, down);
        let norm = ket.norm();
        if (norm - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidValue {
                what: "amplitude vector",
                kind: "pure state",
                reason: format!("norm {norm} differs from 1"),
            });
        }
        Ok(Self(ket))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(ket: Ket) -> Self {
        Self(ket / Complex64::from(ket.norm()))
    }

    /// `|1⟩`, spin-up along z.
    pub fn up() -> Self {
        Self(Ket::new(ONE, ZERO))
    }

    /// `|0⟩`, spin-down along z.
    pub fn down() -> Self {
        Self(Ket::new(ZERO, ONE))
    }

    /// Spin-up state along the unit direction `n`: `σ·n |n⟩ = +|n⟩`.
    pub fn along(n: &Vector3<f64>) -> Self {
        let n = n.normalize();
        let theta = n.z.clamp(-1.0, 1.0).acos();
        let phi = n.y.atan2(n.x);
        let (s, c) = (0.5 * theta).sin_cos();
        Self(Ket::new(Complex64::from(c), Complex64::from_polar(s, phi)))
    }

    pub fn amplitudes(&self) -> &Ket {
        &self.0
    }

    pub fn up_amplitude(&self) -> Complex64 {
        self.0[0]
    }

    pub fn down_amplitude(&self) -> Complex64 {
        self.0[1]
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix(self.0 * self.0.adjoint())
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// Density operator of the conduction-electron spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity at 1e-12.
    pub fn new(entries: Mat2) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidValue {
            what: "matrix",
            kind: "density matrix",
            reason,
        };
        if !is_hermitian(&entries, EXACT_TOL) {
            return Err(invalid("not Hermitian".into()));
        }
        let tr = entries.trace();
        if (tr - ONE).norm() > EXACT_TOL {
            return Err(invalid(format!("trace {tr} differs from 1")));
        }
        let [lo, _] = hermitian_eigenvalues(&entries);
        if lo < -EXACT_TOL {
            return Err(invalid(format!("negative eigenvalue {lo}")));
        }
        Ok(Self(entries))
    }

    pub fn maximally_mixed() -> Self {
        Self(Mat2::identity() * Complex64::from(0.5))
    }

    pub fn entries(&self) -> &Mat2 {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.0)
    }

    /// `Tr ρ²`; 1 for pure states.
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        max_abs(&(self.0 - other.0))
    }
}

/// Unitary evolution operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2(Mat2);

impl Unitary2 {
    /// Validates `U†U = 1` at 1e-12 elementwise.
    pub fn new(entries: Mat2) -> Result<Self> {
        let defect = max_abs(&(entries.adjoint() * entries - Mat2::identity()));
        if defect > EXACT_TOL {
            return Err(Error::InvalidValue {
                what: "matrix",
                kind: "unitary",
                reason: format!("|U^dag U - 1| = {defect:.3e}"),
            });
        }
        Ok(Self(entries))
    }

    pub(crate) fn from_matrix_unchecked(entries: Mat2) -> Self {
        Self(entries)
    }

    pub fn identity() -> Self {
        Self(Mat2::identity())
    }

    /// `exp(−i φ/2 σ·n)`: rotation by `angle` about the unit axis `n`.
    pub fn rotation(axis: &Vector3<f64>, angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        let n = axis;
        let m = Mat2::new(
            Complex64::new(c, -s * n.z),
            Complex64::new(-s * n.y, -s * n.x),
            Complex64::new(s * n.y, -s * n.x),
            Complex64::new(c, s * n.z),
        );
        Self(m)
    }

    pub fn entries(&self) -> &Mat2 {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn determinant(&self) -> Complex64 {
        self.0.determinant()
    }

    pub fn apply(&self, psi: &PureState) -> PureState {
        PureState(self.0 * psi.0)
    }

    /// Largest elementwise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        max_abs(&(self.0.adjoint() * self.0 - Mat2::identity()))
    }

    pub fn max_abs_diff(&self, other: &Unitary2) -> f64 {
        max_abs(&(self.0 - other.0))
    }

    /// Matrix element `⟨a|U|b⟩`.
    pub fn element(&self, a: &PureState, b: &PureState) -> Complex64 {
        a.0.dotc(&(self.0 * b.0))
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        Unitary2(self.0 * rhs.0)
    }
}

impl Mul<&Unitary2> for &Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: &Unitary2) -> Unitary2 {
        Unitary2(self.0 * rhs.0)
    }
}

/// Hermitian spin observable or Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOperator(Mat2);

impl SpinOperator {
    pub fn new(entries: Mat2) -> Result<Self> {
        if !is_hermitian(&entries, EXACT_TOL) {
            return Err(Error::InvalidValue {
                what: "matrix",
                kind: "spin operator",
                reason: "not Hermitian".into(),
            });
        }
        Ok(Self(entries))
    }

    pub fn zero() -> Self {
        Self(Mat2::zeros())
    }

    pub fn identity() -> Self {
        Self(Mat2::identity())
    }

    pub fn sigma_x() -> Self {
        Self(Mat2::new(ZERO, ONE, ONE, ZERO))
    }

    pub fn sigma_y() -> Self {
        Self(Mat2::new(ZERO, -I, I, ZERO))
    }

    pub fn sigma_z() -> Self {
        Self(Mat2::new(ONE, ZERO, ZERO, -ONE))
    }

    /// `σ·v` for a real 3-vector (not necessarily unit).
    pub fn sigma_dot(v: &Vector3<f64>) -> Self {
        Self(Mat2::new(
            Complex64::from(v.z),
            Complex64::new(v.x, -v.y),
            Complex64::new(v.x, v.y),
            Complex64::from(-v.z),
        ))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0 * Complex64::from(factor))
    }

    pub fn entries(&self) -> &Mat2 {
        &self.0
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        hermitian_eigenvalues(&self.0)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation_pure(&self, psi: &PureState) -> f64 {
        psi.0.dotc(&(self.0 * psi.0)).re
    }

    pub fn apply(&self, psi: &PureState) -> Ket {
        self.0 * psi.0
    }

    /// Reinterprets a Hermitian operator that is also unitary (e.g. a Pauli
    /// matrix) as an evolution operator.
    pub fn as_unitary(&self) -> Result<Unitary2> {
        Unitary2::new(self.0)
    }
}

/// Real 3-vector of Pauli expectation values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(pub Vector3<f64>);

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// `ρ_i = w0 |0⟩⟨0| + w1 |1⟩⟨1|`, i.e. `diag(w1, w0)`.
pub fn mixed_initial(w0: f64, w1: f64) -> Result<DensityMatrix> {
    check_weights(w0, w1, EXACT_TOL)?;
    Ok(DensityMatrix(Mat2::new(
        Complex64::from(w1),
        ZERO,
        ZERO,
        Complex64::from(w0),
    )))
}

pub(crate) fn check_weights(w0: f64, w1: f64, tol: f64) -> Result<()> {
    let ok = w0.is_finite() && w1.is_finite() && w0 >= 0.0 && w1 >= 0.0;
    if !ok || (w0 + w1 - 1.0).abs() > tol {
        return Err(Error::WeightDomain { w0, w1 });
    }
    Ok(())
}

/// `U ρ U†`.
pub fn evolve(rho: &DensityMatrix, u: &Unitary2) -> DensityMatrix {
    DensityMatrix(u.0 * rho.0 * u.0.adjoint())
}

/// Eigenstates `(|+⟩, |−⟩)` of `σ_y`.
///
/// The phases satisfy `|0⟩ = (−i/√2)(|+⟩ − |−⟩)` and
/// `|1⟩ = (1/√2)(|+⟩ + |−⟩)`, which fixes `|±⟩ = (|1⟩ ± i|0⟩)/√2`.
pub fn sigma_y_eigenstates() -> (PureState, PureState) {
    let h = Complex64::from(FRAC_1_SQRT_2);
    let plus = PureState(Ket::new(h, I * h));
    let minus = PureState(Ket::new(h, -I * h));
    (plus, minus)
}

/// `Tr(op · ρ)`.
pub fn expectation(op: &SpinOperator, rho: &DensityMatrix) -> f64 {
    (op.0 * rho.0).trace().re
}

pub fn to_bloch(rho: &DensityMatrix) -> BlochVector {
    BlochVector::new(
        expectation(&SpinOperator::sigma_x(), rho),
        expectation(&SpinOperator::sigma_y(), rho),
        expectation(&SpinOperator::sigma_z(), rho),
    )
}

/// `ρ = (1 + r·σ)/2`.
pub fn from_bloch(r: &BlochVector) -> Result<DensityMatrix> {
    let norm = r.norm();
    if !norm.is_finite() || norm > 1.0 + BLOCH_SLACK {
        return Err(Error::BlochOutOfRange { norm });
    }
    let m = (Mat2::identity() + SpinOperator::sigma_dot(&r.0).0) * Complex64::from(0.5);
    Ok(DensityMatrix(m))
}
