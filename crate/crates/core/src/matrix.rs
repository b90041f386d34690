//! Fixed-size complex matrices for one- and two-qubit operators.
//!
//! Everything here is a small value type wrapping a `nalgebra` static matrix.
//! The wrappers carry the unitarity / hermiticity contract so that the rest
//! of the crate never has to re-check it.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::ops::Mul;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

/// Tolerance applied when building unitaries from internal computations.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance applied to matrices coming from outside (JSON, user input).
pub const EXTERNAL_UNITARY_TOL: f64 = 1e-8;
pub const HERMITIAN_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn all_finite<'a>(entries: impl IntoIterator<Item = &'a C64>) -> bool {
    entries.into_iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Frobenius norm of `U U† − I`.
pub fn unitarity_defect4(m: &Mat4) -> f64 {
    (m * m.adjoint() - Mat4::identity()).norm()
}

pub fn unitarity_defect2(m: &Mat2) -> f64 {
    (m * m.adjoint() - Mat2::identity()).norm()
}

/// Wraps `arg` into (−π, π].
pub fn wrap_angle(arg: f64) -> f64 {
    let mut a = arg.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// The one-qubit Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::I => Mat2::identity(),
            Pauli::X => Mat2::new(ZERO, ONE, ONE, ZERO),
            Pauli::Y => Mat2::new(ZERO, -I, I, ZERO),
            Pauli::Z => Mat2::new(ONE, ZERO, ZERO, -ONE),
        }
    }

    pub fn unitary(self) -> Unitary2 {
        Unitary2(self.matrix())
    }

    /// `σα ⊗ σα`.
    pub fn pair(self) -> Unitary4 {
        kron(&self.unitary(), &self.unitary())
    }
}

#[derive(Clone, Copy, PartialEq)]
pub struct Unitary2(Mat2);

#[derive(Clone, Copy, PartialEq)]
pub struct Unitary4(Mat4);

#[derive(Clone, Copy, PartialEq)]
pub struct Hermitian4(Mat4);

impl Unitary2 {
    pub fn new(m: Mat2) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL)
    }

    pub fn with_tolerance(m: Mat2, tol: f64) -> Result<Self> {
        if !all_finite(m.iter()) {
            return Err(Error::NonFinite);
        }
        let deviation = unitarity_defect2(&m);
        if deviation > tol {
            return Err(Error::NotUnitary { deviation, tol });
        }
        Ok(Self(m))
    }

    /// Caller guarantees unitarity (products, exponentials of Hermitians, ...).
    pub(crate) fn new_unchecked(m: Mat2) -> Self {
        Self(m)
    }

    pub fn identity() -> Self {
        Self(Mat2::identity())
    }

    /// `e^{angle·(i/2)·σ}`, the rotation convention used by the circuits in
    /// this crate.
    pub fn rotation(axis: Pauli, angle: f64) -> Self {
        let (s, co) = (angle / 2.0).sin_cos();
        Self(Mat2::identity() * c(co, 0.0) + axis.matrix() * c(0.0, s))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn det(&self) -> C64 {
        self.0[(0, 0)] * self.0[(1, 1)] - self.0[(0, 1)] * self.0[(1, 0)]
    }

    pub fn scale(&self, phase: C64) -> Self {
        Self(self.0 * phase)
    }

    /// Splits `self = e^{iφ}·k` with `det k = 1` and φ = arg(det)/2.
    pub fn to_special(&self) -> (Self, f64) {
        let phase = self.det().arg() / 2.0;
        (self.scale(C64::from_polar(1.0, -phase)), phase)
    }
}

impl Unitary4 {
    pub fn new(m: Mat4) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL)
    }

    pub fn with_tolerance(m: Mat4, tol: f64) -> Result<Self> {
        if !all_finite(m.iter()) {
            return Err(Error::NonFinite);
        }
        let deviation = unitarity_defect4(&m);
        if deviation > tol {
            return Err(Error::NotUnitary { deviation, tol });
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: Mat4) -> Self {
        Self(m)
    }

    /// Builds a unitary from row-major entries; convenience for literals.
    pub fn from_rows(rows: [[C64; 4]; 4]) -> Result<Self> {
        Self::new(Mat4::from_fn(|r, col| rows[r][col]))
    }

    pub fn identity() -> Self {
        Self(Mat4::identity())
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn det(&self) -> C64 {
        self.0.determinant()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, phase: C64) -> Self {
        Self(self.0 * phase)
    }

    pub fn with_global_phase(&self, phi: f64) -> Self {
        self.scale(C64::from_polar(1.0, phi))
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect4(&self.0)
    }
}

impl Hermitian4 {
    pub fn new(m: Mat4) -> Result<Self> {
        if !all_finite(m.iter()) {
            return Err(Error::NonFinite);
        }
        let deviation = (m - m.adjoint()).norm();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation, tol: HERMITIAN_TOL });
        }
        // Symmetrize so the eigensolver sees an exactly Hermitian input.
        Ok(Self((m + m.adjoint()) * c(0.5, 0.0)))
    }

    /// `Σ coeffᵢ · σᵢ⊗σᵢ` over the given Pauli axes.
    pub fn pauli_pairs(terms: &[(f64, Pauli)]) -> Self {
        let m = terms
            .iter()
            .fold(Mat4::zeros(), |acc, &(w, p)| acc + p.pair().0 * c(w, 0.0));
        Self(m)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.0).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    /// `e^{i·H·t}` through the spectral decomposition of `H`.
    pub fn exp_i(&self, t: f64) -> Unitary4 {
        let eig = SymmetricEigen::new(self.0);
        let v = eig.eigenvectors;
        let phases = Mat4::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, e * t)));
        Unitary4(v * phases * v.adjoint())
    }
}

impl std::ops::Add for Hermitian4 {
    type Output = Hermitian4;
    fn add(self, rhs: Hermitian4) -> Hermitian4 {
        Hermitian4(self.0 + rhs.0)
    }
}

impl Mul for Unitary4 {
    type Output = Unitary4;
    fn mul(self, rhs: Unitary4) -> Unitary4 {
        Unitary4(self.0 * rhs.0)
    }
}

impl Mul<&Unitary4> for &Unitary4 {
    type Output = Unitary4;
    fn mul(self, rhs: &Unitary4) -> Unitary4 {
        Unitary4(self.0 * rhs.0)
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;
    fn mul(self, rhs: Unitary2) -> Unitary2 {
        Unitary2(self.0 * rhs.0)
    }
}

impl fmt::Debug for Unitary2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unitary2{}", self.0)
    }
}

impl fmt::Debug for Unitary4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unitary4{}", self.0)
    }
}

impl fmt::Debug for Hermitian4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian4{}", self.0)
    }
}

/// Kronecker product; `a` acts on the top wire (qubit 1).
pub fn kron(a: &Unitary2, b: &Unitary2) -> Unitary4 {
    Unitary4(kron_raw(&a.0, &b.0))
}

pub(crate) fn kron_raw(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// `e^{i·h·t}`.
pub fn exp_i_hermitian(h: &Hermitian4, t: f64) -> Unitary4 {
    h.exp_i(t)
}

/// Returns `(v, φ)` with `u = e^{iφ}·v`, `det v = 1` and φ = arg(det u)/4
/// taken in (−π/4, π/4].
pub fn special_unitarize(u: &Unitary4) -> (Unitary4, f64) {
    let mut phi = u.det().arg() / 4.0;
    // arg ∈ (−π, π] already gives φ ∈ (−π/4, π/4]; guard the closed end.
    if phi <= -FRAC_PI_4 {
        phi += PI / 2.0;
    }
    (u.scale(C64::from_polar(1.0, -phi)), phi)
}

fn optimal_phase(overlap: C64) -> C64 {
    if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    }
}

/// `min_φ ‖u − e^{iφ}v‖_F`, which equals `sqrt(8 − 2|tr(u†v)|)`.
///
/// Evaluated at the optimal phase `e^{iφ} = tr(v†u)/|tr(v†u)|` rather than
/// through the trace identity, whose cancellation bottoms out near 4e−8.
pub fn dist_up_to_phase(u: &Unitary4, v: &Unitary4) -> f64 {
    let phase = optimal_phase((v.0.adjoint() * u.0).trace());
    (u.0 - v.0 * phase).norm()
}

/// Same measure for one-qubit gates.
pub fn dist_up_to_phase2(u: &Unitary2, v: &Unitary2) -> f64 {
    let phase = optimal_phase((v.0.adjoint() * u.0).trace());
    (u.0 - v.0 * phase).norm()
}

/// Haar-distributed element of SU(4), reproducible from `seed`.
pub fn haar_random_su4(seed: u64) -> Unitary4 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    haar_random_su4_with(&mut rng)
}

pub fn haar_random_su4_with<R: rand::Rng + ?Sized>(rng: &mut R) -> Unitary4 {
    let z = Mat4::from_fn(|_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    // Fix the phases of R's diagonal so the distribution is exactly Haar.
    let fix = Mat4::from_diagonal(&r.diagonal().map(|d| {
        let n = d.norm();
        if n > 0.0 {
            d / n
        } else {
            ONE
        }
    }));
    special_unitarize(&Unitary4(q * fix)).0
}

/// Haar-distributed element of SU(2).
pub fn haar_random_su2_with<R: rand::Rng + ?Sized>(rng: &mut R) -> Unitary2 {
    // Uniform point on S³ gives a Haar SU(2) element.
    let v: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (a, b) = (c(v[0] / n, v[1] / n), c(v[2] / n, v[3] / n));
    Unitary2(Mat2::new(a, -b.conj(), b, a.conj()))
}

/// Random local gate `k_top ⊗ k_bottom` with Haar factors.
pub fn random_local_with<R: rand::Rng + ?Sized>(rng: &mut R) -> (Unitary2, Unitary2) {
    (haar_random_su2_with(rng), haar_random_su2_with(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_8;

    fn close4(a: &Mat4, b: &Mat4, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn kron_identity_and_pauli_products() {
        assert_eq!(kron(&Unitary2::identity(), &Unitary2::identity()), Unitary4::identity());

        let xx = Pauli::X.pair();
        let anti = Mat4::from_fn(|r, col| if r + col == 3 { ONE } else { ZERO });
        assert_eq!(*xx.matrix(), anti);

        let zz = Pauli::Z.pair();
        assert_eq!(
            *zz.matrix(),
            Mat4::from_diagonal(&nalgebra::Vector4::new(ONE, -ONE, -ONE, ONE))
        );
    }

    #[test]
    fn kron_top_wire_is_left_factor() {
        let xi = kron(&Pauli::X.unitary(), &Unitary2::identity());
        // |00⟩ -> |10⟩, i.e. basis index 0 -> 2.
        assert_eq!(xi.matrix()[(2, 0)], ONE);
        assert_eq!(xi.matrix()[(1, 0)], ZERO);
    }

    #[test]
    fn paulis_are_involutory_hermitian_traceless() {
        for p in Pauli::XYZ {
            let m = p.matrix();
            assert_eq!(m * m, Mat2::identity());
            assert_eq!(m, m.adjoint());
            assert_eq!(m.trace(), ZERO);
        }
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let h = Hermitian4::pauli_pairs(&[(0.3, Pauli::X), (-1.2, Pauli::Z)]);
        assert!(close4(h.exp_i(0.0).matrix(), &Mat4::identity(), 1e-14));
    }

    #[test]
    fn exp_zz_at_pi_is_minus_identity() {
        let h = Hermitian4::pauli_pairs(&[(1.0, Pauli::Z)]);
        assert!(close4(h.exp_i(PI).matrix(), &(-Mat4::identity()), 1e-12));
    }

    #[test]
    fn exp_of_involution_matches_closed_form() {
        let h = Hermitian4::pauli_pairs(&[(1.0, Pauli::X)]);
        let t = FRAC_PI_4;
        let expected = Mat4::identity() * c(t.cos(), 0.0) + Pauli::X.pair().matrix() * c(0.0, t.sin());
        let got = exp_i_hermitian(&h, t);
        assert!(close4(got.matrix(), &expected, 1e-12));
        assert!(got.unitarity_defect() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = Mat4::identity();
        m[(0, 1)] = ONE;
        assert!(matches!(Hermitian4::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Mat4::identity() * c(1.1, 0.0);
        assert!(matches!(Unitary4::new(m), Err(Error::NotUnitary { .. })));
        let mut nan = Mat4::identity();
        nan[(0, 0)] = c(f64::NAN, 0.0);
        assert!(matches!(Unitary4::new(nan), Err(Error::NonFinite)));
    }

    #[test]
    fn special_unitarize_examples() {
        let (v, phi) = special_unitarize(&Unitary4::identity());
        assert_eq!(phi, 0.0);
        assert!(close4(v.matrix(), &Mat4::identity(), 1e-15));

        let u = Unitary4::identity().with_global_phase(FRAC_PI_8);
        let (v, phi) = special_unitarize(&u);
        assert!((phi - FRAC_PI_8).abs() < 1e-14);
        assert!(close4(v.matrix(), &Mat4::identity(), 1e-14));
    }

    #[test]
    fn special_unitarize_branch_and_idempotence() {
        // det = −1 sits on the branch cut: φ must be +π/4, not −π/4.
        let swap = Unitary4::from_rows([
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ZERO, ONE, ZERO],
            [ZERO, ONE, ZERO, ZERO],
            [ZERO, ZERO, ZERO, ONE],
        ])
        .unwrap();
        let (v, phi) = special_unitarize(&swap);
        assert!((phi - FRAC_PI_4).abs() < 1e-14);
        assert!((v.det() - ONE).norm() < 1e-12);
        let (w, phi2) = special_unitarize(&v);
        assert!(phi2.abs() < 1e-14);
        assert!(close4(w.matrix(), v.matrix(), 1e-14));
    }

    #[test]
    fn dist_examples() {
        let u = haar_random_su4(3);
        assert!(dist_up_to_phase(&u, &u) < 1e-15);
        assert!(dist_up_to_phase(&u, &u.with_global_phase(2.1)) < 1e-14);
        // Agrees with the trace identity away from the cancellation regime.
        let v = haar_random_su4(4);
        let via_trace = (8.0 - 2.0 * (u.0.adjoint() * v.0).trace().norm()).sqrt();
        assert!((dist_up_to_phase(&u, &v) - via_trace).abs() < 1e-12);
        assert!((dist_up_to_phase(&u, &v) - dist_up_to_phase(&v, &u)).abs() < 1e-12);
        let cnot = Unitary4::from_rows([
            [ONE, ZERO, ZERO, ZERO],
            [ZERO, ONE, ZERO, ZERO],
            [ZERO, ZERO, ZERO, ONE],
            [ZERO, ZERO, ONE, ZERO],
        ])
        .unwrap();
        // tr CNOT = 2, so the distance is sqrt(8 − 4).
        let d = dist_up_to_phase(&Unitary4::identity(), &cnot);
        assert!((d - 2.0).abs() < 1e-12, "{d}");
    }

    #[test]
    fn haar_is_deterministic_and_special_unitary() {
        let a = haar_random_su4(42);
        let b = haar_random_su4(42);
        assert_eq!(a, b);
        assert!(a.unitarity_defect() < 1e-12);
        assert!((a.det() - ONE).norm() < 1e-12);
        assert_ne!(a, haar_random_su4(43));
    }

    #[test]
    fn haar_second_moment_of_trace() {
        // ∫ |tr U|² dU = 1 over the Haar measure.
        let n = 10_000;
        let mean = (0..n).map(|s| haar_random_su4(s).trace().norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn rotation_convention() {
        // e^{π(i/2)σx} = iσx
        let r = Unitary2::rotation(Pauli::X, PI);
        assert!((r.matrix() - Pauli::X.matrix() * I).norm() < 1e-15);
        assert!((r.det() - ONE).norm() < 1e-15);
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
