//! Local invariants of two-qubit gates.
//!
//! Two gates are equal up to single-qubit operations on either side exactly
//! when their invariant triples agree. All triples here are built from the
//! magic-basis Gram matrix `m = (Q†VQ)ᵀ(Q†VQ)` of the special-unitary
//! representative `V`.
//!
//! Two normalizations appear:
//!
//! * [`LocalInvariants`]: `g1 + i·g2 = tr²(m)/4`, `g3 = tr²(m) − tr(m²)`.
//!   Insensitive to global phase, so this is what equivalence tests use.
//! * [`TraceInvariants`]: `g1 + i·g2 = tr(m)`, same `g3`. This is the form
//!   in which the closed-form expressions for the synthesis circuit and the
//!   Josephson evolution are written. `tr(m)` flips sign when `V` is
//!   multiplied by `i`, so it is only meaningful for a fixed determinant
//!   branch.
//!
//! Both give CNOT → (0, 0, 4), B → (0, 0, 0) and identity → (4, 0, 12).

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c, special_unitarize, Mat4, Unitary4, C64, ZERO};
use crate::weyl::WeylPoint;

/// Bound on `|Im(tr²m − tr m²)|` before the computation is declared broken.
pub const G3_IMAG_TOL: f64 = 1e-8;

/// The magic basis: columns `|Φ+⟩`, `i|Ψ+⟩`, `|Ψ−⟩`, `i|Φ−⟩`.
///
/// Conjugation by this matrix maps SU(2)⊗SU(2) onto SO(4).
pub fn magic_basis() -> &'static Unitary4 {
    static Q: OnceLock<Unitary4> = OnceLock::new();
    Q.get_or_init(|| {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (r, i) = (c(h, 0.0), c(0.0, h));
        Unitary4::new_unchecked(Mat4::new(
            r, ZERO, ZERO, i, //
            ZERO, i, r, ZERO, //
            ZERO, i, -r, ZERO, //
            r, ZERO, ZERO, -i,
        ))
    })
}

/// `Q† u Q`.
pub fn to_magic(u: &Unitary4) -> Mat4 {
    let q = magic_basis().matrix();
    q.adjoint() * u.matrix() * q
}

/// `Q m Q†`.
pub fn from_magic(m: &Mat4) -> Mat4 {
    let q = magic_basis().matrix();
    q * m * q.adjoint()
}

/// Complex-symmetric unitary `(Q†VQ)ᵀ(Q†VQ)` of the special-unitary
/// representative `V` of a gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagicGram(Mat4);

impl MagicGram {
    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn trace_of_square(&self) -> C64 {
        (self.0 * self.0).trace()
    }

    pub fn asymmetry(&self) -> f64 {
        (self.0 - self.0.transpose()).norm()
    }
}

pub fn magic_gram(u: &Unitary4) -> MagicGram {
    let (v, _) = special_unitarize(u);
    let up = to_magic(&v);
    MagicGram(up.transpose() * up)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalInvariants {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

impl LocalInvariants {
    pub const fn new(g1: f64, g2: f64, g3: f64) -> Self {
        Self { g1, g2, g3 }
    }

    pub const CNOT: Self = Self::new(0.0, 0.0, 4.0);
    pub const B: Self = Self::new(0.0, 0.0, 0.0);
    pub const IDENTITY: Self = Self::new(4.0, 0.0, 12.0);
    pub const SWAP: Self = Self::new(-4.0, 0.0, -12.0);

    pub fn as_array(&self) -> [f64; 3] {
        [self.g1, self.g2, self.g3]
    }

    /// Largest componentwise difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        (self.g1 - other.g1)
            .abs()
            .max((self.g2 - other.g2).abs())
            .max((self.g3 - other.g3).abs())
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_diff(other) <= tol
    }
}

/// Trace-normalized triple; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceInvariants {
    /// `Re tr m`
    pub g1: f64,
    /// `Im tr m`
    pub g2: f64,
    pub g3: f64,
}

impl TraceInvariants {
    pub const fn new(g1: f64, g2: f64, g3: f64) -> Self {
        Self { g1, g2, g3 }
    }

    pub fn to_local(&self) -> LocalInvariants {
        let tr = c(self.g1, self.g2);
        let sq = tr * tr / 4.0;
        LocalInvariants::new(sq.re, sq.im, self.g3)
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        (self.g1 - other.g1)
            .abs()
            .max((self.g2 - other.g2).abs())
            .max((self.g3 - other.g3).abs())
    }
}

fn g3_of(m: &MagicGram) -> Result<f64> {
    let tr = m.trace();
    let g3 = tr * tr - m.trace_of_square();
    if g3.im.abs() >= G3_IMAG_TOL {
        return Err(Error::ConventionViolation(g3.im));
    }
    Ok(g3.re)
}

pub fn local_invariants(u: &Unitary4) -> Result<LocalInvariants> {
    let m = magic_gram(u);
    let tr = m.trace();
    let sq = tr * tr / 4.0;
    Ok(LocalInvariants::new(sq.re, sq.im, g3_of(&m)?))
}

/// Trace-normalized invariants of `u` on the determinant branch chosen by
/// [`special_unitarize`]. For `u` already in SU(4) (det within rounding of
/// 1) this is the branch with `V = u`.
pub fn trace_invariants(u: &Unitary4) -> Result<TraceInvariants> {
    let m = magic_gram(u);
    let tr = m.trace();
    Ok(TraceInvariants::new(tr.re, tr.im, g3_of(&m)?))
}

/// Trace-normalized invariants of the canonical gate at `c`:
/// `tr m = 4(cos c1 cos c2 cos c3 + i sin c1 sin c2 sin c3)`.
pub fn trace_invariants_from_weyl(p: &WeylPoint) -> TraceInvariants {
    let [c1, c2, c3] = p.coords();
    let cp = c1.cos() * c2.cos() * c3.cos();
    let sp = c1.sin() * c2.sin() * c3.sin();
    let cp2 = (2.0 * c1).cos() * (2.0 * c2).cos() * (2.0 * c3).cos();
    TraceInvariants::new(4.0 * cp, 4.0 * sp, 16.0 * (cp * cp - sp * sp) - 4.0 * cp2)
}

/// Closed form of [`local_invariants`] for the canonical gate at `c`.
pub fn invariants_from_weyl(p: &WeylPoint) -> LocalInvariants {
    let [c1, c2, c3] = p.coords();
    let cos2 = (c1.cos() * c2.cos() * c3.cos()).powi(2);
    let sin2 = (c1.sin() * c2.sin() * c3.sin()).powi(2);
    let cos_2c = (2.0 * c1).cos() * (2.0 * c2).cos() * (2.0 * c3).cos();
    LocalInvariants::new(
        4.0 * (cos2 - sin2),
        (2.0 * c1).sin() * (2.0 * c2).sin() * (2.0 * c3).sin(),
        4.0 * (4.0 * cos2 - 4.0 * sin2 - cos_2c),
    )
}

/// The printed invariants of the two-B circuit with top-wire angle `c1` and
/// bottom z-y-z angles `(β2, β1, β2)`, evaluated literally. These are in the
/// trace normalization.
pub fn middle_circuit_invariants(c1: f64, beta1: f64, beta2: f64) -> TraceInvariants {
    let (cb1, cb2) = (beta1.cos(), beta2.cos());
    let g1 = 4.0 * c1.cos() * (beta1 / 2.0).cos().powi(2) * beta2.sin().powi(2);
    let g2 = 4.0 * c1.sin() * beta1.sin() * cb2;
    let g3 = 2.0
        * (cb2.powi(4) * (cb1 + 1.0).powi(2)
            + 2.0 * cb2.powi(2) * (cb1 * cb1 - 2.0 * cb1 - 3.0)
            + 4.0 * c1.cos().powi(2)
            + cb1 * cb1
            + 2.0 * cb1
            - 1.0);
    TraceInvariants::new(g1, g2, g3)
}

/// Whether `u` and `v` agree in all three local invariants within `tol`.
pub fn locally_equivalent(u: &Unitary4, v: &Unitary4, tol: f64) -> bool {
    match (local_invariants(u), local_invariants(v)) {
        (Ok(a), Ok(b)) => a.approx_eq(&b, tol),
        _ => false,
    }
}
