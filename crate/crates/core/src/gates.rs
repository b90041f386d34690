//! Standard two-qubit gates and the named points of the Weyl chamber.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::matrix::{kron_raw, Mat2, Mat4, Unitary2, Unitary4, ONE, ZERO};
use crate::weyl::{canonical_gate, WeylPoint};

/// Which wire a single-qubit gate or a control acts on. `Top` is qubit 1,
/// the left Kronecker factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wire {
    Top,
    Bottom,
}

impl Wire {
    pub fn other(self) -> Wire {
        match self {
            Wire::Top => Wire::Bottom,
            Wire::Bottom => Wire::Top,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Wire::Top => "top",
            Wire::Bottom => "bottom",
        }
    }
}

/// `u` on `wire`, identity on the other one.
pub fn on_wire(wire: Wire, u: &Unitary2) -> Unitary4 {
    let id = Mat2::identity();
    let m = match wire {
        Wire::Top => kron_raw(u.matrix(), &id),
        Wire::Bottom => kron_raw(&id, u.matrix()),
    };
    Unitary4::new_unchecked(m)
}

/// Controlled-`u`: applies `u` to the other wire when `control` is |1⟩.
pub fn controlled(control: Wire, u: &Unitary2) -> Unitary4 {
    let p0 = Mat2::new(ONE, ZERO, ZERO, ZERO);
    let p1 = Mat2::new(ZERO, ZERO, ZERO, ONE);
    let id = Mat2::identity();
    let m = match control {
        Wire::Top => kron_raw(&p0, &id) + kron_raw(&p1, u.matrix()),
        Wire::Bottom => kron_raw(&id, &p0) + kron_raw(u.matrix(), &p1),
    };
    Unitary4::new_unchecked(m)
}

/// CNOT with the control on the top wire.
pub fn cnot() -> Unitary4 {
    controlled(Wire::Top, &crate::matrix::Pauli::X.unitary())
}

pub fn swap() -> Unitary4 {
    Unitary4::new_unchecked(Mat4::new(
        ONE, ZERO, ZERO, ZERO, //
        ZERO, ZERO, ONE, ZERO, //
        ZERO, ONE, ZERO, ZERO, //
        ZERO, ZERO, ZERO, ONE,
    ))
}

/// Two CNOTs with alternating controls (top first).
pub fn dcnot() -> Unitary4 {
    controlled(Wire::Bottom, &crate::matrix::Pauli::X.unitary()) * cnot()
}

/// `B = e^{(π/2)(i/2)σxσx} · e^{(π/4)(i/2)σyσy}`.
pub fn b_gate() -> Unitary4 {
    canonical_gate(&NamedGate::B.point())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedGate {
    /// Point O, the identity.
    O,
    /// Point A1, `e^{π(i/2)σxσx}`; local, like O.
    A1,
    /// Point L.
    Cnot,
    /// Point A2.
    Dcnot,
    /// Point A3.
    Swap,
    B,
}

impl NamedGate {
    pub const ALL: [NamedGate; 6] = [
        NamedGate::O,
        NamedGate::A1,
        NamedGate::Cnot,
        NamedGate::Dcnot,
        NamedGate::Swap,
        NamedGate::B,
    ];

    pub fn point(self) -> WeylPoint {
        match self {
            NamedGate::O => WeylPoint::new(0.0, 0.0, 0.0),
            NamedGate::A1 => WeylPoint::new(PI, 0.0, 0.0),
            NamedGate::Cnot => WeylPoint::new(FRAC_PI_2, 0.0, 0.0),
            NamedGate::Dcnot => WeylPoint::new(FRAC_PI_2, FRAC_PI_2, 0.0),
            NamedGate::Swap => WeylPoint::new(FRAC_PI_2, FRAC_PI_2, FRAC_PI_2),
            NamedGate::B => WeylPoint::new(FRAC_PI_2, FRAC_PI_4, 0.0),
        }
    }

    pub fn matrix(self) -> Unitary4 {
        match self {
            NamedGate::O => Unitary4::identity(),
            NamedGate::A1 | NamedGate::B => canonical_gate(&self.point()),
            NamedGate::Cnot => cnot(),
            NamedGate::Dcnot => dcnot(),
            NamedGate::Swap => swap(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedGate::O => "o",
            NamedGate::A1 => "a1",
            NamedGate::Cnot => "cnot",
            NamedGate::Dcnot => "dcnot",
            NamedGate::Swap => "swap",
            NamedGate::B => "b",
        }
    }
}

impl fmt::Display for NamedGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NamedGate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let gate = match lower.as_str() {
            "o" | "identity" | "id" => NamedGate::O,
            "a1" => NamedGate::A1,
            "cnot" | "l" => NamedGate::Cnot,
            "dcnot" | "a2" => NamedGate::Dcnot,
            "swap" | "a3" => NamedGate::Swap,
            "b" => NamedGate::B,
            _ => return Err(format!("unknown gate '{s}' (expected o, a1, cnot, dcnot, swap, b)")),
        };
        Ok(gate)
    }
}
