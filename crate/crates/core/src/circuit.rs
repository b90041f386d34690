//! Two-wire circuits: evaluation, per-wire merging of single-qubit gates,
//! a JSON exchange format and a line-oriented text listing.
//!
//! Gates are stored in application order. Evaluation puts the first gate
//! rightmost in the matrix product; the top wire is the left Kronecker
//! factor.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{self, on_wire, Wire};
use crate::json::{self, fmt_g17, MatrixJson};
use crate::matrix::{Pauli, Unitary2, Unitary4};
use crate::weyl::{canonical_gate, WeylPoint};

#[derive(Debug, Clone, PartialEq)]
pub enum TwoQubitKind {
    B,
    /// Control on the top wire.
    Cnot,
    Controlled { control: Wire, u: Unitary2 },
    Canonical(WeylPoint),
}

impl TwoQubitKind {
    pub fn matrix(&self) -> Unitary4 {
        match self {
            TwoQubitKind::B => gates::b_gate(),
            TwoQubitKind::Cnot => gates::cnot(),
            TwoQubitKind::Controlled { control, u } => gates::controlled(*control, u),
            TwoQubitKind::Canonical(c) => canonical_gate(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateOp {
    Single { wire: Wire, u: Unitary2, label: Option<String> },
    Two(TwoQubitKind),
}

impl GateOp {
    pub fn single(wire: Wire, u: Unitary2) -> Self {
        GateOp::Single { wire, u, label: None }
    }

    pub fn labeled(wire: Wire, u: Unitary2, label: impl Into<String>) -> Self {
        GateOp::Single { wire, u, label: Some(label.into()) }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateOp::Two(_))
    }

    pub fn matrix(&self) -> Unitary4 {
        match self {
            GateOp::Single { wire, u, .. } => on_wire(*wire, u),
            GateOp::Two(kind) => kind.matrix(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TwoQubitCircuit {
    pub gates: Vec<GateOp>,
}

impl TwoQubitCircuit {
    pub fn new(gates: Vec<GateOp>) -> Self {
        Self { gates }
    }

    pub fn push(&mut self, gate: GateOp) {
        self.gates.push(gate);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn single_qubit_count(&self) -> usize {
        self.gates.len() - self.two_qubit_count()
    }

    pub fn count_kind(&self, kind: &TwoQubitKind) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, GateOp::Two(k) if std::mem::discriminant(k) == std::mem::discriminant(kind)))
            .count()
    }
}

pub fn evaluate(c: &TwoQubitCircuit) -> Unitary4 {
    c.gates.iter().fold(Unitary4::identity(), |acc, g| g.matrix() * acc)
}

/// Multiplies together single-qubit gates that sit on the same wire
/// between the same pair of two-qubit gates.
pub fn merge_locals(c: &TwoQubitCircuit) -> TwoQubitCircuit {
    let mut out = Vec::with_capacity(c.gates.len());
    // Pending merged gate per wire for the current segment, in first-seen order.
    let mut pending: Vec<(Wire, Unitary2, Option<String>, usize)> = Vec::new();
    let flush = |pending: &mut Vec<(Wire, Unitary2, Option<String>, usize)>, out: &mut Vec<GateOp>| {
        for (wire, u, label, n) in pending.drain(..) {
            let label = if n == 1 { label } else { None };
            out.push(GateOp::Single { wire, u, label });
        }
    };
    for g in &c.gates {
        match g {
            GateOp::Single { wire, u, label } => {
                if let Some(slot) = pending.iter_mut().find(|p| p.0 == *wire) {
                    slot.1 = *u * slot.1;
                    slot.3 += 1;
                } else {
                    pending.push((*wire, *u, label.clone(), 1));
                }
            }
            GateOp::Two(_) => {
                flush(&mut pending, &mut out);
                out.push(g.clone());
            }
        }
    }
    flush(&mut pending, &mut out);
    TwoQubitCircuit { gates: out }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitJson {
    gates: Vec<GateJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum GateJson {
    Single {
        wire: Wire,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        u: MatrixJson,
    },
    Two {
        kind: KindJson,
    },
}

#[derive(Serialize, Deserialize)]
enum KindJson {
    #[serde(rename = "B")]
    B,
    #[serde(rename = "CNOT")]
    Cnot,
    #[serde(rename = "controlled")]
    Controlled { control: Wire, u: MatrixJson },
    #[serde(rename = "canonical")]
    Canonical([f64; 3]),
}

impl From<&GateOp> for GateJson {
    fn from(g: &GateOp) -> Self {
        match g {
            GateOp::Single { wire, u, label } => GateJson::Single {
                wire: *wire,
                label: label.clone(),
                u: MatrixJson::from(u),
            },
            GateOp::Two(kind) => GateJson::Two {
                kind: match kind {
                    TwoQubitKind::B => KindJson::B,
                    TwoQubitKind::Cnot => KindJson::Cnot,
                    TwoQubitKind::Controlled { control, u } => {
                        KindJson::Controlled { control: *control, u: MatrixJson::from(u) }
                    }
                    TwoQubitKind::Canonical(c) => KindJson::Canonical(c.coords()),
                },
            },
        }
    }
}

impl TryFrom<GateJson> for GateOp {
    type Error = Error;

    fn try_from(g: GateJson) -> Result<Self> {
        let embedded = |m: &MatrixJson| {
            m.to_unitary2().map_err(|e| Error::CircuitFormat(format!("embedded matrix: {e}")))
        };
        Ok(match g {
            GateJson::Single { wire, label, u } => GateOp::Single { wire, u: embedded(&u)?, label },
            GateJson::Two { kind } => GateOp::Two(match kind {
                KindJson::B => TwoQubitKind::B,
                KindJson::Cnot => TwoQubitKind::Cnot,
                KindJson::Controlled { control, u } => TwoQubitKind::Controlled { control, u: embedded(&u)? },
                KindJson::Canonical(c) => {
                    if c.iter().any(|x| !x.is_finite()) {
                        return Err(Error::CircuitFormat("non-finite canonical coordinate".into()));
                    }
                    TwoQubitKind::Canonical(WeylPoint::from(c))
                }
            }),
        })
    }
}

pub fn serialize(c: &TwoQubitCircuit) -> String {
    let doc = CircuitJson { gates: c.gates.iter().map(GateJson::from).collect() };
    json::to_string(&doc).expect("circuit JSON serializes")
}

pub fn parse(text: &str) -> Result<TwoQubitCircuit> {
    let doc: CircuitJson = serde_json::from_str(text).map_err(|e| Error::CircuitFormat(e.to_string()))?;
    let gates = doc.gates.into_iter().map(GateOp::try_from).collect::<Result<Vec<_>>>()?;
    Ok(TwoQubitCircuit { gates })
}

/// Axis-angle form `u = e^{iα}·e^{θ(i/2) n·σ}` with θ ∈ [0, 2π).
pub fn axis_angle(u: &Unitary2) -> (f64, [f64; 3]) {
    let (s, _) = u.to_special();
    let m = s.matrix();
    // s = cos(θ/2) I + i sin(θ/2) n·σ
    let cos_half = (0.5 * (m[(0, 0)] + m[(1, 1)]).re).clamp(-1.0, 1.0);
    let nx = 0.5 * (m[(0, 1)] + m[(1, 0)]).im;
    let ny = 0.5 * (m[(0, 1)] - m[(1, 0)]).re;
    let nz = 0.5 * (m[(0, 0)] - m[(1, 1)]).im;
    let sin_half = (nx * nx + ny * ny + nz * nz).sqrt();
    let theta = 2.0 * sin_half.atan2(cos_half);
    if sin_half < 1e-15 {
        return (0.0, [0.0, 0.0, 1.0]);
    }
    (theta, [nx / sin_half, ny / sin_half, nz / sin_half])
}

fn single_line(u: &Unitary2) -> String {
    let (theta, n) = axis_angle(u);
    for (axis, name) in [(Pauli::X, "rx"), (Pauli::Y, "ry"), (Pauli::Z, "rz")] {
        let k = match axis {
            Pauli::X => 0,
            Pauli::Y => 1,
            _ => 2,
        };
        let off: f64 = (0..3).filter(|&j| j != k).map(|j| n[j].abs()).sum();
        if off < 1e-12 {
            let signed = if n[k] < 0.0 { -theta } else { theta };
            return format!("{name}({})", fmt_g17(signed));
        }
    }
    format!(
        "u({}; {}, {}, {})",
        fmt_g17(theta),
        fmt_g17(n[0]),
        fmt_g17(n[1]),
        fmt_g17(n[2])
    )
}

/// Human-readable listing, one gate per line in application order.
///
/// `rA(θ)` is `e^{θ(i/2)σA}` and `u(θ; nx, ny, nz)` its axis-angle
/// generalization; global phases of single-qubit gates are dropped.
pub fn to_pseudoqasm(c: &TwoQubitCircuit) -> String {
    let mut out = String::from("# bgate circuit: wires top bottom; r(θ) = exp(+iθσ/2)\n");
    for g in &c.gates {
        let line = match g {
            GateOp::Single { wire, u, .. } => format!("{} {}", single_line(u), wire.name()),
            GateOp::Two(TwoQubitKind::B) => "b top,bottom".to_string(),
            GateOp::Two(TwoQubitKind::Cnot) => "cnot top,bottom".to_string(),
            GateOp::Two(TwoQubitKind::Controlled { control, u }) => {
                format!("c-{} {},{}", single_line(u), control.name(), control.other().name())
            }
            GateOp::Two(TwoQubitKind::Canonical(p)) => format!(
                "can({}, {}, {}) top,bottom",
                fmt_g17(p.c1),
                fmt_g17(p.c2),
                fmt_g17(p.c3)
            ),
        };
        let _ = writeln!(out, "{line}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{haar_random_su2_with, kron, Mat4};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_circuit(seed: u64, len: usize) -> TwoQubitCircuit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = TwoQubitCircuit::default();
        for _ in 0..len {
            let wire = if rng.random_bool(0.5) { Wire::Top } else { Wire::Bottom };
            let g = match rng.random_range(0..6) {
                0 | 1 => GateOp::single(wire, haar_random_su2_with(&mut rng)),
                2 => GateOp::labeled(wire, haar_random_su2_with(&mut rng), "k"),
                3 => GateOp::Two(TwoQubitKind::B),
                4 => GateOp::Two(TwoQubitKind::Controlled { control: wire, u: haar_random_su2_with(&mut rng) }),
                _ => GateOp::Two(TwoQubitKind::Canonical(WeylPoint::new(
                    rng.random_range(0.0..3.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ))),
            };
            c.push(g);
        }
        c
    }

    #[test]
    fn empty_circuit_is_identity() {
        assert_eq!(evaluate(&TwoQubitCircuit::default()), Unitary4::identity());
    }

    #[test]
    fn wire_embedding_convention() {
        let x = Pauli::X.unitary();
        let c = TwoQubitCircuit::new(vec![GateOp::single(Wire::Top, x)]);
        assert_eq!(evaluate(&c), kron(&x, &Unitary2::identity()));
        let twice = TwoQubitCircuit::new(vec![GateOp::single(Wire::Top, x), GateOp::single(Wire::Top, x)]);
        assert_eq!(*evaluate(&twice).matrix(), Mat4::identity());
    }

    #[test]
    fn first_gate_is_rightmost_factor() {
        // H then CNOT on |00⟩ makes a Bell state only in this order.
        let a = Unitary2::rotation(Pauli::Y, 0.7);
        let c = TwoQubitCircuit::new(vec![GateOp::single(Wire::Top, a), GateOp::Two(TwoQubitKind::Cnot)]);
        let expected = gates::cnot() * kron(&a, &Unitary2::identity());
        assert_eq!(evaluate(&c), expected);
    }

    #[test]
    fn merge_zyz_into_one_gate() {
        let c = TwoQubitCircuit::new(vec![
            GateOp::single(Wire::Bottom, Unitary2::rotation(Pauli::Z, 0.3)),
            GateOp::single(Wire::Bottom, Unitary2::rotation(Pauli::Y, 1.1)),
            GateOp::single(Wire::Bottom, Unitary2::rotation(Pauli::Z, 0.3)),
        ]);
        let m = merge_locals(&c);
        assert_eq!(m.len(), 1);
        assert!((evaluate(&m).matrix() - evaluate(&c).matrix()).norm() < 1e-12);
    }

    #[test]
    fn merge_never_crosses_two_qubit_gates() {
        let k = Unitary2::rotation(Pauli::X, 0.2);
        let c = TwoQubitCircuit::new(vec![
            GateOp::single(Wire::Top, k),
            GateOp::single(Wire::Bottom, k),
            GateOp::Two(TwoQubitKind::B),
            GateOp::single(Wire::Top, k),
            GateOp::single(Wire::Bottom, k),
        ]);
        assert_eq!(merge_locals(&c).len(), 5);
    }

    #[test]
    fn merge_preserves_evaluation_on_random_circuits() {
        for seed in 0..100 {
            let c = random_circuit(seed, 50);
            let m = merge_locals(&c);
            assert!((evaluate(&m).matrix() - evaluate(&c).matrix()).norm() < 1e-12);
            assert!(m.single_qubit_count() <= c.single_qubit_count());
            assert_eq!(m.two_qubit_count(), c.two_qubit_count());
        }
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(seed in any::<u64>(), len in 0usize..30) {
            let c = random_circuit(seed, len);
            let text = serialize(&c);
            let back = parse(&text).unwrap();
            prop_assert_eq!(&back, &c);
            prop_assert_eq!(serialize(&back), text);
        }
    }

    #[test]
    fn parse_rejects_bad_documents() {
        let non_unitary = r#"{"gates":[{"type":"single","wire":"top","u":{"dim":2,"rows":[[[2,0],[0,0]],[[0,0],[1,0]]]}}]}"#;
        assert!(matches!(parse(non_unitary), Err(Error::CircuitFormat(_))));
        let unknown_kind = r#"{"gates":[{"type":"two","kind":"SWAP"}]}"#;
        assert!(matches!(parse(unknown_kind), Err(Error::CircuitFormat(_))));
        assert!(parse("{not json").is_err());
        let ok = r#"{"gates":[{"type":"two","kind":"B"},{"type":"two","kind":{"canonical":[1,0.5,0]}}]}"#;
        assert_eq!(parse(ok).unwrap().len(), 2);
    }

    #[test]
    fn json_layout() {
        let c = TwoQubitCircuit::new(vec![
            GateOp::labeled(Wire::Top, Unitary2::identity(), "id"),
            GateOp::Two(TwoQubitKind::B),
            GateOp::Two(TwoQubitKind::Controlled { control: Wire::Bottom, u: Unitary2::identity() }),
        ]);
        let text = serialize(&c);
        assert!(text.starts_with(
            r#"{"gates":[{"type":"single","wire":"top","label":"id","u":{"dim":2,"rows":[[[1,0],[0,0]],[[0,0],[1,0]]]}},{"type":"two","kind":"B"},"#
        ), "{text}");
        assert!(text.contains(r#"{"type":"two","kind":{"controlled":{"control":"bottom","u":"#));
    }

    #[test]
    fn pseudoqasm_lines() {
        let empty = to_pseudoqasm(&TwoQubitCircuit::default());
        assert_eq!(empty.lines().count(), 1);
        assert!(empty.starts_with('#'));

        let c = TwoQubitCircuit::new(vec![
            GateOp::single(Wire::Top, Unitary2::rotation(Pauli::Y, 0.5)),
            GateOp::Two(TwoQubitKind::B),
            GateOp::single(Wire::Bottom, Unitary2::rotation(Pauli::Z, -0.25)),
        ]);
        let text = to_pseudoqasm(&c);
        let body: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(body, ["ry(0.5) top", "b top,bottom", "rz(-0.25) bottom"]);
    }

    #[test]
    fn axis_angle_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let u = haar_random_su2_with(&mut rng).scale(num_complex::Complex64::from_polar(1.0, 0.3));
            let (theta, n) = axis_angle(&u);
            let s = (theta / 2.0).sin();
            let cx = |x: f64| num_complex::Complex64::new(x, 0.0);
            let m = crate::matrix::Mat2::identity() * cx((theta / 2.0).cos())
                + (Pauli::X.matrix() * cx(n[0]) + Pauli::Y.matrix() * cx(n[1]) + Pauli::Z.matrix() * cx(n[2]))
                    * num_complex::Complex64::new(0.0, s);
            let v = Unitary2::new(m).unwrap();
            assert!(crate::matrix::dist_up_to_phase2(&u, &v) < 1e-12);
        }
    }
}
