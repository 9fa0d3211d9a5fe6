//! QAOA circuit synthesis, transpilation and width/depth metrics.
//!
//! A spin term `c · Z_T` evolves for `γ_k` as `exp(-i γ_k c Z_T)`. Both
//! `RZ(θ)` and the phase gadget implement `exp(-i (θ/2) Z_T)`, so every cost
//! rotation carries the angle `2 c γ_k`. The mixer `exp(-i β_k X)` on each
//! qubit is `RX(2 β_k)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::poly::SpinPoly;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("a QAOA circuit needs at least one layer")]
    NoLayers,
    #[error("the cost Hamiltonian acts on zero qubits")]
    EmptyRegister,
    #[error("gate operands {operands:?} are invalid for a {width}-qubit circuit")]
    InvalidOperands { operands: Vec<usize>, width: usize },
    #[error("expected {expected} values for {family}, got {got}")]
    ParameterCount {
        family: Family,
        expected: usize,
        got: usize,
    },
}

/// How multi-qubit Z rotations are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GateModel {
    /// CNOT parity ladder around a single RZ.
    #[default]
    Ladder,
    /// One native multi-qubit phase gadget per term.
    NativeGadget,
}

impl fmt::Display for GateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateModel::Ladder => "ladder",
            GateModel::NativeGadget => "native_gadget",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Gamma,
    Beta,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Gamma => "gamma",
            Family::Beta => "beta",
        })
    }
}

/// A rotation angle: either a number or `multiplier · family[layer]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Literal(f64),
    Slot {
        family: Family,
        /// Zero-based layer index.
        layer: usize,
        multiplier: f64,
    },
}

impl Angle {
    pub fn literal(&self) -> Option<f64> {
        match self {
            Angle::Literal(v) => Some(*v),
            Angle::Slot { .. } => None,
        }
    }

    fn bind(&self, gammas: &[f64], betas: &[f64]) -> Angle {
        match *self {
            Angle::Literal(v) => Angle::Literal(v),
            Angle::Slot {
                family,
                layer,
                multiplier,
            } => {
                let p = match family {
                    Family::Gamma => gammas[layer],
                    Family::Beta => betas[layer],
                };
                Angle::Literal(multiplier * p)
            }
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::Literal(v) => write!(f, "{v}"),
            Angle::Slot {
                family,
                layer,
                multiplier,
            } => write!(f, "{multiplier}*{family}{}", layer + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateKind {
    H,
    Rx,
    Rz,
    Cnot,
    PhaseGadget,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::H => "H",
            GateKind::Rx => "RX",
            GateKind::Rz => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::PhaseGadget => "PHASE_GADGET",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    Rx(usize, Angle),
    Rz(usize, Angle),
    Cnot { control: usize, target: usize },
    /// `exp(-i (θ/2) Z_T)` on the sorted support `T`.
    PhaseGadget { support: Vec<usize>, angle: Angle },
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::Rx(..) => GateKind::Rx,
            Gate::Rz(..) => GateKind::Rz,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::PhaseGadget { .. } => GateKind::PhaseGadget,
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Rz(q, _) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::PhaseGadget { support, .. } => support.clone(),
        }
    }

    pub fn angle(&self) -> Option<Angle> {
        match self {
            Gate::Rx(_, a) | Gate::Rz(_, a) | Gate::PhaseGadget { angle: a, .. } => Some(*a),
            Gate::H(_) | Gate::Cnot { .. } => None,
        }
    }

    fn with_angle(&self, angle: Angle) -> Gate {
        match self {
            Gate::Rx(q, _) => Gate::Rx(*q, angle),
            Gate::Rz(q, _) => Gate::Rz(*q, angle),
            Gate::PhaseGadget { support, .. } => Gate::PhaseGadget {
                support: support.clone(),
                angle,
            },
            g => g.clone(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs: Vec<String> = self.qubits().iter().map(|q| q.to_string()).collect();
        write!(f, "{} {}", self.kind(), qs.join(","))?;
        if let Some(a) = self.angle() {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

/// Width, depth and gate inventory of a circuit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CircuitMetrics {
    pub width: usize,
    pub depth: usize,
    pub layers: usize,
    pub gate_counts: BTreeMap<GateKind, usize>,
}

/// Ordered gate list over `width` qubits with `layers` parameter pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct GateCircuit {
    width: usize,
    layers: usize,
    gates: Vec<Gate>,
}

impl GateCircuit {
    pub fn new(width: usize, layers: usize) -> Self {
        Self {
            width,
            layers,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        let qs = gate.qubits();
        let mut sorted = qs.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let support_sorted = match &gate {
            Gate::PhaseGadget { support, .. } => support.windows(2).all(|w| w[0] < w[1]),
            _ => true,
        };
        if qs.is_empty() || sorted.len() != qs.len() || !support_sorted || qs.iter().any(|&q| q >= self.width) {
            return Err(CircuitError::InvalidOperands {
                operands: qs,
                width: self.width,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of QAOA layers `P`.
    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_bound(&self) -> bool {
        self.gates
            .iter()
            .all(|g| g.angle().is_none_or(|a| a.literal().is_some()))
    }

    /// Number of layers under as-soon-as-possible scheduling. A phase gadget
    /// occupies three consecutive layers on its support: the rotation itself
    /// plus two operations of overhead.
    pub fn depth(&self) -> usize {
        let mut busy = vec![0usize; self.width];
        for g in &self.gates {
            let qs = g.qubits();
            let start = qs.iter().map(|&q| busy[q]).max().unwrap_or(0);
            let span = match g {
                Gate::PhaseGadget { .. } => 3,
                _ => 1,
            };
            for q in qs {
                busy[q] = start + span;
            }
        }
        busy.into_iter().max().unwrap_or(0)
    }

    pub fn gate_counts(&self) -> BTreeMap<GateKind, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.gates {
            *counts.entry(g.kind()).or_insert(0) += 1;
        }
        counts
    }

    pub fn metrics(&self) -> CircuitMetrics {
        CircuitMetrics {
            width: self.width,
            depth: self.depth(),
            layers: self.layers,
            gate_counts: self.gate_counts(),
        }
    }

    /// Substitutes concrete parameters into every symbolic angle.
    pub fn bind(&self, gammas: &[f64], betas: &[f64]) -> Result<GateCircuit, CircuitError> {
        for (family, v) in [(Family::Gamma, gammas), (Family::Beta, betas)] {
            if v.len() != self.layers {
                return Err(CircuitError::ParameterCount {
                    family,
                    expected: self.layers,
                    got: v.len(),
                });
            }
        }
        Ok(GateCircuit {
            width: self.width,
            layers: self.layers,
            gates: self
                .gates
                .iter()
                .map(|g| match g.angle() {
                    Some(a) => g.with_angle(a.bind(gammas, betas)),
                    None => g.clone(),
                })
                .collect(),
        })
    }

    /// Expands every phase gadget into its CNOT ladder.
    pub fn transpile(&self) -> GateCircuit {
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            match g {
                Gate::PhaseGadget { support, angle } => ladder(support, *angle, &mut gates),
                g => gates.push(g.clone()),
            }
        }
        GateCircuit {
            width: self.width,
            layers: self.layers,
            gates,
        }
    }

    /// One gate per line: kind, comma-separated operands, angle expression.
    pub fn listing(&self) -> String {
        let mut s = String::new();
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }
}

fn ladder(support: &[usize], angle: Angle, out: &mut Vec<Gate>) {
    let last = *support.last().expect("gadget support is non-empty");
    if support.len() == 1 {
        out.push(Gate::Rz(last, angle));
        return;
    }
    let chain: Vec<Gate> = support
        .windows(2)
        .map(|w| Gate::Cnot {
            control: w[0],
            target: w[1],
        })
        .collect();
    out.extend(chain.iter().cloned());
    out.push(Gate::Rz(last, angle));
    out.extend(chain.into_iter().rev());
}

/// Builds the `P`-layer QAOA circuit for the cost Hamiltonian `h`.
///
/// Constant terms only contribute a global phase and are omitted.
pub fn build_qaoa(h: &SpinPoly, layers: usize, model: GateModel) -> Result<GateCircuit, CircuitError> {
    if layers == 0 {
        return Err(CircuitError::NoLayers);
    }
    let width = h.num_bits();
    if width == 0 {
        return Err(CircuitError::EmptyRegister);
    }
    let mut c = GateCircuit::new(width, layers);
    for q in 0..width {
        c.push(Gate::H(q))?;
    }
    for k in 0..layers {
        for (set, coeff) in h.terms().filter(|(s, _)| !s.is_empty()) {
            let angle = Angle::Slot {
                family: Family::Gamma,
                layer: k,
                multiplier: 2.0 * coeff,
            };
            let support = set.as_slice();
            match (support.len(), model) {
                (1, _) => c.push(Gate::Rz(support[0], angle))?,
                (_, GateModel::Ladder) => {
                    let mut gs = Vec::new();
                    ladder(support, angle, &mut gs);
                    for g in gs {
                        c.push(g)?;
                    }
                }
                (_, GateModel::NativeGadget) => c.push(Gate::PhaseGadget {
                    support: support.to_vec(),
                    angle,
                })?,
            }
        }
        for q in 0..width {
            c.push(Gate::Rx(
                q,
                Angle::Slot {
                    family: Family::Beta,
                    layer: k,
                    multiplier: 2.0,
                },
            ))?;
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(n: usize, terms: &[(&[usize], f64)]) -> SpinPoly {
        SpinPoly::from_terms(n, terms.iter().map(|(k, c)| (k.to_vec(), *c))).unwrap()
    }

    fn slot(family: Family, multiplier: f64) -> Angle {
        Angle::Slot {
            family,
            layer: 0,
            multiplier,
        }
    }

    #[test]
    fn linear_term_uses_twice_the_coefficient() {
        let c = build_qaoa(&sp(1, &[(&[0], 8.0)]), 1, GateModel::Ladder).unwrap();
        assert_eq!(
            c.gates(),
            &[Gate::H(0), Gate::Rz(0, slot(Family::Gamma, 16.0)), Gate::Rx(0, slot(Family::Beta, 2.0))]
        );
        assert_eq!(c.listing(), "H 0\nRZ 0 16*gamma1\nRX 0 2*beta1\n");
    }

    #[test]
    fn quadratic_term_ladder() {
        let c = build_qaoa(&sp(2, &[(&[0, 1], 4.0)]), 1, GateModel::Ladder).unwrap();
        let cx = Gate::Cnot { control: 0, target: 1 };
        assert_eq!(
            c.gates(),
            &[
                Gate::H(0),
                Gate::H(1),
                cx.clone(),
                Gate::Rz(1, slot(Family::Gamma, 8.0)),
                cx,
                Gate::Rx(0, slot(Family::Beta, 2.0)),
                Gate::Rx(1, slot(Family::Beta, 2.0)),
            ]
        );
    }

    #[test]
    fn cubic_term_ladder_and_native() {
        let h = sp(3, &[(&[0, 1, 2], 0.5)]);
        let c = build_qaoa(&h, 1, GateModel::Ladder).unwrap();
        let counts = c.gate_counts();
        assert_eq!(counts[&GateKind::Cnot], 4);
        assert_eq!(counts[&GateKind::Rz], 1);
        let body: Vec<_> = c.gates()[3..8].to_vec();
        assert_eq!(
            body,
            vec![
                Gate::Cnot { control: 0, target: 1 },
                Gate::Cnot { control: 1, target: 2 },
                Gate::Rz(2, slot(Family::Gamma, 1.0)),
                Gate::Cnot { control: 1, target: 2 },
                Gate::Cnot { control: 0, target: 1 },
            ]
        );
        let native = build_qaoa(&h, 1, GateModel::NativeGadget).unwrap();
        assert_eq!(native.gate_counts()[&GateKind::PhaseGadget], 1);
        assert_eq!(native.transpile(), c);
    }

    #[test]
    fn cnot_count_per_term_is_twice_degree_minus_one() {
        for k in 2..7 {
            let support: Vec<usize> = (0..k).collect();
            let h = sp(k, &[(&support, 1.0)]);
            let c = build_qaoa(&h, 1, GateModel::Ladder).unwrap();
            assert_eq!(c.gate_counts()[&GateKind::Cnot], 2 * (k - 1));
        }
    }

    #[test]
    fn constant_term_is_dropped_and_terms_are_sorted() {
        let h = sp(2, &[(&[], 5.0), (&[0, 1], 1.0), (&[1], 2.0), (&[0], 3.0)]);
        let c = build_qaoa(&h, 1, GateModel::NativeGadget).unwrap();
        let kinds: Vec<String> = c.gates().iter().map(|g| g.to_string()).collect();
        assert_eq!(
            kinds,
            vec!["H 0", "H 1", "RZ 0 6*gamma1", "RZ 1 4*gamma1", "PHASE_GADGET 0,1 2*gamma1", "RX 0 2*beta1", "RX 1 2*beta1"]
        );
    }

    #[test]
    fn depth_examples() {
        assert_eq!(GateCircuit::new(3, 1).depth(), 0);
        let mut c = GateCircuit::new(2, 1);
        c.push(Gate::H(0)).unwrap();
        c.push(Gate::H(1)).unwrap();
        assert_eq!(c.depth(), 1);

        for k in 1..7 {
            let support: Vec<usize> = (0..k).collect();
            let mut gs = Vec::new();
            ladder(&support, Angle::Literal(0.3), &mut gs);
            let mut c = GateCircuit::new(k, 1);
            for g in gs {
                c.push(g).unwrap();
            }
            assert_eq!(c.depth(), 2 * (k - 1) + 1);
        }

        let mut g = GateCircuit::new(4, 1);
        g.push(Gate::PhaseGadget { support: vec![0, 1, 2, 3], angle: Angle::Literal(1.0) }).unwrap();
        assert_eq!(g.depth(), 3);
    }

    #[test]
    fn depth_is_subadditive_in_layers() {
        let h = sp(4, &[(&[0], 1.0), (&[1, 2], -2.0), (&[0, 2, 3], 0.5), (&[0, 1, 2, 3], 1.5)]);
        let one = build_qaoa(&h, 1, GateModel::Ladder).unwrap().depth();
        for p in 2..6 {
            assert!(build_qaoa(&h, p, GateModel::Ladder).unwrap().depth() <= p * one);
        }
    }

    #[test]
    fn binding() {
        let h = sp(2, &[(&[0, 1], 4.0)]);
        let c = build_qaoa(&h, 1, GateModel::Ladder).unwrap();
        assert!(!c.is_bound());
        let b = c.bind(&[0.1], &[0.2]).unwrap();
        assert!(b.is_bound());
        assert_eq!(b.gates()[3].angle().unwrap().literal(), Some(0.8));
        assert_eq!(b.gates()[5].angle().unwrap().literal(), Some(0.4));
        assert_eq!(b.bind(&[0.1], &[0.2]).unwrap(), b);
        assert_eq!(c.bind(&[0.1], &[0.2]).unwrap(), b);

        let zero = c.bind(&[0.0], &[0.2]).unwrap();
        assert_eq!(zero.gates()[3].angle().unwrap().literal(), Some(0.0));

        assert!(matches!(
            c.bind(&[0.1, 0.2], &[0.2]),
            Err(CircuitError::ParameterCount { family: Family::Gamma, expected: 1, got: 2 })
        ));
    }

    #[test]
    fn invalid_operands_are_rejected() {
        let mut c = GateCircuit::new(2, 1);
        assert!(c.push(Gate::H(2)).is_err());
        assert!(c.push(Gate::Cnot { control: 1, target: 1 }).is_err());
        assert!(c
            .push(Gate::PhaseGadget { support: vec![1, 0], angle: Angle::Literal(0.0) })
            .is_err());
        assert_eq!(build_qaoa(&sp(1, &[]), 0, GateModel::Ladder), Err(CircuitError::NoLayers));
        assert_eq!(build_qaoa(&sp(0, &[]), 1, GateModel::Ladder), Err(CircuitError::EmptyRegister));
    }
}
