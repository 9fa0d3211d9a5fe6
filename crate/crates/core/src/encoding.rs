//! Sign-magnitude discretization of continuous variables.
//!
//! A variable with magnitude exponent `n` and resolution `m` ranges over
//! `]-2^n, 2^n[` (or `[0, 2^n[` when unsigned) on a grid of pitch `2^-m`.
//! Its bits are laid out as
//!
//! ```text
//! [sign] [2^(n-1) ... 2^0] [2^-1 ... 2^-m]
//! ```
//!
//! and the sign bit set means negative, so the value is
//! `(1 - 2·sign) · Σ weight_i · x_i`. The all-magnitude-zero pattern with the
//! sign bit set is a second encoding of zero.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::poly::{BinaryPoly, ContinuousPoly, PolyError};

/// Largest supported `n + m`; keeps every grid value exact in an `f64`.
pub const MAX_MAGNITUDE_BITS: u32 = 52;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodingError {
    #[error("value {value} lies outside the domain of `{name}`")]
    OutOfDomain { name: String, value: f64 },
    #[error("expected {expected} bits for `{name}`, got {got}")]
    LengthMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("invalid domain for `{name}`: {reason}")]
    InvalidSpec { name: String, reason: String },
    #[error("variable `{0}` is declared twice")]
    DuplicateVariable(String),
    #[error("objective uses variable `{0}` which has no domain")]
    UnknownVariable(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Discretization parameters of a single variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarSpec {
    pub name: String,
    #[serde(default = "default_signed")]
    pub signed: bool,
    /// Magnitude exponent: the domain is `]-2^n, 2^n[`.
    pub n: u32,
    /// Number of fractional bits.
    #[serde(default)]
    pub m: u32,
}

fn default_signed() -> bool {
    true
}

impl VarSpec {
    pub fn signed(name: impl Into<String>, n: u32, m: u32) -> Self {
        Self {
            name: name.into(),
            signed: true,
            n,
            m,
        }
    }

    pub fn unsigned(name: impl Into<String>, n: u32, m: u32) -> Self {
        Self {
            name: name.into(),
            signed: false,
            n,
            m,
        }
    }

    pub fn validate(&self) -> Result<(), EncodingError> {
        let invalid = |reason: &str| EncodingError::InvalidSpec {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.n < 1 {
            return Err(invalid("magnitude exponent n must be at least 1"));
        }
        if self.n + self.m > MAX_MAGNITUDE_BITS {
            return Err(invalid("n + m exceeds 52 magnitude bits"));
        }
        Ok(())
    }

    /// Bits used by this variable: `signed + n + m`.
    pub fn width(&self) -> usize {
        usize::from(self.signed) + (self.n + self.m) as usize
    }

    /// Exclusive bound `2^n` of the magnitude.
    pub fn bound(&self) -> f64 {
        2f64.powi(self.n as i32)
    }

    /// Grid pitch `2^-m`.
    pub fn pitch(&self) -> f64 {
        2f64.powi(-(self.m as i32))
    }

    /// Weights of the magnitude bits, most significant first.
    pub fn magnitude_weights(&self) -> Vec<f64> {
        (0..self.n + self.m)
            .map(|i| 2f64.powi(self.n as i32 - 1 - i as i32))
            .collect()
    }
}

/// Per-variable discretization of an objective.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub vars: Vec<VarSpec>,
}

impl DomainSpec {
    pub fn new(vars: Vec<VarSpec>) -> Result<Self, EncodingError> {
        let spec = Self { vars };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), EncodingError> {
        let mut seen = BTreeSet::new();
        for v in &self.vars {
            v.validate()?;
            if !seen.insert(v.name.as_str()) {
                return Err(EncodingError::DuplicateVariable(v.name.clone()));
            }
        }
        Ok(())
    }

    /// The same domain with every variable at resolution `m`.
    pub fn with_resolution(&self, m: u32) -> Self {
        Self {
            vars: self
                .vars
                .iter()
                .map(|v| VarSpec { m, ..v.clone() })
                .collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<&VarSpec> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn total_bits(&self) -> usize {
        self.vars.iter().map(VarSpec::width).sum()
    }

    pub fn layout(&self) -> Result<BitLayout, EncodingError> {
        self.validate()?;
        let mut offset = 0;
        let entries = self
            .vars
            .iter()
            .map(|spec| {
                let e = LayoutEntry {
                    spec: spec.clone(),
                    offset,
                };
                offset += spec.width();
                e
            })
            .collect();
        Ok(BitLayout {
            entries,
            total_bits: offset,
        })
    }
}

/// Bit range `[offset, offset + width)` owned by one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutEntry {
    pub spec: VarSpec,
    pub offset: usize,
}

impl LayoutEntry {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.spec.width()
    }
}

/// Concatenated bit layout of all variables, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitLayout {
    pub entries: Vec<LayoutEntry>,
    pub total_bits: usize,
}

impl BitLayout {
    pub fn entry(&self, name: &str) -> Option<&LayoutEntry> {
        self.entries.iter().find(|e| e.spec.name == name)
    }

    /// Decodes a full register assignment into per-variable values.
    pub fn decode_all(&self, bits: &[bool]) -> Result<Vec<(String, f64)>, EncodingError> {
        if bits.len() != self.total_bits {
            return Err(EncodingError::LengthMismatch {
                name: "<layout>".into(),
                expected: self.total_bits,
                got: bits.len(),
            });
        }
        self.entries
            .iter()
            .map(|e| Ok((e.spec.name.clone(), decode(&bits[e.range()], &e.spec)?)))
            .collect()
    }

    /// Decodes basis state `index` of a `total_bits`-qubit register.
    pub fn decode_basis(&self, index: usize) -> Vec<(String, f64)> {
        let n = self.total_bits;
        let bits: Vec<bool> = (0..n).map(|q| index >> (n - 1 - q) & 1 == 1).collect();
        self.decode_all(&bits).expect("basis assignment matches the layout")
    }

    /// Encodes one value per variable (in layout order) into a full register.
    pub fn encode_all(&self, values: &[f64]) -> Result<Vec<bool>, EncodingError> {
        if values.len() != self.entries.len() {
            return Err(EncodingError::LengthMismatch {
                name: "<layout>".into(),
                expected: self.entries.len(),
                got: values.len(),
            });
        }
        let mut out = Vec::with_capacity(self.total_bits);
        for (e, &v) in self.entries.iter().zip(values) {
            out.extend(encode(v, &e.spec)?);
        }
        Ok(out)
    }
}

/// Encodes `value`, truncating the magnitude toward zero onto the grid.
pub fn encode(value: f64, spec: &VarSpec) -> Result<Vec<bool>, EncodingError> {
    spec.validate()?;
    let out_of_domain = || EncodingError::OutOfDomain {
        name: spec.name.clone(),
        value,
    };
    if !value.is_finite() || value.abs() >= spec.bound() || (!spec.signed && value < 0.0) {
        return Err(out_of_domain());
    }
    let magnitude_bits = spec.n + spec.m;
    let units = (value.abs() * 2f64.powi(spec.m as i32)).floor() as u64;
    let mut bits = Vec::with_capacity(spec.width());
    if spec.signed {
        bits.push(value < 0.0);
    }
    bits.extend((0..magnitude_bits).rev().map(|b| units >> b & 1 == 1));
    Ok(bits)
}

/// Inverse of [`encode`] on grid values; the negative zero pattern maps to 0.
pub fn decode(bits: &[bool], spec: &VarSpec) -> Result<f64, EncodingError> {
    if bits.len() != spec.width() {
        return Err(EncodingError::LengthMismatch {
            name: spec.name.clone(),
            expected: spec.width(),
            got: bits.len(),
        });
    }
    let (sign, magnitude) = if spec.signed {
        (bits[0], &bits[1..])
    } else {
        (false, bits)
    };
    let value: f64 = magnitude
        .iter()
        .zip(spec.magnitude_weights())
        .filter(|(b, _)| **b)
        .map(|(_, w)| w)
        .sum();
    // adding 0.0 turns -0.0 into +0.0
    Ok(if sign { -value + 0.0 } else { value })
}

/// The variable's value as a pseudo-Boolean polynomial of its own bits inside
/// a register of `total_bits`.
pub fn bit_substitution(entry: &LayoutEntry, total_bits: usize) -> Result<BinaryPoly, EncodingError> {
    let spec = &entry.spec;
    let first_magnitude = entry.offset + usize::from(spec.signed);
    let magnitude = BinaryPoly::from_terms(
        total_bits,
        spec.magnitude_weights()
            .into_iter()
            .enumerate()
            .map(|(i, w)| (vec![first_magnitude + i], w)),
    )?;
    if !spec.signed {
        return Ok(magnitude);
    }
    // (1 - 2 x_sign) · magnitude
    let sign_factor = BinaryPoly::from_terms(total_bits, [(vec![], 1.0), (vec![entry.offset], -2.0)])?;
    Ok(sign_factor.mul(&magnitude)?)
}

/// Substitutes every variable of `f` by its bit expansion.
///
/// The result agrees with `f(decode(b))` on every bit assignment `b`.
pub fn discretize(
    f: &ContinuousPoly,
    domain: &DomainSpec,
) -> Result<(BinaryPoly, BitLayout), EncodingError> {
    let layout = domain.layout()?;
    if let Some(missing) = f.variables().into_iter().find(|v| layout.entry(v).is_none()) {
        return Err(EncodingError::UnknownVariable(missing));
    }
    let mut replacements = BTreeMap::new();
    for e in &layout.entries {
        replacements.insert(e.spec.name.clone(), bit_substitution(e, layout.total_bits)?);
    }
    let pubo = f.substitute(layout.total_bits, &replacements)?;
    Ok((pubo, layout))
}

/// Renders bits as `sign magnitude,fraction`, e.g. `1 10,110`.
pub fn render_bits(bits: &[bool], spec: &VarSpec) -> String {
    let digit = |b: &bool| if *b { '1' } else { '0' };
    let mut out = String::new();
    let mut rest = bits;
    if spec.signed && !rest.is_empty() {
        out.push(digit(&rest[0]));
        out.push(' ');
        rest = &rest[1..];
    }
    let split = (spec.n as usize).min(rest.len());
    out.extend(rest[..split].iter().map(digit));
    if spec.m > 0 {
        out.push(',');
        out.extend(rest[split..].iter().map(digit));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_objective;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().filter(|c| *c == '0' || *c == '1').map(|c| c == '1').collect()
    }

    fn all_assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0..1usize << n).map(move |k| (0..n).map(|i| k >> (n - 1 - i) & 1 == 1).collect())
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode(3.0, &VarSpec::signed("x", 2, 0)).unwrap(), bits("011"));
        assert_eq!(encode(-2.75, &VarSpec::signed("x", 2, 3)).unwrap(), bits("110110"));
        assert_eq!(encode(0.0, &VarSpec::signed("x", 3, 2)).unwrap(), vec![false; 6]);
        assert_eq!(encode(0.0, &VarSpec::unsigned("x", 2, 1)).unwrap(), vec![false; 3]);
    }

    #[test]
    fn encode_truncates_toward_zero() {
        let s = VarSpec::signed("x", 2, 1);
        assert_eq!(decode(&encode(2.9, &s).unwrap(), &s).unwrap(), 2.5);
        assert_eq!(decode(&encode(-2.9, &s).unwrap(), &s).unwrap(), -2.5);
        assert_eq!(decode(&encode(-0.25, &s).unwrap(), &s).unwrap(), 0.0);
    }

    #[test]
    fn encode_rejects_out_of_domain() {
        let s = VarSpec::signed("x", 2, 0);
        assert!(matches!(encode(4.0, &s), Err(EncodingError::OutOfDomain { .. })));
        assert!(matches!(encode(-4.0, &s), Err(EncodingError::OutOfDomain { .. })));
        assert!(matches!(encode(f64::NAN, &s), Err(EncodingError::OutOfDomain { .. })));
        let u = VarSpec::unsigned("x", 2, 0);
        assert!(matches!(encode(-1.0, &u), Err(EncodingError::OutOfDomain { .. })));
        assert!(VarSpec::signed("x", 0, 0).validate().is_err());
    }

    #[test]
    fn decode_examples() {
        let s = VarSpec::signed("x", 2, 0);
        assert_eq!(decode(&bits("111"), &s).unwrap(), -3.0);
        let neg_zero = decode(&bits("100"), &s).unwrap();
        assert_eq!(neg_zero, 0.0);
        assert!(neg_zero.is_sign_positive());
        assert_eq!(decode(&bits("010110"), &VarSpec::signed("x", 2, 3)).unwrap(), 2.75);
        assert!(matches!(
            decode(&bits("11"), &s),
            Err(EncodingError::LengthMismatch { expected: 3, got: 2, .. })
        ));
    }

    #[test]
    fn grid_round_trip_and_pitch() {
        for spec in [VarSpec::signed("x", 2, 2), VarSpec::unsigned("x", 3, 1), VarSpec::signed("x", 1, 0)] {
            let mut grid = Vec::new();
            for b in all_assignments(spec.width()) {
                let v = decode(&b, &spec).unwrap();
                let back = encode(v, &spec).unwrap();
                let negative_zero = spec.signed && b[0] && b[1..].iter().all(|x| !x);
                if !negative_zero {
                    assert_eq!(back, b, "{spec:?} {v}");
                }
                grid.push(v);
            }
            grid.sort_by(f64::total_cmp);
            grid.dedup();
            for w in grid.windows(2) {
                assert_eq!(w[1] - w[0], spec.pitch());
            }
        }
    }

    #[test]
    fn substitution_shapes() {
        let layout = DomainSpec::new(vec![VarSpec::signed("x", 1, 0)]).unwrap().layout().unwrap();
        let p = bit_substitution(&layout.entries[0], 2).unwrap();
        assert_eq!(p, BinaryPoly::from_terms(2, [(vec![1], 1.0), (vec![0, 1], -2.0)]).unwrap());

        let layout = DomainSpec::new(vec![VarSpec::unsigned("x", 2, 0)]).unwrap().layout().unwrap();
        let p = bit_substitution(&layout.entries[0], 2).unwrap();
        assert_eq!(p, BinaryPoly::from_terms(2, [(vec![0], 2.0), (vec![1], 1.0)]).unwrap());

        let spec = VarSpec::signed("x", 2, 1);
        let layout = DomainSpec::new(vec![spec.clone()]).unwrap().layout().unwrap();
        let p = bit_substitution(&layout.entries[0], 4).unwrap();
        // three magnitude terms and three sign-magnitude products
        assert_eq!(p.len(), 6);
        for b in all_assignments(4) {
            assert_eq!(p.evaluate(&b).unwrap(), decode(&b, &spec).unwrap());
        }
    }

    #[test]
    fn discretize_square() {
        let f = parse_objective("x^2").unwrap();
        let domain = DomainSpec::new(vec![VarSpec::signed("x", 1, 0)]).unwrap();
        let (p, layout) = discretize(&f, &domain).unwrap();
        assert_eq!(layout.total_bits, 2);
        assert_eq!(p, BinaryPoly::from_terms(2, [(vec![1], 1.0)]).unwrap());
    }

    #[test]
    fn discretize_worked_example_matches_decoding() {
        let f = parse_objective("x^2 + 2*x").unwrap();
        let domain = DomainSpec::new(vec![VarSpec::signed("x", 2, 0)]).unwrap();
        let (p, layout) = discretize(&f, &domain).unwrap();
        for b in all_assignments(3) {
            let x = decode(&b, &layout.entries[0].spec).unwrap();
            assert_eq!(p.evaluate(&b).unwrap(), x * x + 2.0 * x);
        }
        assert_eq!(p.evaluate(&bits("111")).unwrap(), 3.0);
        assert!(p.degree() <= 2);
    }

    #[test]
    fn discretize_rejects_unknown_variable() {
        let f = parse_objective("x*y").unwrap();
        let domain = DomainSpec::new(vec![VarSpec::signed("x", 2, 0)]).unwrap();
        assert_eq!(discretize(&f, &domain).unwrap_err(), EncodingError::UnknownVariable("y".into()));
        assert!(matches!(
            DomainSpec::new(vec![VarSpec::signed("x", 2, 0), VarSpec::signed("x", 1, 0)]),
            Err(EncodingError::DuplicateVariable(_))
        ));
    }

    #[test]
    fn layout_is_contiguous_in_declaration_order() {
        let domain = DomainSpec::new(vec![
            VarSpec::signed("x", 2, 1),
            VarSpec::unsigned("y", 3, 0),
            VarSpec::signed("z", 1, 2),
        ])
        .unwrap();
        let l = domain.layout().unwrap();
        let ranges: Vec<_> = l.entries.iter().map(LayoutEntry::range).collect();
        assert_eq!(ranges, vec![0..4, 4..7, 7..11]);
        assert_eq!(l.total_bits, 11);
        let values = l.decode_all(&l.encode_all(&[-1.5, 5.0, 0.75]).unwrap()).unwrap();
        assert_eq!(values, vec![("x".into(), -1.5), ("y".into(), 5.0), ("z".into(), 0.75)]);
    }

    #[test]
    fn rendering() {
        assert_eq!(render_bits(&bits("110110"), &VarSpec::signed("x", 2, 3)), "1 10,110");
        assert_eq!(render_bits(&bits("011"), &VarSpec::signed("x", 2, 0)), "0 11");
        assert_eq!(render_bits(&bits("101"), &VarSpec::unsigned("x", 2, 1)), "10,1");
    }
}
