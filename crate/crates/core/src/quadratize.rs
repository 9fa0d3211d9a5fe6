//! Degree reduction of PUBO polynomials to QUBO form.
//!
//! Each step picks the pair of bits `(i, j)` shared by the most terms of
//! degree three or more (ties go to the lexicographically smallest pair),
//! replaces `x_i x_j` by a fresh ancilla `z` in those terms, and adds the
//! penalty
//!
//! ```text
//! M · (x_i x_j - 2 (x_i + x_j) z + 3 z)
//! ```
//!
//! which is zero when `z = x_i x_j` and at least `M` otherwise. With
//! `M = 1 + 2 Σ|c|` over the rewritten terms, violating the constraint always
//! costs more than it can gain, so minimizing over the ancillae recovers the
//! original polynomial exactly.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::poly::{BinaryPoly, IndexSet, PolyError, MAX_TABLE_BITS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("verification over {bits} bits exceeds the enumeration limit of {limit}")]
    Capacity { bits: usize, limit: usize },
    #[error("original polynomial has {got} bits but the quadratization expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

impl QuadError {
    pub fn is_capacity(&self) -> bool {
        match self {
            QuadError::Capacity { .. } => true,
            QuadError::Poly(e) => e.is_capacity(),
            QuadError::DimensionMismatch { .. } => false,
        }
    }
}

/// How the weight of each penalty term is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PenaltyRule {
    /// `1 + 2 Σ|c|` over the rewritten terms; sound for any signs.
    #[default]
    Dominating,
    /// `2 Σ c` (signed). Matches the textbook single-term example but is
    /// unsound as soon as a rewritten coefficient is negative.
    TwiceCoefficient,
}

/// One ancilla introduced for the product of `pair`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Substitution {
    pub ancilla: usize,
    pub pair: (usize, usize),
    pub penalty_weight: f64,
    /// Number of terms rewritten when the ancilla was introduced.
    pub rewritten_terms: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratizationResult {
    pub qubo: BinaryPoly,
    pub num_original_bits: usize,
    pub num_ancilla: usize,
    pub substitutions: Vec<Substitution>,
}

impl QuadratizationResult {
    pub fn penalty_weights(&self) -> Vec<f64> {
        self.substitutions.iter().map(|s| s.penalty_weight).collect()
    }

    pub fn total_bits(&self) -> usize {
        self.num_original_bits + self.num_ancilla
    }
}

/// Reduces `p` to degree at most two with the sound penalty rule.
pub fn quadratize(p: &BinaryPoly) -> Result<QuadratizationResult, QuadError> {
    quadratize_with(p, PenaltyRule::Dominating)
}

pub fn quadratize_with(p: &BinaryPoly, rule: PenaltyRule) -> Result<QuadratizationResult, QuadError> {
    let num_original_bits = p.num_bits();
    let mut current = p.clone();
    let mut substitutions = Vec::new();

    while let Some(pair) = most_shared_pair(&current) {
        let (i, j) = pair;
        let z = current.num_bits();
        let affected: Vec<(IndexSet, f64)> = current
            .terms()
            .filter(|(k, _)| k.len() >= 3 && k.contains(i) && k.contains(j))
            .map(|(k, c)| (k.clone(), c))
            .collect();
        let weight = match rule {
            PenaltyRule::Dominating => 1.0 + 2.0 * affected.iter().map(|(_, c)| c.abs()).sum::<f64>(),
            PenaltyRule::TwiceCoefficient => 2.0 * affected.iter().map(|(_, c)| c).sum::<f64>(),
        };

        let mut next = current.widen(z + 1)?;
        for (set, c) in &affected {
            next.accumulate(set.clone(), -c);
            let reduced = IndexSet::from_indices(set.iter().filter(|&b| b != i && b != j).chain([z]));
            next.accumulate(reduced, *c);
        }
        let penalty = BinaryPoly::from_terms(
            z + 1,
            [
                (vec![i, j], weight),
                (vec![i, z], -2.0 * weight),
                (vec![j, z], -2.0 * weight),
                (vec![z], 3.0 * weight),
            ],
        )?;
        current = next.add(&penalty)?;
        substitutions.push(Substitution {
            ancilla: z,
            pair,
            penalty_weight: weight,
            rewritten_terms: affected.len(),
        });
    }

    Ok(QuadratizationResult {
        num_ancilla: current.num_bits() - num_original_bits,
        qubo: current,
        num_original_bits,
        substitutions,
    })
}

/// The pair occurring in the most terms of degree ≥ 3, if any such term exists.
fn most_shared_pair(p: &BinaryPoly) -> Option<(usize, usize)> {
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (set, _) in p.terms().filter(|(k, _)| k.len() >= 3) {
        let idx = set.as_slice();
        for a in 0..idx.len() {
            for b in a + 1..idx.len() {
                *counts.entry((idx[a], idx[b])).or_default() += 1;
            }
        }
    }
    // first maximum in key order is the lexicographically smallest
    let mut best: Option<((usize, usize), usize)> = None;
    for (pair, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((pair, c));
        }
    }
    best.map(|(pair, _)| pair)
}

/// A single original assignment where the reduction disagrees.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    /// Basis index over the original bits (bit 0 most significant).
    pub original_index: usize,
    pub expected: f64,
    pub qubo_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub total_bits: usize,
    pub assignments_checked: usize,
    pub mismatches: usize,
    pub first_counterexample: Option<Counterexample>,
    pub original_min: f64,
    pub qubo_min: f64,
    /// The sets of original assignments attaining the global minimum coincide.
    pub argmin_agree: bool,
    /// Every joint minimizer sets each ancilla to the product of its pair.
    pub ancillas_consistent: bool,
    pub passed: bool,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Exhaustively checks that minimizing the QUBO over its ancillae reproduces
/// the original polynomial on every original assignment.
pub fn verify_quadratization(
    original: &BinaryPoly,
    result: &QuadratizationResult,
) -> Result<VerificationReport, QuadError> {
    let n = result.num_original_bits;
    let total = result.total_bits();
    if original.num_bits() != n {
        return Err(QuadError::DimensionMismatch {
            expected: n,
            got: original.num_bits(),
        });
    }
    if total > MAX_TABLE_BITS {
        return Err(QuadError::Capacity {
            bits: total,
            limit: MAX_TABLE_BITS,
        });
    }
    let p_table = original.energy_table()?;
    let q_table = result.qubo.energy_table()?;
    let block = 1usize << result.num_ancilla;

    // with qubit 0 most significant, ancillae occupy the low-order bits
    let q_min: Vec<f64> = q_table
        .chunks(block)
        .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
        .collect();

    let mut mismatches = 0;
    let mut first = None;
    for (k, (&p, &q)) in p_table.iter().zip(&q_min).enumerate() {
        if !close(p, q) {
            mismatches += 1;
            first.get_or_insert(Counterexample {
                original_index: k,
                expected: p,
                qubo_min: q,
            });
        }
    }

    let original_min = p_table.iter().copied().fold(f64::INFINITY, f64::min);
    let qubo_min = q_min.iter().copied().fold(f64::INFINITY, f64::min);
    let p_argmin: Vec<usize> = (0..p_table.len()).filter(|&k| close(p_table[k], original_min)).collect();
    let q_argmin: Vec<usize> = (0..q_min.len()).filter(|&k| close(q_min[k], qubo_min)).collect();
    let argmin_agree = p_argmin == q_argmin;

    let bit = |state: usize, b: usize| state >> (total - 1 - b) & 1 == 1;
    let ancillas_consistent = (0..q_table.len())
        .filter(|&s| close(q_table[s], qubo_min))
        .all(|s| {
            result
                .substitutions
                .iter()
                .all(|sub| bit(s, sub.ancilla) == (bit(s, sub.pair.0) && bit(s, sub.pair.1)))
        });

    Ok(VerificationReport {
        total_bits: total,
        assignments_checked: p_table.len(),
        mismatches,
        first_counterexample: first,
        original_min,
        qubo_min,
        argmin_agree,
        ancillas_consistent,
        passed: mismatches == 0 && argmin_agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(alpha: f64) -> BinaryPoly {
        BinaryPoly::from_terms(3, [(vec![0, 1, 2], alpha)]).unwrap()
    }

    #[test]
    fn quadratic_input_is_untouched() {
        let p = BinaryPoly::from_terms(3, [(vec![0, 1], 2.0), (vec![2], -1.0), (vec![], 4.0)]).unwrap();
        let r = quadratize(&p).unwrap();
        assert_eq!(r.qubo, p);
        assert_eq!(r.num_ancilla, 0);
        assert!(r.substitutions.is_empty());
    }

    #[test]
    fn single_cubic_term_has_the_textbook_shape() {
        let r = quadratize(&cubic(1.0)).unwrap();
        assert_eq!(r.num_ancilla, 1);
        assert_eq!(r.substitutions[0].pair, (0, 1));
        assert_eq!(r.penalty_weights(), vec![3.0]);
        let m = 3.0;
        let expected = BinaryPoly::from_terms(
            4,
            [
                (vec![2, 3], 1.0),
                (vec![0, 1], m),
                (vec![0, 3], -2.0 * m),
                (vec![1, 3], -2.0 * m),
                (vec![3], 3.0 * m),
            ],
        )
        .unwrap();
        assert_eq!(r.qubo, expected);
        let report = verify_quadratization(&cubic(1.0), &r).unwrap();
        assert!(report.passed && report.ancillas_consistent, "{report:?}");
    }

    #[test]
    fn literal_weight_matches_textbook_and_fails_for_negative_coefficient() {
        let r = quadratize_with(&cubic(1.0), PenaltyRule::TwiceCoefficient).unwrap();
        // α z x2 + 2α (x0 x1 - 2 (x0 + x1) z + 3 z) with α = 1
        let expected = BinaryPoly::from_terms(
            4,
            [(vec![2, 3], 1.0), (vec![0, 1], 2.0), (vec![0, 3], -4.0), (vec![1, 3], -4.0), (vec![3], 6.0)],
        )
        .unwrap();
        assert_eq!(r.qubo, expected);
        assert!(verify_quadratization(&cubic(1.0), &r).unwrap().passed);

        let r = quadratize_with(&cubic(-1.0), PenaltyRule::TwiceCoefficient).unwrap();
        let report = verify_quadratization(&cubic(-1.0), &r).unwrap();
        assert!(!report.passed);
        assert!(report.mismatches > 0);
        assert!(report.first_counterexample.is_some());
    }

    #[test]
    fn negative_coefficient_is_sound_with_dominating_rule() {
        let p = cubic(-1.0);
        let r = quadratize(&p).unwrap();
        let report = verify_quadratization(&p, &r).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.assignments_checked, 8);
    }

    #[test]
    fn ties_break_lexicographically_and_frequency_wins() {
        // (1,2) is shared by both quartic-ish terms; (0,1) only by one
        let p = BinaryPoly::from_terms(4, [(vec![0, 1, 2], 1.0), (vec![1, 2, 3], 1.0)]).unwrap();
        let r = quadratize(&p).unwrap();
        assert_eq!(r.substitutions[0].pair, (1, 2));
        assert_eq!(r.substitutions[0].rewritten_terms, 2);
        assert_eq!(r.substitutions[0].penalty_weight, 5.0);
        assert_eq!(r.num_ancilla, 1);
        assert!(verify_quadratization(&p, &r).unwrap().passed);
    }

    #[test]
    fn quartic_needs_nested_ancillae() {
        let p = BinaryPoly::from_terms(
            5,
            [(vec![0, 1, 2, 3], -3.0), (vec![1, 2, 3, 4], 2.0), (vec![0, 2, 4], -1.5), (vec![0], 1.0)],
        )
        .unwrap();
        let r = quadratize(&p).unwrap();
        assert!(r.qubo.degree() <= 2);
        assert!(r.num_ancilla >= 2);
        for (k, s) in r.substitutions.iter().enumerate() {
            assert_eq!(s.ancilla, 5 + k);
        }
        let report = verify_quadratization(&p, &r).unwrap();
        assert!(report.passed && report.ancillas_consistent, "{report:?}");
        // deterministic
        assert_eq!(quadratize(&p).unwrap(), r);
    }

    #[test]
    fn verification_guards() {
        let r = quadratize(&cubic(1.0)).unwrap();
        assert!(matches!(
            verify_quadratization(&BinaryPoly::zero(2), &r),
            Err(QuadError::DimensionMismatch { expected: 3, got: 2 })
        ));
        let wide = BinaryPoly::zero(MAX_TABLE_BITS + 1);
        let r = quadratize(&wide).unwrap();
        assert!(verify_quadratization(&wide, &r).unwrap_err().is_capacity());
    }
}
