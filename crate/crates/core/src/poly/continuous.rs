use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{BinaryPoly, PolyError, Result, MAX_TERMS};

/// Product of named variables raised to positive powers, sorted by name.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(String, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn var(name: impl Into<String>, exponent: u32) -> Self {
        if exponent == 0 {
            Self::one()
        } else {
            Self(vec![(name.into(), exponent)])
        }
    }

    /// Builds a monomial from `(name, exponent)` factors; repeated names add
    /// exponents and zero exponents are dropped.
    pub fn from_factors<S: Into<String>>(factors: impl IntoIterator<Item = (S, u32)>) -> Self {
        let mut map: BTreeMap<String, u32> = BTreeMap::new();
        for (name, e) in factors {
            *map.entry(name.into()).or_default() += e;
        }
        Self(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn factors(&self) -> &[(String, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, name: &str) -> u32 {
        self.0
            .iter()
            .find(|(n, _)| n == name)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    fn times(&self, other: &Self) -> Self {
        Self::from_factors(
            self.0
                .iter()
                .chain(other.0.iter())
                .map(|(n, e)| (n.clone(), *e)),
        )
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (name, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Multivariate real polynomial over named variables.
#[derive(Clone, PartialEq, Default)]
pub struct ContinuousPoly {
    terms: BTreeMap<Monomial, f64>,
}

impl ContinuousPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms([(Monomial::one(), c)])
    }

    pub fn variable(name: impl Into<String>) -> Self {
        Self::from_terms([(Monomial::var(name, 1), 1.0)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, f64)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.accumulate(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, monomial: &Monomial) -> f64 {
        self.terms.get(monomial).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(n, _)| n.clone()))
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.accumulate(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, &c)| (m.clone(), c * factor)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                out.accumulate(ma.times(mb), ca * cb);
            }
            if out.terms.len() > MAX_TERMS {
                return Err(PolyError::Capacity { limit: MAX_TERMS });
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut result = Self::constant(1.0);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Evaluates with variable values supplied by `lookup`.
    pub fn evaluate(&self, lookup: impl Fn(&str) -> Option<f64>) -> Result<f64> {
        let mut total = 0.0;
        for (m, &c) in &self.terms {
            let mut v = c;
            for (name, e) in &m.0 {
                let x = lookup(name).ok_or_else(|| PolyError::MissingVariable(name.clone()))?;
                v *= x.powi(*e as i32);
            }
            total += v;
        }
        Ok(total)
    }

    /// Evaluates at a point given as `(name, value)` pairs.
    pub fn evaluate_at(&self, point: &[(&str, f64)]) -> Result<f64> {
        self.evaluate(|name| point.iter().find(|(n, _)| *n == name).map(|&(_, v)| v))
    }

    /// Replaces every variable by a pseudo-Boolean polynomial over `num_bits`
    /// bits and expands the result under Boolean algebra.
    pub fn substitute(
        &self,
        num_bits: usize,
        replacements: &BTreeMap<String, BinaryPoly>,
    ) -> Result<BinaryPoly> {
        for r in replacements.values() {
            if r.num_bits() != num_bits {
                return Err(PolyError::DimensionMismatch {
                    left: num_bits,
                    right: r.num_bits(),
                });
            }
        }
        // powers[name][e-1] = replacement^e, built on demand
        let mut powers: BTreeMap<&str, Vec<BinaryPoly>> = BTreeMap::new();
        let mut out = BinaryPoly::zero(num_bits);
        for (m, &c) in &self.terms {
            let mut term = BinaryPoly::constant(num_bits, c);
            for (name, e) in &m.0 {
                let base = replacements
                    .get(name)
                    .ok_or_else(|| PolyError::MissingVariable(name.clone()))?;
                let cache = powers.entry(name.as_str()).or_insert_with(|| vec![base.clone()]);
                while cache.len() < *e as usize {
                    let next = cache.last().expect("cache starts non-empty").mul(base)?;
                    cache.push(next);
                }
                term = term.mul(&cache[*e as usize - 1])?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    fn accumulate(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }
}

impl fmt::Debug for ContinuousPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, (m, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{m:?}: {c}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for ContinuousPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        // highest degree first reads like ordinary notation
        for (n, (m, &c)) in self.terms.iter().rev().enumerate() {
            if n == 0 {
                if c < 0.0 {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c < 0.0 { " - " } else { " + " })?;
            }
            let mag = c.abs();
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag == 1.0 {
                write!(f, "{m:?}")?;
            } else {
                write!(f, "{mag}*{m:?}")?;
            }
        }
        Ok(())
    }
}
