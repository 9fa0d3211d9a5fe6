use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use super::{PolyError, Result, MAX_TABLE_BITS, MAX_TERMS};

/// A sorted, duplicate-free set of bit (or qubit) indices identifying one monomial.
///
/// Sets order by cardinality first and lexicographically second, so a
/// polynomial lists its constant, then linear, then quadratic terms, and so on.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn singleton(index: usize) -> Self {
        Self(vec![index])
    }

    /// Builds the set from arbitrary indices; duplicates collapse to one entry.
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn last_index(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self(out)
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self(out)
    }

    /// Basis-index mask of this set for a register of `width` qubits, where
    /// qubit 0 is the most significant bit.
    pub fn basis_mask(&self, width: usize) -> usize {
        self.0.iter().fold(0, |m, &i| m | (1 << (width - 1 - i)))
    }

    /// All subsets, the empty set first.
    pub(crate) fn subsets(&self) -> impl Iterator<Item = IndexSet> + '_ {
        let n = self.0.len();
        (0u64..(1u64 << n)).map(move |pick| {
            IndexSet(
                (0..n)
                    .filter(|b| pick >> b & 1 == 1)
                    .map(|b| self.0[b])
                    .collect(),
            )
        })
    }
}

impl Ord for IndexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for IndexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

impl From<&[usize]> for IndexSet {
    fn from(v: &[usize]) -> Self {
        Self::from_indices(v.iter().copied())
    }
}

impl<const N: usize> From<[usize; N]> for IndexSet {
    fn from(v: [usize; N]) -> Self {
        Self::from_indices(v)
    }
}

/// The reduction rule and value domain of a multilinear polynomial.
pub trait Algebra: Copy + Clone + fmt::Debug + Default + PartialEq + Eq + 'static {
    /// Type of one variable's value.
    type Value: Copy + fmt::Debug;

    /// Variable symbol used in rendering.
    const SYMBOL: char;

    /// Reduces a raw index multiset to a canonical set.
    fn reduce(indices: Vec<usize>) -> IndexSet;

    /// Canonical product of two monomials.
    fn product(a: &IndexSet, b: &IndexSet) -> IndexSet;

    /// Checks one variable value and converts it to a real number.
    fn value(index: usize, v: Self::Value) -> Result<f64>;

    /// Value of a variable for basis state `bit`.
    fn basis_value(bit: bool) -> Self::Value;

    /// In-place transform turning a coefficient vector (indexed by monomial
    /// mask) into the table of polynomial values over all basis states.
    fn tabulate(table: &mut [f64]);
}

/// Bits in `{0,1}` with `x² = x`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Boolean;

/// Spins in `{-1,+1}` with `s² = 1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Spin;

impl Algebra for Boolean {
    type Value = bool;
    const SYMBOL: char = 'x';

    fn reduce(indices: Vec<usize>) -> IndexSet {
        IndexSet::from_indices(indices)
    }

    fn product(a: &IndexSet, b: &IndexSet) -> IndexSet {
        a.union(b)
    }

    fn value(_index: usize, v: bool) -> Result<f64> {
        Ok(if v { 1.0 } else { 0.0 })
    }

    fn basis_value(bit: bool) -> bool {
        bit
    }

    // Superset-sum (zeta) transform: entry k gathers every monomial whose
    // mask is a subset of k.
    fn tabulate(table: &mut [f64]) {
        let len = table.len();
        let mut step = 1;
        while step < len {
            for idx in 0..len {
                if idx & step != 0 {
                    table[idx] += table[idx ^ step];
                }
            }
            step <<= 1;
        }
    }
}

impl Algebra for Spin {
    type Value = i8;
    const SYMBOL: char = 's';

    fn reduce(mut indices: Vec<usize>) -> IndexSet {
        indices.sort_unstable();
        let mut out: Vec<usize> = Vec::with_capacity(indices.len());
        for i in indices {
            if out.last() == Some(&i) {
                out.pop();
            } else {
                out.push(i);
            }
        }
        IndexSet(out)
    }

    fn product(a: &IndexSet, b: &IndexSet) -> IndexSet {
        a.symmetric_difference(b)
    }

    fn value(index: usize, v: i8) -> Result<f64> {
        match v {
            1 => Ok(1.0),
            -1 => Ok(-1.0),
            value => Err(PolyError::InvalidSpin { index, value }),
        }
    }

    fn basis_value(bit: bool) -> i8 {
        if bit {
            -1
        } else {
            1
        }
    }

    // Unnormalized Walsh-Hadamard transform: entry k is Σ_S c_S (-1)^|S∩k|.
    fn tabulate(table: &mut [f64]) {
        let len = table.len();
        let mut step = 1;
        while step < len {
            for block in (0..len).step_by(2 * step) {
                for idx in block..block + step {
                    let (a, b) = (table[idx], table[idx + step]);
                    table[idx] = a + b;
                    table[idx + step] = a - b;
                }
            }
            step <<= 1;
        }
    }
}

/// Real-weighted multilinear polynomial over `num_bits` indexed variables.
#[derive(Clone, PartialEq)]
pub struct MultilinearPoly<A: Algebra> {
    num_bits: usize,
    terms: BTreeMap<IndexSet, f64>,
    algebra: PhantomData<A>,
}

/// Pseudo-Boolean polynomial (PUBO; QUBO when the degree is at most two).
pub type BinaryPoly = MultilinearPoly<Boolean>;

/// Ising-form polynomial; each monomial is a product of Pauli-Z operators.
pub type SpinPoly = MultilinearPoly<Spin>;

impl<A: Algebra> MultilinearPoly<A> {
    pub fn zero(num_bits: usize) -> Self {
        Self {
            num_bits,
            terms: BTreeMap::new(),
            algebra: PhantomData,
        }
    }

    pub fn constant(num_bits: usize, c: f64) -> Self {
        let mut p = Self::zero(num_bits);
        p.accumulate(IndexSet::empty(), c);
        p
    }

    /// The single variable `index` with coefficient one.
    pub fn variable(num_bits: usize, index: usize) -> Result<Self> {
        Self::from_terms(num_bits, [(vec![index], 1.0)])
    }

    /// Builds a polynomial from raw `(indices, coefficient)` pairs, applying the
    /// algebra's reduction rule and merging equal monomials.
    pub fn from_terms<I, T>(num_bits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, f64)>,
        T: Into<Vec<usize>>,
    {
        let mut p = Self::zero(num_bits);
        for (indices, c) in terms {
            let set = A::reduce(indices.into());
            if let Some(index) = set.last_index().filter(|&i| i >= num_bits) {
                return Err(PolyError::IndexOutOfRange { index, num_bits });
            }
            p.accumulate(set, c);
            p.check_capacity()?;
        }
        Ok(p)
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    /// Number of stored (non-zero) terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexSet, f64)> + '_ {
        self.terms.iter().map(|(k, &c)| (k, c))
    }

    pub fn coefficient(&self, indices: &[usize]) -> f64 {
        self.terms
            .get(&A::reduce(indices.to_vec()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&[])
    }

    /// Largest monomial cardinality; zero for a constant (or zero) polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(IndexSet::len).max().unwrap_or(0)
    }

    /// The same polynomial declared over a wider register.
    pub fn widen(&self, num_bits: usize) -> Result<Self> {
        if num_bits < self.num_bits {
            return Err(PolyError::DimensionMismatch {
                left: self.num_bits,
                right: num_bits,
            });
        }
        Ok(Self {
            num_bits,
            terms: self.terms.clone(),
            algebra: PhantomData,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let mut out = self.clone();
        for (k, &c) in &other.terms {
            out.accumulate(k.clone(), c);
        }
        out.check_capacity()?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = Self::zero(self.num_bits);
        for (k, &c) in &self.terms {
            out.accumulate(k.clone(), c * factor);
        }
        out
    }

    pub fn add_constant(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.accumulate(IndexSet::empty(), c);
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let mut out = Self::zero(self.num_bits);
        for (ka, &ca) in &self.terms {
            for (kb, &cb) in &other.terms {
                out.accumulate(A::product(ka, kb), ca * cb);
            }
            out.check_capacity()?;
        }
        Ok(out)
    }

    /// `self^k` by binary exponentiation; `k = 0` yields the constant one.
    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut result = Self::constant(self.num_bits, 1.0);
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

    pub fn evaluate(&self, values: &[A::Value]) -> Result<f64> {
        if values.len() != self.num_bits {
            return Err(PolyError::AssignmentLength {
                expected: self.num_bits,
                got: values.len(),
            });
        }
        let reals = values
            .iter()
            .enumerate()
            .map(|(i, &v)| A::value(i, v))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self
            .terms
            .iter()
            .map(|(k, &c)| c * k.iter().map(|i| reals[i]).product::<f64>())
            .sum())
    }

    /// Value at computational-basis state `index` (qubit 0 most significant).
    pub fn evaluate_basis(&self, index: usize) -> f64 {
        let n = self.num_bits;
        let values: Vec<A::Value> = (0..n)
            .map(|q| A::basis_value(index >> (n - 1 - q) & 1 == 1))
            .collect();
        self.evaluate(&values)
            .expect("basis assignment always has valid length and values")
    }

    /// Values over all `2^num_bits` basis states, qubit 0 most significant.
    pub fn energy_table(&self) -> Result<Vec<f64>> {
        if self.num_bits > MAX_TABLE_BITS {
            return Err(PolyError::TableCapacity {
                bits: self.num_bits,
                limit: MAX_TABLE_BITS,
            });
        }
        let mut table = vec![0.0; 1 << self.num_bits];
        for (k, &c) in &self.terms {
            table[k.basis_mask(self.num_bits)] += c;
        }
        A::tabulate(&mut table);
        Ok(table)
    }

    pub(crate) fn accumulate(&mut self, key: IndexSet, c: f64) {
        if c == 0.0 {
            return;
        }
        let slot = self.terms.entry(key);
        match slot {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + c;
                if sum == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.num_bits != other.num_bits {
            return Err(PolyError::DimensionMismatch {
                left: self.num_bits,
                right: other.num_bits,
            });
        }
        Ok(())
    }

    fn check_capacity(&self) -> Result<()> {
        if self.terms.len() > MAX_TERMS {
            return Err(PolyError::Capacity { limit: MAX_TERMS });
        }
        Ok(())
    }
}

impl<A: Algebra> fmt::Debug for MultilinearPoly<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} bits] {{", self.num_bits)?;
        for (n, (k, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k:?}: {c}")?;
        }
        f.write_str("}")
    }
}

impl<A: Algebra> fmt::Display for MultilinearPoly<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, (k, &c)) in self.terms.iter().enumerate() {
            let mag = if n == 0 {
                write!(f, "{}", if c < 0.0 { "-" } else { "" })?;
                c.abs()
            } else {
                f.write_str(if c < 0.0 { " - " } else { " + " })?;
                c.abs()
            };
            if k.is_empty() {
                write!(f, "{mag}")?;
                continue;
            }
            if mag != 1.0 {
                write!(f, "{mag}*")?;
            }
            for (j, i) in k.iter().enumerate() {
                if j > 0 {
                    f.write_str("*")?;
                }
                write!(f, "{}{}", A::SYMBOL, i)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(n: usize, terms: &[(&[usize], f64)]) -> BinaryPoly {
        BinaryPoly::from_terms(n, terms.iter().map(|(k, c)| (k.to_vec(), *c))).unwrap()
    }

    fn sp(n: usize, terms: &[(&[usize], f64)]) -> SpinPoly {
        SpinPoly::from_terms(n, terms.iter().map(|(k, c)| (k.to_vec(), *c))).unwrap()
    }

    fn all_bits(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0..1usize << n).map(move |k| (0..n).map(|i| k >> i & 1 == 1).collect())
    }

    #[test]
    fn add_merges_and_keeps_disjoint_terms() {
        let a = bp(1, &[(&[], 2.0)]);
        let b = bp(1, &[(&[0], 3.0)]);
        let s = a.add(&b).unwrap();
        assert_eq!(s, bp(1, &[(&[], 2.0), (&[0], 3.0)]));
        assert_eq!(s.add(&s.scale(-1.0)).unwrap(), BinaryPoly::zero(1));
    }

    #[test]
    fn add_rejects_dimension_mismatch() {
        let err = bp(2, &[]).add(&bp(3, &[])).unwrap_err();
        assert_eq!(err, PolyError::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn idempotence_rules() {
        let x = bp(1, &[(&[0], 1.0)]);
        assert_eq!(x.mul(&x).unwrap(), x);
        let s = sp(1, &[(&[0], 1.0)]);
        assert_eq!(s.mul(&s).unwrap(), sp(1, &[(&[], 1.0)]));
        assert_eq!(s.pow(4).unwrap(), sp(1, &[(&[], 1.0)]));
        assert_eq!(s.pow(3).unwrap(), s);
        // repeated indices at construction
        assert_eq!(bp(2, &[(&[1, 1, 0], 2.0)]), bp(2, &[(&[0, 1], 2.0)]));
        assert_eq!(sp(2, &[(&[1, 1, 0], 2.0)]), sp(2, &[(&[0], 2.0)]));
    }

    #[test]
    fn square_of_weighted_sum() {
        let p = bp(3, &[(&[1], 2.0), (&[2], 1.0)]);
        let sq = p.mul(&p).unwrap();
        assert_eq!(sq, bp(3, &[(&[1], 4.0), (&[2], 1.0), (&[1, 2], 4.0)]));
        for b in all_bits(3) {
            let v = p.evaluate(&b).unwrap();
            assert_eq!(sq.evaluate(&b).unwrap(), v * v);
        }
    }

    #[test]
    fn sign_factor_squares_to_one() {
        let p = bp(1, &[(&[0], 2.0), (&[], -1.0)]);
        assert_eq!(p.pow(2).unwrap(), bp(1, &[(&[], 1.0)]));
        assert_eq!(p.pow(0).unwrap(), BinaryPoly::constant(1, 1.0));
    }

    #[test]
    fn evaluate_errors() {
        let p = bp(2, &[(&[0, 1], 4.0)]);
        assert_eq!(p.evaluate(&[true, false]).unwrap(), 0.0);
        assert!(matches!(
            p.evaluate(&[true]),
            Err(PolyError::AssignmentLength { expected: 2, got: 1 })
        ));
        let s = sp(2, &[(&[0], 1.0)]);
        assert_eq!(
            s.evaluate(&[1, 0]).unwrap_err(),
            PolyError::InvalidSpin { index: 1, value: 0 }
        );
        assert!(matches!(
            BinaryPoly::variable(2, 2),
            Err(PolyError::IndexOutOfRange { index: 2, num_bits: 2 })
        ));
    }

    #[test]
    fn ordering_is_degree_then_lexicographic() {
        let p = bp(3, &[(&[1, 2], 1.0), (&[2], 1.0), (&[], 1.0), (&[0, 1], 1.0), (&[0], 1.0)]);
        let keys: Vec<Vec<usize>> = p.terms().map(|(k, _)| k.as_slice().to_vec()).collect();
        assert_eq!(keys, vec![vec![], vec![0], vec![2], vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn energy_tables_match_pointwise_evaluation() {
        let p = bp(3, &[(&[], 1.5), (&[0], -2.0), (&[0, 2], 3.0), (&[0, 1, 2], 0.25)]);
        let t = p.energy_table().unwrap();
        for (k, &e) in t.iter().enumerate() {
            assert_eq!(e, p.evaluate_basis(k));
        }
        let s = sp(3, &[(&[], 1.0), (&[1], -0.5), (&[0, 2], 2.0), (&[0, 1, 2], 4.0)]);
        let t = s.energy_table().unwrap();
        for (k, &e) in t.iter().enumerate() {
            assert_eq!(e, s.evaluate_basis(k));
        }
        // qubit 0 is the most significant basis bit
        let z0 = sp(2, &[(&[0], 1.0)]);
        assert_eq!(z0.energy_table().unwrap(), vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn table_capacity_guard() {
        let p = BinaryPoly::zero(MAX_TABLE_BITS + 1);
        assert!(p.energy_table().unwrap_err().is_capacity());
    }

    #[test]
    fn display_is_canonical() {
        let p = bp(3, &[(&[0, 1], -4.0), (&[], 2.0), (&[2], 1.0)]);
        assert_eq!(p.to_string(), "2 + x2 - 4*x0*x1");
        assert_eq!(format!("{p:?}"), "[3 bits] {{}: 2, {2}: 1, {0,1}: -4}");
    }
}
