//! Permutations of `d` items and their action on parameter vectors.
//!
//! A permutation `φ` is stored as its mapping array, `mapping[j] = φ(j)`. It
//! acts on a vector through the row-representation permutation matrix, so the
//! entry at index `j` moves to index `φ(j)`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on `d!` for exhaustive enumeration (`10!`).
pub const DEFAULT_ENUMERATION_BOUND: u128 = 3_628_800;

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

pub(crate) fn cmp_entries(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Rejects NaN/inf and folds `-0.0` into `0.0` so exact equality and the
/// total order agree.
pub(crate) fn canonical_entries(mut entries: Vec<f64>) -> Result<Vec<f64>> {
    for (index, v) in entries.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if *v == 0.0 {
            *v = 0.0;
        }
    }
    Ok(entries)
}

/// A real vector of length `d` with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        canonical_entries(entries).map(Self)
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        Self(entries.iter().map(|&v| v as f64).collect())
    }

    pub fn constant(d: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn neg(&self) -> Self {
        Self(
            self.0
                .iter()
                .map(|v| if *v == 0.0 { 0.0 } else { -v })
                .collect(),
        )
    }

    /// Size of the stabilizer subgroup: the product of the factorials of the
    /// entry multiplicities.
    pub fn stabilizer_size(&self) -> u128 {
        let mut sorted = self.0.clone();
        sorted.sort_by(f64::total_cmp);
        let mut size = 1u128;
        let mut run = 1usize;
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                size *= factorial(run);
                run = 1;
            }
        }
        if !sorted.is_empty() {
            size *= factorial(run);
        }
        size
    }

    pub fn has_unique_entries(&self) -> bool {
        let mut sorted = self.0.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.windows(2).all(|w| w[0] != w[1])
    }
}

impl TryFrom<Vec<f64>> for ParameterVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ParameterVector> for Vec<f64> {
    fn from(value: ParameterVector) -> Self {
        value.0
    }
}

impl Eq for ParameterVector {}

impl PartialOrd for ParameterVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ParameterVector {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_entries(&self.0, &other.0)
    }
}

impl fmt::Display for ParameterVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| format!("{v}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// An element of the symmetric group `S_d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let d = mapping.len();
        let mut seen = vec![false; d];
        for &m in &mapping {
            if m >= d || seen[m] {
                return Err(Error::InvalidPermutation(mapping));
            }
            seen[m] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            mapping: (0..d).collect(),
        }
    }

    /// The transposition `i <-> j` on `d` items. `i == j` yields the identity.
    pub fn transposition(d: usize, i: usize, j: usize) -> Result<Self> {
        if i >= d || j >= d {
            return Err(Error::InvalidParameter(format!(
                "transposition ({i} {j}) out of range for d={d}"
            )));
        }
        let mut mapping: Vec<usize> = (0..d).collect();
        mapping.swap(i, j);
        Ok(Self { mapping })
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn apply(&self, j: usize) -> usize {
        self.mapping[j]
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(j, &m)| j == m)
    }

    /// Number of moved points.
    pub fn support_size(&self) -> usize {
        self.mapping
            .iter()
            .enumerate()
            .filter(|(j, &m)| *j != m)
            .count()
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if self.len() != d {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: d,
            });
        }
        Ok(())
    }

    /// `(self ∘ q)(j) = self(q(j))`.
    pub fn compose(&self, q: &Permutation) -> Result<Permutation> {
        self.check_dim(q.len())?;
        Ok(Permutation {
            mapping: q.mapping.iter().map(|&j| self.mapping[j]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (j, &m) in self.mapping.iter().enumerate() {
            inv[m] = j;
        }
        Permutation { mapping: inv }
    }

    pub fn is_involution(&self) -> bool {
        self.mapping
            .iter()
            .enumerate()
            .all(|(j, &m)| self.mapping[m] == j)
    }

    /// `result[φ(j)] = v[j]`.
    pub fn act_slice(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v.len())?;
        let mut out = vec![0.0; v.len()];
        for (j, &x) in v.iter().enumerate() {
            out[self.mapping[j]] = x;
        }
        Ok(out)
    }

    pub fn act_vector(&self, v: &ParameterVector) -> Result<ParameterVector> {
        Ok(ParameterVector(self.act_slice(v.as_slice())?))
    }

    /// Elementwise action on a set of vectors; the result is sorted and
    /// deduplicated.
    pub fn act_set(&self, set: &[ParameterVector]) -> Result<Vec<ParameterVector>> {
        let mut out = set
            .iter()
            .map(|v| self.act_vector(v))
            .collect::<Result<Vec<_>>>()?;
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(value: Vec<usize>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(value: Permutation) -> Self {
        value.mapping
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.mapping.iter().map(|m| m.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Rearranges `slice` into the next lexicographically greater ordering.
/// Returns `false` (leaving the slice sorted ascending) after the last one.
pub fn next_permutation<T: Ord>(slice: &mut [T]) -> bool {
    let n = slice.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && slice[i - 1] >= slice[i] {
        i -= 1;
    }
    if i == 0 {
        slice.reverse();
        return false;
    }
    let mut j = n - 1;
    while slice[j] <= slice[i - 1] {
        j -= 1;
    }
    slice.swap(i - 1, j);
    slice[i..].reverse();
    true
}

/// All of `S_d` in lexicographic order of the mapping arrays.
pub struct Permutations {
    current: Option<Vec<usize>>,
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let cur = self.current.take()?;
        let mut next = cur.clone();
        if next_permutation(&mut next) {
            self.current = Some(next);
        }
        Some(Permutation { mapping: cur })
    }
}

pub fn all_permutations(d: usize, bound: u128) -> Result<Permutations> {
    let needed = factorial(d);
    if needed > bound {
        return Err(Error::BoundExceeded {
            what: "permutations of S_d",
            needed,
            bound,
        });
    }
    Ok(Permutations {
        current: Some((0..d).collect()),
    })
}

/// Every `φ` with `φ² = id` on `d ≤ 10` items, ordered by support size and then
/// lexicographically by mapping.
pub fn enumerate_involutions(d: usize) -> Result<Vec<Permutation>> {
    if d > 10 {
        return Err(Error::BoundExceeded {
            what: "involutions of S_d",
            needed: factorial(d),
            bound: DEFAULT_ENUMERATION_BOUND,
        });
    }
    let mut out = Vec::new();
    let mut mapping: Vec<usize> = (0..d).collect();
    let mut used = vec![false; d];
    build_involutions(0, &mut mapping, &mut used, &mut out);
    out.sort_by(|a, b| {
        a.support_size()
            .cmp(&b.support_size())
            .then_with(|| a.cmp(b))
    });
    Ok(out)
}

fn build_involutions(
    start: usize,
    mapping: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Permutation>,
) {
    let d = mapping.len();
    let Some(i) = (start..d).find(|&i| !used[i]) else {
        out.push(Permutation {
            mapping: mapping.clone(),
        });
        return;
    };
    used[i] = true;
    mapping[i] = i;
    build_involutions(i + 1, mapping, used, out);
    for j in i + 1..d {
        if used[j] {
            continue;
        }
        used[j] = true;
        mapping[i] = j;
        mapping[j] = i;
        build_involutions(i + 1, mapping, used, out);
        mapping[j] = j;
        mapping[i] = i;
        used[j] = false;
    }
    used[i] = false;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainPredicate {
    All,
    PositiveOrthant,
    UniqueEntries,
    PositiveAndUnique,
}

impl DomainPredicate {
    pub fn name(self) -> &'static str {
        match self {
            DomainPredicate::All => "all",
            DomainPredicate::PositiveOrthant => "positive-orthant",
            DomainPredicate::UniqueEntries => "unique-entries",
            DomainPredicate::PositiveAndUnique => "positive-and-unique",
        }
    }

    pub fn contains(self, v: &ParameterVector) -> bool {
        let positive = || v.as_slice().iter().all(|&x| x > 0.0);
        match self {
            DomainPredicate::All => true,
            DomainPredicate::PositiveOrthant => positive(),
            DomainPredicate::UniqueEntries => v.has_unique_entries(),
            DomainPredicate::PositiveAndUnique => positive() && v.has_unique_entries(),
        }
    }

    fn parse(name: &str) -> Result<Self> {
        match name.trim() {
            "all" => Ok(DomainPredicate::All),
            "positive-orthant" => Ok(DomainPredicate::PositiveOrthant),
            "unique-entries" => Ok(DomainPredicate::UniqueEntries),
            "positive-and-unique" => Ok(DomainPredicate::PositiveAndUnique),
            other => Err(Error::InvalidParameter(format!(
                "unknown domain predicate `{other}`"
            ))),
        }
    }
}

/// The parameter set `Θ`, as a conjunction of named built-in predicates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ParameterDomain {
    clauses: Vec<DomainPredicate>,
}

impl ParameterDomain {
    pub fn all() -> Self {
        Self {
            clauses: vec![DomainPredicate::All],
        }
    }

    pub fn from_predicate(p: DomainPredicate) -> Self {
        Self { clauses: vec![p] }
    }

    pub fn conjunction(mut clauses: Vec<DomainPredicate>) -> Self {
        clauses.sort();
        clauses.dedup();
        if clauses.is_empty() {
            clauses.push(DomainPredicate::All);
        }
        Self { clauses }
    }

    /// Parses `name` or `name & name & ...`.
    pub fn parse(text: &str) -> Result<Self> {
        let clauses = text
            .split('&')
            .map(DomainPredicate::parse)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::conjunction(clauses))
    }

    pub fn contains(&self, v: &ParameterVector) -> bool {
        self.clauses.iter().all(|c| c.contains(v))
    }

    pub fn is_all(&self) -> bool {
        self.clauses.iter().all(|c| *c == DomainPredicate::All)
    }
}

impl Default for ParameterDomain {
    fn default() -> Self {
        Self::all()
    }
}

impl fmt::Display for ParameterDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.clauses.iter().map(|c| c.name()).collect();
        write!(f, "{}", names.join(" & "))
    }
}

impl TryFrom<String> for ParameterDomain {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Self::parse(&value)
    }
}

impl From<ParameterDomain> for String {
    fn from(value: ParameterDomain) -> Self {
        value.to_string()
    }
}

/// The orbit of `source` under `S_d`, intersected with `domain`.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub source: ParameterVector,
    pub domain: ParameterDomain,
    /// Sorted ascending, distinct.
    pub elements: Vec<ParameterVector>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, v: &ParameterVector) -> bool {
        self.elements.binary_search(v).is_ok()
    }
}

pub fn enumerate_orbit(v: &ParameterVector, domain: &ParameterDomain) -> Result<Orbit> {
    enumerate_orbit_bounded(v, domain, DEFAULT_ENUMERATION_BOUND)
}

/// Lists the distinct rearrangements of `v` in lexicographic order. Repeated
/// entries are handled by walking multiset permutations, so no rearrangement
/// is produced twice.
pub fn enumerate_orbit_bounded(
    v: &ParameterVector,
    domain: &ParameterDomain,
    bound: u128,
) -> Result<Orbit> {
    let needed = factorial(v.dim());
    if needed > bound {
        return Err(Error::BoundExceeded {
            what: "orbit enumeration",
            needed,
            bound,
        });
    }
    let mut current = v.clone();
    current.0.sort_by(f64::total_cmp);
    let mut keys: Vec<OrdF64> = current.0.iter().copied().map(OrdF64).collect();
    let mut elements = Vec::new();
    loop {
        let candidate = ParameterVector(keys.iter().map(|k| k.0).collect());
        if domain.contains(&candidate) {
            elements.push(candidate);
        }
        if !next_permutation(&mut keys) {
            break;
        }
    }
    Ok(Orbit {
        source: v.clone(),
        domain: domain.clone(),
        elements,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(v: &[i64]) -> ParameterVector {
        ParameterVector::from_ints(v)
    }

    #[test]
    fn compose_identity_and_involution() {
        let q = Permutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(Permutation::identity(3).compose(&q).unwrap(), q);
        let swap01 = Permutation::transposition(3, 0, 1).unwrap();
        assert!(swap01.compose(&swap01).unwrap().is_identity());
    }

    #[test]
    fn compose_two_transpositions() {
        // (0 1) ∘ (1 2): 0 -> 0 -> 1, 1 -> 2 -> 2, 2 -> 1 -> 0
        let p = Permutation::transposition(3, 0, 1).unwrap();
        let q = Permutation::transposition(3, 1, 2).unwrap();
        assert_eq!(p.compose(&q).unwrap().mapping(), &[1, 2, 0]);
        assert!(p.compose(&Permutation::identity(4)).is_err());
    }

    #[test]
    fn involution_detection() {
        assert!(Permutation::identity(4).is_involution());
        assert!(Permutation::transposition(4, 0, 1).unwrap().is_involution());
        assert!(!Permutation::new(vec![1, 2, 0]).unwrap().is_involution());
    }

    #[test]
    fn invalid_mappings_rejected() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn act_vector_pacman_rows() {
        let u = pv(&[10, 5, 0]);
        let ghost_apple = Permutation::transposition(3, 0, 1).unwrap();
        let ghost_cherry = Permutation::transposition(3, 0, 2).unwrap();
        assert_eq!(ghost_apple.act_vector(&u).unwrap(), pv(&[5, 10, 0]));
        assert_eq!(ghost_cherry.act_vector(&u).unwrap(), pv(&[0, 5, 10]));
        assert_eq!(Permutation::identity(3).act_vector(&u).unwrap(), u);
        assert!(ghost_apple.act_vector(&pv(&[1, 2])).is_err());
    }

    #[test]
    fn act_vector_moves_index_j_to_phi_j() {
        let phi = Permutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(phi.act_vector(&pv(&[7, 8, 9])).unwrap(), pv(&[8, 9, 7]));
    }

    #[test]
    fn act_set_relabels() {
        let swap = Permutation::transposition(3, 1, 2).unwrap();
        let e1 = pv(&[0, 1, 0]);
        assert_eq!(swap.act_set(&[e1]).unwrap(), vec![pv(&[0, 0, 1])]);
        assert!(swap.act_set(&[]).unwrap().is_empty());
        let ga = Permutation::transposition(3, 0, 1).unwrap();
        let out = ga.act_set(&[pv(&[1, 0, 0]), pv(&[0, 0, 1])]).unwrap();
        assert_eq!(out, vec![pv(&[0, 0, 1]), pv(&[0, 1, 0])]);
    }

    #[test]
    fn orbit_examples() {
        let all = ParameterDomain::all();
        assert_eq!(enumerate_orbit(&pv(&[10, 5, 0]), &all).unwrap().len(), 6);
        assert_eq!(enumerate_orbit(&pv(&[1, 1, 1]), &all).unwrap().len(), 1);
        let pos = ParameterDomain::from_predicate(DomainPredicate::PositiveOrthant);
        assert_eq!(enumerate_orbit(&pv(&[1, 2, -3]), &pos).unwrap().len(), 0);
    }

    #[test]
    fn orbit_bound_refusal() {
        let v = ParameterVector::new((0..11).map(f64::from).collect()).unwrap();
        assert!(matches!(
            enumerate_orbit(&v, &ParameterDomain::all()),
            Err(Error::BoundExceeded { .. })
        ));
        assert!(enumerate_orbit_bounded(&pv(&[1, 2, 3, 4]), &ParameterDomain::all(), 6).is_err());
    }

    #[test]
    fn orbit_matches_brute_force() {
        let v = pv(&[3, 1, 3, 0, 1]);
        let mut brute: Vec<ParameterVector> = all_permutations(5, DEFAULT_ENUMERATION_BOUND)
            .unwrap()
            .map(|p| p.act_vector(&v).unwrap())
            .collect();
        brute.sort();
        brute.dedup();
        assert_eq!(
            enumerate_orbit(&v, &ParameterDomain::all())
                .unwrap()
                .elements,
            brute
        );
    }

    #[test]
    fn involution_counts_match_filtered_symmetric_group() {
        for d in 1..=6 {
            let filtered: Vec<Permutation> = all_permutations(d, DEFAULT_ENUMERATION_BOUND)
                .unwrap()
                .filter(|p| p.compose(p).unwrap().is_identity())
                .collect();
            let listed = enumerate_involutions(d).unwrap();
            assert_eq!(listed.len(), filtered.len(), "d={d}");
            for p in &listed {
                assert!(filtered.contains(p));
            }
        }
        assert_eq!(
            enumerate_involutions(1).unwrap(),
            vec![Permutation::identity(1)]
        );
        assert_eq!(enumerate_involutions(2).unwrap().len(), 2);
        assert_eq!(enumerate_involutions(4).unwrap().len(), 10);
        assert!(enumerate_involutions(11).is_err());
    }

    #[test]
    fn involutions_ordered_by_support() {
        let list = enumerate_involutions(5).unwrap();
        assert!(list[0].is_identity());
        assert!(list
            .windows(2)
            .all(|w| w[0].support_size() <= w[1].support_size()));
    }

    #[test]
    fn domain_parsing_and_membership() {
        let d = ParameterDomain::parse("positive-orthant & unique-entries").unwrap();
        assert!(d.contains(&pv(&[1, 2, 3])));
        assert!(!d.contains(&pv(&[1, 1, 3])));
        assert!(!d.contains(&pv(&[0, 1, 3])));
        assert_eq!(d.to_string(), "positive-orthant & unique-entries");
        assert!(ParameterDomain::parse("nonsense").is_err());
    }

    #[test]
    fn non_finite_rejected_and_negative_zero_folded() {
        assert!(ParameterVector::new(vec![1.0, f64::NAN]).is_err());
        let a = ParameterVector::new(vec![-0.0, 1.0]).unwrap();
        let b = ParameterVector::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(a.cmp(&b), Ordering::Equal);
    }

    fn perm_strategy(d: usize) -> impl Strategy<Value = Permutation> {
        Just((0..d).collect::<Vec<usize>>())
            .prop_shuffle()
            .prop_map(|m| Permutation::new(m).unwrap())
    }

    proptest! {
        #[test]
        fn inverse_action_round_trips(
            (p, v) in (1usize..8).prop_flat_map(|d| (perm_strategy(d), prop::collection::vec(-100i64..100, d)))
        ) {
            let v = ParameterVector::from_ints(&v);
            let back = p.inverse().act_vector(&p.act_vector(&v).unwrap()).unwrap();
            prop_assert_eq!(back, v);
        }

        #[test]
        fn orbit_elements_share_multiset(v in prop::collection::vec(-3i64..4, 1..7)) {
            let v = ParameterVector::from_ints(&v);
            let mut sorted = v.as_slice().to_vec();
            sorted.sort_by(f64::total_cmp);
            let orbit = enumerate_orbit(&v, &ParameterDomain::all()).unwrap();
            for e in &orbit.elements {
                let mut s = e.as_slice().to_vec();
                s.sort_by(f64::total_cmp);
                prop_assert_eq!(&s, &sorted);
            }
            prop_assert_eq!(orbit.len() as u128 * v.stabilizer_size(), factorial(v.dim()));
        }

        #[test]
        fn permutation_preserves_dot_product(
            (p, x, u) in (1usize..9).prop_flat_map(|d| (
                perm_strategy(d),
                prop::collection::vec(-10.0f64..10.0, d),
                prop::collection::vec(-10.0f64..10.0, d),
            ))
        ) {
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            let px = p.act_slice(&x).unwrap();
            let pu = p.act_slice(&u).unwrap();
            prop_assert!((dot(&px, &pu) - dot(&x, &u)).abs() <= 1e-12 * (1.0 + dot(&x, &u).abs()).max(1.0) * 10.0);
        }
    }
}
