//! The orbit-tendency relation `f(B|θ) ≥ⁿ_most f(A|θ)` and the checks built
//! on it.
//!
//! Everything here works one orbit at a time: an orbit is enumerated in full
//! and each element is classified by the sign of `f(B|θ') − f(A|θ')`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decisions::{DecisionRule, TIE_TOLERANCE};
use crate::error::{Error, Result};
use crate::outcomes::OutcomeSet;
use crate::perm::{
    all_permutations, enumerate_orbit, ParameterDomain, ParameterVector, Permutation,
    DEFAULT_ENUMERATION_BOUND,
};

/// A function `f(X | θ)` on outcome sets.
pub trait SetFunction: Sync {
    fn value(&self, set: &OutcomeSet, theta: &ParameterVector) -> Result<f64>;
}

/// A decision rule with its choice set fixed: `f(X|θ) = rule(X | C, θ)`.
#[derive(Clone, Debug)]
pub struct ContextRule {
    pub rule: DecisionRule,
    pub context: OutcomeSet,
}

impl ContextRule {
    pub fn new(rule: DecisionRule, context: OutcomeSet) -> Self {
        Self { rule, context }
    }
}

impl SetFunction for ContextRule {
    fn value(&self, set: &OutcomeSet, theta: &ParameterVector) -> Result<f64> {
        self.rule.evaluate(set, &self.context, theta)
    }
}

/// Adapts a closure.
pub struct FnSetFunction<F>(pub F);

impl<F> SetFunction for FnSetFunction<F>
where
    F: Fn(&OutcomeSet, &ParameterVector) -> Result<f64> + Sync,
{
    fn value(&self, set: &OutcomeSet, theta: &ParameterVector) -> Result<f64> {
        (self.0)(set, theta)
    }
}

/// Explicit values keyed by set name and parameter vector.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TabularDecisionFunction {
    entries: BTreeMap<String, BTreeMap<ParameterVector, f64>>,
}

impl TabularDecisionFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, set: &str, theta: ParameterVector, value: f64) {
        self.entries
            .entry(set.to_string())
            .or_default()
            .insert(theta, value);
    }

    pub fn get(&self, set: &str, theta: &ParameterVector) -> Option<f64> {
        self.entries.get(set)?.get(theta).copied()
    }

    pub fn set_names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

impl SetFunction for TabularDecisionFunction {
    fn value(&self, set: &OutcomeSet, theta: &ParameterVector) -> Result<f64> {
        self.get(set.name(), theta)
            .ok_or_else(|| Error::MissingTableEntry {
                set: set.name().to_string(),
                theta: theta.as_slice().to_vec(),
            })
    }
}

/// A non-negative fraction. `den == 0` marks a vacuous value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        Self { num, den }
    }

    /// Exact `self ≥ other`; a vacuous ratio is `≥` anything.
    pub fn at_least(&self, other: Ratio) -> bool {
        if self.den == 0 {
            return true;
        }
        self.num as u128 * other.den as u128 >= other.num as u128 * self.den as u128
    }

    pub fn to_f64(&self) -> f64 {
        if self.den == 0 {
            1.0
        } else {
            self.num as f64 / self.den as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitTendencyReport {
    pub theta: ParameterVector,
    pub orbit_size: u64,
    pub count_b_gt_a: u64,
    pub count_a_gt_b: u64,
    pub count_tie: u64,
    pub n_claimed: u64,
    pub holds: bool,
    /// Share of the orbit where `f(B) ≥ f(A)`.
    pub agreement_fraction: Ratio,
}

/// Classification of one orbit element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preference {
    BOverA,
    AOverB,
    Tie,
}

pub fn compare(fa: f64, fb: f64) -> Preference {
    if fb > fa + TIE_TOLERANCE {
        Preference::BOverA
    } else if fa > fb + TIE_TOLERANCE {
        Preference::AOverB
    } else {
        Preference::Tie
    }
}

/// Builds a report from paired values `(f(A|θ'), f(B|θ'))` over one orbit.
pub fn tally(theta: ParameterVector, pairs: &[(f64, f64)], n: u64) -> OrbitTendencyReport {
    let (mut b, mut a, mut t) = (0u64, 0u64, 0u64);
    for &(fa, fb) in pairs {
        match compare(fa, fb) {
            Preference::BOverA => b += 1,
            Preference::AOverB => a += 1,
            Preference::Tie => t += 1,
        }
    }
    let size = pairs.len() as u64;
    OrbitTendencyReport {
        theta,
        orbit_size: size,
        count_b_gt_a: b,
        count_a_gt_b: a,
        count_tie: t,
        n_claimed: n,
        holds: b as u128 >= n as u128 * a as u128,
        agreement_fraction: Ratio::new(b + t, size),
    }
}

fn pairs_on(
    f: &dyn SetFunction,
    a: &OutcomeSet,
    b: &OutcomeSet,
    thetas: &[ParameterVector],
) -> Result<Vec<(f64, f64)>> {
    thetas
        .par_iter()
        .map(|theta| Ok((f.value(a, theta)?, f.value(b, theta)?)))
        .collect()
}

/// Exhaustive count over the orbit of `theta` inside `domain`.
pub fn check_geq_most(
    f: &dyn SetFunction,
    a: &OutcomeSet,
    b: &OutcomeSet,
    theta: &ParameterVector,
    domain: &ParameterDomain,
    n: u64,
) -> Result<OrbitTendencyReport> {
    let orbit = enumerate_orbit(theta, domain)?;
    let pairs = pairs_on(f, a, b, &orbit.elements)?;
    Ok(tally(theta.clone(), &pairs, n))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledTendency {
    pub reports: Vec<OrbitTendencyReport>,
    /// Indices into `reports` that fail the inequality.
    pub violations: Vec<usize>,
    pub all_hold: bool,
}

/// Inclusive grid used for sampled parameters.
pub const SAMPLE_GRID: (i64, i64) = (-3, 10);

/// Degenerate parameters checked alongside random ones: constant vectors and
/// vectors with a single repeated pair.
pub fn curated_thetas(d: usize) -> Vec<ParameterVector> {
    let mut out = vec![
        ParameterVector::from_ints(&vec![0; d]),
        ParameterVector::from_ints(&vec![1; d]),
        ParameterVector::from_ints(&vec![-2; d]),
    ];
    if d >= 2 {
        let mut pair: Vec<i64> = (0..d as i64).collect();
        pair[1] = pair[0];
        out.push(ParameterVector::from_ints(&pair));
        let mut top: Vec<i64> = (0..d as i64).collect();
        top[d - 2] = top[d - 1];
        out.push(ParameterVector::from_ints(&top));
    }
    out
}

/// Integer-grid parameters drawn from `{-3..10}^d`, deterministic in `seed`.
pub fn sample_grid_thetas(d: usize, count: usize, seed: u64) -> Vec<ParameterVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v: Vec<i64> = (0..d)
                .map(|_| rng.random_range(SAMPLE_GRID.0..=SAMPLE_GRID.1))
                .collect();
            ParameterVector::from_ints(&v)
        })
        .collect()
}

/// Per-orbit counts for `fixtures`, curated degenerate vectors and
/// `num_thetas` grid samples, reported in that order.
#[allow(clippy::too_many_arguments)]
pub fn check_geq_most_sampled(
    f: &dyn SetFunction,
    a: &OutcomeSet,
    b: &OutcomeSet,
    dim: usize,
    domain: &ParameterDomain,
    n: u64,
    num_thetas: usize,
    seed: u64,
    fixtures: &[ParameterVector],
) -> Result<SampledTendency> {
    let mut thetas: Vec<ParameterVector> = fixtures.to_vec();
    thetas.extend(curated_thetas(dim));
    thetas.extend(sample_grid_thetas(dim, num_thetas, seed));
    let reports = thetas
        .par_iter()
        .map(|theta| check_geq_most(f, a, b, theta, domain, n))
        .collect::<Result<Vec<_>>>()?;
    let violations: Vec<usize> = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.holds)
        .map(|(i, _)| i)
        .collect();
    Ok(SampledTendency {
        all_hold: violations.is_empty(),
        reports,
        violations,
    })
}

fn simple_retarget_holds(
    f: &dyn SetFunction,
    a: &OutcomeSet,
    b: &OutcomeSet,
    domain: &ParameterDomain,
    phi: &Permutation,
    thetas: &[ParameterVector],
) -> Result<bool> {
    for theta in thetas {
        if compare(f.value(a, theta)?, f.value(b, theta)?) != Preference::AOverB {
            continue;
        }
        let moved = phi.act_vector(theta)?;
        if !domain.contains(&moved) {
            return Ok(false);
        }
        if compare(f.value(a, &moved)?, f.value(b, &moved)?) != Preference::BOverA {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks simple retargetability on the sampled `thetas`. With `phi = None`
/// every permutation of `S_d` is tried (`d ≤ 7`). Returns the witnessing
/// permutation when one works.
pub fn check_simple_retargetable(
    f: &dyn SetFunction,
    a: &OutcomeSet,
    b: &OutcomeSet,
    domain: &ParameterDomain,
    phi: Option<&Permutation>,
    thetas: &[ParameterVector],
) -> Result<Option<Permutation>> {
    if let Some(phi) = phi {
        return Ok(simple_retarget_holds(f, a, b, domain, phi, thetas)?.then(|| phi.clone()));
    }
    let Some(d) = thetas.first().map(ParameterVector::dim) else {
        return Err(Error::InvalidParameter("no parameters to check".into()));
    };
    if d > 7 {
        return Err(Error::BoundExceeded {
            what: "retargeting permutation search",
            needed: crate::perm::factorial(d),
            bound: crate::perm::factorial(7),
        });
    }
    for candidate in all_permutations(d, DEFAULT_ENUMERATION_BOUND)? {
        if simple_retarget_holds(f, a, b, domain, &candidate, thetas)? {
            return Ok(Some(candidate));
        }
    }
    Ok(None)
}

/// How the permutations `φ_1..φ_n` are picked for each parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermutationChooser {
    Constant(Vec<Permutation>),
    /// Keyed by parameter vector; every list must have length `n`.
    Table(BTreeMap<ParameterVector, Vec<Permutation>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetargetCertificate {
    pub n: usize,
    pub chooser: PermutationChooser,
}

impl RetargetCertificate {
    pub fn constant(perms: Vec<Permutation>) -> Self {
        Self {
            n: perms.len(),
            chooser: PermutationChooser::Constant(perms),
        }
    }

    pub fn permutations_for(&self, theta: &ParameterVector) -> Result<Vec<Permutation>> {
        let perms = match &self.chooser {
            PermutationChooser::Constant(p) => p.clone(),
            PermutationChooser::Table(t) => t.get(theta).cloned().ok_or_else(|| {
                Error::InvalidCertificate(format!("no permutations listed for {theta}"))
            })?,
        };
        if perms.len() != self.n {
            return Err(Error::InvalidCertificate(format!(
                "expected {} permutations, found {}",
                self.n,
                perms.len()
            )));
        }
        if let Some(bad) = perms.iter().find(|p| p.len() != theta.dim()) {
            return Err(Error::InvalidCertificate(format!(
                "permutation {bad} does not act on dimension {}",
                theta.dim()
            )));
        }
        Ok(perms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiRetargetReport {
    /// Each `φ_i` flips every parameter that strictly prefers `A`.
    pub retargetable: bool,
    /// Every `φ_i·θ^A` lies in the domain.
    pub domain_closed: bool,
    /// `φ_i·θ^A ≠ φ_j·θ'` for `i ≠ j` and all `θ^A, θ'` preferring `A`.
    pub distinct: bool,
    /// Number of orbit elements strictly preferring `A`.
    pub a_preferring: usize,
}

impl MultiRetargetReport {
    pub fn all(&self) -> bool {
        self.retargetable && self.domain_closed && self.distinct
    }
}

pub fn check_multi_retargetable(
    f: &dyn SetFunction,
    a: &OutcomeSet,
    b: &OutcomeSet,
    theta: &ParameterVector,
    domain: &ParameterDomain,
    cert: &RetargetCertificate,
) -> Result<MultiRetargetReport> {
    let orbit = enumerate_orbit(theta, domain)?;
    let pairs = pairs_on(f, a, b, &orbit.elements)?;
    let theta_a: Vec<&ParameterVector> = orbit
        .elements
        .iter()
        .zip(&pairs)
        .filter(|(_, (fa, fb))| compare(*fa, *fb) == Preference::AOverB)
        .map(|(t, _)| t)
        .collect();

    let mut retargetable = true;
    let mut domain_closed = true;
    // images[i] holds φ_i·θ^A over all θ^A
    let mut images: Vec<Vec<ParameterVector>> = vec![Vec::new(); cert.n];
    for t in &theta_a {
        for (i, phi) in cert.permutations_for(t)?.iter().enumerate() {
            let moved = phi.act_vector(t)?;
            if !domain.contains(&moved) {
                domain_closed = false;
            }
            if compare(f.value(a, &moved)?, f.value(b, &moved)?) != Preference::BOverA {
                retargetable = false;
            }
            images[i].push(moved);
        }
    }
    for img in images.iter_mut() {
        img.sort();
    }
    let mut distinct = true;
    'outer: for i in 0..cert.n {
        for j in 0..cert.n {
            if i == j {
                continue;
            }
            if images[i].iter().any(|v| images[j].binary_search(v).is_ok()) {
                distinct = false;
                break 'outer;
            }
        }
    }
    Ok(MultiRetargetReport {
        retargetable,
        domain_closed,
        distinct,
        a_preferring: theta_a.len(),
    })
}

/// Counts the orbit of a certified instance at `n = cert.n`. Errors with
/// `InvalidCertificate` when the certificate does not check out.
pub fn counting_theorem_report(
    f: &dyn SetFunction,
    a: &OutcomeSet,
    b: &OutcomeSet,
    theta: &ParameterVector,
    domain: &ParameterDomain,
    cert: &RetargetCertificate,
) -> Result<OrbitTendencyReport> {
    let conditions = check_multi_retargetable(f, a, b, theta, domain, cert)?;
    if !conditions.all() {
        return Err(Error::InvalidCertificate(format!("{conditions:?}")));
    }
    check_geq_most(f, a, b, theta, domain, cert.n as u64)
}

pub fn verify_counting_theorem(
    f: &dyn SetFunction,
    a: &OutcomeSet,
    b: &OutcomeSet,
    theta: &ParameterVector,
    domain: &ParameterDomain,
    cert: &RetargetCertificate,
) -> Result<bool> {
    counting_theorem_report(f, a, b, theta, domain, cert).map(|r| r.holds)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralOrbitReport {
    pub retargetable_under_permutation: bool,
    pub domain_closed: bool,
    pub increasing_on_inputs: bool,
    pub increasing_under_alternate_symmetries: bool,
    /// First failure of the last item as `(θ*, i, j)` with 1-based `i, j`.
    pub alternate_symmetry_witness: Option<(ParameterVector, usize, usize)>,
    pub conclusion: OrbitTendencyReport,
}

impl GeneralOrbitReport {
    pub fn all_items(&self) -> bool {
        self.retargetable_under_permutation
            && self.domain_closed
            && self.increasing_on_inputs
            && self.increasing_under_alternate_symmetries
    }
}

/// Evaluates the four conditions of the general orbit lemma at every element
/// of the orbit of `theta`, plus the counting conclusion at `n = phis.len()`.
/// If all four hold but the conclusion fails, that contradicts the lemma and
/// is reported as `TheoremViolation`.
pub fn check_general_orbit_conditions(
    f: &dyn SetFunction,
    a: &OutcomeSet,
    b: &OutcomeSet,
    b_star: &[OutcomeSet],
    phis: &[Permutation],
    theta: &ParameterVector,
    domain: &ParameterDomain,
) -> Result<GeneralOrbitReport> {
    if let Some(bad) = phis.iter().find(|p| !p.is_involution()) {
        return Err(Error::NotInvolution(bad.mapping().to_vec()));
    }
    if b_star.len() != phis.len() {
        return Err(Error::InvalidParameter(format!(
            "{} superset copies for {} involutions",
            b_star.len(),
            phis.len()
        )));
    }
    let orbit = enumerate_orbit(theta, domain)?;
    let mut item1 = true;
    let mut item2 = true;
    let mut item3 = true;
    let mut item4 = true;
    let mut witness = None;
    for t in &orbit.elements {
        let fa = f.value(a, t)?;
        let fb = f.value(b, t)?;
        let pref = compare(fa, fb);
        for (i, (phi, star)) in phis.iter().zip(b_star).enumerate() {
            let moved = phi.act_vector(t)?;
            if pref == Preference::AOverB {
                if !domain.contains(&moved) {
                    item2 = false;
                } else if fa > f.value(star, &moved)? + TIE_TOLERANCE {
                    item1 = false;
                }
            }
            if f.value(star, t)? > fb + TIE_TOLERANCE {
                item3 = false;
            }
            if pref == Preference::BOverA {
                for (j, star_j) in b_star.iter().enumerate() {
                    if i == j || !domain.contains(&moved) {
                        continue;
                    }
                    if f.value(star_j, t)? > f.value(star_j, &moved)? + TIE_TOLERANCE {
                        item4 = false;
                        if witness.is_none() {
                            witness = Some((t.clone(), i + 1, j + 1));
                        }
                    }
                }
            }
        }
    }
    let conclusion = check_geq_most(f, a, b, theta, domain, phis.len() as u64)?;
    let report = GeneralOrbitReport {
        retargetable_under_permutation: item1,
        domain_closed: item2,
        increasing_on_inputs: item3,
        increasing_under_alternate_symmetries: item4,
        alternate_symmetry_witness: witness,
        conclusion,
    };
    if report.all_items() && !report.conclusion.holds {
        return Err(Error::TheoremViolation(format!(
            "all four conditions hold at {theta} but counts are {}:{}",
            report.conclusion.count_b_gt_a, report.conclusion.count_a_gt_b
        )));
    }
    Ok(report)
}

/// The tabular function used to show the last lemma condition cannot be
/// dropped, over Pac-Man outcomes `(ghost, apple, cherry)`. Set names are
/// `ghost`, `apple`, `cherry` and `apple,cherry`.
pub fn counterexample_table() -> TabularDecisionFunction {
    let rows: [([i64; 3], [f64; 4]); 6] = [
        ([1, 3, 2], [1.0, 0.0, 0.0, 0.0]),
        ([3, 1, 2], [0.0, 2.0, 2.0, 2.0]),
        ([2, 3, 1], [0.0, 2.0, 2.0, 2.0]),
        ([2, 1, 3], [1.0, 0.0, 0.0, 0.0]),
        ([1, 2, 3], [0.0, 2.0, 2.0, 2.0]),
        ([3, 2, 1], [1.0, 0.0, 0.0, 0.0]),
    ];
    let mut table = TabularDecisionFunction::new();
    for (theta, values) in rows {
        let theta = ParameterVector::from_ints(&theta);
        for (name, v) in COUNTEREXAMPLE_SETS.iter().zip(values) {
            table.insert(name, theta.clone(), v);
        }
    }
    table
}

pub const COUNTEREXAMPLE_SETS: [&str; 4] = ["ghost", "apple", "cherry", "apple,cherry"];

/// Row labels and parameter vectors of the counterexample table, in display order.
pub fn counterexample_rows() -> Vec<(&'static str, ParameterVector)> {
    vec![
        ("θ'", ParameterVector::from_ints(&[1, 3, 2])),
        ("φ1·θ' = φ2·θ''", ParameterVector::from_ints(&[3, 1, 2])),
        ("φ2·θ'", ParameterVector::from_ints(&[2, 3, 1])),
        ("θ''", ParameterVector::from_ints(&[2, 1, 3])),
        ("φ1·θ''", ParameterVector::from_ints(&[1, 2, 3])),
        ("θ*", ParameterVector::from_ints(&[3, 2, 1])),
    ]
}
