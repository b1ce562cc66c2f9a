//! Decision-making functions `f(X | C, θ)`.
//!
//! Every rule returns the probability (or indicator) that the decision-maker
//! picks an element of `X` from the choice set `C` under parameter `θ`. The
//! expected-utility rules read `θ` as a utility vector `u` and only look at the
//! values `x·u`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcomes::OutcomeSet;
use crate::perm::{ParameterVector, Permutation};

/// Absolute tolerance for ties and threshold comparisons. Integer fixtures are
/// compared exactly since their gaps are at least 1.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Tuple budget for exact best-of-k enumeration.
pub const DEFAULT_BEST_OF_K_BUDGET: u64 = 1_000_000;

pub const DEFAULT_BEST_OF_K_SAMPLES: u64 = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub enum DecisionRule {
    Optimal,
    FracOptimal,
    AntiOptimal,
    Boltzmann {
        temperature: f64,
    },
    BestOfK {
        k: u32,
        budget: u64,
        seed: u64,
    },
    Satisficer {
        threshold: f64,
    },
    /// Uniform base distribution over `C`.
    Quantilizer {
        q: f64,
    },
    Rand,
    /// Always picks `choice`: `f(X) = 1[X = choice]`.
    Stubborn {
        choice: OutcomeSet,
    },
    /// Picks `a` when `θ` encodes the number 1 (largest entry at index 0),
    /// otherwise the rest of `C`.
    Numerical {
        a: OutcomeSet,
    },
}

/// Value plus its Monte Carlo standard error (zero when exact).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub exact: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
            samples: 0,
            exact: true,
        }
    }

    /// Mean and standard error of a 0/1 sample.
    pub fn from_bernoulli(successes: u64, samples: u64) -> Self {
        if samples == 0 {
            return Self {
                value: 0.0,
                std_error: 0.0,
                samples,
                exact: false,
            };
        }
        let p = successes as f64 / samples as f64;
        Self {
            value: p,
            std_error: (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
            exact: false,
        }
    }

    /// Mean and standard error of `[0,1]`-valued samples.
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                value: 0.0,
                std_error: 0.0,
                samples: 0,
                exact: false,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            value: mean,
            std_error: (var / n as f64).sqrt(),
            samples: n as u64,
            exact: false,
        }
    }

    /// Normal-approximation 95% interval clamped to `[0,1]`.
    pub fn ci95(&self) -> (f64, f64) {
        let h = 1.96 * self.std_error;
        ((self.value - h).max(0.0), (self.value + h).min(1.0))
    }
}

/// Result of [`quantile_threshold`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    /// Below every utility; the whole support is top-quantile.
    BelowAll,
    Value(f64),
}

fn check_inputs(x: &OutcomeSet, c: &OutcomeSet, u: &ParameterVector) -> Result<()> {
    x.require_subset(c)?;
    if u.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: u.dim(),
        });
    }
    Ok(())
}

fn nonempty(c: &OutcomeSet) -> Result<()> {
    if c.is_empty() {
        return Err(Error::EmptySet(c.name().to_string()));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x·u` for each element of `set`, in the set's order.
pub fn expected_utilities(set: &OutcomeSet, u: &ParameterVector) -> Vec<f64> {
    set.elements()
        .iter()
        .map(|x| dot(x.as_slice(), u.as_slice()))
        .collect()
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn is_optimal(x: &OutcomeSet, c: &OutcomeSet, u: &ParameterVector) -> Result<f64> {
    check_inputs(x, c, u)?;
    nonempty(c)?;
    let best_x = max_of(&expected_utilities(x, u));
    let best_c = max_of(&expected_utilities(c, u));
    Ok(if best_x >= best_c - TIE_TOLERANCE {
        1.0
    } else {
        0.0
    })
}

pub fn is_anti_optimal(x: &OutcomeSet, c: &OutcomeSet, u: &ParameterVector) -> Result<f64> {
    check_inputs(x, c, u)?;
    nonempty(c)?;
    let worst_x = min_of(&expected_utilities(x, u));
    let worst_c = min_of(&expected_utilities(c, u));
    Ok(if worst_x <= worst_c + TIE_TOLERANCE {
        1.0
    } else {
        0.0
    })
}

/// `(|argmax C ∩ X|, |argmax C|)`.
pub fn frac_optimal_ratio(
    x: &OutcomeSet,
    c: &OutcomeSet,
    u: &ParameterVector,
) -> Result<(u64, u64)> {
    check_inputs(x, c, u)?;
    nonempty(c)?;
    let values = expected_utilities(c, u);
    let best = max_of(&values);
    let mut num = 0;
    let mut den = 0;
    for (elem, v) in c.elements().iter().zip(&values) {
        if *v >= best - TIE_TOLERANCE {
            den += 1;
            if x.contains(elem) {
                num += 1;
            }
        }
    }
    Ok((num, den))
}

pub fn frac_optimal(x: &OutcomeSet, c: &OutcomeSet, u: &ParameterVector) -> Result<f64> {
    let (num, den) = frac_optimal_ratio(x, c, u)?;
    Ok(num as f64 / den as f64)
}

pub fn boltzmann(
    x: &OutcomeSet,
    c: &OutcomeSet,
    u: &ParameterVector,
    temperature: f64,
) -> Result<f64> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    check_inputs(x, c, u)?;
    nonempty(c)?;
    let values = expected_utilities(c, u);
    let shift = max_of(&values);
    let mut num = 0.0;
    let mut den = 0.0;
    for (elem, v) in c.elements().iter().zip(&values) {
        let w = ((v - shift) / temperature).exp();
        den += w;
        if x.contains(elem) {
            num += w;
        }
    }
    Ok(num / den)
}

pub fn satisfice(
    x: &OutcomeSet,
    c: &OutcomeSet,
    u: &ParameterVector,
    threshold: f64,
) -> Result<f64> {
    check_inputs(x, c, u)?;
    let meets = |v: f64| v >= threshold - TIE_TOLERANCE;
    let num = expected_utilities(x, u)
        .into_iter()
        .filter(|v| meets(*v))
        .count();
    let den = expected_utilities(c, u)
        .into_iter()
        .filter(|v| meets(*v))
        .count();
    Ok(if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    })
}

pub fn rand_rule(x: &OutcomeSet, c: &OutcomeSet) -> Result<f64> {
    x.require_subset(c)?;
    nonempty(c)?;
    Ok(x.len() as f64 / c.len() as f64)
}

/// Probability that the best of `k` uniform draws from `C` (with
/// replacement, ties broken uniformly) lies in `X`. Exact when `|C|^k`
/// fits in `budget`, otherwise a seeded Monte Carlo estimate.
pub fn best_of_k(
    x: &OutcomeSet,
    c: &OutcomeSet,
    u: &ParameterVector,
    k: u32,
    budget: u64,
    seed: u64,
) -> Result<Estimate> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    check_inputs(x, c, u)?;
    nonempty(c)?;
    let values = expected_utilities(c, u);
    let in_x: Vec<bool> = c.elements().iter().map(|e| x.contains(e)).collect();
    let n = values.len();
    let tuples = (n as u128).checked_pow(k).unwrap_or(u128::MAX);

    let mut draw = vec![0usize; k as usize];
    if tuples <= budget as u128 {
        let mut total = 0.0;
        loop {
            total += draw_value(&draw, &values, &in_x);
            // odometer increment over {0..n}^k
            let mut pos = 0;
            while pos < draw.len() {
                draw[pos] += 1;
                if draw[pos] < n {
                    break;
                }
                draw[pos] = 0;
                pos += 1;
            }
            if pos == draw.len() {
                break;
            }
        }
        return Ok(Estimate::exact(total / tuples as f64));
    }

    let samples = DEFAULT_BEST_OF_K_SAMPLES;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..samples)
        .map(|_| {
            for slot in draw.iter_mut() {
                *slot = rng.random_range(0..n);
            }
            draw_value(&draw, &values, &in_x)
        })
        .collect();
    Ok(Estimate::from_samples(&draws))
}

/// Fraction of the drawn set's maximizers that lie in `X`.
fn draw_value(draw: &[usize], values: &[f64], in_x: &[bool]) -> f64 {
    let best = draw
        .iter()
        .map(|&i| values[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut distinct: Vec<usize> = draw.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let winners: Vec<usize> = distinct
        .into_iter()
        .filter(|&i| values[i] >= best - TIE_TOLERANCE)
        .collect();
    winners.iter().filter(|&&i| in_x[i]).count() as f64 / winners.len() as f64
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q must lie in (0, 1], got {q}"
        )));
    }
    Ok(())
}

/// `inf{M : P[x·u > M] ≤ q}` under the uniform distribution on `C`.
pub fn quantile_threshold(c: &OutcomeSet, u: &ParameterVector, q: f64) -> Result<Threshold> {
    check_q(q)?;
    nonempty(c)?;
    if u.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: u.dim(),
        });
    }
    let mut values = expected_utilities(c, u);
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mass_above = |m: f64| values.iter().filter(|&&v| v > m + TIE_TOLERANCE).count() as f64 / n;
    if q >= 1.0 {
        return Ok(Threshold::BelowAll);
    }
    // P[x·u > M] only changes at the utility values, so the infimum is one of them.
    for &m in &values {
        if mass_above(m) <= q + 1e-12 {
            return Ok(Threshold::Value(m));
        }
    }
    unreachable!("the largest utility always has zero mass above it")
}

pub fn quantilize(x: &OutcomeSet, c: &OutcomeSet, u: &ParameterVector, q: f64) -> Result<f64> {
    check_inputs(x, c, u)?;
    let threshold = quantile_threshold(c, u, q)?;
    let values = expected_utilities(c, u);
    let p = 1.0 / values.len() as f64;
    let (above, at): (Vec<bool>, Vec<bool>) = values
        .iter()
        .map(|&v| match threshold {
            Threshold::BelowAll => (true, false),
            Threshold::Value(m) => (v > m + TIE_TOLERANCE, (v - m).abs() <= TIE_TOLERANCE),
        })
        .unzip();
    let p_above = above.iter().filter(|b| **b).count() as f64 * p;
    let p_at = at.iter().filter(|b| **b).count() as f64 * p;
    let mut weight = 0.0;
    for (i, elem) in c.elements().iter().enumerate() {
        if !x.contains(elem) {
            continue;
        }
        if above[i] {
            weight += 1.0;
        }
        if at[i] && p_at > 0.0 {
            weight += (q - p_above) / p_at;
        }
    }
    Ok(weight / (values.len() as f64 * q))
}

/// `p_A(θ) = 1` iff `θ = 1`, for `θ ∈ {1, …, 6}`.
pub fn numerical_rule(is_a: bool, theta: u32) -> Result<f64> {
    if !(1..=6).contains(&theta) {
        return Err(Error::InvalidParameter(format!(
            "θ must be in 1..=6, got {theta}"
        )));
    }
    let p_a = if theta == 1 { 1.0 } else { 0.0 };
    Ok(if is_a { p_a } else { 1.0 - p_a })
}

/// Reads the number encoded by a parameter vector: one plus the index of its
/// unique largest entry. One-hot `e_k` encodes `k + 1`.
pub fn decode_numerical(theta: &ParameterVector) -> Option<usize> {
    let v = theta.as_slice();
    let best = max_of(v);
    let winners: Vec<usize> = (0..v.len()).filter(|&i| v[i] == best).collect();
    (winners.len() == 1).then(|| winners[0] + 1)
}

fn numerical_vector(
    x: &OutcomeSet,
    c: &OutcomeSet,
    a: &OutcomeSet,
    theta: &ParameterVector,
) -> Result<f64> {
    x.require_subset(c)?;
    a.require_subset(c)?;
    let p_a = if decode_numerical(theta) == Some(1) {
        1.0
    } else {
        0.0
    };
    let b = c.difference(a)?;
    let mut total = 0.0;
    if a.is_subset_of(x) {
        total += p_a;
    }
    if b.is_subset_of(x) {
        total += 1.0 - p_a;
    }
    Ok(total)
}

impl DecisionRule {
    /// The seven rules that depend only on expected utilities.
    pub fn is_eu_determined(&self) -> bool {
        !matches!(
            self,
            DecisionRule::Stubborn { .. } | DecisionRule::Numerical { .. }
        )
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self, DecisionRule::Optimal | DecisionRule::AntiOptimal)
    }

    /// Point value; Monte Carlo best-of-k returns its mean.
    pub fn evaluate(&self, x: &OutcomeSet, c: &OutcomeSet, theta: &ParameterVector) -> Result<f64> {
        match self {
            DecisionRule::Optimal => is_optimal(x, c, theta),
            DecisionRule::FracOptimal => frac_optimal(x, c, theta),
            DecisionRule::AntiOptimal => is_anti_optimal(x, c, theta),
            DecisionRule::Boltzmann { temperature } => boltzmann(x, c, theta, *temperature),
            DecisionRule::BestOfK { k, budget, seed } => {
                best_of_k(x, c, theta, *k, *budget, *seed).map(|e| e.value)
            }
            DecisionRule::Satisficer { threshold } => satisfice(x, c, theta, *threshold),
            DecisionRule::Quantilizer { q } => quantilize(x, c, theta, *q),
            DecisionRule::Rand => rand_rule(x, c),
            DecisionRule::Stubborn { choice } => {
                x.require_subset(c)?;
                Ok(if x.same_elements(choice) { 1.0 } else { 0.0 })
            }
            DecisionRule::Numerical { a } => numerical_vector(x, c, a, theta),
        }
    }

    /// Parses `name[:key=value,...]`. Rules that refer to outcome sets
    /// (`stubborn:choice=A`, `numerical:a=A`) resolve names through `lookup`.
    pub fn parse_with(text: &str, lookup: &dyn Fn(&str) -> Option<OutcomeSet>) -> Result<Self> {
        let text = text.trim();
        let (name, params) = match text.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (text, ""),
        };
        let mut pairs = Vec::new();
        for item in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("expected key=value, got `{item}`"))
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut take = |key: &str| -> Option<String> {
            let pos = pairs.iter().position(|(k, _)| k == key)?;
            Some(pairs.remove(pos).1)
        };
        let number = |key: &str, raw: Option<String>| -> Result<Option<f64>> {
            raw.map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!("`{key}` is not a number: `{s}`"))
                    })
            })
            .transpose()
        };
        let integer = |key: &str, raw: Option<String>| -> Result<Option<u64>> {
            raw.map(|s| {
                s.parse::<u64>().map_err(|_| {
                    Error::InvalidParameter(format!("`{key}` is not an integer: `{s}`"))
                })
            })
            .transpose()
        };
        let required = |key: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::InvalidParameter(format!("rule `{name}` needs `{key}`")))
        };
        let set = |key: &str, raw: Option<String>| -> Result<OutcomeSet> {
            let label =
                raw.ok_or_else(|| Error::InvalidParameter(format!("rule `{name}` needs `{key}`")))?;
            lookup(&label).ok_or_else(|| Error::InvalidParameter(format!("unknown set `{label}`")))
        };

        let rule = match name {
            "optimal" => DecisionRule::Optimal,
            "frac-optimal" => DecisionRule::FracOptimal,
            "anti-optimal" => DecisionRule::AntiOptimal,
            "rand" => DecisionRule::Rand,
            "boltzmann" => {
                let t = required("T", number("T", take("T"))?)?;
                if t <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "temperature must be positive, got {t}"
                    )));
                }
                DecisionRule::Boltzmann { temperature: t }
            }
            "satisficer" => DecisionRule::Satisficer {
                threshold: required("t", number("t", take("t"))?)?,
            },
            "quantilizer" => {
                let q = required("q", number("q", take("q"))?)?;
                check_q(q)?;
                DecisionRule::Quantilizer { q }
            }
            "best-of-k" => {
                let k = integer("k", take("k"))?
                    .ok_or_else(|| Error::InvalidParameter("rule `best-of-k` needs `k`".into()))?;
                if k == 0 || k > u32::MAX as u64 {
                    return Err(Error::InvalidParameter(format!("k out of range: {k}")));
                }
                let budget = integer("budget", take("budget"))?.unwrap_or(DEFAULT_BEST_OF_K_BUDGET);
                let seed = integer("seed", take("seed"))?.unwrap_or(0);
                DecisionRule::BestOfK {
                    k: k as u32,
                    budget,
                    seed,
                }
            }
            "stubborn" => DecisionRule::Stubborn {
                choice: set("choice", take("choice"))?,
            },
            "numerical" => DecisionRule::Numerical {
                a: set("a", take("a"))?,
            },
            other => return Err(Error::InvalidParameter(format!("unknown rule `{other}`"))),
        };
        if let Some((k, _)) = pairs.first() {
            return Err(Error::InvalidParameter(format!(
                "unknown parameter `{k}` for rule `{name}`"
            )));
        }
        Ok(rule)
    }
}

impl std::str::FromStr for DecisionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with(s, &|_| None)
    }
}

impl fmt::Display for DecisionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionRule::Optimal => write!(f, "optimal"),
            DecisionRule::FracOptimal => write!(f, "frac-optimal"),
            DecisionRule::AntiOptimal => write!(f, "anti-optimal"),
            DecisionRule::Boltzmann { temperature } => write!(f, "boltzmann:T={temperature}"),
            DecisionRule::BestOfK { k, budget, seed } => {
                write!(f, "best-of-k:k={k}")?;
                if *budget != DEFAULT_BEST_OF_K_BUDGET {
                    write!(f, ",budget={budget}")?;
                }
                if *seed != 0 {
                    write!(f, ",seed={seed}")?;
                }
                Ok(())
            }
            DecisionRule::Satisficer { threshold } => write!(f, "satisficer:t={threshold}"),
            DecisionRule::Quantilizer { q } => write!(f, "quantilizer:q={q}"),
            DecisionRule::Rand => write!(f, "rand"),
            DecisionRule::Stubborn { choice } => write!(f, "stubborn:choice={}", choice.name()),
            DecisionRule::Numerical { a } => write!(f, "numerical:a={}", a.name()),
        }
    }
}

/// `fracOpt(X|Y) ≤ fracOpt(X|Y') ≤ fracOpt(X ∪ (Y∖Y')|Y)`, compared as exact
/// fractions.
pub fn frac_optimal_inequalities_check(
    x: &OutcomeSet,
    y_prime: &OutcomeSet,
    y: &OutcomeSet,
    u: &ParameterVector,
) -> Result<bool> {
    x.require_subset(y_prime)?;
    y_prime.require_subset(y)?;
    let left = frac_optimal_ratio(x, y, u)?;
    let middle = frac_optimal_ratio(x, y_prime, u)?;
    let right = frac_optimal_ratio(&x.union(&y.difference(y_prime)?)?, y, u)?;
    let le = |a: (u64, u64), b: (u64, u64)| a.0 as u128 * b.1 as u128 <= b.0 as u128 * a.1 as u128;
    Ok(le(left, middle) && le(middle, right))
}

/// `|f(X|C,u) − f(φX|φC,φu)| ≤ 1e-12`.
pub fn eu_invariance_check(
    rule: &DecisionRule,
    x: &OutcomeSet,
    c: &OutcomeSet,
    u: &ParameterVector,
    phi: &Permutation,
) -> Result<bool> {
    let before = rule.evaluate(x, c, u)?;
    let after = rule.evaluate(&x.act(phi)?, &c.act(phi)?, &phi.act_vector(u)?)?;
    Ok((before - after).abs() <= 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcomes::unit_vector;
    use proptest::prelude::*;
    use rand::Rng;

    fn pac() -> (OutcomeSet, OutcomeSet, OutcomeSet) {
        (
            OutcomeSet::units("ghost,apple", 3, &[0, 1]).unwrap(),
            OutcomeSet::units("cherry", 3, &[2]).unwrap(),
            OutcomeSet::units("C", 3, &[0, 1, 2]).unwrap(),
        )
    }

    fn u(v: &[i64]) -> ParameterVector {
        ParameterVector::from_ints(v)
    }

    #[test]
    fn indicator_rules() {
        let (ga, cherry, c) = pac();
        assert_eq!(is_optimal(&ga, &c, &u(&[10, 5, 0])).unwrap(), 1.0);
        assert_eq!(is_optimal(&ga, &c, &u(&[5, 0, 10])).unwrap(), 0.0);
        assert_eq!(is_optimal(&c, &c, &u(&[1, 2, 3])).unwrap(), 1.0);
        assert_eq!(is_anti_optimal(&ga, &c, &u(&[10, 5, 0])).unwrap(), 0.0);
        assert_eq!(is_anti_optimal(&cherry, &c, &u(&[10, 5, 0])).unwrap(), 1.0);
        assert_eq!(is_anti_optimal(&c, &c, &u(&[10, 5, 0])).unwrap(), 1.0);
        let outside = OutcomeSet::units("X", 3, &[0]).unwrap();
        assert!(matches!(
            is_optimal(&c, &outside, &u(&[1, 2, 3])),
            Err(Error::NotSubset { .. })
        ));
    }

    #[test]
    fn frac_optimal_ties() {
        let c = OutcomeSet::units("C", 3, &[0, 1, 2]).unwrap();
        let single = OutcomeSet::units("X", 3, &[1]).unwrap();
        assert!((frac_optimal(&single, &c, &u(&[4, 4, 4])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let c4 = OutcomeSet::units("C", 4, &[0, 1, 2, 3]).unwrap();
        let x = OutcomeSet::units("X", 4, &[0]).unwrap();
        assert_eq!(frac_optimal(&x, &c4, &u(&[7, 7, 2, 1])).unwrap(), 0.5);
        assert_eq!(frac_optimal(&x, &c4, &u(&[9, 7, 2, 1])).unwrap(), 1.0);
    }

    #[test]
    fn boltzmann_values() {
        let (ga, cherry, c) = pac();
        let v = boltzmann(&ga, &c, &u(&[10, 0, 5]), 1.0).unwrap();
        assert!((v - 0.993).abs() < 5e-4, "{v}");
        let v = boltzmann(&cherry, &c, &u(&[0, 10, 5]), 1.0).unwrap();
        assert!((v - 0.007).abs() < 5e-4, "{v}");
        let v = boltzmann(&ga, &c, &u(&[3, 3, 3]), 2.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        assert!(boltzmann(&ga, &c, &u(&[1, 2, 3]), 0.0).is_err());
        // no overflow for large utilities
        let big = ParameterVector::new(vec![1e6, 0.0, 0.0]).unwrap();
        assert_eq!(boltzmann(&ga, &c, &big, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn satisficer_values() {
        let (ga, _, c) = pac();
        assert_eq!(satisfice(&ga, &c, &u(&[10, 0, 5]), 3.0).unwrap(), 0.5);
        assert_eq!(satisfice(&ga, &c, &u(&[10, 0, 5]), 11.0).unwrap(), 0.0);
        assert_eq!(satisfice(&c, &c, &u(&[10, 0, 5]), -1.0).unwrap(), 1.0);
    }

    /// Enumerates ordered draws directly from outcome indices.
    fn best_of_k_oracle(x_idx: &[usize], values: &[f64], k: u32) -> f64 {
        let n = values.len();
        let total = n.pow(k);
        let mut acc = 0.0;
        for code in 0..total {
            let mut draw = Vec::new();
            let mut c = code;
            for _ in 0..k {
                draw.push(c % n);
                c /= n;
            }
            draw.sort();
            draw.dedup();
            let best = draw.iter().map(|&i| values[i]).fold(f64::MIN, f64::max);
            let winners: Vec<_> = draw.iter().filter(|&&i| values[i] == best).collect();
            acc +=
                winners.iter().filter(|i| x_idx.contains(i)).count() as f64 / winners.len() as f64;
        }
        acc / total as f64
    }

    #[test]
    fn best_of_k_values() {
        let (ga, _, c) = pac();
        let theta = u(&[10, 5, 0]);
        let one = best_of_k(&ga, &c, &theta, 1, DEFAULT_BEST_OF_K_BUDGET, 0).unwrap();
        assert!(one.exact);
        assert!((one.value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            best_of_k(&c, &c, &theta, 3, DEFAULT_BEST_OF_K_BUDGET, 0)
                .unwrap()
                .value,
            1.0
        );
        let ac = OutcomeSet::units("apple,cherry", 3, &[1, 2]).unwrap();
        let ghost = OutcomeSet::units("ghost", 3, &[0]).unwrap();
        let v_ac = best_of_k(&ac, &c, &theta, 2, DEFAULT_BEST_OF_K_BUDGET, 0)
            .unwrap()
            .value;
        let v_g = best_of_k(&ghost, &c, &theta, 2, DEFAULT_BEST_OF_K_BUDGET, 0)
            .unwrap()
            .value;
        assert!((v_ac - 4.0 / 9.0).abs() < 1e-15);
        assert!((v_g - 5.0 / 9.0).abs() < 1e-15);
        assert!((v_ac - best_of_k_oracle(&[1, 2], &[10.0, 5.0, 0.0], 2)).abs() < 1e-15);
    }

    #[test]
    fn best_of_k_monte_carlo_close_to_exact() {
        let (ga, _, c) = pac();
        let theta = u(&[2, 9, 4]);
        let exact = best_of_k(&ga, &c, &theta, 4, DEFAULT_BEST_OF_K_BUDGET, 0).unwrap();
        let mc = best_of_k(&ga, &c, &theta, 4, 10, 11).unwrap();
        assert!(!mc.exact);
        assert!((mc.value - exact.value).abs() < 4.0 * mc.std_error + 1e-9);
    }

    #[test]
    fn quantile_threshold_examples() {
        let c = OutcomeSet::units("C", 3, &[0, 1, 2]).unwrap();
        assert_eq!(
            quantile_threshold(&c, &u(&[3, 2, 1]), 1.0).unwrap(),
            Threshold::BelowAll
        );
        assert_eq!(
            quantile_threshold(&c, &u(&[3, 2, 1]), 1.0 / 3.0).unwrap(),
            Threshold::Value(2.0)
        );
        assert_eq!(
            quantile_threshold(&c, &u(&[5, 5, 5]), 0.4).unwrap(),
            Threshold::Value(5.0)
        );
        assert!(quantile_threshold(&c, &u(&[5, 5, 5]), 0.0).is_err());
    }

    #[test]
    fn quantilizer_examples() {
        let c = OutcomeSet::units("C", 4, &[0, 1, 2, 3]).unwrap();
        let x = OutcomeSet::units("X", 4, &[1, 3]).unwrap();
        assert_eq!(quantilize(&x, &c, &u(&[1, 8, 3, 2]), 1.0).unwrap(), 0.5);
        assert_eq!(quantilize(&x, &c, &u(&[1, 8, 3, 2]), 0.25).unwrap(), 1.0);
        assert_eq!(quantilize(&x, &c, &u(&[9, 8, 3, 2]), 0.25).unwrap(), 0.0);
        assert!((quantilize(&x, &c, &u(&[4, 4, 4, 4]), 0.3).unwrap() - 0.5).abs() < 1e-12);
        // q = 1/2 with values 9 > 8 > 3 > 2: top two each carry weight 1/2
        assert!((quantilize(&x, &c, &u(&[9, 8, 3, 2]), 0.5).unwrap() - 0.5).abs() < 1e-12);
        // q = 3/8: M = 8, C_> = {9} mass 1/4, tie term (3/8 − 1/4)/(1/4) = 1/2
        let v = quantilize(&x, &c, &u(&[9, 8, 3, 2]), 0.375).unwrap();
        assert!((v - (0.25 / 0.375) * 0.5).abs() < 1e-12, "{v}");
    }

    #[test]
    fn numerical_rule_values() {
        assert_eq!(numerical_rule(true, 1).unwrap(), 1.0);
        assert_eq!(numerical_rule(true, 4).unwrap(), 0.0);
        assert_eq!(numerical_rule(false, 1).unwrap(), 0.0);
        assert!(numerical_rule(true, 7).is_err());
        let c = OutcomeSet::units("C", 5, &[0, 1, 2, 3, 4]).unwrap();
        let a = OutcomeSet::units("A", 5, &[0]).unwrap();
        let b = OutcomeSet::units("B", 5, &[1, 2, 3, 4]).unwrap();
        let rule = DecisionRule::Numerical { a: a.clone() };
        let theta1 = ParameterVector::from_ints(&[1, 0, 0, 0, 0, 0]);
        let theta3 = ParameterVector::from_ints(&[0, 0, 1, 0, 0, 0]);
        assert_eq!(rule.evaluate(&a, &c, &theta1).unwrap(), 1.0);
        assert_eq!(rule.evaluate(&b, &c, &theta1).unwrap(), 0.0);
        assert_eq!(rule.evaluate(&b, &c, &theta3).unwrap(), 1.0);
    }

    #[test]
    fn stubborn_is_not_invariant() {
        let (ga, _, c) = pac();
        let rule = DecisionRule::Stubborn { choice: ga.clone() };
        let phi = Permutation::transposition(3, 0, 2).unwrap();
        assert_eq!(rule.evaluate(&ga, &c, &u(&[1, 2, 3])).unwrap(), 1.0);
        assert!(!eu_invariance_check(&rule, &ga, &c, &u(&[1, 2, 3]), &phi).unwrap());
        assert!(!rule.is_eu_determined());
    }

    #[test]
    fn frac_optimal_chain_edges() {
        let y = OutcomeSet::units("Y", 4, &[0, 1, 2, 3]).unwrap();
        let x = OutcomeSet::units("X", 4, &[1]).unwrap();
        let theta = u(&[3, 3, 1, 0]);
        assert!(frac_optimal_inequalities_check(&x, &y, &y, &theta).unwrap());
        assert!(frac_optimal_inequalities_check(&x, &x, &y, &theta).unwrap());
        assert!(frac_optimal_inequalities_check(&y, &x, &y, &theta).is_err());
    }

    #[test]
    fn rule_parsing_round_trip() {
        for text in [
            "optimal",
            "frac-optimal",
            "anti-optimal",
            "rand",
            "boltzmann:T=1",
            "boltzmann:T=0.1",
            "satisficer:t=3",
            "satisficer:t=-1",
            "quantilizer:q=0.25",
            "best-of-k:k=2",
            "best-of-k:k=3,budget=10,seed=4",
        ] {
            let rule: DecisionRule = text.parse().unwrap();
            assert_eq!(rule.to_string(), text);
        }
        for bad in [
            "boltzmann",
            "boltzmann:T=0",
            "quantilizer:q=2",
            "best-of-k:k=0",
            "nope",
            "rand:x=1",
            "stubborn:choice=A",
        ] {
            assert!(bad.parse::<DecisionRule>().is_err(), "{bad}");
        }
        let a = OutcomeSet::units("A", 3, &[0]).unwrap();
        let rule =
            DecisionRule::parse_with("stubborn:choice=A", &|n| (n == "A").then(|| a.clone()))
                .unwrap();
        assert_eq!(rule.to_string(), "stubborn:choice=A");
    }

    fn eu_rules() -> Vec<DecisionRule> {
        vec![
            DecisionRule::Optimal,
            DecisionRule::FracOptimal,
            DecisionRule::AntiOptimal,
            DecisionRule::Boltzmann { temperature: 0.7 },
            DecisionRule::BestOfK {
                k: 2,
                budget: DEFAULT_BEST_OF_K_BUDGET,
                seed: 0,
            },
            DecisionRule::Satisficer { threshold: 1.0 },
            DecisionRule::Quantilizer { q: 0.4 },
            DecisionRule::Rand,
        ]
    }

    /// Random `X ⊆ C` of unit vectors plus a mixed vector, with a utility.
    fn sets_strategy() -> impl Strategy<Value = (OutcomeSet, OutcomeSet, ParameterVector)> {
        (2usize..6).prop_flat_map(|d| {
            (
                prop::collection::vec(any::<bool>(), d),
                prop::collection::vec(any::<bool>(), d),
                prop::collection::vec(-4i64..5, d),
            )
                .prop_map(move |(in_c, in_x, theta)| {
                    let mut c_el = vec![ParameterVector::constant(d, 1.0 / d as f64).unwrap()];
                    let mut x_el = vec![c_el[0].clone()];
                    for i in 0..d {
                        if in_c[i] || i == 0 {
                            let e = unit_vector(d, i).unwrap();
                            if in_x[i] {
                                x_el.push(e.clone());
                            }
                            c_el.push(e);
                        }
                    }
                    (
                        OutcomeSet::new("X", x_el).unwrap(),
                        OutcomeSet::new("C", c_el).unwrap(),
                        ParameterVector::from_ints(&theta),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn rules_are_probabilities_and_monotone((x, c, theta) in sets_strategy()) {
            let smaller = OutcomeSet::with_dim("X'", x.dim(), x.elements()[..1].to_vec()).unwrap();
            for rule in eu_rules() {
                let fx = rule.evaluate(&x, &c, &theta).unwrap();
                let fs = rule.evaluate(&smaller, &c, &theta).unwrap();
                prop_assert!((0.0..=1.0 + 1e-12).contains(&fx));
                prop_assert!(fs <= fx + 1e-12, "{} {} {}", rule, fs, fx);
            }
        }

        #[test]
        fn partition_sums_to_one((x, c, theta) in sets_strategy()) {
            let rest = c.difference(&x).unwrap();
            for rule in eu_rules().into_iter().filter(|r| !r.is_indicator()) {
                if matches!(rule, DecisionRule::Satisficer { .. }) {
                    continue;
                }
                let total = rule.evaluate(&x, &c, &theta).unwrap() + rule.evaluate(&rest, &c, &theta).unwrap();
                prop_assert!((total - 1.0).abs() <= 1e-9, "{} {}", rule, total);
            }
        }

        #[test]
        fn anti_optimal_is_optimal_of_negation((x, c, theta) in sets_strategy()) {
            prop_assert_eq!(is_anti_optimal(&x, &c, &theta).unwrap(), is_optimal(&x, &c, &theta.neg()).unwrap());
        }

        #[test]
        fn quantilizer_q_one_is_base_mass((x, c, theta) in sets_strategy()) {
            prop_assert_eq!(quantilize(&x, &c, &theta, 1.0).unwrap(), x.len() as f64 / c.len() as f64);
        }

        #[test]
        fn cold_boltzmann_approaches_frac_optimal(
            (x, c, _) in sets_strategy(),
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta = ParameterVector::new((0..c.dim()).map(|_| rng.random_range(0..50) as f64 * 0.5 + rng.random::<f64>() * 0.01).collect()).unwrap();
            let values = expected_utilities(&c, &theta);
            let best = max_of(&values);
            let second = values.iter().copied().filter(|v| *v < best).fold(f64::NEG_INFINITY, f64::max);
            prop_assume!(values.iter().filter(|v| **v == best).count() == 1 && best - second > 0.05);
            let b = boltzmann(&x, &c, &theta, 1e-3).unwrap();
            prop_assert!((b - frac_optimal(&x, &c, &theta).unwrap()).abs() <= 1e-6);
        }
    }
}
