//! Rewardless MDPs, discounted visit distributions and recurrent state
//! distributions (RSDs).
//!
//! Fixture text format:
//!
//! ```text
//! # comment
//! states: s0, s1
//! actions: stay, go
//! s0 go -> {s1: 1}
//! s0 stay -> {s0: 0.5, s1: 1/2}
//! s1 * -> {s1: 1}
//! ```
//!
//! `*` expands to every action. Each `(state, action)` pair must be given
//! exactly once and each row must sum to 1 within `1e-12`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decisions::{is_optimal, Estimate, TIE_TOLERANCE};
use crate::error::{Error, Result};
use crate::outcomes::{nondominated, OutcomeSet};
use crate::perm::{ParameterDomain, ParameterVector};
use crate::tendency::{check_geq_most, ContextRule, OrbitTendencyReport};

pub const DEFAULT_POLICY_BUDGET: u128 = 1_000_000;
const ROW_SUM_TOLERANCE: f64 = 1e-12;
const RESIDUAL_TOLERANCE: f64 = 1e-10;
const DEDUP_DIGITS: i32 = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardlessMdp {
    states: Vec<String>,
    actions: Vec<String>,
    /// `transitions[s][a][s']`
    transitions: Vec<Vec<Vec<f64>>>,
}

/// Action index per state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy(pub Vec<usize>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisitDistribution {
    pub start: usize,
    pub gamma: f64,
    pub occupancy: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneCycle {
    pub state: usize,
    /// Every action self-loops.
    pub terminal: bool,
}

impl RewardlessMdp {
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        transitions: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let d = states.len();
        if d == 0 || actions.is_empty() {
            return Err(Error::InvalidParameter(
                "an MDP needs at least one state and one action".into(),
            ));
        }
        if transitions.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: transitions.len(),
            });
        }
        for (s, rows) in transitions.iter().enumerate() {
            if rows.len() != actions.len() {
                return Err(Error::DimensionMismatch {
                    expected: actions.len(),
                    found: rows.len(),
                });
            }
            for (a, row) in rows.iter().enumerate() {
                check_row(row, d).map_err(|m| {
                    Error::InvalidParameter(format!("row ({}, {}): {m}", states[s], actions[a]))
                })?;
            }
        }
        Ok(Self {
            states,
            actions,
            transitions,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn transition(&self, s: usize, a: usize) -> &[f64] {
        &self.transitions[s][a]
    }

    pub fn is_deterministic(&self) -> bool {
        self.transitions
            .iter()
            .flatten()
            .all(|row| row.iter().all(|&p| p == 0.0 || p == 1.0))
    }

    fn check_policy(&self, policy: &Policy) -> Result<()> {
        if policy.0.len() != self.num_states() {
            return Err(Error::DimensionMismatch {
                expected: self.num_states(),
                found: policy.0.len(),
            });
        }
        if let Some(&a) = policy.0.iter().find(|&&a| a >= self.num_actions()) {
            return Err(Error::InvalidParameter(format!(
                "action index {a} out of range"
            )));
        }
        Ok(())
    }

    fn check_state(&self, s: usize) -> Result<()> {
        if s >= self.num_states() {
            return Err(Error::InvalidParameter(format!(
                "state index {s} out of range"
            )));
        }
        Ok(())
    }

    /// `P_π[s][s'] = T(s, π(s), s')`.
    fn policy_matrix(&self, policy: &Policy) -> DMatrix<f64> {
        let d = self.num_states();
        DMatrix::from_fn(d, d, |s, t| self.transitions[s][policy.0[s]][t])
    }

    /// Every deterministic stationary policy, in lexicographic order.
    pub fn policies(&self, budget: u128) -> Result<Vec<Policy>> {
        let count = (self.num_actions() as u128)
            .checked_pow(self.num_states() as u32)
            .unwrap_or(u128::MAX);
        if count > budget {
            return Err(Error::BoundExceeded {
                what: "policy enumeration",
                needed: count,
                bound: budget,
            });
        }
        let d = self.num_states();
        let k = self.num_actions();
        let mut out = Vec::with_capacity(count as usize);
        let mut current = vec![0usize; d];
        loop {
            out.push(Policy(current.clone()));
            let mut pos = d;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                current[pos] += 1;
                if current[pos] < k {
                    break;
                }
                current[pos] = 0;
            }
        }
    }

    /// Parses the fixture text format described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut states: Option<Vec<String>> = None;
        let mut actions: Option<Vec<String>> = None;
        let mut rows: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("states:") {
                if states.is_some() {
                    return Err(err("duplicate `states:` line".into()));
                }
                states = Some(parse_names(rest).map_err(err)?);
                continue;
            }
            if let Some(rest) = line.strip_prefix("actions:") {
                if actions.is_some() {
                    return Err(err("duplicate `actions:` line".into()));
                }
                actions = Some(parse_names(rest).map_err(err)?);
                continue;
            }
            let (Some(st), Some(ac)) = (&states, &actions) else {
                return Err(err("transition row before `states:` and `actions:`".into()));
            };
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| err("expected `state action -> {...}`".into()))?;
            let mut lhs_parts = lhs.split_whitespace();
            let (Some(s_name), Some(a_name), None) =
                (lhs_parts.next(), lhs_parts.next(), lhs_parts.next())
            else {
                return Err(err("left side must be `state action`".into()));
            };
            let s = st
                .iter()
                .position(|n| n == s_name)
                .ok_or_else(|| err(format!("unknown state `{s_name}`")))?;
            let action_ids: Vec<usize> = if a_name == "*" {
                (0..ac.len()).collect()
            } else {
                vec![ac
                    .iter()
                    .position(|n| n == a_name)
                    .ok_or_else(|| err(format!("unknown action `{a_name}`")))?]
            };
            let row = parse_distribution(rhs.trim(), st).map_err(err)?;
            check_row(&row, st.len()).map_err(err)?;
            for a in action_ids {
                if rows.insert((s, a), row.clone()).is_some() {
                    return Err(err(format!("duplicate row for ({s_name}, {})", ac[a])));
                }
            }
        }
        let states = states.ok_or(Error::Parse {
            line: 0,
            message: "missing `states:` line".into(),
        })?;
        let actions = actions.ok_or(Error::Parse {
            line: 0,
            message: "missing `actions:` line".into(),
        })?;
        let mut transitions = Vec::with_capacity(states.len());
        for (s, s_name) in states.iter().enumerate() {
            let mut per_action = Vec::with_capacity(actions.len());
            for (a, a_name) in actions.iter().enumerate() {
                let row = rows.remove(&(s, a)).ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("missing row for ({s_name}, {a_name})"),
                })?;
                per_action.push(row);
            }
            transitions.push(per_action);
        }
        Self::new(states, actions, transitions)
    }

    /// Canonical fixture text; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states: {}", self.states.join(", "));
        let _ = writeln!(out, "actions: {}", self.actions.join(", "));
        for (s, s_name) in self.states.iter().enumerate() {
            for (a, a_name) in self.actions.iter().enumerate() {
                let entries: Vec<String> = self.transitions[s][a]
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p != 0.0)
                    .map(|(t, p)| format!("{}: {p:?}", self.states[t]))
                    .collect();
                let _ = writeln!(out, "{s_name} {a_name} -> {{{}}}", entries.join(", "));
            }
        }
        out
    }
}

fn check_row(row: &[f64], d: usize) -> std::result::Result<(), String> {
    if row.len() != d {
        return Err(format!("row has {} entries, expected {d}", row.len()));
    }
    if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err("probabilities must be finite and non-negative".into());
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(format!("probabilities sum to {sum}, not 1"));
    }
    Ok(())
}

fn parse_names(text: &str) -> std::result::Result<Vec<String>, String> {
    let names: Vec<String> = text.split(',').map(|s| s.trim().to_string()).collect();
    if names
        .iter()
        .any(|n| n.is_empty() || n.contains(char::is_whitespace) || n == "*")
    {
        return Err("names must be nonempty, without whitespace, and not `*`".into());
    }
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != names.len() {
        return Err("duplicate name".into());
    }
    Ok(names)
}

fn parse_probability(text: &str) -> std::result::Result<f64, String> {
    let value = match text.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator `{n}`"))?;
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator `{d}`"))?;
            if d == 0.0 {
                return Err("zero denominator".into());
            }
            n / d
        }
        None => text
            .parse()
            .map_err(|_| format!("bad probability `{text}`"))?,
    };
    if !value.is_finite() {
        return Err(format!("non-finite probability `{text}`"));
    }
    Ok(value)
}

fn parse_distribution(text: &str, states: &[String]) -> std::result::Result<Vec<f64>, String> {
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or("distribution must be wrapped in `{...}`")?;
    let mut row = vec![0.0; states.len()];
    let mut seen = vec![false; states.len()];
    for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, prob) = item
            .split_once(':')
            .ok_or_else(|| format!("expected `state: p`, got `{item}`"))?;
        let name = name.trim();
        let t = states
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| format!("unknown state `{name}`"))?;
        if seen[t] {
            return Err(format!("state `{name}` listed twice"));
        }
        seen[t] = true;
        row[t] = parse_probability(prob.trim())?;
    }
    Ok(row)
}

/// Solves `x = e_s + γ P_πᵀ x`.
pub fn visit_distribution(
    mdp: &RewardlessMdp,
    policy: &Policy,
    s: usize,
    gamma: f64,
) -> Result<VisitDistribution> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "γ must lie in [0, 1), got {gamma}"
        )));
    }
    mdp.check_policy(policy)?;
    mdp.check_state(s)?;
    let d = mdp.num_states();
    let p = mdp.policy_matrix(policy);
    let system = DMatrix::identity(d, d) - p.transpose() * gamma;
    let rhs = DVector::from_fn(d, |i, _| if i == s { 1.0 } else { 0.0 });
    let x = system
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem(format!("visit distribution from state {s}")))?;
    let residual = (&system * &x - &rhs).amax();
    let scale = x.amax().max(1.0);
    if residual > RESIDUAL_TOLERANCE * scale {
        return Err(Error::SingularSystem(format!(
            "residual {residual:e} too large"
        )));
    }
    Ok(VisitDistribution {
        start: s,
        gamma,
        occupancy: x.iter().copied().collect(),
    })
}

fn round_key(v: &[f64]) -> Vec<i64> {
    let scale = 10f64.powi(DEDUP_DIGITS);
    v.iter().map(|x| (x * scale).round() as i64).collect()
}

fn dedup_rounded(vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut seen = BTreeMap::new();
    for v in vectors {
        seen.entry(round_key(&v)).or_insert(v);
    }
    seen.into_values().collect()
}

/// Distinct visit distributions over all deterministic policies.
pub fn enumerate_visit_set(
    mdp: &RewardlessMdp,
    s: usize,
    gamma: f64,
) -> Result<Vec<VisitDistribution>> {
    let policies = mdp.policies(DEFAULT_POLICY_BUDGET)?;
    let all = policies
        .par_iter()
        .map(|p| visit_distribution(mdp, p, s, gamma).map(|v| v.occupancy))
        .collect::<Result<Vec<_>>>()?;
    Ok(dedup_rounded(all)
        .into_iter()
        .map(|occupancy| VisitDistribution {
            start: s,
            gamma,
            occupancy,
        })
        .collect())
}

/// Long-run average state occupancy of `policy` started at `s`.
pub fn rsd(mdp: &RewardlessMdp, policy: &Policy, s: usize) -> Result<ParameterVector> {
    mdp.check_policy(policy)?;
    mdp.check_state(s)?;
    let d = mdp.num_states();
    if mdp.is_deterministic() {
        let next = |t: usize| {
            mdp.transitions[t][policy.0[t]]
                .iter()
                .position(|&p| p == 1.0)
                .unwrap_or(t)
        };
        let mut first_visit = vec![usize::MAX; d];
        let mut path = Vec::new();
        let mut cur = s;
        while first_visit[cur] == usize::MAX {
            first_visit[cur] = path.len();
            path.push(cur);
            cur = next(cur);
        }
        let cycle = &path[first_visit[cur]..];
        let mut out = vec![0.0; d];
        for &t in cycle {
            out[t] = 1.0 / cycle.len() as f64;
        }
        return ParameterVector::new(out);
    }
    stochastic_rsd(mdp, policy, s)
}

fn stochastic_rsd(mdp: &RewardlessMdp, policy: &Policy, s: usize) -> Result<ParameterVector> {
    let d = mdp.num_states();
    let succ: Vec<Vec<usize>> = (0..d)
        .map(|t| {
            (0..d)
                .filter(|&u| mdp.transitions[t][policy.0[t]][u] > 0.0)
                .collect()
        })
        .collect();
    let reach = |from: usize| {
        let mut seen = vec![false; d];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(t) = stack.pop() {
            for &u in &succ[t] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    };
    let from_s = reach(s);
    let closure: Vec<Vec<bool>> = (0..d).map(reach).collect();
    // t is recurrent iff everything reachable from t can reach t back
    let recurrent: Vec<bool> = (0..d)
        .map(|t| (0..d).all(|u| !closure[t][u] || closure[u][t]))
        .collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for t in (0..d).filter(|&t| from_s[t] && recurrent[t]) {
        if classes.iter().any(|c| closure[c[0]][t]) {
            continue;
        }
        classes.push((0..d).filter(|&u| closure[t][u]).collect());
    }
    if classes.len() != 1 {
        return Err(Error::MultipleRecurrentClasses { state: s });
    }
    let class = &classes[0];
    let m = class.len();
    // πᵀ (P_C − I) = 0 with Σπ = 1: replace the last equation by the sum
    let mut system = DMatrix::zeros(m, m);
    for (i, &u) in class.iter().enumerate() {
        for (j, &t) in class.iter().enumerate() {
            system[(i, j)] = mdp.transitions[t][policy.0[t]][u] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..m {
        system[(m - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(m);
    rhs[m - 1] = 1.0;
    let pi = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("stationary distribution".into()))?;
    let mut out = vec![0.0; d];
    for (i, &t) in class.iter().enumerate() {
        out[t] = pi[i].max(0.0);
    }
    ParameterVector::new(out)
}

/// Distinct RSDs over all deterministic policies, as a set named `RSD`.
pub fn rsd_set(mdp: &RewardlessMdp, s: usize) -> Result<OutcomeSet> {
    let policies = mdp.policies(DEFAULT_POLICY_BUDGET)?;
    let all = policies
        .par_iter()
        .map(|p| rsd(mdp, p, s).map(ParameterVector::into_inner))
        .collect::<Result<Vec<_>>>()?;
    let vectors = dedup_rounded(all)
        .into_iter()
        .map(ParameterVector::new)
        .collect::<Result<Vec<_>>>()?;
    OutcomeSet::new("RSD", vectors)
}

pub fn rsd_nd(mdp: &RewardlessMdp, s: usize) -> Result<OutcomeSet> {
    Ok(nondominated(&rsd_set(mdp, s)?)?.renamed("RSD_nd"))
}

pub fn one_cycle_states(mdp: &RewardlessMdp) -> Vec<OneCycle> {
    (0..mdp.num_states())
        .filter_map(|s| {
            let loops: Vec<bool> = (0..mdp.num_actions())
                .map(|a| mdp.transitions[s][a][s] == 1.0)
                .collect();
            loops.iter().any(|&l| l).then(|| OneCycle {
                state: s,
                terminal: loops.iter().all(|&l| l),
            })
        })
        .collect()
}

/// Whether some element of `d` attains `max_{x ∈ rsds} x·r`.
pub fn average_optimal_check(
    reward: &ParameterVector,
    d: &OutcomeSet,
    rsds: &OutcomeSet,
) -> Result<bool> {
    Ok(is_optimal(d, rsds, reward)? == 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    IidUniform01,
    IidGaussian,
}

impl SamplerKind {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "iid-uniform-01" => Ok(Self::IidUniform01),
            "iid-gaussian" => Ok(Self::IidGaussian),
            other => Err(Error::InvalidParameter(format!(
                "unknown sampler `{other}`"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::IidUniform01 => "iid-uniform-01",
            Self::IidGaussian => "iid-gaussian",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardSamplerSpec {
    pub kind: SamplerKind,
    pub seed: u64,
}

impl RewardSamplerSpec {
    /// `count` reward vectors of length `d`, deterministic in the seed.
    pub fn sample(&self, d: usize, count: usize) -> Vec<ParameterVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..count)
            .map(|_| {
                let v: Vec<f64> = match self.kind {
                    SamplerKind::IidUniform01 => {
                        (0..d).map(|_| StandardUniform.sample(&mut rng)).collect()
                    }
                    SamplerKind::IidGaussian => {
                        (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
                    }
                };
                ParameterVector::new(v).expect("samplers produce finite values")
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvgOptEstimate {
    pub estimate: Estimate,
    pub ci95: (f64, f64),
    /// Samples dropped because the optimum was attained by several RSDs.
    pub discarded_ties: u64,
}

/// Monte Carlo probability that `d` contains an average-optimal RSD from `s`.
pub fn avg_opt_probability(
    mdp: &RewardlessMdp,
    d: &OutcomeSet,
    sampler: &RewardSamplerSpec,
    num_samples: usize,
    s: usize,
) -> Result<AvgOptEstimate> {
    let rsds = rsd_set(mdp, s)?;
    d.require_subset(&rsds)?;
    let rewards = sampler.sample(mdp.num_states(), num_samples);
    let outcomes = rewards
        .par_iter()
        .map(|r| {
            let values: Vec<f64> = rsds
                .elements()
                .iter()
                .map(|x| {
                    x.as_slice()
                        .iter()
                        .zip(r.as_slice())
                        .map(|(a, b)| a * b)
                        .sum()
                })
                .collect();
            let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if values
                .iter()
                .filter(|v| **v >= best - TIE_TOLERANCE)
                .count()
                > 1
            {
                return Ok(None);
            }
            average_optimal_check(r, d, &rsds).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    let kept: Vec<bool> = outcomes.iter().flatten().copied().collect();
    let discarded_ties = (outcomes.len() - kept.len()) as u64;
    let successes = kept.iter().filter(|&&b| b).count() as u64;
    let estimate = Estimate::from_bernoulli(successes, kept.len() as u64);
    Ok(AvgOptEstimate {
        ci95: estimate.ci95(),
        estimate,
        discarded_ties,
    })
}

/// For each sampled reward, counts its full orbit: elements where `d` holds
/// an average-optimal RSD but `d_prime` does not, and vice versa.
pub fn orbit_avgprob_check(
    mdp: &RewardlessMdp,
    d_prime: &OutcomeSet,
    d: &OutcomeSet,
    n: u64,
    sampler: &RewardSamplerSpec,
    num_orbits: usize,
    s: usize,
) -> Result<Vec<OrbitTendencyReport>> {
    if mdp.num_states() > 8 {
        return Err(Error::BoundExceeded {
            what: "state reward orbit",
            needed: crate::perm::factorial(mdp.num_states()),
            bound: crate::perm::factorial(8),
        });
    }
    let rsds = rsd_set(mdp, s)?;
    d.require_subset(&rsds)?;
    d_prime.require_subset(&rsds)?;
    let f = ContextRule::new(crate::decisions::DecisionRule::Optimal, rsds);
    sampler
        .sample(mdp.num_states(), num_orbits)
        .iter()
        .map(|r| check_geq_most(&f, d_prime, d, r, &ParameterDomain::all(), n))
        .collect()
}

/// The seven-state deterministic MDP used as the power-seeking toy example.
pub const TOY_MDP_FIXTURE: &str = include_str!("../fixtures/toy_mdp.txt");

pub fn toy_mdp() -> RewardlessMdp {
    RewardlessMdp::parse(TOY_MDP_FIXTURE).expect("bundled fixture parses")
}
