//! ε-greedy training on a bandit with deterministic arm payoffs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decisions::Estimate;
use crate::error::{Error, Result};
use crate::outcomes::OutcomeSet;
use crate::perm::{ParameterVector, Permutation};
use crate::tendency::SetFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanditSpec {
    pub utilities: ParameterVector,
    pub epsilon: f64,
    pub trials: u32,
    /// Initial action-value estimates, zeros by default.
    pub q_init: Vec<f64>,
}

impl BanditSpec {
    pub fn new(utilities: ParameterVector, epsilon: f64, trials: u32) -> Result<Self> {
        let arms = utilities.dim();
        Self::with_init(utilities, epsilon, trials, vec![0.0; arms])
    }

    pub fn with_init(
        utilities: ParameterVector,
        epsilon: f64,
        trials: u32,
        q_init: Vec<f64>,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "ε must lie in (0, 1), got {epsilon}"
            )));
        }
        if trials == 0 {
            return Err(Error::InvalidParameter(
                "at least one trial is required".into(),
            ));
        }
        if utilities.dim() < 2 {
            return Err(Error::InvalidParameter(
                "a bandit needs at least two arms".into(),
            ));
        }
        if q_init.len() != utilities.dim() {
            return Err(Error::DimensionMismatch {
                expected: utilities.dim(),
                found: q_init.len(),
            });
        }
        if q_init.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("q_init must be finite".into()));
        }
        Ok(Self {
            utilities,
            epsilon,
            trials,
            q_init,
        })
    }

    pub fn arms(&self) -> usize {
        self.utilities.dim()
    }

    fn with_utilities(&self, utilities: ParameterVector) -> Self {
        Self {
            utilities,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    /// Uniform over the arms with the largest learned value.
    pub policy: Vec<f64>,
    pub values: Vec<f64>,
}

fn argmax_all(values: &[f64]) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len()).filter(|&i| values[i] == best).collect()
}

/// One training run. Each trial takes a greedy arm (ties uniform) with
/// probability `1 − ε`, otherwise one of the other arms uniformly, and
/// overwrites that arm's estimate with its payoff.
pub fn train<R: Rng>(spec: &BanditSpec, rng: &mut R) -> TrainOutcome {
    let k = spec.arms();
    let payoff = spec.utilities.as_slice();
    let mut q = spec.q_init.clone();
    for _ in 0..spec.trials {
        let greedy = argmax_all(&q);
        let g = greedy[rng.random_range(0..greedy.len())];
        let arm = if rng.random::<f64>() < spec.epsilon {
            let other = rng.random_range(0..k - 1);
            if other >= g {
                other + 1
            } else {
                other
            }
        } else {
            g
        };
        q[arm] = payoff[arm];
    }
    let winners = argmax_all(&q);
    let mut policy = vec![0.0; k];
    for &w in &winners {
        policy[w] = 1.0 / winners.len() as f64;
    }
    TrainOutcome { policy, values: q }
}

/// Run `run` of the seeded family; streams never overlap across runs.
pub fn train_run(spec: &BanditSpec, seed: u64, run: u64) -> TrainOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    train(spec, &mut rng)
}

fn policies(spec: &BanditSpec, num_runs: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..num_runs as u64)
        .into_par_iter()
        .map(|run| train_run(spec, seed, run).policy)
        .collect()
}

/// Mean exploitation mass on `arms` across `num_runs` seeded runs.
pub fn p_train_estimate(
    spec: &BanditSpec,
    arms: &[usize],
    num_runs: usize,
    seed: u64,
) -> Result<Estimate> {
    if num_runs == 0 {
        return Err(Error::InvalidParameter("num_runs must be positive".into()));
    }
    if let Some(&bad) = arms.iter().find(|&&a| a >= spec.arms()) {
        return Err(Error::InvalidParameter(format!("arm {bad} out of range")));
    }
    let masses: Vec<f64> = policies(spec, num_runs, seed)
        .iter()
        .map(|p| arms.iter().map(|&a| p[a]).sum::<f64>().min(1.0))
        .collect();
    Ok(Estimate::from_samples(&masses))
}

/// Mean exploitation mass per arm.
pub fn arm_frequencies(spec: &BanditSpec, num_runs: usize, seed: u64) -> Result<Vec<Estimate>> {
    if num_runs == 0 {
        return Err(Error::InvalidParameter("num_runs must be positive".into()));
    }
    let runs = policies(spec, num_runs, seed);
    Ok((0..spec.arms())
        .map(|a| Estimate::from_samples(&runs.iter().map(|p| p[a]).collect::<Vec<_>>()))
        .collect())
}

/// `1 − (1 − ε/(k−1))^T`.
pub fn success_lower_bound(spec: &BanditSpec) -> f64 {
    1.0 - (1.0 - spec.epsilon / (spec.arms() - 1) as f64).powi(spec.trials as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetargetedRun {
    pub permutation: Permutation,
    pub p_a: Estimate,
    pub p_b: Estimate,
    pub flipped: bool,
    pub arm_frequencies: Vec<Estimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanditRetargetReport {
    pub p_a: Estimate,
    pub p_b: Estimate,
    /// `p(A|u) > p(B|u)` by more than three standard errors.
    pub antecedent: bool,
    pub retargeted: Vec<RetargetedRun>,
    /// Every pair of retargeted runs differs on some arm by more than three
    /// standard errors.
    pub distinct: bool,
    pub passes: bool,
}

const SIGMAS: f64 = 3.0;

fn clearly_greater(x: &Estimate, y: &Estimate) -> bool {
    // A and B masses are complementary per run, so the difference has twice
    // the spread of either one.
    x.value - y.value > SIGMAS * (x.std_error + y.std_error)
}

fn distinguishable(x: &[Estimate], y: &[Estimate]) -> bool {
    x.iter().zip(y).any(|(a, b)| {
        (a.value - b.value).abs() > SIGMAS * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
    })
}

/// Statistical check of 4-retargetability from `A = {arm 1}` to the other
/// arms via `φ_i = a_1 ↔ a_i`.
pub fn bandit_retarget_check(
    utilities: &ParameterVector,
    epsilon: f64,
    trials: u32,
    num_runs: usize,
    seed: u64,
) -> Result<BanditRetargetReport> {
    let best = utilities
        .as_slice()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if utilities.as_slice().iter().filter(|&&v| v == best).count() > 1 {
        return Err(Error::TiedMaximum);
    }
    let spec = BanditSpec::new(utilities.clone(), epsilon, trials)?;
    let k = spec.arms();
    let b_arms: Vec<usize> = (1..k).collect();
    let p_a = p_train_estimate(&spec, &[0], num_runs, seed)?;
    let p_b = p_train_estimate(&spec, &b_arms, num_runs, seed)?;
    let antecedent = clearly_greater(&p_a, &p_b);
    let mut retargeted = Vec::new();
    if antecedent {
        for i in 1..k {
            let phi = Permutation::transposition(k, 0, i)?;
            let moved = spec.with_utilities(phi.act_vector(utilities)?);
            let run_seed = seed.wrapping_add(i as u64);
            let q_a = p_train_estimate(&moved, &[0], num_runs, run_seed)?;
            let q_b = p_train_estimate(&moved, &b_arms, num_runs, run_seed)?;
            retargeted.push(RetargetedRun {
                permutation: phi,
                flipped: clearly_greater(&q_b, &q_a),
                p_a: q_a,
                p_b: q_b,
                arm_frequencies: arm_frequencies(&moved, num_runs, run_seed)?,
            });
        }
    }
    let distinct = retargeted.iter().enumerate().all(|(i, x)| {
        retargeted[i + 1..]
            .iter()
            .all(|y| distinguishable(&x.arm_frequencies, &y.arm_frequencies))
    });
    let passes = !antecedent || (retargeted.iter().all(|r| r.flipped) && distinct);
    Ok(BanditRetargetReport {
        p_a,
        p_b,
        antecedent,
        retargeted,
        distinct,
        passes,
    })
}

/// `f(X | u)`: estimated probability that training on payoffs `u` ends with
/// an exploitation policy inside `X`, where `X` is a set of arm indicator
/// vectors.
#[derive(Clone, Debug)]
pub struct BanditFunction {
    pub epsilon: f64,
    pub trials: u32,
    pub num_runs: usize,
    pub seed: u64,
}

impl SetFunction for BanditFunction {
    fn value(&self, set: &OutcomeSet, theta: &ParameterVector) -> Result<f64> {
        let spec = BanditSpec::new(theta.clone(), self.epsilon, self.trials)?;
        let arms = set
            .elements()
            .iter()
            .map(|v| {
                let s = v.as_slice();
                let ones: Vec<usize> = (0..s.len()).filter(|&i| s[i] == 1.0).collect();
                match ones.as_slice() {
                    [i] if s.iter().sum::<f64>() == 1.0 => Ok(*i),
                    _ => Err(Error::InvalidParameter(format!(
                        "{v} is not an arm indicator"
                    ))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        p_train_estimate(&spec, &arms, self.num_runs, self.seed).map(|e| e.value)
    }
}
