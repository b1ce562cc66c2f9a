//! Scenario configs, built-in scenarios, run reports and table reproduction.

mod config;
mod report;
pub mod tables;

use rayon::prelude::*;

pub use config::{
    format_vector, parse_vector, BanditBlock, CertificateBlock, MdpBlock, SamplingBlock,
    ScenarioConfig, ScenarioKind, SetsBlock,
};
pub use report::{
    BanditResults, CertificateCheck, ControlCheck, CountTotals, MdpResults, OrbitResults,
    RuleResult, RunReport, ScenarioResults, Verdict, SCHEMA_VERSION, TOOL_VERSION,
};

use crate::bandit::{
    arm_frequencies, bandit_retarget_check, p_train_estimate, success_lower_bound, BanditSpec,
};
use crate::error::{Error, Result};
use crate::mdp::{
    avg_opt_probability, one_cycle_states, orbit_avgprob_check, rsd_set, RewardSamplerSpec,
    SamplerKind,
};
use crate::outcomes::{find_copies, unit_vector, OutcomeSet};
use crate::perm::ParameterVector;
use crate::tendency::{
    check_geq_most_sampled, check_multi_retargetable, curated_thetas, sample_grid_thetas,
    ContextRule, RetargetCertificate,
};

const SIGMAS: f64 = 3.0;

/// Built-in scenario ids with their config text.
pub const BUILTINS: [(&str, &str); 5] = [
    ("pacman3", include_str!("../../scenarios/pacman3.toml")),
    (
        "mr-actions5",
        include_str!("../../scenarios/mr-actions5.toml"),
    ),
    (
        "featurized4",
        include_str!("../../scenarios/featurized4.toml"),
    ),
    ("toy-mdp", include_str!("../../scenarios/toy-mdp.toml")),
    ("bandit5", include_str!("../../scenarios/bandit5.toml")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTINS.iter().map(|(name, _)| *name)
}

pub fn builtin(name: &str) -> Result<ScenarioConfig> {
    let (_, text) = BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown builtin scenario `{name}`")))?;
    ScenarioConfig::parse(text)
}

/// Runs `config` with its own seed.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    let seed = config.seed;
    let (results, holds) = match config.kind {
        ScenarioKind::Orbit => run_orbit(config, seed)?,
        ScenarioKind::Mdp => run_mdp(config, seed)?,
        ScenarioKind::Bandit => run_bandit(config, seed)?,
    };
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        scenario: config.id.clone(),
        seed,
        verdict: Verdict::from_bool(holds),
        results,
    })
}

fn run_orbit(config: &ScenarioConfig, seed: u64) -> Result<(ScenarioResults, bool)> {
    let r = config.resolve_orbit()?;
    let mut thetas = r.thetas.clone();
    thetas.extend(curated_thetas(r.dim));
    thetas.extend(sample_grid_thetas(r.dim, r.samples, seed));

    let mut rules = Vec::with_capacity(r.rules.len());
    for rule in &r.rules {
        let f = ContextRule::new(rule.clone(), r.c.clone());
        let sampled = check_geq_most_sampled(
            &f, &r.a, &r.b, r.dim, &r.domain, r.n, r.samples, seed, &r.thetas,
        )?;
        let mut totals = CountTotals::default();
        sampled.reports.iter().for_each(|rep| totals.add(rep));
        let certificate = match &r.certificate {
            None => None,
            Some(perms) => {
                let cert = RetargetCertificate::constant(perms.clone());
                let checks = thetas
                    .par_iter()
                    .map(|t| {
                        check_multi_retargetable(&f, &r.a, &r.b, t, &r.domain, &cert)
                            .map(|c| (t, c))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let failed: Vec<_> = checks.iter().filter(|(_, c)| !c.all()).collect();
                Some(CertificateCheck {
                    permutations: perms.clone(),
                    orbits_checked: checks.len(),
                    failures: failed.len(),
                    first_failure: failed.first().map(|(t, c)| ((*t).clone(), c.clone())),
                })
            }
        };
        let cert_ok = certificate.as_ref().map_or(true, |c| c.failures == 0);
        rules.push(RuleResult {
            rule: rule.to_string(),
            orbits_checked: sampled.reports.len(),
            violations: sampled.violations.len(),
            holds: sampled.all_hold && cert_ok,
            totals,
            fixtures: sampled.reports[..r.thetas.len()].to_vec(),
            first_violation: sampled
                .violations
                .first()
                .map(|&i| sampled.reports[i].clone()),
            certificate,
        });
    }
    let holds = rules.iter().all(|x| x.holds);
    let results = OrbitResults {
        dimension: r.dim,
        n: r.n,
        domain: r.domain.to_string(),
        a: r.a.elements().to_vec(),
        b: r.b.elements().to_vec(),
        c: r.c.elements().to_vec(),
        rules,
    };
    Ok((ScenarioResults::Orbit(results), holds))
}

fn run_mdp(config: &ScenarioConfig, seed: u64) -> Result<(ScenarioResults, bool)> {
    let block = config.mdp.as_ref().ok_or_else(|| Error::Config {
        field: "mdp".into(),
        message: "missing section".into(),
    })?;
    let mdp = config.load_mdp()?;
    let start = mdp.state_index(&block.start).ok_or_else(|| Error::Config {
        field: "mdp.start".into(),
        message: format!("unknown state `{}`", block.start),
    })?;
    let rsds = rsd_set(&mdp, start)?;
    let k = mdp.num_states();
    let units = |field: &str, label: &str, names: &[String]| -> Result<OutcomeSet> {
        let elements = names
            .iter()
            .map(|name| {
                let s = mdp.state_index(name).ok_or_else(|| Error::Config {
                    field: field.into(),
                    message: format!("unknown state `{name}`"),
                })?;
                let v = unit_vector(k, s)?;
                if !rsds.contains(&v) {
                    return Err(Error::Config {
                        field: field.into(),
                        message: format!(
                            "`{name}` is not a recurrent state distribution from `{}`",
                            block.start
                        ),
                    });
                }
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        OutcomeSet::with_dim(label, k, elements)
    };
    let d_prime = units("mdp.d_prime", "D'", &block.d_prime)?;
    let d = match &block.d {
        Some(names) => units("mdp.d", "D", names)?,
        None => rsds.difference(&d_prime)?.renamed("D"),
    };
    let kind = SamplerKind::parse(&block.sampler)?;
    let copies = find_copies(&d_prime, &d, block.n as usize)?;
    let reports = orbit_avgprob_check(
        &mdp,
        &d_prime,
        &d,
        block.n,
        &RewardSamplerSpec { kind, seed },
        block.orbits,
        start,
    )?;
    let mut totals = CountTotals::default();
    reports.iter().for_each(|rep| totals.add(rep));
    let violations: Vec<_> = reports.iter().filter(|rep| !rep.holds).collect();
    let avg_opt = avg_opt_probability(
        &mdp,
        &d_prime,
        &RewardSamplerSpec {
            kind,
            seed: seed.wrapping_add(1),
        },
        block.samples,
        start,
    )?;
    let avg_opt_bound = 1.0 / (block.n as f64 + 1.0);
    let avg_opt_within_bound =
        avg_opt.estimate.value <= avg_opt_bound + SIGMAS * avg_opt.estimate.std_error;
    let holds = violations.is_empty() && copies.is_some() && avg_opt_within_bound;
    let names = |set: &OutcomeSet| -> Vec<String> {
        set.elements()
            .iter()
            .map(|v| state_label(&mdp, v))
            .collect()
    };
    let results = MdpResults {
        start: block.start.clone(),
        rsds: rsds.elements().to_vec(),
        one_cycle_states: one_cycle_states(&mdp)
            .iter()
            .map(|c| mdp.states()[c.state].clone())
            .collect(),
        d_prime: names(&d_prime),
        d: names(&d),
        n: block.n,
        copies,
        orbits_checked: reports.len(),
        orbit_violations: violations.len(),
        totals,
        first_violation: violations.first().map(|rep| (*rep).clone()),
        avg_opt,
        avg_opt_bound,
        avg_opt_within_bound,
    };
    Ok((ScenarioResults::Mdp(results), holds))
}

fn state_label(mdp: &crate::mdp::RewardlessMdp, v: &ParameterVector) -> String {
    let s = v.as_slice();
    match s.iter().position(|&x| x == 1.0) {
        Some(i) if s.iter().sum::<f64>() == 1.0 => mdp.states()[i].clone(),
        _ => v.to_string(),
    }
}

fn run_bandit(config: &ScenarioConfig, seed: u64) -> Result<(ScenarioResults, bool)> {
    let rb = config.resolve_bandit()?;
    let spec = BanditSpec::new(rb.utilities.clone(), rb.epsilon, rb.trials)?;
    let best = rb
        .utilities
        .as_slice()
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .expect("at least two arms");
    let optimal_arm = p_train_estimate(&spec, &[best], rb.runs, seed)?;
    let lower_bound = success_lower_bound(&spec);
    let meets_lower_bound = optimal_arm.value >= lower_bound - SIGMAS * optimal_arm.std_error;
    let retarget = bandit_retarget_check(&rb.utilities, rb.epsilon, rb.trials, rb.runs, seed)?;
    let control = match &rb.control {
        None => None,
        Some(u) => {
            let control_spec = BanditSpec::new(u.clone(), rb.epsilon, rb.trials)?;
            // retargeted runs use seed + 1 ..= seed + k − 1
            let control_seed = seed.wrapping_add(u.dim() as u64);
            let frequencies = arm_frequencies(&control_spec, rb.runs, control_seed)?;
            let expected = 1.0 / u.dim() as f64;
            let within = frequencies
                .iter()
                .all(|f| (f.value - expected).abs() <= SIGMAS * f.std_error + 1e-12);
            Some(ControlCheck {
                utilities: u.clone(),
                expected,
                frequencies,
                within,
            })
        }
    };
    let holds = meets_lower_bound && retarget.passes && control.as_ref().map_or(true, |c| c.within);
    let results = BanditResults {
        utilities: rb.utilities,
        epsilon: rb.epsilon,
        trials: rb.trials,
        runs: rb.runs,
        optimal_arm,
        lower_bound,
        meets_lower_bound,
        retarget,
        control,
    };
    Ok((ScenarioResults::Bandit(results), holds))
}
