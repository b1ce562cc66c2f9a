use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use retarget_core::bandit::{
    bandit_retarget_check, p_train_estimate, success_lower_bound, BanditSpec,
};
use retarget_core::decisions::DecisionRule;
use retarget_core::mdp::{
    avg_opt_probability, rsd_set, RewardSamplerSpec, RewardlessMdp, SamplerKind,
};
use retarget_core::outcomes::{unit_vector, OutcomeSet};
use retarget_core::scenario::tables::{reproduce_table, TableId};
use retarget_core::scenario::{
    builtin, builtin_names, parse_vector, run_scenario, ScenarioConfig, ScenarioResults,
};
use retarget_core::tendency::{check_geq_most, ContextRule};
use retarget_core::{Error, ParameterDomain};

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "RETARGET_THREADS";

const HOLDS: u8 = 0;
const INPUT_ERROR: u8 = 1;
const REFUTED: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "retarget",
    version,
    about = "Orbit-level tendency checks for decision rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run or list scenarios.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Print one of the worked tables.
    Table {
        /// permute-states, rationalities or counterexample
        id: String,
        #[arg(long)]
        csv: bool,
    },
    #[command(subcommand)]
    Mdp(MdpCmd),
    #[command(subcommand)]
    Bandit(BanditCmd),
    #[command(subcommand)]
    Orbit(OrbitCmd),
}

#[derive(Subcommand, Debug)]
enum ScenarioCmd {
    Run(RunArgs),
    List,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "source")]
struct Source {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here; `-` for stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum MdpCmd {
    /// Monte Carlo probability that states' RSDs are average-optimal.
    Avgprob {
        #[arg(long)]
        fixture: PathBuf,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "start")]
        start: String,
        /// Comma-separated states; each reachable RSD separately when omitted.
        #[arg(long)]
        d_prime: Option<String>,
        #[arg(long, default_value = "iid-uniform-01")]
        sampler: String,
    },
}

#[derive(Subcommand, Debug)]
enum BanditCmd {
    /// Training success bound and retargetability away from arm 1.
    Verify {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        trials: u32,
        #[arg(long)]
        runs: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "10,5,0,2,1")]
        utilities: String,
    },
}

#[derive(Subcommand, Debug)]
enum OrbitCmd {
    /// Count one orbit. Sets are `;`-separated vectors.
    Check {
        #[arg(long)]
        vector: String,
        #[arg(long = "A")]
        a: String,
        #[arg(long = "B")]
        b: String,
        /// Defaults to `A ∪ B`.
        #[arg(long = "C")]
        c: Option<String>,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value = "all")]
        domain: String,
    },
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        Error::InvalidParameter(format!(
            "{THREADS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn parse_set(name: &str, text: &str) -> Result<OutcomeSet, Error> {
    let elements = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_vector)
        .collect::<Result<Vec<_>, _>>()?;
    OutcomeSet::new(name, elements)
}

fn scenario_run(args: RunArgs) -> Result<u8, Error> {
    let mut config = match (&args.source.config, &args.source.builtin) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Some(name)) => builtin(name)?,
        (None, None) => unreachable!("clap enforces one source"),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let report = run_scenario(&config)?;
    let json = report.to_json();
    match args.json.as_deref() {
        Some(p) if p.as_os_str() == "-" => print!("{json}"),
        Some(p) => {
            std::fs::write(p, &json)?;
            print_summary(&report);
        }
        None => print_summary(&report),
    }
    Ok(if report.verdict.holds() {
        HOLDS
    } else {
        REFUTED
    })
}

fn print_summary(report: &retarget_core::scenario::RunReport) {
    println!(
        "scenario {} (seed {}): {:?}",
        report.scenario, report.seed, report.verdict
    );
    match &report.results {
        ScenarioResults::Orbit(r) => {
            for rule in &r.rules {
                println!(
                    "  {:<22} n={} orbits={} violations={} B>A={} A>B={} {}",
                    rule.rule,
                    r.n,
                    rule.orbits_checked,
                    rule.violations,
                    rule.totals.b_gt_a,
                    rule.totals.a_gt_b,
                    if rule.holds { "ok" } else { "FAIL" }
                );
            }
        }
        ScenarioResults::Mdp(r) => {
            println!("  RSDs from {}: {}", r.start, r.rsds.len());
            println!("  copies of D' in D at n={}: {}", r.n, r.copies.is_some());
            println!(
                "  orbits={} violations={}",
                r.orbits_checked, r.orbit_violations
            );
            println!(
                "  P(D' avg-optimal) = {:.4} ± {:.4} (bound {:.4})",
                r.avg_opt.estimate.value, r.avg_opt.estimate.std_error, r.avg_opt_bound
            );
        }
        ScenarioResults::Bandit(r) => {
            println!(
                "  optimal arm {:.4} ± {:.4} (bound {:.4})",
                r.optimal_arm.value, r.optimal_arm.std_error, r.lower_bound
            );
            println!("  retargetable: {}", r.retarget.passes);
            if let Some(c) = &r.control {
                println!("  control uniform: {}", c.within);
            }
        }
    }
}

fn table(id: &str, csv: bool) -> Result<u8, Error> {
    let table = reproduce_table(id.parse::<TableId>()?)?;
    print!("{}", if csv { table.to_csv() } else { table.to_text() });
    Ok(HOLDS)
}

fn mdp_avgprob(
    fixture: PathBuf,
    samples: usize,
    seed: u64,
    start: String,
    d_prime: Option<String>,
    sampler: String,
) -> Result<u8, Error> {
    let text = std::fs::read_to_string(&fixture)
        .map_err(|e| Error::Io(format!("{}: {e}", fixture.display())))?;
    let mdp = RewardlessMdp::parse(&text)?;
    let s = mdp
        .state_index(&start)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown state `{start}`")))?;
    let spec = RewardSamplerSpec {
        kind: SamplerKind::parse(&sampler)?,
        seed,
    };
    let rsds = rsd_set(&mdp, s)?;
    let targets: Vec<(String, OutcomeSet)> = match d_prime {
        Some(list) => {
            let names: Vec<&str> = list
                .split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .collect();
            let elements = names
                .iter()
                .map(|name| {
                    let i = mdp.state_index(name).ok_or_else(|| {
                        Error::InvalidParameter(format!("unknown state `{name}`"))
                    })?;
                    unit_vector(mdp.num_states(), i)
                })
                .collect::<Result<Vec<_>, _>>()?;
            vec![(names.join(","), OutcomeSet::new("D'", elements)?)]
        }
        None => rsds
            .elements()
            .iter()
            .map(|v| {
                let label = match v.as_slice().iter().position(|&x| x == 1.0) {
                    Some(i) => mdp.states()[i].clone(),
                    None => v.to_string(),
                };
                Ok((label, OutcomeSet::new("D'", vec![v.clone()])?))
            })
            .collect::<Result<Vec<_>, Error>>()?,
    };
    for (label, set) in targets {
        let est = avg_opt_probability(&mdp, &set, &spec, samples, s)?;
        println!(
            "{label}\t{:.4}\t±{:.4}\tci95=[{:.4}, {:.4}]\tties_discarded={}",
            est.estimate.value, est.estimate.std_error, est.ci95.0, est.ci95.1, est.discarded_ties
        );
    }
    Ok(HOLDS)
}

fn bandit_verify(
    eps: f64,
    trials: u32,
    runs: usize,
    seed: u64,
    utilities: String,
) -> Result<u8, Error> {
    let u = parse_vector(&utilities)?;
    let spec = BanditSpec::new(u.clone(), eps, trials)?;
    let report = bandit_retarget_check(&u, eps, trials, runs, seed)?;
    let best = (0..u.dim())
        .max_by(|&i, &j| u.as_slice()[i].total_cmp(&u.as_slice()[j]))
        .expect("at least two arms");
    let optimal = p_train_estimate(&spec, &[best], runs, seed)?;
    let bound = success_lower_bound(&spec);
    let meets = optimal.value >= bound - 3.0 * optimal.std_error;
    println!(
        "optimal arm frequency {:.4} ± {:.4}, lower bound {:.4}: {}",
        optimal.value, optimal.std_error, bound, meets
    );
    println!(
        "p(A) {:.4} ± {:.4}, p(B) {:.4} ± {:.4}",
        report.p_a.value, report.p_a.std_error, report.p_b.value, report.p_b.std_error
    );
    for run in &report.retargeted {
        println!(
            "  {}: p(A) {:.4} p(B) {:.4} flipped={}",
            run.permutation, run.p_a.value, run.p_b.value, run.flipped
        );
    }
    println!("distinct={} passes={}", report.distinct, report.passes);
    Ok(if report.passes && meets {
        HOLDS
    } else {
        REFUTED
    })
}

#[allow(clippy::too_many_arguments)]
fn orbit_check(
    vector: String,
    a: String,
    b: String,
    c: Option<String>,
    rule: String,
    n: u64,
    domain: String,
) -> Result<u8, Error> {
    let theta = parse_vector(&vector)?;
    let a = parse_set("A", &a)?;
    let b = parse_set("B", &b)?;
    let c = match c {
        Some(text) => parse_set("C", &text)?,
        None => a.union(&b)?.renamed("C"),
    };
    let lookup = |name: &str| match name {
        "A" => Some(a.clone()),
        "B" => Some(b.clone()),
        "C" => Some(c.clone()),
        _ => None,
    };
    let rule = DecisionRule::parse_with(&rule, &lookup)?;
    let domain = ParameterDomain::parse(&domain)?;
    let report = check_geq_most(&ContextRule::new(rule, c), &a, &b, &theta, &domain, n)?;
    println!(
        "orbit of {}: size={} B>A={} A>B={} tie={} n={} holds={}",
        report.theta,
        report.orbit_size,
        report.count_b_gt_a,
        report.count_a_gt_b,
        report.count_tie,
        report.n_claimed,
        report.holds
    );
    Ok(if report.holds { HOLDS } else { REFUTED })
}

fn dispatch(cli: Cli) -> Result<u8, Error> {
    configure_threads()?;
    match cli.command {
        Command::Scenario(ScenarioCmd::Run(args)) => scenario_run(args),
        Command::Scenario(ScenarioCmd::List) => {
            builtin_names().for_each(|n| println!("{n}"));
            Ok(HOLDS)
        }
        Command::Table { id, csv } => table(&id, csv),
        Command::Mdp(MdpCmd::Avgprob {
            fixture,
            samples,
            seed,
            start,
            d_prime,
            sampler,
        }) => mdp_avgprob(fixture, samples, seed, start, d_prime, sampler),
        Command::Bandit(BanditCmd::Verify {
            eps,
            trials,
            runs,
            seed,
            utilities,
        }) => bandit_verify(eps, trials, runs, seed, utilities),
        Command::Orbit(OrbitCmd::Check {
            vector,
            a,
            b,
            c,
            rule,
            n,
            domain,
        }) => orbit_check(vector, a, b, c, rule, n, domain),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT_ERROR } else { HOLDS });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
