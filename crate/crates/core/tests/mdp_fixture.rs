use retarget_core::mdp::{
    enumerate_visit_set, one_cycle_states, rsd, rsd_set, toy_mdp, visit_distribution,
    RewardlessMdp, TOY_MDP_FIXTURE,
};
use retarget_core::outcomes::{find_copies, unit_vector};
use retarget_core::{Error, OutcomeSet, ParameterVector};

fn golden() -> String {
    std::fs::read_to_string(format!(
        "{}/tests/golden/toy_mdp_sets.txt",
        env!("CARGO_MANIFEST_DIR")
    ))
    .unwrap()
}

fn render(mdp: &RewardlessMdp) -> String {
    let s = mdp.state_index("start").unwrap();
    let mut out = format!("states: {}\n", mdp.states().join(", "));
    for v in rsd_set(mdp, s).unwrap().elements() {
        out.push_str(&format!("rsd {v}\n"));
    }
    for v in enumerate_visit_set(mdp, s, 0.5).unwrap() {
        out.push_str(&format!(
            "visit@0.5 {}\n",
            ParameterVector::new(v.occupancy).unwrap()
        ));
    }
    out
}

#[test]
fn toy_sets_match_golden() {
    assert_eq!(render(&toy_mdp()), golden());
}

#[test]
fn fixture_text_round_trips() {
    let mdp = toy_mdp();
    let again = RewardlessMdp::parse(&mdp.to_text()).unwrap();
    assert_eq!(again, mdp);
    assert_eq!(RewardlessMdp::parse(TOY_MDP_FIXTURE).unwrap(), mdp);
}

#[test]
fn one_cycles_are_the_absorbing_states() {
    let mdp = toy_mdp();
    let names: Vec<&str> = one_cycle_states(&mdp)
        .iter()
        .map(|c| mdp.states()[c.state].as_str())
        .collect();
    assert_eq!(names, ["empty", "left_sw", "right_se", "right_ne"]);
    assert!(one_cycle_states(&mdp).iter().all(|c| c.terminal));
}

#[test]
fn empty_has_three_copies_among_the_other_loops() {
    let mdp = toy_mdp();
    let s = mdp.state_index("start").unwrap();
    let rsds = rsd_set(&mdp, s).unwrap();
    let empty = mdp.state_index("empty").unwrap();
    let d_prime = OutcomeSet::new("D'", vec![unit_vector(7, empty).unwrap()]).unwrap();
    let d = rsds.difference(&d_prime).unwrap();
    let cert = find_copies(&d_prime, &d, 3).unwrap().expect("three copies");
    assert_eq!(cert.n, 3);
    assert!(find_copies(&d_prime, &d, 4).unwrap().is_none());
}

#[test]
fn rsd_is_the_long_run_visit_limit() {
    let mdp = toy_mdp();
    let gamma = 1.0 - 1e-6;
    for policy in mdp.policies(1_000_000).unwrap() {
        for s in 0..mdp.num_states() {
            let limit = rsd(&mdp, &policy, s).unwrap();
            let visits = visit_distribution(&mdp, &policy, s, gamma).unwrap();
            for (x, v) in limit.as_slice().iter().zip(&visits.occupancy) {
                assert!((x - (1.0 - gamma) * v).abs() < 1e-4);
            }
        }
    }
}

#[test]
fn parse_errors_carry_line_numbers() {
    let text = "states: a, b\nactions: go\na go -> {b: 1}\nb go -> {c: 1}\n";
    assert!(matches!(
        RewardlessMdp::parse(text),
        Err(Error::Parse { line: 4, .. })
    ));
    let short = "states: a, b\nactions: go\na go -> {b: 0.5}\nb go -> {a: 1}\n";
    assert!(matches!(
        RewardlessMdp::parse(short),
        Err(Error::Parse { line: 3, .. })
    ));
}
