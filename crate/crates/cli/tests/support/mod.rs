//! Test-only generators and brute-force oracles.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use retarget_core::perm::enumerate_orbit;
use retarget_core::tendency::{RetargetCertificate, TabularDecisionFunction};
use retarget_core::{OutcomeSet, ParameterDomain, ParameterVector, Permutation};

/// A tabular `f` on one orbit with a planted retargeting certificate.
pub struct Planted {
    pub f: TabularDecisionFunction,
    pub a: OutcomeSet,
    pub b: OutcomeSet,
    pub theta: ParameterVector,
    pub cert: RetargetCertificate,
    pub n: usize,
    /// Orbit elements that strictly prefer `A`.
    pub a_preferring: usize,
}

fn random_permutation(d: usize, rng: &mut ChaCha8Rng) -> Permutation {
    loop {
        let mut m: Vec<usize> = (0..d).collect();
        m.shuffle(rng);
        let p = Permutation::new(m).unwrap();
        if !p.is_identity() {
            return p;
        }
    }
}

/// Greedily picks `Θ^A` so that its images under the planted permutations are
/// disjoint from each other and from `Θ^A`, then fills the table so that
/// exactly `Θ^A` prefers `A`, every image prefers `B` and nothing else prefers
/// `A`.
pub fn planted_instance(rng: &mut ChaCha8Rng) -> Planted {
    let n = rng.random_range(1..=3usize);
    let d = rng.random_range(if n == 1 { 2 } else { 3 }..=6usize);
    let entries: Vec<i64> = (0..d).map(|_| rng.random_range(0..d as i64)).collect();
    let theta = ParameterVector::from_ints(&entries);
    let perms: Vec<Permutation> = (0..n).map(|_| random_permutation(d, rng)).collect();

    let mut orbit = enumerate_orbit(&theta, &ParameterDomain::all())
        .unwrap()
        .elements;
    orbit.shuffle(rng);
    let mut used: BTreeSet<ParameterVector> = BTreeSet::new();
    let mut theta_a: BTreeSet<ParameterVector> = BTreeSet::new();
    let mut images: BTreeSet<ParameterVector> = BTreeSet::new();
    for t in &orbit {
        if used.contains(t) || !rng.random_bool(0.7) {
            continue;
        }
        let moved: Vec<ParameterVector> = perms.iter().map(|p| p.act_vector(t).unwrap()).collect();
        let distinct: BTreeSet<&ParameterVector> = moved.iter().collect();
        if distinct.len() != n || moved.iter().any(|m| m == t || used.contains(m)) {
            continue;
        }
        used.insert(t.clone());
        theta_a.insert(t.clone());
        for m in moved {
            used.insert(m.clone());
            images.insert(m);
        }
    }

    let mut f = TabularDecisionFunction::new();
    for t in &orbit {
        let (fa, fb) = if theta_a.contains(t) {
            let fa = rng.random_range(1..6) as f64;
            (fa, fa - rng.random_range(1..3) as f64)
        } else if images.contains(t) {
            let fb = rng.random_range(1..6) as f64;
            (fb - rng.random_range(1..3) as f64, fb)
        } else {
            let fa = rng.random_range(0..6) as f64;
            (fa, fa + rng.random_range(0..3) as f64)
        };
        f.insert("A", t.clone(), fa);
        f.insert("B", t.clone(), fb);
    }
    Planted {
        f,
        a: OutcomeSet::units("A", d, &[0]).unwrap(),
        b: OutcomeSet::units("B", d, &[0]).unwrap(),
        theta,
        cert: RetargetCertificate::constant(perms),
        n,
        a_preferring: theta_a.len(),
    }
}

/// Random direction with standard normal coordinates.
pub fn gaussian_direction(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

/// Indices that are the unique maximizer of `x·r` by more than `margin` for
/// at least one of `samples` random directions.
pub fn sampled_winners(
    points: &[Vec<f64>],
    samples: usize,
    margin: f64,
    rng: &mut ChaCha8Rng,
) -> BTreeSet<usize> {
    let d = points[0].len();
    let mut winners = BTreeSet::new();
    for _ in 0..samples {
        let r = gaussian_direction(d, rng);
        let scores: Vec<f64> = points
            .iter()
            .map(|p| p.iter().zip(&r).map(|(a, b)| a * b).sum())
            .collect();
        let (best, top) = scores
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .map(|(i, v)| (i, *v))
            .unwrap();
        if scores
            .iter()
            .enumerate()
            .all(|(i, v)| i == best || *v < top - margin)
        {
            winners.insert(best);
        }
    }
    winners
}
