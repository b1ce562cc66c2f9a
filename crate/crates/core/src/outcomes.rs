//! Outcome lotteries, sets of them, set-copy certificates and the
//! non-dominated filter.

use std::fmt;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{
    all_permutations, enumerate_involutions, ParameterVector, Permutation,
    DEFAULT_ENUMERATION_BOUND,
};

/// Margin a strict maximizer must clear in the non-domination LP.
pub const ND_MARGIN_TOLERANCE: f64 = 1e-9;

/// A weight vector over `d` outcomes. Generic vectors are allowed; the
/// simplex flag records (and enforces) that it is a probability vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeLottery {
    pub vector: ParameterVector,
    pub simplex_flag: bool,
}

impl OutcomeLottery {
    pub fn new(vector: ParameterVector, simplex_flag: bool) -> Result<Self> {
        if simplex_flag {
            let v = vector.as_slice();
            if v.iter().any(|&x| x < 0.0) {
                return Err(Error::InvalidParameter(
                    "lottery has a negative entry".into(),
                ));
            }
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "lottery sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self {
            vector,
            simplex_flag,
        })
    }

    /// The indicator lottery on outcome `i`.
    pub fn unit(d: usize, i: usize) -> Result<Self> {
        if i >= d {
            return Err(Error::InvalidParameter(format!(
                "unit index {i} out of range for d={d}"
            )));
        }
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        Ok(Self {
            vector: ParameterVector::new(v)?,
            simplex_flag: true,
        })
    }
}

pub fn unit_vector(d: usize, i: usize) -> Result<ParameterVector> {
    OutcomeLottery::unit(d, i).map(|l| l.vector)
}

/// A named finite set of vectors of one dimension, kept sorted with
/// duplicates merged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSet {
    name: String,
    dim: usize,
    elements: Vec<ParameterVector>,
}

impl OutcomeSet {
    /// Builds a nonempty set.
    pub fn new(name: impl Into<String>, elements: Vec<ParameterVector>) -> Result<Self> {
        let name = name.into();
        let Some(first) = elements.first() else {
            return Err(Error::EmptySet(name));
        };
        let dim = first.dim();
        Self::build(name, dim, elements)
    }

    /// Builds a set that may be empty.
    pub fn with_dim(
        name: impl Into<String>,
        dim: usize,
        elements: Vec<ParameterVector>,
    ) -> Result<Self> {
        Self::build(name.into(), dim, elements)
    }

    pub fn empty(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
            elements: Vec::new(),
        }
    }

    pub fn from_lotteries(name: impl Into<String>, lotteries: Vec<OutcomeLottery>) -> Result<Self> {
        Self::new(name, lotteries.into_iter().map(|l| l.vector).collect())
    }

    /// The set `{e_i : i ∈ indices}` in `R^d`.
    pub fn units(name: impl Into<String>, d: usize, indices: &[usize]) -> Result<Self> {
        let elements = indices
            .iter()
            .map(|&i| unit_vector(d, i))
            .collect::<Result<Vec<_>>>()?;
        Self::with_dim(name, d, elements)
    }

    fn build(name: String, dim: usize, mut elements: Vec<ParameterVector>) -> Result<Self> {
        if let Some(bad) = elements.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        elements.sort();
        elements.dedup();
        Ok(Self {
            name,
            dim,
            elements,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ParameterVector] {
        &self.elements
    }

    pub fn contains(&self, v: &ParameterVector) -> bool {
        self.elements.binary_search(v).is_ok()
    }

    pub fn is_subset_of(&self, other: &OutcomeSet) -> bool {
        self.elements.iter().all(|v| other.contains(v))
    }

    /// Same elements, ignoring names.
    pub fn same_elements(&self, other: &OutcomeSet) -> bool {
        self.dim == other.dim && self.elements == other.elements
    }

    pub fn check_dim(&self, other: &OutcomeSet) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn union(&self, other: &OutcomeSet) -> Result<OutcomeSet> {
        self.check_dim(other)?;
        let mut elements = self.elements.clone();
        elements.extend(other.elements.iter().cloned());
        Self::build(format!("{}∪{}", self.name, other.name), self.dim, elements)
    }

    pub fn difference(&self, other: &OutcomeSet) -> Result<OutcomeSet> {
        self.check_dim(other)?;
        let elements = self
            .elements
            .iter()
            .filter(|v| !other.contains(v))
            .cloned()
            .collect();
        Ok(Self {
            name: format!("{}∖{}", self.name, other.name),
            dim: self.dim,
            elements,
        })
    }

    pub fn intersection(&self, other: &OutcomeSet) -> Result<OutcomeSet> {
        self.check_dim(other)?;
        let elements = self
            .elements
            .iter()
            .filter(|v| other.contains(v))
            .cloned()
            .collect();
        Ok(Self {
            name: format!("{}∩{}", self.name, other.name),
            dim: self.dim,
            elements,
        })
    }

    /// `φ·X`, keeping the name.
    pub fn act(&self, phi: &Permutation) -> Result<OutcomeSet> {
        if phi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: phi.len(),
            });
        }
        Ok(Self {
            name: self.name.clone(),
            dim: self.dim,
            elements: phi.act_set(&self.elements)?,
        })
    }

    /// Errors with `NotSubset` unless `self ⊆ superset`.
    pub fn require_subset(&self, superset: &OutcomeSet) -> Result<()> {
        self.check_dim(superset)?;
        if !self.is_subset_of(superset) {
            return Err(Error::NotSubset {
                subset: self.name.clone(),
                superset: superset.name.clone(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for OutcomeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements.iter().map(|v| v.to_string()).collect();
        write!(f, "{} = {{{}}}", self.name, parts.join(", "))
    }
}

/// Witness that `B` contains `n` copies of `A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopyCertificate {
    pub n: usize,
    pub involutions: Vec<Permutation>,
    pub images: Vec<OutcomeSet>,
}

impl CopyCertificate {
    pub fn from_involutions(a: &OutcomeSet, involutions: Vec<Permutation>) -> Result<Self> {
        let images = involutions
            .iter()
            .enumerate()
            .map(|(i, phi)| Ok(a.act(phi)?.renamed(format!("B_{}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n: involutions.len(),
            involutions,
            images,
        })
    }
}

fn check_phi_dim(phi: &Permutation, d: usize) -> Result<()> {
    if phi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: phi.len(),
        });
    }
    Ok(())
}

pub fn verify_copies(a: &OutcomeSet, b: &OutcomeSet, cert: &CopyCertificate) -> Result<bool> {
    a.check_dim(b)?;
    for phi in &cert.involutions {
        check_phi_dim(phi, a.dim())?;
    }
    if cert.n == 0 || cert.involutions.len() != cert.n || cert.images.len() != cert.n {
        return Ok(false);
    }
    if !cert.involutions.iter().all(Permutation::is_involution) {
        return Ok(false);
    }
    for (phi, image) in cert.involutions.iter().zip(&cert.images) {
        image.check_dim(a)?;
        if !a.act(phi)?.same_elements(image) || !image.is_subset_of(b) {
            return Ok(false);
        }
    }
    for (i, phi) in cert.involutions.iter().enumerate() {
        for (j, image) in cert.images.iter().enumerate() {
            if i != j && !image.act(phi)?.same_elements(image) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Searches involutions (by support size, then lexicographically) for `n`
/// copies of `A` inside `B`. `None` means no certificate exists.
pub fn find_copies(a: &OutcomeSet, b: &OutcomeSet, n: usize) -> Result<Option<CopyCertificate>> {
    a.check_dim(b)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let candidates: Vec<(Permutation, OutcomeSet)> = enumerate_involutions(a.dim())?
        .into_iter()
        .map(|phi| {
            let image = a.act(&phi)?;
            Ok((phi, image))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|(_, image)| image.is_subset_of(b))
        .collect();
    let mut chosen = Vec::with_capacity(n);
    if search_copies(&candidates, n, 0, &mut chosen)? {
        let involutions = chosen.iter().map(|&k| candidates[k].0.clone()).collect();
        return CopyCertificate::from_involutions(a, involutions).map(Some);
    }
    Ok(None)
}

fn search_copies(
    candidates: &[(Permutation, OutcomeSet)],
    n: usize,
    start: usize,
    chosen: &mut Vec<usize>,
) -> Result<bool> {
    if chosen.len() == n {
        return Ok(true);
    }
    for k in start..candidates.len() {
        let (phi_k, image_k) = &candidates[k];
        let mut compatible = true;
        for &c in chosen.iter() {
            let (phi_c, image_c) = &candidates[c];
            if !image_c.act(phi_k)?.same_elements(image_c)
                || !image_k.act(phi_c)?.same_elements(image_k)
            {
                compatible = false;
                break;
            }
        }
        if compatible {
            chosen.push(k);
            if search_copies(candidates, n, k, chosen)? {
                return Ok(true);
            }
            chosen.pop();
        }
    }
    Ok(false)
}

/// `φ_i·A ⊆ B_i* ⊆ B` for every `i`, and `φ_i·B_j* = B_j*` for `i ≠ j`.
pub fn verify_superset_copies(
    a: &OutcomeSet,
    b: &OutcomeSet,
    b_star: &[OutcomeSet],
    involutions: &[Permutation],
) -> Result<bool> {
    a.check_dim(b)?;
    for s in b_star {
        s.check_dim(a)?;
    }
    for phi in involutions {
        check_phi_dim(phi, a.dim())?;
    }
    if b_star.len() != involutions.len() || !involutions.iter().all(Permutation::is_involution) {
        return Ok(false);
    }
    for (phi, star) in involutions.iter().zip(b_star) {
        if !a.act(phi)?.is_subset_of(star) || !star.is_subset_of(b) {
            return Ok(false);
        }
    }
    for (i, phi) in involutions.iter().enumerate() {
        for (j, star) in b_star.iter().enumerate() {
            if i != j && !star.act(phi)?.same_elements(star) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Largest `δ` such that `(x − x')·r ≥ δ` for every competitor `x'`, over
/// rewards in the unit box. Infinite when there are no competitors.
pub fn strict_margin(x: &[f64], competitors: &[&[f64]]) -> Result<f64> {
    if competitors.is_empty() {
        return Ok(f64::INFINITY);
    }
    let d = x.len();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let r: Vec<_> = (0..d).map(|_| problem.add_var(0.0, (-1.0, 1.0))).collect();
    let delta = problem.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for other in competitors {
        if other.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: other.len(),
            });
        }
        // δ − Σ (x − x')_k r_k ≤ 0
        let mut terms = vec![(delta, 1.0)];
        for k in 0..d {
            let diff = x[k] - other[k];
            if diff != 0.0 {
                terms.push((r[k], -diff));
            }
        }
        problem.add_constraint(terms.as_slice(), ComparisonOp::Le, 0.0);
    }
    let outcome = problem
        .solve()
        .map_err(|e| Error::LinearProgram(e.to_string()))?;
    let solution = outcome
        .into_solution()
        .map_err(|_| Error::LinearProgram("solve interrupted".into()))?;
    Ok(solution.objective())
}

/// Flags, per vector, whether some reward makes it the strict maximizer.
/// Duplicated vectors are rejected: they can never be strict maximizers.
pub fn nondominated_mask(vectors: &[ParameterVector]) -> Result<Vec<bool>> {
    if vectors.is_empty() {
        return Err(Error::EmptySet("X".into()));
    }
    let d = vectors[0].dim();
    if let Some(bad) = vectors.iter().find(|v| v.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.dim(),
        });
    }
    let mut sorted: Vec<&ParameterVector> = vectors.iter().collect();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DuplicateVectors);
    }
    (0..vectors.len())
        .into_par_iter()
        .map(|i| {
            let others: Vec<&[f64]> = vectors
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.as_slice())
                .collect();
            Ok(strict_margin(vectors[i].as_slice(), &others)? > ND_MARGIN_TOLERANCE)
        })
        .collect()
}

/// The subset of `X` whose elements strictly maximize `x·r` for some `r`.
pub fn nondominated(x: &OutcomeSet) -> Result<OutcomeSet> {
    let mask = nondominated_mask(x.elements())?;
    let kept = x
        .elements()
        .iter()
        .zip(mask)
        .filter(|(_, keep)| *keep)
        .map(|(v, _)| v.clone());
    OutcomeSet::with_dim(format!("ND({})", x.name()), x.dim(), kept.collect())
}

/// First permutation `φ` (lexicographic by mapping) with `φ·X' = X`.
pub fn set_similar(x: &OutcomeSet, x_prime: &OutcomeSet) -> Result<Option<Permutation>> {
    x.check_dim(x_prime)?;
    if x.len() != x_prime.len() {
        return Ok(None);
    }
    for phi in all_permutations(x.dim(), DEFAULT_ENUMERATION_BOUND)? {
        if x_prime.act(&phi)?.same_elements(x) {
            return Ok(Some(phi));
        }
    }
    Ok(None)
}
