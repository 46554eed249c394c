//! Outcome spaces, lotteries, representations and the exact choice oracle.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::game::solve_matrix_game;
use crate::error::{domain, Error, Result};

/// Tolerance for probability vectors summing to one.
pub(crate) const SUM_TOLERANCE: f64 = 1e-12;
/// Ground-truth cone membership slack.
pub(crate) const CONE_TOLERANCE: f64 = 1e-12;
/// Relative tolerance for ties in oracle choices.
pub(crate) const CHOICE_TOLERANCE: f64 = 1e-10;

/// First actions `Z1`, second actions `Z2(z1)` and the induced profile set `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSpace {
    z1: Vec<String>,
    z2: Vec<Vec<String>>,
    blocks: Vec<Range<usize>>,
}

impl OutcomeSpace {
    pub fn new(z1: Vec<String>, z2: Vec<Vec<String>>) -> Result<Self> {
        if z1.is_empty() || z1.len() != z2.len() {
            return domain("Z1 must be nonempty with one Z2 list per first action");
        }
        let mut blocks = Vec::with_capacity(z1.len());
        let mut start = 0;
        for list in &z2 {
            if list.is_empty() {
                return domain("every Z2(z1) must be nonempty");
            }
            blocks.push(start..start + list.len());
            start += list.len();
        }
        Ok(Self { z1, z2, blocks })
    }

    /// Space with first actions `0..sizes.len()` and `sizes[i]` second actions after `i`.
    pub fn with_sizes(sizes: &[usize]) -> Result<Self> {
        Self::new(
            (0..sizes.len()).map(|i| i.to_string()).collect(),
            sizes.iter().map(|&n| (0..n).map(|j| j.to_string()).collect()).collect(),
        )
    }

    /// Number of profiles `|Z|`.
    pub fn len(&self) -> usize {
        self.blocks.last().map_or(0, |b| b.end)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn z1(&self) -> &[String] {
        &self.z1
    }

    pub fn z2(&self, z1: usize) -> &[String] {
        &self.z2[z1]
    }

    /// Profile indices sharing first action `z1`.
    pub fn block(&self, z1: usize) -> Range<usize> {
        self.blocks[z1].clone()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Marginal distribution over first actions.
    pub fn marginal(&self, p: &[f64]) -> Vec<f64> {
        self.blocks.iter().map(|b| p[b.clone()].iter().sum()).collect()
    }

    /// Orthonormal basis of the sum-zero subspace (directions within the simplex).
    pub fn tangent_basis(&self) -> Vec<Vec<f64>> {
        helmert(self.len(), 0..self.len())
    }

    /// Orthonormal basis of directions with zero sum inside every block
    /// (directions that keep the first-action marginal fixed).
    pub fn block_tangent_basis(&self) -> Vec<Vec<f64>> {
        self.blocks.iter().flat_map(|b| helmert(self.len(), b.clone())).collect()
    }

    /// Orthogonal projection onto the sum-zero subspace.
    pub fn project_tangent(&self, v: &[f64]) -> Vec<f64> {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| x - mean).collect()
    }

    /// Orthogonal projection onto the block-wise sum-zero subspace.
    pub fn project_block_tangent(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for b in &self.blocks {
            let mean = v[b.clone()].iter().sum::<f64>() / b.len() as f64;
            out[b.clone()].iter_mut().for_each(|x| *x -= mean);
        }
        out
    }
}

/// Helmert vectors for the coordinates in `range`, embedded in dimension `n`.
fn helmert(n: usize, range: Range<usize>) -> Vec<Vec<f64>> {
    let idx: Vec<usize> = range.collect();
    (1..idx.len())
        .map(|k| {
            let mut h = vec![0.0; n];
            let norm = ((k * (k + 1)) as f64).sqrt();
            for &i in &idx[..k] {
                h[i] = 1.0 / norm;
            }
            h[idx[k]] = -(k as f64) / norm;
            h
        })
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(a: &[f64], t: f64, d: &[f64]) -> Vec<f64> {
    a.iter().zip(d).map(|(x, y)| x + t * y).collect()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Largest `t >= 0` keeping `a + t d` nonnegative.
pub(crate) fn max_step(a: &[f64], d: &[f64]) -> f64 {
    a.iter()
        .zip(d)
        .filter(|(_, &di)| di < 0.0)
        .map(|(&ai, &di)| -ai / di)
        .fold(f64::INFINITY, f64::min)
}

/// A probability vector over `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lottery(Vec<f64>);

impl Lottery {
    /// Validates nonnegativity and the unit sum.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return domain("a lottery needs at least one outcome");
        }
        if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return domain("lottery entries must be finite and nonnegative");
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Domain(format!("lottery sums to {s}, not 1")));
        }
        Ok(Self(p))
    }

    /// Builds a lottery after clipping rounding noise below zero and renormalizing.
    pub(crate) fn clean(mut p: Vec<f64>) -> Result<Self> {
        for x in p.iter_mut() {
            if *x < 0.0 && *x > -1e-13 {
                *x = 0.0;
            }
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() <= 1e-9 {
            p.iter_mut().for_each(|x| *x /= s);
        }
        Self::new(p)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `eps * self + (1 - eps) * other`.
    pub fn mix(&self, other: &Lottery, eps: f64) -> Lottery {
        Lottery(self.0.iter().zip(&other.0).map(|(p, a)| eps * p + (1.0 - eps) * a).collect())
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// `(gamma, u, V)` with `V` the convex hull of `extremes`. No regularity is assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub(crate) space: OutcomeSpace,
    pub(crate) gamma: f64,
    pub(crate) u: Vec<f64>,
    pub(crate) extremes: Vec<Vec<f64>>,
}

impl Representation {
    pub fn new(space: OutcomeSpace, gamma: f64, u: Vec<f64>, extremes: Vec<Vec<f64>>) -> Result<Self> {
        let n = space.len();
        if !(0.0..1.0).contains(&gamma) {
            return domain("gamma must lie in [0, 1)");
        }
        if u.len() != n || extremes.is_empty() || extremes.iter().any(|e| e.len() != n) {
            return domain("utility vectors must have one entry per profile and V must be nonempty");
        }
        if u.iter().chain(extremes.iter().flatten()).any(|x| !x.is_finite()) {
            return domain("utilities must be finite");
        }
        Ok(Self { space, gamma, u, extremes })
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn extremes(&self) -> &[Vec<f64>] {
        &self.extremes
    }

    /// Largest absolute utility entry, at least one.
    pub(crate) fn scale(&self) -> f64 {
        self.u.iter().chain(self.extremes.iter().flatten()).fold(1.0f64, |m, x| m.max(x.abs()))
    }

    /// Same representation with every utility multiplied by `alpha` and member-specific constants added.
    pub fn transformed(&self, alpha: f64, beta_u: f64, beta: &[f64]) -> Result<Self> {
        if alpha <= 0.0 || beta.len() != self.extremes.len() {
            return domain("alpha must be positive with one constant per extreme");
        }
        let map = |v: &[f64], b: f64| v.iter().map(|x| alpha * x + b).collect::<Vec<_>>();
        Self::new(
            self.space.clone(),
            self.gamma,
            map(&self.u, beta_u),
            self.extremes.iter().zip(beta).map(|(e, &b)| map(e, b)).collect(),
        )
    }

    /// Same primitives with another regret weight.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.space.clone(), gamma, self.u.clone(), self.extremes.clone())
    }
}

/// A representation that passed the regularity checks.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularRepresentation {
    rep: Representation,
    weights: Vec<f64>,
}

impl RegularRepresentation {
    /// Checks `gamma > 0`, a non-singleton hull of affinely independent extremes with `u`
    /// a strictly positive combination of them, and No Free Distortion on every pair of extremes.
    pub fn new(rep: Representation) -> Result<Self> {
        if rep.gamma <= 0.0 {
            return Err(Error::Precondition("regularity needs gamma > 0".into()));
        }
        let k = rep.extremes.len();
        if k < 2 {
            return Err(Error::Precondition("the rationale hull must not be a singleton".into()));
        }
        let n = rep.space.len();
        let scale = rep.scale();
        // Solve [E; 1] w = [u; 1] in the least-squares sense.
        let m = DMatrix::from_fn(n + 1, k, |i, j| if i < n { rep.extremes[j][i] } else { 1.0 });
        let rhs = DVector::from_fn(n + 1, |i, _| if i < n { rep.u[i] } else { 1.0 });
        let svd = m.clone().svd(true, true);
        let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin <= 1e-9 * scale {
            return Err(Error::Precondition("extremes must be affinely independent".into()));
        }
        let w = svd.solve(&rhs, 1e-14).map_err(|e| Error::Precondition(e.to_string()))?;
        let resid = (&m * &w - &rhs).norm();
        if resid > 1e-9 * scale {
            return Err(Error::Precondition("material utility is not in the hull of the extremes".into()));
        }
        if w.iter().any(|&x| x <= 1e-9) {
            return Err(Error::Precondition("material utility must lie in the relative interior".into()));
        }
        for i in 0..k {
            for j in 0..k {
                if i != j && free_distortion(&rep.space, &rep.extremes[i], &rep.extremes[j]) {
                    return Err(Error::Precondition(format!(
                        "No Free Distortion fails between extremes {i} and {j}"
                    )));
                }
            }
        }
        Ok(Self { rep, weights: w.iter().cloned().collect() })
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    /// Convex weights expressing `u` in the extremes.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_inner(self) -> Representation {
        self.rep
    }
}

/// True when `w = alpha v + beta` with `alpha > 0` and `beta` constant on each first-action block.
fn free_distortion(space: &OutcomeSpace, v: &[f64], w: &[f64]) -> bool {
    let n = space.len();
    let nb = space.num_blocks();
    let design = DMatrix::from_fn(n, 1 + nb, |i, j| {
        if j == 0 {
            v[i]
        } else {
            let b = space.block(j - 1);
            if b.contains(&i) {
                1.0
            } else {
                0.0
            }
        }
    });
    let rhs = DVector::from_column_slice(w);
    let Ok(coef) = design.clone().svd(true, true).solve(&rhs, 1e-14) else { return false };
    let resid = (&design * &coef - &rhs).norm();
    let scale = w.iter().chain(v).fold(1.0f64, |m, x| m.max(x.abs()));
    resid <= 1e-9 * scale && coef[0] > 0.0
}

/// Regret term `max_{v in V} [v(a) - max_{b in A1} v(b)]` given precomputed values.
///
/// `ea[k] = e_k . a` and `eb[k][j] = e_k . b_j`.
pub(crate) fn regret_from_values(ea: &[f64], eb: &[Vec<f64>]) -> f64 {
    let k = ea.len();
    let cols = eb[0].len();
    if k == 1 {
        return eb[0].iter().map(|b| ea[0] - b).fold(f64::INFINITY, f64::min);
    }
    let mut m = Vec::with_capacity(k * cols);
    for i in 0..k {
        for j in 0..cols {
            m.push(ea[i] - eb[i][j]);
        }
    }
    solve_matrix_game(&m, k, cols).value
}

/// Regret term of `a` against the foregone menu `a1`.
pub fn regret_value(rep: &Representation, a: &Lottery, a1: &[Lottery]) -> Result<f64> {
    if a1.is_empty() {
        return domain("the first-period menu must be nonempty");
    }
    let n = rep.space.len();
    if a.len() != n || a1.iter().any(|b| b.len() != n) {
        return domain("lottery dimension does not match the outcome space");
    }
    let ea: Vec<f64> = rep.extremes.iter().map(|e| dot(e, a.as_slice())).collect();
    let eb: Vec<Vec<f64>> =
        rep.extremes.iter().map(|e| a1.iter().map(|b| dot(e, b.as_slice())).collect()).collect();
    Ok(regret_from_values(&ea, &eb))
}

/// Exact argmax of `(1 - gamma) u(a) + gamma * regret(a | A1)` over `A2`, as indices into `a2`.
pub fn oracle_choice(rep: &Representation, a2: &[Lottery], a1: &[Lottery]) -> Result<Vec<usize>> {
    validate_menus(&rep.space, a2, a1)?;
    Ok(choose_unchecked(rep, a2, a1))
}

fn validate_menus(space: &OutcomeSpace, a2: &[Lottery], a1: &[Lottery]) -> Result<()> {
    if a2.is_empty() {
        return domain("the second-period menu must be nonempty");
    }
    let n = space.len();
    if a2.iter().chain(a1).any(|p| p.len() != n) {
        return domain("lottery dimension does not match the outcome space");
    }
    let m0 = space.marginal(a2[0].as_slice());
    for p in &a2[1..] {
        let m = space.marginal(p.as_slice());
        if m.iter().zip(&m0).any(|(x, y)| (x - y).abs() > SUM_TOLERANCE) {
            return domain("second-period menu members must share the first-action marginal");
        }
    }
    for p in a2 {
        let inside = a1.iter().any(|b| b.as_slice().iter().zip(p.as_slice()).all(|(x, y)| (x - y).abs() <= 1e-15));
        if !inside {
            return domain("the second-period menu must be a subset of the first-period menu");
        }
    }
    Ok(())
}

pub(crate) fn choose_unchecked(rep: &Representation, a2: &[Lottery], a1: &[Lottery]) -> Vec<usize> {
    let eb: Vec<Vec<f64>> =
        rep.extremes.iter().map(|e| a1.iter().map(|b| dot(e, b.as_slice())).collect()).collect();
    let values: Vec<f64> = a2
        .iter()
        .map(|a| {
            let ea: Vec<f64> = rep.extremes.iter().map(|e| dot(e, a.as_slice())).collect();
            (1.0 - rep.gamma) * dot(&rep.u, a.as_slice()) + rep.gamma * regret_from_values(&ea, &eb)
        })
        .collect();
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = CHOICE_TOLERANCE * rep.scale();
    (0..values.len()).filter(|&i| values[i] >= best - tol).collect()
}

/// Maximum number of memoized answers.
const MEMO_CAPACITY: usize = 200_000;

/// Simulated choice correspondence generated by a representation.
#[derive(Debug)]
pub struct ChoiceOracle {
    rep: Representation,
    memo: Mutex<HashMap<Vec<u64>, Vec<usize>>>,
    queries: AtomicU64,
}

impl Clone for ChoiceOracle {
    fn clone(&self) -> Self {
        Self::new(self.rep.clone())
    }
}

impl ChoiceOracle {
    pub fn new(rep: Representation) -> Self {
        Self { rep, memo: Mutex::new(HashMap::new()), queries: AtomicU64::new(0) }
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.rep.space
    }

    /// The generating representation. Probe verdicts never read it.
    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    /// Number of menu queries answered so far.
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// `c(A2 | A1)` as indices into `a2`, in menu order.
    pub fn choose(&self, a2: &[Lottery], a1: &[Lottery]) -> Result<Vec<usize>> {
        validate_menus(&self.rep.space, a2, a1)?;
        Ok(self.choose_valid(a2, a1))
    }

    /// Query on menus built internally, already known to satisfy the menu constraints.
    pub(crate) fn choose_valid(&self, a2: &[Lottery], a1: &[Lottery]) -> Vec<usize> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let key: Vec<u64> = a2
            .iter()
            .flat_map(|p| p.as_slice().iter().map(|x| x.to_bits()))
            .chain([u64::MAX])
            .chain(a1.iter().flat_map(|p| p.as_slice().iter().map(|x| x.to_bits())))
            .collect();
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            return hit.clone();
        }
        let answer = choose_unchecked(&self.rep, a2, a1);
        let mut memo = self.memo.lock().expect("memo lock");
        if memo.len() < MEMO_CAPACITY {
            memo.insert(key, answer.clone());
        }
        answer
    }
}

/// `p` is weakly worse than `a` under every rationale.
pub fn ground_truth_inner(rep: &Representation, a: &Lottery, p: &Lottery) -> bool {
    let d = sub(a.as_slice(), p.as_slice());
    rep.extremes.iter().all(|e| dot(e, &d) >= -CONE_TOLERANCE)
}

/// `p` is weakly worse than `a` under every blend `(1 - gamma) u + gamma v`.
pub fn ground_truth_outer(rep: &Representation, a: &Lottery, p: &Lottery) -> bool {
    let d = sub(a.as_slice(), p.as_slice());
    let g = rep.gamma;
    let ud = dot(&rep.u, &d);
    rep.extremes.iter().all(|e| (1.0 - g) * ud + g * dot(e, &d) >= -CONE_TOLERANCE)
}

/// The smallest instance where No Free Distortion and a non-singleton hull coexist.
pub fn id_small_1() -> RegularRepresentation {
    let space = OutcomeSpace::with_sizes(&[2, 2]).expect("valid space");
    let rep = Representation::new(
        space,
        0.5,
        vec![0.0, 1.0, 0.5, 1.0],
        vec![vec![0.0, 1.0, 0.0, 2.0], vec![0.0, 1.0, 1.0, 0.0]],
    )
    .expect("valid representation");
    RegularRepresentation::new(rep).expect("regular representation")
}

/// Random regular representation on `Z1 = {0, 1}`, `|Z2| = 3` for each first action, with
/// `k` extremes whose marginal-preserving parts are well separated.
pub fn random_regular_representation(seed: u64, k: usize) -> Result<RegularRepresentation> {
    if !(2..=4).contains(&k) {
        return domain("random representations use between 2 and 4 extremes");
    }
    let space = OutcomeSpace::with_sizes(&[3, 3])?;
    let n = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let extremes: Vec<Vec<f64>> =
            (0..k).map(|_| (0..n).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
        let cols: Vec<Vec<f64>> = extremes.iter().map(|e| space.project_block_tangent(e)).collect();
        let m = DMatrix::from_fn(n, k, |i, j| cols[j][i]);
        let smin = m.svd(false, false).singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin < 0.2 {
            continue;
        }
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let u: Vec<f64> =
            (0..n).map(|i| (0..k).map(|j| raw[j] / total * extremes[j][i]).sum()).collect();
        let gamma = rng.random_range(0.2..0.8);
        let rep = Representation::new(space.clone(), gamma, u, extremes)?;
        if let Ok(reg) = RegularRepresentation::new(rep) {
            return Ok(reg);
        }
    }
    Err(Error::Precondition("could not draw a regular representation".into()))
}
