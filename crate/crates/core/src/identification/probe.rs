//! Behavioral probes: "matters for", cone membership, "never chosen over" and
//! the material preference revealed by unforced binary menus.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::game::solve_matrix_game;
use super::space::{
    axpy, dot, ground_truth_inner, ground_truth_outer, max_step, norm, sub, ChoiceOracle, Lottery,
    OutcomeSpace, Representation, SUM_TOLERANCE,
};
use crate::error::{domain, Error, Result};

/// Smallest coordinate allowed for a probe center.
pub const INTERIOR_MARGIN: f64 = 1e-3;

/// Search settings of the probe operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    /// Number of blend weights `1, 1/2, ..., 2^-(levels-1)`.
    pub eps_levels: usize,
    /// Seeded random candidates tried after the constructive ones.
    pub random_budget: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { eps_levels: 11, random_budget: 256, seed: 0 }
    }
}

impl ProbeConfig {
    pub(crate) fn eps_grid(&self) -> impl Iterator<Item = f64> {
        (0..self.eps_levels).map(|i| 0.5f64.powi(i as i32))
    }

    fn level_seed(&self, level: usize) -> u64 {
        self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(level as u64)
    }
}

/// Outcome of a "matters for" search.
#[derive(Debug, Clone, PartialEq)]
pub enum MattersVerdict {
    /// `a` is chosen from `{a, b}` after forgoing `x`, but not after also forgoing `p`.
    Yes { x: Lottery, b: Lottery },
    NoWithinBudget,
}

impl MattersVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, MattersVerdict::Yes { .. })
    }
}

/// How cone membership is decided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MembershipMode {
    /// Dot products with the generating extremes.
    GroundTruth,
    /// Behavioral probes over the blend grid.
    Probe(ProbeConfig),
}

pub(crate) fn check_interior(a: &Lottery) -> Result<()> {
    if a.min_entry() < INTERIOR_MARGIN {
        return Err(Error::Precondition(format!(
            "probe center must have every coordinate at least {INTERIOR_MARGIN}"
        )));
    }
    Ok(())
}

fn same_marginal(space: &OutcomeSpace, a: &Lottery, p: &Lottery) -> bool {
    let (ma, mp) = (space.marginal(a.as_slice()), space.marginal(p.as_slice()));
    ma.iter().zip(&mp).all(|(x, y)| (x - y).abs() <= SUM_TOLERANCE)
}

/// Component of `v` in the marginal-preserving directions orthogonal to `u`.
fn project_off_u(space: &OutcomeSpace, v: &[f64], u: &[f64]) -> Vec<f64> {
    let g = space.project_block_tangent(v);
    let u1 = space.project_block_tangent(u);
    let uu = dot(&u1, &u1);
    if uu <= 1e-300 {
        return g;
    }
    axpy(&g, -dot(&g, &u1) / uu, &u1)
}

/// A lottery that every rationale ranks strictly below `a`, as the maximin mixture
/// over profiles of `min_k e_k . (a - x)`. Returns the direction `a - x` and the margin.
pub(crate) fn improving_direction(rep: &Representation, a: &[f64]) -> (Vec<f64>, f64) {
    let n = a.len();
    let k = rep.extremes.len();
    let ea: Vec<f64> = rep.extremes.iter().map(|e| dot(e, a)).collect();
    let mut m = Vec::with_capacity(n * k);
    for z in 0..n {
        for j in 0..k {
            m.push(ea[j] - rep.extremes[j][z]);
        }
    }
    let sol = solve_matrix_game(&m, n, k);
    (sub(a, &sol.row_strategy), sol.value)
}

fn random_lottery(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / s).collect()
}

fn gaussian_in(rng: &mut ChaCha8Rng, basis: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n];
    for b in basis {
        let c: f64 = StandardNormal.sample(rng);
        for i in 0..n {
            d[i] += c * b[i];
        }
    }
    d
}

/// Constructive `(x, b)` candidates that make `q` matter for `a` when some rationale
/// strictly prefers `q` to `a`.
fn recipe_candidates(rep: &Representation, q: &[f64], a: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let space = &rep.space;
    let ext = &rep.extremes;
    let scale = rep.scale();
    let dq: Vec<f64> = ext.iter().map(|e| dot(e, &sub(q, a))).collect();
    let stars: Vec<usize> = (0..ext.len()).filter(|&k| dq[k] > 1e-13 * scale).collect();
    if stars.is_empty() {
        return Vec::new();
    }
    let (h, margin) = improving_direction(rep, a);
    if margin <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for &ks in &stars {
        let eh = dot(&ext[ks], &h);
        let d_hat = 0.5 * max_step(a, &h).min(dq[ks] / eh);
        let x_bar = axpy(a, d_hat, &h);
        let lambda = d_hat * eh / (dq[ks] - d_hat * eh);
        let big_d: Vec<f64> =
            (0..a.len()).map(|i| (1.0 + lambda) * x_bar[i] - lambda * q[i] - a[i]).collect();
        let d_bar = 0.5 * max_step(a, &big_d).min(1.0);
        let x = axpy(a, d_bar, &big_d);
        let h_star = project_off_u(space, &ext[ks], &rep.u);
        for (j, e_bar) in ext.iter().enumerate() {
            if j == ks {
                continue;
            }
            let g = project_off_u(space, e_bar, &rep.u);
            let gh = dot(&g, &h_star);
            let hh = dot(&h_star, &h_star);
            let d = if gh <= 0.0 || hh <= 1e-300 { g } else { axpy(&g, -gh / hh, &h_star) };
            let slope = dot(e_bar, &d);
            if norm(&d) <= 1e-12 || slope <= 0.0 {
                continue;
            }
            let eta_max = max_step(a, &d);
            for t in [1.0, 0.1, 0.01] {
                let xt = axpy(a, t, &sub(&x, a));
                let need = dot(e_bar, &sub(&xt, a)).max(dot(e_bar, &sub(q, a))).max(0.0);
                let mut etas = vec![0.5 * eta_max];
                let tight = 4.0 * need / slope;
                if tight < 0.5 * eta_max {
                    etas.push(tight.max(1e-12));
                }
                for eta in etas {
                    out.push((xt.clone(), axpy(a, eta, &d)));
                }
            }
        }
    }
    out
}

fn flips(oracle: &ChoiceOracle, a: &Lottery, q: &Lottery, x: &Lottery, b: &Lottery) -> bool {
    let menu = [a.clone(), b.clone()];
    let without = oracle.choose_valid(&menu, &[a.clone(), b.clone(), x.clone()]);
    if !without.contains(&0) {
        return false;
    }
    let with = oracle.choose_valid(&menu, &[a.clone(), b.clone(), x.clone(), q.clone()]);
    !with.contains(&0)
}

/// Searches for `x` and a marginal-preserving `b` showing that adding `p` to the
/// forgone menu changes whether `a` is chosen. Constructive candidates come first,
/// then `random_budget` seeded random candidates.
pub fn matters_for(oracle: &ChoiceOracle, p: &Lottery, a: &Lottery, config: &ProbeConfig) -> Result<MattersVerdict> {
    check_interior(a)?;
    let rep = oracle.representation();
    let n = rep.space.len();
    if p.len() != n || a.len() != n {
        return domain("lottery dimension does not match the outcome space");
    }
    for (x, b) in recipe_candidates(rep, p.as_slice(), a.as_slice()) {
        let (Ok(x), Ok(b)) = (Lottery::clean(x), Lottery::clean(b)) else { continue };
        if flips(oracle, a, p, &x, &b) {
            return Ok(MattersVerdict::Yes { x, b });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let basis = rep.space.block_tangent_basis();
    for _ in 0..config.random_budget {
        let r = random_lottery(&mut rng, n);
        let t = 0.1f64.powi(rng.random_range(0..4));
        let x = axpy(a.as_slice(), t, &sub(&r, a.as_slice()));
        let g = gaussian_in(&mut rng, &basis, n);
        let d = project_off_u(&rep.space, &g, &rep.u);
        if norm(&d) <= 1e-12 {
            continue;
        }
        let eta = max_step(a.as_slice(), &d) * rng.random_range(0.0..1.0) * 0.1f64.powi(rng.random_range(0..3));
        let b = axpy(a.as_slice(), eta, &d);
        let (Ok(x), Ok(b)) = (Lottery::clean(x), Lottery::clean(b)) else { continue };
        if flips(oracle, a, p, &x, &b) {
            return Ok(MattersVerdict::Yes { x, b });
        }
    }
    Ok(MattersVerdict::NoWithinBudget)
}

/// Membership of `p` in the closed cone of lotteries every rationale ranks weakly below `a`.
pub fn inner_cone_membership(oracle: &ChoiceOracle, a: &Lottery, p: &Lottery, mode: MembershipMode) -> Result<bool> {
    check_interior(a)?;
    match mode {
        MembershipMode::GroundTruth => Ok(ground_truth_inner(oracle.representation(), a, p)),
        MembershipMode::Probe(cfg) => {
            for (level, eps) in cfg.eps_grid().enumerate() {
                let q = p.mix(a, eps);
                let level_cfg = ProbeConfig { seed: cfg.level_seed(level), ..cfg };
                if matters_for(oracle, &q, a, &level_cfg)?.is_yes() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Directions in the simplex along which every extreme except `skip` strictly gains
/// and `skip` is unchanged.
fn face_directions(rep: &Representation, all_gain: &[f64]) -> Vec<Vec<f64>> {
    let space = &rep.space;
    let basis = space.tangent_basis();
    let k = rep.extremes.len();
    let mut out = vec![all_gain.to_vec()];
    if k < 2 {
        return out;
    }
    let m = basis.len();
    let rows = DMatrix::from_fn(k, m, |i, j| dot(&rep.extremes[i], &basis[j]));
    for skip in 0..k {
        let rhs = DVector::from_fn(k, |i, _| if i == skip { 0.0 } else { 1.0 });
        let Ok(c) = rows.clone().svd(true, true).solve(&rhs, 1e-12) else { continue };
        if (&rows * &c - &rhs).norm() > 1e-8 {
            continue;
        }
        let mut h = vec![0.0; space.len()];
        for (j, b) in basis.iter().enumerate() {
            for i in 0..h.len() {
                h[i] += c[j] * b[i];
            }
        }
        out.push(h);
    }
    out
}

/// Tangent directions `g_k` with `v_k . g = 0` and `v_j . g = 1` for every other extreme.
/// A forgone lottery shifted along `g_k` raises the benchmark of every rationale but `v_k`.
fn isolating_directions(rep: &Representation) -> Vec<Vec<f64>> {
    let basis = rep.space.tangent_basis();
    let k = rep.extremes.len();
    if k < 2 || basis.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_fn(k, basis.len(), |i, j| dot(&rep.extremes[i], &basis[j]));
    let svd = m.svd(true, true);
    (0..k)
        .filter_map(|target| {
            let rhs = DVector::from_fn(k, |i, _| if i == target { 0.0 } else { 1.0 });
            let c = svd.solve(&rhs, 1e-12).ok()?;
            let g = basis.iter().zip(c.iter()).fold(vec![0.0; rep.space.len()], |acc, (b, ci)| axpy(&acc, *ci, b));
            let ok = rep.extremes.iter().enumerate().all(|(i, v)| {
                let want = if i == target { 0.0 } else { 1.0 };
                (dot(v, &g) - want).abs() < 1e-6
            });
            ok.then_some(g)
        })
        .collect()
}

/// Probe analogue of membership in the closed outer cone: true when no candidate
/// forgone lottery `x` makes a blend of `p` the unique choice over `a`.
pub fn outer_probe(oracle: &ChoiceOracle, a: &Lottery, p: &Lottery, config: &ProbeConfig) -> Result<bool> {
    check_interior(a)?;
    let rep = oracle.representation();
    if p.len() != a.len() || p.len() != rep.space.len() {
        return domain("lottery dimension does not match the outcome space");
    }
    if !same_marginal(&rep.space, a, p) {
        return domain("p must share the first-action marginal of a");
    }
    let n = a.len();
    let (gain, _) = improving_direction(rep, a.as_slice());
    let gain: Vec<f64> = gain.iter().map(|x| -x).collect();
    let mut fixed: Vec<Lottery> = vec![a.clone()];
    for h in face_directions(rep, &gain) {
        let h: Vec<f64> = h.iter().map(|x| -x).collect();
        let top = max_step(a.as_slice(), &h).min(1e6);
        for s in [0.5, 0.05] {
            if let Ok(x) = Lottery::clean(axpy(a.as_slice(), s * top, &h)) {
                fixed.push(x);
            }
        }
    }
    let isolating = isolating_directions(rep);
    for (level, eps) in config.eps_grid().enumerate() {
        let q = p.mix(a, eps);
        let menu = [a.clone(), q.clone()];
        let chosen_over = |x: &Lottery| oracle.choose_valid(&menu, &[a.clone(), q.clone(), x.clone()]) == [1];
        if fixed.iter().any(chosen_over) {
            return Ok(false);
        }
        for g in &isolating {
            let top = max_step(q.as_slice(), g).min(1e6);
            for s in [0.9, 0.3] {
                if let Ok(x) = Lottery::clean(axpy(q.as_slice(), s * top, g)) {
                    if chosen_over(&x) {
                        return Ok(false);
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.level_seed(level));
        for _ in 0..config.random_budget {
            let r = random_lottery(&mut rng, n);
            let t = 0.1f64.powi(rng.random_range(0..4));
            let Ok(x) = Lottery::clean(axpy(a.as_slice(), t, &sub(&r, a.as_slice()))) else { continue };
            if chosen_over(&x) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Ground-truth counterpart of [`outer_probe`].
pub fn outer_ground_truth(oracle: &ChoiceOracle, a: &Lottery, p: &Lottery) -> bool {
    ground_truth_outer(oracle.representation(), a, p)
}

/// Total preorder revealed by unforced binary menus `c({b, d} | {b, d})`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialPreference {
    /// `weak[i][j]` is true when probe `i` is weakly preferred to probe `j`.
    pub weak: Vec<Vec<bool>>,
    /// Probe indices from best to worst; ties keep index order.
    pub order: Vec<usize>,
    /// Indifference class of each probe, 0 for the best class.
    pub class: Vec<usize>,
}

impl MaterialPreference {
    pub fn indifferent(&self, i: usize, j: usize) -> bool {
        self.weak[i][j] && self.weak[j][i]
    }

    pub fn strictly_prefers(&self, i: usize, j: usize) -> bool {
        self.weak[i][j] && !self.weak[j][i]
    }
}

/// Ranks probes that share a first-action marginal. Fails if the revealed relation is
/// not a total preorder.
pub fn recover_material_preference(oracle: &ChoiceOracle, probes: &[Lottery]) -> Result<MaterialPreference> {
    let space = oracle.space();
    if probes.is_empty() {
        return domain("at least one probe is required");
    }
    if probes.iter().any(|p| !same_marginal(space, &probes[0], p)) {
        return domain("probes must share the first-action marginal");
    }
    let k = probes.len();
    let mut weak = vec![vec![true; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let menu = [probes[i].clone(), probes[j].clone()];
            let c = oracle.choose(&menu, &menu)?;
            weak[i][j] = c.contains(&0);
            weak[j][i] = c.contains(&1);
        }
    }
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                if weak[i][j] && weak[j][l] && !weak[i][l] {
                    return Err(Error::Precondition(format!("revealed preference is intransitive at ({i},{j},{l})")));
                }
            }
        }
    }
    let score: Vec<usize> = (0..k).map(|i| weak[i].iter().filter(|&&w| w).count()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| score[j].cmp(&score[i]).then(i.cmp(&j)));
    let mut levels: Vec<usize> = score.clone();
    levels.sort_unstable_by(|a, b| b.cmp(a));
    levels.dedup();
    let class = (0..k).map(|i| levels.iter().position(|&s| s == score[i]).unwrap_or(0)).collect();
    Ok(MaterialPreference { weak, order, class })
}
