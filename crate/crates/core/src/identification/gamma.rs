//! Recovery of the material direction and of the regret weight.
//!
//! The material direction on marginal-preserving directions comes from unforced binary
//! menus. The regret weight is pinned down by comparing the rationale cone with the
//! cone of lotteries never chosen over `a`: on each facet the ratio of material loss to
//! rationale gain fixes the scale of that extreme relative to `u`. A one-parameter family
//! of candidate representations is then scored against a battery of menu queries.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::cone::{boundary_search, recover_rationale_cone, ConeConfig, RecoveredCone};
use super::probe::{check_interior, outer_probe, ProbeConfig};
use super::space::{axpy, choose_unchecked, dot, max_step, norm, ChoiceOracle, Lottery, Representation};
use crate::error::{domain, Error, Result};

/// Settings for [`estimate_gamma`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaConfig {
    /// Directions classified by the outer probe.
    pub directions: usize,
    pub boundary_points: usize,
    /// Extra bisection rays aimed at each recovered facet.
    pub facet_rays: usize,
    pub bisection_steps: usize,
    /// Menus in the scoring battery.
    pub battery: usize,
    pub probe: ProbeConfig,
    pub seed: u64,
}

impl Default for GammaConfig {
    fn default() -> Self {
        Self {
            directions: 400,
            boundary_points: 128,
            facet_rays: 16,
            bisection_steps: 30,
            battery: 1000,
            probe: ProbeConfig { eps_levels: 11, random_budget: 16, seed: 2 },
            seed: 0,
        }
    }
}

/// Result of [`estimate_gamma`].
#[derive(Debug, Clone, PartialEq)]
pub struct GammaEstimate {
    pub gamma: f64,
    /// Value implied directly by the facet ratios, kept as a diagnostic.
    pub closed_form: f64,
    /// Weights of the recovered normals in the material direction.
    pub weights: Vec<f64>,
    /// Smallest material-loss to rationale-gain ratio per facet.
    pub ratios: Vec<f64>,
    /// Boundary points attaining each ratio within a relative `1e-4`.
    pub support: Vec<usize>,
    /// Disagreements with the oracle at the estimate.
    pub disagreements: usize,
    /// `(candidate, disagreements)` over the coarse and fine scans.
    pub profile: Vec<(f64, usize)>,
}

fn unforced_sign(oracle: &ChoiceOracle, a: &Lottery, d: &[f64], eta: f64) -> Result<i8> {
    let b = Lottery::clean(axpy(a.as_slice(), eta, d))?;
    let menu = [a.clone(), b];
    let c = oracle.choose(&menu, &menu)?;
    Ok(match c.as_slice() {
        [1] => 1,
        [0] => -1,
        _ => 0,
    })
}

/// Unit direction of the material utility restricted to marginal-preserving directions,
/// found by bisecting angles on binary unforced choices.
pub fn recover_material_direction(oracle: &ChoiceOracle, a: &Lottery) -> Result<Vec<f64>> {
    check_interior(a)?;
    let basis = oracle.space().block_tangent_basis();
    if basis.is_empty() {
        return domain("no marginal-preserving directions exist");
    }
    let eta = 0.5 * a.min_entry();
    let mut signs = Vec::with_capacity(basis.len());
    for b in &basis {
        signs.push(unforced_sign(oracle, a, b, eta)?);
    }
    let Some(i0) = signs.iter().position(|&s| s != 0) else {
        return Err(Error::Unidentified("material utility is flat on marginal-preserving directions".into()));
    };
    let s0 = signs[i0] as f64;
    let mut coef = vec![0.0; basis.len()];
    coef[i0] = s0;
    for i in 0..basis.len() {
        if i == i0 {
            continue;
        }
        let dir = |phi: f64| -> Vec<f64> { axpy(&basis[i0].iter().map(|x| phi.cos() * x).collect::<Vec<_>>(), phi.sin(), &basis[i]) };
        let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let s = unforced_sign(oracle, a, &dir(mid), eta)? as f64;
            if s == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if s == s0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let phi = 0.5 * (lo + hi);
        coef[i] = -s0 * phi.cos() / phi.sin();
    }
    let mut v = vec![0.0; oracle.space().len()];
    for (c, b) in coef.iter().zip(&basis) {
        v = axpy(&v, *c, b);
    }
    let n = norm(&v);
    Ok(v.into_iter().map(|x| x / n).collect())
}

fn random_lottery(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / s).collect()
}

struct Battery {
    menus: Vec<([Lottery; 2], Vec<Lottery>)>,
    observed: Vec<Vec<usize>>,
}

fn build_battery(oracle: &ChoiceOracle, a: &Lottery, config: &GammaConfig) -> Result<Battery> {
    let space = oracle.space();
    let n = space.len();
    let basis = space.block_tangent_basis();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed);
    let mut menus = Vec::with_capacity(config.battery);
    while menus.len() < config.battery {
        let mut d = vec![0.0; n];
        for b in &basis {
            d = axpy(&d, StandardNormal.sample(&mut rng), b);
        }
        let nd = norm(&d);
        if nd <= 1e-12 {
            continue;
        }
        let d: Vec<f64> = d.iter().map(|x| x / nd).collect();
        let eta = max_step(a.as_slice(), &d).min(1.0) * rng.random_range(0.05..0.9);
        let b = Lottery::clean(axpy(a.as_slice(), eta, &d))?;
        let mut a1 = vec![a.clone(), b.clone()];
        for _ in 0..2 {
            let r = random_lottery(&mut rng, n);
            let t: f64 = rng.random_range(0.0..1.0);
            let x: Vec<f64> = a.as_slice().iter().zip(&r).map(|(ai, ri)| ai + t * (ri - ai)).collect();
            a1.push(Lottery::clean(x)?);
        }
        menus.push(([a.clone(), b], a1));
    }
    let observed = menus.iter().map(|(a2, a1)| oracle.choose(a2, a1)).collect::<Result<Vec<_>>>()?;
    Ok(Battery { menus, observed })
}

/// Bisects from the mean member towards targets that violate one recovered facet and
/// satisfy the others with random slack. Thin facets are rarely reached by random
/// directions, and the facet ratios need points on every facet.
fn facet_boundary<F>(
    basis: &[Vec<f64>],
    normals: &[Vec<f64>],
    members: &[Vec<f64>],
    config: &GammaConfig,
    mut member: F,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Result<bool>,
{
    let dim = basis.len();
    let unit = |v: Vec<f64>| {
        let l = norm(&v);
        (l > 1e-12).then(|| v.into_iter().map(|x| x / l).collect::<Vec<f64>>())
    };
    let mean: Vec<f64> = (0..dim).map(|j| members.iter().map(|c| c[j]).sum()).collect();
    let Some(center) = unit(mean) else { return Ok(Vec::new()) };
    let k = normals.len();
    let m = DMatrix::from_fn(k, dim, |i, j| dot(&normals[i], &basis[j]));
    let svd = m.svd(true, true);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xface7);
    let mut out = Vec::new();
    for target in 0..k {
        for _ in 0..config.facet_rays {
            let rhs = DVector::from_fn(k, |i, _| if i == target { 1.0 } else { -rng.random_range(1.0..6.0) });
            let Ok(x) = svd.solve(&rhs, 1e-12) else { continue };
            let Some(goal) = unit(x.iter().cloned().collect()) else { continue };
            if member(&goal)? {
                continue;
            }
            let blend = |t: f64| unit((0..dim).map(|j| (1.0 - t) * center[j] + t * goal[j]).collect());
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..config.bisection_steps {
                let mid = 0.5 * (lo + hi);
                let Some(d) = blend(mid) else { break };
                if member(&d)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if let Some(d) = blend(0.5 * (lo + hi)) {
                out.push(d);
            }
        }
    }
    Ok(out)
}

/// Estimates the regret weight from the recovered rationale cone and material direction,
/// using outer-probe boundary points and a battery of menu queries.
pub fn estimate_gamma(
    oracle: &ChoiceOracle,
    a: &Lottery,
    material: &[f64],
    cone: &RecoveredCone,
    config: &GammaConfig,
) -> Result<GammaEstimate> {
    check_interior(a)?;
    let space = oracle.space();
    let n = space.len();
    let k = cone.normals.len();
    if material.len() != n || k == 0 || cone.normals.iter().any(|v| v.len() != n) {
        return domain("material direction and normals must have one entry per profile");
    }
    // Express the material direction through the projected normals.
    let cols: Vec<Vec<f64>> = cone.normals.iter().map(|v| space.project_block_tangent(v)).collect();
    let m = DMatrix::from_fn(n, k, |i, j| cols[j][i]);
    let rhs = DVector::from_column_slice(material);
    let lambda = m
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Unidentified(e.to_string()))?;
    let resid = (&m * &lambda - &rhs).norm();
    if resid > 1e-4 || lambda.iter().any(|&l| l <= 1e-9) {
        return Err(Error::Unidentified(
            "the material direction is not a positive combination of the recovered normals".into(),
        ));
    }
    let weights: Vec<f64> = lambda.iter().cloned().collect();
    let mut u_vec = vec![0.0; n];
    for (w, v) in weights.iter().zip(&cone.normals) {
        u_vec = axpy(&u_vec, *w, v);
    }

    // Boundary of the never-chosen-over cone on marginal-preserving directions.
    let basis = space.block_tangent_basis();
    let delta = 0.5 * a.min_entry();
    let outer_member = |d: &[f64]| -> Result<bool> {
        let p = Lottery::clean(axpy(a.as_slice(), delta, d))?;
        outer_probe(oracle, a, &p, &config.probe)
    };
    let embed = |c: &[f64]| basis.iter().zip(c).fold(vec![0.0; n], |acc, (b, ci)| axpy(&acc, *ci, b));
    let search = boundary_search(
        &basis,
        config.directions,
        config.boundary_points,
        config.bisection_steps,
        config.seed,
        |d| outer_member(d),
    )
    .map_err(|e| Error::Unidentified(format!("outer cone: {e}")))?;
    let mut boundary: Vec<Vec<f64>> = search.boundary.iter().map(|c| embed(c)).collect();
    let extra = facet_boundary(&basis, &cone.normals, &search.members, config, |c| outer_member(&embed(c)))?;
    boundary.extend(extra.into_iter().map(|c| embed(&c)));
    let mut ratios = Vec::with_capacity(k);
    let mut support = Vec::with_capacity(k);
    for nk in &cone.normals {
        let values: Vec<f64> = boundary
            .iter()
            .filter_map(|d| {
                let (g, l) = (dot(nk, d), dot(&u_vec, d));
                (g > 1e-9 && l < -1e-12).then(|| -l / g)
            })
            .collect();
        let best = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            return Err(Error::Unidentified("a facet has no matching boundary of the outer cone".into()));
        }
        // The ratio is constant on the matching facet, so several attaining points confirm it.
        support.push(values.iter().filter(|&&v| v <= best * (1.0 + 1e-4)).count());
        ratios.push(best);
    }
    let closed_form = 1.0 / (1.0 + weights.iter().zip(&ratios).map(|(l, r)| l / r).sum::<f64>());

    let battery = build_battery(oracle, a, config)?;
    let candidate = |g: f64| -> Result<Representation> {
        let c: Vec<f64> = ratios.iter().map(|r| r * (1.0 - g) / g).collect();
        let s: f64 = weights.iter().zip(&c).map(|(l, ck)| l / ck).sum();
        let extremes = cone.normals.iter().zip(&c).map(|(v, ck)| v.iter().map(|x| ck * x).collect()).collect();
        Representation::new(space.clone(), g, u_vec.iter().map(|x| x / s).collect(), extremes)
    };
    let score = |g: f64| -> Result<usize> {
        let rep = candidate(g)?;
        Ok(battery
            .menus
            .iter()
            .zip(&battery.observed)
            .filter(|((a2, a1), obs)| choose_unchecked(&rep, a2, a1) != **obs)
            .count())
    };
    let mut profile = Vec::new();
    for i in 1..100 {
        let g = i as f64 / 100.0;
        profile.push((g, score(g)?));
    }
    let lo = profile.iter().map(|p| p.1).min().unwrap_or(0);
    let hi = profile.iter().map(|p| p.1).max().unwrap_or(0);
    if lo == hi {
        return Err(Error::Unidentified("menu battery does not discriminate between regret weights".into()));
    }
    // The fine scan covers the first run of minimal coarse scores with a margin.
    let first = profile.iter().position(|p| p.1 == lo).unwrap_or(0);
    let last = profile[first..].iter().position(|p| p.1 != lo).map_or(profile.len() - 1, |j| first + j - 1);
    let (start, end) = (profile[first].0 - 0.01, profile[last].0 + 0.01);
    let steps = ((end - start) / 0.0005).round() as usize;
    let mut fine = Vec::new();
    for i in 0..=steps {
        let g = start + i as f64 * 0.0005;
        if g > 0.0 && g < 1.0 {
            fine.push((g, score(g)?));
        }
    }
    let best = fine.iter().map(|p| p.1).min().unwrap_or(lo);
    // Midpoint of the longest run of minimal scores.
    let mut best_run = (0usize, 0usize);
    let mut i = 0;
    while i < fine.len() {
        if fine[i].1 != best {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < fine.len() && fine[i + 1].1 == best {
            i += 1;
        }
        if fine[best_run.0].1 != best || i - start > best_run.1 - best_run.0 {
            best_run = (start, i);
        }
        i += 1;
    }
    let mut gamma = 0.5 * (fine[best_run.0].0 + fine[best_run.1].0);
    // The battery only brackets the weight; the facet-ratio value is far more precise, so it
    // is preferred whenever the battery scores it no worse than the best scan point.
    if closed_form > 0.0 && closed_form < 1.0 && score(closed_form)? <= best {
        gamma = closed_form;
    }
    profile.extend(fine);
    Ok(GammaEstimate { gamma, closed_form, weights, ratios, support, disagreements: best, profile })
}

/// Primitives rebuilt from probe answers.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    /// Representation with the recovered extremes scaled to the estimated regret weight.
    /// Its material utility is only determined on marginal-preserving directions.
    pub representation: Representation,
    pub cone: RecoveredCone,
    pub material: Vec<f64>,
    pub gamma: GammaEstimate,
}

/// Runs cone recovery, material-direction recovery and the regret-weight estimate at `a`.
pub fn recover_representation(
    oracle: &ChoiceOracle,
    a: &Lottery,
    cone_config: &ConeConfig,
    gamma_config: &GammaConfig,
) -> Result<Recovery> {
    let cone = recover_rationale_cone(oracle, a, cone_config)?;
    let material = recover_material_direction(oracle, a)?;
    let gamma = estimate_gamma(oracle, a, &material, &cone, gamma_config)?;
    let g = gamma.gamma;
    let c: Vec<f64> = gamma.ratios.iter().map(|r| r * (1.0 - g) / g).collect();
    let s: f64 = gamma.weights.iter().zip(&c).map(|(l, ck)| l / ck).sum();
    let n = oracle.space().len();
    let mut u = vec![0.0; n];
    for (w, v) in gamma.weights.iter().zip(&cone.normals) {
        u = axpy(&u, w / s, v);
    }
    let extremes = cone.normals.iter().zip(&c).map(|(v, ck)| v.iter().map(|x| ck * x).collect()).collect();
    let representation = Representation::new(oracle.space().clone(), g, u, extremes)?;
    Ok(Recovery { representation, cone, material, gamma })
}
