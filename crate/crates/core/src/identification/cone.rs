//! Recovery of the rationale cone at an interior lottery from probe answers alone.
//!
//! Directions in the simplex tangent space are classified by the inner-cone probe.
//! Boundary directions are located by bisection between a central member and each
//! non-member, and facets are fitted as hyperplanes through the origin that support
//! every classified member and pass through enough boundary directions.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::probe::{check_interior, inner_cone_membership, MembershipMode, ProbeConfig};
use super::space::{dot, norm, ChoiceOracle, Lottery};
use crate::error::{Error, Result};

/// Sampling and fitting settings for [`recover_rationale_cone`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeConfig {
    /// Random directions classified before refinement.
    pub samples: usize,
    /// Non-members refined into boundary directions.
    pub max_boundary: usize,
    pub bisection_steps: usize,
    /// Rounds that look for facets missed by the first fit.
    pub refine_rounds: usize,
    /// Directions near the boundary of the fitted cone classified per refinement round.
    pub refine_samples: usize,
    pub probe: ProbeConfig,
    pub seed: u64,
}

impl Default for ConeConfig {
    fn default() -> Self {
        Self {
            samples: 600,
            max_boundary: 96,
            bisection_steps: 38,
            refine_rounds: 3,
            refine_samples: 200,
            probe: ProbeConfig { eps_levels: 11, random_budget: 16, seed: 1 },
            seed: 0,
        }
    }
}

/// Facet normals of the recovered cone, as unit vectors in outcome coordinates.
/// Members `p` satisfy `n . (p - a) <= 0` for every normal.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredCone {
    pub normals: Vec<Vec<f64>>,
    /// Unit boundary directions found by bisection.
    pub boundary: Vec<Vec<f64>>,
    pub members: usize,
    pub non_members: usize,
}

const SUPPORT_TOLERANCE: f64 = 1e-7;
const INLIER_TOLERANCE: f64 = 1e-6;
const DEDUPE_ANGLE: f64 = 1e-4;

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let n = norm(&v);
    (n > 1e-12).then(|| v.into_iter().map(|x| x / n).collect())
}

fn embed(basis: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; basis[0].len()];
    for (b, &ci) in basis.iter().zip(c) {
        for (o, bi) in out.iter_mut().zip(b) {
            *o += ci * bi;
        }
    }
    out
}

/// Unit normal of the best hyperplane through the origin containing `points`.
fn null_normal(points: &[&Vec<f64>], dim: usize) -> Vec<f64> {
    let m = DMatrix::from_fn(points.len(), dim, |i, j| points[i][j]);
    let eig = SymmetricEigen::new(m.transpose() * m);
    let (idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    eig.eigenvectors.column(idx).iter().cloned().collect()
}

/// Classification and bisection shared by the inner and outer cone recoveries.
pub(crate) struct BoundarySearch {
    /// Unit mean of the member directions, itself a member.
    pub center: Vec<f64>,
    pub members: Vec<Vec<f64>>,
    pub non_members: Vec<Vec<f64>>,
    pub boundary: Vec<Vec<f64>>,
}

/// Classifies `samples` Gaussian directions in the span of `basis` (coordinates in that
/// basis) and bisects toward up to `max_boundary` non-members.
pub(crate) fn boundary_search<F>(
    basis: &[Vec<f64>],
    samples: usize,
    max_boundary: usize,
    steps: usize,
    seed: u64,
    mut member: F,
) -> Result<BoundarySearch>
where
    F: FnMut(&[f64]) -> Result<bool>,
{
    let dim = basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::new();
    let mut non_members = Vec::new();
    for _ in 0..samples {
        let c: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let Some(c) = unit(c) else { continue };
        if member(&embed(basis, &c))? {
            members.push(c);
        } else {
            non_members.push(c);
        }
    }
    if members.is_empty() || non_members.is_empty() {
        return Err(Error::UnderDetermined(format!(
            "classification found {} members and {} non-members",
            members.len(),
            non_members.len()
        )));
    }
    let mean: Vec<f64> = (0..dim).map(|j| members.iter().map(|c| c[j]).sum::<f64>()).collect();
    let center = unit(mean).ok_or_else(|| Error::UnderDetermined("members average to zero".into()))?;
    if !member(&embed(basis, &center))? {
        return Err(Error::UnderDetermined("the mean member direction is not a member".into()));
    }
    let mut boundary = Vec::new();
    for nm in non_members.iter().take(max_boundary) {
        if let Some(d) = bisect(basis, &center, nm, steps, &mut member)? {
            boundary.push(d);
        }
    }
    Ok(BoundarySearch { center, members, non_members, boundary })
}

/// Boundary direction between a member `center` and a non-member `target`, both in basis
/// coordinates, or `None` when the blend degenerates.
fn bisect<F>(basis: &[Vec<f64>], center: &[f64], target: &[f64], steps: usize, member: &mut F) -> Result<Option<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Result<bool>,
{
    let blend = |t: f64| unit(center.iter().zip(target).map(|(c, x)| (1.0 - t) * c + t * x).collect());
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        let Some(d) = blend(mid) else { return Ok(None) };
        if member(&embed(basis, &d))? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(blend(0.5 * (lo + hi)))
}

/// Directions just inside the boundary of the fitted cone, reached from `center` along
/// random directions. A facet missed by the fit cuts off part of this shell.
fn shell_directions(center: &[f64], normals: &[Vec<f64>], count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let dim = center.len();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let g: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let Some(g) = unit(g) else { continue };
        // Largest step keeping every fitted inequality, capped for unbounded directions.
        let t = normals
            .iter()
            .filter(|n| dot(n, &g) > 1e-12)
            .map(|n| -dot(n, center) / dot(n, &g))
            .fold(10.0, f64::min);
        if t > 0.0 {
            if let Some(d) = unit(center.iter().zip(&g).map(|(c, gi)| c + 0.97 * t * gi).collect()) {
                out.push(d);
            }
        }
    }
    out
}

/// Refits after bisecting toward non-members that the fitted facets fail to exclude,
/// until every classified non-member is explained or the rounds run out.
pub(crate) fn refine_facets<F>(
    basis: &[Vec<f64>],
    search: &mut BoundarySearch,
    config: &ConeConfig,
    mut member: F,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Result<bool>,
{
    let dim = basis.len();
    let mut facets = fit_facets(search, dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_f00d);
    for _ in 0..config.refine_rounds {
        if facets.is_empty() {
            break;
        }
        for d in shell_directions(&search.center, &facets, config.refine_samples, &mut rng) {
            if member(&embed(basis, &d))? {
                search.members.push(d);
            } else {
                search.non_members.push(d);
            }
        }
        let unexplained: Vec<Vec<f64>> = search
            .non_members
            .iter()
            .filter(|c| facets.iter().all(|n| dot(n, c) <= 0.0))
            .take(4 * dim)
            .cloned()
            .collect();
        if unexplained.is_empty() {
            break;
        }
        for target in &unexplained {
            if let Some(d) = bisect(basis, &search.center, target, config.bisection_steps, &mut member)? {
                search.boundary.push(d);
            }
        }
        facets = fit_facets(search, dim);
    }
    Ok(facets)
}

/// Fits supporting hyperplanes through the origin to boundary directions.
/// Returns unit normals in basis coordinates, oriented away from the members.
pub(crate) fn fit_facets(search: &BoundarySearch, dim: usize) -> Vec<Vec<f64>> {
    let pts = &search.boundary;
    let mut normals: Vec<Vec<f64>> = Vec::new();
    if dim < 2 || pts.len() < dim + 1 {
        return normals;
    }
    let need = dim.saturating_sub(2);
    let supports = |n: &[f64]| {
        search.members.iter().chain(pts.iter()).all(|z| dot(n, z) <= SUPPORT_TOLERANCE)
    };
    let orient = |mut n: Vec<f64>| {
        let s: f64 = search.members.iter().map(|z| dot(&n, z)).sum();
        if s > 0.0 {
            n.iter_mut().for_each(|x| *x = -*x);
        }
        n
    };
    for (i, p) in pts.iter().enumerate() {
        let mut others: Vec<(f64, usize)> = pts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, q)| (norm(&super::space::sub(p, q)), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut set: Vec<&Vec<f64>> = vec![p];
        set.extend(others.iter().take(need).map(|&(_, j)| &pts[j]));
        let n = orient(null_normal(&set, dim));
        if !supports(&n) {
            continue;
        }
        let inliers: Vec<&Vec<f64>> = pts.iter().filter(|z| dot(&n, z).abs() <= INLIER_TOLERANCE).collect();
        if inliers.len() < dim + 1 {
            continue;
        }
        let refit = orient(null_normal(&inliers, dim));
        if !supports(&refit) {
            continue;
        }
        if normals.iter().all(|m| dot(m, &refit).clamp(-1.0, 1.0).acos() >= DEDUPE_ANGLE) {
            normals.push(refit);
        }
    }
    normals
}

/// Recovers the facet normals of the cone of lotteries weakly worse than `a` under every
/// rationale, using only probe answers. Fails with `UnderDetermined` when no facet can be
/// fitted.
pub fn recover_rationale_cone(oracle: &ChoiceOracle, a: &Lottery, config: &ConeConfig) -> Result<RecoveredCone> {
    check_interior(a)?;
    let basis = oracle.space().tangent_basis();
    let delta = 0.5 * a.min_entry();
    let probe = MembershipMode::Probe(config.probe);
    let member = |d: &[f64]| {
        let p = Lottery::clean(a.as_slice().iter().zip(d).map(|(x, di)| x + delta * di).collect())?;
        inner_cone_membership(oracle, a, &p, probe)
    };
    let mut search =
        boundary_search(&basis, config.samples, config.max_boundary, config.bisection_steps, config.seed, member)?;
    let facets = refine_facets(&basis, &mut search, config, member)?;
    if facets.is_empty() {
        return Err(Error::UnderDetermined("no supporting facet could be fitted".into()));
    }
    let embed_unit = |c: &[f64]| embed(&basis, c);
    Ok(RecoveredCone {
        normals: facets.iter().map(|c| embed_unit(c)).collect(),
        boundary: search.boundary.iter().map(|c| embed_unit(c)).collect(),
        members: search.members.len(),
        non_members: search.non_members.len(),
    })
}
