//! Equivalence of representations up to a common positive scale and per-member constants.

use super::space::{dot, norm, Representation};

const GAMMA_TOLERANCE: f64 = 1e-12;
const RESIDUAL_TOLERANCE: f64 = 1e-8;

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

fn centered(v: &[f64]) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| x - mean).collect()
}

/// Fit of `candidate[perm[i]] ~ alpha * reference[i] + const` over all vectors jointly.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineAlignment {
    pub permutation: Vec<usize>,
    pub alpha: f64,
    /// Residual norm relative to the norm of the centered candidate vectors.
    pub relative_residual: f64,
    /// Largest angle between matched centered vectors, in radians.
    pub max_angle: f64,
}

/// Best matching of two equally long lists of vectors up to a common positive scale and
/// per-vector constants, choosing the permutation with the smallest largest angle.
/// Returns `None` when the lists differ in length or no positive scale fits.
pub fn affine_alignment(reference: &[Vec<f64>], candidate: &[Vec<f64>]) -> Option<AffineAlignment> {
    if reference.len() != candidate.len() || reference.is_empty() || reference.len() > 8 {
        return None;
    }
    if reference.iter().chain(candidate).any(|v| v.len() != reference[0].len()) {
        return None;
    }
    let cr: Vec<Vec<f64>> = reference.iter().map(|v| centered(v)).collect();
    let cc: Vec<Vec<f64>> = candidate.iter().map(|v| centered(v)).collect();
    let mut best: Option<AffineAlignment> = None;
    for perm in permutations(reference.len()) {
        let (mut num, mut den, mut cand_sq) = (0.0, 0.0, 0.0);
        let mut max_angle: f64 = 0.0;
        for (i, &j) in perm.iter().enumerate() {
            num += dot(&cr[i], &cc[j]);
            den += dot(&cr[i], &cr[i]);
            cand_sq += dot(&cc[j], &cc[j]);
            let (ni, nj) = (norm(&cr[i]), norm(&cc[j]));
            let angle = if ni <= 1e-300 || nj <= 1e-300 {
                if ni == nj { 0.0 } else { std::f64::consts::PI }
            } else {
                (dot(&cr[i], &cc[j]) / (ni * nj)).clamp(-1.0, 1.0).acos()
            };
            max_angle = max_angle.max(angle);
        }
        if den <= 1e-300 || num <= 0.0 {
            continue;
        }
        let alpha = num / den;
        let resid_sq: f64 = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| cc[j].iter().zip(&cr[i]).map(|(c, r)| (c - alpha * r).powi(2)).sum::<f64>())
            .sum();
        let relative_residual = resid_sq.sqrt() / cand_sq.sqrt().max(1e-300);
        let better = best.as_ref().is_none_or(|b| max_angle < b.max_angle);
        if better {
            best = Some(AffineAlignment { permutation: perm, alpha, relative_residual, max_angle });
        }
    }
    best
}

/// True when the two representations share the regret weight and agree up to a common
/// positive rescaling of all utilities plus a constant per utility vector, with the
/// rationale extremes matched by some permutation.
pub fn verify_affine_equivalence(a: &Representation, b: &Representation) -> bool {
    if (a.gamma - b.gamma).abs() > GAMMA_TOLERANCE
        || a.extremes.len() != b.extremes.len()
        || a.space.len() != b.space.len()
        || a.extremes.len() > 8
    {
        return false;
    }
    let k = a.extremes.len();
    let ca: Vec<Vec<f64>> = std::iter::once(&a.u).chain(&a.extremes).map(|v| centered(v)).collect();
    let cb: Vec<Vec<f64>> = std::iter::once(&b.u).chain(&b.extremes).map(|v| centered(v)).collect();
    let scale_b: f64 = cb.iter().map(|v| dot(v, v)).sum::<f64>().sqrt();
    permutations(k).into_iter().any(|perm| {
        let order: Vec<usize> = std::iter::once(0).chain(perm.iter().map(|j| j + 1)).collect();
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &j) in order.iter().enumerate() {
            num += dot(&ca[i], &cb[j]);
            den += dot(&ca[i], &ca[i]);
        }
        if den <= 1e-300 {
            return scale_b <= 1e-300;
        }
        let alpha = num / den;
        if alpha <= 0.0 {
            return false;
        }
        let resid: f64 = order
            .iter()
            .enumerate()
            .map(|(i, &j)| cb[j].iter().zip(&ca[i]).map(|(y, x)| (y - alpha * x).powi(2)).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        resid <= RESIDUAL_TOLERANCE * scale_b.max(1.0)
    })
}
