//! `identify`: recovery of cone normals and the regret weight from a simulated oracle,
//! scored against the representation that generated it.

use expost_core::identification::{
    affine_alignment, ground_truth_inner, id_small_1, inner_cone_membership, random_regular_representation,
    recover_representation, verify_affine_equivalence, ChoiceOracle, ConeConfig, GammaConfig, Lottery,
    MembershipMode, OutcomeSpace, ProbeConfig, RegularRepresentation, Representation,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use super::{json_value, parse_config, read_text, IdentifyArgs};
use crate::report::{render_json, Failure, Outcome, Provenance};

/// Representation file layout.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RepFile {
    z1: Vec<String>,
    z2: Vec<Vec<String>>,
    gamma: f64,
    u: Vec<f64>,
    extremes: Vec<Vec<f64>>,
}

fn load(args: &IdentifyArgs) -> Result<(RegularRepresentation, Value), Failure> {
    let input = |e: expost_core::Error| Failure::Input(format!("representation: {e}"));
    match (&args.rep, args.random) {
        (Some(r), None) if r == "id-small-1" => Ok((id_small_1(), json!({ "builtin": "id-small-1" }))),
        (Some(path), None) => {
            let text = read_text(std::path::Path::new(path))?;
            let file: RepFile = parse_config(&text, "representation")?;
            let space = OutcomeSpace::new(file.z1, file.z2).map_err(input)?;
            let rep = Representation::new(space, file.gamma, file.u, file.extremes).map_err(input)?;
            Ok((RegularRepresentation::new(rep).map_err(input)?, json_value(&text, "representation")?))
        }
        (None, Some(seed)) => {
            let k = 2 + (seed % 3) as usize;
            let rep = random_regular_representation(seed, k)?;
            Ok((rep, json!({ "random": seed, "extremes": k })))
        }
        _ => Err(Failure::Input("give exactly one of --rep and --random".into())),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = dot(v, v).sqrt();
    v.iter().map(|x| x / n).collect()
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    dot(&unit(a), &unit(b)).clamp(-1.0, 1.0).acos()
}

/// Probe-mode against ground-truth inner-cone classification on random directions.
struct Agreement {
    agree: usize,
    members: usize,
    members_confirmed: usize,
}

fn classify(rep: &Representation, oracle: &ChoiceOracle, a: &Lottery, samples: usize, seed: u64) -> Result<Agreement, Failure> {
    let basis = rep.space().tangent_basis();
    let n = rep.space().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Agreement { agree: 0, members: 0, members_confirmed: 0 };
    for i in 0..samples {
        let mut d = vec![0.0; n];
        for b in &basis {
            let c: f64 = rng.random_range(-1.0..1.0);
            d.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
        }
        let len = rng.random_range(0.01..0.9) * a.min_entry();
        let d = unit(&d);
        let p = Lottery::new(a.as_slice().iter().zip(&d).map(|(x, y)| x + len * y).collect())?;
        let truth = ground_truth_inner(rep, a, &p);
        let config = ProbeConfig { seed: seed.wrapping_mul(1_000_003).wrapping_add(i as u64), ..ProbeConfig::default() };
        let probe = inner_cone_membership(oracle, a, &p, MembershipMode::Probe(config))?;
        out.agree += usize::from(truth == probe);
        if truth {
            out.members += 1;
            out.members_confirmed += usize::from(probe);
        }
    }
    Ok(out)
}

pub(crate) fn identify(args: &IdentifyArgs) -> Result<Outcome, Failure> {
    if args.samples == 0 {
        return Err(Failure::Input("--samples must be positive".into()));
    }
    let (regular, source) = load(args)?;
    let rep = regular.representation().clone();
    let effective = json!({
        "representation": source,
        "samples": args.samples,
        "min_agreement": args.min_agreement,
        "normal_tolerance": args.normal_tolerance,
        "gamma_tolerance": args.gamma_tolerance,
    });
    let prov = Provenance::new("identify", args.seed, &effective);
    let oracle = ChoiceOracle::new(rep.clone());
    let a = Lottery::uniform(rep.space().len());

    let agreement = classify(&rep, &oracle, &a, args.samples, args.seed)?;
    let agreement_rate = agreement.agree as f64 / args.samples as f64;
    let soundness =
        if agreement.members == 0 { 1.0 } else { agreement.members_confirmed as f64 / agreement.members as f64 };

    let cone = ConeConfig { seed: args.seed, ..ConeConfig::default() };
    let gamma = GammaConfig { seed: args.seed, ..GammaConfig::default() };
    let rec = recover_representation(&oracle, &a, &cone, &gamma)?;
    let truth: Vec<Vec<f64>> = rep.extremes().iter().map(|e| unit(&rep.space().project_tangent(e))).collect();
    let normal_error = truth
        .iter()
        .map(|t| rec.cone.normals.iter().map(|n| angle(t, n)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let gamma_error = (rec.gamma.gamma - rep.gamma()).abs();
    let alignment = affine_alignment(rep.extremes(), rec.representation.extremes());

    // Affine-equivalence sanity: a positive affine copy matches, a bent copy does not.
    let k = rep.extremes().len();
    let betas: Vec<f64> = (0..k).map(|i| 0.5 - i as f64).collect();
    let copy = rep.transformed(2.5, 0.7, &betas)?;
    let mut bent_ext = rep.extremes().to_vec();
    bent_ext[0][1] += 0.3;
    let bent = Representation::new(rep.space().clone(), rep.gamma(), rep.u().to_vec(), bent_ext)?;
    let affine_copy = verify_affine_equivalence(&rep, &copy);
    let affine_bent = verify_affine_equivalence(&rep, &bent);

    let body = json!({
        "truth": {
            "gamma": rep.gamma(),
            "extremes": rep.extremes(),
            "u": rep.u(),
        },
        "agreement": {
            "samples": args.samples,
            "agreement_rate": agreement_rate,
            "ground_truth_members": agreement.members,
            "soundness_rate": soundness,
        },
        "recovered": {
            "normals": rec.cone.normals,
            "gamma": rec.gamma.gamma,
            "gamma_closed_form": rec.gamma.closed_form,
            "battery_disagreements": rec.gamma.disagreements,
            "material_direction": rec.material,
        },
        "errors": {
            "max_normal_angle": normal_error,
            "gamma_error": gamma_error,
            "alignment_max_angle": alignment.as_ref().map(|f| f.max_angle),
            "alignment_relative_residual": alignment.as_ref().map(|f| f.relative_residual),
        },
        "affine_checks": { "transformed_copy": affine_copy, "perturbed_copy": affine_bent },
    });

    let mut outcome = Outcome::default();
    let mut fail = |kind: &str, detail: Value| outcome.violations.push(json!({ "kind": kind, "detail": detail }));
    if agreement_rate < args.min_agreement {
        fail("agreement", json!({ "rate": agreement_rate, "min": args.min_agreement }));
    }
    if soundness < 1.0 {
        fail("soundness", json!({ "rate": soundness }));
    }
    if normal_error > args.normal_tolerance || rec.cone.normals.len() != k {
        fail("normals", json!({ "max_angle": normal_error, "recovered": rec.cone.normals.len(), "true": k }));
    }
    if gamma_error > args.gamma_tolerance {
        fail("gamma", json!({ "estimate": rec.gamma.gamma, "truth": rep.gamma() }));
    }
    if !affine_copy || affine_bent {
        fail("affine_equivalence", json!({ "transformed_copy": affine_copy, "perturbed_copy": affine_bent }));
    }
    outcome.summary.push(format!(
        "identify: agreement={agreement_rate} soundness={soundness} max_normal_angle={normal_error:.3e} gamma={} (truth {})",
        rec.gamma.gamma,
        rep.gamma()
    ));
    outcome.emit(args.out.clone(), render_json(&prov, body));
    Ok(outcome)
}
