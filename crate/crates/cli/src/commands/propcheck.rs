//! `propcheck`: generated lattice instances through the hypothesis predicates and the
//! monotone-distortion checker.

use expost_core::lattice::{
    corrupted_instance, has_increasing_differences, is_supermodular_in_a2_theta, menu_monotone, random_instance,
    A1Shape, A2Shape, Construction, LatticeInstance, SizeParams, Theorem2Checker, Theorem2Verdict,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{ConstructionChoice, PropcheckArgs};
use crate::report::{Failure, Outcome, Provenance, Table};

/// Report columns.
pub const PROPCHECK_COLUMNS: [&str; 7] = ["seed", "sizes", "state", "a1_star", "a1_bar", "verdict", "witness"];

fn bad_sizes(spec: &str) -> Failure {
    Failure::Input(format!("cannot parse sizes `{spec}`; expected e.g. c3xg2x3xt4xs2 or c2xc5xt3xs1xk2"))
}

/// Parses the compact shape notation produced by [`SizeParams::describe`], with an
/// optional trailing `xk<terms>` (default 2).
pub fn parse_sizes(spec: &str) -> Result<SizeParams, Failure> {
    let tokens: Vec<&str> = spec.split('x').collect();
    let num = |t: &str| t.parse::<usize>().map_err(|_| bad_sizes(spec));
    let mut i = 0;
    let mut next = || {
        let t = tokens.get(i).copied().ok_or_else(|| bad_sizes(spec));
        i += 1;
        t
    };
    let a1 = match next()? {
        "g2" => {
            if next()? != "2" {
                return Err(bad_sizes(spec));
            }
            A1Shape::Grid2x2
        }
        t if t.starts_with('c') => A1Shape::Chain(num(&t[1..])?),
        _ => return Err(bad_sizes(spec)),
    };
    let a2 = match next()? {
        t if t.starts_with('g') => A2Shape::Grid(num(&t[1..])?, num(next()?)?),
        t if t.starts_with('c') => A2Shape::Chain(num(&t[1..])?),
        _ => return Err(bad_sizes(spec)),
    };
    let theta_len = num(next()?.strip_prefix('t').ok_or_else(|| bad_sizes(spec))?)?;
    let states = num(next()?.strip_prefix('s').ok_or_else(|| bad_sizes(spec))?)?;
    let terms = match next() {
        Ok(t) => num(t.strip_prefix('k').ok_or_else(|| bad_sizes(spec))?)?,
        Err(_) => 2,
    };
    if next().is_ok() {
        return Err(bad_sizes(spec));
    }
    let sizes = SizeParams { a1, a2, theta_len, states, terms };
    let positive = match (a1, a2) {
        (A1Shape::Chain(n), _) if n == 0 => false,
        (_, A2Shape::Chain(n)) if n == 0 => false,
        (_, A2Shape::Grid(r, c)) if r == 0 || c == 0 => false,
        _ => theta_len > 0 && states > 0 && terms > 0,
    };
    if !positive {
        return Err(Failure::Input(format!("sizes `{spec}` must be positive")));
    }
    Ok(sizes)
}

struct Checked {
    rows: Vec<Vec<String>>,
    violations: Vec<Value>,
    counts: [usize; 4],
}

const HOLDS: usize = 0;
const INAPPLICABLE: usize = 1;
const VIOLATED: usize = 2;
const HYPOTHESIS: usize = 3;

/// Checks one instance: hypotheses first, then every state and first action.
fn check_instance(label: &str, sizes: &str, inst: &LatticeInstance) -> Result<Checked, Failure> {
    let mut out = Checked { rows: Vec::new(), violations: Vec::new(), counts: [0; 4] };
    let hypothesis = match (has_increasing_differences(inst), is_supermodular_in_a2_theta(inst)) {
        (Err(v), _) => Some(format!("increasing differences: {v}")),
        (_, Err(v)) => Some(format!("supermodularity in (a2, theta): {v}")),
        _ if !menu_monotone(inst) => Some("menus are not monotone in the strong set order".to_string()),
        _ => None,
    };
    if let Some(witness) = hypothesis {
        out.counts[HYPOTHESIS] += 1;
        out.rows.push(vec![
            label.into(),
            sizes.into(),
            String::new(),
            String::new(),
            String::new(),
            "hypothesis_violation".into(),
            witness.clone(),
        ]);
        out.violations.push(json!({ "kind": "hypothesis_violation", "seed": label, "sizes": sizes, "witness": witness }));
        return Ok(out);
    }
    let checker = Theorem2Checker::new(inst)?;
    let (n1, _, _, ns) = inst.sizes();
    for s in 0..ns {
        for a1 in 0..n1 {
            let verdict = checker.check(s, a1);
            let (a1_star, witness) = match &verdict {
                Theorem2Verdict::Holds(w) => (w[0].a1_star.to_string(), w[0].to_string()),
                Theorem2Verdict::Violated(w) => (w.a1_star.to_string(), w.to_string()),
                Theorem2Verdict::Inapplicable(m) => (String::new(), m.clone()),
            };
            let slot = match &verdict {
                Theorem2Verdict::Holds(_) => HOLDS,
                Theorem2Verdict::Inapplicable(_) => INAPPLICABLE,
                Theorem2Verdict::Violated(_) => VIOLATED,
            };
            out.counts[slot] += 1;
            if slot == VIOLATED {
                out.violations.push(json!({
                    "kind": "order_violation", "seed": label, "sizes": sizes, "state": s, "a1_bar": a1, "witness": witness,
                }));
            }
            out.rows.push(vec![
                label.into(),
                sizes.into(),
                s.to_string(),
                a1_star,
                a1.to_string(),
                verdict.label().into(),
                witness,
            ]);
        }
    }
    Ok(out)
}

pub(crate) fn propcheck(args: &PropcheckArgs) -> Result<Outcome, Failure> {
    let fixed = if args.sizes == "sampled" { None } else { Some(parse_sizes(&args.sizes)?) };
    let end = args.seed.checked_add(args.seeds).ok_or_else(|| Failure::Input("seed range overflows".into()))?;
    let effective = json!({
        "seeds": args.seeds,
        "sizes": args.sizes,
        "construction": args.construction,
        "inject_corrupt": args.inject_corrupt,
    });
    let prov = Provenance::new("propcheck", args.seed, &effective);

    let results: Vec<Result<Checked, Failure>> = (args.seed..end)
        .into_par_iter()
        .map(|seed| {
            let sizes = fixed.unwrap_or_else(|| SizeParams::sample(seed));
            let construction = match args.construction {
                ConstructionChoice::Products => Construction::SumOfMonotoneProducts,
                ConstructionChoice::Separable => Construction::Separable,
                ConstructionChoice::Mixed if seed % 3 == 0 => Construction::Separable,
                ConstructionChoice::Mixed => Construction::SumOfMonotoneProducts,
            };
            let inst = random_instance(seed, &sizes, construction)?;
            check_instance(&seed.to_string(), &sizes.describe(), &inst)
        })
        .collect();
    let mut checked = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    if args.inject_corrupt {
        let inst = corrupted_instance(args.seed)?;
        let (n1, n2, nt, ns) = inst.sizes();
        let sizes = format!("corrupt:{n1}x{n2}xt{nt}xs{ns}");
        checked.push(check_instance(&format!("corrupt-{}", args.seed), &sizes, &inst)?);
    }

    let mut table = Table::new(&PROPCHECK_COLUMNS);
    let mut counts = [0usize; 4];
    let mut outcome = Outcome::default();
    for c in checked {
        for (t, n) in counts.iter_mut().zip(c.counts) {
            *t += n;
        }
        for r in c.rows {
            table.push(r);
        }
        outcome.violations.extend(c.violations);
    }
    let instances = args.seeds + u64::from(args.inject_corrupt);
    table.note("instances", instances);
    table.note("holds", counts[HOLDS]);
    table.note("inapplicable", counts[INAPPLICABLE]);
    table.note("violated", counts[VIOLATED]);
    table.note("hypothesis_violations", counts[HYPOTHESIS]);
    outcome.summary.push(format!(
        "propcheck: instances={instances} holds={} inapplicable={} violated={} hypothesis_violations={}",
        counts[HOLDS], counts[INAPPLICABLE], counts[VIOLATED], counts[HYPOTHESIS]
    ));
    outcome.emit(args.output.out.clone(), table.render(&prov, args.output.format));
    Ok(outcome)
}
