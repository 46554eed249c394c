//! `tariff`: optimal two-part tariff for one consumer type and its demand curve.

use expost_core::tariff::{demand_curve, optimal_tariff, Consumer, TariffInstance, TasteShockDistribution, DEMAND_CURVE_HEADER};
use serde_json::json;

use super::{check_finite, json_value, parse_config, read_text, TariffArgs};
use crate::report::{render_json, Failure, Format, Outcome, Provenance, Table};

/// Parses `uniform01` or `power:<k>`.
pub fn parse_distribution(spec: &str) -> Result<TasteShockDistribution, Failure> {
    if spec == "uniform01" {
        return Ok(TasteShockDistribution::uniform01());
    }
    if let Some(k) = spec.strip_prefix("power:") {
        let k: f64 = k.parse().map_err(|_| Failure::Input(format!("bad power exponent in `{spec}`")))?;
        return Ok(TasteShockDistribution::power(k)?);
    }
    Err(Failure::Input(format!("unknown distribution `{spec}`; use uniform01 or power:<k>")))
}

pub fn parse_consumer(spec: &str) -> Result<Consumer, Failure> {
    match spec {
        "classical" => Ok(Consumer::Classical),
        "naif" => Ok(Consumer::Naif),
        "soph" => Ok(Consumer::Sophisticate),
        other => Err(Failure::Input(format!("unknown consumer `{other}`; use classical, naif or soph"))),
    }
}

pub(crate) fn tariff(args: &TariffArgs) -> Result<Outcome, Failure> {
    check_finite(args.c, "--c")?;
    check_finite(args.gamma, "--gamma")?;
    let consumer = parse_consumer(&args.consumer)?;
    let (dist, dist_value) = match &args.config {
        Some(path) => {
            let text = read_text(path)?;
            let d: TasteShockDistribution = parse_config(&text, "distribution")?;
            d.validate()?;
            (d, json_value(&text, "distribution")?)
        }
        None => (parse_distribution(&args.dist)?, json!(args.dist)),
    };
    if args.curve.is_some() && args.curve_points < 2 {
        return Err(Failure::Input("--curve-points must be at least 2".into()));
    }
    let effective = json!({
        "c": args.c,
        "gamma": args.gamma,
        "distribution": dist_value,
        "consumer": consumer.label(),
        "curve_points": args.curve_points,
    });
    let prov = Provenance::new("tariff", args.seed, &effective);
    let sol = optimal_tariff(consumer, args.c, args.gamma, &dist)?;

    let mut outcome = Outcome::default();
    let numbers = [sol.p_star, sol.l_star, sol.break_even, sol.lambda, sol.expected_profit];
    if numbers.iter().any(|x| !x.is_finite()) || sol.p_star < args.c * (1.0 - 1e-12) || sol.expected_profit < -1e-12 {
        outcome.violations.push(json!({ "kind": "tariff_solution", "solution": sol }));
    }
    let mut body = json!({
        "distribution": dist.label(),
        "solution": sol,
        "price_to_cost": sol.p_star / args.c,
    });
    if let Some(path) = &args.curve {
        let inst = TariffInstance::new(sol.p_star, sol.l_star, args.c, args.gamma, dist.clone())?;
        let n = args.curve_points;
        let states: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mut table = Table::new(&DEMAND_CURVE_HEADER);
        table.note("p", sol.p_star);
        table.note("l", sol.l_star);
        for r in demand_curve(&inst, &states)? {
            table.push(vec![r.s.to_string(), r.q_classical.to_string(), r.q_rationalizing.to_string(), r.theta_adopted.to_string()]);
        }
        outcome.emit(Some(path.clone()), table.render(&prov, Format::Csv));
        body["curve_rows"] = json!(n);
    }
    outcome.summary.push(format!(
        "tariff {}: p*={} L*={} p*/c={} profit={}",
        consumer.label(),
        sol.p_star,
        sol.l_star,
        sol.p_star / args.c,
        sol.expected_profit
    ));
    outcome.emitted.insert(0, crate::report::Emitted { path: args.out.clone(), text: render_json(&prov, body) });
    Ok(outcome)
}
