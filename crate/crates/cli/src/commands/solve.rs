//! `solve`: every second-period choice of a scenario.

use expost_core::core_model::{run_scenario, Scenario, ScenarioReport};
use serde_json::json;

use super::{json_value, read_text, SolveArgs};
use crate::builtin::builtin_scenario;
use crate::report::{Failure, Outcome, Provenance, Table};

/// Scenario text from a file path or a `builtin:<name>` reference.
pub(crate) fn scenario_text(reference: &str) -> Result<String, Failure> {
    match reference.strip_prefix("builtin:") {
        Some(name) => builtin_scenario(name)
            .map(str::to_string)
            .ok_or_else(|| Failure::Input(format!("unknown builtin scenario `{name}`"))),
        None => read_text(std::path::Path::new(reference)),
    }
}

pub(crate) fn solve(args: &SolveArgs) -> Result<Outcome, Failure> {
    let text = scenario_text(&args.scenario)?;
    let scenario = Scenario::from_json(&text)?;
    let report = run_scenario(&scenario, args.gamma)?;
    let effective = json!({
        "scenario": json_value(&text, "scenario")?,
        "gamma": args.gamma,
        "regret_tolerance": args.regret_tolerance,
    });
    let prov = Provenance::new("solve", args.seed, &effective);

    let mut table = Table::new(&ScenarioReport::COLUMNS);
    table.note("gamma", report.gamma);
    table.note("policy", &scenario.policy);
    table.note("first_choice", report.first_choice.join("|"));
    let values: Vec<String> = report.first_period.values.iter().map(|v| v.to_string()).collect();
    table.note("first_period_values", values.join("|"));
    for row in report.string_rows() {
        table.push(row);
    }

    let mut outcome = Outcome::default();
    for r in &report.rows {
        let bad = r.regret.iter().chain(&r.material_utility).any(|x| !x.is_finite())
            || r.regret.iter().any(|&x| x > args.regret_tolerance);
        if bad {
            outcome.violations.push(json!({
                "kind": "positive_regret",
                "scenario": r.scenario_id,
                "state": r.state,
                "a1": r.a1,
                "regret": r.regret,
            }));
        }
    }
    outcome.summary.push(format!(
        "solve {}: gamma={} first_choice={} rows={}",
        report.scenario_id,
        report.gamma,
        report.first_choice.join("|"),
        report.rows.len()
    ));
    outcome.emit(args.output.out.clone(), table.render(&prov, args.output.format));
    Ok(outcome)
}
