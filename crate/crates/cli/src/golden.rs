//! Golden regression table: the reference examples with their expected values.

use expost_core::applications::{elicitation_report, ElicitationConfig, MLRPFamily};
use expost_core::core_model::{second_period_choice, Scenario};
use expost_core::tariff::{optimal_tariff, Consumer, TasteShockDistribution};
use serde_json::json;

use crate::builtin::builtin_scenario;
use crate::commands::GoldenArgs;
use crate::report::{Failure, Outcome, Provenance, Table};

/// One expected-versus-actual comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenRow {
    pub case: String,
    pub expected: String,
    pub actual: String,
    pub tolerance: String,
    pub pass: bool,
}

fn set_row(case: String, expected: &[&str], actual: expost_core::Result<Vec<String>>) -> GoldenRow {
    let expected_text = expected.join("|");
    match actual {
        Ok(v) => {
            let actual = v.join("|");
            GoldenRow { pass: actual == expected_text, case, expected: expected_text, actual, tolerance: "exact".into() }
        }
        Err(e) => GoldenRow { case, expected: expected_text, actual: format!("error: {e}"), tolerance: "exact".into(), pass: false },
    }
}

fn number_row(case: String, expected: f64, actual: expost_core::Result<f64>, tol: f64) -> GoldenRow {
    match actual {
        Ok(v) => GoldenRow {
            case,
            expected: expected.to_string(),
            actual: v.to_string(),
            tolerance: format!("{tol:e}"),
            pass: (v - expected).abs() <= tol,
        },
        Err(e) => GoldenRow { case, expected: expected.to_string(), actual: format!("error: {e}"), tolerance: format!("{tol:e}"), pass: false },
    }
}

/// Second-period choice identifiers for a bundled scenario.
fn choice(name: &str, gamma: f64, a1: &str, state: &str) -> expost_core::Result<Vec<String>> {
    let text = builtin_scenario(name).expect("bundled scenario");
    let c = Scenario::from_json(text)?.compile(Some(gamma))?;
    let r = second_period_choice(&c.problem, &c.family, gamma, a1, state)?;
    Ok(r.chosen_ids().into_iter().map(String::from).collect())
}

/// Smallest grid step `i / 100` at which the ticket buyer attends in the snowstorm,
/// provided the choice switches exactly once.
fn ticket_crossing() -> expost_core::Result<f64> {
    let mut first = None;
    for i in 0..100 {
        let g = i as f64 / 100.0;
        let attend = choice("example1_ticket", g, "buy", "snowstorm")? == ["attend"];
        match (attend, first) {
            (true, None) => first = Some(g),
            (false, Some(_)) => return Ok(f64::NAN),
            _ => {}
        }
    }
    Ok(first.unwrap_or(f64::NAN))
}

fn price_ratio(consumer: Consumer, gamma: f64, dist: &TasteShockDistribution) -> expost_core::Result<f64> {
    let c = 1.0;
    Ok(optimal_tariff(consumer, c, gamma, dist)?.p_star / c)
}

fn bernoulli_report(gamma: f64) -> expost_core::Result<f64> {
    let family = MLRPFamily::default_bernoulli();
    Ok(elicitation_report(&family, gamma, 0.5, 0, &ElicitationConfig::default())?.a2)
}

/// Runs every golden case.
pub fn golden_suite() -> Vec<GoldenRow> {
    let mut rows = Vec::new();
    for g in [0.0, 0.1, 0.16] {
        rows.push(set_row(format!("ticket gamma={g} buy/snowstorm"), &["stay_home"], choice("example1_ticket", g, "buy", "snowstorm")));
    }
    for g in [0.17, 0.2, 0.5] {
        rows.push(set_row(format!("ticket gamma={g} buy/snowstorm"), &["attend"], choice("example1_ticket", g, "buy", "snowstorm")));
    }
    rows.push(set_row(
        "ticket gamma=1/6 buy/snowstorm tie".into(),
        &["attend", "stay_home"],
        choice("example1_ticket", 1.0 / 6.0, "buy", "snowstorm"),
    ));
    // The first attending grid point lies within one step above 1/6.
    rows.push(number_row("ticket threshold scan crossing (step 0.01)".into(), 1.0 / 6.0, ticket_crossing(), 0.01));
    for g in [0.0, 0.25, 0.5, 0.75] {
        rows.push(set_row(
            format!("singleton first menu gamma={g}"),
            &["stay_home"],
            choice("example2_singleton", g, "free_ticket_and_loss", "snowstorm"),
        ));
        rows.push(set_row(
            format!("money-only rationales gamma={g} snowstorm"),
            &["let_expire"],
            choice("example3_money", g, "buy_option", "snowstorm"),
        ));
        rows.push(set_row(
            format!("money-only rationales gamma={g} good_weather"),
            &["exercise"],
            choice("example3_money", g, "buy_option", "good_weather"),
        ));
    }
    for g in [0.0, 0.3, 0.49] {
        rows.push(set_row(format!("discount gamma={g} decline/sunny"), &["accept_offer"], choice("example4_discount", g, "decline_discount", "sunny")));
    }
    for g in [0.51, 0.6, 0.9] {
        rows.push(set_row(format!("discount gamma={g} decline/sunny"), &["stay_home"], choice("example4_discount", g, "decline_discount", "sunny")));
    }
    rows.push(set_row("two-by-two gamma=0 high/s1".into(), &["low"], choice("two_by_two", 0.0, "high", "s1")));
    rows.push(set_row("two-by-two gamma=0.5 high/s1".into(), &["low", "high"], choice("two_by_two", 0.5, "high", "s1")));

    let uniform = TasteShockDistribution::uniform01();
    let power2 = TasteShockDistribution::Power { k: 2.0 };
    for (name, dist) in [("uniform", &uniform), ("power2", &power2)] {
        for consumer in [Consumer::Classical, Consumer::Naif, Consumer::Sophisticate] {
            rows.push(number_row(
                format!("tariff {name} {} gamma=0 p/c", consumer.label()),
                1.0,
                price_ratio(consumer, 0.0, dist),
                1e-9,
            ));
        }
    }
    rows.push(number_row("tariff uniform naif gamma=0.5 p/c".into(), 1.0673, price_ratio(Consumer::Naif, 0.5, &uniform), 1e-3));
    rows.push(number_row(
        "tariff uniform soph gamma=0.5 p/c".into(),
        1.0859,
        price_ratio(Consumer::Sophisticate, 0.5, &uniform),
        1e-3,
    ));
    rows.push(number_row("elicitation bernoulli gamma=0 second report".into(), 0.3, bernoulli_report(0.0), 1e-12));
    rows.push(number_row("elicitation bernoulli gamma=0.5 a1=0.5 second report".into(), 0.3667, bernoulli_report(0.5), 1e-2));
    rows
}

pub(crate) fn golden(args: &GoldenArgs) -> Result<Outcome, Failure> {
    let prov = Provenance::new("golden", args.seed, &json!({ "suite": "golden" }));
    let rows = golden_suite();
    let mut table = Table::new(&["case", "expected", "actual", "tolerance", "status"]);
    let mut outcome = Outcome::default();
    for r in &rows {
        table.push(vec![
            r.case.clone(),
            r.expected.clone(),
            r.actual.clone(),
            r.tolerance.clone(),
            if r.pass { "pass" } else { "FAIL" }.into(),
        ]);
        if !r.pass {
            outcome.violations.push(json!({ "kind": "golden_mismatch", "case": r.case, "expected": r.expected, "actual": r.actual }));
        }
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    table.note("passed", format!("{passed}/{}", rows.len()));
    outcome.summary.push(format!("golden: {passed}/{} cases pass", rows.len()));
    outcome.emit(args.output.out.clone(), table.render(&prov, args.output.format));
    Ok(outcome)
}
