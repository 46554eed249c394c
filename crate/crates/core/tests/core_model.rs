use expost_core::core_model::{
    ex_post_value, ex_post_value_at, first_period_choice, run_scenario, second_period_choice,
    second_period_choice_at, total_utility, AgentConfig, DecisionProblem, FirstPeriodPolicy, RationaleFamily,
    Scenario, SelectionRule, UtilityTable,
};
use expost_core::tariff::{break_even_state, rationalizing_demand};
use expost_core::Error;
use proptest::prelude::*;

const EXAMPLE1: &str = include_str!("../../../scenarios/example1_ticket.json");
const EXAMPLE2: &str = include_str!("../../../scenarios/example2_singleton.json");
const EXAMPLE3: &str = include_str!("../../../scenarios/example3_money.json");
const EXAMPLE4: &str = include_str!("../../../scenarios/example4_discount.json");
const TWO_BY_TWO: &str = include_str!("../../../scenarios/two_by_two.json");

fn compiled(text: &str, gamma: f64) -> (DecisionProblem, RationaleFamily) {
    let c = Scenario::from_json(text).unwrap().compile(Some(gamma)).unwrap();
    (c.problem, c.family)
}

fn choice(text: &str, gamma: f64, a1: &str, state: &str) -> Vec<String> {
    let (problem, family) = compiled(text, gamma);
    let result = second_period_choice(&problem, &family, gamma, a1, state).unwrap();
    result.chosen_ids().into_iter().map(String::from).collect()
}

fn theta_index(family: &RationaleFamily, theta: f64) -> usize {
    family.theta_grid().unwrap().iter().position(|&t| t == theta).unwrap()
}

#[test]
fn example1_ex_post_value_and_totals() {
    let (problem, family) = compiled(EXAMPLE1, 0.2);
    let v300 = family.member(theta_index(&family, 300.0));
    assert_eq!(ex_post_value(&problem, v300, "snowstorm").unwrap(), 0.0);
    assert!(ex_post_value(&problem, v300, "hail").is_err());
    let buy = problem.first_index("buy").unwrap();
    let attend = problem.second_index(buy, "attend").unwrap();
    let stay = problem.second_index(buy, "stay_home").unwrap();
    let snow = problem.state_index("snowstorm").unwrap();
    let t300 = theta_index(&family, 300.0);
    let t180 = theta_index(&family, 180.0);
    assert_eq!(total_utility(&problem, &family, 0.2, buy, attend, t300, snow).unwrap(), -96.0);
    assert_eq!(total_utility(&problem, &family, 0.2, buy, stay, t180, snow).unwrap(), -100.0);
    // Staying home is worth at most -100 under every rationale.
    for k in 0..family.len() {
        assert!(total_utility(&problem, &family, 0.2, buy, stay, k, snow).unwrap() <= -100.0);
    }
    let decline = problem.first_index("decline").unwrap();
    assert!(matches!(
        total_utility(&problem, &family, 0.2, decline, 1, t180, snow),
        Err(Error::MenuViolation { .. })
    ));
}

#[test]
fn example1_threshold_at_one_sixth() {
    for gamma in [0.17, 0.2, 0.5] {
        assert_eq!(choice(EXAMPLE1, gamma, "buy", "snowstorm"), ["attend"], "gamma {gamma}");
    }
    for gamma in [0.0, 0.1, 0.16] {
        assert_eq!(choice(EXAMPLE1, gamma, "buy", "snowstorm"), ["stay_home"], "gamma {gamma}");
    }
    // Exactly at the threshold both actions attain the maximum.
    assert_eq!(choice(EXAMPLE1, 1.0 / 6.0, "buy", "snowstorm"), ["attend", "stay_home"]);
    assert_eq!(choice(EXAMPLE1, 0.5, "buy", "good_weather"), ["attend"]);
}

#[test]
fn example1_attend_witnesses_span_300_to_400() {
    let (problem, family) = compiled(EXAMPLE1, 0.2);
    let result = second_period_choice(&problem, &family, 0.2, "buy", "snowstorm").unwrap();
    let labels: Vec<f64> = result.chosen[0].witnesses.iter().map(|&k| family.label(k)).collect();
    assert_eq!(labels.len(), 101);
    assert_eq!(labels[0], 300.0);
    assert_eq!(labels[100], 400.0);
    assert!((result.total_utility + 96.0).abs() < 1e-12);
}

#[test]
fn free_ticket_has_no_sunk_cost_effect() {
    let text = EXAMPLE1.replace("\"payment\": 100.0", "\"payment\": 0.0");
    for gamma in [0.2, 0.5, 0.9] {
        assert_eq!(choice(&text, gamma, "buy", "snowstorm"), ["stay_home"]);
    }
}

#[test]
fn examples_2_and_3_collapse_to_classical() {
    for gamma in [0.0, 0.25, 0.5, 0.75] {
        assert_eq!(choice(EXAMPLE2, gamma, "free_ticket_and_loss", "snowstorm"), ["stay_home"]);
        assert_eq!(choice(EXAMPLE3, gamma, "buy_option", "snowstorm"), ["let_expire"]);
        assert_eq!(choice(EXAMPLE3, gamma, "buy_option", "good_weather"), ["exercise"]);
    }
}

#[test]
fn example4_threshold_at_one_half() {
    for gamma in [0.51, 0.6, 0.9] {
        assert_eq!(choice(EXAMPLE4, gamma, "decline_discount", "sunny"), ["stay_home"], "gamma {gamma}");
    }
    for gamma in [0.0, 0.3, 0.49] {
        assert_eq!(choice(EXAMPLE4, gamma, "decline_discount", "sunny"), ["accept_offer"], "gamma {gamma}");
    }
    let (problem, family) = compiled(EXAMPLE4, 0.6);
    let result = second_period_choice(&problem, &family, 0.6, "decline_discount", "sunny").unwrap();
    assert_eq!(family.label(result.chosen[0].witnesses[0]), 0.0);
    // The discount looked bad against the believed snowstorm.
    let config = AgentConfig::new(0.6, FirstPeriodPolicy::Naif, SelectionRule::Pessimistic).unwrap();
    let report = first_period_choice(&problem, &family, &config);
    assert_eq!(report.chosen, vec![problem.first_index("decline_discount").unwrap()]);
}

#[test]
fn naif_with_certain_snowstorm_declines() {
    let text = EXAMPLE1.replace("\"prior\": [0.5, 0.5]", "\"prior\": [1.0, 0.0]");
    let (problem, family) = compiled(&text, 0.2);
    let config = AgentConfig::new(0.2, FirstPeriodPolicy::Naif, SelectionRule::Pessimistic).unwrap();
    let report = first_period_choice(&problem, &family, &config);
    assert_eq!(report.chosen, vec![1]);
    assert_eq!(report.values, vec![-100.0, 0.0]);
}

#[test]
fn two_by_two_matches_enumeration() {
    let (problem, family) = compiled(TWO_BY_TWO, 0.5);
    // w = theta a1 a2 - a1 - 1.5 a2 over a1, a2 in {0, 1}.
    let w = |a1: f64, a2: f64, t: f64| t * a1 * a2 - a1 - 1.5 * a2;
    for (k, t) in [1.0, 2.0].into_iter().enumerate() {
        let brute = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
            .iter()
            .map(|&(x, y)| w(x, y, t))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(ex_post_value_at(&problem, family.member(k), 0), brute);
    }
    let result = second_period_choice(&problem, &family, 0.5, "high", "s1").unwrap();
    assert_eq!(result.chosen_ids(), ["low", "high"]);
    assert_eq!(result.chosen[1].witnesses, vec![1]);
    assert_eq!(result.total_utility, -1.0);
    let classical = second_period_choice(&problem, &family, 0.0, "high", "s1").unwrap();
    assert_eq!(classical.chosen_ids(), ["low"]);
}

#[test]
fn scenario_report_rows() {
    let scenario = Scenario::from_json(EXAMPLE1).unwrap();
    let report = run_scenario(&scenario, None).unwrap();
    assert_eq!(report.rows.len(), 4);
    let row = report.rows.iter().find(|r| r.state == "snowstorm" && r.a1 == "buy").unwrap();
    assert_eq!(row.a2_set, ["attend"]);
    assert_eq!((row.witness_theta_min, row.witness_theta_max), (300.0, 400.0));
    assert_eq!(report.first_choice, ["decline"]);
    assert!(Scenario::from_json("{\"id\": 1}").is_err());
    let unknown = EXAMPLE1.replacen("\"gamma\": 0.2", "\"gamma\": 0.2, \"extra\": true", 1);
    assert!(matches!(Scenario::from_json(&unknown), Err(Error::Parse(_))));
    let bad_gamma = Scenario::from_json(&EXAMPLE1.replace("\"gamma\": 0.2", "\"gamma\": 1.0")).unwrap();
    assert!(run_scenario(&bad_gamma, None).is_err());
}

#[test]
fn problem_validation() {
    let ids = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    assert!(DecisionProblem::new(ids(&["s"]), vec![0.9], ids(&["a"]), vec![ids(&["b"])]).is_err());
    assert!(DecisionProblem::new(ids(&["s"]), vec![1.0], ids(&["a", "a"]), vec![ids(&["b"]), ids(&["b"])]).is_err());
    assert!(DecisionProblem::new(ids(&["s"]), vec![1.0], ids(&["a"]), vec![ids(&[])]).is_err());
    assert!(DecisionProblem::new(ids(&["s"]), vec![1.0], ids(&["a"]), vec![ids(&["b", "b"])]).is_err());
    let p = DecisionProblem::new(ids(&["s"]), vec![1.0], ids(&["a"]), vec![ids(&["b"])]).unwrap();
    assert!(UtilityTable::new(&p, vec![vec![vec![f64::NAN]]]).is_err());
    assert!(AgentConfig::new(1.0, FirstPeriodPolicy::Naif, SelectionRule::Pessimistic).is_err());
    assert!(AgentConfig::new(-0.1, FirstPeriodPolicy::Naif, SelectionRule::Pessimistic).is_err());
    // Singleton menus: the ex post value is the only entry.
    let t = UtilityTable::new(&p, vec![vec![vec![-3.5]]]).unwrap();
    assert_eq!(ex_post_value_at(&p, &t, 0), -3.5);
}

/// The tariff consumer on 100 equally spaced states, with menus and rationales that contain
/// every continuous optimizer, so the discrete solver must reproduce the closed-form demand.
#[test]
fn sophisticate_participation_matches_tariff_module() {
    let n = 100;
    let states: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let mut outcomes = Vec::new();
    for &(p, l, gamma) in &[(1.2, 0.1, 0.5), (1.1, 0.25, 0.3), (1.5, 0.05, 0.8), (1.0, 0.32, 0.5)] {
        let k = break_even_state(p, l);
        let mut quantities: Vec<f64> = states.iter().map(|s| s * s / (p * p)).collect();
        for &s in &states {
            quantities.push(rationalizing_demand(s, p, l, gamma).unwrap());
        }
        for m in -(n as i64)..=(n as i64) {
            let level = k + m as f64 / n as f64;
            if level >= 0.0 {
                quantities.push(level * level / (p * p));
            }
        }
        quantities.sort_by(f64::total_cmp);
        quantities.dedup();
        let mut theta: Vec<f64> = vec![0.0];
        theta.extend(states.iter().filter(|&&s| s < k).map(|s| k - s));
        theta.sort_by(f64::total_cmp);
        theta.dedup();
        let star = theta.iter().position(|&t| t == 0.0).unwrap();
        let problem = DecisionProblem::new(
            (0..n).map(|i| format!("s{i}")).collect(),
            {
                let mut prior = vec![1.0 / n as f64; n];
                prior[n - 1] = 1.0 - (n - 1) as f64 / n as f64;
                prior
            },
            vec!["accept".into(), "reject".into()],
            vec![(0..quantities.len()).map(|i| format!("q{i}")).collect(), vec!["none".into()]],
        )
        .unwrap();
        let family = RationaleFamily::parametric(&problem, theta.clone(), star, |a1, a2, t, s| {
            if a1 == 1 {
                0.0
            } else {
                let q = quantities[a2];
                (states[s] + t) * 2.0 * q.sqrt() - p * q - l
            }
        })
        .unwrap();
        let config = AgentConfig::new(gamma, FirstPeriodPolicy::Sophisticate, SelectionRule::Pessimistic).unwrap();
        let report = first_period_choice(&problem, &family, &config);
        let mut discrete = 0.0;
        for (i, &s) in states.iter().enumerate() {
            let q = rationalizing_demand(s, p, l, gamma).unwrap();
            let chosen = second_period_choice_at(&problem, &family, gamma, 0, i);
            let got = quantities[chosen.chosen[0].index];
            assert!((got - q).abs() < 1e-12, "p={p} l={l} s={s}: {got} vs {q}");
            discrete += problem.prior()[i] * (2.0 * s * q.sqrt() - p * q - l);
        }
        assert!((report.values[0] - discrete).abs() < 1e-6, "{} vs {discrete}", report.values[0]);
        let accepts = report.chosen.contains(&0);
        assert_eq!(accepts, discrete >= 0.0, "p={p} l={l}");
        outcomes.push(accepts);
    }
    assert!(outcomes.contains(&true) && outcomes.contains(&false), "{outcomes:?}");
}

fn random_problem(seed: &[u8]) -> (DecisionProblem, RationaleFamily) {
    // Small integer payoffs so that ties are genuine.
    let mut it = seed.iter().cycle();
    let mut next = |m: u8| (*it.next().unwrap() % m) as usize;
    let n1 = 1 + next(3);
    let ns = 1 + next(2);
    let menus: Vec<Vec<String>> =
        (0..n1).map(|a| (0..1 + next(3)).map(|j| format!("b{a}{j}")).collect()).collect();
    let problem = DecisionProblem::new(
        (0..ns).map(|s| format!("s{s}")).collect(),
        if ns == 1 { vec![1.0] } else { vec![0.5, 0.5] },
        (0..n1).map(|a| format!("a{a}")).collect(),
        menus,
    )
    .unwrap();
    let members: Vec<UtilityTable> = (0..1 + next(3))
        .map(|_| UtilityTable::from_fn(&problem, |_, _, _| next(7) as f64 - 3.0).unwrap())
        .collect();
    let family = RationaleFamily::tabular(members, 0).unwrap();
    (problem, family)
}

/// Rationalizing choice by enumerating `(a2, v)` pairs and every plan.
fn enumeration_oracle(p: &DecisionProblem, f: &RationaleFamily, gamma: f64, a1: usize, s: usize) -> Vec<usize> {
    let best_plan = |k: usize| {
        let mut m = f64::NEG_INFINITY;
        for x in 0..p.num_first() {
            for y in 0..p.second_menu(x).len() {
                m = m.max(f.member(k).get(x, y, s));
            }
        }
        m
    };
    let totals: Vec<f64> = (0..p.second_menu(a1).len())
        .map(|y| {
            (0..f.len())
                .map(|k| (1.0 - gamma) * f.material().get(a1, y, s) + gamma * (f.member(k).get(a1, y, s) - best_plan(k)))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let top = totals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..totals.len()).filter(|&y| totals[y] >= top - 1e-10).collect()
}

fn material_argmax(p: &DecisionProblem, f: &RationaleFamily, a1: usize, s: usize) -> Vec<usize> {
    let values: Vec<f64> = (0..p.second_menu(a1).len()).map(|y| f.material().get(a1, y, s)).collect();
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len()).filter(|&y| values[y] >= top - 1e-10).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn choice_matches_enumeration_and_invariants(seed in prop::collection::vec(any::<u8>(), 64), g in 0usize..8) {
        let gamma = g as f64 / 8.0;
        let (p, f) = random_problem(&seed);
        for s in 0..p.num_states() {
            for a1 in 0..p.num_first() {
                let result = second_period_choice_at(&p, &f, gamma, a1, s);
                prop_assert_eq!(result.chosen_indices(), enumeration_oracle(&p, &f, gamma, a1, s));
                prop_assert_eq!(&result, &second_period_choice_at(&p, &f, gamma, a1, s));
                for c in &result.chosen {
                    prop_assert!(c.regret <= 0.0);
                    for &k in &c.witnesses {
                        let t = total_utility(&p, &f, gamma, a1, c.index, k, s).unwrap();
                        prop_assert!((t - result.total_utility).abs() <= 1e-10);
                    }
                }
                let classical = material_argmax(&p, &f, a1, s);
                prop_assert_eq!(second_period_choice_at(&p, &f, 0.0, a1, s).chosen_indices(), classical.clone());
                let stoic = f.with_constant_member(&p, 0.0).unwrap();
                prop_assert_eq!(second_period_choice_at(&p, &stoic, gamma, a1, s).chosen_indices(), classical.clone());
                let continuation = f.material().get(a1, classical[0], s);
                if continuation >= ex_post_value_at(&p, f.material(), s) - 1e-10 {
                    prop_assert_eq!(result.chosen_indices(), classical);
                }
                for y in 0..p.second_menu(a1).len() {
                    for k in 0..f.len() {
                        let v = f.member(k).get(a1, y, s) - ex_post_value_at(&p, f.member(k), s);
                        prop_assert!(v <= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn enlarging_the_first_menu_lowers_total_utility(seed in prop::collection::vec(any::<u8>(), 64), g in 0usize..8) {
        let gamma = g as f64 / 8.0;
        let (p, f) = random_problem(&seed);
        let n1 = p.num_first();
        let mut menus: Vec<Vec<String>> = (0..n1).map(|a| p.second_menu(a).to_vec()).collect();
        menus.push(vec!["extra".into()]);
        let mut first = p.first_menu().to_vec();
        first.push("a_extra".into());
        let bigger = DecisionProblem::new(p.states().to_vec(), p.prior().to_vec(), first, menus).unwrap();
        let members: Vec<UtilityTable> = (0..f.len())
            .map(|k| UtilityTable::from_fn(&bigger, |a1, a2, s| if a1 == n1 { 2.0 + k as f64 } else { f.member(k).get(a1, a2, s) }).unwrap())
            .collect();
        let g2 = RationaleFamily::tabular(members, 0).unwrap();
        for s in 0..p.num_states() {
            for a1 in 0..n1 {
                for a2 in 0..p.second_menu(a1).len() {
                    for k in 0..f.len() {
                        let small = total_utility(&p, &f, gamma, a1, a2, k, s).unwrap();
                        let large = total_utility(&bigger, &g2, gamma, a1, a2, k, s).unwrap();
                        prop_assert!(large <= small);
                    }
                }
            }
        }
    }

    #[test]
    fn policies_coincide_without_regret(seed in prop::collection::vec(any::<u8>(), 64)) {
        let (p, f) = random_problem(&seed);
        let run = |policy| {
            first_period_choice(&p, &f, &AgentConfig::new(0.0, policy, SelectionRule::Pessimistic).unwrap())
        };
        let naif = run(FirstPeriodPolicy::Naif);
        for policy in [FirstPeriodPolicy::Sophisticate, FirstPeriodPolicy::EmpatheticSophisticate, FirstPeriodPolicy::Classical] {
            let other = run(policy);
            prop_assert_eq!(&other.chosen, &naif.chosen);
            for (a, b) in other.values.iter().zip(&naif.values) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}
