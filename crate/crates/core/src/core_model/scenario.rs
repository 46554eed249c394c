//! Scenario documents and the per-state report produced from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    ex_post_values, first_period_choice, second_period_choice_with, AgentConfig, DecisionProblem,
    FirstPeriodPolicy, FirstPeriodReport, RationaleFamily, SelectionRule, UtilityTable,
    DEFAULT_THETA_POINTS,
};
use crate::error::{Error, Result};

/// A scenario: decision problem, rationale family and agent parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub states: Vec<String>,
    pub prior: Vec<f64>,
    pub first_menu: Vec<String>,
    /// Second menu keyed by first action.
    pub second_menu: BTreeMap<String, Vec<String>>,
    pub rationales: RationaleSpec,
    pub gamma: f64,
    #[serde(default = "default_policy")]
    pub policy: String,
    #[serde(default = "default_selection")]
    pub selection: String,
}

fn default_policy() -> String {
    "naif".into()
}

fn default_selection() -> String {
    "pessimistic".into()
}

/// How the rationale family is specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RationaleSpec {
    /// Explicit tables `tables[k][a1][a2] = [value per state]`.
    Tabular {
        tables: Vec<BTreeMap<String, BTreeMap<String, Vec<f64>>>>,
        material_index: usize,
    },
    /// A catalog expression evaluated on a grid of rationale parameters.
    Parametric {
        theta_grid: ThetaGrid,
        theta_star: f64,
        expression: Expression,
    },
}

/// Grid of rationale parameters: explicit values or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaGrid {
    Values(Vec<f64>),
    Range {
        min: f64,
        max: f64,
        #[serde(default)]
        points: Option<usize>,
    },
}

impl ThetaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            ThetaGrid::Values(v) => Ok(v.clone()),
            ThetaGrid::Range { min, max, points } => {
                let n = points.unwrap_or(DEFAULT_THETA_POINTS);
                if n < 2 || !(min < max) {
                    return Err(Error::Parse("theta_grid range needs min < max and points >= 2".into()));
                }
                Ok((0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect())
            }
        }
    }
}

/// Cost functions available to the bilinear expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSpec {
    Linear { scale: f64 },
    Quadratic { scale: f64 },
    Power { k: f64, scale: f64 },
}

impl CostSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            CostSpec::Linear { scale } => scale * x,
            CostSpec::Quadratic { scale } => scale * x * x,
            CostSpec::Power { k, scale } => scale * x.max(0.0).powf(k),
        }
    }
}

/// Payoff attributes of one plan in the ticket expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TicketOutcome {
    pub attend: bool,
    pub payment: f64,
}

/// The fixed catalog of parametric payoff expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expression {
    /// `theta * x1 * x2 - s * c1(x1) - c2(x2)` with numeric action and state levels.
    Bilinear {
        a1_levels: BTreeMap<String, f64>,
        a2_levels: BTreeMap<String, f64>,
        state_levels: BTreeMap<String, f64>,
        c1: CostSpec,
        c2: CostSpec,
    },
    /// `phi(x1, theta, s) + phi(x2, theta, s)` with `phi(x, theta, s) = -(x - theta - s)^2`.
    Separable {
        a1_levels: BTreeMap<String, f64>,
        a2_levels: BTreeMap<String, f64>,
        state_levels: BTreeMap<String, f64>,
    },
    /// `theta * attend - penalty * attend * bad_weather - payment`.
    TicketExample {
        outcomes: BTreeMap<String, BTreeMap<String, TicketOutcome>>,
        bad_weather_states: Vec<String>,
        weather_penalty: f64,
    },
}

fn lookup(levels: &BTreeMap<String, f64>, id: &str, what: &str) -> Result<f64> {
    levels
        .get(id)
        .copied()
        .ok_or_else(|| Error::Parse(format!("missing {what} level for `{id}`")))
}

/// A scenario compiled into model objects.
#[derive(Debug, Clone)]
pub struct CompiledScenario {
    pub id: String,
    pub problem: DecisionProblem,
    pub family: RationaleFamily,
    pub config: AgentConfig,
}

impl Scenario {
    /// Parses a JSON scenario document.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn policy(&self) -> Result<FirstPeriodPolicy> {
        match self.policy.as_str() {
            "naif" => Ok(FirstPeriodPolicy::Naif),
            "sophisticate" => Ok(FirstPeriodPolicy::Sophisticate),
            "empathetic_sophisticate" => Ok(FirstPeriodPolicy::EmpatheticSophisticate),
            "classical" => Ok(FirstPeriodPolicy::Classical),
            other => Err(Error::Parse(format!("unknown policy `{other}`"))),
        }
    }

    pub fn selection(&self) -> Result<SelectionRule> {
        match self.selection.as_str() {
            "pessimistic" => Ok(SelectionRule::Pessimistic),
            "optimistic" => Ok(SelectionRule::Optimistic),
            other => Err(Error::Parse(format!("unknown selection rule `{other}`"))),
        }
    }

    /// Builds the decision problem described by the scenario.
    pub fn problem(&self) -> Result<DecisionProblem> {
        let mut menus = Vec::with_capacity(self.first_menu.len());
        for a1 in &self.first_menu {
            let menu = self
                .second_menu
                .get(a1)
                .ok_or_else(|| Error::Parse(format!("second_menu has no entry for `{a1}`")))?;
            menus.push(menu.clone());
        }
        for key in self.second_menu.keys() {
            if !self.first_menu.contains(key) {
                return Err(Error::Parse(format!("second_menu key `{key}` is not in first_menu")));
            }
        }
        DecisionProblem::new(self.states.clone(), self.prior.clone(), self.first_menu.clone(), menus)
    }

    /// Compiles the scenario; `gamma_override` replaces the document's gamma.
    pub fn compile(&self, gamma_override: Option<f64>) -> Result<CompiledScenario> {
        let problem = self.problem()?;
        let family = self.family(&problem)?;
        let gamma = gamma_override.unwrap_or(self.gamma);
        let config = AgentConfig::new(gamma, self.policy()?, self.selection()?)?;
        Ok(CompiledScenario { id: self.id.clone(), problem, family, config })
    }

    fn family(&self, problem: &DecisionProblem) -> Result<RationaleFamily> {
        match &self.rationales {
            RationaleSpec::Tabular { tables, material_index } => {
                let members = tables
                    .iter()
                    .map(|t| tabular_member(problem, t))
                    .collect::<Result<Vec<_>>>()?;
                RationaleFamily::tabular(members, *material_index)
            }
            RationaleSpec::Parametric { theta_grid, theta_star, expression } => {
                let grid = theta_grid.values()?;
                let star = grid
                    .iter()
                    .position(|t| (t - theta_star).abs() <= 1e-9 * (1.0 + theta_star.abs()))
                    .ok_or_else(|| Error::Parse(format!("theta_star {theta_star} is not a grid point")))?;
                let evaluator = Evaluator::new(problem, expression)?;
                RationaleFamily::parametric(problem, grid, star, |a1, a2, theta, s| {
                    evaluator.eval(a1, a2, theta, s)
                })
            }
        }
    }
}

fn tabular_member(
    problem: &DecisionProblem,
    table: &BTreeMap<String, BTreeMap<String, Vec<f64>>>,
) -> Result<UtilityTable> {
    let mut values = Vec::with_capacity(problem.num_first());
    for (a1, id1) in problem.first_menu().iter().enumerate() {
        let rows = table
            .get(id1)
            .ok_or_else(|| Error::Parse(format!("tabular rationale lacks first action `{id1}`")))?;
        let mut block = Vec::new();
        for id2 in problem.second_menu(a1) {
            let row = rows.get(id2).ok_or_else(|| {
                Error::Parse(format!("tabular rationale lacks pair `{id1}`/`{id2}`"))
            })?;
            block.push(row.clone());
        }
        if rows.len() != block.len() {
            return Err(Error::Parse(format!(
                "tabular rationale lists pairs outside A2(`{id1}`)"
            )));
        }
        values.push(block);
    }
    if table.len() != problem.num_first() {
        return Err(Error::Parse("tabular rationale lists first actions outside A1".into()));
    }
    UtilityTable::new(problem, values)
}

enum Evaluator {
    Bilinear { x1: Vec<f64>, x2: Vec<Vec<f64>>, s: Vec<f64>, c1: CostSpec, c2: CostSpec },
    Separable { x1: Vec<f64>, x2: Vec<Vec<f64>>, s: Vec<f64> },
    Ticket { outcomes: Vec<Vec<TicketOutcome>>, bad: Vec<bool>, penalty: f64 },
}

impl Evaluator {
    fn new(problem: &DecisionProblem, expression: &Expression) -> Result<Self> {
        let levels = |a1l: &BTreeMap<String, f64>, a2l: &BTreeMap<String, f64>, sl: &BTreeMap<String, f64>| -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> {
            let x1 = problem.first_menu().iter().map(|a| lookup(a1l, a, "a1")).collect::<Result<Vec<_>>>()?;
            let x2 = (0..problem.num_first())
                .map(|a1| problem.second_menu(a1).iter().map(|a| lookup(a2l, a, "a2")).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            let s = problem.states().iter().map(|st| lookup(sl, st, "state")).collect::<Result<Vec<_>>>()?;
            Ok((x1, x2, s))
        };
        Ok(match expression {
            Expression::Bilinear { a1_levels, a2_levels, state_levels, c1, c2 } => {
                let (x1, x2, s) = levels(a1_levels, a2_levels, state_levels)?;
                Evaluator::Bilinear { x1, x2, s, c1: *c1, c2: *c2 }
            }
            Expression::Separable { a1_levels, a2_levels, state_levels } => {
                let (x1, x2, s) = levels(a1_levels, a2_levels, state_levels)?;
                Evaluator::Separable { x1, x2, s }
            }
            Expression::TicketExample { outcomes, bad_weather_states, weather_penalty } => {
                let mut table = Vec::new();
                for (a1, id1) in problem.first_menu().iter().enumerate() {
                    let row = outcomes
                        .get(id1)
                        .ok_or_else(|| Error::Parse(format!("ticket outcomes lack `{id1}`")))?;
                    let mut cells = Vec::new();
                    for id2 in problem.second_menu(a1) {
                        cells.push(*row.get(id2).ok_or_else(|| {
                            Error::Parse(format!("ticket outcomes lack `{id1}`/`{id2}`"))
                        })?);
                    }
                    table.push(cells);
                }
                for st in bad_weather_states {
                    problem.state_index(st)?;
                }
                let bad = problem.states().iter().map(|s| bad_weather_states.contains(s)).collect();
                Evaluator::Ticket { outcomes: table, bad, penalty: *weather_penalty }
            }
        })
    }

    fn eval(&self, a1: usize, a2: usize, theta: f64, state: usize) -> f64 {
        match self {
            Evaluator::Bilinear { x1, x2, s, c1, c2 } => {
                let (p, q) = (x1[a1], x2[a1][a2]);
                theta * p * q - s[state] * c1.eval(p) - c2.eval(q)
            }
            Evaluator::Separable { x1, x2, s } => {
                let phi = |x: f64| -(x - theta - s[state]).powi(2);
                phi(x1[a1]) + phi(x2[a1][a2])
            }
            Evaluator::Ticket { outcomes, bad, penalty } => {
                let o = outcomes[a1][a2];
                let attend = if o.attend { 1.0 } else { 0.0 };
                let weather = if bad[state] { 1.0 } else { 0.0 };
                theta * attend - penalty * attend * weather - o.payment
            }
        }
    }
}

/// One row of a scenario report: the second-period choice after one first action in one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario_id: String,
    pub state: String,
    pub a1: String,
    pub a2_set: Vec<String>,
    pub witness_theta_min: f64,
    pub witness_theta_max: f64,
    pub total_utility: f64,
    pub material_utility: Vec<f64>,
    pub regret: Vec<f64>,
}

/// Report of a scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub scenario_id: String,
    pub gamma: f64,
    pub first_period: FirstPeriodReport,
    /// First-period choice identifiers.
    pub first_choice: Vec<String>,
    pub rows: Vec<ReportRow>,
}

impl ScenarioReport {
    pub const COLUMNS: [&'static str; 9] = [
        "scenario_id",
        "state",
        "a1",
        "a2_set",
        "witness_theta_min",
        "witness_theta_max",
        "total_utility",
        "material_utility",
        "regret",
    ];

    /// Rows rendered as strings in column order; sets are joined with `|`.
    pub fn string_rows(&self) -> Vec<Vec<String>> {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join("|");
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.scenario_id.clone(),
                    r.state.clone(),
                    r.a1.clone(),
                    r.a2_set.join("|"),
                    format!("{}", r.witness_theta_min),
                    format!("{}", r.witness_theta_max),
                    format!("{}", r.total_utility),
                    join(&r.material_utility),
                    join(&r.regret),
                ]
            })
            .collect()
    }
}

/// Runs the first-period choice and every (state, first action) second-period choice.
pub fn run_scenario(scenario: &Scenario, gamma_override: Option<f64>) -> Result<ScenarioReport> {
    let compiled = scenario.compile(gamma_override)?;
    let CompiledScenario { id, problem, family, config } = compiled;
    let first_period = first_period_choice(&problem, &family, &config);
    let first_choice = first_period.chosen.iter().map(|&i| problem.first_menu()[i].clone()).collect();
    let mut rows = Vec::new();
    for s in 0..problem.num_states() {
        let maxima = ex_post_values(&problem, &family, s);
        for a1 in 0..problem.num_first() {
            let choice = second_period_choice_with(&problem, &family, config.gamma(), a1, s, &maxima);
            let labels: Vec<f64> = choice
                .chosen
                .iter()
                .flat_map(|c| c.witnesses.iter().map(|&k| family.label(k)))
                .collect();
            rows.push(ReportRow {
                scenario_id: id.clone(),
                state: problem.states()[s].clone(),
                a1: problem.first_menu()[a1].clone(),
                a2_set: choice.chosen.iter().map(|c| c.id.clone()).collect(),
                witness_theta_min: labels.iter().cloned().fold(f64::INFINITY, f64::min),
                witness_theta_max: labels.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                total_utility: choice.total_utility,
                material_utility: choice.chosen.iter().map(|c| c.material).collect(),
                regret: choice.chosen.iter().map(|c| c.regret).collect(),
            });
        }
    }
    Ok(ScenarioReport { scenario_id: id, gamma: config.gamma(), first_period, first_choice, rows })
}
