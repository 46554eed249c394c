//! Persistence in a two-stage project with a first-stage cost shock.
//!
//! Payoffs are `w(a1, a2, theta, s) = theta a1 a2 - s c1(a1) - c2(a2)`. The first
//! effort is chosen against the prior over shocks; the second after the shock.

use serde::{Deserialize, Serialize};

use crate::core_model::{
    ex_post_values, first_period_choice, second_period_choice_at, AgentConfig, DecisionProblem,
    FirstPeriodPolicy, RationaleFamily, SelectionRule, TIE_TOLERANCE,
};
use crate::error::{domain, Result};

/// CSV header of a project report.
pub const PROJECT_HEADER: &str = "state,shock,a1,ex_post_optimal,classical_a2,rationalizing_a2,theta_bar";

/// Effort cost functions on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostFunction {
    Linear,
    Quadratic,
    /// `c(a) = a^k` with `k > 0`.
    Power { k: f64 },
}

impl CostFunction {
    pub fn eval(&self, a: f64) -> f64 {
        match self {
            Self::Linear => a,
            Self::Quadratic => a * a,
            Self::Power { k } => a.powf(*k),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Power { k } if !(k.is_finite() && *k > 0.0) => {
                domain("power cost needs a finite exponent k > 0")
            }
            _ => Ok(()),
        }
    }
}

/// Grids, costs and shock distribution of a project problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectInstance {
    pub a1_grid: Vec<f64>,
    pub a2_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    /// Index of the material reward value in `theta_grid`.
    pub theta_star: usize,
    pub c1: CostFunction,
    pub c2: CostFunction,
    /// Realizations of the first-stage cost shock.
    pub shocks: Vec<f64>,
    pub prior: Vec<f64>,
}

fn check_grid(grid: &[f64], name: &str, lo: f64, hi: f64) -> Result<()> {
    if grid.is_empty() {
        return domain(format!("{name} is empty"));
    }
    if grid.iter().any(|v| !v.is_finite() || *v < lo || *v > hi) {
        return domain(format!("{name} must lie in [{lo}, {hi}]"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return domain(format!("{name} must be strictly increasing"));
    }
    Ok(())
}

fn check_cost(cost: &CostFunction, grid: &[f64], name: &str) -> Result<()> {
    cost.validate()?;
    let values: Vec<f64> = grid.iter().map(|&a| cost.eval(a)).collect();
    if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] < w[0]) {
        return domain(format!("{name} must be finite and non-decreasing on its grid"));
    }
    Ok(())
}

impl ProjectInstance {
    /// Quadratic costs, reward 1.6 and shocks {0, 0.45, 0.9} with prior (1/4, 1/2, 1/4).
    pub fn quadratic_default() -> Self {
        Self {
            a1_grid: (0..=20).map(|i| i as f64 / 20.0).collect(),
            a2_grid: (0..=20).map(|i| i as f64 / 20.0).collect(),
            theta_grid: (0..=40).map(|i| i as f64 / 10.0).collect(),
            theta_star: 16,
            c1: CostFunction::Quadratic,
            c2: CostFunction::Quadratic,
            shocks: vec![0.0, 0.45, 0.9],
            prior: vec![0.25, 0.5, 0.25],
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_grid(&self.a1_grid, "a1 grid", 0.0, 1.0)?;
        check_grid(&self.a2_grid, "a2 grid", 0.0, 1.0)?;
        check_grid(&self.theta_grid, "theta grid", 0.0, f64::INFINITY)?;
        if self.theta_star >= self.theta_grid.len() {
            return domain("theta_star must index the theta grid");
        }
        check_cost(&self.c1, &self.a1_grid, "c1")?;
        check_cost(&self.c2, &self.a2_grid, "c2")?;
        if self.shocks.iter().any(|s| !s.is_finite()) {
            return domain("shocks must be finite");
        }
        Ok(())
    }

    /// `w(a1, a2, theta, s)` at grid indices and a reward value.
    pub fn payoff(&self, a1: usize, a2: usize, theta: f64, state: usize) -> f64 {
        let (x, y) = (self.a1_grid[a1], self.a2_grid[a2]);
        theta * x * y - self.shocks[state] * self.c1.eval(x) - self.c2.eval(y)
    }
}

/// Result of one project simulation, with efforts reported as grid values.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectOutcome {
    pub state: usize,
    pub shock: f64,
    pub a1: f64,
    /// Whether `a1` admits a continuation that is materially optimal among all plans.
    pub ex_post_optimal: bool,
    pub classical: Vec<f64>,
    pub rationalizing: Vec<f64>,
    /// Reward value adopted for the first rationalizing choice.
    pub theta_bar: f64,
}

impl ProjectOutcome {
    /// One CSV row matching [`PROJECT_HEADER`]; sets are `;`-separated.
    pub fn csv_row(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        format!(
            "{},{},{},{},{},{},{}",
            self.state,
            self.shock,
            self.a1,
            self.ex_post_optimal,
            join(&self.classical),
            join(&self.rationalizing),
            self.theta_bar
        )
    }
}

/// A project instance compiled into a decision problem and a parametric family.
#[derive(Debug, Clone)]
pub struct ProjectModel {
    instance: ProjectInstance,
    problem: DecisionProblem,
    family: RationaleFamily,
    naif_a1: usize,
}

impl ProjectModel {
    pub fn new(instance: ProjectInstance) -> Result<Self> {
        instance.validate()?;
        let label = |v: &f64| format!("{v}");
        let states = (0..instance.shocks.len()).map(|i| format!("s{i}")).collect();
        let a1_ids: Vec<String> = instance.a1_grid.iter().map(label).collect();
        let a2_ids: Vec<String> = instance.a2_grid.iter().map(label).collect();
        let problem = DecisionProblem::new(
            states,
            instance.prior.clone(),
            a1_ids.clone(),
            vec![a2_ids; a1_ids.len()],
        )?;
        let family = RationaleFamily::parametric(
            &problem,
            instance.theta_grid.clone(),
            instance.theta_star,
            |a1, a2, theta, s| instance.payoff(a1, a2, theta, s),
        )?;
        let config = AgentConfig::new(0.0, FirstPeriodPolicy::Naif, SelectionRule::Pessimistic)?;
        let naif_a1 = first_period_choice(&problem, &family, &config).chosen[0];
        Ok(Self { instance, problem, family, naif_a1 })
    }

    pub fn instance(&self) -> &ProjectInstance {
        &self.instance
    }

    pub fn problem(&self) -> &DecisionProblem {
        &self.problem
    }

    pub fn family(&self) -> &RationaleFamily {
        &self.family
    }

    /// Grid index of the naif first effort (lowest index among ties).
    pub fn naif_a1(&self) -> usize {
        self.naif_a1
    }

    /// Simulates the naif first effort followed by both second-period agents.
    pub fn simulate(&self, gamma: f64, state: usize) -> Result<ProjectOutcome> {
        self.simulate_at(self.naif_a1, gamma, state)
    }

    /// As [`simulate`](Self::simulate) with a given first-effort index.
    pub fn simulate_at(&self, a1: usize, gamma: f64, state: usize) -> Result<ProjectOutcome> {
        AgentConfig::new(gamma, FirstPeriodPolicy::Naif, SelectionRule::Pessimistic)?;
        if state >= self.instance.shocks.len() {
            return Err(crate::Error::UnknownState(format!("#{state}")));
        }
        if a1 >= self.instance.a1_grid.len() {
            return domain(format!("first effort index {a1} out of range"));
        }
        let grid = &self.instance.a2_grid;
        let classical = second_period_choice_at(&self.problem, &self.family, 0.0, a1, state);
        let rational = second_period_choice_at(&self.problem, &self.family, gamma, a1, state);
        let best_plan = ex_post_values(&self.problem, &self.family, state)[self.instance.theta_star];
        let continuation = classical.chosen[0].material;
        Ok(ProjectOutcome {
            state,
            shock: self.instance.shocks[state],
            a1: self.instance.a1_grid[a1],
            ex_post_optimal: continuation >= best_plan - TIE_TOLERANCE,
            classical: classical.chosen.iter().map(|c| grid[c.index]).collect(),
            rationalizing: rational.chosen.iter().map(|c| grid[c.index]).collect(),
            theta_bar: self.family.label(rational.chosen[0].witnesses[0]),
        })
    }
}

/// Builds the model and simulates one shock realization.
pub fn project_simulate(instance: &ProjectInstance, gamma: f64, state: usize) -> Result<ProjectOutcome> {
    ProjectModel::new(instance.clone())?.simulate(gamma, state)
}
