//! Two-period decision problems solved by an agent who rationalizes past choices.
//!
//! The agent picks a first action `a1`, observes the state `s`, then picks a
//! second action `a2` together with a rationale `v`. The second-period objective
//! is `(1 - gamma) * u(a1, a2, s) + gamma * (v(a1, a2, s) - max v(., ., s))`,
//! where the maximum runs over every feasible plan of the problem.

mod scenario;

pub use scenario::{
    run_scenario, CompiledScenario, CostSpec, Expression, ReportRow, RationaleSpec, Scenario,
    ScenarioReport, ThetaGrid, TicketOutcome,
};

use crate::error::{Error, Result};

/// Absolute tolerance used to decide that a value attains a maximum.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Default number of points of a parametric rationale grid.
pub const DEFAULT_THETA_POINTS: usize = 401;

/// A finite two-period choice structure with a prior over states.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionProblem {
    states: Vec<String>,
    prior: Vec<f64>,
    first_menu: Vec<String>,
    second_menus: Vec<Vec<String>>,
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    for (i, a) in ids.iter().enumerate() {
        if ids[..i].contains(a) {
            return Err(Error::Domain(format!("duplicate id `{a}` in {what}")));
        }
    }
    Ok(())
}

impl DecisionProblem {
    /// Builds a problem; `second_menus[i]` is the menu that follows `first_menu[i]`.
    pub fn new(
        states: Vec<String>,
        prior: Vec<f64>,
        first_menu: Vec<String>,
        second_menus: Vec<Vec<String>>,
    ) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Domain("at least one state is required".into()));
        }
        if prior.len() != states.len() {
            return Err(Error::Domain(format!(
                "prior has {} entries for {} states",
                prior.len(),
                states.len()
            )));
        }
        if prior.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Domain("prior entries must be finite and nonnegative".into()));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("prior sums to {total}, not 1")));
        }
        if first_menu.is_empty() {
            return Err(Error::Domain("first menu is empty".into()));
        }
        if second_menus.len() != first_menu.len() {
            return Err(Error::Domain("one second menu is required per first action".into()));
        }
        check_unique(&states, "states")?;
        check_unique(&first_menu, "first menu")?;
        for (a1, menu) in first_menu.iter().zip(&second_menus) {
            if menu.is_empty() {
                return Err(Error::Domain(format!("second menu after `{a1}` is empty")));
            }
            check_unique(menu, &format!("second menu after `{a1}`"))?;
        }
        Ok(Self { states, prior, first_menu, second_menus })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn first_menu(&self) -> &[String] {
        &self.first_menu
    }

    /// Second menu following the first action with index `a1`.
    pub fn second_menu(&self, a1: usize) -> &[String] {
        &self.second_menus[a1]
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_first(&self) -> usize {
        self.first_menu.len()
    }

    pub fn state_index(&self, id: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| Error::UnknownState(id.to_string()))
    }

    pub fn first_index(&self, id: &str) -> Result<usize> {
        self.first_menu.iter().position(|a| a == id).ok_or_else(|| Error::MenuViolation {
            menu: "A1".into(),
            action: id.to_string(),
        })
    }

    pub fn second_index(&self, a1: usize, id: &str) -> Result<usize> {
        self.second_menus[a1].iter().position(|a| a == id).ok_or_else(|| Error::MenuViolation {
            menu: format!("A2({})", self.first_menu[a1]),
            action: id.to_string(),
        })
    }

    fn check_pair(&self, a1: usize, a2: usize) -> Result<()> {
        if a1 >= self.num_first() {
            return Err(Error::MenuViolation { menu: "A1".into(), action: format!("#{a1}") });
        }
        if a2 >= self.second_menus[a1].len() {
            return Err(Error::MenuViolation {
                menu: format!("A2({})", self.first_menu[a1]),
                action: format!("#{a2}"),
            });
        }
        Ok(())
    }
}

/// Utility values stored densely by first action, second-menu position and state.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    values: Vec<Vec<Vec<f64>>>,
}

impl UtilityTable {
    /// Validates a nested table `[a1][position in A2(a1)][state]` against the problem shape.
    pub fn new(problem: &DecisionProblem, values: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if values.len() != problem.num_first() {
            return Err(Error::Domain("utility table does not cover A1".into()));
        }
        for (a1, rows) in values.iter().enumerate() {
            if rows.len() != problem.second_menu(a1).len() {
                return Err(Error::Domain(format!(
                    "utility table does not match A2({})",
                    problem.first_menu()[a1]
                )));
            }
            for row in rows {
                if row.len() != problem.num_states() {
                    return Err(Error::Domain("utility table does not cover every state".into()));
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("utility values must be finite".into()));
                }
            }
        }
        Ok(Self { values })
    }

    /// Tabulates `f(a1, a2, state)` over every feasible pair of the problem.
    pub fn from_fn(
        problem: &DecisionProblem,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let values = (0..problem.num_first())
            .map(|a1| {
                (0..problem.second_menu(a1).len())
                    .map(|a2| (0..problem.num_states()).map(|s| f(a1, a2, s)).collect())
                    .collect()
            })
            .collect();
        Self::new(problem, values)
    }

    #[inline]
    pub fn get(&self, a1: usize, a2: usize, state: usize) -> f64 {
        self.values[a1][a2][state]
    }

    fn scaled(&self, alpha: f64, beta: f64) -> Self {
        let values = self
            .values
            .iter()
            .map(|rows| rows.iter().map(|r| r.iter().map(|v| alpha * v + beta).collect()).collect())
            .collect();
        Self { values }
    }
}

/// The set of rationales the agent may adopt, with the material utility as a member.
#[derive(Debug, Clone, PartialEq)]
pub struct RationaleFamily {
    members: Vec<UtilityTable>,
    theta_grid: Option<Vec<f64>>,
    material_index: usize,
}

impl RationaleFamily {
    /// A finite list of utility tables; `material_index` designates `u`.
    pub fn tabular(members: Vec<UtilityTable>, material_index: usize) -> Result<Self> {
        if material_index >= members.len() {
            return Err(Error::Domain("material index outside the rationale family".into()));
        }
        Ok(Self { members, theta_grid: None, material_index })
    }

    /// Tabulates `w(a1, a2, theta, state)` on a strictly increasing grid; `theta_star`
    /// indexes the grid point whose rationale is the material utility.
    pub fn parametric(
        problem: &DecisionProblem,
        grid: Vec<f64>,
        theta_star: usize,
        mut w: impl FnMut(usize, usize, f64, usize) -> f64,
    ) -> Result<Self> {
        if grid.is_empty() || theta_star >= grid.len() {
            return Err(Error::Domain("theta* must index a point of a nonempty grid".into()));
        }
        if grid.windows(2).any(|p| !(p[0] < p[1])) || grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("theta grid must be finite and strictly increasing".into()));
        }
        let members = grid
            .iter()
            .map(|&theta| UtilityTable::from_fn(problem, |a1, a2, s| w(a1, a2, theta, s)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { members, theta_grid: Some(grid), material_index: theta_star })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, index: usize) -> &UtilityTable {
        &self.members[index]
    }

    pub fn material(&self) -> &UtilityTable {
        &self.members[self.material_index]
    }

    pub fn material_index(&self) -> usize {
        self.material_index
    }

    pub fn theta_grid(&self) -> Option<&[f64]> {
        self.theta_grid.as_deref()
    }

    /// Grid value of a parametric member, or the member index for tabular families.
    pub fn label(&self, index: usize) -> f64 {
        match &self.theta_grid {
            Some(grid) => grid[index],
            None => index as f64,
        }
    }

    /// Applies `v -> alpha * v + beta` to every member.
    pub fn affine(&self, alpha: f64, beta: f64) -> Self {
        Self {
            members: self.members.iter().map(|m| m.scaled(alpha, beta)).collect(),
            theta_grid: self.theta_grid.clone(),
            material_index: self.material_index,
        }
    }

    /// Appends a constant rationale (a "stoic" member) to the family.
    pub fn with_constant_member(&self, problem: &DecisionProblem, value: f64) -> Result<Self> {
        let mut members = self.members.clone();
        members.push(UtilityTable::from_fn(problem, |_, _, _| value)?);
        Ok(Self { members, theta_grid: None, material_index: self.material_index })
    }
}

/// First-period policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstPeriodPolicy {
    Naif,
    Sophisticate,
    EmpatheticSophisticate,
    Classical,
}

/// Selection from a non-singleton second-period argmax when forecasting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionRule {
    /// Lowest material utility among the maximizers.
    #[default]
    Pessimistic,
    /// Highest material utility among the maximizers.
    Optimistic,
}

/// Agent parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentConfig {
    gamma: f64,
    policy: FirstPeriodPolicy,
    selection: SelectionRule,
}

impl AgentConfig {
    pub fn new(gamma: f64, policy: FirstPeriodPolicy, selection: SelectionRule) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self { gamma, policy, selection })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn policy(&self) -> FirstPeriodPolicy {
        self.policy
    }

    pub fn selection(&self) -> SelectionRule {
        self.selection
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    Ok(())
}

/// One maximizer of the second-period objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ChosenAction {
    /// Position of the action in `A2(a1)`.
    pub index: usize,
    pub id: String,
    /// Rationale indices attaining the maximal total utility for this action.
    pub witnesses: Vec<usize>,
    /// Material utility of the action.
    pub material: f64,
    /// Regret term `v(a1, a2, s) - max v` of the first witness.
    pub regret: f64,
}

/// Result of a second-period choice.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceResult {
    pub a1: usize,
    pub state: usize,
    /// Maximizers in menu order.
    pub chosen: Vec<ChosenAction>,
    /// Maximal total utility.
    pub total_utility: f64,
}

impl ChoiceResult {
    pub fn chosen_indices(&self) -> Vec<usize> {
        self.chosen.iter().map(|c| c.index).collect()
    }

    pub fn chosen_ids(&self) -> Vec<&str> {
        self.chosen.iter().map(|c| c.id.as_str()).collect()
    }
}

/// Maximum of a table over every feasible plan in the given state.
pub fn ex_post_value_at(problem: &DecisionProblem, table: &UtilityTable, state: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for a1 in 0..problem.num_first() {
        for a2 in 0..problem.second_menu(a1).len() {
            best = best.max(table.get(a1, a2, state));
        }
    }
    best
}

/// Maximum of a table over every feasible plan in the named state.
pub fn ex_post_value(problem: &DecisionProblem, table: &UtilityTable, state: &str) -> Result<f64> {
    let s = problem.state_index(state)?;
    Ok(ex_post_value_at(problem, table, s))
}

/// Total utility of `(a1, a2)` under the rationale with index `rationale`.
pub fn total_utility(
    problem: &DecisionProblem,
    family: &RationaleFamily,
    gamma: f64,
    a1: usize,
    a2: usize,
    rationale: usize,
    state: usize,
) -> Result<f64> {
    check_gamma(gamma)?;
    problem.check_pair(a1, a2)?;
    if state >= problem.num_states() {
        return Err(Error::UnknownState(format!("#{state}")));
    }
    if rationale >= family.len() {
        return Err(Error::Domain(format!("rationale index {rationale} out of range")));
    }
    let v = family.member(rationale);
    let regret = v.get(a1, a2, state) - ex_post_value_at(problem, v, state);
    Ok((1.0 - gamma) * family.material().get(a1, a2, state) + gamma * regret)
}

/// Ex post maxima of every rationale in one state.
pub fn ex_post_values(problem: &DecisionProblem, family: &RationaleFamily, state: usize) -> Vec<f64> {
    (0..family.len()).map(|k| ex_post_value_at(problem, family.member(k), state)).collect()
}

/// Second-period choice after first action index `a1` in state index `state`.
pub fn second_period_choice_at(
    problem: &DecisionProblem,
    family: &RationaleFamily,
    gamma: f64,
    a1: usize,
    state: usize,
) -> ChoiceResult {
    let maxima = ex_post_values(problem, family, state);
    second_period_choice_with(problem, family, gamma, a1, state, &maxima)
}

/// As [`second_period_choice_at`] with precomputed ex post maxima per rationale.
pub fn second_period_choice_with(
    problem: &DecisionProblem,
    family: &RationaleFamily,
    gamma: f64,
    a1: usize,
    state: usize,
    maxima: &[f64],
) -> ChoiceResult {
    let material = family.material();
    let menu = problem.second_menu(a1);
    let mut per_action: Vec<(f64, Vec<usize>, f64)> = Vec::with_capacity(menu.len());
    for a2 in 0..menu.len() {
        let m = material.get(a1, a2, state);
        let totals: Vec<f64> = (0..family.len())
            .map(|k| (1.0 - gamma) * m + gamma * (family.member(k).get(a1, a2, state) - maxima[k]))
            .collect();
        let best = totals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let witnesses: Vec<usize> =
            (0..totals.len()).filter(|&k| totals[k] >= best - TIE_TOLERANCE).collect();
        per_action.push((best, witnesses, m));
    }
    let top = per_action.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let chosen = per_action
        .into_iter()
        .enumerate()
        .filter(|(_, p)| p.0 >= top - TIE_TOLERANCE)
        .map(|(a2, (_, witnesses, m))| {
            let k = witnesses[0];
            ChosenAction {
                index: a2,
                id: menu[a2].clone(),
                regret: family.member(k).get(a1, a2, state) - maxima[k],
                witnesses,
                material: m,
            }
        })
        .collect();
    ChoiceResult { a1, state, chosen, total_utility: top }
}

/// Second-period choice addressed by identifiers.
pub fn second_period_choice(
    problem: &DecisionProblem,
    family: &RationaleFamily,
    gamma: f64,
    a1: &str,
    state: &str,
) -> Result<ChoiceResult> {
    check_gamma(gamma)?;
    let a1 = problem.first_index(a1)?;
    let s = problem.state_index(state)?;
    Ok(second_period_choice_at(problem, family, gamma, a1, s))
}

/// Outcome of the first-period optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstPeriodReport {
    pub policy: FirstPeriodPolicy,
    /// Indices of the optimal first actions in menu order.
    pub chosen: Vec<usize>,
    /// Policy objective for every first action.
    pub values: Vec<f64>,
}

/// Chooses the first action under the configured policy.
pub fn first_period_choice(
    problem: &DecisionProblem,
    family: &RationaleFamily,
    config: &AgentConfig,
) -> FirstPeriodReport {
    let material = family.material();
    let gamma = match config.policy {
        FirstPeriodPolicy::Classical => 0.0,
        _ => config.gamma,
    };
    let maxima: Vec<Vec<f64>> =
        (0..problem.num_states()).map(|s| ex_post_values(problem, family, s)).collect();
    let values: Vec<f64> = (0..problem.num_first())
        .map(|a1| {
            let mut value = 0.0;
            for s in 0..problem.num_states() {
                let weight = problem.prior()[s];
                if weight == 0.0 {
                    continue;
                }
                let term = match config.policy {
                    FirstPeriodPolicy::Naif | FirstPeriodPolicy::Classical => (0..problem
                        .second_menu(a1)
                        .len())
                        .map(|a2| material.get(a1, a2, s))
                        .fold(f64::NEG_INFINITY, f64::max),
                    FirstPeriodPolicy::Sophisticate => {
                        let choice =
                            second_period_choice_with(problem, family, gamma, a1, s, &maxima[s]);
                        let mats = choice.chosen.iter().map(|c| c.material);
                        match config.selection {
                            SelectionRule::Pessimistic => mats.fold(f64::INFINITY, f64::min),
                            SelectionRule::Optimistic => mats.fold(f64::NEG_INFINITY, f64::max),
                        }
                    }
                    FirstPeriodPolicy::EmpatheticSophisticate => {
                        second_period_choice_with(problem, family, gamma, a1, s, &maxima[s])
                            .total_utility
                    }
                };
                value += weight * term;
            }
            value
        })
        .collect();
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let chosen = (0..values.len()).filter(|&i| values[i] >= best - TIE_TOLERANCE).collect();
    FirstPeriodReport { policy: config.policy, chosen, values }
}
