//! The same decision problem faced twice, before and after the state is learned.
//!
//! Payoffs are time-separable, `w(a1, a2, theta, s) = phi(a1, theta, s) + phi(a2, theta, s)`,
//! so a classical agent ignores `a1` in the second period. A rationalizer's second
//! choice is pulled from the ex post optimum towards the first.

use crate::core_model::TIE_TOLERANCE;
use crate::error::{domain, Error, Result};
use crate::lattice::{is_supermodular_product, FiniteLattice};

/// CSV header of a sticky-choice report.
pub const STICKY_HEADER: &str = "state,a1,gamma,classical_a2,rationalizing_a2,theta_bar,between";

/// Action chain, rationale chain and the stage payoff `phi[a][theta][state]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StickyInstance {
    actions: Vec<f64>,
    theta: Vec<f64>,
    theta_star: usize,
    states: Vec<String>,
    phi: Vec<Vec<Vec<f64>>>,
}

fn increasing(grid: &[f64]) -> bool {
    !grid.is_empty() && grid.iter().all(|v| v.is_finite()) && grid.windows(2).all(|w| w[0] < w[1])
}

impl StickyInstance {
    /// Validates shapes and checks that `phi` is supermodular in `(a, theta)` in every state.
    pub fn new(
        actions: Vec<f64>,
        theta: Vec<f64>,
        theta_star: usize,
        states: Vec<String>,
        phi: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if !increasing(&actions) || !increasing(&theta) {
            return domain("action and rationale grids must be nonempty, finite and strictly increasing");
        }
        if theta_star >= theta.len() {
            return domain("theta_star must index the rationale grid");
        }
        if states.is_empty() {
            return domain("at least one state is required");
        }
        let shape_ok = phi.len() == actions.len()
            && phi.iter().all(|rows| {
                rows.len() == theta.len()
                    && rows.iter().all(|r| r.len() == states.len() && r.iter().all(|v| v.is_finite()))
            });
        if !shape_ok {
            return domain("phi must be a finite table indexed [action][theta][state]");
        }
        let chain = FiniteLattice::chain(actions.len())?;
        for (s, id) in states.iter().enumerate() {
            is_supermodular_product(&chain, theta.len(), |a, t| phi[a][t][s]).map_err(|v| {
                Error::Precondition(format!("phi is not supermodular in (a, theta) in state `{id}`: {v}"))
            })?;
        }
        Ok(Self { actions, theta, theta_star, states, phi })
    }

    /// `phi(a, theta, s) = -(a - theta - s)^2` on the given grids with `theta* = theta[theta_star]`.
    pub fn quadratic(actions: Vec<f64>, theta: Vec<f64>, theta_star: usize, shocks: &[f64]) -> Result<Self> {
        let phi = actions
            .iter()
            .map(|&a| theta.iter().map(|&t| shocks.iter().map(|&s| -(a - t - s).powi(2)).collect()).collect())
            .collect();
        let states = shocks.iter().map(|s| format!("{s}")).collect();
        Self::new(actions, theta, theta_star, states, phi)
    }

    /// The quadratic instance on a 101-point action grid over `[0, 1]`, rationales on a
    /// 101-point grid over `[-1, 1]` with `theta* = 0`, and shocks {0.2, 0.5, 0.8}.
    pub fn quadratic_default() -> Self {
        let actions = (0..=100).map(|i| i as f64 / 100.0).collect();
        let theta = (0..=100).map(|i| (i as f64 - 50.0) / 50.0).collect();
        Self::quadratic(actions, theta, 50, &[0.2, 0.5, 0.8]).expect("quadratic payoffs are supermodular")
    }

    pub fn actions(&self) -> &[f64] {
        &self.actions
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_star(&self) -> usize {
        self.theta_star
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn phi(&self, a: usize, theta: usize, state: usize) -> f64 {
        self.phi[a][theta][state]
    }

    /// Indices maximizing `phi(., theta*, s)`, the classical choice in every period.
    pub fn ex_post_optimal(&self, state: usize) -> Vec<usize> {
        let row: Vec<f64> = (0..self.actions.len()).map(|a| self.phi(a, self.theta_star, state)).collect();
        argmax_set(&row)
    }
}

fn argmax_set(values: &[f64]) -> Vec<usize> {
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len()).filter(|&i| values[i] >= best - TIE_TOLERANCE).collect()
}

/// Second-period choices of a classical agent and a rationalizer after `a1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StickyOutcome {
    pub state: usize,
    pub a1: usize,
    pub gamma: f64,
    /// Action indices of the classical argmax `a*(s)`.
    pub classical: Vec<usize>,
    /// Action indices of the rationalizing argmax.
    pub rationalizing: Vec<usize>,
    /// Rationale index adopted for the first rationalizing choice.
    pub theta_bar: usize,
    /// Whether every rationalizing choice lies weakly between `a*(s)` and `a1`.
    pub between: bool,
}

impl StickyOutcome {
    /// One CSV row matching [`STICKY_HEADER`], in grid values; sets are `;`-separated.
    pub fn csv_row(&self, instance: &StickyInstance) -> String {
        let join = |v: &[usize]| v.iter().map(|&i| instance.actions[i].to_string()).collect::<Vec<_>>().join(";");
        format!(
            "{},{},{},{},{},{},{}",
            instance.states[self.state],
            instance.actions[self.a1],
            self.gamma,
            join(&self.classical),
            join(&self.rationalizing),
            instance.theta[self.theta_bar],
            self.between
        )
    }
}

/// Solves the second period after first action index `a1` in state index `state`.
pub fn sticky_choice_simulate(instance: &StickyInstance, gamma: f64, a1: usize, state: usize) -> Result<StickyOutcome> {
    if !(0.0..1.0).contains(&gamma) {
        return domain(format!("gamma must lie in [0, 1), got {gamma}"));
    }
    if a1 >= instance.actions.len() {
        return domain(format!("first action index {a1} out of range"));
    }
    if state >= instance.states.len() {
        return Err(Error::UnknownState(format!("#{state}")));
    }
    let (na, nt, star) = (instance.actions.len(), instance.theta.len(), instance.theta_star);
    // Plans are separable, so the best plan under a rationale repeats its stage optimum.
    let stage_max: Vec<f64> = (0..nt)
        .map(|t| (0..na).map(|a| instance.phi(a, t, state)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let material_a1 = instance.phi(a1, star, state);
    let mut best_theta = Vec::with_capacity(na);
    let totals: Vec<f64> = (0..na)
        .map(|a2| {
            let material = (1.0 - gamma) * (material_a1 + instance.phi(a2, star, state));
            let scores: Vec<f64> = (0..nt)
                .map(|t| {
                    let regret = instance.phi(a1, t, state) + instance.phi(a2, t, state) - 2.0 * stage_max[t];
                    material + gamma * regret
                })
                .collect();
            best_theta.push(argmax_set(&scores)[0]);
            scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let classical = instance.ex_post_optimal(state);
    let rationalizing = argmax_set(&totals);
    let lo = classical[0].min(a1);
    let hi = classical[classical.len() - 1].max(a1);
    let between = rationalizing.iter().all(|&a| lo <= a && a <= hi);
    Ok(StickyOutcome { state, a1, gamma, theta_bar: best_theta[rationalizing[0]], classical, rationalizing, between })
}
