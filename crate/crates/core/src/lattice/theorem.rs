//! Brute-force check that rationalizing second actions move in the direction of the
//! first-period mistake, with an implied rationale on the same side of `theta*`.

use std::fmt;

use super::instance::{has_increasing_differences, is_supermodular_in_a2_theta, menu_monotone};
use super::{strong_set_order_leq, LatticeInstance};
use crate::core_model::{
    ex_post_values, second_period_choice_with, DecisionProblem, RationaleFamily, TIE_TOLERANCE,
};
use crate::error::Result;

/// Side of the ex post optimum on which the first action lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// The first action is weakly above an ex post optimizer.
    High,
    /// The first action is weakly below an ex post optimizer.
    Low,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::High => "high",
            Direction::Low => "low",
        })
    }
}

/// Everything needed to reproduce one comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Witness {
    pub state: usize,
    pub a1_bar: usize,
    pub a1_star: usize,
    pub direction: Direction,
    /// Material argmax over `A2(a1_bar)` at `theta*`, as lattice elements.
    pub classical: Vec<usize>,
    /// Rationalizing argmax over `A2(a1_bar)`, as lattice elements.
    pub rationalizing: Vec<usize>,
    /// For each rationalizing action, a theta index on the correct side of `theta*`
    /// that attains the joint maximum with it, if any.
    pub implied_theta: Vec<(usize, Option<usize>)>,
    /// Description of the failed assertion, empty when every assertion holds.
    pub failure: String,
}

impl fmt::Display for Theorem2Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("|");
        write!(
            f,
            "state={} a1_bar={} a1_star={} direction={} classical={} rationalizing={} theta=",
            self.state,
            self.a1_bar,
            self.a1_star,
            self.direction,
            set(&self.classical),
            set(&self.rationalizing)
        )?;
        let thetas: Vec<String> = self
            .implied_theta
            .iter()
            .map(|(a2, t)| match t {
                Some(t) => format!("{a2}:{t}"),
                None => format!("{a2}:none"),
            })
            .collect();
        f.write_str(&thetas.join("|"))?;
        if !self.failure.is_empty() {
            write!(f, " failure={}", self.failure)?;
        }
        Ok(())
    }
}

/// Outcome of a check.
#[derive(Debug, Clone, PartialEq)]
pub enum Theorem2Verdict {
    /// Every applicable direction holds; one witness per applicable optimizer and direction.
    Holds(Vec<Theorem2Witness>),
    Violated(Theorem2Witness),
    /// Hypotheses fail or no ex post optimizer is comparable to the first action.
    Inapplicable(String),
}

impl Theorem2Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Theorem2Verdict::Holds(_) => "holds",
            Theorem2Verdict::Violated(_) => "violated",
            Theorem2Verdict::Inapplicable(_) => "inapplicable",
        }
    }
}

/// Reusable checker: hypotheses are verified once, the decision problem is built once.
#[derive(Debug, Clone)]
pub struct Theorem2Checker<'a> {
    inst: &'a LatticeInstance,
    problem: DecisionProblem,
    family: RationaleFamily,
    hypotheses: std::result::Result<(), String>,
}

impl<'a> Theorem2Checker<'a> {
    pub fn new(inst: &'a LatticeInstance) -> Result<Self> {
        let (n1, _, _, ns) = inst.sizes();
        let hypotheses = match (
            has_increasing_differences(inst),
            is_supermodular_in_a2_theta(inst),
            menu_monotone(inst),
        ) {
            (Err(v), _, _) | (_, Err(v), _) => Err(v.to_string()),
            (_, _, false) => Err("menus are not monotone in the strong set order".to_string()),
            _ => Ok(()),
        };
        let problem = DecisionProblem::new(
            inst.states.clone(),
            vec![1.0 / ns as f64; ns],
            inst.a1.labels().to_vec(),
            (0..n1)
                .map(|a1| inst.menus[a1].iter().map(|&x| inst.a2.order().labels()[x].clone()).collect())
                .collect(),
        )?;
        let family = RationaleFamily::parametric(&problem, inst.theta.clone(), inst.theta_star, |a1, j, theta, s| {
            let t = inst.theta.iter().position(|&x| x == theta).expect("grid value");
            inst.w(a1, inst.menus[a1][j], t, s)
        })?;
        Ok(Self { inst, problem, family, hypotheses })
    }

    /// Checks one `(state, a1_bar)` pair.
    pub fn check(&self, state: usize, a1_bar: usize) -> Theorem2Verdict {
        if let Err(msg) = &self.hypotheses {
            return Theorem2Verdict::Inapplicable(format!("hypotheses fail: {msg}"));
        }
        let inst = self.inst;
        let ts = inst.theta_star;
        let n1 = inst.a1.len();
        let best_at = |a1: usize| {
            inst.menus[a1].iter().map(|&x| inst.w(a1, x, ts, state)).fold(f64::NEG_INFINITY, f64::max)
        };
        let plan_values: Vec<f64> = (0..n1).map(best_at).collect();
        let top = plan_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let optimizers: Vec<usize> = (0..n1).filter(|&a| plan_values[a] >= top - TIE_TOLERANCE).collect();

        let menu = &inst.menus[a1_bar];
        let classical: Vec<usize> = menu
            .iter()
            .copied()
            .filter(|&x| inst.w(a1_bar, x, ts, state) >= plan_values[a1_bar] - TIE_TOLERANCE)
            .collect();

        let maxima = ex_post_values(&self.problem, &self.family, state);
        let choice = second_period_choice_with(&self.problem, &self.family, inst.gamma, a1_bar, state, &maxima);
        let rationalizing: Vec<usize> = choice.chosen.iter().map(|c| menu[c.index]).collect();
        let joint: Vec<(usize, usize)> = choice
            .chosen
            .iter()
            .flat_map(|c| c.witnesses.iter().map(move |&k| (menu[c.index], k)))
            .collect();

        let mut witnesses = Vec::new();
        for &a1_star in &optimizers {
            for direction in [Direction::High, Direction::Low] {
                let applies = match direction {
                    Direction::High => inst.a1.leq(a1_star, a1_bar),
                    Direction::Low => inst.a1.leq(a1_bar, a1_star),
                };
                if !applies {
                    continue;
                }
                let on_side = |k: usize| match direction {
                    Direction::High => k >= ts,
                    Direction::Low => k <= ts,
                };
                let implied_theta: Vec<(usize, Option<usize>)> = rationalizing
                    .iter()
                    .map(|&a2| (a2, joint.iter().find(|&&(x, k)| x == a2 && on_side(k)).map(|&(_, k)| k)))
                    .collect();
                let ordered = match direction {
                    Direction::High => strong_set_order_leq(&classical, &rationalizing, &inst.a2),
                    Direction::Low => strong_set_order_leq(&rationalizing, &classical, &inst.a2),
                }
                .unwrap_or(false);
                let mut failure = String::new();
                if !ordered {
                    failure = "strong set order fails".into();
                } else if let Some((a2, _)) = implied_theta.iter().find(|(_, t)| t.is_none()) {
                    failure = format!("no implied rationale for a2={a2}");
                } else if let Some((a2, k)) =
                    joint.iter().find(|&&(x, k)| !on_side(k) && k != ts && !classical.contains(&x))
                {
                    failure = format!("off-side maximizer ({a2},{k}) outside the material argmax");
                }
                let witness = Theorem2Witness {
                    state,
                    a1_bar,
                    a1_star,
                    direction,
                    classical: classical.clone(),
                    rationalizing: rationalizing.clone(),
                    implied_theta,
                    failure,
                };
                if !witness.failure.is_empty() {
                    return Theorem2Verdict::Violated(witness);
                }
                witnesses.push(witness);
            }
        }
        if witnesses.is_empty() {
            Theorem2Verdict::Inapplicable("no ex post optimizer is comparable to the first action".into())
        } else {
            Theorem2Verdict::Holds(witnesses)
        }
    }

    /// Checks every state and every first action, in that order.
    pub fn check_all(&self) -> Vec<Theorem2Verdict> {
        let (n1, _, _, ns) = self.inst.sizes();
        (0..ns).flat_map(|s| (0..n1).map(move |a1| (s, a1))).map(|(s, a1)| self.check(s, a1)).collect()
    }
}

/// Checks the monotone distortion claim for one state and first action.
pub fn check_theorem2(inst: &LatticeInstance, state: usize, a1_bar: usize) -> Result<Theorem2Verdict> {
    if state >= inst.states.len() || a1_bar >= inst.a1.len() {
        return crate::error::domain("state or first action out of range");
    }
    Ok(Theorem2Checker::new(inst)?.check(state, a1_bar))
}
