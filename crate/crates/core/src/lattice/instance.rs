//! Lattice instances with a payoff table and the hypotheses of the monotone distortion result.

use std::fmt;

use super::{strong_set_order_leq, FiniteLattice, FinitePoset};
use crate::error::{Error, Result};

/// Tolerance for the order inequalities on payoff tables.
pub const ORDER_TOLERANCE: f64 = 1e-9;

/// A finite instance: poset of first actions, lattice of second actions, menus,
/// a chain of rationale parameters and a payoff table `w(a1, a2, theta, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeInstance {
    pub(crate) a1: FinitePoset,
    pub(crate) a2: FiniteLattice,
    pub(crate) menus: Vec<Vec<usize>>,
    pub(crate) theta: Vec<f64>,
    pub(crate) theta_star: usize,
    pub(crate) states: Vec<String>,
    pub(crate) w: Vec<f64>,
    pub(crate) gamma: f64,
}

impl LatticeInstance {
    /// Validates the instance. `w` is indexed by `[a1][a2][theta][state]` in row-major order.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a1: FinitePoset,
        a2: FiniteLattice,
        menus: Vec<Vec<usize>>,
        theta: Vec<f64>,
        theta_star: usize,
        states: Vec<String>,
        w: Vec<f64>,
        gamma: f64,
    ) -> Result<Self> {
        if menus.len() != a1.len() {
            return Err(Error::Domain("one menu per first action is required".into()));
        }
        for menu in &menus {
            if menu.is_empty() {
                return Err(Error::Domain("menus must be nonempty".into()));
            }
            if menu.windows(2).any(|p| p[0] >= p[1]) || menu.iter().any(|&x| x >= a2.len()) {
                return Err(Error::Domain("menus must list distinct lattice elements in index order".into()));
            }
            if !a2.is_sublattice(menu) {
                return Err(Error::Domain("menus must be sublattices".into()));
            }
        }
        if theta.is_empty() || theta_star >= theta.len() {
            return Err(Error::Domain("theta* must index a nonempty chain".into()));
        }
        if theta.windows(2).any(|p| !(p[0] < p[1])) {
            return Err(Error::Domain("theta chain must be strictly increasing".into()));
        }
        if states.is_empty() {
            return Err(Error::Domain("at least one state is required".into()));
        }
        if w.len() != a1.len() * a2.len() * theta.len() * states.len() {
            return Err(Error::Domain("payoff table has the wrong size".into()));
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("payoffs must be finite".into()));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Domain("gamma must lie in [0, 1)".into()));
        }
        Ok(Self { a1, a2, menus, theta, theta_star, states, w, gamma })
    }

    pub fn a1(&self) -> &FinitePoset {
        &self.a1
    }

    pub fn a2(&self) -> &FiniteLattice {
        &self.a2
    }

    pub fn menu(&self, a1: usize) -> &[usize] {
        &self.menus[a1]
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

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let mut out = self.clone();
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Domain("gamma must lie in [0, 1)".into()));
        }
        out.gamma = gamma;
        Ok(out)
    }

    #[inline]
    pub fn w(&self, a1: usize, a2: usize, t: usize, s: usize) -> f64 {
        let (n2, nt, ns) = (self.a2.len(), self.theta.len(), self.states.len());
        self.w[((a1 * n2 + a2) * nt + t) * ns + s]
    }

    /// Sizes `(|A1|, |A2|, |Theta|, |S|)`.
    pub fn sizes(&self) -> (usize, usize, usize, usize) {
        (self.a1.len(), self.a2.len(), self.theta.len(), self.states.len())
    }

    /// Reverses the order on A1, A2 and Theta. Theta values are negated so the chain stays increasing.
    pub fn dual(&self) -> Self {
        let (n1, n2, nt, ns) = self.sizes();
        let mut w = vec![0.0; self.w.len()];
        for a1 in 0..n1 {
            for a2 in 0..n2 {
                for t in 0..nt {
                    for s in 0..ns {
                        w[((a1 * n2 + a2) * nt + (nt - 1 - t)) * ns + s] = self.w(a1, a2, t, s);
                    }
                }
            }
        }
        Self {
            a1: self.a1.dual(),
            a2: self.a2.dual(),
            menus: self.menus.clone(),
            theta: self.theta.iter().rev().map(|t| -t).collect(),
            theta_star: nt - 1 - self.theta_star,
            states: self.states.clone(),
            w,
            gamma: self.gamma,
        }
    }

    /// Replaces the payoff table, keeping the structure.
    pub fn with_payoffs(&self, w: Vec<f64>) -> Result<Self> {
        Self::new(
            self.a1.clone(),
            self.a2.clone(),
            self.menus.clone(),
            self.theta.clone(),
            self.theta_star,
            self.states.clone(),
            w,
            self.gamma,
        )
    }
}

/// A witnessed failure of an order inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderViolation {
    pub property: &'static str,
    pub state: usize,
    /// Points of the inequality as `(a1, a2, theta)` index triples.
    pub points: Vec<(usize, usize, usize)>,
    /// Amount by which the inequality fails.
    pub shortfall: f64,
}

impl fmt::Display for OrderViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails in state {} at", self.property, self.state)?;
        for (a1, a2, t) in &self.points {
            write!(f, " ({a1},{a2},{t})")?;
        }
        write!(f, " by {:e}", self.shortfall)
    }
}

/// Checks increasing differences between `a1` and `(a2, theta)` on every comparable pair.
pub fn has_increasing_differences(inst: &LatticeInstance) -> std::result::Result<(), OrderViolation> {
    let (n1, n2, nt, ns) = inst.sizes();
    for s in 0..ns {
        for lo1 in 0..n1 {
            for hi1 in 0..n1 {
                if lo1 == hi1 || !inst.a1.leq(lo1, hi1) {
                    continue;
                }
                for lo2 in 0..n2 {
                    for hi2 in 0..n2 {
                        if !inst.a2.leq(lo2, hi2) {
                            continue;
                        }
                        for lt in 0..nt {
                            for ht in lt..nt {
                                let high = inst.w(hi1, hi2, ht, s) - inst.w(hi1, lo2, lt, s);
                                let low = inst.w(lo1, hi2, ht, s) - inst.w(lo1, lo2, lt, s);
                                if high < low - ORDER_TOLERANCE {
                                    return Err(OrderViolation {
                                        property: "increasing differences",
                                        state: s,
                                        points: vec![(lo1, lo2, lt), (lo1, hi2, ht), (hi1, lo2, lt), (hi1, hi2, ht)],
                                        shortfall: low - high,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Checks supermodularity of `w(a1, ., ., s)` on the product of A2 and the Theta chain.
pub fn is_supermodular_in_a2_theta(inst: &LatticeInstance) -> std::result::Result<(), OrderViolation> {
    let (n1, _, nt, ns) = inst.sizes();
    for s in 0..ns {
        for a1 in 0..n1 {
            is_supermodular_product(&inst.a2, nt, |x, t| inst.w(a1, x, t, s)).map_err(|mut v| {
                v.state = s;
                v.points = v.points.into_iter().map(|(_, x, t)| (a1, x, t)).collect();
                v
            })?;
        }
    }
    Ok(())
}

/// Supermodularity of `f(x, t)` on the product of `lattice` and a chain of length `chain_len`.
pub fn is_supermodular_product(
    lattice: &FiniteLattice,
    chain_len: usize,
    f: impl Fn(usize, usize) -> f64,
) -> std::result::Result<(), OrderViolation> {
    let n = lattice.len();
    for x in 0..n {
        for y in 0..n {
            let (jn, mt) = (lattice.join(x, y), lattice.meet(x, y));
            for t in 0..chain_len {
                for u in 0..chain_len {
                    let lhs = f(jn, t.max(u)) + f(mt, t.min(u));
                    let rhs = f(x, t) + f(y, u);
                    if lhs < rhs - ORDER_TOLERANCE {
                        return Err(OrderViolation {
                            property: "supermodularity",
                            state: 0,
                            points: vec![(0, x, t), (0, y, u)],
                            shortfall: rhs - lhs,
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Supermodularity of a function tabulated on the elements of a lattice.
pub fn is_supermodular_table(
    lattice: &FiniteLattice,
    values: &[f64],
) -> std::result::Result<(), OrderViolation> {
    assert_eq!(values.len(), lattice.len(), "one value per lattice element");
    is_supermodular_product(lattice, 1, |x, _| values[x])
}

/// True when `a1 <= a1'` implies `menu(a1) << menu(a1')` in the strong set order.
pub fn menu_monotone(inst: &LatticeInstance) -> bool {
    let n1 = inst.a1.len();
    (0..n1).all(|i| {
        (0..n1).all(|j| {
            !inst.a1.leq(i, j)
                || strong_set_order_leq(&inst.menus[i], &inst.menus[j], &inst.a2).unwrap_or(false)
        })
    })
}
