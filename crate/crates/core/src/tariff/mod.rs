//! Two-part tariffs sold to consumers who rationalize the upfront payment.
//!
//! A consumer with taste shock `s` who accepted `(p, L)` buys `q` for material utility
//! `2 s sqrt(q) - p q - L`. Rationales shift the taste by `theta` in `[-1, 1]`. Below the
//! classical break-even state `sqrt(L p)` the rationalizing consumer adopts the taste that
//! exactly breaks even and buys as a classical consumer would in state
//! `s + gamma (sqrt(L p) - s)`.

mod distribution;
mod quadrature;

pub use distribution::TasteShockDistribution;
pub use quadrature::{integrate_panels, integrate_split, NODES};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Participation is accepted when the expected surplus is at least this negative number.
pub const PARTICIPATION_TOLERANCE: f64 = 1e-12;

/// Forecast the consumer uses when deciding whether to accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consumer {
    /// No regret weight: buys the material optimum.
    Classical,
    /// Rationalizes ex post but expects to buy the material optimum.
    Naif,
    /// Rationalizes ex post and foresees it.
    Sophisticate,
}

impl Consumer {
    pub fn label(self) -> &'static str {
        match self {
            Consumer::Classical => "classical",
            Consumer::Naif => "naif",
            Consumer::Sophisticate => "soph",
        }
    }
}

/// A contract offered to a consumer with regret weight `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffInstance {
    pub p: f64,
    pub l: f64,
    pub c: f64,
    pub gamma: f64,
    pub distribution: TasteShockDistribution,
}

fn check_gamma_cost(c: f64, gamma: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return domain("marginal cost must be positive");
    }
    if !(0.0..1.0).contains(&gamma) {
        return domain("gamma must lie in [0, 1)");
    }
    Ok(())
}

impl TariffInstance {
    pub fn new(p: f64, l: f64, c: f64, gamma: f64, distribution: TasteShockDistribution) -> Result<Self> {
        let inst = Self { p, l, c, gamma, distribution };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        check_gamma_cost(self.c, self.gamma)?;
        if !(self.p.is_finite() && self.p >= 0.0) || !self.l.is_finite() {
            return domain("price must be finite and nonnegative and the upfront payment finite");
        }
        self.distribution.validate()
    }
}

/// Profit-maximizing contract and its outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffSolution {
    pub consumer: Consumer,
    pub c: f64,
    pub gamma: f64,
    pub p_star: f64,
    pub l_star: f64,
    /// Break-even state `sqrt(L p)` of the optimal contract.
    pub break_even: f64,
    /// Extra expected demand mass from rationalization, in units of `p^2 q`.
    pub lambda: f64,
    pub expected_profit: f64,
    /// Expected material utility of the consumer, with the demand actually chosen.
    pub consumer_material_utility: f64,
}

fn check_price(p: f64) -> Result<()> {
    if p == 0.0 {
        return Err(Error::UnboundedDemand);
    }
    if !(p.is_finite() && p > 0.0) {
        return domain("price must be positive and finite");
    }
    Ok(())
}

/// Material optimum `s^2 / p^2`.
pub fn classical_demand(s: f64, p: f64, _l: f64) -> Result<f64> {
    check_price(p)?;
    Ok(s * s / (p * p))
}

/// State at which the classical consumer breaks even, `sqrt(L p)` for `L >= 0` and 0 otherwise.
pub fn break_even_state(p: f64, l: f64) -> f64 {
    if l >= 0.0 && p >= 0.0 {
        (l * p).sqrt()
    } else {
        0.0
    }
}

/// Taste shift adopted by the rationalizing consumer: the gap to the break-even state,
/// capped at the largest available rationale.
pub fn adopted_rationale(s: f64, p: f64, l: f64) -> f64 {
    (break_even_state(p, l) - s).clamp(0.0, 1.0)
}

/// Demand of a consumer with regret weight `gamma`.
pub fn rationalizing_demand(s: f64, p: f64, l: f64, gamma: f64) -> Result<f64> {
    check_price(p)?;
    if !(0.0..1.0).contains(&gamma) {
        return domain("gamma must lie in [0, 1)");
    }
    let shifted = s + gamma * adopted_rationale(s, p, l);
    Ok(shifted * shifted / (p * p))
}

/// Comparison of demand under two upfront payments at one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityRow {
    pub s: f64,
    pub q_low: f64,
    pub q_high: f64,
    /// True when the expected relation (strict increase or equality) holds.
    pub holds: bool,
}

/// Verdict of [`demand_monotonicity_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityVerdict {
    pub holds: bool,
    pub rows: Vec<MonotonicityRow>,
}

/// Checks that raising the upfront payment from `l` to `l2` strictly raises demand below the
/// new break-even state and leaves it unchanged above it. With `gamma = 0` equality is
/// expected everywhere.
pub fn demand_monotonicity_check(p: f64, gamma: f64, l: f64, l2: f64, states: &[f64]) -> Result<MonotonicityVerdict> {
    if !(0.0 <= l && l < l2) {
        return domain("upfront payments must satisfy 0 <= L < L'");
    }
    let threshold = break_even_state(p, l2);
    let mut rows = Vec::with_capacity(states.len());
    for &s in states {
        if !(0.0..=1.0).contains(&s) {
            return domain("states must lie in [0, 1]");
        }
        let q_low = rationalizing_demand(s, p, l, gamma)?;
        let q_high = rationalizing_demand(s, p, l2, gamma)?;
        let holds = if gamma > 0.0 && s < threshold { q_low < q_high } else { q_low == q_high };
        rows.push(MonotonicityRow { s, q_low, q_high, holds });
    }
    Ok(MonotonicityVerdict { holds: rows.iter().all(|r| r.holds), rows })
}

fn demand_for(inst: &TariffInstance, consumer: Consumer, s: f64) -> f64 {
    let gamma = if consumer == Consumer::Classical { 0.0 } else { inst.gamma };
    let shifted = s + gamma * adopted_rationale(s, inst.p, inst.l);
    shifted * shifted / (inst.p * inst.p)
}

/// Expected material utility under the demand the consumer will actually choose.
pub fn expected_material_utility(inst: &TariffInstance, consumer: Consumer) -> Result<f64> {
    inst.validate()?;
    check_price(inst.p)?;
    let kink = [break_even_state(inst.p, inst.l)];
    let surplus = inst.distribution.integrate(
        |s| {
            let q = demand_for(inst, consumer, s);
            2.0 * s * q.sqrt() - inst.p * q
        },
        0.0,
        1.0,
        &kink,
    );
    Ok(surplus - inst.l)
}

/// Expected surplus the consumer forecasts when deciding whether to accept.
pub fn participation_value(inst: &TariffInstance, consumer: Consumer) -> Result<f64> {
    match consumer {
        Consumer::Classical | Consumer::Naif => {
            inst.validate()?;
            check_price(inst.p)?;
            Ok(inst.distribution.second_moment() / inst.p - inst.l)
        }
        Consumer::Sophisticate => expected_material_utility(inst, consumer),
    }
}

/// Expected profit `int (p - c) q dF + L` if the consumer accepts, and 0 otherwise.
pub fn expected_profit(inst: &TariffInstance, consumer: Consumer) -> Result<f64> {
    if participation_value(inst, consumer)? < -PARTICIPATION_TOLERANCE {
        return Ok(0.0);
    }
    let kink = [break_even_state(inst.p, inst.l)];
    let sales = inst.distribution.integrate(|s| demand_for(inst, consumer, s), 0.0, 1.0, &kink);
    Ok((inst.p - inst.c) * sales + inst.l)
}

/// `int_0^k 2 gamma s (k - s) + gamma^2 (k - s)^2 dF(s)`.
fn distortion_mass(dist: &TasteShockDistribution, gamma: f64, k: f64) -> f64 {
    dist.integrate(|s| 2.0 * gamma * s * (k - s) + gamma * gamma * (k - s) * (k - s), 0.0, k, &[])
}

fn solution(consumer: Consumer, c: f64, gamma: f64, dist: &TasteShockDistribution, p: f64, k: f64, lambda: f64) -> Result<TariffSolution> {
    let l = k * k / p;
    let inst = TariffInstance::new(p, l, c, gamma, dist.clone())?;
    let slack = participation_value(&inst, consumer)?;
    if slack.abs() > 1e-8 {
        return Err(Error::Precondition(format!("participation constraint does not bind: slack {slack}")));
    }
    Ok(TariffSolution {
        consumer,
        c,
        gamma,
        p_star: p,
        l_star: l,
        break_even: k,
        lambda,
        expected_profit: expected_profit(&inst, consumer)?,
        consumer_material_utility: expected_material_utility(&inst, consumer)?,
    })
}

/// Marginal-cost pricing with the upfront payment extracting the classical surplus.
pub fn optimal_tariff_classical(c: f64, dist: &TasteShockDistribution) -> Result<TariffSolution> {
    check_gamma_cost(c, 0.0)?;
    dist.validate()?;
    let m = dist.second_moment();
    solution(Consumer::Classical, c, 0.0, dist, c, m.sqrt(), 0.0)
}

/// Profit-maximizing contract for a consumer who does not foresee rationalization.
pub fn optimal_tariff_naif(c: f64, gamma: f64, dist: &TasteShockDistribution) -> Result<TariffSolution> {
    check_gamma_cost(c, gamma)?;
    dist.validate()?;
    let m = dist.second_moment();
    let s_bar = m.sqrt();
    let lambda = distortion_mass(dist, gamma, s_bar);
    let p = c * (m + lambda) / (m + 0.5 * lambda);
    // First-order condition of the reduced profit in p.
    let foc = (-1.0 / (p * p) + 2.0 * c / (p * p * p)) * (m + lambda) - m / (p * p);
    if foc.abs() > 1e-8 {
        return Err(Error::Precondition(format!("first-order condition residual {foc}")));
    }
    solution(Consumer::Naif, c, gamma, dist, p, s_bar, lambda)
}

/// Left side of the binding sophisticate participation constraint in terms of the break-even state.
fn soph_constraint(dist: &TasteShockDistribution, m: f64, gamma: f64, k: f64) -> f64 {
    m - dist.integrate(|s| gamma * gamma * (k - s) * (k - s), 0.0, k, &[]) - k * k
}

/// Break-even state of the sophisticate's binding contract, by bisection on `[0, sqrt(m)]`.
pub fn sophisticate_break_even(gamma: f64, dist: &TasteShockDistribution) -> Result<f64> {
    let m = dist.second_moment();
    let (mut lo, mut hi) = (0.0, m.sqrt());
    let (f_lo, f_hi) = (soph_constraint(dist, m, gamma, lo), soph_constraint(dist, m, gamma, hi));
    if !(f_lo > 0.0 && f_hi <= 1e-15) {
        return Err(Error::Bracket(format!("no sign change on [0, {hi}]: {f_lo}, {f_hi}")));
    }
    // Bisect to machine precision; the lower end keeps the constraint satisfied.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if soph_constraint(dist, m, gamma, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Profit-maximizing contract for a consumer who foresees rationalization.
pub fn optimal_tariff_sophisticate(c: f64, gamma: f64, dist: &TasteShockDistribution) -> Result<TariffSolution> {
    check_gamma_cost(c, gamma)?;
    dist.validate()?;
    let m = dist.second_moment();
    let k = sophisticate_break_even(gamma, dist)?;
    let lambda = distortion_mass(dist, gamma, k);
    let cross = dist.integrate(|s| gamma * s * (k - s), 0.0, k, &[]);
    let p = c * (m + lambda) / (m + cross);
    if gamma > 0.0 && p <= c {
        return Err(Error::Precondition(format!("price {p} does not exceed cost {c}")));
    }
    let loss = dist.integrate(|s| gamma * gamma * (k - s) * (k - s), 0.0, k, &[]);
    let foc = (-1.0 / (p * p) + 2.0 * c / (p * p * p)) * (m + lambda) - (m - loss) / (p * p);
    if foc.abs() > 1e-8 {
        return Err(Error::Precondition(format!("first-order condition residual {foc}")));
    }
    solution(Consumer::Sophisticate, c, gamma, dist, p, k, lambda)
}

/// Dispatches to the optimal contract for `consumer`.
pub fn optimal_tariff(consumer: Consumer, c: f64, gamma: f64, dist: &TasteShockDistribution) -> Result<TariffSolution> {
    match consumer {
        Consumer::Classical => optimal_tariff_classical(c, dist),
        Consumer::Naif => optimal_tariff_naif(c, gamma, dist),
        Consumer::Sophisticate => optimal_tariff_sophisticate(c, gamma, dist),
    }
}

/// Header of the demand-curve table.
pub const DEMAND_CURVE_HEADER: [&str; 4] = ["s", "q_classical", "q_rationalizing", "theta_adopted"];

/// One row of the demand-curve table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandRow {
    pub s: f64,
    pub q_classical: f64,
    pub q_rationalizing: f64,
    pub theta_adopted: f64,
}

/// Classical and rationalizing demand with the adopted rationale at each state.
pub fn demand_curve(inst: &TariffInstance, states: &[f64]) -> Result<Vec<DemandRow>> {
    inst.validate()?;
    states
        .iter()
        .map(|&s| {
            Ok(DemandRow {
                s,
                q_classical: classical_demand(s, inst.p, inst.l)?,
                q_rationalizing: rationalizing_demand(s, inst.p, inst.l, inst.gamma)?,
                theta_adopted: adopted_rationale(s, inst.p, inst.l),
            })
        })
        .collect()
}
