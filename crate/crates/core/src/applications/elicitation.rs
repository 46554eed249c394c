//! Repeated belief reports under quadratic scoring with MLRP-ordered priors.
//!
//! The agent reports `a1`, observes a signal `x`, then reports `a2`. Each report
//! earns `phi(a, theta, x) = -sum_y (a - y)^2 h_theta(y | x)`, and the rationales
//! are the priors `h_theta`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core_model::TIE_TOLERANCE;
use crate::error::{domain, Result};

/// CSV header of an elicitation report.
pub const ELICITATION_HEADER: &str = "run,seed,gamma,true_theta,y,x,a1,a2,theta_bar,classical_mean,sandwich";

/// Outcome support, MLRP-ordered priors and the signal likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MLRPFamily {
    /// Support of `Y`, strictly increasing.
    pub support: Vec<f64>,
    /// Rationale labels, strictly increasing.
    pub theta: Vec<f64>,
    /// Index of the material prior in `theta`.
    pub theta_star: usize,
    /// `priors[theta][y]`.
    pub priors: Vec<Vec<f64>>,
    pub signals: Vec<String>,
    /// `likelihood[y][x] = g(x | y)`.
    pub likelihood: Vec<Vec<f64>>,
}

const PROBABILITY_TOLERANCE: f64 = 1e-9;

fn is_probability_vector(p: &[f64]) -> bool {
    p.iter().all(|v| v.is_finite() && *v >= 0.0) && (p.iter().sum::<f64>() - 1.0).abs() <= PROBABILITY_TOLERANCE
}

impl MLRPFamily {
    pub fn new(
        support: Vec<f64>,
        theta: Vec<f64>,
        theta_star: usize,
        priors: Vec<Vec<f64>>,
        signals: Vec<String>,
        likelihood: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let family = Self { support, theta, theta_star, priors, signals, likelihood };
        family.validate()?;
        Ok(family)
    }

    /// Bernoulli outcome with `h_theta(1) = theta` for `theta` in {0.01, ..., 0.99},
    /// `theta* = 0.5` and a symmetric binary signal of accuracy 0.7.
    pub fn default_bernoulli() -> Self {
        Self::bernoulli((1..=99).map(|i| i as f64 / 100.0).collect(), 49, 0.7)
            .expect("the default Bernoulli family is valid")
    }

    /// Bernoulli outcome with `h_theta(1) = theta` and a symmetric binary signal.
    pub fn bernoulli(theta: Vec<f64>, theta_star: usize, accuracy: f64) -> Result<Self> {
        if theta.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
            return domain("Bernoulli rationales must lie strictly inside (0, 1)");
        }
        if !(accuracy > 0.0 && accuracy < 1.0) {
            return domain("signal accuracy must lie strictly inside (0, 1)");
        }
        let priors = theta.iter().map(|&t| vec![1.0 - t, t]).collect();
        Self::new(
            vec![0.0, 1.0],
            theta,
            theta_star,
            priors,
            vec!["0".into(), "1".into()],
            vec![vec![accuracy, 1.0 - accuracy], vec![1.0 - accuracy, accuracy]],
        )
    }

    /// Checks shapes, full support, strict MLRP on adjacent rationales and the likelihood rows.
    pub fn validate(&self) -> Result<()> {
        let ny = self.support.len();
        if ny < 2 || self.support.iter().any(|y| !y.is_finite()) || self.support.windows(2).any(|w| w[0] >= w[1]) {
            return domain("support must hold at least two finite, strictly increasing values");
        }
        if self.theta.is_empty() || self.theta.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("theta labels must be nonempty and strictly increasing");
        }
        if self.theta_star >= self.theta.len() {
            return domain("theta_star must index the rationales");
        }
        if self.priors.len() != self.theta.len() {
            return domain("one prior is required per rationale");
        }
        for (k, h) in self.priors.iter().enumerate() {
            if h.len() != ny || !is_probability_vector(h) {
                return domain(format!("prior {k} is not a probability vector on the support"));
            }
            if h.iter().any(|p| *p <= 0.0) {
                return domain(format!("prior {k} lacks full support"));
            }
        }
        for k in 1..self.priors.len() {
            let (hi, lo) = (&self.priors[k], &self.priors[k - 1]);
            for y in 1..ny {
                for yl in 0..y {
                    if !(hi[y] * lo[yl] > lo[y] * hi[yl]) {
                        return domain(format!("priors {} and {k} violate strict MLRP at outcomes {yl} < {y}", k - 1));
                    }
                }
            }
        }
        if self.signals.is_empty() || self.likelihood.len() != ny {
            return domain("likelihood must have one row per outcome and a nonempty signal set");
        }
        for (y, g) in self.likelihood.iter().enumerate() {
            if g.len() != self.signals.len() || !is_probability_vector(g) {
                return domain(format!("likelihood row {y} is not a probability vector on the signals"));
            }
        }
        Ok(())
    }

    /// Prior mean of `Y` under `theta*`.
    pub fn material_prior_mean(&self) -> f64 {
        self.support.iter().zip(&self.priors[self.theta_star]).map(|(y, p)| y * p).sum()
    }
}

/// Posterior probabilities over the support and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub probs: Vec<f64>,
    pub mean: f64,
}

/// Bayes update of prior `theta` on signal index `x`.
pub fn posterior(family: &MLRPFamily, theta: usize, x: usize) -> Result<Posterior> {
    if theta >= family.theta.len() {
        return domain(format!("rationale index {theta} out of range"));
    }
    if x >= family.signals.len() {
        return domain(format!("signal index {x} out of range"));
    }
    let joint: Vec<f64> = family.priors[theta].iter().zip(&family.likelihood).map(|(h, g)| h * g[x]).collect();
    let marginal: f64 = joint.iter().sum();
    if marginal <= 0.0 {
        return domain(format!("signal `{}` has zero probability", family.signals[x]));
    }
    let probs: Vec<f64> = joint.iter().map(|j| j / marginal).collect();
    let mean = family.support.iter().zip(&probs).map(|(y, p)| y * p).sum();
    Ok(Posterior { probs, mean })
}

/// First `(theta, theta', x)` with `theta > theta'` whose posteriors fail first-order
/// stochastic dominance, comparing cumulative sums.
pub fn fosd_violation(family: &MLRPFamily) -> Result<Option<(usize, usize, usize)>> {
    for x in 0..family.signals.len() {
        let cdfs: Vec<Vec<f64>> = (0..family.theta.len())
            .map(|k| {
                let probs = posterior(family, k, x)?.probs;
                Ok(probs
                    .iter()
                    .scan(0.0, |acc, p| {
                        *acc += p;
                        Some(*acc)
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        for hi in 0..cdfs.len() {
            for lo in 0..hi {
                if cdfs[hi].iter().zip(&cdfs[lo]).any(|(a, b)| *a > b + 1e-12) {
                    return Ok(Some((hi, lo, x)));
                }
            }
        }
    }
    Ok(None)
}

/// Report grid and first-report settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ElicitationConfig {
    /// Points of the uniform report grid over `[min Y, max Y]`.
    pub report_points: usize,
    /// First report; `None` uses the classical first report under `theta*`.
    /// Supplied values are snapped to the nearest grid point.
    pub a1: Option<f64>,
}

impl Default for ElicitationConfig {
    fn default() -> Self {
        Self { report_points: 201, a1: None }
    }
}

fn report_grid(family: &MLRPFamily, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return domain("the report grid needs at least two points");
    }
    let (lo, hi) = (family.support[0], family.support[family.support.len() - 1]);
    Ok((0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect())
}

fn quadratic_score(family: &MLRPFamily, probs: &[f64], a: f64) -> f64 {
    -family.support.iter().zip(probs).map(|(y, p)| (a - y).powi(2) * p).sum::<f64>()
}

fn argmax_set(values: &[f64]) -> Vec<usize> {
    let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (0..values.len()).filter(|&i| values[i] >= best - TIE_TOLERANCE).collect()
}

/// The second report and its diagnostics for a fixed first report and signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondReport {
    /// First report after snapping to the grid.
    pub a1: f64,
    pub a2: f64,
    /// Label of the adopted prior.
    pub theta_bar: f64,
    /// Bayes posterior mean under `theta*`.
    pub classical_mean: f64,
    /// Grid report maximizing the material score.
    pub classical_report: f64,
    /// Whether `a1` is a grid optimum of the score under some rationale.
    pub a1_rationalizable: bool,
    /// Whether `a2` lies between the classical report and `a1`; `None` when `a1` is
    /// not rationalizable, where no such claim is made.
    pub sandwich: Option<bool>,
}

/// Maximizes `(1 - g)(phi(a1, theta*) + phi(a2, theta*)) + g (phi(a1, theta) + phi(a2, theta) - 2 max phi(., theta))`
/// over the report grid and the rationales, lowest grid index first among ties.
pub fn elicitation_report(
    family: &MLRPFamily,
    gamma: f64,
    a1: f64,
    x: usize,
    config: &ElicitationConfig,
) -> Result<SecondReport> {
    family.validate()?;
    if !(0.0..1.0).contains(&gamma) {
        return domain(format!("gamma must lie in [0, 1), got {gamma}"));
    }
    let grid = report_grid(family, config.report_points)?;
    let (lo, hi) = (grid[0], grid[grid.len() - 1]);
    if !(lo..=hi).contains(&a1) {
        return domain(format!("first report {a1} lies outside [{lo}, {hi}]"));
    }
    let a1 = grid[(0..grid.len()).min_by(|&i, &j| (grid[i] - a1).abs().total_cmp(&(grid[j] - a1).abs())).unwrap_or(0)];
    let posteriors = (0..family.theta.len()).map(|k| posterior(family, k, x)).collect::<Result<Vec<_>>>()?;
    let scores: Vec<Vec<f64>> =
        posteriors.iter().map(|p| grid.iter().map(|&a| quadratic_score(family, &p.probs, a)).collect()).collect();
    let first: Vec<f64> = posteriors.iter().map(|p| quadratic_score(family, &p.probs, a1)).collect();
    let stage_max: Vec<f64> = scores.iter().map(|row| row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)).collect();
    let star = family.theta_star;
    let mut best_theta = Vec::with_capacity(grid.len());
    let totals: Vec<f64> = (0..grid.len())
        .map(|j| {
            let material = (1.0 - gamma) * (first[star] + scores[star][j]);
            let row: Vec<f64> = (0..scores.len())
                .map(|k| material + gamma * (first[k] + scores[k][j] - 2.0 * stage_max[k]))
                .collect();
            best_theta.push(argmax_set(&row)[0]);
            row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let j = argmax_set(&totals)[0];
    let a2 = grid[j];
    let classical_report = grid[argmax_set(&scores[star])[0]];
    let a1_rationalizable = (0..scores.len()).any(|k| first[k] >= stage_max[k] - TIE_TOLERANCE);
    let sandwich = a1_rationalizable.then(|| {
        let (lo, hi) = if a1 <= classical_report { (a1, classical_report) } else { (classical_report, a1) };
        lo <= a2 && a2 <= hi
    });
    Ok(SecondReport {
        a1,
        a2,
        theta_bar: family.theta[best_theta[j]],
        classical_mean: posteriors[star].mean,
        classical_report,
        a1_rationalizable,
        sandwich,
    })
}

/// One simulated experiment: outcome and signal drawn under `true_theta`, then both reports.
#[derive(Debug, Clone, PartialEq)]
pub struct ElicitationRun {
    pub seed: u64,
    pub gamma: f64,
    pub true_theta: f64,
    pub y: f64,
    /// Signal index.
    pub x: usize,
    pub report: SecondReport,
}

impl ElicitationRun {
    /// One CSV row matching [`ELICITATION_HEADER`].
    pub fn csv_row(&self, run: usize, family: &MLRPFamily) -> String {
        let r = &self.report;
        let sandwich = match r.sandwich {
            Some(true) => "holds",
            Some(false) => "fails",
            None => "n/a",
        };
        format!(
            "{run},{},{},{},{},{},{},{},{},{},{sandwich}",
            self.seed, self.gamma, self.true_theta, self.y, family.signals[self.x], r.a1, r.a2, r.theta_bar, r.classical_mean
        )
    }
}

/// [`elicitation_simulate_with`] on the default 201-point grid and classical first report.
pub fn elicitation_simulate(family: &MLRPFamily, gamma: f64, true_theta: usize, seed: u64) -> Result<ElicitationRun> {
    elicitation_simulate_with(family, gamma, true_theta, seed, &ElicitationConfig::default())
}

/// Draws `Y ~ h_{true_theta}` and `X ~ g(. | Y)` from `seed`, then solves both reports.
pub fn elicitation_simulate_with(
    family: &MLRPFamily,
    gamma: f64,
    true_theta: usize,
    seed: u64,
    config: &ElicitationConfig,
) -> Result<ElicitationRun> {
    family.validate()?;
    if true_theta >= family.theta.len() {
        return domain(format!("data-generating rationale index {true_theta} out of range"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = WeightedIndex::new(&family.priors[true_theta])
        .map_err(|e| crate::Error::Domain(e.to_string()))?
        .sample(&mut rng);
    let x = WeightedIndex::new(&family.likelihood[y])
        .map_err(|e| crate::Error::Domain(e.to_string()))?
        .sample(&mut rng);
    let a1 = match config.a1 {
        Some(a1) => a1,
        None => {
            let grid = report_grid(family, config.report_points)?;
            let prior = &family.priors[family.theta_star];
            let scores: Vec<f64> = grid.iter().map(|&a| quadratic_score(family, prior, a)).collect();
            grid[argmax_set(&scores)[0]]
        }
    };
    let report = elicitation_report(family, gamma, a1, x, config)?;
    Ok(ElicitationRun { seed, gamma, true_theta: family.theta[true_theta], y: family.support[y], x, report })
}
