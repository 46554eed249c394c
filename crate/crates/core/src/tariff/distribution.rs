//! Taste-shock distributions on `[0, 1]`.

use serde::{Deserialize, Serialize};

use super::quadrature::integrate_split;
use crate::error::{domain, Result};

/// Strictly increasing, atomless CDF on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TasteShockDistribution {
    Uniform01,
    /// `F(s) = s^k` with `k >= 1`.
    Power { k: f64 },
    /// Piecewise-linear CDF through `(s, F(s))` knots from `(0, 0)` to `(1, 1)`.
    QuantileTable { knots: Vec<(f64, f64)> },
}

impl TasteShockDistribution {
    pub fn uniform01() -> Self {
        Self::Uniform01
    }

    pub fn power(k: f64) -> Result<Self> {
        let d = Self::Power { k };
        d.validate()?;
        Ok(d)
    }

    pub fn quantile_table(knots: Vec<(f64, f64)>) -> Result<Self> {
        let d = Self::QuantileTable { knots };
        d.validate()?;
        Ok(d)
    }

    /// Checks the CDF invariants. Deserialized values should be validated before use.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Uniform01 => Ok(()),
            Self::Power { k } => {
                if !(k.is_finite() && *k >= 1.0) {
                    return domain("power distributions need a finite exponent k >= 1");
                }
                Ok(())
            }
            Self::QuantileTable { knots } => {
                if knots.len() < 2 {
                    return domain("a quantile table needs at least two knots");
                }
                let (first, last) = (knots[0], knots[knots.len() - 1]);
                if first != (0.0, 0.0) || (last.0 - 1.0).abs() > 1e-12 || (last.1 - 1.0).abs() > 1e-12 {
                    return domain("a quantile table must run from (0, 0) to (1, 1)");
                }
                if knots.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
                    return domain("quantile table knots must be strictly increasing in both coordinates");
                }
                Ok(())
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Uniform01 => "uniform01".into(),
            Self::Power { k } => format!("power({k})"),
            Self::QuantileTable { knots } => format!("quantile_table({} knots)", knots.len()),
        }
    }

    pub fn cdf(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            Self::Uniform01 => s,
            Self::Power { k } => s.powf(*k),
            Self::QuantileTable { knots } => {
                let i = knots.partition_point(|kn| kn.0 <= s).clamp(1, knots.len() - 1);
                let (a, b) = (knots[i - 1], knots[i]);
                a.1 + (b.1 - a.1) * (s - a.0) / (b.0 - a.0)
            }
        }
    }

    pub fn density(&self, s: f64) -> f64 {
        if !(0.0..=1.0).contains(&s) {
            return 0.0;
        }
        match self {
            Self::Uniform01 => 1.0,
            Self::Power { k } => k * s.powf(k - 1.0),
            Self::QuantileTable { knots } => {
                let i = knots.partition_point(|kn| kn.0 <= s).clamp(1, knots.len() - 1);
                let (a, b) = (knots[i - 1], knots[i]);
                (b.1 - a.1) / (b.0 - a.0)
            }
        }
    }

    fn breaks(&self) -> Vec<f64> {
        match self {
            Self::QuantileTable { knots } => knots.iter().map(|k| k.0).collect(),
            _ => Vec::new(),
        }
    }

    /// `int_a^b g(s) dF(s)`, split at `kinks` and at the density's breakpoints.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G, a: f64, b: f64, kinks: &[f64]) -> f64 {
        self.integrate_panels(g, a, b, kinks, 1)
    }

    /// As [`integrate`](Self::integrate) with `panels` panels per smooth piece.
    pub fn integrate_panels<G: Fn(f64) -> f64>(&self, g: G, a: f64, b: f64, kinks: &[f64], panels: usize) -> f64 {
        let (a, b) = (a.max(0.0), b.min(1.0));
        let mut cuts = self.breaks();
        cuts.extend_from_slice(kinks);
        integrate_split(|s| g(s) * self.density(s), a, b, &cuts, panels)
    }

    /// `int_0^1 s^2 dF(s)`.
    pub fn second_moment(&self) -> f64 {
        self.integrate(|s| s * s, 0.0, 1.0, &[])
    }
}
