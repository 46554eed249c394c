//! Seeded generator of lattice instances that satisfy the order hypotheses by construction.
//!
//! Payoffs are nonnegative combinations of products of nonnegative nondecreasing
//! functions plus terms that depend on a single argument group. All random numbers are
//! multiples of 1/8 and gamma is a multiple of 1/32, so sums and products are exact and
//! ties in the payoff table are genuine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FiniteLattice, FinitePoset, LatticeInstance};
use crate::error::{Error, Result};

/// Shape of the first-action poset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum A1Shape {
    Chain(usize),
    /// The 2 x 2 grid with componentwise order.
    Grid2x2,
}

/// Shape of the second-action lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum A2Shape {
    Chain(usize),
    Grid(usize, usize),
}

/// How the payoff table is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// Sum of products `f(a1) g(a2) h(theta)` plus single-group terms.
    SumOfMonotoneProducts,
    /// No interaction between `a1` and `a2`: `phi1(a1, theta) + phi2(a2, theta)` plus single-group terms.
    Separable,
}

/// Sizes of a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeParams {
    pub a1: A1Shape,
    pub a2: A2Shape,
    pub theta_len: usize,
    pub states: usize,
    /// Number of product terms.
    pub terms: usize,
}

impl SizeParams {
    /// Draws sizes within the sweep limits: `|A1| <= 4`, `|A2| <= 6`, `|Theta| <= 5`, one or two states.
    pub fn sample(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5157_e5a1);
        let a1 = if rng.random_bool(0.25) { A1Shape::Grid2x2 } else { A1Shape::Chain(rng.random_range(1..=4)) };
        let a2 = if rng.random_bool(0.3) { A2Shape::Grid(2, 3) } else { A2Shape::Chain(rng.random_range(1..=6)) };
        Self {
            a1,
            a2,
            theta_len: rng.random_range(1..=5),
            states: rng.random_range(1..=2),
            terms: rng.random_range(1..=3),
        }
    }

    /// Compact description such as `c3xg2x3xt4xs2`.
    pub fn describe(&self) -> String {
        let a1 = match self.a1 {
            A1Shape::Chain(n) => format!("c{n}"),
            A1Shape::Grid2x2 => "g2x2".into(),
        };
        let a2 = match self.a2 {
            A2Shape::Chain(n) => format!("c{n}"),
            A2Shape::Grid(r, c) => format!("g{r}x{c}"),
        };
        format!("{a1}x{a2}xt{}xs{}", self.theta_len, self.states)
    }
}

fn eighths(rng: &mut ChaCha8Rng, max: u32) -> f64 {
    rng.random_range(0..=8 * max) as f64 / 8.0
}

/// Nonnegative nondecreasing sequence of length `n` with some flat steps.
fn monotone(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut level = eighths(rng, 1);
    for _ in 0..n {
        out.push(level);
        if !rng.random_bool(0.3) {
            level += eighths(rng, 2);
        }
    }
    out
}

/// Two nondecreasing index sequences `lo <= hi` over `ranks` ranks inside `0..n`.
fn monotone_bounds(rng: &mut ChaCha8Rng, ranks: usize, n: usize) -> Vec<(usize, usize)> {
    if rng.random_bool(0.25) {
        return vec![(0, n - 1); ranks];
    }
    let mut draw = || {
        let mut v: Vec<usize> = (0..ranks).map(|_| rng.random_range(0..n)).collect();
        v.sort_unstable();
        v
    };
    let (x, y) = (draw(), draw());
    x.iter().zip(&y).map(|(&a, &b)| (a.min(b), a.max(b))).collect()
}

fn build_a1(shape: A1Shape) -> Result<(FinitePoset, Vec<usize>)> {
    match shape {
        A1Shape::Chain(n) => Ok((FinitePoset::chain(n)?, (0..n).collect())),
        A1Shape::Grid2x2 => {
            let chain = FinitePoset::chain(2)?;
            Ok((FinitePoset::product(&chain, &chain)?, vec![0, 1, 1, 2]))
        }
    }
}

/// Validates sizes and returns the pieces shared by all constructions.
struct Skeleton {
    a1: FinitePoset,
    a1_rank: Vec<usize>,
    a2: FiniteLattice,
    /// Coordinates of each lattice element; chains use `(x, 0)`.
    coords: Vec<(usize, usize)>,
    dims: (usize, usize),
}

fn skeleton(sizes: &SizeParams) -> Result<Skeleton> {
    let bad = |m: &str| Err(Error::Domain(m.to_string()));
    match sizes.a1 {
        A1Shape::Chain(0) => return bad("A1 chain needs at least one element"),
        _ => {}
    }
    let dims = match sizes.a2 {
        A2Shape::Chain(n) if n >= 1 => (n, 1),
        A2Shape::Grid(r, c) if r >= 1 && c >= 1 => (r, c),
        _ => return bad("A2 needs at least one element"),
    };
    if sizes.theta_len == 0 || sizes.states == 0 {
        return bad("theta chain and state list must be nonempty");
    }
    let (a1, a1_rank) = build_a1(sizes.a1)?;
    let a2 = match sizes.a2 {
        A2Shape::Chain(n) => FiniteLattice::chain(n)?,
        A2Shape::Grid(r, c) => FiniteLattice::grid(r, c)?,
    };
    let coords = (0..dims.0 * dims.1).map(|i| (i / dims.1, i % dims.1)).collect();
    Ok(Skeleton { a1, a1_rank, a2, coords, dims })
}

/// Generates a deterministic instance from `seed`.
pub fn random_instance(seed: u64, sizes: &SizeParams, construction: Construction) -> Result<LatticeInstance> {
    let sk = skeleton(sizes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n1, n2, nt, ns) = (sk.a1.len(), sk.a2.len(), sizes.theta_len, sizes.states);
    let ranks = sk.a1_rank.iter().max().map_or(1, |r| r + 1);

    let rows = monotone_bounds(&mut rng, ranks, sk.dims.0);
    let cols = monotone_bounds(&mut rng, ranks, sk.dims.1);
    let menus: Vec<Vec<usize>> = (0..n1)
        .map(|a1| {
            let r = sk.a1_rank[a1];
            (0..n2)
                .filter(|&x| {
                    let (i, j) = sk.coords[x];
                    (rows[r].0..=rows[r].1).contains(&i) && (cols[r].0..=cols[r].1).contains(&j)
                })
                .collect()
        })
        .collect();

    let mut theta = Vec::with_capacity(nt);
    let mut level = 0.0;
    for _ in 0..nt {
        theta.push(level);
        level += 0.125 + eighths(&mut rng, 1);
    }
    let theta_star = rng.random_range(0..nt);

    // First-action factor nondecreasing on the poset: a sum of per-coordinate sequences.
    let a1_factor = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        match sizes.a1 {
            A1Shape::Chain(n) => monotone(rng, n),
            A1Shape::Grid2x2 => {
                let (p, q) = (monotone(rng, 2), monotone(rng, 2));
                (0..4).map(|i| p[i / 2] + q[i % 2]).collect()
            }
        }
    };
    // Second-action factor: product of per-coordinate sequences, so it is supermodular.
    let a2_factor = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let (p, q) = (monotone(rng, sk.dims.0), monotone(rng, sk.dims.1));
        sk.coords.iter().map(|&(i, j)| p[i] * q[j]).collect()
    };

    let mut w = vec![0.0; n1 * n2 * nt * ns];
    let idx = |a1: usize, a2: usize, t: usize, s: usize| ((a1 * n2 + a2) * nt + t) * ns + s;
    match construction {
        Construction::SumOfMonotoneProducts => {
            for _ in 0..sizes.terms.max(1) {
                let c = eighths(&mut rng, 2);
                let f = a1_factor(&mut rng);
                let g = a2_factor(&mut rng);
                let h = monotone(&mut rng, nt);
                for a1 in 0..n1 {
                    for a2 in 0..n2 {
                        for t in 0..nt {
                            for s in 0..ns {
                                w[idx(a1, a2, t, s)] += c * f[a1] * g[a2] * h[t];
                            }
                        }
                    }
                }
            }
        }
        Construction::Separable => {
            for _ in 0..sizes.terms.max(1) {
                let (c, d) = (eighths(&mut rng, 2), eighths(&mut rng, 2));
                let (f, h1) = (a1_factor(&mut rng), monotone(&mut rng, nt));
                let (g, h2) = (a2_factor(&mut rng), monotone(&mut rng, nt));
                for a1 in 0..n1 {
                    for a2 in 0..n2 {
                        for t in 0..nt {
                            for s in 0..ns {
                                w[idx(a1, a2, t, s)] += c * f[a1] * h1[t] + d * g[a2] * h2[t];
                            }
                        }
                    }
                }
            }
        }
    }
    // Single-group terms: any function of (a1, s), a modular function of (a2, s), any function of (theta, s).
    for s in 0..ns {
        let m1: Vec<f64> = (0..n1).map(|_| eighths(&mut rng, 8) - 4.0).collect();
        let p: Vec<f64> = (0..sk.dims.0).map(|_| eighths(&mut rng, 8) - 4.0).collect();
        let q: Vec<f64> = (0..sk.dims.1).map(|_| eighths(&mut rng, 8) - 4.0).collect();
        let m3: Vec<f64> = (0..nt).map(|_| eighths(&mut rng, 4) - 2.0).collect();
        for a1 in 0..n1 {
            for a2 in 0..n2 {
                let (i, j) = sk.coords[a2];
                for t in 0..nt {
                    w[idx(a1, a2, t, s)] += m1[a1] + p[i] + q[j] + m3[t];
                }
            }
        }
    }
    let gamma = rng.random_range(0..=28) as f64 / 32.0;
    let states = (0..ns).map(|s| format!("s{s}")).collect();
    LatticeInstance::new(sk.a1, sk.a2, menus, theta, theta_star, states, w, gamma)
}

/// An instance that violates increasing differences: `w = -theta * a1 * a2` on chains,
/// with constant menus. Used to exercise the failure path of property checks.
pub fn corrupted_instance(seed: u64) -> Result<LatticeInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n1, n2, nt) = (rng.random_range(2..=4), rng.random_range(2..=6), rng.random_range(2..=5));
    let theta: Vec<f64> = (1..=nt).map(|t| t as f64).collect();
    let mut w = Vec::with_capacity(n1 * n2 * nt);
    for a1 in 0..n1 {
        for a2 in 0..n2 {
            for &th in &theta {
                w.push(-th * a1 as f64 * a2 as f64);
            }
        }
    }
    LatticeInstance::new(
        FinitePoset::chain(n1)?,
        FiniteLattice::chain(n2)?,
        vec![(0..n2).collect(); n1],
        theta,
        0,
        vec!["s0".into()],
        w,
        0.5,
    )
}
