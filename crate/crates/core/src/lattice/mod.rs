//! Finite posets and lattices, order-theoretic predicates, and a brute-force
//! checker for the monotone distortion of second actions.

mod generator;
mod instance;
mod theorem;

pub use generator::{
    corrupted_instance, random_instance, A1Shape, A2Shape, Construction, SizeParams,
};
pub use instance::{
    has_increasing_differences, is_supermodular_in_a2_theta, is_supermodular_product,
    is_supermodular_table, menu_monotone, LatticeInstance, OrderViolation, ORDER_TOLERANCE,
};
pub use theorem::{
    check_theorem2, Direction, Theorem2Checker, Theorem2Verdict, Theorem2Witness,
};

use crate::error::{Error, Result};

/// A finite partially ordered set given by its order relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePoset {
    labels: Vec<String>,
    leq: Vec<Vec<bool>>,
}

impl FinitePoset {
    /// Validates reflexivity, antisymmetry and transitivity of `leq`.
    pub fn new(labels: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Domain("a poset needs at least one element".into()));
        }
        if leq.len() != n || leq.iter().any(|r| r.len() != n) {
            return Err(Error::Domain("order table must be square".into()));
        }
        for i in 0..n {
            if !leq[i][i] {
                return Err(Error::Domain(format!("order is not reflexive at {}", labels[i])));
            }
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(Error::Domain("order is not antisymmetric".into()));
                }
                for k in 0..n {
                    if leq[i][j] && leq[j][k] && !leq[i][k] {
                        return Err(Error::Domain("order is not transitive".into()));
                    }
                }
            }
        }
        Ok(Self { labels, leq })
    }

    /// The chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Result<Self> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let leq = (0..n).map(|i| (0..n).map(|j| i <= j).collect()).collect();
        Self::new(labels, leq)
    }

    /// Componentwise order on the product of two posets; element `(i, j)` has index `i * |b| + j`.
    pub fn product(a: &FinitePoset, b: &FinitePoset) -> Result<Self> {
        let (n, m) = (a.len(), b.len());
        let mut labels = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                labels.push(format!("({},{})", a.labels[i], b.labels[j]));
            }
        }
        let leq = (0..n * m)
            .map(|x| (0..n * m).map(|y| a.leq[x / m][y / m] && b.leq[x % m][y % m]).collect())
            .collect();
        Self::new(labels, leq)
    }

    /// The same set with the order reversed.
    pub fn dual(&self) -> Self {
        let n = self.len();
        let leq = (0..n).map(|i| (0..n).map(|j| self.leq[j][i]).collect()).collect();
        Self { labels: self.labels.clone(), leq }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.leq[i][j] || self.leq[j][i]
    }
}

/// A finite lattice: a poset with precomputed join and meet tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteLattice {
    order: FinitePoset,
    join: Vec<Vec<usize>>,
    meet: Vec<Vec<usize>>,
}

fn extremal_bound(order: &FinitePoset, i: usize, j: usize, upper: bool) -> Option<usize> {
    let n = order.len();
    let bounds: Vec<usize> = (0..n)
        .filter(|&k| if upper { order.leq(i, k) && order.leq(j, k) } else { order.leq(k, i) && order.leq(k, j) })
        .collect();
    bounds.iter().copied().find(|&b| {
        bounds.iter().all(|&c| if upper { order.leq(b, c) } else { order.leq(c, b) })
    })
}

impl FiniteLattice {
    /// Computes joins and meets of a poset; fails if some pair lacks either.
    pub fn from_poset(order: FinitePoset) -> Result<Self> {
        let n = order.len();
        let mut join = vec![vec![0; n]; n];
        let mut meet = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                join[i][j] = extremal_bound(&order, i, j, true)
                    .ok_or_else(|| Error::Domain(format!("no join for {} and {}", order.labels[i], order.labels[j])))?;
                meet[i][j] = extremal_bound(&order, i, j, false)
                    .ok_or_else(|| Error::Domain(format!("no meet for {} and {}", order.labels[i], order.labels[j])))?;
            }
        }
        Ok(Self { order, join, meet })
    }

    pub fn chain(n: usize) -> Result<Self> {
        Self::from_poset(FinitePoset::chain(n)?)
    }

    /// The `rows x cols` grid with componentwise order.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        Self::from_poset(FinitePoset::product(&FinitePoset::chain(rows)?, &FinitePoset::chain(cols)?)?)
    }

    pub fn product(a: &FiniteLattice, b: &FiniteLattice) -> Result<Self> {
        Self::from_poset(FinitePoset::product(&a.order, &b.order)?)
    }

    pub fn dual(&self) -> Self {
        Self { order: self.order.dual(), join: self.meet.clone(), meet: self.join.clone() }
    }

    pub fn order(&self) -> &FinitePoset {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    #[inline]
    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.order.leq(i, j)
    }

    #[inline]
    pub fn join(&self, i: usize, j: usize) -> usize {
        self.join[i][j]
    }

    #[inline]
    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.meet[i][j]
    }

    /// True when `set` is closed under join and meet.
    pub fn is_sublattice(&self, set: &[usize]) -> bool {
        set.iter().all(|&x| {
            set.iter().all(|&y| set.contains(&self.join(x, y)) && set.contains(&self.meet(x, y)))
        })
    }
}

/// Strong set order `lower << upper`: every meet lands in `lower`, every join in `upper`.
pub fn strong_set_order_leq(lower: &[usize], upper: &[usize], lattice: &FiniteLattice) -> Result<bool> {
    if lower.is_empty() || upper.is_empty() {
        return Err(Error::Domain("strong set order compares nonempty sets".into()));
    }
    if lower.iter().chain(upper).any(|&x| x >= lattice.len()) {
        return Err(Error::Domain("element outside the lattice".into()));
    }
    Ok(lower.iter().all(|&y| {
        upper
            .iter()
            .all(|&z| lower.contains(&lattice.meet(y, z)) && upper.contains(&lattice.join(y, z)))
    }))
}
