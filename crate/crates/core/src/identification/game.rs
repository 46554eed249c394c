//! Zero-sum matrix games solved by a dense simplex tableau.
//!
//! The row player maximizes `x' M y`. Entries are shifted to be positive, and the
//! column player's problem `max sum(q) s.t. M' q <= 1, q >= 0` is solved from the
//! slack basis with Bland's rule. The row strategy is read from the reduced costs
//! of the slacks.

/// Solution of a matrix game.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution {
    /// Value for the (maximizing) row player.
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
}

const PIVOT_EPS: f64 = 1e-13;

/// Solves `max_x min_y x' M y` over mixed strategies. `m` is row-major with `rows x cols` entries.
pub fn solve_matrix_game(m: &[f64], rows: usize, cols: usize) -> GameSolution {
    assert!(rows > 0 && cols > 0 && m.len() == rows * cols, "matrix shape mismatch");
    let lo = m.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
        return GameSolution {
            value: lo,
            row_strategy: vec![1.0 / rows as f64; rows],
            col_strategy: vec![1.0 / cols as f64; cols],
        };
    }
    let shift = 1.0 - lo;
    // Tableau: rows constraints plus an objective row; columns q (cols), slacks (rows), rhs.
    let width = cols + rows + 1;
    let mut t = vec![0.0; (rows + 1) * width];
    for i in 0..rows {
        for j in 0..cols {
            t[i * width + j] = m[i * cols + j] + shift;
        }
        t[i * width + cols + i] = 1.0;
        t[i * width + width - 1] = 1.0;
    }
    let obj = rows * width;
    for j in 0..cols {
        t[obj + j] = -1.0;
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    for _ in 0..10_000 {
        // Bland's rule: lowest-index column with negative reduced cost.
        let Some(enter) = (0..cols + rows).find(|&j| t[obj + j] < -PIVOT_EPS) else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let a = t[i * width + enter];
            if a > PIVOT_EPS {
                let ratio = t[i * width + width - 1] / a;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[i] < basis[r]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        // The program is bounded for a positive matrix, so a missing pivot row only
        // arises from rounding in a degenerate tableau; the current basis is then optimal.
        let Some((r, _)) = leave else { break };
        let p = t[r * width + enter];
        for k in 0..width {
            t[r * width + k] /= p;
        }
        for i in 0..=rows {
            if i == r {
                continue;
            }
            let f = t[i * width + enter];
            if f != 0.0 {
                for k in 0..width {
                    t[i * width + k] -= f * t[r * width + k];
                }
            }
        }
        basis[r] = enter;
    }

    let total = t[obj + width - 1];
    let v = 1.0 / total;
    let mut col_strategy = vec![0.0; cols];
    for (i, &b) in basis.iter().enumerate() {
        if b < cols {
            col_strategy[b] = t[i * width + width - 1].max(0.0) * v;
        }
    }
    let mut row_strategy: Vec<f64> = (0..rows).map(|i| t[obj + cols + i].max(0.0) * v).collect();
    normalize(&mut row_strategy);
    normalize(&mut col_strategy);
    GameSolution { value: v - shift, row_strategy, col_strategy }
}

fn normalize(x: &mut [f64]) {
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}
