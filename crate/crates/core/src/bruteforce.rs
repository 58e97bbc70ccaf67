//! Brute-force reference solvers, independent of the iterative machinery in
//! the rest of the crate. Used by the self-check battery and by tests as the
//! second route of every dual-route verification; nothing here shares code
//! with the solvers it checks.

/// An equilibrium of a zero-sum matrix game found by support enumeration.
#[derive(Debug, Clone)]
pub struct EnumeratedEquilibrium {
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    pub value: f64,
}

const FEAS_TOL: f64 = 1e-9;

/// Finds a Nash equilibrium of the zero-sum game with row payoff `payoff`
/// (row maximizes, column minimizes) by enumerating support pairs of equal
/// size and solving the equalization equations. Exact up to linear-solve
/// rounding for matrices small enough to enumerate.
pub fn enumerate_zero_sum_nash(payoff: &[Vec<f64>]) -> Option<EnumeratedEquilibrium> {
    let rows = payoff.len();
    let cols = payoff.first()?.len();
    for size in 1..=rows.min(cols) {
        for row_support in subsets_of_size(rows, size) {
            for col_support in subsets_of_size(cols, size) {
                if let Some(eq) = try_supports(payoff, &row_support, &col_support) {
                    return Some(eq);
                }
            }
        }
    }
    None
}

fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(size);
    fn rec(
        start: usize,
        n: usize,
        size: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, size, current, out);
            current.pop();
        }
    }
    rec(0, n, size, &mut current, &mut out);
    out
}

fn try_supports(
    payoff: &[Vec<f64>],
    row_support: &[usize],
    col_support: &[usize],
) -> Option<EnumeratedEquilibrium> {
    let k = row_support.len();
    let rows = payoff.len();
    let cols = payoff[0].len();

    // Row strategy x on its support: x' P_j = v for every supported column j,
    // sum x = 1. Unknowns: x_0..x_{k-1}, v.
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    let mut b = vec![0.0; k + 1];
    for (eq, &j) in col_support.iter().enumerate() {
        for (t, &i) in row_support.iter().enumerate() {
            a[eq][t] = payoff[i][j];
        }
        a[eq][k] = -1.0;
    }
    for t in 0..k {
        a[k][t] = 1.0;
    }
    b[k] = 1.0;
    let x_sol = solve_linear(a, b)?;
    let value = x_sol[k];

    // Column strategy y on its support: P_i y = v for every supported row i.
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    let mut b = vec![0.0; k + 1];
    for (eq, &i) in row_support.iter().enumerate() {
        for (t, &j) in col_support.iter().enumerate() {
            a[eq][t] = payoff[i][j];
        }
        a[eq][k] = -1.0;
    }
    for t in 0..k {
        a[k][t] = 1.0;
    }
    b[k] = 1.0;
    let y_sol = solve_linear(a, b)?;
    if (y_sol[k] - value).abs() > 1e-6 {
        return None;
    }

    let mut x = vec![0.0; rows];
    for (t, &i) in row_support.iter().enumerate() {
        if x_sol[t] < -FEAS_TOL {
            return None;
        }
        x[i] = x_sol[t].max(0.0);
    }
    let mut y = vec![0.0; cols];
    for (t, &j) in col_support.iter().enumerate() {
        if y_sol[t] < -FEAS_TOL {
            return None;
        }
        y[j] = y_sol[t].max(0.0);
    }

    // Optimality: no row deviation beats v against y, no column deviation
    // undercuts v against x.
    for i in 0..rows {
        let gain: f64 = (0..cols).map(|j| payoff[i][j] * y[j]).sum();
        if gain > value + 1e-7 {
            return None;
        }
    }
    for j in 0..cols {
        let loss: f64 = (0..rows).map(|i| payoff[i][j] * x[i]).sum();
        if loss < value - 1e-7 {
            return None;
        }
    }
    Some(EnumeratedEquilibrium {
        row_strategy: x,
        col_strategy: y,
        value,
    })
}

/// Gaussian elimination with partial pivoting; `None` for singular systems.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// How much a fresh player could gain by deviating from `strategy` when both
/// seats play it in the symmetric game `payoff`.
pub fn deviation_gain(payoff: &[Vec<f64>], strategy: &[f64]) -> f64 {
    let n = payoff.len();
    let value: f64 = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| strategy[i] * payoff[i][j] * strategy[j])
                .sum::<f64>()
        })
        .sum();
    let row_best = (0..n)
        .map(|i| (0..n).map(|j| payoff[i][j] * strategy[j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    let col_worst = (0..n)
        .map(|j| (0..n).map(|i| strategy[i] * payoff[i][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    (row_best - value).max(value - col_worst)
}

/// Squared distance from `candidate` to the hull of up to three vertices by
/// dense grid search over the hull weights.
pub fn grid_hull_distance(candidate: &[f64], vertices: &[Vec<f64>], steps: usize) -> f64 {
    assert!(
        (1..=3).contains(&vertices.len()),
        "grid search supports 1 to 3 vertices"
    );
    let dist2 = |point: &[f64]| -> f64 {
        point
            .iter()
            .zip(candidate)
            .map(|(&p, &c)| (p - c) * (p - c))
            .sum()
    };
    match vertices.len() {
        1 => dist2(&vertices[0]),
        2 => {
            let mut best = f64::INFINITY;
            for s in 0..=steps {
                let w = s as f64 / steps as f64;
                let point: Vec<f64> = vertices[0]
                    .iter()
                    .zip(&vertices[1])
                    .map(|(&a, &b)| w * a + (1.0 - w) * b)
                    .collect();
                best = best.min(dist2(&point));
            }
            best
        }
        _ => {
            let mut best = f64::INFINITY;
            for s in 0..=steps {
                for t in 0..=(steps - s) {
                    let w0 = s as f64 / steps as f64;
                    let w1 = t as f64 / steps as f64;
                    let w2 = 1.0 - w0 - w1;
                    let point: Vec<f64> = (0..candidate.len())
                        .map(|d| w0 * vertices[0][d] + w1 * vertices[1][d] + w2 * vertices[2][d])
                        .collect();
                    best = best.min(dist2(&point));
                }
            }
            best
        }
    }
}
