//! Meta-strategy solvers over a strategy population: exact zero-sum Nash via
//! regret matching+, the uniform and last-strategy baselines, and the hedge
//! update driven by recorded match outcomes.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Probability vector over window slots.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaStrategy {
    weights: Vec<f64>,
}

impl MetaStrategy {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyWindow);
        }
        let mut sum = 0.0;
        for &w in &weights {
            if !(w >= 0.0) {
                return Err(Error::InvalidOutcome(w));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::ShapeError(format!("meta weights sum to {sum}")));
        }
        Ok(MetaStrategy { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Uniform weights over `window_size` slots (fictitious self-play target).
pub fn mss_uniform(window_size: usize) -> Result<MetaStrategy> {
    if window_size == 0 {
        return Err(Error::EmptyWindow);
    }
    MetaStrategy::new(vec![1.0 / window_size as f64; window_size])
}

/// Point mass on the most recently inserted slot (vanilla self-play target).
/// Slots are kept in insertion order, so the newest slot is the last one.
pub fn mss_last(window_size: usize) -> Result<MetaStrategy> {
    if window_size == 0 {
        return Err(Error::EmptyWindow);
    }
    let mut weights = vec![0.0; window_size];
    weights[window_size - 1] = 1.0;
    MetaStrategy::new(weights)
}

/// Per-slot ring buffers of recent match outcomes, from the slot's own
/// perspective, with running means read by the hedge update.
#[derive(Debug, Clone, Default)]
pub struct OutcomeBuffer {
    slots: Vec<VecDeque<f64>>,
}

/// Ring capacity per slot.
pub const OUTCOME_CAPACITY: usize = 1000;

impl OutcomeBuffer {
    pub fn new(num_slots: usize) -> Self {
        OutcomeBuffer {
            slots: vec![VecDeque::new(); num_slots],
        }
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    /// Appends an outcome for `slot`, evicting the oldest entry at capacity.
    pub fn record(&mut self, slot: usize, outcome: f64) -> Result<()> {
        let len = self.slots.len();
        let buf = self
            .slots
            .get_mut(slot)
            .ok_or(Error::SlotError { slot, len })?;
        if buf.len() == OUTCOME_CAPACITY {
            buf.pop_front();
        }
        buf.push_back(outcome);
        Ok(())
    }

    /// Arithmetic mean of the buffered outcomes; zero for a slot that has
    /// never been played (the neutral midpoint of an antisymmetric payoff).
    pub fn mean(&self, slot: usize) -> f64 {
        let buf = &self.slots[slot];
        if buf.is_empty() {
            0.0
        } else {
            buf.iter().sum::<f64>() / buf.len() as f64
        }
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.slots.len()).map(|s| self.mean(s)).collect()
    }

    pub fn samples(&self, slot: usize) -> usize {
        self.slots[slot].len()
    }

    /// Adds an empty buffer for a newly inserted window slot.
    pub fn push_slot(&mut self) {
        self.slots.push(VecDeque::new());
    }

    /// Discards the buffer of an eliminated window slot.
    pub fn remove_slot(&mut self, slot: usize) -> Result<()> {
        let len = self.slots.len();
        if slot >= len {
            return Err(Error::SlotError { slot, len });
        }
        self.slots.remove(slot);
        Ok(())
    }
}

/// Records a match outcome for `slot`; the op-level companion of
/// [`OutcomeBuffer::record`].
pub fn record_outcome(buffer: &mut OutcomeBuffer, slot: usize, outcome: f64) -> Result<()> {
    buffer.record(slot, outcome)
}

/// Exponential-weights meta-strategy from the buffered outcome means:
/// `sigma_i = exp(eta * mean_i) / sum_j exp(eta * mean_j)`, computed with
/// max subtraction so large means cannot overflow.
pub fn hedge_update(buffer: &OutcomeBuffer, eta: f64) -> Result<MetaStrategy> {
    debug_assert!(eta >= 0.0, "hedge learning rate must be non-negative");
    let means = buffer.means();
    if means.is_empty() {
        return Err(Error::EmptyWindow);
    }
    for &m in &means {
        if m.is_nan() {
            return Err(Error::InvalidOutcome(m));
        }
    }
    let top = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = means.iter().map(|&m| (eta * (m - top)).exp()).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    MetaStrategy::new(weights)
}

/// An equilibrium of a zero-sum matrix game.
#[derive(Debug, Clone)]
pub struct NashSolution {
    pub strategy: Vec<f64>,
    pub value: f64,
    /// Largest gain either player could get by deviating from the returned
    /// strategy played by both sides.
    pub residual: f64,
}

/// Support-extraction threshold applied to solved equilibrium strategies.
pub const SUPPORT_THRESHOLD: f64 = 1e-4;

const SOLVER_ITERATION_CAP: usize = 100_000;
/// Fallback budget for near-degenerate matrices (for example populations
/// holding almost-identical strategies) where the averaged iterate closes in
/// at roughly 1/t and the support polish cannot lock on.
const SOLVER_EXTENDED_CAP: usize = 2_000_000;
const CONVERGENCE_CHECK_EVERY: usize = 64;

/// Solves the zero-sum matrix game with row payoff `payoff` by regret
/// matching+ with alternating updates and linearly weighted strategy
/// averaging. Intended for the antisymmetric matrices produced by a
/// symmetric population; for those the game value is zero and the returned
/// strategy serves both seats.
///
/// The averaged iterate closes in on an equilibrium at roughly `1/t`, which
/// stalls just above tight tolerances on degenerate matrices. At every
/// convergence check the averaged strategy's support is therefore also
/// polished by an exact equalization solve; the polished strategy is
/// accepted only if its deviation gain against the full matrix meets the
/// tolerance, so the refinement can tighten but never mislead.
pub fn solve_zero_sum_nash(payoff: &[Vec<f64>], tol: f64) -> Result<NashSolution> {
    let n = check_square(payoff)?;
    assert!(tol > 0.0, "tolerance must be positive");
    if n == 1 {
        return Ok(NashSolution {
            strategy: vec![1.0],
            value: payoff[0][0],
            residual: 0.0,
        });
    }
    let antisymmetric = (0..n).all(|i| (0..n).all(|j| (payoff[i][j] + payoff[j][i]).abs() <= 1e-9));

    let mut row_regret = vec![0.0f64; n];
    let mut col_regret = vec![0.0f64; n];
    let mut x = vec![1.0 / n as f64; n];
    let mut y = vec![1.0 / n as f64; n];
    let mut x_avg = vec![0.0f64; n];
    let mut y_avg = vec![0.0f64; n];
    let mut weight_sum = 0.0f64;

    let mut best: Option<NashSolution> = None;
    for t in 1..=SOLVER_EXTENDED_CAP {
        // Row player maximizes x' P y.
        let u_row = mat_vec(payoff, &y);
        let v_row = dot(&x, &u_row);
        for i in 0..n {
            row_regret[i] = (row_regret[i] + u_row[i] - v_row).max(0.0);
        }
        regret_strategy(&row_regret, &mut x);

        // Column player minimizes x' P y, reacting to the updated x.
        let u_col = vec_mat(&x, payoff);
        let v_col = dot(&y, &u_col);
        for j in 0..n {
            col_regret[j] = (col_regret[j] + v_col - u_col[j]).max(0.0);
        }
        regret_strategy(&col_regret, &mut y);

        let w = t as f64;
        for i in 0..n {
            x_avg[i] += w * x[i];
            y_avg[i] += w * y[i];
        }
        weight_sum += w;

        let check = if t <= SOLVER_ITERATION_CAP {
            t % CONVERGENCE_CHECK_EVERY == 0 || t == SOLVER_ITERATION_CAP
        } else {
            t % 1024 == 0 || t == SOLVER_EXTENDED_CAP
        };
        if check {
            let mut candidate = best_candidate(payoff, &x_avg, &y_avg, weight_sum);
            if candidate.residual > tol && antisymmetric {
                if let Some(polished) = polish_candidate(payoff, &candidate.strategy, tol) {
                    candidate = polished;
                }
            }
            if best
                .as_ref()
                .map(|b| candidate.residual < b.residual)
                .unwrap_or(true)
            {
                best = Some(candidate);
            }
            if best.as_ref().unwrap().residual <= tol {
                return Ok(best.unwrap());
            }
        }
    }
    Err(Error::ConvergenceError {
        residual: best.map(|b| b.residual).unwrap_or(f64::INFINITY),
    })
}

/// Equalization polish: take support prefixes of the candidate in
/// descending-weight order, solve for the strategy that zeroes every
/// supported payoff row, and accept the first solution whose full-matrix
/// deviation gain meets the tolerance.
fn polish_candidate(payoff: &[Vec<f64>], candidate: &[f64], tol: f64) -> Option<NashSolution> {
    let n = candidate.len();
    // Populations may hold byte-identical strategies (no deduplication on
    // insertion); their matrix rows make every covering equalization system
    // singular, so fold each duplicate's weight into its first occurrence
    // and search supports over representatives only.
    let mut representative: Vec<usize> = (0..n).collect();
    let mut merged = candidate.to_vec();
    for i in 0..n {
        if representative[i] != i {
            continue;
        }
        for j in (i + 1)..n {
            if representative[j] == j && duplicate_strategies(payoff, i, j) {
                representative[j] = i;
                merged[i] += merged[j];
                merged[j] = 0.0;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|&i| representative[i] == i).collect();
    order.sort_by(|&a, &b| merged[b].partial_cmp(&merged[a]).unwrap());
    // Candidate supports: every weight-ordered prefix, plus each prefix with
    // one member dropped. The leave-one-out variants recover equilibria
    // whose support skips a heavy but linearly dependent strategy, such as
    // one whose payoff row is the exact negation of another's.
    let mut supports: Vec<Vec<usize>> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for k in 1..=order.len() {
        let prefix = &order[..k];
        let mut base = prefix.to_vec();
        base.sort_unstable();
        if seen.insert(base.clone()) {
            supports.push(base);
        }
        if k > 1 {
            for skip in 0..k {
                let mut variant: Vec<usize> = prefix
                    .iter()
                    .enumerate()
                    .filter(|(pos, _)| *pos != skip)
                    .map(|(_, &i)| i)
                    .collect();
                variant.sort_unstable();
                if seen.insert(variant.clone()) {
                    supports.push(variant);
                }
            }
        }
    }
    for support in supports {
        // Three support-restricted guesses: the equalizing strategy when the
        // system is regular, the uniform distribution (exact for supports
        // whose sub-block vanishes, where equalization is singular), and the
        // iterate's own renormalized weights. Each is accepted only on a
        // verified full-matrix deviation gain.
        let mut guesses: Vec<Vec<f64>> = Vec::with_capacity(3);
        if let Some(z) = equalize_on_support(payoff, &support) {
            guesses.push(z);
        }
        let mut uniform = vec![0.0; n];
        for &i in &support {
            uniform[i] = 1.0 / support.len() as f64;
        }
        guesses.push(uniform);
        let restricted_total: f64 = support.iter().map(|&i| merged[i]).sum();
        if restricted_total > 0.0 {
            let mut restricted = vec![0.0; n];
            for &i in &support {
                restricted[i] = merged[i] / restricted_total;
            }
            guesses.push(restricted);
        }
        for strategy in guesses {
            let residual = symmetric_residual(payoff, &strategy);
            if residual <= tol {
                let value = dot(&strategy, &mat_vec(payoff, &strategy));
                return Some(NashSolution {
                    strategy,
                    value,
                    residual,
                });
            }
        }
    }
    None
}

/// True when strategies `i` and `j` are payoff-identical: equal rows away
/// from their own columns and a zero head-to-head entry.
fn duplicate_strategies(payoff: &[Vec<f64>], i: usize, j: usize) -> bool {
    if payoff[i][j] != 0.0 {
        return false;
    }
    payoff[i]
        .iter()
        .zip(&payoff[j])
        .enumerate()
        .all(|(k, (&a, &b))| k == i || k == j || a == b)
}

/// Solves `P[S,S] z = 0, sum z = 1, z >= 0` for an antisymmetric block by
/// replacing one redundant equalization row with the normalization.
fn equalize_on_support(payoff: &[Vec<f64>], support: &[usize]) -> Option<Vec<f64>> {
    let k = support.len();
    let mut a = vec![vec![0.0f64; k]; k];
    for (r, &i) in support.iter().enumerate().take(k - 1) {
        for (c, &j) in support.iter().enumerate() {
            a[r][c] = payoff[i][j];
        }
    }
    for c in 0..k {
        a[k - 1][c] = 1.0;
    }
    let mut b = vec![0.0; k];
    b[k - 1] = 1.0;
    let z = gaussian_solve(a, b)?;
    if z.iter().any(|&v| v < -1e-9) {
        return None;
    }
    let mut full = vec![0.0; payoff.len()];
    let total: f64 = z.iter().map(|&v| v.max(0.0)).sum();
    if total <= 0.0 {
        return None;
    }
    for (c, &i) in support.iter().enumerate() {
        full[i] = z[c].max(0.0) / total;
    }
    Some(full)
}

fn gaussian_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
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

/// Extracted support of a solved strategy: indices above
/// [`SUPPORT_THRESHOLD`] and their renormalized weights.
pub fn extract_support(strategy: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..strategy.len())
        .filter(|&i| strategy[i] > SUPPORT_THRESHOLD)
        .collect();
    if idx.is_empty() {
        // Numerically degenerate; fall back to the argmax.
        let top = strategy
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap_or(0);
        idx = vec![top];
    }
    let total: f64 = idx.iter().map(|&i| strategy[i]).sum();
    let weights = idx.iter().map(|&i| strategy[i] / total).collect();
    (idx, weights)
}

/// Equilibrium of the asymmetric zero-sum game `payoff` (row maximizes,
/// column minimizes) by the same regret-matching+ iteration, returning the
/// averaged strategies and the duality gap achieved.
pub fn solve_rectangular_zero_sum(
    payoff: &[Vec<f64>],
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let rows = payoff.len();
    if rows == 0 {
        return Err(Error::ShapeError("empty matrix".into()));
    }
    let cols = payoff[0].len();
    for row in payoff {
        if row.len() != cols {
            return Err(Error::ShapeError("ragged matrix".into()));
        }
        for &v in row {
            if !v.is_finite() {
                return Err(Error::ShapeError(format!("non-finite entry {v}")));
            }
        }
    }
    if cols == 0 {
        return Err(Error::ShapeError("matrix has no columns".into()));
    }

    let mut row_regret = vec![0.0f64; rows];
    let mut col_regret = vec![0.0f64; cols];
    let mut x = vec![1.0 / rows as f64; rows];
    let mut y = vec![1.0 / cols as f64; cols];
    let mut x_avg = vec![0.0f64; rows];
    let mut y_avg = vec![0.0f64; cols];
    let mut weight_sum = 0.0f64;
    let mut best_gap = f64::INFINITY;

    for t in 1..=SOLVER_EXTENDED_CAP {
        let u_row = mat_vec(payoff, &y);
        let v_row = dot(&x, &u_row);
        for i in 0..rows {
            row_regret[i] = (row_regret[i] + u_row[i] - v_row).max(0.0);
        }
        regret_strategy(&row_regret, &mut x);

        let u_col = vec_mat(&x, payoff);
        let v_col = dot(&y, &u_col);
        for j in 0..cols {
            col_regret[j] = (col_regret[j] + v_col - u_col[j]).max(0.0);
        }
        regret_strategy(&col_regret, &mut y);

        let w = t as f64;
        for i in 0..rows {
            x_avg[i] += w * x[i];
        }
        for j in 0..cols {
            y_avg[j] += w * y[j];
        }
        weight_sum += w;

        let check = if t <= SOLVER_ITERATION_CAP {
            t % CONVERGENCE_CHECK_EVERY == 0 || t == SOLVER_ITERATION_CAP
        } else {
            t % 1024 == 0 || t == SOLVER_EXTENDED_CAP
        };
        if check {
            let xa: Vec<f64> = x_avg.iter().map(|v| v / weight_sum).collect();
            let ya: Vec<f64> = y_avg.iter().map(|v| v / weight_sum).collect();
            let gap = duality_gap(payoff, &xa, &ya);
            best_gap = best_gap.min(gap);
            if gap <= tol {
                return Ok((xa, ya, gap));
            }
            if let Some((px, py, pgap)) = polish_rectangular(payoff, &xa, &ya, tol) {
                return Ok((px, py, pgap));
            }
        }
    }
    Err(Error::ConvergenceError { residual: best_gap })
}

fn duality_gap(payoff: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    let row_best = mat_vec(payoff, y)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let col_best = vec_mat(x, payoff).into_iter().fold(f64::INFINITY, f64::min);
    row_best - col_best
}

/// Support-anchored equalization polish for the rectangular solver: take
/// equal-sized support prefixes of the averaged strategies in descending
/// weight order, solve for equalizing strategies on them, and accept only if
/// the duality gap on the full matrix meets `tol`.
fn polish_rectangular(
    payoff: &[Vec<f64>],
    x_avg: &[f64],
    y_avg: &[f64],
    tol: f64,
) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    let mut row_order: Vec<usize> = (0..x_avg.len()).collect();
    row_order.sort_by(|&a, &b| x_avg[b].partial_cmp(&x_avg[a]).unwrap());
    let mut col_order: Vec<usize> = (0..y_avg.len()).collect();
    col_order.sort_by(|&a, &b| y_avg[b].partial_cmp(&y_avg[a]).unwrap());
    for k in 1..=row_order.len().min(col_order.len()) {
        let mut rows = row_order[..k].to_vec();
        rows.sort_unstable();
        let mut cols = col_order[..k].to_vec();
        cols.sort_unstable();

        // Row strategy: x' A_cols = v on every supported column.
        let mut a = vec![vec![0.0; k + 1]; k + 1];
        let mut b = vec![0.0; k + 1];
        for (eq, &j) in cols.iter().enumerate() {
            for (t, &i) in rows.iter().enumerate() {
                a[eq][t] = payoff[i][j];
            }
            a[eq][k] = -1.0;
        }
        for t in 0..k {
            a[k][t] = 1.0;
        }
        b[k] = 1.0;
        let Some(xs) = gaussian_solve(a, b) else {
            continue;
        };

        // Column strategy: A_rows y = v on every supported row.
        let mut a = vec![vec![0.0; k + 1]; k + 1];
        let mut b = vec![0.0; k + 1];
        for (eq, &i) in rows.iter().enumerate() {
            for (t, &j) in cols.iter().enumerate() {
                a[eq][t] = payoff[i][j];
            }
            a[eq][k] = -1.0;
        }
        for t in 0..k {
            a[k][t] = 1.0;
        }
        b[k] = 1.0;
        let Some(ys) = gaussian_solve(a, b) else {
            continue;
        };

        if xs[..k].iter().any(|&v| v < -1e-9) || ys[..k].iter().any(|&v| v < -1e-9) {
            continue;
        }
        let mut x = vec![0.0; x_avg.len()];
        let mut y = vec![0.0; y_avg.len()];
        let x_total: f64 = xs[..k].iter().map(|&v| v.max(0.0)).sum();
        let y_total: f64 = ys[..k].iter().map(|&v| v.max(0.0)).sum();
        if x_total <= 0.0 || y_total <= 0.0 {
            continue;
        }
        for (t, &i) in rows.iter().enumerate() {
            x[i] = xs[t].max(0.0) / x_total;
        }
        for (t, &j) in cols.iter().enumerate() {
            y[j] = ys[t].max(0.0) / y_total;
        }
        let gap = duality_gap(payoff, &x, &y);
        if gap <= tol {
            return Some((x, y, gap));
        }
    }
    None
}

fn check_square(payoff: &[Vec<f64>]) -> Result<usize> {
    let n = payoff.len();
    if n == 0 {
        return Err(Error::ShapeError("empty matrix".into()));
    }
    for row in payoff {
        if row.len() != n {
            return Err(Error::ShapeError(format!(
                "expected {n}x{n}, found a row of length {}",
                row.len()
            )));
        }
        for &v in row {
            if !v.is_finite() {
                return Err(Error::ShapeError(format!("non-finite entry {v}")));
            }
        }
    }
    Ok(n)
}

fn regret_strategy(regret: &[f64], out: &mut [f64]) {
    let total: f64 = regret.iter().sum();
    if total > 0.0 {
        for (o, &r) in out.iter_mut().zip(regret) {
            *o = r / total;
        }
    } else {
        let u = 1.0 / out.len() as f64;
        out.iter_mut().for_each(|o| *o = u);
    }
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn vec_mat(v: &[f64], m: &[Vec<f64>]) -> Vec<f64> {
    let cols = m[0].len();
    let mut out = vec![0.0; cols];
    for (i, row) in m.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            out[j] += v[i] * e;
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Deviation gains of `z` when both seats play it: how much a fresh row or
/// column player could gain by deviating to a pure strategy.
fn symmetric_residual(payoff: &[Vec<f64>], z: &[f64]) -> f64 {
    let pz = mat_vec(payoff, z);
    let zp = vec_mat(z, payoff);
    let value = dot(z, &pz);
    let row_gain = pz.into_iter().fold(f64::NEG_INFINITY, f64::max) - value;
    let col_gain = value - zp.into_iter().fold(f64::INFINITY, f64::min);
    row_gain.max(col_gain)
}

fn best_candidate(payoff: &[Vec<f64>], x_avg: &[f64], y_avg: &[f64], weight: f64) -> NashSolution {
    let n = x_avg.len();
    let xa: Vec<f64> = x_avg.iter().map(|v| v / weight).collect();
    let ya: Vec<f64> = y_avg.iter().map(|v| v / weight).collect();
    let mid: Vec<f64> = (0..n).map(|i| 0.5 * (xa[i] + ya[i])).collect();
    [xa, ya, mid]
        .into_iter()
        .map(|z| {
            let residual = symmetric_residual(payoff, &z);
            let value = dot(&z, &mat_vec(payoff, &z));
            NashSolution {
                strategy: z,
                value,
                residual,
            }
        })
        .min_by(|a, b| a.residual.partial_cmp(&b.residual).unwrap())
        .unwrap()
}
