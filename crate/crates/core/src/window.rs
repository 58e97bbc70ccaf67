//! Fixed-capacity strategy window with a sketchy meta-payoff matrix,
//! Nash clustering, and weakest-strategy elimination.
//!
//! The matrix holds running-mean payoffs among the windowed strategies as
//! recorded while each strategy was trained. Existing entries are never
//! refreshed: re-matching old pairs would require fresh game simulation,
//! which is exactly the cost this bookkeeping avoids, so staleness is
//! accepted. Antisymmetry is enforced structurally: every new row is
//! mirrored into its column with negated sign and a zero diagonal.

use crate::error::{Error, Result};
use crate::meta::{extract_support, solve_rectangular_zero_sum, solve_zero_sum_nash};
use crate::policy::{BehavioralPolicy, PolicyBundle};

/// Ordered fixed-capacity strategy population. Slots keep insertion order;
/// the newest slot is always last. Ages are a monotone counter across the
/// whole run, so re-inserted positions remain distinguishable.
#[derive(Debug, Clone)]
pub struct StrategyWindow {
    capacity: usize,
    slots: Vec<WindowSlot>,
    next_age: u64,
}

#[derive(Debug, Clone)]
pub struct WindowSlot {
    pub bundle: PolicyBundle,
    pub age: u64,
}

impl StrategyWindow {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::EmptyWindow);
        }
        Ok(StrategyWindow {
            capacity,
            slots: Vec::new(),
            next_age: 0,
        })
    }

    /// A window that never forces elimination.
    pub fn unbounded() -> Self {
        StrategyWindow {
            capacity: usize::MAX,
            slots: Vec::new(),
            next_age: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn occupancy(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// True once an insertion has pushed occupancy past capacity, meaning an
    /// elimination step is due.
    pub fn over_capacity(&self) -> bool {
        self.slots.len() > self.capacity
    }

    pub fn insert(&mut self, bundle: PolicyBundle) -> usize {
        self.slots.push(WindowSlot {
            bundle,
            age: self.next_age,
        });
        self.next_age += 1;
        self.slots.len() - 1
    }

    pub fn remove(&mut self, slot: usize) -> Result<WindowSlot> {
        if slot >= self.slots.len() {
            return Err(Error::SlotError {
                slot,
                len: self.slots.len(),
            });
        }
        Ok(self.slots.remove(slot))
    }

    pub fn slots(&self) -> &[WindowSlot] {
        &self.slots
    }

    pub fn ages(&self) -> Vec<u64> {
        self.slots.iter().map(|s| s.age).collect()
    }

    /// Policies the window offers for one seat, in slot order.
    pub fn seat_policies(&self, seat: usize) -> Vec<&BehavioralPolicy> {
        self.slots.iter().map(|s| s.bundle.seat(seat)).collect()
    }

    pub fn bundles(&self) -> Vec<&PolicyBundle> {
        self.slots.iter().map(|s| &s.bundle).collect()
    }
}

/// Mean outcome of the newly trained strategy against one active slot.
#[derive(Debug, Clone, Copy)]
pub struct SlotOutcome {
    pub mean: f64,
    pub samples: u32,
}

/// Antisymmetric running-mean payoff estimates among windowed strategies,
/// with a parallel matrix of sample counts.
#[derive(Debug, Clone, Default)]
pub struct SketchyPayoffMatrix {
    values: Vec<Vec<f64>>,
    counts: Vec<Vec<u32>>,
}

impl SketchyPayoffMatrix {
    pub fn empty() -> Self {
        SketchyPayoffMatrix::default()
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn counts(&self) -> &[Vec<u32>] {
        &self.counts
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.values[row][col]
    }

    /// Appends the row of a newly inserted strategy: `outcomes[j]` is its
    /// mean payoff against active slot `j`, which must lie inside `bounds`.
    /// The new column is the negated row and the diagonal is zero; existing
    /// entries are left untouched.
    pub fn fill(&self, outcomes: &[Option<SlotOutcome>], bounds: (f64, f64)) -> Result<Self> {
        let n = self.dim();
        if outcomes.len() != n {
            return Err(Error::ShapeError(format!(
                "{} slot outcomes for a {n}x{n} matrix",
                outcomes.len()
            )));
        }
        let mut row = Vec::with_capacity(n + 1);
        let mut row_counts = Vec::with_capacity(n + 1);
        for (slot, outcome) in outcomes.iter().enumerate() {
            let o = outcome.ok_or(Error::IncompleteOutcomes { slot })?;
            if !o.mean.is_finite() || o.mean < bounds.0 - 1e-9 || o.mean > bounds.1 + 1e-9 {
                return Err(Error::InvalidOutcome(o.mean));
            }
            row.push(o.mean);
            row_counts.push(o.samples);
        }
        row.push(0.0);
        row_counts.push(0);

        let mut values = self.values.clone();
        let mut counts = self.counts.clone();
        for i in 0..n {
            values[i].push(-row[i]);
            counts[i].push(row_counts[i]);
        }
        values.push(row);
        counts.push(row_counts);
        Ok(SketchyPayoffMatrix { values, counts })
    }

    /// Removes a slot's row and column.
    pub fn remove_slot(&self, slot: usize) -> Result<Self> {
        let n = self.dim();
        if slot >= n {
            return Err(Error::SlotError { slot, len: n });
        }
        let strip = |m: &[Vec<f64>]| -> Vec<Vec<f64>> {
            m.iter()
                .enumerate()
                .filter(|(i, _)| *i != slot)
                .map(|(_, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != slot)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect()
        };
        let counts = self
            .counts
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != slot)
            .map(|(_, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != slot)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        Ok(SketchyPayoffMatrix {
            values: strip(&self.values),
            counts,
        })
    }

    /// Largest antisymmetry violation, exactly zero for matrices built
    /// through [`fill`](Self::fill).
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.values[i][j] + self.values[j][i]).abs());
            }
        }
        worst
    }

    /// Builds a matrix directly from values, mirroring nothing: intended for
    /// test fixtures and for matrices read back from disk.
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        for row in &values {
            if row.len() != n {
                return Err(Error::ShapeError(format!(
                    "expected {n}x{n}, found a row of length {}",
                    row.len()
                )));
            }
        }
        let counts = vec![vec![0; n]; n];
        Ok(SketchyPayoffMatrix { values, counts })
    }
}

/// One layer of a Nash clustering: the slots in the support of the
/// restricted equilibrium, with the equilibrium weights renormalized over
/// the layer.
#[derive(Debug, Clone)]
pub struct NashCluster {
    pub slots: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Layered partition of the window by repeated support peeling: solve the
/// game restricted to the remaining slots, collect the equilibrium support
/// as the next cluster, remove it, and repeat until no slots remain.
#[derive(Debug, Clone)]
pub struct NashClusteringResult {
    pub clusters: Vec<NashCluster>,
}

impl NashClusteringResult {
    pub fn last(&self) -> &NashCluster {
        self.clusters.last().expect("clustering is never empty")
    }

    /// Slot sets per layer, for compact assertions and reports.
    pub fn layers(&self) -> Vec<Vec<usize>> {
        self.clusters.iter().map(|c| c.slots.clone()).collect()
    }
}

pub fn nash_clustering(matrix: &SketchyPayoffMatrix, tol: f64) -> Result<NashClusteringResult> {
    let n = matrix.dim();
    if n == 0 {
        return Err(Error::EmptyWindow);
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut clusters = Vec::new();
    let mut layer = 0usize;
    while !remaining.is_empty() {
        let sub: Vec<Vec<f64>> = remaining
            .iter()
            .map(|&i| remaining.iter().map(|&j| matrix.entry(i, j)).collect())
            .collect();
        let solution = solve_zero_sum_nash(&sub, tol).map_err(|e| match e {
            Error::ConvergenceError { residual } => Error::ClusterConvergence { layer, residual },
            other => other,
        })?;
        let (support, weights) = extract_support(&solution.strategy);
        let slots: Vec<usize> = support.iter().map(|&k| remaining[k]).collect();
        let support_set: std::collections::BTreeSet<usize> = support.iter().copied().collect();
        remaining = remaining
            .iter()
            .enumerate()
            .filter(|(k, _)| !support_set.contains(k))
            .map(|(_, &slot)| slot)
            .collect();
        clusters.push(NashCluster { slots, weights });
        layer += 1;
    }
    Ok(NashClusteringResult { clusters })
}

/// Weights within `tie_tolerance` of the layer minimum count as tied.
const ELIMINATION_TIE_TOLERANCE: f64 = 1e-5;

/// Picks the slot to eliminate: the minimum-weight member of the last
/// cluster, with weight ties resolved toward the oldest strategy.
pub fn select_elimination(clustering: &NashClusteringResult, window: &StrategyWindow) -> usize {
    select_elimination_by_age(clustering, &window.ages())
}

/// [`select_elimination`] against a bare age list, for matrices read back
/// from disk where no policies are available.
pub fn select_elimination_by_age(clustering: &NashClusteringResult, ages: &[u64]) -> usize {
    let last = clustering.last();
    let min_weight = last.weights.iter().cloned().fold(f64::INFINITY, f64::min);
    last.slots
        .iter()
        .zip(&last.weights)
        .filter(|(_, &w)| w <= min_weight + ELIMINATION_TIE_TOLERANCE)
        .map(|(&slot, _)| slot)
        .min_by_key(|&slot| ages[slot])
        .expect("clusters are non-empty")
}

/// Removes `slot` from both the matrix and the window.
pub fn eliminate(
    matrix: &SketchyPayoffMatrix,
    window: &StrategyWindow,
    slot: usize,
) -> Result<(SketchyPayoffMatrix, StrategyWindow)> {
    let stripped = matrix.remove_slot(slot)?;
    let mut window = window.clone();
    window.remove(slot)?;
    Ok((stripped, window))
}

/// Relative population performance of row population A against column
/// population B: the equilibrium value `x' P y` of the asymmetric zero-sum
/// game on `payoff`.
pub fn rpp(payoff: &[Vec<f64>]) -> Result<f64> {
    let (x, y, _gap) = solve_rectangular_zero_sum(payoff, 1e-6)?;
    let mut value = 0.0;
    for (i, row) in payoff.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            value += x[i] * e * y[j];
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::rps_payoffs;

    fn fill_row(m: &SketchyPayoffMatrix, means: &[f64]) -> SketchyPayoffMatrix {
        let outcomes: Vec<Option<SlotOutcome>> = means
            .iter()
            .map(|&mean| Some(SlotOutcome { mean, samples: 10 }))
            .collect();
        m.fill(&outcomes, (-1.0, 1.0)).unwrap()
    }

    fn from_payoffs(p: &[Vec<f64>]) -> SketchyPayoffMatrix {
        let mut m = SketchyPayoffMatrix::empty();
        for k in 0..p.len() {
            let means: Vec<f64> = (0..k).map(|j| p[k][j]).collect();
            m = fill_row(&m, &means);
        }
        m
    }

    #[test]
    fn fill_mirrors_and_zeroes() {
        let m = SketchyPayoffMatrix::empty();
        let m1 = fill_row(&m, &[]);
        assert_eq!(m1.dim(), 1);
        assert_eq!(m1.entry(0, 0), 0.0);

        let m5 = fill_row(
            &fill_row(
                &fill_row(&fill_row(&m1, &[0.3]), &[0.1, -0.2]),
                &[0.5, 0.0, 0.9],
            ),
            &[0.2, -0.1, 0.0, 0.4],
        );
        assert_eq!(m5.dim(), 5);
        assert_eq!(m5.values()[4], vec![0.2, -0.1, 0.0, 0.4, 0.0]);
        for i in 0..4 {
            assert_eq!(m5.entry(i, 4), -m5.entry(4, i));
        }
        assert_eq!(m5.antisymmetry_defect(), 0.0);
        assert_eq!(m5.counts()[4][0], 10);
        assert_eq!(m5.counts()[0][4], 10);
    }

    #[test]
    fn fill_validates_inputs() {
        let m = fill_row(&SketchyPayoffMatrix::empty(), &[]);
        let err = m.fill(&[None], (-1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::IncompleteOutcomes { slot: 0 }));
        let err = m
            .fill(
                &[Some(SlotOutcome {
                    mean: 7.0,
                    samples: 1,
                })],
                (-1.0, 1.0),
            )
            .unwrap_err();
        assert!(matches!(err, Error::InvalidOutcome(_)));
        let err = m.fill(&[], (-1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::ShapeError(_)));
    }

    #[test]
    fn transitive_matrix_clusters_into_singletons() {
        let p = vec![
            vec![0.0, 1.0, 1.0],
            vec![-1.0, 0.0, 1.0],
            vec![-1.0, -1.0, 0.0],
        ];
        let clustering = nash_clustering(&from_payoffs(&p), 1e-6).unwrap();
        assert_eq!(clustering.layers(), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn rps_is_one_full_support_cluster() {
        let clustering = nash_clustering(&from_payoffs(&rps_payoffs()), 1e-6).unwrap();
        assert_eq!(clustering.layers(), vec![vec![0, 1, 2]]);
        let w = &clustering.clusters[0].weights;
        for &x in w {
            assert!((x - 1.0 / 3.0).abs() < 1e-6);
        }
    }

    #[test]
    fn dominated_appendage_lands_in_its_own_layer() {
        let mut p = rps_payoffs();
        for row in &mut p {
            row.push(1.0); // everyone beats the appendage
        }
        p.push(vec![-1.0, -1.0, -1.0, 0.0]);
        let matrix = from_payoffs(&p);
        let clustering = nash_clustering(&matrix, 1e-6).unwrap();
        assert_eq!(clustering.layers(), vec![vec![0, 1, 2], vec![3]]);

        let mut window = StrategyWindow::new(8).unwrap();
        let game = crate::games::GameSpec::Matrix { payoff: p }
            .build()
            .unwrap();
        for _ in 0..4 {
            window.insert(crate::policy::PolicyBundle::uniform(&game));
        }
        assert_eq!(select_elimination(&clustering, &window), 3);
    }

    #[test]
    fn elimination_breaks_ties_toward_oldest() {
        let clustering = NashClusteringResult {
            clusters: vec![NashCluster {
                slots: vec![0, 1, 2],
                weights: vec![0.5, 0.25, 0.25],
            }],
        };
        let game = crate::games::GameSpec::Matrix {
            payoff: rps_payoffs(),
        }
        .build()
        .unwrap();
        let mut window = StrategyWindow::new(4).unwrap();
        for _ in 0..3 {
            window.insert(crate::policy::PolicyBundle::uniform(&game));
        }
        // Slots 1 and 2 tie; slot 1 is older.
        assert_eq!(select_elimination(&clustering, &window), 1);

        let clustering = NashClusteringResult {
            clusters: vec![NashCluster {
                slots: vec![0, 1, 2],
                weights: vec![0.5, 0.3, 0.2],
            }],
        };
        assert_eq!(select_elimination(&clustering, &window), 2);
    }

    #[test]
    fn eliminate_strips_row_column_and_slot() {
        let p = rps_payoffs();
        let matrix = from_payoffs(&p);
        let game = crate::games::GameSpec::Matrix { payoff: p }
            .build()
            .unwrap();
        let mut window = StrategyWindow::new(4).unwrap();
        for _ in 0..3 {
            window.insert(crate::policy::PolicyBundle::uniform(&game));
        }
        let (m2, w2) = eliminate(&matrix, &window, 1).unwrap();
        assert_eq!(m2.dim(), 2);
        assert_eq!(w2.occupancy(), 2);
        assert_eq!(w2.ages(), vec![0, 2]);
        // Row 0 of RPS with the middle strategy removed.
        assert_eq!(m2.values()[0], vec![0.0, 1.0]);
        assert_eq!(m2.antisymmetry_defect(), 0.0);
        assert!(matches!(
            eliminate(&m2, &w2, 5),
            Err(Error::SlotError { .. })
        ));
    }

    #[test]
    fn rpp_basics() {
        let ones = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert!((rpp(&ones).unwrap() - 1.0).abs() < 1e-9);
        assert!(rpp(&rps_payoffs()).unwrap().abs() < 1e-6);
        let pennies = vec![vec![1.0, -1.0], vec![-1.0, 1.0]];
        assert!(rpp(&pennies).unwrap().abs() < 1e-6);
    }
}
