//! Lattice exchange model of the mixing process and its mean-field
//! recursion.
//!
//! Two phases fill a column lattice; a heavier cell sitting directly above
//! a lighter one swaps with probability `a / (1 - θ̆_j A)` evaluated at the
//! current row mean. Within one step the unstable pairs of a column are
//! automatically disjoint (an unstable pair needs `+` over `-`), so the
//! sweep applies all swaps of the step-start configuration simultaneously.
//! Averaging over columns gives the deterministic row recursion, a
//! three-point scheme whose continuum limit is the mixing conservation law
//! with speed `α = c a / 2` under the scaling `r = c h`.

use crate::atwood::AtwoodParams;
use crate::entropy_claw::{theta_exact, EntropyProfile};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Run configuration. The cell size is tied to the time step by
/// `r = c h`; the induced mixing speed is `α = c a / 2` and must lie in
/// `(0, 1)`, i.e. `0 < c < 2 / a`.
#[derive(Debug, Clone, Copy)]
pub struct WalkConfig {
    pub params: AtwoodParams,
    pub n_cols: usize,
    pub n_rows: usize,
    pub c: f64,
    pub h: f64,
    pub steps: usize,
    pub seed: u64,
    /// Record a snapshot every this many steps (0 = final only).
    pub snapshot_every: usize,
}

impl WalkConfig {
    pub fn cell_size(&self) -> f64 {
        self.c * self.h
    }

    /// Mixing speed of the continuum limit.
    pub fn alpha(&self) -> f64 {
        0.5 * self.c * self.params.walk_rate
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cols == 0 || self.n_rows < 4 || self.n_rows % 2 != 0 {
            return Err(Error::Config("need n_cols > 0 and even n_rows >= 4".into()));
        }
        if !(self.h > 0.0 && self.c > 0.0) {
            return Err(Error::Config("need positive c and h".into()));
        }
        let alpha = self.alpha();
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!(
                "mixing speed α = c·a/2 = {alpha} must lie in (0, 1)"
            )));
        }
        Ok(())
    }
}

/// Two-phase lattice; `values[row * n_cols + col] ∈ {-1, +1}`. Row `r`
/// carries the vertical index `j = r - n_rows/2` and centre
/// `x2 = cell * (j + 1/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub n_cols: usize,
    pub n_rows: usize,
    pub cell: f64,
    pub step: usize,
    pub values: Vec<i8>,
}

impl Lattice {
    /// Flat unstable datum: `+1` on the upper half, `-1` below.
    pub fn flat(n_cols: usize, n_rows: usize, cell: f64) -> Self {
        let mut values = vec![-1i8; n_cols * n_rows];
        for row in n_rows / 2..n_rows {
            for col in 0..n_cols {
                values[row * n_cols + col] = 1;
            }
        }
        Self {
            n_cols,
            n_rows,
            cell,
            step: 0,
            values,
        }
    }

    pub fn x2_of_row(&self, row: usize) -> f64 {
        self.cell * (row as f64 - self.n_rows as f64 / 2.0 + 0.5)
    }

    /// Exact integer phase sum (conserved by swaps).
    pub fn total(&self) -> i64 {
        self.values.iter().map(|&v| v as i64).sum()
    }
}

/// Exchange probability `a / (1 - θ A)` at a given row mean.
pub fn swap_probability(theta_mean: f64, p: &AtwoodParams) -> f64 {
    p.walk_rate / (1.0 - theta_mean * p.atwood)
}

/// Per-row means of a lattice.
pub fn line_average(lat: &Lattice) -> Vec<f64> {
    (0..lat.n_rows)
        .map(|row| {
            let base = row * lat.n_cols;
            lat.values[base..base + lat.n_cols]
                .iter()
                .map(|&v| v as f64)
                .sum::<f64>()
                / lat.n_cols as f64
        })
        .collect()
}

/// One exchange step. Eligibility and exchange probabilities are read from
/// the step-start configuration; the unstable pairs of a column are
/// disjoint, so all swaps of the step commute. Columns use independent
/// RNG streams and may run in parallel.
pub fn mc_step(lat: &Lattice, p: &AtwoodParams, rngs: &mut [ChaCha8Rng]) -> Lattice {
    assert_eq!(rngs.len(), lat.n_cols);
    let means = line_average(lat);
    // probs[j] applies to the pair (row j, row j-1).
    let probs: Vec<f64> = means.iter().map(|&m| swap_probability(m, p)).collect();
    let n_rows = lat.n_rows;
    let n_cols = lat.n_cols;
    let columns: Vec<Vec<i8>> = rngs
        .par_iter_mut()
        .enumerate()
        .map(|(col, rng)| {
            let mut column: Vec<i8> = (0..n_rows)
                .map(|row| lat.values[row * n_cols + col])
                .collect();
            for row in 1..n_rows {
                // Step-start configuration: a swapped pair leaves both its
                // rows ineligible for any other pair of this step.
                let upper = lat.values[row * n_cols + col];
                let lower = lat.values[(row - 1) * n_cols + col];
                if upper == 1 && lower == -1 {
                    let draw: f64 = rng.gen_range(0.0..1.0);
                    if draw < probs[row] {
                        column[row] = -1;
                        column[row - 1] = 1;
                    }
                }
            }
            column
        })
        .collect();
    let mut values = vec![0i8; n_rows * n_cols];
    for (col, column) in columns.iter().enumerate() {
        for (row, &v) in column.iter().enumerate() {
            values[row * n_cols + col] = v;
        }
    }
    Lattice {
        n_cols,
        n_rows,
        cell: lat.cell,
        step: lat.step + 1,
        values,
    }
}

/// Per-column RNG streams derived from one master seed.
pub fn column_rngs(seed: u64, n_cols: usize) -> Vec<ChaCha8Rng> {
    (0..n_cols)
        .map(|col| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(col as u64);
            r
        })
        .collect()
}

/// Deterministic mean-field recursion on row means:
/// `θ̆_j += (p_{j+1} (1+θ̆_{j+1})(1-θ̆_j) - p_j (1+θ̆_j)(1-θ̆_{j-1})) / 2`.
/// Walls are reflecting (no exchange across the ends).
pub fn recursion_run(theta0: &[f64], p: &AtwoodParams, steps: usize) -> Vec<f64> {
    let n = theta0.len();
    let mut cur = theta0.to_vec();
    let mut next = vec![0.0f64; n];
    for _ in 0..steps {
        let probs: Vec<f64> = cur.iter().map(|&m| swap_probability(m, p)).collect();
        for j in 0..n {
            let gain = if j + 1 < n {
                probs[j + 1] * (1.0 + cur[j + 1]) * (1.0 - cur[j])
            } else {
                0.0
            };
            let loss = if j > 0 {
                probs[j] * (1.0 + cur[j]) * (1.0 - cur[j - 1])
            } else {
                0.0
            };
            next[j] = cur[j] + 0.5 * (gain - loss);
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// Same recursion tracked in occupation variables `d_± = (1 ± θ̆)/2`;
/// used as an internal consistency check.
pub fn recursion_run_occupation(theta0: &[f64], p: &AtwoodParams, steps: usize) -> Vec<(f64, f64)> {
    let n = theta0.len();
    let mut dp: Vec<f64> = theta0.iter().map(|&t| 0.5 * (1.0 + t)).collect();
    let mut dm: Vec<f64> = theta0.iter().map(|&t| 0.5 * (1.0 - t)).collect();
    for _ in 0..steps {
        let probs: Vec<f64> = dp
            .iter()
            .zip(dm.iter())
            .map(|(&a, &b)| swap_probability(a - b, p))
            .collect();
        let mut ndp = dp.clone();
        let mut ndm = dm.clone();
        for j in 0..n {
            let gain = if j + 1 < n {
                probs[j + 1] * dp[j + 1] * dm[j]
            } else {
                0.0
            };
            let loss = if j > 0 { probs[j] * dp[j] * dm[j - 1] } else { 0.0 };
            ndp[j] = dp[j] + gain - loss;
            ndm[j] = dm[j] - gain + loss;
        }
        dp = ndp;
        dm = ndm;
    }
    dp.into_iter().zip(dm).collect()
}

/// Simulation artifacts: snapshots, line averages and distances to the
/// mean-field recursion and the entropy profile.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: WalkConfig,
    pub final_lattice: Lattice,
    /// `(step, line averages)` at the recorded steps.
    pub averages: Vec<(usize, Vec<f64>)>,
    /// Lattice snapshots at the recorded steps (including the final one).
    pub snapshots: Vec<Lattice>,
    /// Mean-field recursion profile at the final step.
    pub recursion: Vec<f64>,
    /// Sup and L¹ distance between the final line average and the
    /// recursion.
    pub sup_to_recursion: f64,
    pub l1_to_recursion: f64,
    /// Sup distance between the final line average and the entropy profile
    /// at the final time.
    pub sup_to_profile: f64,
    /// Initial and final exact phase sums.
    pub mass_initial: i64,
    pub mass_final: i64,
}

/// Runs the exchange model, the mean-field recursion on the same grid, and
/// the comparison metrics. Fully reproducible for a fixed seed.
pub fn run_simulation(cfg: &WalkConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let mut lat = Lattice::flat(cfg.n_cols, cfg.n_rows, cfg.cell_size());
    let mass_initial = lat.total();
    let mut rngs = column_rngs(cfg.seed, cfg.n_cols);
    let mut averages = Vec::new();
    let mut snapshots = Vec::new();
    for step in 1..=cfg.steps {
        lat = mc_step(&lat, &cfg.params, &mut rngs);
        let record = (cfg.snapshot_every != 0 && step % cfg.snapshot_every == 0)
            || step == cfg.steps;
        if record {
            averages.push((step, line_average(&lat)));
            snapshots.push(lat.clone());
        }
    }
    let theta0: Vec<f64> = (0..cfg.n_rows)
        .map(|r| if r >= cfg.n_rows / 2 { 1.0 } else { -1.0 })
        .collect();
    let recursion = recursion_run(&theta0, &cfg.params, cfg.steps);
    let avg = line_average(&lat);
    let sup_to_recursion = avg
        .iter()
        .zip(recursion.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let l1_to_recursion: f64 = avg
        .iter()
        .zip(recursion.iter())
        .map(|(a, b)| (a - b).abs() * cfg.cell_size())
        .sum();
    let t_final = cfg.steps as f64 * cfg.h;
    let prof = EntropyProfile::new(cfg.params, cfg.alpha())?;
    let sup_to_profile = (0..cfg.n_rows)
        .map(|r| {
            let x2 = lat.x2_of_row(r);
            (avg[r] - theta_exact(&prof, t_final, x2).unwrap()).abs()
        })
        .fold(0.0f64, f64::max);
    let mass_final = lat.total();
    Ok(RunArtifacts {
        config: *cfg,
        final_lattice: lat.clone(),
        averages,
        snapshots,
        recursion,
        sup_to_recursion,
        l1_to_recursion,
        sup_to_profile,
        mass_initial,
        mass_final,
    })
}

/// Outermost rows where the mean profile departs from `±1` by more than
/// `threshold`; returns the front coordinates `(lower, upper)`.
pub fn front_positions(lat: &Lattice, threshold: f64) -> (f64, f64) {
    let avg = line_average(lat);
    let mut lower = 0.0;
    let mut upper = 0.0;
    for (row, &v) in avg.iter().enumerate() {
        if (v + 1.0).abs() > threshold {
            lower = lat.x2_of_row(row);
            break;
        }
    }
    for (row, &v) in avg.iter().enumerate().rev() {
        if (v - 1.0).abs() > threshold {
            upper = lat.x2_of_row(row);
            break;
        }
    }
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atwood::make_atwood;

    #[test]
    fn swap_probability_values() {
        let p0 = make_atwood(0.0).unwrap();
        assert_eq!(swap_probability(0.7, &p0), 0.5);
        assert_eq!(swap_probability(-0.3, &p0), 0.5);
        let p = make_atwood(0.5).unwrap();
        assert_eq!(swap_probability(0.0, &p), 0.25);
        assert!((swap_probability(1.0, &p) - 0.5).abs() < 1e-15);
        assert!((swap_probability(-1.0, &p) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn stable_lattice_is_fixed() {
        // -1 above +1 everywhere: no unstable pair.
        let p = make_atwood(0.3).unwrap();
        let mut lat = Lattice::flat(8, 16, 0.1);
        for v in lat.values.iter_mut() {
            *v = -*v;
        }
        let mut rngs = column_rngs(1, 8);
        let next = mc_step(&lat, &p, &mut rngs);
        assert_eq!(next.values, lat.values);
    }

    #[test]
    fn single_pair_bernoulli_frequency() {
        // One unstable pair per column; at A = 0 it swaps w.p. 1/2.
        let p = make_atwood(0.0).unwrap();
        let n_cols = 10_000;
        let lat = Lattice::flat(n_cols, 4, 0.1);
        let mut rngs = column_rngs(123, n_cols);
        let next = mc_step(&lat, &p, &mut rngs);
        // Count swaps at the interface rows (1, 2).
        let swapped = (0..n_cols)
            .filter(|col| next.values[2 * n_cols + col] == -1)
            .count();
        let freq = swapped as f64 / n_cols as f64;
        let sigma = 0.5 / (n_cols as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * sigma, "freq = {freq}");
    }

    #[test]
    fn mass_exactly_conserved() {
        let p = make_atwood(0.5).unwrap();
        let mut lat = Lattice::flat(64, 64, 0.05);
        let total = lat.total();
        let mut rngs = column_rngs(7, 64);
        for _ in 0..50 {
            lat = mc_step(&lat, &p, &mut rngs);
            assert_eq!(lat.total(), total);
        }
    }

    #[test]
    fn support_moves_one_cell_per_step() {
        let p = make_atwood(0.5).unwrap();
        let mut lat = Lattice::flat(32, 128, 0.05);
        let mut rngs = column_rngs(3, 32);
        for step in 1..=20 {
            lat = mc_step(&lat, &p, &mut rngs);
            let mid = lat.n_rows / 2;
            for row in 0..lat.n_rows {
                let expected: i8 = if row >= mid { 1 } else { -1 };
                let dist = if row >= mid { row - mid } else { mid - 1 - row };
                if dist >= step {
                    for col in 0..lat.n_cols {
                        assert_eq!(lat.values[row * lat.n_cols + col], expected);
                    }
                }
            }
        }
    }

    #[test]
    fn recursion_fixed_points_and_identity() {
        let p = make_atwood(0.4).unwrap();
        let ones = vec![1.0; 32];
        assert_eq!(recursion_run(&ones, &p, 10), ones);
        // Occupation tracking matches the mean recursion to round-off.
        let theta0: Vec<f64> = (0..64).map(|r| if r >= 32 { 1.0 } else { -1.0 }).collect();
        let a = recursion_run(&theta0, &p, 40);
        let b = recursion_run_occupation(&theta0, &p, 40);
        for (t, (dp, dm)) in a.iter().zip(b.iter()) {
            assert!((dp + dm - 1.0).abs() < 1e-14);
            assert!((t - (dp - dm)).abs() < 1e-13);
        }
    }

    #[test]
    fn recursion_stays_monotone_and_bounded() {
        // Monotone preservation holds while the support stays off the
        // walls (the walls themselves pile up, as in the confined tank).
        let p = make_atwood(-0.5).unwrap();
        let theta0: Vec<f64> = (0..128).map(|r| if r >= 64 { 1.0 } else { -1.0 }).collect();
        let out = recursion_run(&theta0, &p, 50);
        for w in out.windows(2) {
            assert!(w[1] >= w[0] - 1e-13, "monotonicity broken");
        }
        assert!(out.iter().all(|v| v.abs() <= 1.0 + 1e-13));
    }

    #[test]
    fn recursion_approaches_profile() {
        // Balanced case, α = c a / 2 = 1/2 with c = 2, lattice spacing
        // r = c h = 1/256 (the corner layer of the first-order scheme
        // dominates the sup error and needs this resolution for 0.05).
        let p = make_atwood(0.0).unwrap();
        let h = 1.0 / 512.0;
        let c = 2.0;
        let steps = 512;
        let n_rows = 1536;
        let theta0: Vec<f64> = (0..n_rows)
            .map(|r| if r >= n_rows / 2 { 1.0 } else { -1.0 })
            .collect();
        let out = recursion_run(&theta0, &p, steps);
        let prof = EntropyProfile::new(p, 0.5).unwrap();
        let cell = c * h;
        let sup = (0..n_rows)
            .map(|r| {
                let x2 = cell * (r as f64 - n_rows as f64 / 2.0 + 0.5);
                (out[r] - theta_exact(&prof, 1.0, x2).unwrap()).abs()
            })
            .fold(0.0f64, f64::max);
        assert!(sup <= 0.05, "sup distance {sup}");
    }

    #[test]
    fn line_average_values() {
        let lat = Lattice::flat(16, 8, 0.1);
        let avg = line_average(&lat);
        assert_eq!(avg[0], -1.0);
        assert_eq!(avg[7], 1.0);
    }

    #[test]
    fn simulation_is_deterministic() {
        let cfg = WalkConfig {
            params: make_atwood(0.5).unwrap(),
            n_cols: 128,
            n_rows: 64,
            c: 2.0,
            h: 1.0 / 32.0,
            steps: 32,
            seed: 42,
            snapshot_every: 16,
        };
        let a = run_simulation(&cfg).unwrap();
        let b = run_simulation(&cfg).unwrap();
        assert_eq!(a.final_lattice.values, b.final_lattice.values);
        assert_eq!(a.averages, b.averages);
        assert_eq!(a.mass_initial, a.mass_final);
    }

    #[test]
    fn config_validation() {
        let p = make_atwood(0.0).unwrap();
        let bad = WalkConfig {
            params: p,
            n_cols: 8,
            n_rows: 16,
            c: 5.0, // α = 5/4 > 1
            h: 0.1,
            steps: 1,
            seed: 0,
            snapshot_every: 0,
        };
        assert!(bad.validate().is_err());
    }
}
