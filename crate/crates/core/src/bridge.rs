//! Exact-in-law simulation of pinned Brownian bridges and of the
//! information process.
//!
//! A bridge pinned to zero at time `r` is sampled sequentially on a grid:
//! given the value `x` at time `s`, the value at `t ∈ (s, r]` is Gaussian
//! with mean `x·(r−t)/(r−s)` and variance `(t−s)(r−t)/(r−s)`. This is the
//! one-step conditional law of the pinned diffusion, so the sampled vector
//! has exactly the bridge marginals and covariances for any grid.
//!
//! The information process carries a random pin: draw `τ` from the default
//! law, then sample the bridge pinned at `τ`. Conditionally on `τ = r` the
//! process is precisely the bridge `β^r`, which justifies simulating it this
//! way without ever materializing the driving Brownian motion. Values at
//! grid times `t ≥ τ` are stored as literal zeros: the zero set is a
//! model-level identity (`{β_t = 0} = {τ ≤ t}`), not a numerical
//! coincidence, so "has the default happened" is tested by exact equality.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::timelaw::DefaultLaw;

/// Geometric refinement ratio of near-pin grid ladders.
const LADDER_RATIO: f64 = 0.5;

/// Minimum grid spacing near the pin, as a fraction of the pin time.
const MIN_SPACING_FRAC: f64 = 1e-9;

/// Fraction of the pin time kept as a tail beyond the pin.
const TAIL_FRACTION: f64 = 0.25;
const TAIL_POINTS: usize = 4;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("transition needs 0 <= s < t <= r with finite values, got s={s}, t={t}, r={r}")]
    BadTransitionTimes { s: f64, t: f64, r: f64 },
    #[error("time grid must start at 0 and increase strictly")]
    BadGrid,
    #[error("pin time must be finite and positive")]
    BadPin,
}

/// Refinement policy of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridPolicy {
    /// Evenly spaced points.
    Uniform,
    /// Evenly spaced points plus geometric ladders shrinking into each
    /// target time with ratio 1/2, down to a spacing of `1e-9` times the
    /// horizon. Hitting detection error is dominated by spacing near the
    /// pin, so that is where the points go.
    GeometricNearTarget,
}

/// Strictly increasing sampling times starting at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    times: Vec<f64>,
    policy: GridPolicy,
}

impl TimeGrid {
    /// `steps + 1` evenly spaced points on `[0, t_end]`.
    pub fn uniform(t_end: f64, steps: usize) -> TimeGrid {
        assert!(t_end > 0.0 && steps >= 1);
        let times = (0..=steps)
            .map(|i| t_end * i as f64 / steps as f64)
            .collect();
        TimeGrid {
            times,
            policy: GridPolicy::Uniform,
        }
    }

    /// Uniform base plus geometric ladders around each target.
    pub fn geometric_near_targets(t_end: f64, base_steps: usize, targets: &[f64]) -> TimeGrid {
        assert!(t_end > 0.0 && base_steps >= 1);
        let mut times: Vec<f64> = (0..=base_steps)
            .map(|i| t_end * i as f64 / base_steps as f64)
            .collect();
        let floor = MIN_SPACING_FRAC * t_end;
        for &target in targets {
            if !(0.0..=t_end).contains(&target) {
                continue;
            }
            times.push(target);
            let mut offset = t_end * LADDER_RATIO;
            while offset >= floor {
                for t in [target - offset, target + offset] {
                    if t > 0.0 && t < t_end {
                        times.push(t);
                    }
                }
                offset *= LADDER_RATIO;
            }
        }
        TimeGrid::from_sorted(times, GridPolicy::GeometricNearTarget)
    }

    /// Sorts, deduplicates and prepends 0 when missing.
    pub fn from_times(mut times: Vec<f64>) -> Result<TimeGrid, BridgeError> {
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(BridgeError::BadGrid);
        }
        times.push(0.0);
        Ok(TimeGrid::from_sorted(times, GridPolicy::Uniform))
    }

    fn from_sorted(mut times: Vec<f64>, policy: GridPolicy) -> TimeGrid {
        times.push(0.0);
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        times.dedup();
        TimeGrid { times, policy }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn policy(&self) -> GridPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Index of the first grid time `>= t`, if any.
    pub fn index_at_or_after(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|x| *x >= t)
    }
}

/// Grid construction recipe for information paths.
#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    pub policy: GridPolicy,
    /// Steps of the uniform base grid on `[0, τ]`.
    pub base_steps: usize,
}

impl GridSpec {
    pub fn uniform(base_steps: usize) -> GridSpec {
        GridSpec {
            policy: GridPolicy::Uniform,
            base_steps,
        }
    }

    pub fn geometric(base_steps: usize) -> GridSpec {
        GridSpec {
            policy: GridPolicy::GeometricNearTarget,
            base_steps,
        }
    }
}

/// One-step conditional law of the bridge pinned to zero at `r`: the value
/// at `t` given value `x` at `s` is Gaussian with the returned
/// `(mean, variance)`.
pub fn bridge_transition(x: f64, s: f64, t: f64, r: f64) -> Result<(f64, f64), BridgeError> {
    if !(x.is_finite() && s.is_finite() && t.is_finite() && r.is_finite())
        || s < 0.0
        || s >= t
        || t > r
    {
        return Err(BridgeError::BadTransitionTimes { s, t, r });
    }
    let mean = x * (r - t) / (r - s);
    let variance = ((t - s) * (r - t) / (r - s)).max(0.0);
    Ok((mean, variance))
}

/// Bridge path pinned to zero at `pin`; values at grid times `>= pin` are
/// exact zeros.
#[derive(Debug, Clone, Serialize)]
pub struct BridgePath {
    pub pin: f64,
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl BridgePath {
    /// Value at a grid time, by index.
    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }
}

/// Sample the bridge pinned at `pin` on the grid. Grid times past the pin
/// get the exact zero sentinel.
pub fn sample_bridge_path(pin: f64, grid: &TimeGrid, rng: &mut impl Rng) -> BridgePath {
    let times = grid.times();
    let mut values = vec![0.0; times.len()];
    let mut prev_t = 0.0;
    let mut prev_v = 0.0;
    for (i, &t) in times.iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        if t >= pin {
            values[i] = 0.0;
            continue;
        }
        let (mean, variance) =
            bridge_transition(prev_v, prev_t, t, pin).expect("grid is increasing and below pin");
        let v = if variance > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            mean + variance.sqrt() * z
        } else {
            mean
        };
        values[i] = v;
        prev_t = t;
        prev_v = v;
    }
    BridgePath {
        pin,
        grid: grid.clone(),
        values,
    }
}

/// Bridge path with lazily refinable sampling times.
///
/// Starts from an eagerly sampled skeleton; conditional values at new times
/// are inserted on demand via the pinned-segment midpoint law, so deep cover
/// refinements only pay for the times they actually look at. The joint law
/// of all queried values is exactly the bridge law, whatever the insertion
/// order.
#[derive(Debug, Clone)]
pub struct LazyBridge {
    pin: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl LazyBridge {
    /// Wrap an eagerly sampled path.
    pub fn from_path(pin: f64, times: Vec<f64>, values: Vec<f64>) -> LazyBridge {
        debug_assert!(times.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(times.len(), values.len());
        LazyBridge { pin, times, values }
    }

    pub fn pin(&self) -> f64 {
        self.pin
    }

    /// Value at `t`, sampling and caching it if not yet known. `t` must lie
    /// within the skeleton's span.
    pub fn value_at(&mut self, t: f64, rng: &mut impl Rng) -> f64 {
        match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => self.values[i],
            Err(i) => {
                assert!(
                    i > 0 && i < self.times.len(),
                    "query {t} outside the sampled span"
                );
                let v = if t >= self.pin {
                    0.0
                } else {
                    let (t1, v1) = (self.times[i - 1], self.values[i - 1]);
                    let (t2, v2) = if self.times[i] >= self.pin {
                        (self.pin, 0.0)
                    } else {
                        (self.times[i], self.values[i])
                    };
                    let mean = v1 + (v2 - v1) * (t - t1) / (t2 - t1);
                    let var = (t - t1) * (t2 - t) / (t2 - t1);
                    let z: f64 = StandardNormal.sample(rng);
                    mean + var.max(0.0).sqrt() * z
                };
                self.times.insert(i, t);
                self.values.insert(i, v);
                v
            }
        }
    }

    /// Known `(time, value)` samples inside `[lo, hi]`, in time order.
    pub fn known_in(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let start = self.times.partition_point(|t| *t < lo);
        let end = self.times.partition_point(|t| *t <= hi);
        (start..end).map(|i| (self.times[i], self.values[i]))
    }

    /// Upper bound on the probability of a zero in `[lo, hi]` given the
    /// values sampled so far: the sum of the exact crossing probabilities of
    /// every sampled segment overlapping the window. Used to prune cover
    /// subtrees that cannot plausibly contain a zero.
    pub fn zero_prob_bound(&self, lo: f64, hi: f64) -> f64 {
        let mut j = self.times.partition_point(|t| *t <= lo).max(1);
        let mut total = 0.0;
        while j < self.times.len() && self.times[j - 1] < hi {
            let a = self.values[j - 1];
            let b = self.values[j];
            if a * b <= 0.0 {
                return 1.0;
            }
            total += (-2.0 * a * b / (self.times[j] - self.times[j - 1])).exp();
            if total >= 1.0 {
                return 1.0;
            }
            j += 1;
        }
        total
    }
}

/// Information path: a bridge pinned at the realized default time `τ`,
/// identically zero from `τ` on.
#[derive(Debug, Clone, Serialize)]
pub struct InfoPath {
    pub tau: f64,
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl InfoPath {
    pub fn is_after_tau(&self, idx: usize) -> bool {
        self.grid.times()[idx] >= self.tau
    }

    /// Grid index of `τ` (always present by construction).
    pub fn tau_index(&self) -> usize {
        self.grid
            .index_at_or_after(self.tau)
            .expect("tau is a grid point")
    }
}

/// Draw `τ` from the law, then sample the conditional bridge pinned at `τ`.
pub fn sample_information_path(
    law: &DefaultLaw,
    spec: &GridSpec,
    rng: &mut impl Rng,
) -> InfoPath {
    let tau = law.sample(rng);
    information_path_for_tau(tau, spec, &[], rng)
}

/// Information path conditional on `τ = tau`. `extra_times` (cover
/// endpoints, probe times) are merged into the grid; the grid always
/// contains `τ` itself and a short tail beyond it.
pub fn information_path_for_tau(
    tau: f64,
    spec: &GridSpec,
    extra_times: &[f64],
    rng: &mut impl Rng,
) -> InfoPath {
    assert!(tau.is_finite() && tau > 0.0, "default time must be positive");
    let t_end = tau * (1.0 + TAIL_FRACTION);
    let mut grid = match spec.policy {
        GridPolicy::Uniform => TimeGrid::uniform(t_end, spec.base_steps.max(1)),
        GridPolicy::GeometricNearTarget => {
            TimeGrid::geometric_near_targets(t_end, spec.base_steps.max(1), &[tau])
        }
    };
    let mut times = std::mem::take(&mut grid.times);
    times.push(tau);
    for j in 1..=TAIL_POINTS {
        times.push(tau + (t_end - tau) * j as f64 / TAIL_POINTS as f64);
    }
    times.extend(
        extra_times
            .iter()
            .copied()
            .filter(|t| t.is_finite() && *t > 0.0 && *t <= t_end),
    );
    let grid = TimeGrid::from_sorted(times, spec.policy);
    let path = sample_bridge_path(tau, &grid, rng);
    InfoPath {
        tau,
        grid: path.grid,
        values: path.values,
    }
}
