//! Closed time-set descriptors: covers, membership, distance, dimension.
//!
//! A [`SetDescriptor`] models a closed subset of `[0, ∞)` in one of three
//! shapes: a finite point set, a finite union of closed intervals, or a
//! generalized Cantor set with `m` branches of contraction ratio `ρ`
//! (`m·ρ ≤ 1` keeps branches disjoint). These are the supports `Γ` of the
//! default-time laws and the test sets `E` of the hitting experiments.
//!
//! Every descriptor exposes nested interval covers. Level `k` of the Cantor
//! cover is the k-th construction step: `m^k` intervals of length
//! `ρ^k·(b−a)`. Finite point sets cover themselves by degenerate intervals,
//! interval unions by themselves, at every level.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Recursion depth for Cantor distance/membership queries; `ρ^40` is below
/// double-precision resolution for every admissible ratio `ρ ≤ 1/2`.
pub const DISTANCE_DEPTH: u32 = 40;

/// Initial fp fuzz of the renormalized Cantor descent, in unit-frame
/// coordinates. The branch maps are expanding, so the fuzz grows by `1/ρ`
/// per level; once it becomes comparable to the gap width the descent has
/// exhausted double precision and resolves as "inside".
const UNIT_EPS: f64 = 1e-15;

/// Hard cap on generated cover sizes; deeper covers are a configuration bug.
const MAX_COVER_INTERVALS: u64 = 1 << 22;

#[derive(Debug, Error)]
pub enum SetError {
    #[error("finite-points must be finite, nonnegative and strictly increasing")]
    BadPoints,
    #[error("interval-union must consist of ordered, pairwise disjoint intervals with 0 <= lo <= hi")]
    BadIntervals,
    #[error("cantor base must satisfy 0 <= a < b with finite endpoints")]
    BadBase,
    #[error("cantor branch count must be at least 2")]
    BadBranches,
    #[error("cantor requires 0 < ratio and branches * ratio <= 1 so branches stay disjoint")]
    BadRatio,
    #[error("box counting needs at least 3 positive, strictly decreasing scales")]
    BadScales,
    #[error("operation requires a bounded set")]
    Unbounded,
}

/// Closed interval `[lo, hi]`; degenerate (`lo == hi`) intervals are points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi }
    }

    pub fn point(t: f64) -> Self {
        Interval { lo: t, hi: t }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    /// Euclidean distance from `t` to the interval.
    pub fn distance(&self, t: f64) -> f64 {
        if t < self.lo {
            self.lo - t
        } else if t > self.hi {
            t - self.hi
        } else {
            0.0
        }
    }

    /// Intersection with `[lo, hi]`, or `None` if empty.
    pub fn clip(&self, lo: f64, hi: f64) -> Option<Interval> {
        let a = self.lo.max(lo);
        let b = self.hi.min(hi);
        (a <= b).then(|| Interval::new(a, b))
    }
}

impl From<(f64, f64)> for Interval {
    fn from((lo, hi): (f64, f64)) -> Self {
        Interval { lo, hi }
    }
}

impl From<Interval> for (f64, f64) {
    fn from(iv: Interval) -> Self {
        (iv.lo, iv.hi)
    }
}

/// Closed subset of `[0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum SetDescriptor {
    /// Finite point set, sorted strictly increasing. May be empty.
    FinitePoints { points: Vec<f64> },
    /// Finite union of disjoint closed intervals, sorted. `hi` may be `inf`.
    IntervalUnion { intervals: Vec<Interval> },
    /// Generalized Cantor set on base `[a, b]`: at each step every interval
    /// is replaced by `branches` copies scaled by `ratio`, equally spaced so
    /// the first starts at the left endpoint and the last ends at the right.
    Cantor {
        a: f64,
        b: f64,
        branches: u32,
        ratio: f64,
    },
}

/// One level of a nested interval cover.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverLevel {
    pub level: u32,
    pub intervals: Vec<Interval>,
}

impl CoverLevel {
    /// Truncation utility: clip every cover interval to `[lo, hi]`.
    pub fn intersect(&self, lo: f64, hi: f64) -> CoverLevel {
        CoverLevel {
            level: self.level,
            intervals: self
                .intervals
                .iter()
                .filter_map(|iv| iv.clip(lo, hi))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    /// CSV listing with header `level,left,right`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,left,right\n");
        for iv in &self.intervals {
            out.push_str(&format!("{},{},{}\n", self.level, iv.lo, iv.hi));
        }
        out
    }
}

/// Box-counting regression result.
#[derive(Debug, Clone, Serialize)]
pub struct BoxCountEstimate {
    pub dimension: f64,
    /// Set when the regression is degenerate (all counts equal); the
    /// dimension is then reported as 0.
    pub degenerate: bool,
    /// `(scale, box count)` pairs actually used.
    pub counts: Vec<(f64, u64)>,
}

impl SetDescriptor {
    pub fn points(mut points: Vec<f64>) -> Result<Self, SetError> {
        points.sort_by(|a, b| a.partial_cmp(b).ok_or(()).unwrap());
        let ok = points.iter().all(|p| p.is_finite() && *p >= 0.0)
            && points.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(SetError::BadPoints);
        }
        Ok(SetDescriptor::FinitePoints { points })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self, SetError> {
        Self::intervals(vec![Interval::new(lo, hi)])
    }

    pub fn intervals(intervals: Vec<Interval>) -> Result<Self, SetError> {
        let ok = intervals
            .iter()
            .all(|iv| iv.lo.is_finite() && iv.lo >= 0.0 && iv.lo <= iv.hi && !iv.hi.is_nan())
            && intervals.windows(2).all(|w| w[0].hi < w[1].lo);
        if !ok {
            return Err(SetError::BadIntervals);
        }
        Ok(SetDescriptor::IntervalUnion { intervals })
    }

    pub fn cantor(a: f64, b: f64, branches: u32, ratio: f64) -> Result<Self, SetError> {
        let set = SetDescriptor::Cantor {
            a,
            b,
            branches,
            ratio,
        };
        set.validate()?;
        Ok(set)
    }

    /// Re-checks the structural invariants; used after deserializing.
    pub fn validate(&self) -> Result<(), SetError> {
        match self {
            SetDescriptor::FinitePoints { points } => {
                let ok = points.iter().all(|p| p.is_finite() && *p >= 0.0)
                    && points.windows(2).all(|w| w[0] < w[1]);
                ok.then_some(()).ok_or(SetError::BadPoints)
            }
            SetDescriptor::IntervalUnion { intervals } => {
                let ok = intervals.iter().all(|iv| {
                    iv.lo.is_finite() && iv.lo >= 0.0 && iv.lo <= iv.hi && !iv.hi.is_nan()
                }) && intervals.windows(2).all(|w| w[0].hi < w[1].lo);
                ok.then_some(()).ok_or(SetError::BadIntervals)
            }
            SetDescriptor::Cantor {
                a,
                b,
                branches,
                ratio,
            } => {
                if !(a.is_finite() && b.is_finite() && *a >= 0.0 && a < b) {
                    return Err(SetError::BadBase);
                }
                if *branches < 2 {
                    return Err(SetError::BadBranches);
                }
                if !(ratio.is_finite() && *ratio > 0.0 && *branches as f64 * ratio <= 1.0) {
                    return Err(SetError::BadRatio);
                }
                Ok(())
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SetDescriptor::FinitePoints { points } => points.is_empty(),
            SetDescriptor::IntervalUnion { intervals } => intervals.is_empty(),
            SetDescriptor::Cantor { .. } => false,
        }
    }

    pub fn min_point(&self) -> Option<f64> {
        match self {
            SetDescriptor::FinitePoints { points } => points.first().copied(),
            SetDescriptor::IntervalUnion { intervals } => intervals.first().map(|iv| iv.lo),
            SetDescriptor::Cantor { a, .. } => Some(*a),
        }
    }

    pub fn max_point(&self) -> Option<f64> {
        match self {
            SetDescriptor::FinitePoints { points } => points.last().copied(),
            SetDescriptor::IntervalUnion { intervals } => intervals.last().map(|iv| iv.hi),
            SetDescriptor::Cantor { b, .. } => Some(*b),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.max_point().is_none_or(f64::is_finite)
    }

    /// Level-`k` interval cover. The union contains the set exactly and the
    /// levels are nested.
    ///
    /// Panics if the Cantor cover would exceed `2^22` intervals; levels that
    /// deep are far beyond any sensible configuration.
    pub fn cover(&self, level: u32) -> CoverLevel {
        let intervals = match self {
            SetDescriptor::FinitePoints { points } => {
                points.iter().map(|p| Interval::point(*p)).collect()
            }
            SetDescriptor::IntervalUnion { intervals } => intervals.clone(),
            SetDescriptor::Cantor {
                a,
                b,
                branches,
                ratio,
            } => {
                let count = (*branches as u64).checked_pow(level);
                assert!(
                    count.is_some_and(|c| c <= MAX_COVER_INTERVALS),
                    "cantor cover level {level} too large"
                );
                let mut current = vec![Interval::new(*a, *b)];
                for _ in 0..level {
                    let mut next = Vec::with_capacity(current.len() * *branches as usize);
                    for iv in &current {
                        next.extend(cantor_children(*iv, *branches, *ratio));
                    }
                    current = next;
                }
                current
            }
        };
        CoverLevel { level, intervals }
    }

    /// Euclidean distance from `t` to the set.
    ///
    /// Exact for points and interval unions; for Cantor sets the recursion
    /// descends [`DISTANCE_DEPTH`] construction levels, so the result is
    /// within `ratio^DISTANCE_DEPTH · (b−a)` of the true distance.
    pub fn distance(&self, t: f64) -> f64 {
        match self {
            SetDescriptor::FinitePoints { points } => points
                .iter()
                .map(|p| (p - t).abs())
                .fold(f64::INFINITY, f64::min),
            SetDescriptor::IntervalUnion { intervals } => intervals
                .iter()
                .map(|iv| iv.distance(t))
                .fold(f64::INFINITY, f64::min),
            SetDescriptor::Cantor {
                a,
                b,
                branches,
                ratio,
            } => cantor_locate(*a, *b, *branches, *ratio, t, DISTANCE_DEPTH),
        }
    }

    /// Membership in the level-`depth` cover. For Cantor sets this
    /// over-approximates true membership by at most `ratio^depth · (b−a)`
    /// plus the fp fuzz of the descent.
    pub fn contains_at_depth(&self, t: f64, depth: u32) -> bool {
        match self {
            SetDescriptor::FinitePoints { points } => points.contains(&t),
            SetDescriptor::IntervalUnion { intervals } => {
                intervals.iter().any(|iv| iv.contains(t))
            }
            SetDescriptor::Cantor {
                a,
                b,
                branches,
                ratio,
            } => cantor_locate(*a, *b, *branches, *ratio, t, depth) == 0.0,
        }
    }

    /// Analytic Hausdorff dimension: 0 for point sets, 1 for interval
    /// unions, `log m / log(1/ρ)` for Cantor sets.
    pub fn hausdorff_dimension(&self) -> f64 {
        match self {
            SetDescriptor::FinitePoints { .. } => 0.0,
            SetDescriptor::IntervalUnion { intervals } => {
                if intervals.iter().any(|iv| !iv.is_degenerate()) {
                    1.0
                } else {
                    0.0
                }
            }
            SetDescriptor::Cantor {
                branches, ratio, ..
            } => (*branches as f64).ln() / (1.0 / ratio).ln(),
        }
    }

    /// Box-counting dimension estimate: least-squares slope of
    /// `log(box count)` against `log(1/scale)` over the given scales.
    pub fn box_counting_estimate(&self, scales: &[f64]) -> Result<BoxCountEstimate, SetError> {
        if scales.len() < 3
            || scales.iter().any(|s| !s.is_finite() || *s <= 0.0)
            || scales.windows(2).any(|w| w[0] <= w[1])
        {
            return Err(SetError::BadScales);
        }
        if !self.is_bounded() {
            return Err(SetError::Unbounded);
        }
        let counts: Vec<(f64, u64)> = scales
            .iter()
            .map(|&eps| (eps, self.count_boxes(eps)))
            .collect();
        if counts.iter().all(|(_, n)| *n == counts[0].1) {
            return Ok(BoxCountEstimate {
                dimension: 0.0,
                degenerate: true,
                counts,
            });
        }
        // Least-squares slope of ln N against ln(1/eps).
        let n = counts.len() as f64;
        let xs: Vec<f64> = counts.iter().map(|(e, _)| (1.0 / e).ln()).collect();
        let ys: Vec<f64> = counts.iter().map(|(_, c)| (*c as f64).ln()).collect();
        let xbar = xs.iter().sum::<f64>() / n;
        let ybar = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xbar) * (y - ybar))
            .sum();
        let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
        Ok(BoxCountEstimate {
            dimension: sxy / sxx,
            degenerate: false,
            counts,
        })
    }

    /// Number of grid boxes `[i·eps, (i+1)·eps)` meeting the set.
    fn count_boxes(&self, eps: f64) -> u64 {
        let mut ranges: Vec<(i64, i64)> = Vec::new();
        let idx = |t: f64| (t / eps).floor() as i64;
        match self {
            SetDescriptor::FinitePoints { points } => {
                ranges.extend(points.iter().map(|p| (idx(*p), idx(*p))));
            }
            SetDescriptor::IntervalUnion { intervals } => {
                ranges.extend(intervals.iter().map(|iv| (idx(iv.lo), idx(iv.hi))));
            }
            SetDescriptor::Cantor {
                a,
                b,
                branches,
                ratio,
            } => {
                // Descend until pieces are below one box, then mark their span.
                let mut stack = vec![Interval::new(*a, *b)];
                while let Some(iv) = stack.pop() {
                    if iv.len() <= eps {
                        ranges.push((idx(iv.lo), idx(iv.hi)));
                    } else {
                        stack.extend(cantor_children(iv, *branches, *ratio));
                    }
                }
            }
        }
        ranges.sort_unstable();
        let mut total = 0u64;
        let mut last: Option<(i64, i64)> = None;
        for (lo, hi) in ranges {
            match last {
                Some((_, lhi)) if lo <= lhi => {
                    if hi > lhi {
                        total += (hi - lhi) as u64;
                        last = Some((lo, hi));
                    }
                }
                _ => {
                    total += (hi - lo + 1) as u64;
                    last = Some((lo, hi));
                }
            }
        }
        total
    }
}

/// The `m` construction children of one Cantor interval.
pub(crate) fn cantor_children(
    iv: Interval,
    branches: u32,
    ratio: f64,
) -> impl Iterator<Item = Interval> {
    let len = iv.len() * ratio;
    let step = (iv.len() - len) / (branches - 1) as f64;
    (0..branches).map(move |j| {
        let lo = iv.lo + j as f64 * step;
        Interval::new(lo, lo + len)
    })
}

/// Distance from `t` to the level-`depth` Cantor cover, by renormalized
/// descent: work in the unit frame of the current construction interval and
/// zoom into the branch containing the point. Returns exactly 0 when the
/// descent stays inside a branch down to `depth` (or down to the depth at
/// which double precision is exhausted); in a gap, the facing branch
/// endpoints are set points, so the distance is exact up to an absolute fp
/// error of order `1e-15 · (b − a)`.
fn cantor_locate(a: f64, b: f64, branches: u32, ratio: f64, t: f64, depth: u32) -> f64 {
    let span = b - a;
    let mut x = (t - a) / span;
    if x <= 0.0 {
        return -x * span;
    }
    if x >= 1.0 {
        return (x - 1.0) * span;
    }
    let m = branches as f64;
    let step = (1.0 - ratio) / (m - 1.0);
    let gap_frame = step - ratio;
    let mut scale = span;
    let mut eps = UNIT_EPS;
    for _ in 0..depth {
        if 4.0 * eps > gap_frame {
            // gaps are no longer resolvable at this depth in f64
            return 0.0;
        }
        let j = (x / step).floor().clamp(0.0, m - 1.0);
        let branch_lo = j * step;
        let branch_hi = branch_lo + ratio;
        if x > branch_hi + eps {
            let next_lo = branch_lo + step;
            if next_lo - x <= eps {
                // fp drift put the point a hair left of the next branch
                x = 0.0;
            } else {
                // gap between branch j and branch j+1
                return (x - branch_hi).min(next_lo - x).max(0.0) * scale;
            }
        } else {
            x = ((x - branch_lo) / ratio).clamp(0.0, 1.0);
        }
        scale *= ratio;
        eps /= ratio;
    }
    0.0
}
