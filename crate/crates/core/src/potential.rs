//! Riesz s-energies, the parabolic 0-energy, and capacity estimates.
//!
//! Energies are evaluated on piecewise-uniform probability measures: mass
//! `w_i` spread uniformly over interval `i` (a point mass if the interval is
//! degenerate). For such measures the double integral
//! `∬ |x−y|^{−s} dν dν` has a closed form per interval pair, obtained from
//! the antiderivative `F(u) = u^{2−s} / ((1−s)(2−s))`, so the energy is a
//! quadratic form in the weights with no discretization bias. Any point mass
//! makes the energy infinite.
//!
//! The parabolic 0-energy of the space-time measure `ν ⊗ δ₀` — kernel
//! `exp(−‖x−y‖²/(2|t−s|)) / |t−s|^{n/2}` with `n = 1` and both spatial
//! coordinates pinned at the origin, where the Gaussian factor is
//! identically one — reduces to the Riesz energy of order 1/2. It is
//! evaluated on a deliberately different route (difference-distribution
//! densities integrated by Gauss–Legendre after a square-root substitution)
//! so the two implementations cross-check each other to near machine
//! precision.
//!
//! Capacity is the reciprocal of the minimal energy over the probability
//! simplex on a cover; the minimum is found by projected gradient descent
//! with Barzilai–Borwein steps. Cover capacities over-approximate the set
//! capacity and are reported level by level, never as a single number.

use serde::Serialize;
use std::sync::OnceLock;
use thiserror::Error;

use crate::quad::gauss_legendre;
use crate::setgeom::{CoverLevel, Interval, SetDescriptor};

/// Default relative tolerance of the energy minimizer.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Iteration cap of the energy minimizer.
pub const MAX_ITERATIONS: usize = 100_000;

/// Absolute tolerance on the total mass of a discrete measure.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("energy order s must lie strictly between 0 and 1")]
    BadOrder,
    #[error("tolerance must be finite and positive")]
    BadTolerance,
    #[error("measure needs matching, sorted, non-overlapping intervals and nonnegative weights summing to 1 within {MASS_TOL:e}")]
    BadMeasure,
    #[error("cover must be nonempty")]
    EmptyCover,
    #[error("energies need bounded intervals")]
    Unbounded,
    #[error("cover at level {level} would have {count} intervals; deepest supported is 2^22")]
    CoverTooLarge { level: u32, count: u64 },
}

/// Piecewise-uniform probability measure on disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    intervals: Vec<Interval>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Intervals must be sorted and non-overlapping (touching endpoints are
    /// fine); weights nonnegative with total mass 1.
    pub fn new(intervals: Vec<Interval>, weights: Vec<f64>) -> Result<Self, EnergyError> {
        if intervals.len() != weights.len() || intervals.is_empty() {
            return Err(EnergyError::BadMeasure);
        }
        if intervals
            .iter()
            .any(|iv| !iv.lo.is_finite() || !iv.hi.is_finite())
        {
            return Err(EnergyError::Unbounded);
        }
        if intervals.iter().any(|iv| iv.lo > iv.hi)
            || intervals.windows(2).any(|w| w[0].hi > w[1].lo)
        {
            return Err(EnergyError::BadMeasure);
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (total - 1.0).abs() > MASS_TOL {
            return Err(EnergyError::BadMeasure);
        }
        Ok(DiscreteMeasure { intervals, weights })
    }

    /// Equal weights on the intervals of a cover.
    pub fn uniform_on(cover: &CoverLevel) -> Result<Self, EnergyError> {
        let n = cover.intervals.len();
        if n == 0 {
            return Err(EnergyError::EmptyCover);
        }
        Self::new(cover.intervals.clone(), vec![1.0 / n as f64; n])
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True if some point mass carries positive weight.
    pub fn has_weighted_atom(&self) -> bool {
        self.intervals
            .iter()
            .zip(&self.weights)
            .any(|(iv, w)| iv.is_degenerate() && *w > 0.0)
    }
}

/// Outcome of an energy minimization / capacity estimate.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    /// Minimal energy found; `inf` encodes the infinite-energy case.
    pub energy: f64,
    /// Reciprocal of the energy; exactly 0 when the energy is infinite.
    pub capacity: f64,
    pub iterations: usize,
    pub achieved_tol: f64,
    pub converged: bool,
    /// Cover level the estimate was computed on.
    pub level: u32,
    pub n_intervals: usize,
}

impl EnergyReport {
    fn from_energy(energy: f64, iterations: usize, achieved_tol: f64, level: u32, n: usize) -> Self {
        EnergyReport {
            energy,
            capacity: if energy.is_finite() { 1.0 / energy } else { 0.0 },
            iterations,
            achieved_tol,
            converged: true,
            level,
            n_intervals: n,
        }
    }
}

/// Riesz s-energy `∬ |x−y|^{−s} dν dν` of a piecewise-uniform measure,
/// `0 < s < 1`. Point masses with positive weight give `inf`.
pub fn riesz_energy(nu: &DiscreteMeasure, s: f64) -> Result<f64, EnergyError> {
    if !(s > 0.0 && s < 1.0) {
        return Err(EnergyError::BadOrder);
    }
    if nu.has_weighted_atom() {
        return Ok(f64::INFINITY);
    }
    let n = nu.intervals.len();
    let mut total = 0.0;
    for i in 0..n {
        let wi = nu.weights[i];
        if wi == 0.0 {
            continue;
        }
        total += wi * wi * riesz_kernel(s, nu.intervals[i], nu.intervals[i]);
        for j in (i + 1)..n {
            let wj = nu.weights[j];
            if wj == 0.0 {
                continue;
            }
            total += 2.0 * wi * wj * riesz_kernel(s, nu.intervals[i], nu.intervals[j]);
        }
    }
    Ok(total)
}

/// Parabolic 0-energy of `ν ⊗ δ₀`: the space-time kernel with the spatial
/// part collapsed at the origin, computed on the difference-distribution
/// route (see module docs). Coincides with `riesz_energy(ν, 1/2)`.
pub fn parabolic_zero_energy(nu: &DiscreteMeasure) -> f64 {
    if nu.has_weighted_atom() {
        return f64::INFINITY;
    }
    let n = nu.intervals.len();
    let mut total = 0.0;
    for i in 0..n {
        let wi = nu.weights[i];
        if wi == 0.0 {
            continue;
        }
        total += wi * wi * parabolic_kernel(nu.intervals[i], nu.intervals[i]);
        for j in (i + 1)..n {
            let wj = nu.weights[j];
            if wj == 0.0 {
                continue;
            }
            total += 2.0 * wi * wj * parabolic_kernel(nu.intervals[i], nu.intervals[j]);
        }
    }
    total
}

/// Minimize the Riesz s-energy over probability weights on the cover.
///
/// The objective is a convex quadratic form with positive-definite kernel,
/// so the minimum is well defined; projected gradient descent with
/// Barzilai–Borwein steps and a monotone backtracking guard finds it.
/// Degenerate cover intervals are forced to weight zero (any mass there is
/// infinitely expensive); a cover of points alone has infinite energy.
pub fn minimize_energy(
    cover: &CoverLevel,
    s: f64,
    tol: f64,
) -> Result<(DiscreteMeasure, EnergyReport), EnergyError> {
    if !(s > 0.0 && s < 1.0) {
        return Err(EnergyError::BadOrder);
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(EnergyError::BadTolerance);
    }
    if cover.intervals.is_empty() {
        return Err(EnergyError::EmptyCover);
    }
    if cover
        .intervals
        .iter()
        .any(|iv| !iv.lo.is_finite() || !iv.hi.is_finite())
    {
        return Err(EnergyError::Unbounded);
    }

    let proper: Vec<usize> = (0..cover.intervals.len())
        .filter(|&i| !cover.intervals[i].is_degenerate())
        .collect();
    if proper.is_empty() {
        // Every probability measure on finitely many points has an atom.
        let n = cover.intervals.len();
        let nu = DiscreteMeasure::new(cover.intervals.clone(), vec![1.0 / n as f64; n])?;
        let report =
            EnergyReport::from_energy(f64::INFINITY, 0, 0.0, cover.level, n);
        return Ok((nu, report));
    }

    let n = proper.len();
    let q = kernel_matrix(&proper.iter().map(|&i| cover.intervals[i]).collect::<Vec<_>>(), s);
    let quad = |x: &[f64]| -> f64 {
        let mut e = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += q[i * n + j] * x[j];
            }
            e += x[i] * row;
        }
        e
    };
    let grad = |x: &[f64], g: &mut [f64]| {
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += q[i * n + j] * x[j];
            }
            g[i] = 2.0 * row;
        }
    };

    let mut x = vec![1.0 / n as f64; n];
    let mut energy = quad(&x);
    let mut g = vec![0.0; n];
    grad(&x, &mut g);
    let max_diag = (0..n).map(|i| q[i * n + i]).fold(0.0f64, f64::max);
    let mut step = 0.5 / max_diag.max(f64::MIN_POSITIVE);
    let mut achieved = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut calm_streak = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut trial_step = step;
        let mut y;
        let mut e_y;
        let mut halvings = 0;
        loop {
            y = project_simplex(&x.iter().zip(&g).map(|(xi, gi)| xi - trial_step * gi).collect::<Vec<_>>());
            e_y = quad(&y);
            if e_y <= energy || halvings >= 60 {
                break;
            }
            trial_step *= 0.5;
            halvings += 1;
        }
        if e_y > energy {
            // no descent direction left at fp resolution
            converged = true;
            achieved = 0.0;
            break;
        }
        let mut g_new = vec![0.0; n];
        grad(&y, &mut g_new);
        // Barzilai–Borwein step from the last displacement
        let mut dx_dx = 0.0;
        let mut dx_dg = 0.0;
        for i in 0..n {
            let dx = y[i] - x[i];
            let dg = g_new[i] - g[i];
            dx_dx += dx * dx;
            dx_dg += dx * dg;
        }
        if dx_dg > 0.0 {
            step = (dx_dx / dx_dg).clamp(1e-14, 1e14);
        }
        achieved = (energy - e_y) / e_y.max(f64::MIN_POSITIVE);
        x = y;
        energy = e_y;
        g = g_new;
        if achieved < tol {
            calm_streak += 1;
            if calm_streak >= 3 {
                converged = true;
                break;
            }
        } else {
            calm_streak = 0;
        }
    }

    let mut weights = vec![0.0; cover.intervals.len()];
    for (slot, &idx) in proper.iter().enumerate() {
        weights[idx] = x[slot];
    }
    let nu = DiscreteMeasure::new(cover.intervals.clone(), weights)?;
    let report = EnergyReport {
        energy,
        capacity: 1.0 / energy,
        iterations,
        achieved_tol: achieved,
        converged,
        level: cover.level,
        n_intervals: cover.intervals.len(),
    };
    Ok((nu, report))
}

/// Capacity of the level-`k` cover of a set: reciprocal of the minimal
/// energy. The empty set has capacity 0 by convention; cover capacities are
/// upper bounds that shrink toward the set capacity as the level grows.
pub fn capacity_estimate(
    set: &SetDescriptor,
    s: f64,
    level: u32,
    tol: f64,
) -> Result<EnergyReport, EnergyError> {
    if set.is_empty() {
        return Ok(EnergyReport::from_energy(f64::INFINITY, 0, 0.0, level, 0));
    }
    if !set.is_bounded() {
        return Err(EnergyError::Unbounded);
    }
    if let SetDescriptor::Cantor { branches, .. } = set {
        let count = (*branches as u64).saturating_pow(level);
        if count > (1 << 22) {
            return Err(EnergyError::CoverTooLarge { level, count });
        }
    }
    let cover = set.cover(level);
    minimize_energy(&cover, s, tol).map(|(_, report)| report)
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut rho = 0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            rho = i + 1;
            theta = t;
        }
    }
    if rho == 0 {
        // all mass to the largest coordinate
        let mut out = vec![0.0; v.len()];
        let (idx, _) = v
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
            .unwrap();
        out[idx] = 1.0;
        return out;
    }
    v.iter().map(|&vi| (vi - theta).max(0.0)).collect()
}

/// Symmetric kernel matrix of a set of proper intervals, row-major.
fn kernel_matrix(intervals: &[Interval], s: f64) -> Vec<f64> {
    let n = intervals.len();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = riesz_kernel(s, intervals[i], intervals[i]);
        for j in (i + 1)..n {
            let v = riesz_kernel(s, intervals[i], intervals[j]);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }
    q
}

/// Closed-form normalized Riesz kernel
/// `(1/(L_i L_j)) ∬ |x−y|^{−s}` over an interval pair.
fn riesz_kernel(s: f64, i: Interval, j: Interval) -> f64 {
    match (i.is_degenerate(), j.is_degenerate()) {
        (true, true) => {
            let d = (j.lo - i.lo).abs();
            if d == 0.0 {
                f64::INFINITY
            } else {
                d.powf(-s)
            }
        }
        (true, false) => point_interval_riesz(s, i.lo, j),
        (false, true) => point_interval_riesz(s, j.lo, i),
        (false, false) => {
            if i.lo == j.lo && i.hi == j.hi {
                // same interval: 2 L^{2-s} / ((1-s)(2-s)), normalized by L^2
                return 2.0 * i.len().powf(-s) / ((1.0 - s) * (2.0 - s));
            }
            let (left, right) = if i.lo <= j.lo { (i, j) } else { (j, i) };
            let f = |u: f64| u.max(0.0).powf(2.0 - s) / ((1.0 - s) * (2.0 - s));
            let num = f(right.hi - left.lo) - f(right.hi - left.hi) - f(right.lo - left.lo)
                + f(right.lo - left.hi);
            num / (left.len() * right.len())
        }
    }
}

/// `(1/L) ∫_J |t−p|^{−s} dt` for a point mass against a disjoint interval.
fn point_interval_riesz(s: f64, p: f64, j: Interval) -> f64 {
    let d_near = j.distance(p);
    let d_far = (j.lo - p).abs().max((j.hi - p).abs());
    if d_near == 0.0 && j.contains(p) && !j.is_degenerate() && p > j.lo && p < j.hi {
        // point inside the interval: integrable but our measures never
        // produce it (intervals are disjoint); split anyway for safety
        let a = p - j.lo;
        let b = j.hi - p;
        return (a.powf(1.0 - s) + b.powf(1.0 - s)) / ((1.0 - s) * j.len());
    }
    (d_far.powf(1.0 - s) - d_near.powf(1.0 - s)) / ((1.0 - s) * j.len())
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(8))
}

/// Integrate the polynomial `g ∘ (v ↦ v²)` over `[sqrt(lo), sqrt(hi)]` in
/// the substituted variable; exact for the quadratic integrands below.
fn sqrt_substituted(lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let (a, b) = (lo.sqrt(), hi.sqrt());
    let (nodes, weights) = gl8();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let sum: f64 = nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| {
            let v = mid + half * x;
            w * g(v * v)
        })
        .sum();
    2.0 * sum * half
}

/// Normalized parabolic pair term via the difference distribution: with
/// `u = t − s`, the cross-section density of an interval pair is a
/// trapezoid, and `∫ g(u) u^{−1/2} du` becomes a polynomial integral after
/// `u = v²`.
fn parabolic_kernel(i: Interval, j: Interval) -> f64 {
    match (i.is_degenerate(), j.is_degenerate()) {
        (true, true) => {
            let d = (j.lo - i.lo).abs();
            if d == 0.0 {
                f64::INFINITY
            } else {
                1.0 / d.sqrt()
            }
        }
        (true, false) => point_interval_parabolic(i.lo, j),
        (false, true) => point_interval_parabolic(j.lo, i),
        (false, false) => {
            if i.lo == j.lo && i.hi == j.hi {
                let l = i.len();
                // g(u) = 2 (L − u) on [0, L]
                let val = sqrt_substituted(0.0, l, |u| 2.0 * (l - u));
                return val / (l * l);
            }
            let (left, right) = if i.lo <= j.lo { (i, j) } else { (j, i) };
            let c1 = right.lo - left.hi;
            let c2 = (right.lo - left.lo).min(right.hi - left.hi);
            let c3 = (right.lo - left.lo).max(right.hi - left.hi);
            let c4 = right.hi - left.lo;
            let lmin = left.len().min(right.len());
            let rise = sqrt_substituted(c1, c2, |u| u - c1);
            let flat = sqrt_substituted(c2, c3, |_| lmin);
            let fall = sqrt_substituted(c3, c4, |u| c4 - u);
            (rise + flat + fall) / (left.len() * right.len())
        }
    }
}

fn point_interval_parabolic(p: f64, j: Interval) -> f64 {
    let d_near = j.distance(p);
    let d_far = (j.lo - p).abs().max((j.hi - p).abs());
    sqrt_substituted(d_near, d_far, |_| 1.0) / j.len()
}
