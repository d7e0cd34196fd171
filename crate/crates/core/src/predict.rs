//! The predictability experiment.
//!
//! For a default law with support `Γ`, the pair `X_t = (dist_Γ(t), β_t)`
//! is continuous and adapted, its first zero `γ₀` is a predictable time, and
//! `γ₀ ≤ τ` always since `X_τ = (0, 0)`. When `Γ` avoids zero and has Riesz
//! capacity of order 1/2 equal to zero, `γ₀ = τ` almost surely — the default
//! is announced by the times at which `‖X‖` first drops below `1/n`. This
//! module estimates `P(γ₀ < τ)` by Monte Carlo and reports whether the run
//! is consistent with that picture.
//!
//! Detecting `γ₀ < τ` means detecting a zero of `β` at a time of `Γ`
//! strictly before the pin. Cover intervals are the unit of detection (the
//! crossing machinery of [`crate::hitting`]), but near the pin a plain
//! level-k cover is useless: the bridge revisits zero in every left
//! neighbourhood of `τ`, so cover intervals hugging the pin fire with
//! probability bounded away from zero no matter how deep the level — a pure
//! discretization artifact, since those zeros almost surely fall in the
//! gaps of a capacity-zero `Γ`. The detector therefore truncates the search
//! window at a fixed fraction of the pin: zeros are sought in
//! `cover_k(Γ) ∩ [δ, (1−c)·τ]` with `c =` [`PIN_TRUNCATION_FRAC`] and
//! `δ = min Γ / 2`. Over the window the cover converges to `Γ` as `k`
//! grows, and the window exhausts `(0, τ)` as `c` shrinks, so the detected
//! event approximates `{β hits 0 in Γ ∩ (0, τ)}` from inside — for interval
//! supports (where every cover zero is a genuine `Γ` zero) the truncation
//! barely matters, while for capacity-zero supports the estimates decay
//! with `k` instead of being pinned up by the artifact.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bridge::{information_path_for_tau, GridSpec, InfoPath, LazyBridge, TimeGrid};
use crate::hitting::{cover_pieces, first_cover_zero, CoverScan};
use crate::setgeom::SetDescriptor;
use crate::stream::{self, Domain};
use crate::timelaw::DefaultLaw;

/// The detection window stops this fraction of `τ` short of the pin.
pub const PIN_TRUNCATION_FRAC: f64 = 1.0 / 32.0;

/// Default verdict threshold on the final-level estimate of `P(γ₀ < τ)`.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// Uniform base steps of the per-path grid.
const BASE_STEPS: usize = 64;

/// Cover level whose endpoints are merged into the eager sampling grid;
/// deeper levels are refined lazily during detection.
const EAGER_COVER_LEVEL: u32 = 6;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("law support contains 0, violating the hypothesis 0 ∉ Γ of the predictability criterion")]
    SupportContainsZero,
    #[error("need at least one cover level")]
    NoLevels,
    #[error("need at least one path")]
    NoPaths,
    #[error("verdict threshold must lie strictly between 0 and 1")]
    BadThreshold,
}

/// Declared first hit of `(0, 0)` by the pair process on one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroHit {
    pub time: f64,
    pub grid_index: usize,
    /// True iff the hit happened strictly before `τ`.
    pub strict: bool,
}

/// Pair process `X = (dist_Γ, β)` sampled on a grid, with the detected hit.
#[derive(Debug, Clone, Serialize)]
pub struct XPath {
    pub tau: f64,
    pub grid: TimeGrid,
    /// Distance of each grid time to `Γ` (component one; always `>= 0`).
    pub dist: Vec<f64>,
    /// Information-process values (component two).
    pub beta: Vec<f64>,
    pub hit: Option<ZeroHit>,
}

impl XPath {
    pub fn tau_index(&self) -> usize {
        self.grid
            .index_at_or_after(self.tau)
            .expect("tau is a grid point")
    }
}

/// Populate both components of `X` on the grid of an information path.
///
/// `τ` lies in `Γ` by construction, so `X` at `τ` is pinned to the exact
/// `(0, 0)` rather than left to the Cantor distance recursion's resolution.
pub fn build_x_path(info: &InfoPath, gamma: &SetDescriptor) -> XPath {
    let mut dist: Vec<f64> = info
        .grid
        .times()
        .iter()
        .map(|t| gamma.distance(*t))
        .collect();
    let ti = info.tau_index();
    dist[ti] = 0.0;
    XPath {
        tau: info.tau,
        grid: info.grid.clone(),
        dist,
        beta: info.values.clone(),
        hit: None,
    }
}

/// Right edge of the detection window for a path pinned at `tau`.
pub fn detection_window(tau: f64) -> f64 {
    tau * (1.0 - PIN_TRUNCATION_FRAC)
}

/// Earliest zero of the bridge detected in the truncated level-k cover of
/// `Γ`, else `τ` itself. The strict flag marks hits before `τ`.
pub fn first_zero_hit(
    x: &XPath,
    gamma: &SetDescriptor,
    level: u32,
    rng: &mut impl Rng,
) -> ZeroHit {
    let (pieces, plan) = cover_pieces(gamma);
    let scan = CoverScan {
        clip_lo: gamma.min_point().unwrap_or(0.0) * 0.5,
        clip_hi: detection_window(x.tau),
        target_level: level,
        plan,
    };
    let mut bridge = LazyBridge::from_path(x.tau, x.grid.times().to_vec(), x.beta.clone());
    match first_cover_zero(&pieces, &scan, &mut bridge, rng) {
        Some(t) => ZeroHit {
            time: t,
            // snap to the last eager grid time at or before the detection
            grid_index: x.grid.times().partition_point(|s| *s <= t).saturating_sub(1),
            strict: t < x.tau,
        },
        None => ZeroHit {
            time: x.tau,
            grid_index: x.tau_index(),
            strict: false,
        },
    }
}

/// Announcing times `T_n`: the first grid time at which `‖X‖ ≤ 1/n`, for
/// `n = 1..=n_max`. The declared hit counts as an exact zero, so the
/// sequence is nondecreasing and never overshoots the hit.
pub fn announcing_sequence(x: &XPath, n_max: usize) -> Vec<f64> {
    assert!(n_max >= 1);
    let hit_idx = x
        .hit
        .map(|h| h.grid_index)
        .unwrap_or_else(|| x.tau_index());
    let times = x.grid.times();
    let mut prefix_min = Vec::with_capacity(hit_idx + 1);
    let mut best = f64::INFINITY;
    for i in 0..=hit_idx {
        let norm = if i == hit_idx {
            0.0
        } else {
            x.dist[i].hypot(x.beta[i])
        };
        best = best.min(norm);
        prefix_min.push(best);
    }
    let mut out = Vec::with_capacity(n_max);
    let mut ptr = 0usize;
    for n in 1..=n_max {
        let threshold = 1.0 / n as f64;
        while prefix_min[ptr] > threshold {
            ptr += 1; // prefix_min[hit_idx] == 0, so this terminates
        }
        out.push(times[ptr]);
    }
    out
}

/// Simulate one experiment path: draw `τ`, sample the information path on a
/// grid that includes all detection endpoints, build `X`, detect the hit.
pub fn simulate_path(
    law: &DefaultLaw,
    gamma: &SetDescriptor,
    level: u32,
    rng: &mut impl Rng,
) -> XPath {
    let tau = law.sample(rng);
    simulate_path_for_tau(tau, gamma, level, rng)
}

/// Same as [`simulate_path`] with the pin fixed; used for the per-atom
/// conditional estimates.
pub fn simulate_path_for_tau(
    tau: f64,
    gamma: &SetDescriptor,
    level: u32,
    rng: &mut impl Rng,
) -> XPath {
    // merge the shallow cover endpoints into the eager grid so the pair
    // process is observed where it matters; deeper refinement is lazy
    let window = detection_window(tau);
    let delta = gamma.min_point().unwrap_or(0.0) * 0.5;
    let shallow = gamma
        .cover(level.min(EAGER_COVER_LEVEL))
        .intersect(delta, window);
    let extras: Vec<f64> = shallow
        .intervals
        .iter()
        .flat_map(|iv| [iv.lo, iv.hi])
        .collect();
    let info = information_path_for_tau(tau, &GridSpec::geometric(BASE_STEPS), &extras, rng);
    let mut x = build_x_path(&info, gamma);
    let hit = first_zero_hit(&x, gamma, level, rng);
    x.hit = Some(hit);
    x
}

/// One level's estimate of `P(γ₀ < τ)`.
#[derive(Debug, Clone, Serialize)]
pub struct LevelEstimate {
    pub level: u32,
    pub estimate: f64,
    pub ci_halfwidth: f64,
    pub n_paths: usize,
}

/// Conditional estimate `P(γ_Γ < r)` for one atom of an atomic law.
#[derive(Debug, Clone, Serialize)]
pub struct AtomConditional {
    pub time: f64,
    pub weight: f64,
    pub estimate: f64,
    pub ci_halfwidth: f64,
}

/// Check of the mixture decomposition: the joint estimate must equal the
/// weight-averaged conditional estimates within the combined 95% interval.
#[derive(Debug, Clone, Serialize)]
pub struct MixtureCheck {
    pub joint: f64,
    pub mixed: f64,
    pub discrepancy: f64,
    pub combined_ci: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictFlags {
    /// Monotone-trend decision: eligible support, estimates nonincreasing in
    /// the level (within CI slack) and final estimate under the threshold.
    /// Never a claim of exact zero.
    pub consistent_with_predictable: bool,
    /// Final estimate bounded away from zero with stable last levels.
    pub positive_hitting: bool,
}

/// Full output of the predictability experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub law: DefaultLaw,
    pub levels: Vec<u32>,
    pub estimates: Vec<LevelEstimate>,
    pub per_atom: Option<Vec<AtomConditional>>,
    pub mixture: Option<MixtureCheck>,
    pub verdict: VerdictFlags,
    pub threshold: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// Estimate `P(γ₀ < τ)` across cover levels and assemble the report.
///
/// Rejects laws whose support contains 0 (the predictability criterion
/// requires `0 ∉ Γ`); the exponential law falls under this rule. Interval
/// supports run as contrast cases but never earn the
/// consistent-with-predictable flag.
pub fn predictability_experiment(
    law: &DefaultLaw,
    levels: &[u32],
    n_paths: usize,
    seed: u64,
    threshold: f64,
) -> Result<ExperimentReport, ExperimentError> {
    if levels.is_empty() {
        return Err(ExperimentError::NoLevels);
    }
    if n_paths == 0 {
        return Err(ExperimentError::NoPaths);
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(ExperimentError::BadThreshold);
    }
    let gamma = law.support();
    if gamma.min_point().is_none_or(|m| m <= 0.0) {
        return Err(ExperimentError::SupportContainsZero);
    }

    let mut estimates = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut strict_hits = 0usize;
        for path in 0..n_paths {
            let mut rng = stream::substream(seed, Domain::Experiment, level, path as u64);
            let x = simulate_path(law, &gamma, level, &mut rng);
            if x.hit.expect("hit is set").strict {
                strict_hits += 1;
            }
        }
        let p = strict_hits as f64 / n_paths as f64;
        estimates.push(LevelEstimate {
            level,
            estimate: p,
            ci_halfwidth: 1.96 * (p * (1.0 - p) / n_paths as f64).sqrt(),
            n_paths,
        });
    }

    let final_level = *levels.last().expect("nonempty");
    let final_est = estimates.last().expect("nonempty").clone();

    let (per_atom, mixture) = if let DefaultLaw::Atomic { atoms } = law {
        let mut conditionals = Vec::with_capacity(atoms.len());
        for (idx, atom) in atoms.iter().enumerate() {
            let salt = final_level.wrapping_mul(1009).wrapping_add(idx as u32);
            let mut strict_hits = 0usize;
            for path in 0..n_paths {
                let mut rng =
                    stream::substream(seed, Domain::AtomConditional, salt, path as u64);
                let x = simulate_path_for_tau(atom.time, &gamma, final_level, &mut rng);
                if x.hit.expect("hit is set").strict {
                    strict_hits += 1;
                }
            }
            let p = strict_hits as f64 / n_paths as f64;
            conditionals.push(AtomConditional {
                time: atom.time,
                weight: atom.weight,
                estimate: p,
                ci_halfwidth: 1.96 * (p * (1.0 - p) / n_paths as f64).sqrt(),
            });
        }
        let mixed: f64 = conditionals
            .iter()
            .map(|c| c.weight * c.estimate)
            .sum();
        let mixed_var: f64 = conditionals
            .iter()
            .map(|c| (c.weight * c.ci_halfwidth).powi(2))
            .sum();
        let combined_ci = (final_est.ci_halfwidth.powi(2) + mixed_var).sqrt();
        let discrepancy = (final_est.estimate - mixed).abs();
        let mixture = MixtureCheck {
            joint: final_est.estimate,
            mixed,
            discrepancy,
            combined_ci,
            holds: discrepancy <= combined_ci,
        };
        (Some(conditionals), Some(mixture))
    } else {
        (None, None)
    };

    let eligible = matches!(
        gamma,
        SetDescriptor::FinitePoints { .. } | SetDescriptor::Cantor { .. }
    );
    let trend_nonincreasing = estimates.windows(2).all(|w| {
        w[1].estimate <= w[0].estimate + w[0].ci_halfwidth + w[1].ci_halfwidth
    });
    let consistent_with_predictable =
        eligible && trend_nonincreasing && final_est.estimate < threshold;
    let positive_hitting = final_est.estimate - final_est.ci_halfwidth > 0.0
        && estimates.len() >= 2
        && {
            let prev = &estimates[estimates.len() - 2];
            (final_est.estimate - prev.estimate).abs()
                <= final_est.ci_halfwidth + prev.ci_halfwidth
        };

    Ok(ExperimentReport {
        law: law.clone(),
        levels: levels.to_vec(),
        estimates,
        per_atom,
        mixture,
        verdict: VerdictFlags {
            consistent_with_predictable,
            positive_hitting,
        },
        threshold,
        n_paths,
        seed,
    })
}
