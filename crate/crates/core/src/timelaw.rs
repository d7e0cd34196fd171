//! Default-time distributions, including singular (Cantor-type) laws.
//!
//! A [`DefaultLaw`] is the distribution of the strictly positive random time
//! `τ` at which the credit event happens. Besides the usual atomic, uniform
//! and exponential cases it supports the Cantor-singular family: laws whose
//! CDF is a devil's staircase, carried by a set of fractal dimension
//! `log m / log(1/ρ)`. Those are the interesting inputs for the
//! predictability experiment, which needs supports of Riesz capacity zero.
//!
//! Laws are immutable after construction and samplers draw from
//! caller-owned random streams, so a single law can feed any number of
//! concurrent workers.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::setgeom::{Interval, SetDescriptor};

/// Absolute tolerance on the total mass of atomic weights.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Digit depth of the Cantor sampler; 64 digits exhaust an f64 mantissa for
/// every admissible ratio.
const CANTOR_DIGITS: u32 = 64;

#[derive(Debug, Error)]
pub enum LawError {
    #[error("atomic law needs at least one atom with strictly positive time, sorted strictly increasing")]
    BadAtoms,
    #[error("atomic weights must be positive and sum to 1 within {WEIGHT_TOL:e}")]
    BadWeights,
    #[error("uniform interval must satisfy 0 <= a < b with finite endpoints")]
    BadInterval,
    #[error("exponential rate must be finite and positive")]
    BadRate,
    #[error("cantor-singular base must satisfy 0 <= a < b with finite endpoints")]
    BadBase,
    #[error("cantor-singular requires branches >= 2 and branches * ratio <= 1 so branches stay disjoint")]
    BadCantorShape,
}

/// Point mass of an atomic law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub time: f64,
    pub weight: f64,
}

/// Distribution of the default time `τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DefaultLaw {
    /// Finitely many atoms with weights summing to one.
    Atomic { atoms: Vec<Atom> },
    /// Uniform on `[a, b]`.
    UniformInterval { a: f64, b: f64 },
    /// Exponential with the given rate; support is all of `[0, ∞)`, which
    /// the predictability experiment rejects. Kept as a contrast case.
    Exponential { rate: f64 },
    /// Singular continuous law on the Cantor set with `branches` branches of
    /// ratio `ratio` on base `[a, b]`; mass splits equally across branches.
    CantorSingular {
        a: f64,
        b: f64,
        branches: u32,
        ratio: f64,
    },
}

impl DefaultLaw {
    pub fn atomic(atoms: Vec<Atom>) -> Result<Self, LawError> {
        let law = DefaultLaw::Atomic { atoms };
        law.validate()?;
        Ok(law)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self, LawError> {
        let law = DefaultLaw::UniformInterval { a, b };
        law.validate()?;
        Ok(law)
    }

    pub fn exponential(rate: f64) -> Result<Self, LawError> {
        let law = DefaultLaw::Exponential { rate };
        law.validate()?;
        Ok(law)
    }

    pub fn cantor_singular(a: f64, b: f64, branches: u32, ratio: f64) -> Result<Self, LawError> {
        let law = DefaultLaw::CantorSingular {
            a,
            b,
            branches,
            ratio,
        };
        law.validate()?;
        Ok(law)
    }

    /// Re-checks the construction invariants; used after deserializing.
    pub fn validate(&self) -> Result<(), LawError> {
        match self {
            DefaultLaw::Atomic { atoms } => {
                if atoms.is_empty()
                    || atoms
                        .iter()
                        .any(|a| !a.time.is_finite() || a.time <= 0.0)
                    || atoms.windows(2).any(|w| w[0].time >= w[1].time)
                {
                    return Err(LawError::BadAtoms);
                }
                let total: f64 = atoms.iter().map(|a| a.weight).sum();
                if atoms.iter().any(|a| a.weight <= 0.0) || (total - 1.0).abs() > WEIGHT_TOL {
                    return Err(LawError::BadWeights);
                }
                Ok(())
            }
            DefaultLaw::UniformInterval { a, b } => {
                (a.is_finite() && b.is_finite() && *a >= 0.0 && a < b)
                    .then_some(())
                    .ok_or(LawError::BadInterval)
            }
            DefaultLaw::Exponential { rate } => (rate.is_finite() && *rate > 0.0)
                .then_some(())
                .ok_or(LawError::BadRate),
            DefaultLaw::CantorSingular {
                a,
                b,
                branches,
                ratio,
            } => {
                if !(a.is_finite() && b.is_finite() && *a >= 0.0 && a < b) {
                    return Err(LawError::BadBase);
                }
                if *branches < 2 || !(*ratio > 0.0 && *branches as f64 * ratio <= 1.0) {
                    return Err(LawError::BadCantorShape);
                }
                Ok(())
            }
        }
    }

    /// One i.i.d. draw from the law.
    ///
    /// Uniform and exponential use inverse-CDF sampling; atomic laws a
    /// cumulative scan; Cantor-singular laws a base-`m` digit expansion
    /// truncated once the digit scale falls below f64 resolution.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            DefaultLaw::Atomic { atoms } => {
                let u: f64 = rng.random();
                let mut cum = 0.0;
                for atom in atoms {
                    cum += atom.weight;
                    if u < cum {
                        return atom.time;
                    }
                }
                atoms.last().expect("validated nonempty").time
            }
            DefaultLaw::UniformInterval { a, b } => {
                let u: f64 = rng.random();
                a + (b - a) * u
            }
            DefaultLaw::Exponential { rate } => {
                // 1 - U is in (0, 1], keeping ln away from zero.
                let u: f64 = rng.random();
                -(1.0 - u).ln() / rate
            }
            DefaultLaw::CantorSingular {
                a,
                b,
                branches,
                ratio,
            } => {
                let step = (1.0 - ratio) / (*branches - 1) as f64;
                let mut x = 0.0;
                let mut scale = 1.0;
                for _ in 0..CANTOR_DIGITS {
                    let digit = rng.random_range(0..*branches);
                    x += step * digit as f64 * scale;
                    scale *= ratio;
                    if scale < f64::EPSILON / 2.0 {
                        break;
                    }
                }
                a + (b - a) * x
            }
        }
    }

    /// Right-continuous CDF `P(τ ≤ t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            DefaultLaw::Atomic { atoms } => atoms
                .iter()
                .filter(|a| a.time <= t)
                .map(|a| a.weight)
                .sum(),
            DefaultLaw::UniformInterval { a, b } => ((t - a) / (b - a)).clamp(0.0, 1.0),
            DefaultLaw::Exponential { rate } => {
                if t < 0.0 {
                    0.0
                } else {
                    -(-rate * t).exp_m1()
                }
            }
            DefaultLaw::CantorSingular {
                a,
                b,
                branches,
                ratio,
            } => cantor_cdf01((t - a) / (b - a), *branches, *ratio),
        }
    }

    /// Topological support of the law.
    pub fn support(&self) -> SetDescriptor {
        match self {
            DefaultLaw::Atomic { atoms } => SetDescriptor::FinitePoints {
                points: atoms.iter().map(|a| a.time).collect(),
            },
            DefaultLaw::UniformInterval { a, b } => SetDescriptor::IntervalUnion {
                intervals: vec![Interval::new(*a, *b)],
            },
            DefaultLaw::Exponential { .. } => SetDescriptor::IntervalUnion {
                intervals: vec![Interval::new(0.0, f64::INFINITY)],
            },
            DefaultLaw::CantorSingular {
                a,
                b,
                branches,
                ratio,
            } => SetDescriptor::Cantor {
                a: *a,
                b: *b,
                branches: *branches,
                ratio: *ratio,
            },
        }
    }
}

/// CDF of the normalized Cantor law on `[0, 1]` (the devil's staircase).
///
/// At each level, branch `j` carries mass `1/m` and occupies
/// `[j·step, j·step + ρ]` with `step = (1−ρ)/(m−1)`; points in a gap after
/// branch `j` accumulate the full mass of branches `0..=j`.
fn cantor_cdf01(x: f64, branches: u32, ratio: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let m = branches as f64;
    let step = (1.0 - ratio) / (m - 1.0);
    let mut x = x;
    let mut acc = 0.0;
    let mut mass = 1.0;
    for _ in 0..CANTOR_DIGITS {
        let j = ((x / step).floor()).clamp(0.0, m - 1.0);
        let lo = j * step;
        if x > lo + ratio {
            // in the gap after branch j
            return acc + mass * (j + 1.0) / m;
        }
        acc += mass * j / m;
        mass /= m;
        x = (x - lo) / ratio;
        if x <= 0.0 {
            return acc;
        }
    }
    acc + mass / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream;
    use proptest::prelude::*;

    fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = samples.len() as f64;
        let mut d: f64 = 0.0;
        // walk blocks of tied values so atoms are compared correctly
        let mut i = 0;
        while i < samples.len() {
            let mut j = i;
            while j + 1 < samples.len() && samples[j + 1] == samples[i] {
                j += 1;
            }
            let f = cdf(samples[i]);
            let f_left = cdf(samples[i].next_down());
            d = d.max(((j + 1) as f64 / n - f).abs());
            d = d.max((f_left - i as f64 / n).abs());
            i = j + 1;
        }
        d
    }

    #[test]
    fn single_atom_always_returns_it() {
        let law = DefaultLaw::atomic(vec![Atom {
            time: 2.0,
            weight: 1.0,
        }])
        .unwrap();
        let mut rng = stream::single(1);
        for _ in 0..100 {
            assert_eq!(law.sample(&mut rng), 2.0);
        }
        assert_eq!(law.cdf(1.9), 0.0);
        assert_eq!(law.cdf(2.0), 1.0);
    }

    #[test]
    fn uniform_sample_mean_matches_law_of_large_numbers() {
        let law = DefaultLaw::uniform(1.0, 2.0).unwrap();
        let mut rng = stream::single(2);
        let n = 100_000;
        let mean: f64 = (0..n).map(|_| law.sample(&mut rng)).sum::<f64>() / n as f64;
        let tol = 3.0 * (1.0 / 12f64.sqrt()) / (n as f64).sqrt();
        assert!((mean - 1.5).abs() < tol, "mean {mean} tol {tol}");
        assert!((law.cdf(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cantor_samples_lie_in_deep_covers() {
        // digit-expansion oracle: every draw from cantor(2, 1/3) must have
        // ternary digits in {0, 2}, i.e. stay in the level-20 cover
        let law = DefaultLaw::cantor_singular(0.0, 1.0, 2, 1.0 / 3.0).unwrap();
        let support = law.support();
        let mut rng = stream::single(3);
        for _ in 0..2_000 {
            let tau = law.sample(&mut rng);
            assert!(support.contains_at_depth(tau, 20), "sample {tau} escaped");
            // independent digit check
            let mut x = tau;
            for _ in 0..20 {
                let d = (x * 3.0).floor().min(2.0) as u32;
                assert_ne!(d, 1, "middle-third digit in {tau}");
                x = x * 3.0 - d as f64;
            }
        }
    }

    #[test]
    fn samples_stay_within_cover_resolution_at_all_depths() {
        // depth 12 with ratio 0.2 stays within the ~15 levels an f64
        // mantissa can resolve for this expansion factor
        let law = DefaultLaw::cantor_singular(1.0, 2.0, 2, 0.2).unwrap();
        let support = law.support();
        let mut rng = stream::single(4);
        for _ in 0..500 {
            let tau = law.sample(&mut rng);
            for depth in [4u32, 8, 12] {
                assert!(
                    support.contains_at_depth(tau, depth),
                    "sample {tau} outside level-{depth} cover"
                );
            }
            assert!(support.distance(tau) <= 0.2f64.powi(12));
        }
    }

    #[test]
    fn cantor_cdf_matches_binary_of_ternary_oracle() {
        // classic Cantor function: read ternary digits of x, map 2 -> 1,
        // stop at the first digit 1 (inclusive), interpret as binary
        let oracle = |x: f64| -> f64 {
            let mut x = x;
            let mut value = 0.0;
            let mut w = 0.5;
            for _ in 0..60 {
                let d = ((x * 3.0).floor() as i64).clamp(0, 2);
                x = x * 3.0 - d as f64;
                match d {
                    0 => {}
                    1 => return value + w,
                    2 => value += w,
                    _ => unreachable!(),
                }
                w /= 2.0;
            }
            value
        };
        // the devil's staircase is Hölder of exponent log2/log3, so f64
        // inputs carry an intrinsic ~1e-10 output blur; 1e-9 is the
        // achievable agreement
        let law = DefaultLaw::cantor_singular(0.0, 1.0, 2, 1.0 / 3.0).unwrap();
        assert!((law.cdf(1.0 / 3.0) - 0.5).abs() < 1e-9);
        for &x in &[0.1, 0.25, 0.3333, 0.5, 0.7, 0.74, 0.9, 0.99] {
            assert!(
                (law.cdf(x) - oracle(x)).abs() < 1e-9,
                "x={x}: {} vs oracle {}",
                law.cdf(x),
                oracle(x)
            );
        }
        // shifted base
        let shifted = DefaultLaw::cantor_singular(1.0, 2.0, 2, 1.0 / 3.0).unwrap();
        assert!((shifted.cdf(1.0 + 1.0 / 3.0) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn empirical_cdf_passes_ks_band_for_every_kind() {
        let n = 100_000usize;
        let band = 1.63 / (n as f64).sqrt();
        let laws = [
            DefaultLaw::atomic(vec![
                Atom {
                    time: 1.0,
                    weight: 0.25,
                },
                Atom {
                    time: 1.5,
                    weight: 0.5,
                },
                Atom {
                    time: 2.5,
                    weight: 0.25,
                },
            ])
            .unwrap(),
            DefaultLaw::uniform(1.0, 2.0).unwrap(),
            DefaultLaw::exponential(0.7).unwrap(),
            DefaultLaw::cantor_singular(1.0, 2.0, 2, 0.2).unwrap(),
        ];
        for (i, law) in laws.iter().enumerate() {
            let mut rng = stream::single(100 + i as u64);
            let mut samples: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
            let d = ks_distance(&mut samples, |t| law.cdf(t));
            assert!(d < band, "law {i}: KS {d} above band {band}");
        }
    }

    #[test]
    fn supports_match_variants() {
        let atomic = DefaultLaw::atomic(vec![
            Atom {
                time: 1.0,
                weight: 0.5,
            },
            Atom {
                time: 2.0,
                weight: 0.5,
            },
        ])
        .unwrap();
        assert_eq!(
            atomic.support(),
            SetDescriptor::FinitePoints {
                points: vec![1.0, 2.0]
            }
        );
        let uni = DefaultLaw::uniform(1.0, 2.0).unwrap();
        assert_eq!(uni.support().min_point(), Some(1.0));
        assert_eq!(uni.support().max_point(), Some(2.0));
        let exp = DefaultLaw::exponential(1.0).unwrap();
        assert!(!exp.support().is_bounded());
        assert_eq!(exp.support().min_point(), Some(0.0));
        let cantor = DefaultLaw::cantor_singular(1.0, 2.0, 2, 1.0 / 3.0).unwrap();
        match cantor.support() {
            SetDescriptor::Cantor { a, b, .. } => {
                assert_eq!((a, b), (1.0, 2.0));
            }
            other => panic!("unexpected support {other:?}"),
        }
    }

    #[test]
    fn construction_rejects_bad_laws() {
        assert!(DefaultLaw::atomic(vec![]).is_err());
        assert!(DefaultLaw::atomic(vec![Atom {
            time: 0.0,
            weight: 1.0
        }])
        .is_err());
        assert!(DefaultLaw::atomic(vec![Atom {
            time: 1.0,
            weight: 0.7
        }])
        .is_err());
        assert!(DefaultLaw::uniform(2.0, 1.0).is_err());
        assert!(DefaultLaw::exponential(0.0).is_err());
        assert!(DefaultLaw::cantor_singular(0.0, 1.0, 2, 0.7).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn cdf_is_monotone_within_bounds(
            t1 in -1.0f64..4.0,
            t2 in -1.0f64..4.0,
            m in 2u32..4,
            rho_frac in 0.2f64..0.99,
        ) {
            let law = DefaultLaw::cantor_singular(0.5, 2.5, m, rho_frac / m as f64).unwrap();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let (f_lo, f_hi) = (law.cdf(lo), law.cdf(hi));
            prop_assert!((0.0..=1.0).contains(&f_lo));
            prop_assert!(f_lo <= f_hi + 1e-12);
            prop_assert!(law.cdf(-0.5) == 0.0 && law.cdf(3.5) == 1.0);
        }

        #[test]
        fn samples_always_land_in_the_support(seed in 0u64..500) {
            let law = DefaultLaw::cantor_singular(1.0, 2.0, 3, 0.25).unwrap();
            let support = law.support();
            let tau = law.sample(&mut stream::single(seed));
            prop_assert!(support.contains_at_depth(tau, 16));
        }
    }
}
