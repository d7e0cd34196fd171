//! Numerical laboratory for an information-based default model.
//!
//! The market's information about a default time `τ` is modelled by the
//! information process `β`: a Brownian bridge that starts at zero, is pinned
//! to zero at the random time `τ`, and stays at zero afterwards. Whether the
//! default can be foreseen from observing `β` turns out to be a question
//! about the potential-theoretic size of the support `Γ` of the law of `τ`:
//! if `Γ` avoids zero and has Riesz capacity of order 1/2 equal to zero, the
//! first time the pair `X_t = (dist_Γ(t), β_t)` hits the origin equals `τ`
//! almost surely, so the default is predictable.
//!
//! The crate provides the pieces needed to probe that statement numerically:
//!
//! * [`timelaw`] — default-time distributions, including singular
//!   (Cantor-type) laws, with samplers and CDFs;
//! * [`setgeom`] — closed time-set descriptors: covers, distances,
//!   membership, fractal dimensions;
//! * [`bridge`] — exact-in-law simulation of pinned bridges and of the
//!   information process;
//! * [`potential`] — Riesz s-energies, the parabolic 0-energy, and capacity
//!   estimates via energy minimization over discrete measures;
//! * [`hitting`] — crossing-corrected Monte Carlo estimates of the
//!   probability that the bridge hits zero at a time in a given set;
//! * [`predict`] — the predictability experiment: detect the first zero of
//!   `X`, build announcing sequences, and estimate `P(γ₀ < τ)`.
//!
//! All randomness flows through per-task [`stream`]s derived from a single
//! master seed, so every estimate is reproducible bit for bit.

pub mod bridge;
pub mod hitting;
pub mod potential;
pub mod predict;
pub mod quad;
pub mod setgeom;
pub mod stream;
pub mod timelaw;

pub use bridge::{BridgePath, GridPolicy, GridSpec, InfoPath, TimeGrid};
pub use hitting::HittingEstimate;
pub use potential::{DiscreteMeasure, EnergyReport};
pub use predict::{ExperimentReport, XPath};
pub use setgeom::{CoverLevel, Interval, SetDescriptor};
pub use timelaw::DefaultLaw;
