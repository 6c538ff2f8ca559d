//! Fair k-center clustering under range-based group quotas.
//!
//! Points belong to `m` disjoint groups; a solution is a set of `k` centers
//! holding between `l_i` and `u_i` centers from group `i`, scored by the
//! k-center objective (largest distance from any point to its nearest
//! center).
//!
//! - [`offline::solve_offline`]: 3-approximation in `O(nk)` time.
//! - [`streaming::stream_solve`]: one pass, `(13 + O(ε))`-approximation,
//!   storing `O((km + Σu) log(1/ε)/ε)` points.
//! - [`oracle`]: exhaustive reference solvers for small instances.
//!
//! All geometry is generic over [`Scalar`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the common choices.
//!
//! ```
//! use fairkc::{Dataset64, FairnessBounds, ProblemInstance, offline, solution};
//!
//! let ds = Dataset64::from_line(&[0.0, 1.0, 10.0, 11.0], &[0, 0, 1, 1]).unwrap();
//! let bounds = FairnessBounds::new(vec![1, 1], vec![1, 1], 2);
//! let inst = ProblemInstance::new(&ds, &bounds).unwrap();
//! let centers = offline::solve_offline(inst, 0).unwrap();
//! assert!(solution::check_fairness(&inst, &centers));
//! assert_eq!(solution::objective(&ds, &centers).unwrap(), 1.0);
//! ```

pub mod bounds;
pub mod dataset;
pub mod error;
pub mod fairshift;
pub mod flow;
pub mod gonzalez;
pub mod offline;
pub mod oracle;
pub mod scalar;
pub mod solution;
pub mod streaming;

pub use bounds::{derive_proportional_bounds, validate_instance, FairnessBounds, ProblemInstance};
pub use dataset::{Dataset, Metric, MetricSpace, PointRecord};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use solution::{check_fairness, objective, CenterSet};

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type GonzalezTrace64 = gonzalez::GonzalezTrace<f64>;
pub type GonzalezTrace32 = gonzalez::GonzalezTrace<f32>;
pub type ExactSolution64 = oracle::ExactSolution<f64>;
pub type StreamingSolver64 = streaming::StreamingSolver<f64>;
pub type StreamingSolver32 = streaming::StreamingSolver<f32>;
pub type StreamPoint64 = streaming::StreamPoint<f64>;
