//! Decision library and trace-driven simulator for robust tile-based
//! 360-degree video streaming.
//!
//! The pipeline: crowd head traces become per-chunk viewport distributions
//! (`fov`), a coverage set per chunk bounds the rate the viewer sees with
//! high probability, a linear-program relaxation schedules window rates
//! (`relax`), a bank-and-spend pass maps them onto the encoding ladder
//! (`quantize`), and a receding-horizon loop replays whole sessions against
//! bandwidth and head-movement traces (`online`). Brute-force solvers
//! (`oracle`) certify the production path on small instances.

pub mod baselines;
pub mod error;
pub mod fov;
pub mod lp;
pub mod model;
pub mod online;
pub mod oracle;
pub mod quantize;
pub mod relax;
pub mod tol;
pub mod traces;

pub use error::{Error, Result};
pub use fov::{AlphaSet, FovModel, FovSet, Orientation};
pub use model::{Plan, QoEBreakdown, RateLadder, StreamConfig, Timeline, UtilitySpec};
pub use online::{Perturbations, Policy, SessionResult};
pub use relax::{RelaxedInstance, RelaxedSolution};
pub use traces::{BandwidthTrace, HeadTrace};
