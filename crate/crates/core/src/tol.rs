//! Shared numeric tolerances.

/// Timeline instants are compared to this tolerance (seconds). Download and
/// play times are sums of at most a few thousand divisions, so accumulated
/// rounding stays far below a nanosecond.
pub const TIME_EPS: f64 = 1e-9;

/// Feasibility slack allowed when checking a relaxed solution against its
/// constraints. The simplex works in f64 on tiny tableaus; 1e-6 is generous.
pub const LP_FEAS_EPS: f64 = 1e-6;

/// Pivot threshold inside the simplex. Entries smaller than this are treated
/// as zero.
pub const PIVOT_EPS: f64 = 1e-9;

/// Probability mass bookkeeping (distributions must sum to one within this).
pub const PROB_EPS: f64 = 1e-9;
