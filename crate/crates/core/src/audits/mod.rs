//! Numerical audits of the estimates: elementary sums, the frequency lower bound,
//! the `L⁴` Strichartz ratio, the multiplier sums and nonlinear smoothing.
//!
//! Every audit is a deterministic function of its parameter block. Parallel scans
//! collect per-chunk results in a fixed order before reducing, so reports do not
//! depend on the thread count.

mod lattice;
mod multiplier;
mod report;
mod smoothing;
mod strichartz;

pub use lattice::{
    audit_freq_lower_bound, audit_phi, audit_phi_growth, audit_sum_lemma, audit_sum_lemma_scan,
    gap_ratio, GapParams, PhiParams, SumLemmaParams,
};
pub use multiplier::{
    audit_mn_sum, audit_smoothing_sum, mn_sum, smoothing_sum, MnParams, SmoothingSumParams,
};
pub use report::{fit_slope, fmt_cell, rel_change, AuditReport, Check, Extremal, Table};
pub use smoothing::{
    audit_smoothing_trajectory, smoothing_track, SmoothingRunParams, SmoothingTrack,
};
pub use strichartz::{
    audit_strichartz, default_time_nodes, strichartz_integral, strichartz_integral_oracle,
    strichartz_ratio, Profile, StrichartzParams,
};
