//! Exact exit tails and the bounds that control them.

pub mod aksz;
pub mod exit;
pub mod proof;
pub mod scan;
pub mod tmain;

pub use aksz::{aksz_bound, aksz_equal_bound, aksz_interval_mc, aksz_joint_exact, WindowEvent, WindowKind};
pub use exit::{exit_tail_exact, exit_tail_exact_continuous, exit_tail_on_grid, ExitTail, TailSeries};
pub use proof::{as_set, complement_mass_check, lambda_recursion_check, two_term_check};
pub use scan::{counterexample_scan, ScanSpec};
pub use tmain::{tmain_asymptotic, tmain_bound, BoundConstant, BoundReport, DecayRegime, TmainOptions};
