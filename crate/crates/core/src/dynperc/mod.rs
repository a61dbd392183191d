//! Dynamical critical percolation on finite regions: bond percolation on the
//! square lattice and site percolation on the triangular lattice, with every
//! bit resampled to a fresh fair value when its exponential clock rings.

pub mod dynamics;
pub mod experiments;
pub mod fet;
pub mod lattice;
pub mod oracle;
pub mod pivotal;

pub use dynamics::{sample_critical, AggregateClock, BitClocks, DynLattice, Ring};
pub use experiments::{
    estimate_decorrelation, event_log_csv, fkg_domination_test, pivotal_flux_calibration, simulate_survival,
    survival_lower_bound, Conditioning, DecorrelationEstimate, EventRecord, FkgReport, FluxReport, SurvivalEstimate,
};
pub use fet::{fet_lower_bound, fet_monotone_check, simulate_fet, FetEstimate, MonotoneReport};
pub use lattice::{Geometry, Lattice, LatticeKind, LatticeSpec, Network};
pub use oracle::{crosses, Connectivity};
pub use pivotal::{brute_force_pivotal, count_pivotal, estimate_piv, exhaustive_piv, growth_ratio, PivEstimate};

/// From-scratch crossing test of the current configuration.
pub fn has_crossing(lattice: &DynLattice<'_>) -> bool {
    crosses(lattice.lattice().primal(), lattice.bits())
}
