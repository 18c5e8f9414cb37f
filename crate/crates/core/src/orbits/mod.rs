//! Periodic points of torus maps and the closing scan.

mod newton;
mod scan;

pub use newton::{
    find_periodic_points, verify_orbit, OrbitRecord, PeriodicSearch, Region, SearchDiagnostics,
    SearchOptions,
};
pub use scan::{
    closing_scan, preimage_disks_disjoint, ScanOptions, ScanReport, TwistPlacement,
};
