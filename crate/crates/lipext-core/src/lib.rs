//! Random projections of a normed ambient space onto a finite doubling point
//! set, with linear Lipschitz and C1 (Whitney) extension operators built on
//! top of them.
//!
//! The crate is organized around the pipeline
//! net construction -> partition of unity -> random projection -> extension:
//!
//! * [`metric`] — ambient p-norm geometry, distance oracles, doubling-constant
//!   and metric-capacity estimators;
//! * [`covering`] — greedy maximal separated nets per dyadic scale and the
//!   Whitney cell complex with 1-Lipschitz gauges;
//! * [`partition`] — evaluable Lipschitz and C1 partitions of unity
//!   subordinate to the cells, with analytic gradients in the C1 case;
//! * [`projection`] — random projections `mu_y` (cell-based and kernel-based)
//!   and regular random projections with differential vector measures `nu_y`;
//! * [`extension`] — the linear extension operators `Tf` and the C1 Whitney
//!   extension with its analytic differential, plus remainder diagnostics;
//! * [`wasserstein`] — exact Wasserstein-1 between finitely supported
//!   measures, used to certify projection Lipschitz constants.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature for embedded use. All float math goes through [`libm`] so
//! results are identical in both modes.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod covering;
pub mod error;
pub mod extension;
pub mod math;
pub mod metric;
pub mod partition;
pub mod projection;
pub mod wasserstein;

pub use error::CoreError;
pub use metric::{AmbientSpace, PointSet};
