//! Probabilistic frames viewed through optimal transport.
//!
//! A probability measure on ℝ^d is a probabilistic frame when it has a finite
//! second moment and its support spans ℝ^d. This crate computes frame bounds,
//! decides transport duality with LP certificates, solves discrete and Gaussian
//! Wasserstein problems, follows frames along geodesics, and builds
//! semi-discrete couplings through power diagrams.

pub mod duality;
pub mod error;
pub mod geodesics;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod optim;
pub mod semidiscrete;
pub mod transport;

pub use duality::{FarkasCertificate, TransportDual, TransportPlan};
pub use error::{Error, Result};
pub use geodesics::{GaussianPath, GeodesicProfile};
pub use linalg::{Matrix, Spectrum};
pub use measures::{DiscreteMeasure, FrameReport, GaussianMeasure, SecondMoments};
pub use semidiscrete::{PowerDiagram, Reference, SemiDiscreteCoupling};
pub use transport::OtSolution;
