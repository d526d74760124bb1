//! Numerical laboratory for SLE dimension formulas: KPZ-type dimension maps,
//! a zipper implementation of chordal Loewner evolution, box-counting
//! estimators, boundary chaos, stable subordinators and seeded experiments
//! that compare Monte Carlo estimates with the formulas.

pub mod dimension;
pub mod error;
pub mod experiment;
pub mod fractal;
pub mod gmc;
pub mod kpz;
pub mod loewner;
pub mod stochastic;

pub use dimension::{BoxCountConfig, BoxCountResult, MeasureGrid, ScaleRange, WindowPolicy};
pub use error::{LabError, Result};
pub use experiment::{emit, run, Experiment, ExperimentConfig, ExperimentReport, Format};
pub use fractal::CantorSpec;
pub use kpz::{DimensionRole, DimensionValue, Gamma, Kappa};
pub use loewner::{DrivingPath, SlitChain, TraceCloud};
