//! Experiment harness for elementwise tensor-train products: Gaussian products
//! on a quantics grid, random Fourier series, and random trains at fixed rank.
//! Each experiment yields CSV rows; timings can be fitted to power laws and
//! drawn as log-log SVG plots.

pub mod csv;
pub mod error;
pub mod experiments;
pub mod power_law;
pub mod svg;

pub use csv::{sci, to_csv, to_csv_untimed, write_csv, CsvRow};
pub use error::{BenchError, Result};
pub use experiments::{
    run_fourier, run_fourier_with, run_gaussians, run_gaussians_with, run_random, run_random_with, ErrorSampling,
    ExperimentSpec, FourierRow, FourierSpec, GaussianRow, GaussianSpec, Outcome, RandomRow, RandomSpec,
};
pub use power_law::{fit_power_law, PowerLaw};
pub use svg::{render_svg, LogLogPlot, Series};
