use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tt_aci_bench::{
    fit_power_law, render_svg, run_fourier_with, run_gaussians_with, run_random_with, to_csv, CsvRow, ErrorSampling,
    FourierSpec, GaussianSpec, LogLogPlot, Outcome, RandomSpec, Result, Series,
};

#[derive(Parser)]
#[command(name = "bench", about = "Elementwise tensor-train product benchmarks")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Product of two shifted Gaussians on a quantics grid, error against χ′.
    Gaussians {
        #[command(flatten)]
        common: Common,
        /// Peak separations.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.4, 0.8])]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 0.15)]
        width: f64,
        /// Output bond dimensions to sweep.
        #[arg(long, value_delimiter = ',', default_values_t = (4..=15).collect::<Vec<usize>>())]
        chi_list: Vec<usize>,
        #[arg(long, default_value_t = 1e-14)]
        tci_tol: f64,
        #[arg(long, default_value_t = 20)]
        maxiter: usize,
    },
    /// Product of two random Fourier series: timings and errors of both methods.
    Fourier {
        #[command(flatten)]
        common: Common,
        /// Highest frequencies.
        #[arg(long, value_delimiter = ',', default_values_t = vec![16, 64, 256, 1024, 4096])]
        k_list: Vec<usize>,
        #[arg(long, default_value_t = 1e-12)]
        tci_tol: f64,
        #[arg(long, default_value_t = 20)]
        maxiter: usize,
        /// Fit sweeps allowed.
        #[arg(long, default_value_t = 30)]
        sweeps: usize,
    },
    /// Product of two random trains with the output rank pinned to χ.
    Random {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = vec![16, 32, 64, 128, 256])]
        chi_list: Vec<usize>,
        /// Iterations per timed run.
        #[arg(long, default_value_t = 1)]
        sweeps: usize,
        /// Skip bond dimensions whose fit working set exceeds this many GiB.
        #[arg(long, default_value_t = 3.0)]
        mem_budget_gb: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Tolerance of the elementwise operation.
    #[arg(long)]
    tol: Option<f64>,
    /// Output bond cap; for gaussians and random, drops larger entries of --chi-list.
    #[arg(long)]
    max_bond: Option<usize>,
    /// Number of quantics bits or sites.
    #[arg(long)]
    length: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Timing repetitions; the median is reported.
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Compare on every grid point instead of random samples.
    #[arg(long)]
    exhaustive_error: bool,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG destination.
    #[arg(long)]
    plot: Option<PathBuf>,
}

impl Common {
    fn error(&self) -> ErrorSampling {
        if self.exhaustive_error {
            ErrorSampling::Exhaustive
        } else {
            ErrorSampling::Random { samples: self.samples }
        }
    }

    fn cap(&self, list: Vec<usize>) -> Vec<usize> {
        list.into_iter().filter(|&c| self.max_bond.is_none_or(|m| c <= m)).collect()
    }
}

fn log_row<R: CsvRow>(row: &R) {
    let cells = row.cells();
    let parts: Vec<String> = R::HEADER.iter().zip(&cells).map(|(h, c)| format!("{h}={c}")).collect();
    eprintln!("  {}", parts.join(" "));
}

fn emit<R: CsvRow>(common: &Common, outcome: &Outcome<R>, panels: Vec<LogLogPlot>) -> Result<()> {
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    match &common.out {
        Some(p) => std::fs::write(p, to_csv(&outcome.rows))?,
        None => print!("{}", to_csv(&outcome.rows)),
    }
    if let Some(p) = &common.plot {
        std::fs::write(p, render_svg(&panels))?;
    }
    Ok(())
}

/// Timing series with a power-law fit attached when there are enough points.
fn timing_series(label: &str, points: Vec<(f64, f64)>) -> Series {
    let mut s = Series::new(label, points);
    if let Ok(fit) = fit_power_law(&s.points) {
        eprintln!("{label}: t ~ {:.3e} chi^{:.3} (r2 = {:.4})", fit.prefactor, fit.exponent, fit.r2);
        s.fit = Some(fit);
    }
    s
}

fn run(cli: Cli) -> Result<usize> {
    match cli.cmd {
        Command::Gaussians { common, deltas, width, chi_list, tci_tol, maxiter } => {
            let mut spec = GaussianSpec {
                deltas,
                width,
                chi_primes: common.cap(chi_list),
                tci_tol,
                max_iter: maxiter,
                seed: common.seed,
                error: common.error(),
                ..Default::default()
            };
            spec.length = common.length.unwrap_or(spec.length);
            spec.tol = common.tol.unwrap_or(spec.tol);
            let outcome = run_gaussians_with(&spec, log_row)?;
            let series = spec
                .deltas
                .iter()
                .map(|&d| {
                    let pts =
                        outcome.rows.iter().filter(|r| r.delta == d).map(|r| (r.chi_prime as f64, r.eps_inf)).collect();
                    Series::new(format!("delta = {d}"), pts)
                })
                .collect();
            let plot = LogLogPlot {
                title: "Gaussian product".into(),
                x_label: "chi'".into(),
                y_label: "sampled max error".into(),
                series,
            };
            emit(&common, &outcome, vec![plot])?;
            Ok(outcome.non_converged)
        }
        Command::Fourier { common, k_list, tci_tol, maxiter, sweeps } => {
            let mut spec = FourierSpec {
                ks: k_list,
                tci_tol,
                max_iter: maxiter,
                max_sweeps: sweeps,
                reps: common.reps,
                seed: common.seed,
                error: common.error(),
                ..Default::default()
            };
            spec.length = common.length.unwrap_or(spec.length);
            spec.tol = common.tol.unwrap_or(spec.tol);
            spec.max_bond = common.max_bond.unwrap_or(spec.max_bond);
            let outcome = run_fourier_with(&spec, log_row)?;
            let chi = |r: &tt_aci_bench::FourierRow| r.chi as f64;
            let timing = LogLogPlot {
                title: "Fourier series product: runtime".into(),
                x_label: "chi".into(),
                y_label: "seconds".into(),
                series: vec![
                    timing_series("ACI", outcome.rows.iter().map(|r| (chi(r), r.t_aci)).collect()),
                    timing_series("fit", outcome.rows.iter().map(|r| (chi(r), r.t_fit)).collect()),
                ],
            };
            let error = LogLogPlot {
                title: "Fourier series product: error".into(),
                x_label: "chi".into(),
                y_label: "sampled max error".into(),
                series: vec![
                    Series::new("ACI", outcome.rows.iter().map(|r| (chi(r), r.eps_aci)).collect()),
                    Series::new("fit", outcome.rows.iter().map(|r| (chi(r), r.eps_fit)).collect()),
                    Series::new("tolerance", outcome.rows.iter().map(|r| (chi(r), spec.tol)).collect()),
                ],
            };
            emit(&common, &outcome, vec![timing, error])?;
            Ok(outcome.non_converged)
        }
        Command::Random { common, chi_list, sweeps, mem_budget_gb } => {
            let mut spec = RandomSpec {
                chis: common.cap(chi_list),
                sweeps,
                reps: common.reps,
                seed: common.seed,
                mem_budget: (mem_budget_gb * (1u64 << 30) as f64) as usize,
                ..Default::default()
            };
            spec.length = common.length.unwrap_or(spec.length);
            spec.tol = common.tol.unwrap_or(spec.tol);
            let outcome = run_random_with(&spec, log_row)?;
            let plot = LogLogPlot {
                title: "Random train product, chi' = chi".into(),
                x_label: "chi".into(),
                y_label: "seconds".into(),
                series: vec![
                    timing_series("ACI", outcome.rows.iter().map(|r| (r.chi as f64, r.t_aci)).collect()),
                    timing_series("fit", outcome.rows.iter().map(|r| (r.chi as f64, r.t_fit)).collect()),
                ],
            };
            emit(&common, &outcome, vec![plot])?;
            Ok(outcome.non_converged)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} run(s) did not converge");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
