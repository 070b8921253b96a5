//! `sigpde`: signature PDE kernels from the command line.
//!
//! Exit codes: 0 on success, 2 on input errors (bad flags, unreadable or
//! malformed files), 3 on numerical failures (non-finite values, singular
//! factorizations, divergence).

mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sigpde_core::fbm::{sample_fbm, sample_fbm_mixture};
use sigpde_core::pde::convergence_study;
use sigpde_core::reduction::default_step;
use sigpde_core::{
    gram, krr_fit, krr_predict, mmd_squared, proximal_reduce, reduce_to_support,
    signature_pde_kernel, Error, LabeledSeries, Layout, MmdVariant, ProxOptions,
    Result, Scheme, TimeSeries, WeightedEnsemble,
};

use config::{ConfigFile, Overrides, RunConfig};
use io::{Input, Output};

const SAMPLE_X: &str = include_str!("../data/sample_x.csv");
const SAMPLE_Y: &str = include_str!("../data/sample_y.csv");

#[derive(Parser)]
#[command(name = "sigpde", version, about = "Signature kernels of time series via a Goursat PDE")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON file with default settings; flags take precedence over it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Kernel on the ambient space that lifts the paths.
    #[arg(long, global = true, value_parser = ["linear", "rbf"])]
    static_kernel: Option<String>,
    /// Bandwidth of the rbf kernel, exp(-|a-b|^2 / (2 sigma^2)).
    #[arg(long, global = true)]
    sigma: Option<f64>,
    /// Dyadic refinement level: each data cell is split into 2^L x 2^L cells [default: 4].
    #[arg(long, global = true)]
    lambda: Option<u32>,
    /// Finite-difference scheme [default: explicit].
    #[arg(long, global = true)]
    scheme: Option<SchemeArg>,
    /// Divide each path by its largest absolute entry before solving [default: on].
    #[arg(long, global = true)]
    rescale: Option<OnOff>,
    /// Prepend a normalized time channel to every path [default: off]. Under
    /// the linear kernel a one-dimensional path is otherwise seen only
    /// through its total increment.
    #[arg(long, global = true)]
    time_augment: Option<OnOff>,
    /// Worker threads, 0 for one per core [default: 0].
    #[arg(long, global = true, env = "SIGPDE_THREADS")]
    threads: Option<usize>,
    /// Seed for commands that draw random numbers [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Layout of CSV path files.
    #[arg(long, global = true, default_value = "long")]
    layout: LayoutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Explicit,
    Implicit,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Wide,
    Long,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Biased,
    Unbiased,
}

#[derive(Subcommand)]
enum Command {
    /// Print the signature kernel of two paths.
    Kernel {
        /// File holding exactly one path.
        x: PathBuf,
        /// File holding exactly one path.
        y: PathBuf,
    },
    /// Export the Gram matrix of one collection, or of two against each other, as CSV.
    Gram {
        /// Paths indexing the rows ("-" for stdin).
        xs: Input,
        /// Paths indexing the columns; defaults to XS.
        ys: Option<Input>,
    },
    /// Print the squared maximum mean discrepancy between two samples of paths.
    Mmd {
        xs: Input,
        ys: Input,
        #[arg(long, default_value = "biased")]
        variant: VariantArg,
    },
    /// Kernel ridge regression on exported Gram matrices.
    #[command(subcommand)]
    Krr(KrrCommand),
    /// Sparsify a uniformly weighted ensemble of paths by l1-penalized proximal gradient descent.
    ///
    /// Emits JSON with the new weights, their support and the objective per iteration.
    Reduce {
        /// Paths in long layout; stdin by default.
        #[arg(default_value = "-")]
        input: Input,
        /// Search the penalty by bisection until the support has this size.
        #[arg(long, conflicts_with = "penalty", required_unless_present = "penalty")]
        support: Option<usize>,
        /// Fixed l1 penalty.
        #[arg(long)]
        penalty: Option<f64>,
        /// Initial step size [default: 1 / (2 lambda_max(K))].
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// Stop once successive iterates are this close.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Weights below this magnitude are outside the support.
        #[arg(long, default_value_t = 1e-8)]
        support_tol: f64,
        #[arg(long, default_value_t = 200)]
        max_bisections: usize,
    },
    /// Tabulate the error of each refinement level against a finer reference (CSV lambda,error).
    Convergence {
        /// First path; a bundled Brownian sample when omitted.
        x: Option<PathBuf>,
        /// Second path; a bundled Brownian sample when omitted.
        y: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        lambda_max: u32,
    },
    /// Draw fractional Brownian motion paths on a uniform grid of [0, 1] (long CSV).
    SimulateFbm {
        #[arg(long, conflicts_with = "hurst_choices", required_unless_present = "hurst_choices")]
        hurst: Option<f64>,
        /// Draw each path's Hurst exponent uniformly from this list.
        #[arg(long, value_delimiter = ',')]
        hurst_choices: Option<Vec<f64>>,
        /// Samples per path.
        #[arg(long, default_value_t = 50)]
        length: usize,
        #[arg(long, default_value_t = 30)]
        count: usize,
    },
}

#[derive(Subcommand)]
enum KrrCommand {
    /// Solve (K + ridge I) w = targets; writes the weights as CSV.
    Fit {
        /// Square training Gram matrix exported by `gram`.
        #[arg(long)]
        gram: PathBuf,
        /// One target per row of the Gram matrix.
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        ridge: f64,
    },
    /// Apply weights to a test-by-train Gram matrix; writes predictions as CSV.
    Predict {
        #[arg(long)]
        gram: PathBuf,
        #[arg(long)]
        weights: PathBuf,
    },
}

impl CommonArgs {
    fn run_config(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let flags = Overrides {
            static_kernel: self.static_kernel.clone(),
            sigma: self.sigma,
            lambda: self.lambda,
            scheme: self.scheme.map(|s| match s {
                SchemeArg::Explicit => Scheme::Explicit,
                SchemeArg::Implicit => Scheme::Implicit,
            }),
            rescale: self.rescale.map(|r| matches!(r, OnOff::On)),
            time_augment: self.time_augment.map(|r| matches!(r, OnOff::On)),
            threads: self.threads,
            seed: self.seed,
        };
        RunConfig::resolve(file, flags)
    }

    fn layout(&self) -> Layout {
        match self.layout {
            LayoutArg::Wide => Layout::Wide,
            LayoutArg::Long => Layout::Long,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sigpde: {e}");
            if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn prepare(cfg: &RunConfig, paths: Vec<TimeSeries>) -> Vec<TimeSeries> {
    if cfg.time_augment {
        paths.iter().map(TimeSeries::time_augment).collect()
    } else {
        paths
    }
}

fn single(input: &Input, layout: Layout) -> Result<TimeSeries> {
    let mut series = input.load(layout)?;
    if series.len() != 1 {
        return Err(Error::Input(format!(
            "{input} holds {} series, expected exactly one",
            series.len()
        )));
    }
    Ok(series.remove(0).series)
}

fn unlabeled(series: Vec<LabeledSeries>) -> Vec<TimeSeries> {
    series.into_iter().map(|l| l.series).collect()
}

fn run(cli: &Cli) -> Result<()> {
    let common = &cli.common;
    let cfg = common.run_config()?;
    let layout = common.layout();
    let out = Output::new(common.out.clone());

    match &cli.command {
        Command::Kernel { x, y } => {
            let x = single(&Input::Path(x.clone()), layout)?;
            let y = single(&Input::Path(y.clone()), layout)?;
            let both = prepare(&cfg, vec![x, y]);
            let k = signature_pde_kernel(&both[0], &both[1], &cfg.kernel)?;
            out.write_str(&format!("{k:?}\n"))
        }
        Command::Gram { xs, ys } => {
            Input::check_single_stdin(&[Some(xs), ys.as_ref()])?;
            let xs = prepare(&cfg, unlabeled(xs.load(layout)?));
            let ys = match ys {
                Some(ys) => Some(prepare(&cfg, unlabeled(ys.load(layout)?))),
                None => None,
            };
            let mut g = gram(&xs, ys.as_deref(), &cfg.kernel, cfg.threads)?;
            g.config = Some(cfg.kernel);
            out.write_with(|w| {
                writeln!(w, "# {}", cfg.provenance())?;
                g.write_rows(w)
            })
        }
        Command::Mmd { xs, ys, variant } => {
            Input::check_single_stdin(&[Some(xs), Some(ys)])?;
            let xs = prepare(&cfg, unlabeled(xs.load(layout)?));
            let ys = prepare(&cfg, unlabeled(ys.load(layout)?));
            let variant = match variant {
                VariantArg::Biased => MmdVariant::Biased,
                VariantArg::Unbiased => MmdVariant::Unbiased,
            };
            let v = mmd_squared(&xs, &ys, &cfg.kernel, variant, cfg.threads)?;
            out.write_str(&format!("{v:?}\n"))
        }
        Command::Krr(KrrCommand::Fit {
            gram,
            targets,
            ridge,
        }) => {
            let k = io::read_gram(gram)?;
            let t = io::read_column(targets)?;
            let w = krr_fit(&k, &t, *ridge)?;
            out.write_with(|wr| io::write_column(wr, "weight", &w))
        }
        Command::Krr(KrrCommand::Predict { gram, weights }) => {
            let k = io::read_gram(gram)?;
            let w = io::read_column(weights)?;
            let p = krr_predict(&k, &w)?;
            out.write_with(|wr| io::write_column(wr, "prediction", &p))
        }
        Command::Reduce {
            input,
            support,
            penalty,
            step,
            max_iter,
            tol,
            support_tol,
            max_bisections,
        } => {
            let labeled = input.load(Layout::Long)?;
            let ids: Vec<String> = labeled.iter().map(|l| l.id.clone()).collect();
            let paths = prepare(&cfg, unlabeled(labeled));
            let ensemble = WeightedEnsemble::uniform(paths)?;
            let k = gram(ensemble.paths(), None, &cfg.kernel, cfg.threads)?;
            let min_eig = k.min_eigenvalue()?;
            if min_eig < -1e-8 * k.trace() {
                eprintln!(
                    "sigpde: warning: Gram matrix is indefinite (smallest eigenvalue {min_eig:.3e}); \
                     the reduction objective may be unbounded, consider a larger --lambda"
                );
            }
            let step = match step {
                Some(s) => *s,
                None => default_step(&k)?,
            };
            let opts = ProxOptions {
                penalty: penalty.unwrap_or(0.0),
                step,
                max_iter: *max_iter,
                tol: *tol,
                support_tol: *support_tol,
            };
            let res = match support {
                Some(n) => reduce_to_support(ensemble.alpha(), &k, *n, &opts, *max_bisections)?,
                None => proximal_reduce(&ensemble, &k, &opts)?,
            };
            let report = ReduceReport {
                config: serde_json::from_str(&cfg.provenance()).expect("valid JSON"),
                support_ids: res.support.iter().map(|&i| ids[i].clone()).collect(),
                support_indices: &res.support,
                beta: &res.beta,
                probability: res.clamped_probability(),
                penalty_used: res.penalty,
                step: res.step,
                iterations: res.iterations,
                converged: res.converged,
                loss_history: &res.loss_history,
            };
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            out.write_str(&(json + "\n"))
        }
        Command::Convergence { x, y, lambda_max } => {
            let (x, y) = match (x, y) {
                (Some(x), Some(y)) => (
                    single(&Input::Path(x.clone()), layout)?,
                    single(&Input::Path(y.clone()), layout)?,
                ),
                (None, None) => (
                    sigpde_core::csv_io::load_csv(SAMPLE_X.as_bytes(), Layout::Wide)?.remove(0),
                    sigpde_core::csv_io::load_csv(SAMPLE_Y.as_bytes(), Layout::Wide)?.remove(0),
                ),
                _ => return Err(Error::Input("give both paths or neither".into())),
            };
            let both = prepare(&cfg, vec![x, y]);
            let points = convergence_study(&both[0], &both[1], &cfg.kernel, *lambda_max)?;
            out.write_with(|w| {
                writeln!(w, "# {}", cfg.provenance())?;
                writeln!(w, "lambda,error")?;
                for p in &points {
                    writeln!(w, "{},{:?}", p.lambda, p.error)?;
                }
                Ok(())
            })
        }
        Command::SimulateFbm {
            hurst,
            hurst_choices,
            length,
            count,
        } => {
            let labeled: Vec<LabeledSeries> = match (hurst, hurst_choices) {
                (Some(h), _) => sample_fbm(*h, *length, *count, cfg.seed)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, series)| LabeledSeries {
                        id: format!("fbm{i}_H{h}"),
                        series,
                    })
                    .collect(),
                (None, Some(choices)) => sample_fbm_mixture(choices, *length, *count, cfg.seed)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, (h, series))| LabeledSeries {
                        id: format!("fbm{i}_H{h}"),
                        series,
                    })
                    .collect(),
                (None, None) => unreachable!("clap requires one of the two"),
            };
            out.write_with(|w| {
                writeln!(w, "# {{\"seed\":{},\"length\":{length},\"count\":{count}}}", cfg.seed)?;
                sigpde_core::csv_io::write_csv(w, &labeled, Layout::Long)
            })
        }
    }
}

#[derive(Serialize)]
struct ReduceReport<'a> {
    config: serde_json::Value,
    support_indices: &'a [usize],
    support_ids: Vec<String>,
    beta: &'a [f64],
    /// Negative weights clamped to zero and the rest renormalized.
    probability: Vec<f64>,
    penalty_used: f64,
    step: f64,
    iterations: usize,
    converged: bool,
    loss_history: &'a [f64],
}
