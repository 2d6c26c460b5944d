//! `dpp` — command-line surface for the determinantal point process
//! engine. Every subcommand prints one JSON document on stdout; identical
//! invocations produce byte-identical output regardless of `DPP_THREADS`.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dpp_core::counts::{count_distribution, count_moments};
use dpp_core::error::Error;
use dpp_core::experiments::cue::arc_count_experiment;
use dpp_core::experiments::ust::ust_compare;
use dpp_core::experiments::{haar_unitary, Arc};
use dpp_core::fock::{basis_order, density_weights, diagonal_probability, key_identity_gap};
use dpp_core::io::{load_graph, load_kernel};
use dpp_core::measure::{
    elementary_probability, full_pmf, inclusion_probability, janossy_weight, void_probability,
};
use dpp_core::rng::{replicate_rng, DOMAIN_BASIS};
use dpp_core::sampler::{sample_batch, SamplerConfig};
use dpp_core::subset::SubsetIndex;

#[derive(Parser)]
#[command(name = "dpp", version, about = "Finite determinantal point processes")]
struct Cli {
    /// Suppress progress notes on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a kernel and report its spectral range.
    Validate {
        /// Kernel file (JSON or CSV) or diag(a,b,…) shorthand.
        #[arg(long)]
        kernel: String,
    },
    /// Evaluate one subset probability.
    Prob {
        #[arg(long)]
        kernel: String,
        /// Comma-separated point indices, e.g. "0,2" ("" for the empty set).
        #[arg(long)]
        subset: String,
        #[arg(long, value_enum, default_value_t = ProbMode::Inclusion)]
        mode: ProbMode,
    },
    /// Print the probability of every subset.
    Pmf {
        #[arg(long)]
        kernel: String,
    },
    /// Draw configurations and print the histogram.
    Sample {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        draws: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Point-count distribution, optionally within a window.
    Counts {
        #[arg(long)]
        kernel: String,
        /// Window of point indices; defaults to the whole ground set.
        #[arg(long)]
        subset: Option<String>,
    },
    /// Check the fermionic oracle against direct determinant probabilities.
    FockCheck {
        #[arg(long)]
        kernel: String,
        /// Also check the m-point correlation operator identity.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_enum, default_value_t = BasisChoice::Identity)]
        basis: BasisChoice,
        #[arg(long, default_value_t = 0)]
        basis_seed: u64,
    },
    /// Monte Carlo experiments with exact references.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Eigenangle counts of Haar-random unitaries on an arc.
    Cue {
        #[arg(long)]
        n: usize,
        /// Arc length in radians, in (0, 2π].
        #[arg(long)]
        arc_length: f64,
        #[arg(long, default_value_t = 0.0)]
        arc_center: f64,
        #[arg(long)]
        replicates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Uniform spanning trees against the loop-erased-walk oracle.
    Ust {
        /// Graph file: JSON {"vertices": n, "edges": [[u,v],...]}.
        #[arg(long)]
        graph: String,
        #[arg(long)]
        draws: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbMode {
    /// ℙ(sample ⊇ S) = det K_S.
    Inclusion,
    /// ℙ(sample = S exactly).
    Elementary,
    /// ℙ(no point of S appears).
    Void,
    /// Normalized weight det(I−K)·det(L_S); needs ‖K‖ < 1.
    Janossy,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisChoice {
    Identity,
    Random,
}

#[derive(Serialize)]
struct ValidateReport {
    n: usize,
    valid: bool,
    eigenvalue_min: f64,
    eigenvalue_max: f64,
    /// Largest eigenvalue excursion outside [0,1] absorbed by the
    /// validation tolerance.
    clip_magnitude: f64,
}

#[derive(Serialize)]
struct ProbReport {
    value: f64,
}

#[derive(Serialize)]
struct CountsReport {
    n: usize,
    window: String,
    mean: f64,
    variance: f64,
    pmf: Vec<f64>,
}

#[derive(Serialize)]
struct FockCheckReport {
    n: usize,
    basis: String,
    basis_seed: u64,
    /// max over all subsets of |Fock diagonal probability − elementary
    /// probability in the rotated frame|.
    max_probability_deviation: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    /// ‖K_m − antisymmetrized m-th power‖_max, when --m is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    correlation_identity_gap: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// DPP_THREADS caps the rayon pool; results do not depend on it.
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DPP_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .map_err(|_| format!("DPP_THREADS must be a positive integer, got {raw:?}"))?;
    if threads == 0 {
        return Err("DPP_THREADS must be a positive integer".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| format!("thread pool: {e}"))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Parse { .. } => 2,
        Error::DimensionTooLarge { .. } => 3,
        _ => 1,
    }
}

fn emit<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string(value).expect("report serialization")
    );
}

fn parse_subset(text: &str, n: usize) -> Result<SubsetIndex, Error> {
    let s: SubsetIndex = text.parse()?;
    s.check_range(n)?;
    Ok(s)
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Validate { kernel } => {
            let k = load_kernel(kernel)?;
            let spec = k.spectral_decompose()?;
            let eigs = spec.eigenvalues();
            emit(&ValidateReport {
                n: k.n(),
                valid: true,
                eigenvalue_min: eigs.iter().copied().fold(f64::INFINITY, f64::min),
                eigenvalue_max: eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                clip_magnitude: k.clip_magnitude(),
            });
        }
        Command::Prob {
            kernel,
            subset,
            mode,
        } => {
            let k = load_kernel(kernel)?;
            let s = parse_subset(subset, k.n())?;
            let value = match mode {
                ProbMode::Inclusion => inclusion_probability(&k, &s)?,
                ProbMode::Elementary => elementary_probability(&k, &s)?,
                ProbMode::Void => void_probability(&k, &s)?,
                ProbMode::Janossy => janossy_weight(&k, &s)?,
            };
            emit(&ProbReport { value });
        }
        Command::Pmf { kernel } => {
            let k = load_kernel(kernel)?;
            let pmf = full_pmf(&k)?;
            emit(&pmf.to_map());
        }
        Command::Sample {
            kernel,
            draws,
            seed,
        } => {
            let k = load_kernel(kernel)?;
            let spec = k.spectral_decompose()?;
            if !cli.quiet {
                eprintln!("sampling {draws} draws at seed {seed}");
            }
            let hist = sample_batch(&spec, *draws, SamplerConfig { seed: *seed })?;
            emit(&hist);
        }
        Command::Counts { kernel, subset } => {
            let k = load_kernel(kernel)?;
            let window = match subset {
                Some(text) => parse_subset(text, k.n())?,
                None => SubsetIndex::full(k.n()),
            };
            let pb = count_distribution(&k, &window)?;
            let (mean, variance) = count_moments(&pb);
            emit(&CountsReport {
                n: k.n(),
                window: window.to_string(),
                mean,
                variance,
                pmf: pb.pmf().to_vec(),
            });
        }
        Command::FockCheck {
            kernel,
            m,
            basis,
            basis_seed,
        } => {
            let k = load_kernel(kernel)?;
            let spec = k.spectral_decompose()?;
            let d = density_weights(&spec)?;
            let (w, basis_name) = match basis {
                BasisChoice::Identity => (
                    nalgebra::DMatrix::identity(k.n(), k.n()),
                    "identity".to_string(),
                ),
                BasisChoice::Random => {
                    let mut rng = replicate_rng(*basis_seed, DOMAIN_BASIS, 0);
                    (haar_unitary(k.n(), &mut rng), "random".to_string())
                }
            };
            let rotated = k.rotate(&w)?;
            let mut max_dev = 0.0f64;
            for s in basis_order(k.n()) {
                let fock = diagonal_probability(&d, &w, &s)?;
                let direct = elementary_probability(&rotated, &s)?;
                max_dev = max_dev.max((fock - direct).abs());
            }
            let gap = match m {
                Some(m) => Some(key_identity_gap(&spec, *m)?),
                None => None,
            };
            emit(&FockCheckReport {
                n: k.n(),
                basis: basis_name,
                basis_seed: *basis_seed,
                max_probability_deviation: max_dev,
                m: *m,
                correlation_identity_gap: gap,
            });
        }
        Command::Experiment(ExperimentCommand::Cue {
            n,
            arc_length,
            arc_center,
            replicates,
            seed,
        }) => {
            let arc = Arc::new(*arc_length, *arc_center)?;
            if !cli.quiet {
                eprintln!("running {replicates} CUE replicates at n = {n}, seed {seed}");
            }
            let report = arc_count_experiment(*n, &arc, *replicates, SamplerConfig { seed: *seed })?;
            emit(&report);
        }
        Command::Experiment(ExperimentCommand::Ust { graph, draws, seed }) => {
            let g = load_graph(graph)?;
            if !cli.quiet {
                eprintln!(
                    "comparing {draws} spanning-tree draws on {} vertices, seed {seed}",
                    g.vertex_count()
                );
            }
            let report = ust_compare(&g, *draws, SamplerConfig { seed: *seed })?;
            emit(&report);
        }
    }
    Ok(())
}
