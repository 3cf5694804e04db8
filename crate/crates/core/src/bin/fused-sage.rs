use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fused_sage::bench::{self, GridSpec, DEFAULT_SEEDS};
use fused_sage::graph::{write_csr_cache, write_edge_list};
use fused_sage::train::Variant;
use fused_sage::verify::{self, GradCheckOptions, InstanceLimits, VerifyOptions};
use fused_sage::{DatasetSpec, Error, Workers};

const EXIT_USER: u8 = 1;
const EXIT_PROPERTY: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "fused-sage", version, about = "Fused neighbor sampling + mean aggregation: benchmarks and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GraphFormat {
    Edgelist,
    Csr,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate or convert a graph and write it to disk.
    Gen {
        #[arg(long)]
        dataset: DatasetSpec,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csr")]
        format: GraphFormat,
    },
    /// Run the benchmark grid and append rows to a CSV.
    Bench {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, num_args = 1.., default_value = "synth:powerlaw:N=100000,deg=20,exp=2.1,seed=42")]
        datasets: Vec<DatasetSpec>,
        /// "k1 k2" for two hops or "k" for one; repeatable.
        #[arg(long, num_args = 1.., default_values = ["10 10", "15 10", "25 10"])]
        fanouts: Vec<String>,
        #[arg(long, num_args = 1.., default_value = "1024")]
        batches: Vec<usize>,
        #[arg(long, default_value_t = bench::DEFAULT_STEPS)]
        steps: usize,
        #[arg(long, default_value_t = bench::DEFAULT_WARMUP)]
        warmup: usize,
        /// Repeat r uses base seed 42 + r.
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, num_args = 1.., value_delimiter = ',', default_values = ["baseline", "fused"])]
        variants: Vec<Variant>,
        /// 32 or 64.
        #[arg(long, default_value_t = 32)]
        elem_bits: u32,
        /// Baseline gathers each distinct node once.
        #[arg(long)]
        dedup: bool,
        #[arg(long, default_value_t = bench::DEFAULT_D_FEAT)]
        d_feat: usize,
        #[arg(long, default_value_t = fused_sage::train::DEFAULT_HIDDEN)]
        hidden: usize,
        #[arg(long, default_value_t = bench::DEFAULT_CLASSES)]
        classes: usize,
    },
    /// Randomized equivalence, replay, distinctness and determinism checks.
    Verify {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 200)]
        max_n: usize,
        #[arg(long, default_value_t = 8)]
        max_d: usize,
        #[arg(long, default_value_t = 0x5AFE)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Finite-difference check of the backward passes (64-bit).
    GradCheck {
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Forward without saved indices; the gradient must be exactly zero.
        #[arg(long)]
        nosave: bool,
        #[arg(long, default_value_t = 50)]
        max_n: usize,
        #[arg(long, default_value_t = 4)]
        max_d: usize,
        #[arg(long, default_value_t = 0x6AAD)]
        seed: u64,
    },
    /// Summarize a bench CSV: medians across repeats and speedups.
    Report {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        summary_out: Option<PathBuf>,
    },
}

enum Failure {
    User(Error),
    Property,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::User(e)
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen { dataset, out, format } => {
            let graph = dataset.load()?;
            match format {
                GraphFormat::Edgelist => write_edge_list(&graph, &out)?,
                GraphFormat::Csr => write_csr_cache(&graph, &out)?,
            }
            println!(
                "wrote {} ({} nodes, {} directed entries, mean degree {:.2})",
                out.display(),
                graph.num_nodes(),
                graph.num_entries(),
                graph.mean_degree()
            );
        }
        Command::Bench {
            out,
            datasets,
            fanouts,
            batches,
            steps,
            warmup,
            repeats,
            variants,
            elem_bits,
            dedup,
            d_feat,
            hidden,
            classes,
        } => {
            if repeats == 0 {
                return Err(Error::invalid("--repeats must be >= 1").into());
            }
            if !matches!(elem_bits, 32 | 64) {
                return Err(Error::invalid("--elem-bits must be 32 or 64").into());
            }
            let mut grid = GridSpec::new(
                datasets,
                fanouts.iter().map(|f| bench::parse_fanout(f)).collect::<Result<_, _>>()?,
                batches,
            );
            grid.variants = variants;
            grid.base_seeds = (0..repeats as u64).map(|r| DEFAULT_SEEDS[0] + r).collect();
            grid.steps = steps;
            grid.warmup = warmup;
            grid.elem_bits = elem_bits;
            grid.dedup = dedup;
            grid.d_feat = d_feat;
            grid.hidden = hidden;
            grid.classes = classes;
            println!("bench: {} rows planned -> {}", grid.num_rows(), out.display());
            let outcome = bench::run_grid(&grid, &out, |r| {
                println!(
                    "  {} {:<8} ({},{}) B={} seed={} median {:.2} ms, {:.0} pairs/s, peak {} B",
                    r.dataset, r.variant, r.k1, r.k2, r.batch, r.base_seed, r.step_ms_median, r.sampled_pairs_per_s,
                    r.peak_transient_bytes
                );
            })?;
            println!("wrote {} rows, skipped {} already present", outcome.written.len(), outcome.skipped);
            match bench::report_speedups(&out) {
                Ok(rows) => print!("{}", bench::render_table(&rows)),
                Err(e) => eprintln!("note: no summary ({e})"),
            }
        }
        Command::Verify {
            trials,
            max_n,
            max_d,
            seed,
            inject_fault,
        } => {
            if max_n < 2 || max_d < 1 {
                return Err(Error::invalid("--max-n must be >= 2 and --max-d >= 1").into());
            }
            let opts = VerifyOptions {
                trials,
                limits: InstanceLimits {
                    max_n,
                    max_d,
                    ..Default::default()
                },
                suite_seed: seed,
                inject_fault,
            };
            if inject_fault {
                println!("fault injection enabled: one fused sample per trial is corrupted");
            }
            if trials == 0 {
                eprintln!("warning: --trials 0, no properties were exercised");
            }
            let report = verify::run_verify(&opts)?;
            println!("{report}");
            if !report.passed() {
                return Err(Failure::Property);
            }
        }
        Command::GradCheck {
            eps,
            trials,
            nosave,
            max_n,
            max_d,
            seed,
        } => {
            if max_n < 2 || max_d < 1 {
                return Err(Error::invalid("--max-n must be >= 2 and --max-d >= 1").into());
            }
            let opts = GradCheckOptions {
                trials,
                eps,
                nosave,
                limits: InstanceLimits {
                    max_n,
                    max_d,
                    ..GradCheckOptions::default().limits
                },
                suite_seed: seed,
            };
            let report = verify::run_grad_check(&opts)?;
            println!("{report}");
            if !report.passed() {
                return Err(Failure::Property);
            }
        }
        Command::Report { csv, summary_out } => {
            if !csv.exists() {
                return Err(Error::invalid(format!("{} does not exist", csv.display())).into());
            }
            let rows = bench::report_speedups(&csv)?;
            print!("{}", bench::render_table(&rows));
            if let Some(path) = summary_out {
                bench::write_summary(&rows, &path)?;
                println!("summary written to {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USER) } else { ExitCode::SUCCESS };
        }
    };
    let workers = match Workers::from_env() {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USER);
        }
    };
    println!("config: {:?}", cli.command);
    println!("config: workers={}", workers.count());
    match workers.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Property) => ExitCode::from(EXIT_PROPERTY),
        Err(Failure::User(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USER)
        }
    }
}
