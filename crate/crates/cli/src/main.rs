//! `hsplab`: seeded, reproducible runs of the hidden subgroup experiments.

mod artifact;
mod commands;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use artifact::{Format, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "hsplab", version, about = "Fourier sampling experiments for hidden subgroup problems")]
struct Cli {
    /// Worker threads for trial parallelism (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GroupArgs {
    #[arg(long)]
    pub p: u64,
    /// Order of `a`, dividing p - 1.
    #[arg(long)]
    pub q: u64,
    /// Element of order q; defaults to gamma^((p-1)/q).
    #[arg(long)]
    pub a: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct HiddenArgs {
    /// Shift of the hidden conjugate `<(a, (1-a) b)>`.
    #[arg(long, default_value_t = 0)]
    pub b: u64,
    /// Hide `trivial`, `full` or `normal:Q` instead of a conjugate.
    #[arg(long)]
    pub subgroup: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistKind {
    Weak,
    Strong,
    Row,
    Abelian,
    Info,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    Adapted,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InfoMode {
    Reconstruct,
    Separation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinExtension {
    Q8z15,
    Z3z7,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact outcome distributions of weak, strong, row, abelian or
    /// likelihood-measurement Fourier sampling in `Z_q ⋉ Z_p`.
    Dist {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        hidden: HiddenArgs,
        #[arg(long, value_enum, default_value = "strong")]
        kind: DistKind,
        #[arg(long, value_enum, default_value = "adapted")]
        basis: Basis,
        /// Required with `--basis random`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recover the hidden conjugate `H_a^b` of `A_p` by row Fourier sampling.
    Hcp {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Full hidden subgroup reconstruction in `Z_q ⋉ Z_p`.
    Hsp {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        hidden: HiddenArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Likelihood reconstruction in `A_p`, or the TV separation table.
    Info {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        hidden: HiddenArgs,
        #[arg(long, value_enum, default_value = "reconstruct")]
        mode: InfoMode,
        /// Required for `--mode reconstruct`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Measurement of `rho` in Haar-random bases, compared with uniform.
    RandomBasis {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 1)]
        b: u64,
        /// Second shift for the pairwise L1 column.
        #[arg(long, default_value_t = 2)]
        b2: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        bases: usize,
    },
    /// Coset-averaged character distribution after forgetting the group law.
    AbelianFail {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long, default_value_t = 0)]
        b: u64,
    },
    /// Hidden shift of a coset-constant function on `Z_p`.
    Shift {
        #[arg(long)]
        p: u64,
        /// Index of the stabilizer in `Z_p^*`; divides p - 1.
        #[arg(long)]
        r: u64,
        #[arg(long)]
        s: u64,
        #[arg(long)]
        seed: u64,
        /// Seed of the function's coset symbols; defaults to `--seed`.
        #[arg(long)]
        function_seed: Option<u64>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Hidden subgroup in an extension `K -> G -> H` with abelian `H`.
    Extension {
        #[arg(long, value_enum, default_value = "q8z15", conflicts_with = "file")]
        group: BuiltinExtension,
        /// Extension in the JSON layout {elements, mult_table, K, transversal, h_dims}.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Element labels generating the hidden subgroup, separated by `;`
        /// (labels may contain commas); random when absent.
        #[arg(long, value_delimiter = ';')]
        generators: Vec<String>,
        #[arg(long)]
        seed: u64,
    },
    /// Complete Gauss sums over `Z_p^*`, and optionally the incomplete sums
    /// over the order-q subgroup.
    Gauss {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        q: Option<u64>,
    },
    /// Run the acceptance criteria.
    Acceptance {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Criterion ids to run; all when absent.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

/// Failure classes, mapped to exit codes 2 and 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(String),
}

impl From<hsplab::Error> for Failure {
    fn from(e: hsplab::Error) -> Self {
        use hsplab::Error::*;
        match e {
            NotPrime(_)
            | OrderDoesNotDivide { .. }
            | NotGenerator { .. }
            | WrongOrder { .. }
            | NotInGroup { .. }
            | NotInSubgroup { .. }
            | InvalidSubgroup(_)
            | CapExceeded { .. }
            | NotAffine
            | InvalidParameter(_) => Failure::Usage(e.to_string()),
            _ => Failure::Run(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(format!("io: {e}"))
    }
}

fn default_format(c: &Command) -> Format {
    match c {
        Command::Dist { .. }
        | Command::RandomBasis { .. }
        | Command::AbelianFail { .. }
        | Command::Gauss { .. } => Format::Csv,
        Command::Info {
            mode: InfoMode::Separation,
            ..
        } => Format::Csv,
        _ => Format::Json,
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Run(e.to_string()))?;
    }
    let format = cli.format.unwrap_or_else(|| default_format(&cli.command));
    let out = cli.out.clone();
    let (cfg, art) = match cli.command {
        Command::Dist {
            group,
            hidden,
            kind,
            basis,
            seed,
        } => commands::dist(RunConfig::new("dist", out, format), &group, &hidden, kind, basis, seed)?,
        Command::Hcp {
            group,
            b,
            seed,
            trials,
        } => commands::hcp(RunConfig::new("hcp", out, format), &group, b, seed, trials)?,
        Command::Hsp {
            group,
            hidden,
            seed,
            trials,
        } => commands::hsp(RunConfig::new("hsp", out, format), &group, &hidden, seed, trials)?,
        Command::Info {
            group,
            hidden,
            mode,
            seed,
        } => commands::info(RunConfig::new("info", out, format), &group, &hidden, mode, seed)?,
        Command::RandomBasis {
            group,
            b,
            b2,
            seed,
            bases,
        } => commands::random_basis(
            RunConfig::new("random-basis", out, format),
            &group,
            b,
            b2,
            seed,
            bases,
        )?,
        Command::AbelianFail { group, b } => {
            commands::abelian_fail(RunConfig::new("abelian-fail", out, format), &group, b)?
        }
        Command::Shift {
            p,
            r,
            s,
            seed,
            function_seed,
            trials,
        } => commands::shift(
            RunConfig::new("shift", out, format),
            p,
            r,
            s,
            seed,
            function_seed,
            trials,
        )?,
        Command::Extension {
            group,
            file,
            generators,
            seed,
        } => commands::extension(
            RunConfig::new("extension", out, format),
            group,
            file,
            &generators,
            seed,
        )?,
        Command::Gauss { p, q } => commands::gauss(RunConfig::new("gauss", out, format), p, q)?,
        Command::Acceptance { seed, only } => {
            commands::acceptance(RunConfig::new("acceptance", out, format), seed, &only)?
        }
    };
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            art.write(&cfg, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            art.write(&cfg, &mut w)?;
            w.flush()?;
        }
    }
    Ok(art.ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = run(cli);
    eprintln!("wall time {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
