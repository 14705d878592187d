use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use multitwist_cli::commands::{self, ExampleOpts};
use multitwist_cli::{CliResult, Format, Globals, EXIT_INPUT};

#[derive(Parser)]
#[command(
    name = "multitwist",
    version,
    about = "Build and check finite multitwisted real spectral triples"
)]
struct Cli {
    /// Relative tolerance for every condition.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,
    /// Seed for randomized builders and forms.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Build one of the fuzzy examples and write it as a document.
    Example {
        /// fuzzy-torus2, fuzzy-circle-even, fuzzy-torus3, asymmetric-torus or circle-bundle
        name: String,
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// Coupling strength of the circle bundle.
        #[arg(long, default_value_t = 0.3)]
        t: f64,
        /// Rescaling element of the first summand (asymmetric-torus): id, exp:S[:N], rand:SEED[:SPREAD] or a file.
        #[arg(long)]
        k1: Option<String>,
        /// Rescaling element of the second summand (asymmetric-torus).
        #[arg(long)]
        k2: Option<String>,
        /// Spread of the seeded rescaling elements when no --k1/--k2 is given.
        #[arg(long, default_value_t = 0.5)]
        spread: f64,
        /// Keep the fuzzy 3-torus operator as a single summand.
        #[arg(long)]
        single_summand: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run every checker on a document.
    Check {
        path: PathBuf,
        /// Conditions that must pass: `all` or a comma list of ids
        /// (`structural` expands); defaults to the set named in the provenance.
        #[arg(long)]
        asserts: Option<String>,
    },
    /// Tensor product of an even triple with another one.
    Tensor {
        first: PathBuf,
        second: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fluctuate the operator by a selfadjoint one-form.
    Fluctuate {
        path: PathBuf,
        /// random[:SEED[:TERMS[:SCALE]]] or a one-form file.
        #[arg(long, default_value = "random")]
        form: String,
        /// Add the twisted J-conjugate of the form so that eps' is preserved.
        #[arg(long)]
        eps_preserving: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rescale summand-wise by positive algebra elements, or by one Clifford element.
    Rescale {
        path: PathBuf,
        /// One per summand (or exactly one with --clifford): id, exp:S[:N],
        /// gexp:S[:N], rand:SEED[:SPREAD] or a matrix file.
        #[arg(long = "k", required = true)]
        ks: Vec<String>,
        #[arg(long)]
        clifford: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the eigenvalues of D in ascending order.
    Spectrum { path: PathBuf },
}

fn run(cli: Cli, w: &mut dyn Write) -> CliResult<i32> {
    let g = Globals {
        tol: cli.tol,
        format: match cli.format {
            OutputFormat::Table => Format::Table,
            OutputFormat::Json => Format::Json,
        },
        seed: cli.seed,
    };
    match cli.command {
        Command::Example {
            name,
            q,
            p,
            t,
            k1,
            k2,
            spread,
            single_summand,
            output,
        } => {
            let opts = ExampleOpts {
                q,
                p,
                t,
                k1,
                k2,
                spread,
                single_summand,
            };
            commands::cmd_example(&name, &opts, &g, output.as_deref(), w)
        }
        Command::Check { path, asserts } => commands::cmd_check(&path, asserts.as_deref(), &g, w),
        Command::Tensor { first, second, output } => commands::cmd_tensor(&first, &second, output.as_deref(), w),
        Command::Fluctuate {
            path,
            form,
            eps_preserving,
            output,
        } => commands::cmd_fluctuate(&path, &form, eps_preserving, &g, output.as_deref(), w),
        Command::Rescale {
            path,
            ks,
            clifford,
            output,
        } => commands::cmd_rescale(&path, &ks, clifford, output.as_deref(), w),
        Command::Spectrum { path } => commands::cmd_spectrum(&path, &g, w),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = match run(cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    };
    let _ = lock.flush();
    ExitCode::from(code as u8)
}
