use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permutex::baselines::Scheme;
use permutex::metrics::GlcmParams;
use permutex_cli::{run, Command, ReportFormat, RunConfig, EXIT_VALIDATION};

#[derive(Parser)]
#[command(
    name = "permutex",
    version,
    about = "Feature-ranked chaotic pixel permutation for grayscale PGM images"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Logistic-sine control parameter, in (0, 4]
    #[arg(long = "r", default_value_t = permutex::keygen::DEFAULT_R)]
    r: f64,
    /// Initial chaotic state, in (0, 1)
    #[arg(long = "x0", default_value_t = permutex::keygen::DEFAULT_X0)]
    x0: f64,
    /// Quantization factor applied to the chaotic sequence
    #[arg(long, default_value_t = permutex::keygen::DEFAULT_SCALE)]
    scale: u64,
    /// Odd local-contrast window size
    #[arg(long, default_value_t = permutex::features::DEFAULT_WINDOW)]
    window: usize,
    /// Seed for the random row-column baseline and scatter sampling
    #[arg(long, default_value_t = permutex::baselines::DEFAULT_SEED)]
    seed: u64,
    /// Directory for all outputs
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Clone)]
struct ReportArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Gray levels for the co-occurrence matrix
    #[arg(long, default_value_t = 8)]
    levels: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Original,
    RandomRc,
    ChaoticRc,
    KeyOnly,
    Permutex,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Original => Scheme::Original,
            SchemeArg::RandomRc => Scheme::RandomRc,
            SchemeArg::ChaoticRc => Scheme::ChaoticRc,
            SchemeArg::KeyOnly => Scheme::KeyOnly,
            SchemeArg::Permutex => Scheme::Permutex,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Scramble an image; writes <stem>.permuted.pgm, <stem>.pxpm and <stem>.provenance.json
    Permute {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = SchemeArg::Permutex)]
        scheme: SchemeArg,
        /// Scrambled image path (defaults to <out-dir>/<stem>.permuted.pgm)
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Restore a scrambled image from its permutation file
    Unpermute {
        input: PathBuf,
        /// Permutation file written by `permute`
        #[arg(long)]
        perm: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Correlation report for a permuted image against its original
    Analyze {
        original: PathBuf,
        permuted: PathBuf,
        /// Label for the report row
        #[arg(long, value_enum, default_value_t = SchemeArg::Permutex)]
        scheme: SchemeArg,
        /// Export this many adjacent pairs per direction (0 = all)
        #[arg(long)]
        scatter: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        report: ReportArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Run the original and every scheme, and tabulate their correlations
    Compare {
        input: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Dump the frequency, contrast and importance maps and the ranking
    Features {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a permutation key
    Keygen {
        /// Key length
        #[arg(long, required_unless_present = "like")]
        n: Option<usize>,
        /// Use the pixel count of this image as the key length
        #[arg(long)]
        like: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn apply_common(cfg: &mut RunConfig, c: &Common) {
    cfg.chaos.r = c.r;
    cfg.chaos.x0 = c.x0;
    cfg.chaos.scale = c.scale;
    cfg.window = c.window;
    cfg.seed = c.seed;
    cfg.out_dir = c.out_dir.clone();
}

fn apply_report(cfg: &mut RunConfig, r: &ReportArgs) {
    cfg.format = match r.format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    cfg.glcm = GlcmParams {
        levels: r.levels,
        ..GlcmParams::default()
    };
}

fn build_config(cmd: Cmd) -> RunConfig {
    match cmd {
        Cmd::Permute {
            input,
            scheme,
            output,
            common,
        } => {
            let mut cfg = RunConfig::new(Command::Permute).with_inputs([input]);
            apply_common(&mut cfg, &common);
            cfg.scheme = scheme.into();
            cfg.output = output;
            cfg
        }
        Cmd::Unpermute {
            input,
            perm,
            output,
            out_dir,
        } => {
            let mut cfg = RunConfig::new(Command::Unpermute)
                .with_inputs([input, perm])
                .with_out_dir(out_dir);
            cfg.output = output;
            cfg
        }
        Cmd::Analyze {
            original,
            permuted,
            scheme,
            scatter,
            output,
            report,
            common,
        } => {
            let mut cfg = RunConfig::new(Command::Analyze).with_inputs([original, permuted]);
            apply_common(&mut cfg, &common);
            apply_report(&mut cfg, &report);
            cfg.scheme = scheme.into();
            cfg.scatter = scatter;
            cfg.output = output;
            cfg
        }
        Cmd::Compare { input, report, common } => {
            let mut cfg = RunConfig::new(Command::Compare).with_inputs([input]);
            apply_common(&mut cfg, &common);
            apply_report(&mut cfg, &report);
            cfg
        }
        Cmd::Features { input, common } => {
            let mut cfg = RunConfig::new(Command::Features).with_inputs([input]);
            apply_common(&mut cfg, &common);
            cfg
        }
        Cmd::Keygen { n, like, common } => {
            let mut cfg = RunConfig::new(Command::Keygen).with_inputs(like);
            apply_common(&mut cfg, &common);
            cfg.key_len = n;
            cfg
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = build_config(cli.command);
    match run(&cfg) {
        Ok(out) => {
            print!("{}", out.summary);
            if !out.summary.ends_with('\n') {
                println!();
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            debug_assert!(code >= EXIT_VALIDATION);
            ExitCode::from(code as u8)
        }
    }
}
