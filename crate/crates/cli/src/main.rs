mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] momentdet::Error),
}

impl CliError {
    /// 2 for unreadable or invalid input, 3 for failed computations.
    fn exit_code(&self) -> u8 {
        use momentdet::Error as E;
        match self {
            CliError::Input(_) => 2,
            CliError::Core(E::Schema(_) | E::Parse { .. } | E::Expr { .. } | E::Invariant(_) | E::Dimension(_) | E::AxisOutOfRange { .. }) => 2,
            CliError::Core(_) => 3,
        }
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

#[derive(Parser, Debug)]
#[command(name = "momentdet", version, about = "Moment sequences and determinacy evidence")]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true)]
    precision_bits: Option<usize>,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for sampled pencil directions.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
pub struct Input {
    /// Measure specification (JSON).
    #[arg(long, conflicts_with = "moments", required_unless_present = "moments")]
    pub spec: Option<PathBuf>,
    /// Moment table (JSON) as written by `moments`.
    #[arg(long)]
    pub moments: Option<PathBuf>,
    /// Truncation order N.
    #[arg(long)]
    pub max_order: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransformKind {
    Laplace,
    Cauchy,
    Fantappie,
    Poisson,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute a moment table from a measure specification.
    Moments {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        max_order: usize,
    },
    /// Run determinacy rules and write an evidence report.
    Check {
        #[command(flatten)]
        input: Input,
        /// Comma-separated rule names, `all` or `all-1d`.
        #[arg(long)]
        rules: Option<String>,
        /// Assert that the support lies in the positive orthant.
        #[arg(long)]
        support_nonnegative: bool,
        /// Assert that the first d-1 coordinates lie in a ball of this radius.
        #[arg(long)]
        compact_base_radius: Option<f64>,
        /// Component of an asserted polynomial map (repeat per component).
        #[arg(long = "map", allow_hyphen_values = true)]
        map: Vec<String>,
        /// Assert that the map is injective on the support.
        #[arg(long)]
        injective: bool,
        /// Weight polynomial for the density rule.
        #[arg(long, allow_hyphen_values = true)]
        density_f: Option<String>,
        /// Assert that the density weight is admissible.
        #[arg(long)]
        density_weight: bool,
        #[arg(long)]
        pencil_directions: Option<usize>,
    },
    /// Weyl radii rho_n(z) as CSV.
    Weyl {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "0+1i", allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = 60)]
        degree: usize,
    },
    /// Nevanlinna quadruple, parametrized values and Weyl disk membership.
    Nevanlinna {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "0+1i", allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = 10)]
        degree: usize,
        /// `inf`, `const:<c>` or a complex literal (repeatable).
        #[arg(long, allow_hyphen_values = true)]
        phi: Vec<String>,
        /// Extra points to test against the Weyl disk (repeatable).
        #[arg(long, allow_hyphen_values = true)]
        w: Vec<String>,
    },
    /// Evaluate a transform on a grid as CSV.
    Transform {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum)]
        kind: TransformKind,
        /// Lower grid bound, one value or one per axis (comma-separated).
        #[arg(long, default_value = "0.5", allow_hyphen_values = true)]
        lo: String,
        #[arg(long, default_value = "3", allow_hyphen_values = true)]
        hi: String,
        #[arg(long, default_value = "10")]
        steps: String,
        /// Difference order for the monotonicity check.
        #[arg(long, default_value_t = 4)]
        order: usize,
        /// Imaginary part of every coordinate (cauchy, poisson).
        #[arg(long, default_value_t = 1.0)]
        y: f64,
        /// p0 for the Fantappiè transform; the grid ranges over p.
        #[arg(long, default_value_t = 1.0)]
        p0: f64,
        /// Skip the complete-monotonicity check.
        #[arg(long)]
        no_check: bool,
    },
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(b) = cli.precision_bits {
        cfg.precision_bits = b;
    }
    if let Some(s) = cli.seed {
        cfg.check.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.display().to_string());
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String, CliError> {
    let mut cfg = build_config(&cli)?;
    match cli.command {
        Command::Moments { spec, max_order } => commands::moments(&cfg, &spec, max_order),
        Command::Check {
            input,
            rules,
            support_nonnegative,
            compact_base_radius,
            map,
            injective,
            density_f,
            density_weight,
            pencil_directions,
        } => {
            let c = &mut cfg.check;
            if let Some(r) = rules {
                c.rules = r.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            }
            c.assertions.support_nonnegative |= support_nonnegative;
            c.assertions.density_weight |= density_weight;
            if compact_base_radius.is_some() {
                c.assertions.compact_base_radius = compact_base_radius;
            }
            if !map.is_empty() {
                c.assertions.map = Some(momentdet::determinacy_md::MapAssertion { components: map, injective });
            } else if let Some(m) = c.assertions.map.as_mut() {
                m.injective |= injective;
            }
            if density_f.is_some() {
                c.density_f = density_f;
            }
            if let Some(n) = pencil_directions {
                c.pencil_directions = n;
            }
            commands::check(&cfg, &input)
        }
        Command::Weyl { input, z, degree } => commands::weyl(&cfg, &input, &z, degree),
        Command::Nevanlinna { input, z, degree, phi, w } => commands::nevanlinna(&cfg, &input, &z, degree, &phi, &w),
        Command::Transform { spec, kind, lo, hi, steps, order, y, p0, no_check } => {
            let grid = commands::GridFlags { lo, hi, steps, order };
            commands::transform(&cfg, &spec, kind, &grid, y, p0, !no_check)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let result = run(cli).and_then(|text| match &out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
