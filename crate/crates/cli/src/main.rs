use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gspin::{compare, config_from_str, load_config, read_result, run_recipe, write_result, CliError, Config, CONFIG_DIR_ENV};

#[derive(Parser)]
#[command(name = "gspin", version, about = "Spin photodynamics simulator for triplet-metastable color centers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; defaults to $GSPIN_CONFIG_DIR/gspin.toml, then the bundled profile.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (`.json` for the single-object form); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config key, e.g. `--set zfs.e=510`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// ODMR contrast against microwave frequency.
    Odmr(RunArgs),
    /// Differential TRPL ΔS_B against dark delay.
    TrplDiff(RunArgs),
    /// ODMR contrast against the delays before and after the pulse.
    ContrastMap(RunArgs),
    /// |+>-|0> line of each orientation family against field.
    FieldSplit(RunArgs),
    /// PL change against field near the level anticrossing.
    LacSweep(RunArgs),
    /// Rabi oscillation and optional power scan.
    Rabi(RunArgs),
    /// Ramsey, echo or CPMG decay.
    Coherence(RunArgs),
    /// π-pulse differential lifetime measurement.
    LifetimeDiff(RunArgs),
    /// Fit a model to synthetic data or a column pair of a result file.
    Fit(RunArgs),
    /// Per-column deviations between two result files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Fail when any column's relative deviation exceeds this.
        #[arg(long, default_value_t = 0.0)]
        rel_tol: f64,
        /// Fail when any column's absolute deviation exceeds this.
        #[arg(long, default_value_t = 0.0)]
        abs_tol: f64,
    },
    /// Print the resolved configuration and its hash.
    ShowConfig(RunArgs),
}

fn resolve_config(args: &RunArgs) -> Result<Config, CliError> {
    if let Some(p) = &args.config {
        return load_config(p, &args.set);
    }
    if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
        let p = Path::new(&dir).join("gspin.toml");
        if p.is_file() {
            return load_config(&p, &args.set);
        }
    }
    config_from_str(None, "defaults", &args.set)
}

fn run_and_write(name: &str, args: &RunArgs) -> Result<(), CliError> {
    let config = resolve_config(args)?;
    let result = run_recipe(name, &config)?;
    for (k, v) in &result.metadata {
        if let Some(s) = k.strip_prefix("summary.") {
            eprintln!("{s} = {v}");
        }
    }
    match &args.out {
        Some(p) => write_result(p, &result),
        None => {
            let text = result.to_text()?;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let name = |c: &Command| match c {
        Command::Odmr(_) => "odmr",
        Command::TrplDiff(_) => "trpl-diff",
        Command::ContrastMap(_) => "contrast-map",
        Command::FieldSplit(_) => "field-split",
        Command::LacSweep(_) => "lac-sweep",
        Command::Rabi(_) => "rabi",
        Command::Coherence(_) => "coherence",
        Command::LifetimeDiff(_) => "lifetime-diff",
        Command::Fit(_) => "fit",
        Command::Compare { .. } | Command::ShowConfig(_) => "",
    };
    let recipe = name(&cli.command);
    match cli.command {
        Command::Compare { a, b, rel_tol, abs_tol } => {
            let devs = compare(&read_result(&a)?, &read_result(&b)?)?;
            let mut worst_ok = true;
            println!("column\tmax_abs\tmax_rel");
            for d in &devs {
                println!("{}\t{:.3e}\t{:.3e}", d.name, d.max_abs, d.max_rel);
                worst_ok &= d.max_rel <= rel_tol || d.max_abs <= abs_tol;
            }
            if worst_ok {
                Ok(())
            } else {
                Err(CliError::Numerical(format!("deviation above tolerance (rel {rel_tol:e}, abs {abs_tol:e})")))
            }
        }
        Command::ShowConfig(args) => {
            let c = resolve_config(&args)?;
            println!("# config_hash: {}", c.hash());
            print!("{}", toml::to_string(&c).map_err(|e| CliError::Format(e.to_string()))?);
            Ok(())
        }
        Command::Odmr(args)
        | Command::TrplDiff(args)
        | Command::ContrastMap(args)
        | Command::FieldSplit(args)
        | Command::LacSweep(args)
        | Command::Rabi(args)
        | Command::Coherence(args)
        | Command::LifetimeDiff(args)
        | Command::Fit(args) => run_and_write(recipe, &args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gspin: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
