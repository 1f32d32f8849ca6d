use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phasecert::certify::CertName;
use phasecert::io::{write_field, FieldFormat};
use phasecert::json::to_json_string;
use phasecert::report::{
    bundle_csv, certify, parse_state_arg, run_sweep, run_transform, OutputFormat, RunConfig, SweepParam, SweepSpec,
    TransformKind,
};
use phasecert::selftest::{criterion, CRITERIA};
use phasecert::{Error, Result};

const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "phasecert", version, about = "Certify uncertainty inequalities for phase-space fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run certificates on one state and write a bundle.
    /// Exit 0 all pass, 1 any fail, 2 indeterminate, 3 error.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated certificate names, or `all`.
        #[arg(long, default_value = "all")]
        certs: String,
        /// Hermite states used by the positivity probe.
        #[arg(long)]
        probe_size: Option<usize>,
    },
    /// Certify once per value of a scalar parameter; writes a CSV table.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "all")]
        certs: String,
        #[arg(long, value_enum)]
        param: Param,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
    /// Apply a transform and write the resulting field file.
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Run the acceptance corpus and print a pass/fail table.
    Selftest {
        /// Only this criterion (1-7).
        #[arg(long)]
        criterion: Option<u8>,
    },
}

#[derive(Args)]
struct Common {
    /// `kind` or `kind:key=value,…` shorthand, inline JSON, a .json spec
    /// file, or a field file.
    #[arg(long)]
    state: String,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    half_extent: Option<f64>,
    #[arg(long)]
    hbar: Option<f64>,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Binary,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
            Format::Binary => OutputFormat::Binary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    Radius,
    Weight,
    Mu,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Wigner,
    Sft,
    Hft,
    Density,
}

fn config_from(common: &Common, certs: Option<&str>) -> Result<RunConfig> {
    let mut cfg = RunConfig::new(parse_state_arg(&common.state)?);
    if let Some(n) = common.grid_points {
        cfg.grid_points = n;
    }
    cfg.half_extent = common.half_extent;
    if let Some(h) = common.hbar {
        cfg.hbar = h;
    }
    for t in &common.tol {
        let (k, v) = t.split_once('=').ok_or_else(|| Error::Config(format!("expected NAME=VALUE, got {t:?}")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Config(format!("bad tolerance value in {t:?}")))?;
        cfg.tolerances.set(k.trim(), v)?;
    }
    if let Some(list) = certs {
        if list.trim() != "all" {
            cfg.certificates = list.split(',').map(|s| CertName::parse(s.trim())).collect::<Result<_>>()?;
        }
    }
    Ok(cfg)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Certify { common, certs, probe_size } => {
            let mut cfg = config_from(&common, Some(&certs))?;
            if let Some(k) = probe_size {
                cfg.probe_size = k;
            }
            let bundle = certify(&cfg)?;
            let text = match common.format.map(OutputFormat::from).unwrap_or_default() {
                OutputFormat::Json => to_json_string(&bundle)? + "\n",
                OutputFormat::Csv => bundle_csv(&bundle),
                OutputFormat::Binary => return Err(Error::Config("certify writes json or csv".into())),
            };
            emit(&common.out, &text)?;
            for e in &bundle.errors {
                eprintln!("error in {}: {}", e.certificate.as_str(), e.message);
            }
            Ok(bundle.outcome.exit_code() as u8)
        }
        Command::Sweep { common, certs, param, from, to, steps } => {
            if matches!(common.format, Some(Format::Json | Format::Binary)) {
                return Err(Error::Config("sweep writes csv".into()));
            }
            let cfg = config_from(&common, Some(&certs))?;
            let param = match param {
                Param::Radius => SweepParam::Radius,
                Param::Weight => SweepParam::Weight,
                Param::Mu => SweepParam::Mu,
            };
            let table = run_sweep(&cfg, &SweepSpec { param, from, to, steps })?;
            emit(&common.out, &table.to_csv())?;
            Ok(0)
        }
        Command::Transform { common, which } => {
            let cfg = config_from(&common, None)?;
            let kind = match which {
                Which::Wigner => TransformKind::Wigner,
                Which::Sft => TransformKind::Sft,
                Which::Hft => TransformKind::Hft,
                Which::Density => TransformKind::Density,
            };
            let field = run_transform(&cfg, kind)?;
            let format = match common.format {
                Some(Format::Csv) => FieldFormat::Csv,
                Some(Format::Binary) | None => FieldFormat::Binary,
                Some(Format::Json) => return Err(Error::Config("field files are binary or csv".into())),
            };
            let out = common.out.ok_or_else(|| Error::Config("transform needs --out".into()))?;
            write_field(&out, &field, format)?;
            Ok(0)
        }
        Command::Selftest { criterion: only } => {
            let mut failed = 0;
            for (k, title) in CRITERIA.iter().filter(|(k, _)| only.is_none_or(|o| o == *k)) {
                println!("criterion {k}: {title}");
                for l in criterion(*k) {
                    println!("  {l}");
                    failed += usize::from(!l.passed);
                }
            }
            println!("{failed} check(s) failed");
            Ok(u8::from(failed > 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("phasecert: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
