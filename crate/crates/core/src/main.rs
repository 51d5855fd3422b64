//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid scenario or I/O, 2 the hypotheses do
//! not hold (including a common fixed point), 3 a numerical routine
//! failed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use circle_ifs::error::Error;
use circle_ifs::pipeline::run_pipeline;
use circle_ifs::plot::{emit_plot_data, PlotKind};
use circle_ifs::report::{all_schemas, report_schema, summary_schema, to_bytes};
use circle_ifs::scenario::{Analysis, Scenario};

#[derive(Parser)]
#[command(name = "circle-ifs", version, about = "Limit sets of two circle diffeomorphisms close to rotations")]
struct Cli {
    /// Scenario file (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Directory receiving the reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override the scenario's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print the JSON schemas of the reports the command writes and exit.
    #[arg(long, global = true)]
    json_schema: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses listed in the scenario.
    Analyze,
    /// Classify star intervals and decompose the limit set.
    Decompose,
    /// Minimality certificate and orbit histograms.
    Certify,
    /// Return-map atlases and expansion certificates.
    ReturnMap,
    /// Orbit histograms of Phi and Phi^-1.
    Orbit,
    /// CSV tables from the reports in --out.
    PlotData {
        /// Table to write; every table whose report exists when omitted.
        #[arg(long, value_parser = ["orbit_histogram", "interval_diagram", "derivative_profile"])]
        kind: Option<String>,
    },
}

impl Command {
    fn analyses(&self, s: Option<&Scenario>) -> Vec<Analysis> {
        match self {
            Command::Analyze => s.map_or(Analysis::DEFAULT.to_vec(), |s| s.analyses.clone()),
            Command::Decompose => vec![Analysis::Decompose],
            Command::Certify => vec![Analysis::Certify],
            Command::ReturnMap => vec![Analysis::ReturnMap],
            Command::Orbit => vec![Analysis::Orbit],
            Command::PlotData { .. } => Vec::new(),
        }
    }
}

fn init_threads() {
    if let Ok(v) = std::env::var("CIRCLE_IFS_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                // Only fails when the pool already exists.
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => eprintln!("warning: ignoring CIRCLE_IFS_THREADS={v:?}; expected a positive integer"),
        }
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn print_schemas(cmd: Option<&Command>) {
    let v = match cmd {
        None | Some(Command::PlotData { .. }) => all_schemas(),
        Some(c) => {
            let mut m = serde_json::Map::new();
            for a in Analysis::closure(&c.analyses(None)) {
                m.insert(a.file_name(), report_schema(a));
            }
            m.insert("summary.json".into(), summary_schema());
            serde_json::Value::Object(m)
        }
    };
    print!("{}", String::from_utf8(to_bytes(&v)).expect("JSON is UTF-8"));
}

fn plot_data(out: &Path, kind: Option<&str>) -> Result<(), Error> {
    let kinds: Vec<PlotKind> = match kind {
        Some(k) => vec![PlotKind::from_id(k).expect("validated by clap")],
        None => PlotKind::ALL.to_vec(),
    };
    let mut written = 0;
    for k in kinds {
        let source = k.sources().iter().map(|a| out.join(a.file_name())).find(|p| p.exists());
        let Some(path) = source else {
            if kind.is_some() {
                return Err(Error::MissingSection(format!("{} (no report in {} provides it)", k.id(), out.display())));
            }
            continue;
        };
        let text = std::fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let report: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let csv = emit_plot_data(&report, k)?;
        let dest = out.join(k.file_name());
        std::fs::write(&dest, csv).map_err(|e| Error::Io(format!("{}: {e}", dest.display())))?;
        println!("wrote {}", dest.display());
        written += 1;
    }
    if written == 0 {
        return Err(Error::MissingSection(format!("no report in {} feeds a plot table", out.display())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    if cli.json_schema {
        print_schemas(cli.command.as_ref());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (try --help)");
        return ExitCode::from(1);
    };
    if let Command::PlotData { kind } = &command {
        return match plot_data(&cli.out, kind.as_deref()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&e),
        };
    }
    let Some(path) = cli.scenario else {
        return fail(&Error::ScenarioInvalid(vec!["--scenario is required".into()]));
    };
    let mut scenario = match Scenario::from_path(&path) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    let bundle = run_pipeline(&scenario, &command.analyses(Some(&scenario)));
    if let Err(e) = bundle.write(&cli.out) {
        return fail(&e);
    }
    for (name, _) in &bundle.reports {
        println!("wrote {}", cli.out.join(name).display());
    }
    println!("wrote {}", cli.out.join("summary.json").display());
    match &bundle.error {
        Some(e) => fail(e),
        None => ExitCode::SUCCESS,
    }
}
