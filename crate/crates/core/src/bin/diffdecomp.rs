use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use diffdecomp::estimate::{omega_with_pairs, overlap_diagnostic, Analysis};
use diffdecomp::graph::write_edge_list;
use diffdecomp::io::{read_panel_with_graph, write_panel};
use diffdecomp::mc::{emit_tables, run_scenario, write_report_json, McConfig, TableFormat};
use diffdecomp::multitest::stepdown;
use diffdecomp::numkit::RngStream;
use diffdecomp::simulate::{build_design, simulate_panel, DgpConfig};
use diffdecomp::{Error, Result};

#[derive(Parser)]
#[command(
    name = "diffdecomp",
    version,
    about = "Network diffusion simulation, decomposition and step-down testing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one panel and write panel.csv, contact.csv and observed.csv.
    Simulate {
        /// TOML file with DGP settings; defaults are used for missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Decompose the omitted-covariate diffusion measure for each `--omit` set.
    #[command(alias = "decompose")]
    Estimate {
        #[command(flatten)]
        input: Input,
        /// Comma-separated column indices; repeat for several sets.
        #[arg(long, required = true)]
        omit: Vec<String>,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write fit diagnostics as JSON here instead of stderr.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Step-down selection over single-covariate omissions.
    Stepdown {
        #[command(flatten)]
        input: Input,
        /// Columns to test, comma separated; defaults to every non-intercept column.
        #[arg(long)]
        family: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo study over a scenario grid.
    Mc {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Args)]
struct Input {
    /// Panel CSV with columns x0..x{p-1}, y0, y1.
    #[arg(long)]
    data: PathBuf,
    /// Observed-graph edge list.
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

fn parse_indices(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Error::InvalidConfig(format!("`{t}` is not a column index")))
        })
        .collect()
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn simulate(config: Option<&Path>, out: &Path, seed: u64) -> Result<()> {
    let cfg: DgpConfig = match config {
        Some(p) => toml::from_str(&std::fs::read_to_string(p)?)?,
        None => DgpConfig::default(),
    };
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let design = build_design(&cfg, &mut RngStream::new(seed, 0))?;
    let panel = simulate_panel(&design, &cfg, &mut RngStream::new(seed, 1))?;
    write_panel(&out.join("panel.csv"), &panel)?;
    write_edge_list(&out.join("contact.csv"), &design.contact)?;
    write_edge_list(&out.join("observed.csv"), &design.observed)?;
    eprintln!(
        "wrote {} nodes, {} contact edges to {}",
        panel.n(),
        design.contact.edge_count(),
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct FitDiagnostics {
    omit: Vec<usize>,
    iterations: usize,
    converged: bool,
    log_likelihood: f64,
    overlap_flagged: usize,
}

#[derive(Serialize)]
struct Diagnostics {
    n: usize,
    p: usize,
    overlap_threshold: f64,
    fits: Vec<FitDiagnostics>,
}

const OVERLAP_THRESHOLD: f64 = 1e-3;

fn estimate(
    input: &Input,
    omit: &[String],
    level: f64,
    out: Option<&Path>,
    diag: Option<&Path>,
) -> Result<()> {
    let panel = read_panel_with_graph(&input.data, &input.graph)?;
    let analysis = Analysis::new(&panel)?;
    let sets = omit
        .iter()
        .map(|s| parse_indices(s))
        .collect::<Result<Vec<_>>>()?;
    let fit_diag = |omit: Vec<usize>, fit: &diffdecomp::estimate::ProbitFit| FitDiagnostics {
        omit,
        iterations: fit.iterations,
        converged: fit.converged,
        log_likelihood: fit.log_likelihood,
        overlap_flagged: overlap_diagnostic(fit, OVERLAP_THRESHOLD).flagged.len(),
    };
    let mut fits = vec![fit_diag(Vec::new(), &analysis.fit)];
    let mut w = csv::Writer::from_writer(output(out)?);
    w.write_record([
        "S",
        "C_hat_S",
        "C_hat_empty",
        "Delta_hat",
        "sigma_hat",
        "ci_low",
        "ci_high",
        "clamp_flag",
    ])?;
    for s in sets {
        let (r, _) = analysis.decompose(&s, level)?;
        fits.push(fit_diag(s.clone(), &analysis.fit_omitting(&s)?));
        let label = s.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        w.write_record([
            label,
            r.c_hat_s.to_string(),
            r.c_hat_empty.to_string(),
            r.delta_hat.to_string(),
            r.sigma_hat.to_string(),
            r.ci_low.to_string(),
            r.ci_high.to_string(),
            u8::from(r.clamped).to_string(),
        ])?;
    }
    w.flush()?;
    let d = Diagnostics {
        n: panel.n(),
        p: panel.x.cols(),
        overlap_threshold: OVERLAP_THRESHOLD,
        fits,
    };
    match diag {
        Some(p) => serde_json::to_writer_pretty(std::fs::File::create(p)?, &d)?,
        None => eprintln!("{}", serde_json::to_string(&d)?),
    }
    Ok(())
}

#[derive(Serialize)]
struct StepdownOutput {
    delta_hats: Vec<f64>,
    #[serde(flatten)]
    result: diffdecomp::multitest::StepDownResult,
}

fn run_stepdown(
    input: &Input,
    family: Option<&str>,
    alpha: f64,
    draws: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    let panel = read_panel_with_graph(&input.data, &input.graph)?;
    let analysis = Analysis::new(&panel)?;
    let family = match family {
        Some(f) => parse_indices(f)?,
        None => (1..panel.x.cols()).collect(),
    };
    if family.contains(&0) {
        return Err(Error::InvalidConfig(
            "the intercept (column 0) cannot be omitted".into(),
        ));
    }
    let mut delta_hats = Vec::with_capacity(family.len());
    let mut sets = Vec::with_capacity(family.len());
    for &s in &family {
        let (r, inf) = analysis.decompose(&[s], 1.0 - alpha)?;
        delta_hats.push(r.delta_hat);
        sets.push(inf);
    }
    let omega = omega_with_pairs(&analysis.pairs, &sets)?;
    let result = stepdown(
        &family,
        &delta_hats,
        &omega,
        panel.n(),
        alpha,
        draws,
        &RngStream::new(seed, 0),
    )?;
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, &StepdownOutput { delta_hats, result })?;
    writeln!(w)?;
    Ok(())
}

fn mc(
    config: Option<&Path>,
    out: &Path,
    reps: Option<usize>,
    seed: Option<u64>,
    format: Format,
) -> Result<()> {
    let mut cfg = match config {
        Some(p) => McConfig::load(p)?,
        None => McConfig::default(),
    };
    if let Some(r) = reps {
        cfg.replications = r;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    let mut reports = Vec::new();
    for sc in cfg.scenarios()? {
        let started = std::time::Instant::now();
        let report = run_scenario(&sc)?;
        eprintln!(
            "{}: true ADM {:.4}, true Delta {:.4}, {} failures, {:.1}s",
            report.label,
            report.true_adm.mean,
            report.true_delta.mean,
            report.failures,
            started.elapsed().as_secs_f64()
        );
        reports.push(report);
    }
    let format = match format {
        Format::Csv => TableFormat::Csv,
        Format::Markdown => TableFormat::Markdown,
    };
    emit_tables(&reports, out, format)?;
    write_report_json(&reports, &out.join("report.json"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out, seed } => simulate(config.as_deref(), &out, seed),
        Command::Estimate {
            input,
            omit,
            level,
            out,
            diagnostics,
        } => estimate(&input, &omit, level, out.as_deref(), diagnostics.as_deref()),
        Command::Stepdown {
            input,
            family,
            alpha,
            draws,
            seed,
            out,
        } => run_stepdown(
            &input,
            family.as_deref(),
            alpha,
            draws,
            seed,
            out.as_deref(),
        ),
        Command::Mc {
            config,
            out,
            reps,
            seed,
            threads,
            format,
        } => {
            if let Some(t) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            }
            mc(config.as_deref(), &out, reps, seed, format)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
