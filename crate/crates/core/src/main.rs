//! Command-line front end: configured pricing runs, built-in table
//! reproduction, curve tabulation, and self-tests, all emitting RFC-4180 CSV.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dbarrier::config::RunConfig;
use dbarrier::pricing::{price, price_curve, Method, PriceRequest};
use dbarrier::selftest::run_selftests;
use dbarrier::tables;
use dbarrier::PricingError;

#[derive(Parser)]
#[command(name = "dbarrier", version, about = "Double-barrier option pricer for KoBoL-type Levy models")]
struct Cli {
    /// JSON run configuration (required for price and curve).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Laplace inversion back-end override.
    #[arg(long, global = true, value_parser = ["sinh", "gwr", "auto"])]
    method: Option<String>,
    /// Target accuracy override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker thread count (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Price under both deformation families and report the discrepancy.
    #[arg(long, global = true)]
    dual_run: bool,
    /// Add the near-barrier normalized column to curve output.
    #[arg(long, global = true)]
    normalize: bool,
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price the configured spots at each configured maturity.
    Price,
    /// Reproduce a built-in reference table (table1..table6).
    Table { name: String },
    /// Price a dense interior grid for plotting.
    Curve {
        #[arg(long, default_value_t = 4999)]
        points: usize,
    },
    /// Run the structural diagnostics suite.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                PricingError::Divergence(_) | PricingError::Singular(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, PricingError> {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let header: Vec<&str>;

    match &cli.command {
        Command::Selftest => {
            let results = run_selftests();
            let mut failed = false;
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                failed |= !r.passed;
            }
            return Ok(if failed { ExitCode::from(3) } else { ExitCode::SUCCESS });
        }
        Command::Price => {
            let cfg = load_config(cli)?;
            init_threads(cli.threads.or(cfg.run.threads))?;
            header = vec!["x", "T", "value", "error_estimate", "method", "elapsed_ms", "knocked"];
            for mut req in cfg.requests()? {
                apply_overrides(cli, &mut req);
                let report = price(&req)?;
                let ms = report.wall_time.as_secs_f64() * 1e3;
                for s in &report.spots {
                    rows.push(vec![
                        fmt(s.x),
                        fmt(req.maturity),
                        fmt(s.value),
                        s.error_estimate.map(fmt).unwrap_or_default(),
                        method_name(report.method_used).to_string(),
                        format!("{ms:.3}"),
                        if s.knocked { "knocked".into() } else { String::new() },
                    ]);
                }
            }
        }
        Command::Table { name } => {
            let table = tables::lookup(name).ok_or_else(|| {
                PricingError::Config(format!(
                    "unknown table {name:?}; expected one of table1..table6"
                ))
            })?;
            init_threads(cli.threads)?;
            header = vec!["T", "x", "value", "reference", "deviation"];
            for (maturity, refs) in table.rows {
                let mut req = table.request(*maturity)?;
                apply_overrides(cli, &mut req);
                let report = price(&req)?;
                for (s, r) in report.spots.iter().zip(refs) {
                    rows.push(vec![
                        fmt(*maturity),
                        fmt(s.x),
                        fmt(s.value),
                        fmt(*r),
                        format!("{:.3e}", (s.value - r).abs()),
                    ]);
                }
            }
        }
        Command::Curve { points } => {
            let cfg = load_config(cli)?;
            init_threads(cli.threads.or(cfg.run.threads))?;
            header = if cli.normalize {
                vec!["T", "x", "value", "normalized"]
            } else {
                vec!["T", "x", "value"]
            };
            for mut req in cfg.requests()? {
                apply_overrides(cli, &mut req);
                let curve = price_curve(&req, *points, cli.normalize)?;
                for p in curve {
                    let mut row = vec![fmt(req.maturity), fmt(p.x), fmt(p.value)];
                    if let Some(n) = p.normalized {
                        row.push(fmt(n));
                    }
                    rows.push(row);
                }
            }
        }
    }

    let csv = render_csv(&header, &rows);
    match &cli.out {
        Some(path) => fs::write(path, csv)
            .map_err(|e| PricingError::Config(format!("cannot write {}: {e}", path.display())))?,
        None => {
            std::io::stdout()
                .write_all(csv.as_bytes())
                .map_err(|e| PricingError::Config(format!("cannot write output: {e}")))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn load_config(cli: &Cli) -> Result<RunConfig, PricingError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| PricingError::Config("--config is required for this command".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| PricingError::Config(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

fn apply_overrides(cli: &Cli, req: &mut PriceRequest) {
    if let Some(m) = &cli.method {
        req.method = match m.as_str() {
            "sinh" => Method::SinhLaplace,
            "gwr" => Method::Gwr,
            _ => Method::Auto,
        };
    }
    if let Some(tol) = cli.tol {
        req.tolerance = tol;
    }
    if cli.dual_run {
        req.dual_run = true;
    }
}

fn init_threads(threads: Option<usize>) -> Result<(), PricingError> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(PricingError::Config("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| PricingError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::SinhLaplace => "sinh",
        Method::Gwr => "gwr",
        Method::Auto => "auto",
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push_str("\r\n");
    for row in rows {
        let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        out.push_str(&fields.join(","));
        out.push_str("\r\n");
    }
    out
}
