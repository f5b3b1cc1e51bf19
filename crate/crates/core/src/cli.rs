// SPDX-License-Identifier: Apache-2.0

//! `sqnl` command-line front end.
//!
//! Each subcommand writes one CSV or JSON artifact, to stdout or to `--out`,
//! and a one-line summary to stderr. Relative output paths are resolved
//! against `SQNL_OUT_DIR` when it is set. Files are written to a temporary
//! sibling and renamed into place.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 rejected input or failed
//! precondition, 4 internal error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{deviation_histogram, deviation_profile};
use crate::closedform::{tansig_model, to_decimal_string, Rational};
use crate::dither::{fit_eq3, linspace, simulate, DitherConfig, FitResult};
use crate::generator::{map_all, GeneratorConfig, GeneratorMode};
use crate::nn::{
    dequantize, divergence, FloatActivations, LstmCellFixed, LstmCellFloat, LstmFixture,
};
use crate::resources::{estimate, gate_cost, method_boms, BillOfMaterials, Block};
use crate::{Error, Result};

pub const OUT_DIR_ENV: &str = "SQNL_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "sqnl",
    version,
    about = "Square-law activation generator toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Input/output table of a generator over its whole input range.
    Map(MapArgs),
    /// Deviation of the iterative generator from the closed form.
    Deviate(DeviateArgs),
    /// Gate-count estimates.
    Estimate(EstimateArgs),
    /// Dither simulation and tansig-model fit.
    Fit(FitArgs),
    /// Fixed-point LSTM run over a weight fixture.
    Lstm(LstmArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Symmetric,
    Logsqnl,
    Asymmetric,
    Gated,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// Word width R.
    #[arg(long)]
    pub r: u32,
    /// Sequence length N.
    #[arg(long)]
    pub n: u64,
    #[arg(long, value_enum, default_value = "symmetric")]
    pub mode: ModeArg,
    /// Offset for the asymmetric mode.
    #[arg(long, default_value_t = 0)]
    pub alpha: i64,
    /// Scaling level for the gated mode.
    #[arg(long)]
    pub c: Option<i64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct DeviateArgs {
    #[arg(long)]
    pub r: u32,
    #[arg(long)]
    pub n: u64,
    /// Histogram bins over [-1, 1].
    #[arg(long, default_value_t = 16)]
    pub bins: usize,
    /// Histogram file; not written when absent.
    #[arg(long)]
    pub hist_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Single block kind, e.g. `adder` or `lut_two_sided`.
    #[arg(long, conflicts_with_all = ["bom", "methods"], requires = "r")]
    pub block: Option<String>,
    /// Bill of materials JSON file.
    #[arg(long, conflicts_with = "methods")]
    pub bom: Option<PathBuf>,
    /// Compare the counter, multiplier and LUT implementations.
    #[arg(long, requires = "r")]
    pub methods: bool,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long, default_value_t = 8)]
    pub n: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1024)]
    pub oversample: usize,
    /// Sample points on [-1.5, 1.5].
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Fit noise-free tanh data instead of a dither run.
    #[arg(long)]
    pub selftest: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct LstmArgs {
    /// Weight fixture JSON.
    #[arg(long, required_unless_present = "random_seed")]
    pub fixture: Option<PathBuf>,
    /// Generate a random fixture from this seed instead of reading one.
    #[arg(long, conflicts_with = "fixture")]
    pub random_seed: Option<u64>,
    #[arg(long, default_value_t = 8)]
    pub width: u32,
    #[arg(long, default_value_t = 2)]
    pub input_size: usize,
    #[arg(long, default_value_t = 4)]
    pub hidden_size: usize,
    #[arg(long, default_value_t = 1.0)]
    pub weight_range: f64,
    /// Also write the generated fixture here.
    #[arg(long, requires = "random_seed")]
    pub emit_fixture: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    /// Run the float SQNL-family cell alongside and report the divergence.
    #[arg(long)]
    pub compare_float: bool,
    #[command(flatten)]
    pub output: Output,
}

/// Rendered artifact plus its summary line.
struct Artifact {
    body: String,
    summary: String,
}

fn render<T: Serialize>(
    format: Format,
    header: &str,
    rows: &[T],
    csv_row: impl Fn(&T) -> String,
) -> String {
    match format {
        Format::Csv => {
            let mut s = String::new();
            s.push_str(header);
            s.push('\n');
            for r in rows {
                s.push_str(&csv_row(r));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("records serialize");
            s.push('\n');
            s
        }
    }
}

fn mode_of(args: &MapArgs) -> GeneratorMode {
    match args.mode {
        ModeArg::Symmetric => GeneratorMode::Symmetric,
        ModeArg::Logsqnl => GeneratorMode::LogSqnl,
        ModeArg::Asymmetric => GeneratorMode::Asymmetric { alpha: args.alpha },
        ModeArg::Gated => GeneratorMode::Gated,
    }
}

#[derive(Serialize)]
struct MapRow {
    n: i64,
    f: i64,
}

fn cmd_map(args: &MapArgs) -> Result<Artifact> {
    let cfg = GeneratorConfig::new(args.r, args.n, mode_of(args))?;
    let table = map_all(&cfg, args.c)?;
    let rows: Vec<MapRow> = table.iter().map(|(n, f)| MapRow { n, f }).collect();
    Ok(Artifact {
        body: render(args.output.format, "n,f", &rows, |r| {
            format!("{},{}", r.n, r.f)
        }),
        summary: format!(
            "map mode={} R={} N={} rows={} min={} max={}",
            cfg.mode().name(),
            args.r,
            args.n,
            rows.len(),
            table.min(),
            table.max()
        ),
    })
}

#[derive(Serialize)]
struct DeviationRow {
    n: i64,
    average: String,
    ideal: String,
    deviation: String,
    lsb_deviation: i64,
    output_error: i64,
}

#[derive(Serialize)]
struct HistogramRow {
    lo: String,
    hi: String,
    count: u64,
}

fn cmd_deviate(args: &DeviateArgs, out_dir: Option<&Path>) -> Result<Artifact> {
    let cfg = GeneratorConfig::new(args.r, args.n, GeneratorMode::Symmetric)?;
    let profile = deviation_profile(&cfg)?;
    let rows: Vec<DeviationRow> = profile
        .entries
        .iter()
        .map(|e| DeviationRow {
            n: e.n,
            average: to_decimal_string(&e.average),
            ideal: to_decimal_string(&e.ideal),
            deviation: to_decimal_string(&e.deviation),
            lsb_deviation: e.lsb_deviation,
            output_error: e.output_error,
        })
        .collect();
    if let Some(path) = &args.hist_out {
        let hist = deviation_histogram(&profile, args.bins, Rational::from(-1), Rational::from(1))?;
        let hrows: Vec<HistogramRow> = hist
            .counts
            .iter()
            .enumerate()
            .map(|(i, &count)| HistogramRow {
                lo: to_decimal_string(&hist.edges[i]),
                hi: to_decimal_string(&hist.edges[i + 1]),
                count,
            })
            .collect();
        let body = render(args.output.format, "lo,hi,count", &hrows, |r| {
            format!("{},{},{}", r.lo, r.hi, r.count)
        });
        write_atomic(&resolve(path, out_dir), &body)?;
    }
    Ok(Artifact {
        body: render(
            args.output.format,
            "n,average,ideal,deviation,lsb_deviation,output_error",
            &rows,
            |r| {
                format!(
                    "{},{},{},{},{},{}",
                    r.n, r.average, r.ideal, r.deviation, r.lsb_deviation, r.output_error
                )
            },
        ),
        summary: format!(
            "deviate R={} N={} max_abs_deviation={} zero_fraction={} max_output_error={}",
            args.r,
            args.n,
            to_decimal_string(&profile.max_abs_deviation()),
            profile.zero_bit_fraction(),
            profile.max_abs_output_error()
        ),
    })
}

#[derive(Serialize)]
struct EstimateRow {
    label: String,
    gates: u64,
}

fn cmd_estimate(args: &EstimateArgs, out_dir: Option<&Path>) -> Result<Artifact> {
    let rows = if let Some(kind) = &args.block {
        let width = args.r.expect("clap enforces --r with --block");
        let block = Block::from_kind(kind, width)?;
        vec![EstimateRow {
            label: format!("{}{}", block.kind(), block.width()),
            gates: gate_cost(block)?,
        }]
    } else if let Some(path) = &args.bom {
        let text = std::fs::read_to_string(resolve_input(path, out_dir))?;
        let bom = BillOfMaterials::from_json(&text)?;
        vec![EstimateRow {
            gates: estimate(&bom)?,
            label: bom.label,
        }]
    } else if args.methods {
        let width = args.r.expect("clap enforces --r with --methods");
        method_boms(width, args.n)?
            .into_iter()
            .map(|bom| {
                Ok(EstimateRow {
                    gates: estimate(&bom)?,
                    label: bom.label,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        return Err(Error::InvalidConfig(
            "one of --block, --bom or --methods is required".into(),
        ));
    };
    let mut summary = String::from("estimate");
    for r in &rows {
        let _ = write!(summary, " {}={}", r.label, r.gates);
    }
    Ok(Artifact {
        body: render(args.output.format, "label,gates", &rows, |r| {
            format!("{},{}", r.label, r.gates)
        }),
        summary,
    })
}

#[derive(Serialize)]
struct FitRow {
    a: f64,
    b: f64,
    rmse: f64,
    iterations: usize,
    converged: bool,
}

fn cmd_fit(args: &FitArgs) -> Result<Artifact> {
    let cfg = DitherConfig {
        oversample: args.oversample,
        seed: args.seed,
        ..Default::default()
    };
    cfg.validate()?;
    let xs = linspace(-1.5, 1.5, args.points);
    let ys = if args.selftest {
        xs.iter().map(|&x| tansig_model(x, -2.0, 0.0)).collect()
    } else {
        simulate(&xs, &cfg)?
    };
    let FitResult {
        a,
        b,
        rmse,
        iterations,
        converged,
    } = fit_eq3(&xs, &ys)?;
    let rows = [FitRow {
        a,
        b,
        rmse,
        iterations,
        converged,
    }];
    Ok(Artifact {
        body: render(
            args.output.format,
            "a,b,rmse,iterations,converged",
            &rows,
            |r| {
                format!(
                    "{},{},{},{},{}",
                    r.a, r.b, r.rmse, r.iterations, r.converged
                )
            },
        ),
        summary: format!(
            "fit seed={} oversample={} a={a:.6} b={b:.6} rmse={rmse:.6} converged={converged}",
            args.seed, args.oversample
        ),
    })
}

#[derive(Serialize)]
struct LstmRow {
    step: usize,
    unit: usize,
    hidden: i64,
    cell: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    float_hidden: Option<f64>,
}

fn cmd_lstm(args: &LstmArgs, out_dir: Option<&Path>) -> Result<Artifact> {
    let fixture = match (&args.fixture, args.random_seed) {
        (Some(path), _) => {
            LstmFixture::from_json(&std::fs::read_to_string(resolve_input(path, out_dir))?)?
        }
        (None, Some(seed)) => LstmFixture::random(
            args.width,
            args.input_size,
            args.hidden_size,
            args.steps.max(1),
            args.weight_range,
            seed,
        )?,
        (None, None) => unreachable!("clap requires a fixture source"),
    };
    if let Some(path) = &args.emit_fixture {
        write_atomic(&resolve(path, out_dir), &(fixture.to_json() + "\n"))?;
    }
    let mut fixed = LstmCellFixed::from_fixture(&fixture)?;
    let mut float = args
        .compare_float
        .then(|| LstmCellFloat::from_fixture(&fixture, FloatActivations::Sqnl))
        .transpose()?;
    let mut rows = Vec::new();
    let (mut trace_fixed, mut trace_float) = (Vec::new(), Vec::new());
    for t in 0..args.steps {
        let x = fixture.input_at(t)?;
        let (h, c) = fixed.step(&x)?;
        let fh = match float.as_mut() {
            Some(cell) => {
                let xf: Vec<f64> = x.iter().map(|&w| dequantize(w)).collect();
                Some(cell.step(&xf)?.0)
            }
            None => None,
        };
        for k in 0..h.len() {
            rows.push(LstmRow {
                step: t,
                unit: k,
                hidden: h[k].value(),
                cell: c[k].value(),
                float_hidden: fh.as_ref().map(|v| v[k]),
            });
        }
        trace_fixed.push(h.iter().map(|&w| dequantize(w)).collect::<Vec<f64>>());
        if let Some(v) = fh {
            trace_float.push(v);
        }
    }
    let mut summary = format!(
        "lstm R={} hidden={} steps={}",
        fixture.width, fixture.hidden_size, args.steps
    );
    let header = if args.compare_float {
        let d = divergence(&trace_fixed, &trace_float, fixture.width)?;
        let _ = write!(summary, " divergence_lsb={d:.4}");
        "step,unit,hidden,cell,float_hidden"
    } else {
        "step,unit,hidden,cell"
    };
    Ok(Artifact {
        body: render(args.output.format, header, &rows, |r| {
            match r.float_hidden {
                Some(f) => format!("{},{},{},{},{}", r.step, r.unit, r.hidden, r.cell, f),
                None => format!("{},{},{},{}", r.step, r.unit, r.hidden, r.cell),
            }
        }),
        summary,
    })
}

fn resolve(path: &Path, out_dir: Option<&Path>) -> PathBuf {
    match out_dir {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Input files are looked up as given, then under the output directory.
fn resolve_input(path: &Path, out_dir: Option<&Path>) -> PathBuf {
    if path.exists() {
        path.to_path_buf()
    } else {
        resolve(path, out_dir)
    }
}

/// Writes `body` to a temporary file next to `path` and renames it over.
pub fn write_atomic(path: &Path, body: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(body.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

fn execute(cli: &Cli, out_dir: Option<&Path>, stdout: &mut dyn Write) -> Result<String> {
    let (artifact, output) = match &cli.command {
        Command::Map(a) => (cmd_map(a)?, &a.output),
        Command::Deviate(a) => (cmd_deviate(a, out_dir)?, &a.output),
        Command::Estimate(a) => (cmd_estimate(a, out_dir)?, &a.output),
        Command::Fit(a) => (cmd_fit(a)?, &a.output),
        Command::Lstm(a) => (cmd_lstm(a, out_dir)?, &a.output),
    };
    match &output.out {
        Some(path) => write_atomic(&resolve(path, out_dir), &artifact.body)?,
        None => stdout.write_all(artifact.body.as_bytes())?,
    }
    Ok(artifact.summary)
}

/// Parses `args` (including the program name) and runs the command, returning
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let out_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        execute(&cli, out_dir.as_deref(), stdout)
    }));
    match result {
        Ok(Ok(summary)) => {
            let _ = writeln!(stderr, "{summary}");
            EXIT_OK
        }
        Ok(Err(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DOMAIN
        }
        Err(_) => {
            let _ = writeln!(stderr, "internal error");
            EXIT_INTERNAL
        }
    }
}
