//! `cascade-qed`: command-line explorer for emitter + cascaded-cavity
//! single-photon sources.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use cascade_qed::ensemble::EnsembleAverage;
use cascade_qed::explorer::config::{config_to_args, parse_config};
use cascade_qed::explorer::format::{fmt_num, fmt_opt, write_header, write_row};
use cascade_qed::explorer::optimize::{optimize, Constraints, Objective, OptimizeOptions};
use cascade_qed::explorer::report::{evaluate, Configuration, EmissionReport, Evaluator};
use cascade_qed::explorer::sweep::{run_sweep, Axis, Output, ParamName, SweepRequest, SweepResult};
use cascade_qed::explorer::tables::{compare_traces, diffusion_table, write_diffusion_csv};
use cascade_qed::explorer::units::{kappa_to_q, normalize_rate, q_to_kappa, QFactorSpec};
use cascade_qed::explorer::{exit_code, EXIT_INFEASIBLE, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use cascade_qed::master::TimeWindow;
use cascade_qed::{Error, SystemParams};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const THREADS_VAR: &str = "CASCADE_QED_THREADS";
/// Flags that take no value; a config file sets them with `true`/`false`.
const SWITCHES: &[&str] = &["single"];

#[derive(Parser, Debug)]
#[command(name = "cascade-qed", version, about = "Single-photon emission from an emitter coupled to cascaded cavities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one parameter point and print a JSON report.
    #[command(args_override_self = true)]
    Simulate {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Evaluate a 1D or 2D grid of parameter points as CSV.
    #[command(args_override_self = true)]
    Sweep {
        #[command(flatten)]
        point: PointArgs,
        /// First axis, `name:min:max:n[:linear|log]`.
        #[arg(long)]
        axis1: String,
        /// Optional second axis; it varies fastest.
        #[arg(long)]
        axis2: Option<String>,
        #[arg(long, value_enum, default_value_t = EvaluatorArg::Both)]
        evaluator: EvaluatorArg,
        /// Comma-separated subset of eta, ind, eta_ind.
        #[arg(long, value_delimiter = ',', default_value = "eta,ind")]
        outputs: Vec<String>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Master-equation and rate-equation population traces side by side.
    #[command(args_override_self = true)]
    Compare {
        #[command(flatten)]
        point: PointArgs,
        /// End of the time window; chosen automatically when omitted.
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 2048)]
        samples: usize,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Efficiency and indistinguishability under spectral diffusion.
    #[command(args_override_self = true)]
    Diffusion {
        #[command(flatten)]
        point: PointArgs,
        /// Comma-separated FWHM values of the detuning distribution.
        #[arg(long, value_delimiter = ',', required = true)]
        fwhm: Vec<f64>,
        /// Gauss-Hermite nodes.
        #[arg(long, default_value_t = 15)]
        nodes: usize,
        #[arg(long, value_enum, default_value_t = AverageArg::CrossTerms)]
        average: AverageArg,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Maximise a figure of merit over (kappa1, g2, kappa2) under Q limits.
    #[command(args_override_self = true)]
    Optimize {
        #[command(flatten)]
        opt: OptimizeArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Convert between quality factors, laboratory rates and normalised rates.
    #[command(args_override_self = true)]
    Convert {
        #[command(flatten)]
        conv: ConvertArgs,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct PointArgs {
    #[arg(long)]
    g1: Option<f64>,
    #[arg(long)]
    kappa1: Option<f64>,
    #[arg(long)]
    g2: Option<f64>,
    #[arg(long)]
    kappa2: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1e4)]
    gamma_star: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta: f64,
    /// Single emitter-cavity system, configured with --g and --kappa.
    #[arg(long)]
    single: bool,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct IoArgs {
    /// Output file, `-` for standard output.
    #[arg(long, default_value = "-")]
    out: String,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// `key = value` file of default flags; explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = ObjectiveArg::EtaInd)]
    objective: ObjectiveArg,
    #[arg(long, default_value_t = 5e5)]
    q1_max: f64,
    #[arg(long, default_value_t = 5e5)]
    q2_max: f64,
    /// Fixed emitter coupling (ignored when --g1-max is given).
    #[arg(long, default_value_t = 500.0)]
    g1: f64,
    #[arg(long)]
    g1_max: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    g1_min: f64,
    #[arg(long, default_value_t = 1.0)]
    g2_min: f64,
    #[arg(long, default_value_t = 2000.0)]
    g2_max: f64,
    #[arg(long, default_value_t = 1e4)]
    kappa_max: f64,
    #[arg(long, default_value_t = 400e12)]
    omega: f64,
    #[arg(long, default_value_t = 160e6)]
    gamma_lab: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1e4)]
    gamma_star: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta: f64,
    /// Coarse grid points per variable.
    #[arg(long, default_value_t = 7)]
    grid: usize,
}

#[derive(Args, Debug, Clone)]
struct ConvertArgs {
    /// Quality factor to convert to a normalised decay rate.
    #[arg(long, conflicts_with_all = ["kappa", "rate"])]
    q: Option<f64>,
    /// Normalised decay rate to convert to a quality factor.
    #[arg(long, conflicts_with = "rate")]
    kappa: Option<f64>,
    /// Laboratory rate to express in units of --gamma-lab.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 400e12)]
    omega: f64,
    #[arg(long, default_value_t = 160e6)]
    gamma_lab: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EvaluatorArg {
    Master,
    Rate,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AverageArg {
    CrossTerms,
    PerDetuning,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ObjectiveArg {
    EtaInd,
    Ind,
    Eta,
}

/// A failed command: a library error or an output problem.
enum Failure {
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Core(Error::InvalidRequest(msg.into()))
}

fn main() {
    std::process::exit(run(std::env::args_os().collect()));
}

fn run(args: Vec<OsString>) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            EXIT_NUMERICAL
        }
    }
}

/// Splices the flags of a `--config` file in right after the subcommand
/// name, so that flags given on the command line win.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let strings: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strings.iter().enumerate() {
        if a == "--config" {
            path = Some(strings.get(i + 1).cloned().ok_or("--config needs a path")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let pairs = parse_config(&text).map_err(|e| e.to_string())?;
    let extra = config_to_args(&pairs, SWITCHES).map_err(|e| e.to_string())?;
    let Some(sub) = strings.iter().skip(1).position(|a| !a.starts_with('-')).map(|p| p + 1) else {
        return Ok(args);
    };
    let mut out = args[..=sub].to_vec();
    out.extend(extra.into_iter().map(OsString::from));
    out.extend_from_slice(&args[sub + 1..]);
    Ok(out)
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = value.trim().parse().map_err(|_| format!("{THREADS_VAR} must be a non-negative integer"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

impl PointArgs {
    fn set_if_missing(&mut self, name: ParamName, value: f64) {
        let slot = match name {
            ParamName::G1 => &mut self.g1,
            ParamName::Kappa1 => &mut self.kappa1,
            ParamName::G2 => &mut self.g2,
            ParamName::Kappa2 => &mut self.kappa2,
            ParamName::G => &mut self.g,
            ParamName::Kappa => &mut self.kappa,
            ParamName::Gamma | ParamName::GammaStar | ParamName::Delta => return,
        };
        slot.get_or_insert(value);
    }

    fn configuration(&self) -> Result<Configuration, Failure> {
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| usage(format!("missing --{flag}")));
        let config = if self.single {
            let g = need(self.g.or(self.g1), "g")?;
            let kappa = need(self.kappa.or(self.kappa1), "kappa")?;
            Configuration::single(SystemParams::single_cavity(g, kappa))
        } else {
            if self.g.is_some() || self.kappa.is_some() {
                return Err(usage("--g and --kappa need --single"));
            }
            let p = SystemParams::cascaded(
                need(self.g1, "g1")?,
                need(self.kappa1, "kappa1")?,
                need(self.g2, "g2")?,
                need(self.kappa2, "kappa2")?,
            );
            Configuration::cascaded(p)
        };
        let params = config.params.with_gamma(self.gamma).with_gamma_star(self.gamma_star).with_delta(self.delta);
        params.validate()?;
        Ok(Configuration { params, ..config })
    }
}

fn open_out(path: &str) -> Result<Box<dyn Write>, Failure> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}

/// Rounds every number to 9 significant digits so JSON output is as
/// stable as the CSV output.
fn rounded(value: Value) -> Value {
    match value {
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => {
                let r: f64 = fmt_num(x).parse().unwrap_or(x);
                serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
            }
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

fn write_json(out: &mut dyn Write, value: Value) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, &rounded(value)).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialise")
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Simulate { point, io } => simulate(&point, &io),
        Command::Sweep { point, axis1, axis2, evaluator, outputs, io } => {
            sweep(point, &axis1, axis2.as_deref(), evaluator, &outputs, &io)
        }
        Command::Compare { point, t_max, samples, io } => compare(&point, t_max, samples, &io),
        Command::Diffusion { point, fwhm, nodes, average, io } => diffusion(&point, &fwhm, nodes, average, &io),
        Command::Optimize { opt, io } => optimize_cmd(&opt, &io),
        Command::Convert { conv, io } => convert(&conv, &io),
    }
}

const SIMULATE_COLUMNS: [&str; 10] =
    ["eta_master", "i_master", "eta_closed", "i_closed", "r1", "r2", "pb_decay_rate", "regime", "method", "fallback"];

fn simulate(point: &PointArgs, io: &IoArgs) -> Result<i32, Failure> {
    let config = point.configuration()?;
    let report = evaluate(&config, Evaluator::Both, true)?;
    let mut out = open_out(&io.out)?;
    match io.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&mut *out, report_json(&report))?,
        Format::Csv => {
            write_header(&mut out, &SIMULATE_COLUMNS)?;
            let closed = report.closed;
            let cells = vec![
                fmt_opt(report.eta_master()),
                fmt_opt(report.i_master()),
                fmt_opt(report.eta_closed()),
                fmt_opt(report.i_closed()),
                fmt_opt(closed.map(|c| c.r1)),
                fmt_opt(closed.map(|c| c.r2)),
                fmt_opt(closed.map(|c| c.pb_decay_rate)),
                report.regime.label().to_string(),
                to_value(&report.diagnostics.method).as_str().unwrap_or_default().to_string(),
                report.diagnostics.fallback.clone().unwrap_or_default(),
            ];
            write_row(&mut out, &cells)?;
            out.flush()?;
        }
    }
    Ok(EXIT_OK)
}

fn report_json(report: &EmissionReport) -> Value {
    let mut v = to_value(report);
    v["regime"]["label"] = json!(report.regime.label());
    v
}

fn sweep(
    mut point: PointArgs,
    axis1: &str,
    axis2: Option<&str>,
    evaluator: EvaluatorArg,
    outputs: &[String],
    io: &IoArgs,
) -> Result<i32, Failure> {
    let axis1: Axis = axis1.parse()?;
    let axis2: Option<Axis> = axis2.map(str::parse).transpose()?;
    for axis in std::iter::once(&axis1).chain(axis2.as_ref()) {
        point.set_if_missing(axis.name, axis.min);
    }
    let outputs = outputs.iter().map(|s| s.parse::<Output>()).collect::<Result<Vec<_>, _>>()?;
    let evaluator = match evaluator {
        EvaluatorArg::Master => Evaluator::Master,
        EvaluatorArg::Rate => Evaluator::Rate,
        EvaluatorArg::Both => Evaluator::Both,
    };
    let request = SweepRequest { base: point.configuration()?, axis1, axis2, evaluator, outputs };
    let result = run_sweep(&request)?;
    let mut out = open_out(&io.out)?;
    match io.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            result.write_csv(&mut out)?;
            out.flush()?;
        }
        Format::Json => write_json(&mut *out, sweep_json(&result))?,
    }
    if result.healthy() {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: {} of {} points failed", result.n_failed(), result.rows.len());
        Ok(EXIT_INFEASIBLE)
    }
}

fn sweep_json(result: &SweepResult) -> Value {
    Value::Array(
        result
            .rows
            .iter()
            .map(|r| match &r.result {
                Ok(rep) => json!({"axis1": r.axis1, "axis2": r.axis2, "report": report_json(rep)}),
                Err(msg) => json!({"axis1": r.axis1, "axis2": r.axis2, "error": msg}),
            })
            .collect(),
    )
}

fn compare(point: &PointArgs, t_max: Option<f64>, samples: usize, io: &IoArgs) -> Result<i32, Failure> {
    let config = point.configuration()?;
    let window = t_max.map(|t| TimeWindow::new(t, samples));
    let table = compare_traces(&config, window)?;
    let mut out = open_out(&io.out)?;
    match io.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            table.write_csv(&mut out)?;
            out.flush()?;
        }
        Format::Json => write_json(
            &mut *out,
            json!({
                "t": table.times,
                "master": {"p_e": table.master[0], "p_a": table.master[1], "p_b": table.master[2]},
                "rate": {"p_e": table.rate[0], "p_a": table.rate[1], "p_b": table.rate[2]},
            }),
        )?,
    }
    Ok(EXIT_OK)
}

fn diffusion(point: &PointArgs, fwhm: &[f64], nodes: usize, average: AverageArg, io: &IoArgs) -> Result<i32, Failure> {
    let config = point.configuration()?;
    let average = match average {
        AverageArg::CrossTerms => EnsembleAverage::CrossTerms,
        AverageArg::PerDetuning => EnsembleAverage::PerDetuningAverage,
    };
    let rows = diffusion_table(&config, fwhm, nodes, average)?;
    let mut out = open_out(&io.out)?;
    match io.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            write_diffusion_csv(&rows, &mut out)?;
            out.flush()?;
        }
        Format::Json => write_json(
            &mut *out,
            Value::Array(
                rows.iter()
                    .map(|r| {
                        json!({"fwhm": r.fwhm, "eta_ensemble": r.eta_ensemble, "i_ensemble": r.i_ensemble,
                               "eta_delta0": r.eta_delta0, "i_delta0": r.i_delta0})
                    })
                    .collect(),
            ),
        )?,
    }
    Ok(EXIT_OK)
}

fn optimize_cmd(opt: &OptimizeArgs, io: &IoArgs) -> Result<i32, Failure> {
    let constraints = Constraints {
        q1_max: opt.q1_max,
        q2_max: opt.q2_max,
        g1: opt.g1,
        g1_max: opt.g1_max,
        g1_min: opt.g1_min,
        g2_min: opt.g2_min,
        g2_max: opt.g2_max,
        kappa_max: opt.kappa_max,
        omega: opt.omega,
        gamma_lab: opt.gamma_lab,
    };
    let base = SystemParams::cascaded(opt.g1, 1.0, 1.0, 1.0)
        .with_gamma(opt.gamma)
        .with_gamma_star(opt.gamma_star)
        .with_delta(opt.delta);
    let objective = match opt.objective {
        ObjectiveArg::EtaInd => Objective::EtaInd,
        ObjectiveArg::Ind => Objective::Ind,
        ObjectiveArg::Eta => Objective::Eta,
    };
    let bx = constraints.to_box(base)?;
    let result = optimize(&bx, &OptimizeOptions { objective, grid_points: opt.grid })?;
    let mut out = open_out(&io.out)?;
    match io.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&mut *out, to_value(&result))?,
        Format::Csv => {
            write_header(&mut out, &["g1", "kappa1", "g2", "kappa2", "eta", "ind", "eta_ind", "evaluations"])?;
            let p = result.params;
            let mut cells: Vec<String> =
                [p.g1, p.kappa1, p.g2, p.kappa2, result.eta, result.ind, result.eta_ind].map(fmt_num).to_vec();
            cells.push(result.evaluations.to_string());
            write_row(&mut out, &cells)?;
            out.flush()?;
        }
    }
    Ok(EXIT_OK)
}

fn convert(conv: &ConvertArgs, io: &IoArgs) -> Result<i32, Failure> {
    let (columns, values): (Vec<&str>, Vec<f64>) = if let Some(q) = conv.q {
        let kappa = q_to_kappa(&QFactorSpec { q, omega: conv.omega, gamma_lab: conv.gamma_lab })?;
        (vec!["q", "kappa", "omega", "gamma_lab"], vec![q, kappa, conv.omega, conv.gamma_lab])
    } else if let Some(kappa) = conv.kappa {
        let q = kappa_to_q(kappa, conv.omega, conv.gamma_lab)?;
        (vec!["q", "kappa", "omega", "gamma_lab"], vec![q, kappa, conv.omega, conv.gamma_lab])
    } else if let Some(rate) = conv.rate {
        (vec!["rate_lab", "rate", "gamma_lab"], vec![rate, normalize_rate(rate, conv.gamma_lab)?, conv.gamma_lab])
    } else {
        return Err(usage("convert needs one of --q, --kappa or --rate"));
    };
    let mut out = open_out(&io.out)?;
    match io.format.unwrap_or(Format::Json) {
        Format::Json => {
            let obj: serde_json::Map<String, Value> =
                columns.iter().zip(&values).map(|(k, v)| (k.to_string(), json!(v))).collect();
            write_json(&mut *out, Value::Object(obj))?;
        }
        Format::Csv => {
            write_header(&mut out, &columns)?;
            write_row(&mut out, &values.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>())?;
            out.flush()?;
        }
    }
    Ok(EXIT_OK)
}
