mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gauss_spectra::acceptance::{self, AcceptanceConfig};
use gauss_spectra::par;
use gauss_spectra::special::{constants, DIM_E2_REFERENCE};
use gauss_spectra::spectrum::{
    bounded_digit_dimension, khintchine_curve, lyapunov_curve, spectrum_shape_report, SolverConfig,
    SpectrumCurve,
};
use gauss_spectra::transfer::{
    Alphabet, Discretization, PressureParams, TransferOperator, DEFAULT_CUTOFF, DEFAULT_ORDER,
};
use serde_json::json;

use table::{Cell, Table};

const JOBS_ENV: &str = "GAUSS_SPECTRA_JOBS";
const MIN_SUCCESS_RATIO: f64 = 0.9;

#[derive(Parser, Debug)]
#[command(
    name = "gauss-spectra",
    version,
    about = "Pressure, Khintchine and Lyapunov spectra of the Gauss map"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Args, Debug, Clone)]
struct Options {
    /// Digits summed explicitly before the zeta tail (M).
    #[arg(long, global = true, default_value_t = DEFAULT_CUTOFF)]
    cutoff: usize,
    /// Number of Chebyshev collocation nodes (K).
    #[arg(long = "collocation-order", global = true, default_value_t = DEFAULT_ORDER)]
    collocation_order: usize,
    /// Residual target of the spectrum solvers.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; falls back to GAUSS_SPECTRA_JOBS, then to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate P(t, q) and its derivatives; --t and --q take comma lists.
    Pressure {
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        t: Vec<f64>,
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        q: Vec<f64>,
    },
    /// Solve a spectrum on a grid of exponents (in nats).
    Spectrum {
        #[arg(value_enum)]
        kind: Kind,
        #[command(flatten)]
        grid: GridArgs,
        /// Also write a gnuplot script next to the --output file.
        #[arg(long)]
        gnuplot: bool,
    },
    /// Print the constants xi_0, lambda_0, gamma_0 and dim E_2.
    Constants,
    /// Run the acceptance suite.
    Verify {
        /// List the criteria without running them.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long)]
    min: Option<f64>,
    #[arg(long)]
    max: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, value_enum)]
    spacing: Option<Spacing>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Khintchine,
    Lyapunov,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Spacing {
    Linear,
    Log,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Khintchine => "khintchine",
            Kind::Lyapunov => "lyapunov",
        }
    }

    fn default_grid(self) -> (f64, f64, usize, Spacing) {
        match self {
            Kind::Khintchine => (0.3, 40.0, 60, Spacing::Log),
            Kind::Lyapunov => (1.0, 30.0, 50, Spacing::Linear),
        }
    }
}

impl Spacing {
    fn name(self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        }
    }
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Exit {
    code: u8,
    message: String,
}

impl Exit {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<anyhow::Error> for Exit {
    fn from(e: anyhow::Error) -> Self {
        Exit::usage(format!("{e:#}"))
    }
}

impl From<io::Error> for Exit {
    fn from(e: io::Error) -> Self {
        Exit::usage(format!("i/o error: {e}"))
    }
}

/// Validated run settings.
#[derive(Debug, Clone)]
struct RunConfig {
    cutoff: usize,
    order: usize,
    tolerance: f64,
    format: Format,
    output: Option<PathBuf>,
    seed: u64,
}

impl RunConfig {
    fn from_options(o: &Options) -> Result<Self, Exit> {
        if o.cutoff < Alphabet::MIN_CUTOFF {
            return Err(Exit::usage(format!("--cutoff must be at least {}, got {}", Alphabet::MIN_CUTOFF, o.cutoff)));
        }
        if o.collocation_order < Discretization::MIN_ORDER {
            return Err(Exit::usage(format!(
                "--collocation-order must be at least {}, got {}",
                Discretization::MIN_ORDER,
                o.collocation_order
            )));
        }
        if !(o.tolerance > 0.0 && o.tolerance <= 1e-4) {
            return Err(Exit::usage(format!("--tolerance must lie in (0, 1e-4], got {}", o.tolerance)));
        }
        Ok(Self {
            cutoff: o.cutoff,
            order: o.collocation_order,
            tolerance: o.tolerance,
            format: o.format.unwrap_or(Format::Csv),
            output: o.output.clone(),
            seed: o.seed,
        })
    }

    fn operator(&self) -> Result<TransferOperator, Exit> {
        TransferOperator::full(self.cutoff, self.order).map_err(|e| Exit::usage(e.to_string()))
    }

    fn base_metadata(&self, table: &mut Table, command: &str) {
        table.meta("command", command);
        table.meta("cutoff", self.cutoff);
        table.meta("collocation_order", self.order);
        table.meta("tolerance", self.tolerance);
        table.meta("seed", self.seed);
    }

    fn emit(&self, table: &Table) -> Result<(), Exit> {
        let write = |out: &mut dyn Write| -> anyhow::Result<()> {
            match self.format {
                Format::Csv => table.write_csv(out),
                Format::Json => table.write_json(out),
            }
        };
        match &self.output {
            Some(path) => {
                let mut f = BufWriter::new(create(path)?);
                write(&mut f)?;
                f.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                write(&mut lock)?;
            }
        }
        Ok(())
    }
}

fn create(path: &Path) -> Result<File, Exit> {
    File::create(path).map_err(|e| Exit::usage(format!("cannot write {}: {e}", path.display())))
}

fn resolve_jobs(flag: Option<usize>) -> Result<Option<usize>, Exit> {
    let jobs = match flag {
        Some(j) => Some(j),
        None => match std::env::var(JOBS_ENV) {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Exit::usage(format!("{JOBS_ENV} must be a positive integer, got {v:?}")))?,
            ),
            _ => None,
        },
    };
    if jobs == Some(0) {
        return Err(Exit::usage("--jobs must be at least 1"));
    }
    Ok(jobs)
}

fn build_grid(kind: Kind, g: &GridArgs) -> Result<(Vec<f64>, f64, f64, usize, Spacing), Exit> {
    let (dmin, dmax, dcount, dspacing) = kind.default_grid();
    let (min, max) = (g.min.unwrap_or(dmin), g.max.unwrap_or(dmax));
    let count = g.count.unwrap_or(dcount);
    let spacing = g.spacing.unwrap_or(dspacing);
    if count < 2 {
        return Err(Exit::usage(format!("--count must be at least 2, got {count}")));
    }
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(Exit::usage(format!("grid needs finite --min < --max, got [{min}, {max}]")));
    }
    if spacing == Spacing::Log && min <= 0.0 {
        return Err(Exit::usage(format!("log spacing needs --min > 0, got {min}")));
    }
    let n = count - 1;
    let grid = (0..count)
        .map(|i| {
            let s = i as f64 / n as f64;
            if i == 0 {
                min
            } else if i == n {
                max
            } else {
                match spacing {
                    Spacing::Linear => min + (max - min) * s,
                    Spacing::Log => (min.ln() + (max.ln() - min.ln()) * s).exp(),
                }
            }
        })
        .collect();
    Ok((grid, min, max, count, spacing))
}

fn cmd_pressure(cfg: &RunConfig, ts: &[f64], qs: &[f64]) -> Result<u8, Exit> {
    let op = cfg.operator()?;
    let mut params = Vec::with_capacity(ts.len() * qs.len());
    for &t in ts {
        for &q in qs {
            let p = PressureParams::new(t, q);
            op.alphabet().check(p).map_err(|e| Exit::usage(e.to_string()))?;
            params.push(p);
        }
    }
    let results = par::map(&params, |p| op.pressure(*p));
    let mut table = Table {
        columns: vec!["t", "q", "pressure", "dp_dt", "dp_dq", "tail_error"],
        ..Table::default()
    };
    cfg.base_metadata(&mut table, "pressure");
    for (p, r) in params.iter().zip(results) {
        let r = r.map_err(|e| Exit::usage(format!("(t, q) = ({}, {}): {e}", p.t, p.q)))?;
        table.rows.push(vec![
            p.t.into(),
            p.q.into(),
            r.value.into(),
            r.dp_dt.into(),
            r.dp_dq.into(),
            r.tail_error_bound.into(),
        ]);
    }
    cfg.emit(&table)?;
    Ok(0)
}

/// Rows in grid order; failed grid values get NaN entries and infinite
/// residuals. `slope_fd` is a difference quotient over solved neighbours.
fn curve_rows(grid: &[f64], curve: &SpectrumCurve) -> Vec<[f64; 6]> {
    let mut rows: Vec<[f64; 6]> = grid
        .iter()
        .map(|&x| {
            match curve.points.iter().find(|p| p.exponent == x) {
                Some(p) => [p.exponent, p.dimension, p.q_value, p.residuals[0], p.residuals[1], f64::NAN],
                None => [x, f64::NAN, f64::NAN, f64::INFINITY, f64::INFINITY, f64::NAN],
            }
        })
        .collect();
    let solved: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][1].is_finite()).collect();
    for (k, &i) in solved.iter().enumerate() {
        let lo = if k > 0 { solved[k - 1] } else { i };
        let hi = if k + 1 < solved.len() { solved[k + 1] } else { i };
        if lo != hi {
            rows[i][5] = (rows[hi][1] - rows[lo][1]) / (rows[hi][0] - rows[lo][0]);
        }
    }
    rows
}

fn gnuplot_script(data: &Path, kind: Kind) -> String {
    let (x, y) = match kind {
        Kind::Khintchine => ("xi (nats)", "t(xi)"),
        Kind::Lyapunov => ("beta (nats)", "t(beta)"),
    };
    let log = if kind == Kind::Khintchine { "set logscale x\n" } else { "" };
    format!(
        "set datafile separator ','\nset datafile commentschars '#'\nset key off\nset key autotitle columnhead\nset grid\n{log}set xlabel '{x}'\nset ylabel '{y}'\nset title '{} spectrum'\nplot '{}' using 1:2 with linespoints pt 7 ps 0.5\n",
        kind.name(),
        data.display()
    )
}

fn cmd_spectrum(cfg: &RunConfig, kind: Kind, grid_args: &GridArgs, gnuplot: bool) -> Result<u8, Exit> {
    let (grid, min, max, count, spacing) = build_grid(kind, grid_args)?;
    if gnuplot && (cfg.output.is_none() || cfg.format != Format::Csv) {
        return Err(Exit::usage("--gnuplot needs --output and CSV format"));
    }
    let solver = SolverConfig::with_tolerance(cfg.tolerance);
    let op = cfg.operator()?;
    let curve = match kind {
        Kind::Khintchine => khintchine_curve(&grid, &op, &solver),
        Kind::Lyapunov => lyapunov_curve(&grid, &op, &solver),
    }
    .map_err(|e| Exit::usage(e.to_string()))?;

    let mut table = Table {
        columns: vec!["exponent", "dimension", "q_value", "residual_1", "residual_2", "slope_fd"],
        trailer_name: "shape",
        ..Table::default()
    };
    cfg.base_metadata(&mut table, "spectrum");
    table.meta("kind", kind.name());
    table.meta("min", min);
    table.meta("max", max);
    table.meta("count", count);
    table.meta("spacing", spacing.name());
    table.meta("solved", curve.points.len());
    table.meta("failed", curve.failures.len());
    for row in curve_rows(&grid, &curve) {
        table.rows.push(row.iter().map(|&v| Cell::Num(v)).collect());
    }
    match spectrum_shape_report(&curve) {
        Ok(s) => {
            let tr = &mut table.trailer;
            tr.push(("peak_exponent".into(), s.peak_exponent.into()));
            tr.push(("peak_dimension".into(), s.peak_dimension.into()));
            tr.push(("slope_sign_changes".into(), s.slope_sign_changes.into()));
            tr.push(("q_sign_changes".into(), s.q_sign_changes.into()));
            tr.push(("q_sign_change_at_peak".into(), s.q_sign_change_at_peak.to_string().into()));
            tr.push(("curvature_at_peak".into(), s.curvature_at_peak.into()));
            match s.convexity_witness {
                Some((a, b)) => {
                    tr.push(("convex_from".into(), a.into()));
                    tr.push(("convex_to".into(), b.into()));
                }
                None => tr.push(("convex_from".into(), "none".into())),
            }
        }
        Err(e) => table.trailer.push(("unavailable".into(), e.to_string().into())),
    }
    for f in &curve.failures {
        table
            .trailer
            .push((format!("failure_at_{}", table::format_f64(f.exponent)), f.message.clone().into()));
    }
    cfg.emit(&table)?;
    if gnuplot {
        let data = cfg.output.as_ref().expect("checked above");
        let script = data.with_extension("gp");
        std::fs::write(&script, gnuplot_script(data, kind))
            .map_err(|e| Exit::usage(format!("cannot write {}: {e}", script.display())))?;
    }
    for f in &curve.failures {
        eprintln!("warning: no solution at exponent {}: {}", f.exponent, f.message);
    }
    Ok(curve_exit_code(&curve))
}

fn curve_exit_code(curve: &SpectrumCurve) -> u8 {
    if curve.success_ratio() >= MIN_SUCCESS_RATIO {
        0
    } else {
        3
    }
}

fn cmd_constants(cfg: &RunConfig) -> Result<u8, Exit> {
    let c = constants();
    let disc = Discretization::chebyshev(cfg.order).map_err(|e| Exit::usage(e.to_string()))?;
    let dim_e2 = bounded_digit_dimension(&[1, 2], &disc).map_err(|e| Exit::usage(e.to_string()))?;
    let mut table = Table {
        columns: vec!["name", "value", "source", "method"],
        ..Table::default()
    };
    cfg.base_metadata(&mut table, "constants");
    let rows: [(&str, f64, &str, String); 7] = [
        ("khintchine_K0", c.xi0.exp(), "computed", "exp(xi0)".into()),
        (
            "xi0",
            c.xi0,
            "computed",
            "sum of log k times Gauss measure of first-level cylinders, 1e6 terms plus asymptotic tail".into(),
        ),
        ("lambda0", c.lambda0, "closed form", "pi^2/(6 log 2)".into()),
        ("gamma0", c.gamma0, "closed form", "2 log((1+sqrt 5)/2)".into()),
        ("two_xi0", 2.0 * c.xi0, "computed", "lies strictly between gamma0 and lambda0".into()),
        (
            "dim_E2",
            dim_e2,
            "computed",
            format!("zero of the pressure restricted to digits {{1,2}}, {} collocation nodes", cfg.order),
        ),
        ("dim_E2_reference", DIM_E2_REFERENCE, "published", "high-precision literature value".into()),
    ];
    for (name, value, source, method) in rows {
        table.rows.push(vec![name.into(), value.into(), source.into(), method.into()]);
    }
    cfg.emit(&table)?;
    Ok(0)
}

fn cmd_verify(cfg: &RunConfig, list: bool) -> Result<u8, Exit> {
    if list {
        let mut text = String::new();
        let criteria = acceptance::criteria();
        if cfg.format == Format::Json {
            let items: Vec<_> = criteria
                .iter()
                .map(|c| json!({"id": c.id, "name": c.name, "budget_seconds": c.budget.as_secs()}))
                .collect();
            text = serde_json::to_string_pretty(&items).map_err(anyhow::Error::from)? + "\n";
        } else {
            for c in criteria {
                text.push_str(&format!("{:>2} {:<32} budget={}s\n", c.id, c.name, c.budget.as_secs()));
            }
        }
        write_text(cfg, &text)?;
        return Ok(0);
    }
    let acfg = AcceptanceConfig {
        cutoff: cfg.cutoff,
        order: cfg.order,
        tolerance: cfg.tolerance,
        seed: cfg.seed,
    };
    let mut sink: Box<dyn Write> = match &cfg.output {
        Some(path) => Box::new(BufWriter::new(create(path)?)),
        None => Box::new(io::stdout()),
    };
    let mut outcomes = Vec::new();
    for c in acceptance::criteria() {
        let o = acceptance::run_one(c.id, &acfg).expect("listed criterion");
        if cfg.format == Format::Csv {
            writeln!(sink, "{}", o.line())?;
            sink.flush()?;
        }
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    if cfg.format == Format::Json {
        let items: Vec<_> = outcomes
            .iter()
            .map(|o| {
                json!({
                    "id": o.id,
                    "name": o.name,
                    "passed": o.passed,
                    "measured": o.measured,
                    "expected": o.expected,
                    "tolerance": o.tolerance,
                    "detail": o.detail,
                    "elapsed_seconds": o.elapsed.as_secs_f64(),
                    "budget_seconds": o.budget.as_secs(),
                })
            })
            .collect();
        let doc = json!({"passed": passed, "total": outcomes.len(), "criteria": items});
        serde_json::to_writer_pretty(&mut sink, &doc).map_err(anyhow::Error::from)?;
        writeln!(sink)?;
    } else {
        writeln!(sink, "{passed}/{} criteria passed", outcomes.len())?;
    }
    sink.flush()?;
    Ok(if passed == outcomes.len() { 0 } else { 1 })
}

fn write_text(cfg: &RunConfig, text: &str) -> Result<(), Exit> {
    match &cfg.output {
        Some(path) => create(path)?.write_all(text.as_bytes())?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Exit> {
    let cfg = RunConfig::from_options(&cli.opts)?;
    if let Some(jobs) = resolve_jobs(cli.opts.jobs)? {
        par::configure_threads(jobs);
    }
    match &cli.command {
        Command::Pressure { t, q } => cmd_pressure(&cfg, t, q),
        Command::Spectrum { kind, grid, gnuplot } => cmd_spectrum(&cfg, *kind, grid, *gnuplot),
        Command::Constants => cmd_constants(&cfg),
        Command::Verify { list } => cmd_verify(&cfg, *list),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
