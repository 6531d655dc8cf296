//! Tables, CSV/JSON writers and gnuplot scripts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::run::{ConvergenceResult, GgeDumpResult, Outcome, ScanResult, VolumeLawResult};
use super::{Experiment, ExperimentConfig, OutputFormat};
use crate::bdg::default_dt;
use crate::corr::KIntegration;
use crate::entropy::QuenchComparison;
use crate::error::{Error, Result};
use crate::floquet::FloquetMode;

/// A table cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
}

impl Value {
    fn csv(&self) -> String {
        match *self {
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format_float(x),
        }
    }

    fn parse(s: &str) -> Result<Value> {
        let bad = || Error::Config(format!("cannot parse table cell '{s}'"));
        if s.bytes().all(|b| b.is_ascii_digit() || b == b'-') {
            s.parse().map(Value::Int).map_err(|_| bad())
        } else {
            s.parse().map(Value::Float).map_err(|_| bad())
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Int(i) => i as f64,
            Value::Float(x) => x,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<usize> for Value {
    fn from(i: usize) -> Self {
        Value::Int(i as i64)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Int(b as i64)
    }
}

/// Floats in scientific notation with 17 significant digits, which
/// round-trips every finite `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Value>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Everything written for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: Experiment,
    /// Ordered `key = value` lines of the CSV preamble.
    pub metadata: Vec<(String, String)>,
    pub table: Table,
    /// Gnuplot script body; `{csv}` stands for the CSV file name.
    pub plot: String,
}

macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$(Value::from($x)),*] };
}

fn meta(out: &mut Vec<(String, String)>, key: &str, value: impl ToString) {
    out.push((key.to_string(), value.to_string()));
}

fn base_metadata(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    let p = &cfg.drive;
    let mut m = Vec::new();
    meta(&mut m, "tool", concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION")));
    meta(&mut m, "experiment", cfg.experiment);
    meta(&mut m, "h0", p.h0());
    meta(&mut m, "A", p.amplitude());
    meta(&mut m, "omega0", p.omega0());
    meta(&mut m, "tau", p.tau());
    meta(&mut m, "L", cfg.chain.sites);
    meta(&mut m, "boundary", cfg.chain.boundary);
    meta(&mut m, "dt", if cfg.experiment == Experiment::Convergence {
        default_dt(p)
    } else {
        cfg.floquet.dt(p)
    });
    meta(&mut m, "N_s", 1);
    meta(&mut m, "integration", match cfg.integration {
        KIntegration::Spline => "spline",
        KIntegration::DiscreteSum => "discrete_sum",
    });
    meta(&mut m, "abs_tol", cfg.quadrature.abs_tol);
    meta(&mut m, "rel_tol", cfg.quadrature.rel_tol);
    meta(&mut m, "max_subdivisions", cfg.quadrature.max_subdivisions);
    meta(&mut m, "units", "entropy in nats, frequencies in units of J/hbar");
    m
}

impl Outcome {
    pub fn report(&self, cfg: &ExperimentConfig) -> Report {
        let mut metadata = base_metadata(cfg);
        let (table, plot) = match self {
            Outcome::Convergence(r) => convergence_table(r, cfg, &mut metadata),
            Outcome::VolumeLaw(r) => volume_law_table(r, &mut metadata),
            Outcome::FrequencyScan(r) => scan_table(r, &mut metadata),
            Outcome::FloquetDump(r) => floquet_table(r),
            Outcome::GgeDump(r) => gge_table(r, &mut metadata),
            Outcome::QuenchCheck(r) => quench_table(r),
        };
        Report {
            experiment: cfg.experiment,
            metadata,
            table,
            plot,
        }
    }
}

const GNUPLOT_HEADER: &str = "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n";

fn convergence_table(r: &ConvergenceResult, cfg: &ExperimentConfig, m: &mut Vec<(String, String)>) -> (Table, String) {
    meta(m, "n_max", r.n_max);
    meta(m, "revival_horizon", r.horizon);
    meta(m, "real_space_dt", r.dt);
    meta(m, "entry_tolerance", super::ENTRY_TOLERANCE);
    for ((t, s), e) in r.traces.iter().zip(&r.asymptotic).zip(&r.entry) {
        meta(m, &format!("asymptotic[l={}]", t.l), s);
        let entry = e.map_or("none".to_string(), |n| n.to_string());
        meta(m, &format!("entry_period[l={}]", t.l), entry);
    }
    let mut table = Table::new(&["l", "n", "t", "entropy", "asymptotic", "relative_deviation", "revival_flag"]);
    for (t, &s) in r.traces.iter().zip(&r.asymptotic) {
        for (n, (&time, &v)) in t.times.iter().zip(&t.values).enumerate() {
            let dev = if s != 0.0 { (v - s) / s } else { v - s };
            table.push(row![t.l, n, time, v, s, dev, n > r.horizon]);
        }
    }
    let ls: Vec<String> = cfg.subchain_lengths.iter().map(|l| l.to_string()).collect();
    let mut plot = String::from(GNUPLOT_HEADER);
    let _ = writeln!(plot, "set xlabel 'n'\nset ylabel 'S_l(n tau)'");
    let _ = writeln!(plot, "set arrow from {h}, graph 0 to {h}, graph 1 nohead dt 3", h = r.horizon);
    let _ = writeln!(
        plot,
        "plot for [l in \"{}\"] '{{csv}}' using 2:($1 == l ? $4 : 1/0) with lines title sprintf('l = %s', l), \\\n     for [l in \"{}\"] '{{csv}}' using 2:($1 == l ? $5 : 1/0) with lines dt 2 notitle",
        ls.join(" "),
        ls.join(" ")
    );
    (table, plot)
}

fn volume_law_table(r: &VolumeLawResult, m: &mut Vec<(String, String)>) -> (Table, String) {
    meta(m, "s_inf", r.density.value);
    meta(m, "s_inf_error", r.density.error);
    meta(m, "s_inf_converged", r.density.converged);
    let mut table = Table::new(&["l", "entropy", "linear", "rescaled_difference", "quad_error", "quad_converged"]);
    for row in &r.rows {
        table.push(row![
            row.l,
            row.entropy,
            row.linear,
            row.rescaled_difference,
            row.quadrature.max_error,
            row.quadrature.all_converged
        ]);
    }
    let plot = format!(
        "{GNUPLOT_HEADER}set multiplot layout 1,2\nset xlabel 'l'\n\
         plot '{{csv}}' using 1:2 with linespoints title 'S_l', '' using 1:3 with lines dt 2 title 'l s_inf'\n\
         set ylabel 'S_l/l - s_inf'\nplot '{{csv}}' using 1:4 with linespoints notitle\nunset multiplot\n"
    );
    (table, plot)
}

fn scan_table(r: &ScanResult, m: &mut Vec<(String, String)>) -> (Table, String) {
    let list = |v: &[f64]| v.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" ");
    meta(m, "resonances_k0", list(&r.k0_resonances));
    meta(m, "resonances_kpi", list(&r.kpi_resonances));
    let mut table = Table::new(&[
        "omega0",
        "s_inf",
        "s_inf_error",
        "s_inf_converged",
        "s_gge",
        "degenerate_modes",
        "k0_order",
        "kpi_order",
    ]);
    for row in &r.rows {
        table.push(row![
            row.omega0,
            row.density.value,
            row.density.error,
            row.density.converged,
            row.gge_density.value,
            row.degenerate_modes,
            row.k0_order,
            row.kpi_order
        ]);
    }
    let mut plot = String::from(GNUPLOT_HEADER);
    let _ = writeln!(plot, "set xlabel 'omega_0'\nset ylabel 's_inf'");
    let (lo, hi) = r.rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x.omega0), b.max(x.omega0))
    });
    for (w, style) in r
        .k0_resonances
        .iter()
        .map(|w| (w, "lc 'red'"))
        .chain(r.kpi_resonances.iter().map(|w| (w, "lc 'blue'")))
    {
        if *w >= lo && *w <= hi {
            let _ = writeln!(plot, "set arrow from {w}, graph 0 to {w}, graph 1 nohead dt 2 {style}");
        }
    }
    let _ = writeln!(plot, "plot '{{csv}}' using 1:2 with lines title 's_inf'");
    (table, plot)
}

fn floquet_table(modes: &[FloquetMode]) -> (Table, String) {
    let mut table = Table::new(&["k", "mu", "branch", "r_plus_sq", "r_minus_sq", "lambda", "degenerate"]);
    for md in modes {
        table.push(row![
            md.k,
            md.mu,
            md.branch,
            md.occupation_plus(),
            md.occupation_minus(),
            md.lambda(),
            md.degenerate
        ]);
    }
    let plot = format!(
        "{GNUPLOT_HEADER}set xlabel 'k'\nplot '{{csv}}' using 1:2 with lines title 'mu', '' using 1:5 with lines title '|r-|^2'\n"
    );
    (table, plot)
}

fn gge_table(r: &GgeDumpResult, m: &mut Vec<(String, String)>) -> (Table, String) {
    meta(m, "s_gge", r.gge_density.value);
    meta(m, "s_inf", r.density.value);
    let mut table = Table::new(&["k", "lambda", "n_expectation"]);
    for ((&k, &l), &n) in r.gge.k.iter().zip(&r.gge.lambda).zip(&r.gge.n_expectation) {
        table.push(row![k, l, n]);
    }
    let plot = format!("{GNUPLOT_HEADER}set xlabel 'k'\nplot '{{csv}}' using 1:3 with lines title '<n_k>'\n");
    (table, plot)
}

fn quench_table(r: &[QuenchComparison]) -> (Table, String) {
    let mut table = Table::new(&["h_initial", "h_final", "closed_form", "pipeline", "deviation", "converged"]);
    for q in r {
        table.push(row![
            q.h_initial,
            q.h_final,
            q.closed_form.value,
            q.pipeline.value,
            q.deviation(),
            q.closed_form.converged && q.pipeline.converged
        ]);
    }
    let plot = format!(
        "{GNUPLOT_HEADER}set xlabel 'h_final'\nplot '{{csv}}' using 2:3 with points title 'closed form', '' using 2:4 with points title 'pipeline'\n"
    );
    (table, plot)
}

/// CSV text: `# key = value` metadata lines, a header row, then the rows.
pub fn render_csv(report: &Report) -> Result<String> {
    let mut out = String::new();
    for (k, v) in &report.metadata {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Config(format!("csv encoding: {e}"));
    w.write_record(&report.table.columns).map_err(csv_err)?;
    for row in &report.table.rows {
        w.write_record(row.iter().map(Value::csv)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv encoding: {e}")))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is UTF-8"));
    Ok(out)
}

/// Read back a CSV written by [`write_output`].
pub fn read_csv(path: &Path) -> Result<(Vec<(String, String)>, Table)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let metadata = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .filter_map(|l| l.trim_start_matches('#').trim().split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let bad = |e: csv::Error| Error::Config(format!("{}: {e}", path.display()));
    let columns = r.headers().map_err(bad)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(bad)?;
        rows.push(rec.iter().map(Value::parse).collect::<Result<Vec<_>>>()?);
    }
    Ok((metadata, Table { columns, rows }))
}

#[derive(Serialize)]
struct JsonMirror<'a> {
    experiment: Experiment,
    generated_unix: u64,
    config: &'a ExperimentConfig,
    metadata: serde_json::Map<String, serde_json::Value>,
    columns: &'a [String],
    rows: &'a [Vec<Value>],
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Write `<experiment>.csv` (with format csv), `<experiment>.json` and, when
/// plots are requested, `<experiment>.gp` into the output directory.
pub fn write_output(report: &Report, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_path;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = report.experiment.name();
    let mut written = Vec::new();

    let csv_name = format!("{stem}.csv");
    if cfg.format == OutputFormat::Csv {
        let path = dir.join(&csv_name);
        write_file(&path, &render_csv(report)?)?;
        written.push(path);
    }

    let generated_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mirror = JsonMirror {
        experiment: report.experiment,
        generated_unix,
        config: cfg,
        metadata: report
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect(),
        columns: &report.table.columns,
        rows: &report.table.rows,
    };
    let path = dir.join(format!("{stem}.json"));
    let json = serde_json::to_string_pretty(&mirror).map_err(|e| Error::Config(format!("json encoding: {e}")))?;
    write_file(&path, &json)?;
    written.push(path);

    if cfg.emit_plots {
        if cfg.format == OutputFormat::Csv {
            let path = dir.join(format!("{stem}.gp"));
            write_file(&path, &report.plot.replace("{csv}", &csv_name))?;
            written.push(path);
        } else {
            log::warn!("gnuplot scripts read the CSV table; none written with format json");
        }
    }
    Ok(written)
}
