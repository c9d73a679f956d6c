//! Strength sweeps of the VPBS experiment and their tabular output.
//!
//! A sweep walks `theta` over `[0, pi/4]` (strength `s = cos 2 theta` from 1
//! down to 0), evaluates the requested estimators and relations at every
//! point, and writes one row per point. Rows are computed in parallel; shot
//! streams are keyed by `(seed, row, stage)` so output never depends on
//! scheduling.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{evaluate_all, EdrInputs, EdrReport, Relation};
use crate::error::{EdrError, Result};
use crate::estimators::{
    cascade_distribution, derive_seed, estimate_from_counts, sample_shots, three_state_error, two_state_error,
    weak_probe_disturbance, weak_probe_error, EstimateMode, WeakProbe,
};
use crate::instruments::{lund_wiseman_model, IndirectModel, Instrument, InstrumentKind, InstrumentSpec};
use crate::qubit::{parse_state_literal, DensityState, Observable, ObservableName};

/// Significant digits written for every number.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    ThreeState,
    TwoState,
    WeakExact,
    WeakShots,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Direct,
        Method::ThreeState,
        Method::TwoState,
        Method::WeakExact,
        Method::WeakShots,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::ThreeState => "three_state",
            Method::TwoState => "two_state",
            Method::WeakExact => "weak_exact",
            Method::WeakShots => "weak_shots",
        }
    }

    fn has_stderr(self) -> bool {
        self == Method::WeakShots
    }
}

impl FromStr for Method {
    type Err = EdrError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            EdrError::Config(format!(
                "unknown method '{s}'; valid: {}",
                Self::ALL.map(Method::name).join(", ")
            ))
        })
    }
}

/// Either a point count spread evenly over `[0, pi/4]` or explicit angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaGrid {
    Points(usize),
    List(Vec<f64>),
}

impl ThetaGrid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            ThetaGrid::Points(1) => vec![0.0],
            ThetaGrid::Points(n) => (0..*n).map(|i| FRAC_PI_4 * (i as f64 / (n - 1) as f64)).collect(),
            ThetaGrid::List(v) => v.clone(),
        }
    }
}

/// Sweep parameters. Every field has a default; `extinction > 0` switches a
/// `vpbs` instrument to the imperfect-PBS model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub signal_state: String,
    #[serde(alias = "A")]
    pub a: ObservableName,
    #[serde(alias = "B")]
    pub b: ObservableName,
    pub theta_grid: ThetaGrid,
    pub methods: Vec<Method>,
    pub probe_strength: f64,
    pub shots: u64,
    pub seed: u64,
    pub instrument: InstrumentKind,
    pub extinction: f64,
    pub relations: Vec<Relation>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            signal_state: "L".into(),
            a: ObservableName::SigmaZ,
            b: ObservableName::SigmaX,
            theta_grid: ThetaGrid::Points(101),
            methods: Method::ALL.to_vec(),
            probe_strength: 0.104,
            shots: 1_000_000,
            seed: 0,
            instrument: InstrumentKind::Vpbs,
            extinction: 0.0,
            relations: Relation::ALL.to_vec(),
        }
    }
}

/// Parses the right-hand side of `key=value` as a TOML value, falling back to
/// a bare string so `signal_state=L` works without quotes.
fn override_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl SweepConfig {
    /// Parses TOML text, then applies `key=value` overrides in order.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| EdrError::Config(e.to_string()))?;
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| EdrError::Config(format!("override '{item}' is not key=value")))?;
            table.insert(key.trim().to_string(), override_value(value.trim()));
        }
        let cfg: SweepConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| EdrError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| EdrError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(EdrError::Config(msg));
        parse_state_literal(&self.signal_state).map_err(|e| EdrError::Config(format!("signal_state: {e}")))?;
        let grid = self.theta_grid.points();
        if grid.is_empty() {
            return bad("theta_grid is empty".into());
        }
        if let Some(t) = grid.iter().find(|t| !(0.0..=FRAC_PI_4 + 1e-12).contains(*t)) {
            return bad(format!("theta_grid value {t} is outside [0, pi/4]"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("theta_grid must be strictly increasing".into());
        }
        if !(self.probe_strength > 0.0 && self.probe_strength <= 1.0) {
            return bad(format!("probe_strength {} must lie in (0, 1]", self.probe_strength));
        }
        if self.methods.contains(&Method::WeakShots) && self.shots == 0 {
            return bad("shots must be positive when weak_shots is selected".into());
        }
        if !(0.0..1.0).contains(&self.extinction) {
            return bad(format!("extinction {} must lie in [0, 1)", self.extinction));
        }
        Ok(())
    }

    /// `direct` first, then the requested methods without repeats.
    pub fn effective_methods(&self) -> Vec<Method> {
        dedup(std::iter::once(Method::Direct).chain(self.methods.iter().copied()))
    }

    pub fn effective_relations(&self) -> Vec<Relation> {
        dedup(self.relations.iter().copied())
    }

    fn instrument_spec(&self, theta: f64) -> InstrumentSpec {
        let kind = match self.instrument {
            InstrumentKind::Vpbs if self.extinction > 0.0 => InstrumentKind::ImperfectVpbs,
            k => k,
        };
        InstrumentSpec {
            kind,
            theta,
            extinction: self.extinction,
        }
    }
}

fn dedup<T: Copy + Eq + std::hash::Hash>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut seen = HashSet::new();
    items.filter(|x| seen.insert(*x)).collect()
}

/// Error and disturbance from one method; `*_stderr` only for shot-based methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodEstimate {
    pub method: Method,
    pub eps: f64,
    pub eta: f64,
    pub eps_stderr: Option<f64>,
    pub eta_stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    /// `cos 2 theta`
    pub strength: f64,
    pub estimates: Vec<MethodEstimate>,
    pub reports: Vec<EdrReport>,
}

impl SweepRow {
    pub fn estimate(&self, method: Method) -> Option<&MethodEstimate> {
        self.estimates.iter().find(|e| e.method == method)
    }

    pub fn report(&self, relation: Relation) -> Option<&EdrReport> {
        self.reports.iter().find(|r| r.relation == relation)
    }
}

struct PointContext<'a> {
    cfg: &'a SweepConfig,
    a: Observable,
    b: Observable,
    psi: DensityState,
    methods: Vec<Method>,
    relations: Vec<Relation>,
}

impl PointContext<'_> {
    fn model(&self, theta: f64, instr: &Instrument) -> Result<IndirectModel> {
        let spec = self.cfg.instrument_spec(theta);
        if spec.kind == InstrumentKind::Vpbs && self.cfg.a == ObservableName::SigmaZ {
            lund_wiseman_model(theta)
        } else {
            IndirectModel::from_instrument(instr)
        }
    }

    fn row(&self, index: usize, theta: f64) -> Result<SweepRow> {
        let instr = self.cfg.instrument_spec(theta).build(&self.a)?;
        let model = self.model(theta, &instr)?;
        let inputs = EdrInputs::from_model(&model, &self.a, &self.b, &self.psi)?;
        let mut estimates = Vec::with_capacity(self.methods.len());
        for &method in &self.methods {
            estimates.push(self.estimate(method, index, &instr, &inputs)?);
        }
        Ok(SweepRow {
            theta,
            strength: (2.0 * theta).cos(),
            estimates,
            reports: evaluate_all(&self.relations, &inputs)?,
        })
    }

    fn estimate(&self, method: Method, index: usize, instr: &Instrument, direct: &EdrInputs) -> Result<MethodEstimate> {
        let (a, b, psi) = (&self.a, &self.b, &self.psi);
        let plain = |eps, eta| MethodEstimate {
            method,
            eps,
            eta,
            eps_stderr: None,
            eta_stderr: None,
        };
        match method {
            Method::Direct => Ok(plain(direct.eps, direct.eta)),
            Method::ThreeState => Ok(plain(
                three_state_error(instr.povm(), a, psi)?,
                three_state_error(&instr.followed_by(b)?, b, psi)?,
            )),
            Method::TwoState => Ok(plain(
                two_state_error(instr.povm(), a, psi)?,
                two_state_error(&instr.followed_by(b)?, b, psi)?,
            )),
            Method::WeakExact | Method::WeakShots => {
                let s = self.cfg.probe_strength;
                let probe_a = WeakProbe::with_strength(a.clone(), s)?;
                let probe_b = WeakProbe::with_strength(b.clone(), s)?;
                let dist_a = cascade_distribution(&probe_a, instr, b, psi)?;
                let dist_b = cascade_distribution(&probe_b, instr, b, psi)?;
                if method == Method::WeakExact {
                    return Ok(plain(
                        weak_probe_error(&dist_a, probe_a.strength(), None)?,
                        weak_probe_disturbance(&dist_b, probe_b.strength(), None)?,
                    ));
                }
                let row = index as u64;
                let rec_a = sample_shots(&dist_a, self.cfg.shots, derive_seed(self.cfg.seed, &[row, 0]))?;
                let rec_b = sample_shots(&dist_b, self.cfg.shots, derive_seed(self.cfg.seed, &[row, 1]))?;
                let (eps, eps_se) =
                    estimate_from_counts(&rec_a, &dist_a.axes, probe_a.strength(), EstimateMode::Error)?;
                let (eta, eta_se) =
                    estimate_from_counts(&rec_b, &dist_b.axes, probe_b.strength(), EstimateMode::Disturbance)?;
                Ok(MethodEstimate {
                    method,
                    eps,
                    eta,
                    eps_stderr: Some(eps_se),
                    eta_stderr: Some(eta_se),
                })
            }
        }
    }
}

/// Runs every grid point; rows come back in grid order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let ctx = PointContext {
        cfg,
        a: cfg.a.observable(),
        b: cfg.b.observable(),
        psi: parse_state_literal(&cfg.signal_state)?.density(),
        methods: cfg.effective_methods(),
        relations: cfg.effective_relations(),
    };
    let grid = cfg.theta_grid.points();
    grid.par_iter()
        .enumerate()
        .map(|(i, &theta)| ctx.row(i, theta))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = EdrError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            _ => Err(EdrError::Config(format!("unknown format '{s}'; valid: csv, json"))),
        }
    }
}

/// `v` rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_significant(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().unwrap_or(v)
}

/// Shortest text that reads back as the rounded value.
pub fn format_number(v: f64) -> String {
    let r = round_significant(v);
    if !r.is_finite() {
        return "NaN".into();
    }
    if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e15) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// Column names and values of a row, in output order.
fn row_fields(row: &SweepRow) -> Vec<(String, f64)> {
    let mut out = vec![("theta".to_string(), row.theta), ("s".to_string(), row.strength)];
    for e in &row.estimates {
        let m = e.method.name();
        out.push((format!("eps_{m}"), e.eps));
        out.push((format!("eta_{m}"), e.eta));
        if e.method.has_stderr() {
            out.push((format!("eps_{m}_stderr"), e.eps_stderr.unwrap_or(f64::NAN)));
            out.push((format!("eta_{m}_stderr"), e.eta_stderr.unwrap_or(f64::NAN)));
        }
    }
    for r in &row.reports {
        let n = r.relation.name();
        out.push((format!("rel_{n}_lhs"), r.lhs));
        out.push((format!("rel_{n}_rhs"), r.rhs));
        out.push((format!("rel_{n}_slack"), r.slack));
    }
    out
}

/// The table as text, LF line endings, trailing newline.
pub fn render_table(rows: &[SweepRow], format: TableFormat) -> Result<String> {
    let first = rows.first().ok_or_else(|| EdrError::input("no rows to emit"))?;
    let header: Vec<String> = row_fields(first).into_iter().map(|(k, _)| k).collect();
    match format {
        TableFormat::Csv => {
            let mut out = header.join(",");
            out.push('\n');
            for row in rows {
                let line: Vec<String> = row_fields(row).iter().map(|(_, v)| format_number(*v)).collect();
                let _ = writeln!(out, "{}", line.join(","));
            }
            Ok(out)
        }
        TableFormat::Json => {
            let array: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let obj: serde_json::Map<String, serde_json::Value> = row_fields(row)
                        .into_iter()
                        .map(|(k, v)| {
                            let num = serde_json::Number::from_f64(round_significant(v))
                                .map_or(serde_json::Value::Null, serde_json::Value::Number);
                            (k, num)
                        })
                        .collect();
                    serde_json::Value::Object(obj)
                })
                .collect();
            let mut out = serde_json::to_string_pretty(&array)
                .map_err(|e| EdrError::Numerical(format!("JSON encoding failed: {e}")))?;
            out.push('\n');
            Ok(out)
        }
    }
}

/// Writes the table to `destination`, or standard output when `None`.
pub fn emit_table(rows: &[SweepRow], format: TableFormat, destination: Option<&Path>) -> Result<()> {
    let text = render_table(rows, format)?;
    match destination {
        Some(path) => std::fs::write(path, text).map_err(|source| EdrError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| EdrError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_8;

    fn small(methods: &str) -> SweepConfig {
        SweepConfig::from_toml_str(&format!("theta_grid = 11\nmethods = {methods}\nshots = 20000\n"), &[]).unwrap()
    }

    #[test]
    fn defaults() {
        let cfg = SweepConfig::from_toml_str("", &[]).unwrap();
        assert_eq!(cfg, SweepConfig::default());
        let grid = cfg.theta_grid.points();
        assert_eq!(grid.len(), 101);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[50], FRAC_PI_8);
        assert_eq!(grid[100], FRAC_PI_4);
    }

    #[test]
    fn overrides_apply_after_file() {
        let cfg = SweepConfig::from_toml_str(
            "seed = 3\nsignal_state = \"H\"\n",
            &[
                "seed=9".into(),
                "signal_state=D".into(),
                "theta_grid=[0.0, 0.1]".into(),
                "A=sigma_x".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.signal_state, "D");
        assert_eq!(cfg.theta_grid, ThetaGrid::List(vec![0.0, 0.1]));
        assert_eq!(cfg.a, ObservableName::SigmaX);
    }

    #[test]
    fn config_errors_name_valid_choices() {
        let err = SweepConfig::from_toml_str("methods = [\"magic\"]", &[])
            .unwrap_err()
            .to_string();
        assert!(err.contains("three_state") && err.contains("weak_shots"), "{err}");
        let err = SweepConfig::from_toml_str("relations = [\"ozawa3\"]", &[])
            .unwrap_err()
            .to_string();
        assert!(err.contains("branciard2"), "{err}");
        assert!(SweepConfig::from_toml_str("bogus = 1", &[]).is_err());
        assert!(SweepConfig::from_toml_str("theta_grid = [0.2, 0.1]", &[]).is_err());
        assert!(SweepConfig::from_toml_str("theta_grid = [0.0, 1.0]", &[]).is_err());
        assert!(SweepConfig::from_toml_str("signal_state = \"Q\"", &[]).is_err());
        assert!(SweepConfig::from_toml_str("", &["noequals".into()]).is_err());
    }

    #[test]
    fn endpoint_rows() {
        let rows = run_sweep(&small("[\"direct\"]")).unwrap();
        let first = rows[0].estimate(Method::Direct).unwrap();
        assert_eq!(first.eps, 0.0);
        assert!((first.eta - 2f64.sqrt()).abs() < 1e-12);
        for w in rows.windows(2) {
            let (p, q) = (
                w[0].estimate(Method::Direct).unwrap(),
                w[1].estimate(Method::Direct).unwrap(),
            );
            assert!(q.eps >= p.eps && q.eta <= p.eta);
        }
        for row in &rows {
            assert!((row.strength - (2.0 * row.theta).cos()).abs() < 1e-12);
            let b2 = row.report(Relation::Branciard2).unwrap();
            assert!((-1e-10..=1e-6).contains(&b2.slack), "slack {}", b2.slack);
        }
    }

    #[test]
    fn direct_points_lie_on_tradeoff_curve() {
        let rows = run_sweep(&small("[]")).unwrap();
        for row in rows {
            let d = row.estimate(Method::Direct).unwrap();
            let curve = 2.0 * (FRAC_PI_4 - (d.eps / 2.0).asin()).sin();
            assert!((d.eta - curve).abs() < 1e-10);
        }
    }

    #[test]
    fn all_methods_agree() {
        let cfg = small("[\"three_state\", \"two_state\", \"weak_exact\", \"weak_shots\"]");
        for row in run_sweep(&cfg).unwrap() {
            let d = *row.estimate(Method::Direct).unwrap();
            for m in [Method::ThreeState, Method::TwoState, Method::WeakExact] {
                let e = row.estimate(m).unwrap();
                assert!((e.eps - d.eps).abs() < 1e-10 && (e.eta - d.eta).abs() < 1e-10, "{m:?}");
            }
            let shots = row.estimate(Method::WeakShots).unwrap();
            assert!(shots.eps_stderr.unwrap() > 0.0);
        }
    }

    #[test]
    fn imperfect_sweep_stays_valid() {
        let cfg = SweepConfig::from_toml_str(
            "theta_grid = 6\nextinction = 0.01\nmethods = [\"three_state\", \"weak_exact\"]",
            &[],
        )
        .unwrap();
        let rows = run_sweep(&cfg).unwrap();
        assert!(rows[0].estimate(Method::Direct).unwrap().eps > 0.0);
        assert!(rows.last().unwrap().estimate(Method::Direct).unwrap().eta > 0.0);
        for row in &rows {
            let d = row.estimate(Method::Direct).unwrap();
            let t = row.estimate(Method::ThreeState).unwrap();
            assert!((d.eps - t.eps).abs() < 1e-10 && (d.eta - t.eta).abs() < 1e-10);
            for rel in [
                Relation::Ozawa0,
                Relation::Ozawa,
                Relation::Branciard1,
                Relation::Branciard2,
            ] {
                assert!(row.report(rel).unwrap().satisfied);
            }
        }
    }

    #[test]
    fn csv_shape() {
        let cfg = SweepConfig::from_toml_str("theta_grid = 3\nmethods = [\"weak_shots\"]\nshots = 1000", &[]).unwrap();
        let text = render_table(&run_sweep(&cfg).unwrap(), TableFormat::Csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(!text.contains('\r'));
        assert!(lines[0].starts_with(
            "theta,s,eps_direct,eta_direct,eps_weak_shots,eta_weak_shots,eps_weak_shots_stderr,eta_weak_shots_stderr,rel_kennard_robertson_lhs"
        ));
        let width = lines[0].split(',').count();
        assert!(lines.iter().all(|l| l.split(',').count() == width));
    }

    #[test]
    fn json_round_trip() {
        let rows = run_sweep(&small("[\"two_state\"]")).unwrap();
        let text = render_table(&rows, TableFormat::Json).unwrap();
        let parsed: Vec<serde_json::Map<String, serde_json::Value>> = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.len(), rows.len());
        for (obj, row) in parsed.iter().zip(&rows) {
            let eps = obj["eps_two_state"].as_f64().unwrap();
            let truth = row.estimate(Method::TwoState).unwrap().eps;
            assert!((eps - truth).abs() <= 1e-11 * truth.abs().max(1e-300));
            let csv_header = render_table(&rows, TableFormat::Csv).unwrap();
            let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
            assert_eq!(keys.join(","), csv_header.lines().next().unwrap());
        }
    }

    #[test]
    fn output_is_deterministic() {
        let cfg = SweepConfig::from_toml_str("theta_grid = 5\nshots = 30000\nseed = 4", &[]).unwrap();
        let a = render_table(&run_sweep(&cfg).unwrap(), TableFormat::Csv).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
        let b = pool.install(|| render_table(&run_sweep(&cfg).unwrap(), TableFormat::Csv).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(std::f64::consts::SQRT_2), "1.41421356237");
        assert_eq!(format_number(-2.5e-7), "-2.5e-7");
        assert_eq!(format_number(0.1234567890123456), "0.123456789012");
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn unwritable_destination() {
        let rows = run_sweep(&small("[]")).unwrap();
        let err = emit_table(&rows, TableFormat::Csv, Some(Path::new("/nonexistent/dir/out.csv"))).unwrap_err();
        assert!(matches!(err, EdrError::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/dir/out.csv"));
    }

    #[test]
    fn empty_rows_rejected() {
        assert!(render_table(&[], TableFormat::Csv).is_err());
    }
}
