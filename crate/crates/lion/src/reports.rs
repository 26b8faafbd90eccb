//! Line-delimited report records, plot-data files, and their schema checks.
//!
//! Every report file is JSON Lines. Each line is an object whose `record`
//! field names its type; the fields each type requires are listed in
//! [`RECORD_SCHEMAS`]. The first line is always a `meta` record.
//!
//! A plot-data file is one JSON object:
//!
//! ```text
//! {"schema":"lion-plot/1","title":"..","panels":[{"title":"..","x_label":"lambda","y_label":"return",
//!   "series":[{"name":"lion","x":[..],"y":[..],"err":[..]}]}]}
//! ```
//!
//! `err` is optional; `x`, `y` and `err` have equal lengths.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use lion_core::evalsuite::{
    AblationReport, AggregationReport, BaselineReport, Finding, LambdaSweepResult, StrategyResult,
};
use lion_core::lion::TrainRecord;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const PLOT_SCHEMA: &str = "lion-plot/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldType {
    Str,
    Num,
    /// A number, or `null` for a value that could not be computed.
    NumOrNull,
    Bool,
    NumArray,
    Any,
}

/// Record type and its required fields.
pub const RECORD_SCHEMAS: &[(&str, &[(&str, FieldType)])] = &[
    ("meta", &[("report", FieldType::Str), ("config", FieldType::Any)]),
    (
        "sweep_point",
        &[
            ("lambda", FieldType::Num),
            ("mean_return", FieldType::Num),
            ("return_stderr", FieldType::Num),
            ("mean_distance", FieldType::Num),
            ("episodes", FieldType::Num),
        ],
    ),
    (
        "setting",
        &[
            ("method", FieldType::Str),
            ("setting", FieldType::Num),
            ("mean_return", FieldType::Num),
            ("return_stderr", FieldType::Num),
            ("behavior_distance", FieldType::Num),
        ],
    ),
    (
        "adjacency",
        &[
            ("method", FieldType::Str),
            ("jumps", FieldType::NumArray),
            ("mean", FieldType::Num),
            ("max", FieldType::Num),
        ],
    ),
    (
        "finding",
        &[
            ("name", FieldType::Str),
            ("expected", FieldType::Str),
            ("observed", FieldType::Bool),
            ("detail", FieldType::Str),
        ],
    ),
    (
        "ablation_score",
        &[
            ("kind", FieldType::Str),
            ("setting", FieldType::Num),
            ("behavior_mismatch", FieldType::Num),
            ("dataset_action_mse", FieldType::Num),
        ],
    ),
    ("aggregation", &[("mode", FieldType::Str), ("return_at_one", FieldType::NumOrNull)]),
    ("strategy_step", &[("lambda", FieldType::Num), ("mean_return", FieldType::Num)]),
    (
        "strategy_result",
        &[
            ("final_lambda", FieldType::Num),
            ("final_return", FieldType::Num),
            ("stop_reason", FieldType::Str),
            ("baseline_return", FieldType::Num),
        ],
    ),
    (
        "train",
        &[
            ("update", FieldType::Num),
            ("loss", FieldType::Num),
            ("rollout_loss", FieldType::Num),
            ("anchor_loss", FieldType::Num),
            ("lambda_mean", FieldType::Num),
        ],
    ),
    ("error", &[("message", FieldType::Str)]),
];

fn type_ok(v: &Value, t: FieldType) -> bool {
    let num = |v: &Value| v.as_f64().is_some_and(f64::is_finite);
    match t {
        FieldType::Str => v.is_string(),
        FieldType::Num => num(v),
        FieldType::NumOrNull => v.is_null() || num(v),
        FieldType::Bool => v.is_boolean(),
        FieldType::NumArray => v.as_array().is_some_and(|a| a.iter().all(num)),
        FieldType::Any => true,
    }
}

/// Checks one record against [`RECORD_SCHEMAS`].
pub fn validate_record(v: &Value) -> std::result::Result<(), String> {
    let kind = v.get("record").and_then(Value::as_str).ok_or("missing string field 'record'")?;
    let (_, fields) = RECORD_SCHEMAS
        .iter()
        .find(|(k, _)| *k == kind)
        .ok_or_else(|| format!("unknown record type '{kind}'"))?;
    for &(name, t) in fields.iter() {
        let f = v.get(name).ok_or_else(|| format!("{kind}: missing field '{name}'"))?;
        if !type_ok(f, t) {
            return Err(format!("{kind}: field '{name}' is not {t:?}"));
        }
    }
    Ok(())
}

/// Validates a whole report file body; the first record must be `meta`.
pub fn validate_report(text: &str) -> Result<usize> {
    let mut n = 0;
    for (i, line) in text.lines().enumerate() {
        let err = |message: String| Error::Parse { line: i + 1, message };
        let v: Value = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
        validate_record(&v).map_err(err)?;
        if i == 0 && v["record"] != "meta" {
            return Err(err("first record must be 'meta'".into()));
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "empty report".into(),
        });
    }
    Ok(n)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub err: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub schema: String,
    pub title: String,
    pub panels: Vec<Panel>,
}

impl PlotData {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            schema: PLOT_SCHEMA.into(),
            title: title.into(),
            panels: Vec::new(),
        }
    }

    pub fn panel(mut self, title: &str, x_label: &str, y_label: &str, series: Vec<Series>) -> Self {
        self.panels.push(Panel {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series,
        });
        self
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.schema != PLOT_SCHEMA {
            return Err(format!("schema '{}' is not {PLOT_SCHEMA}", self.schema));
        }
        for p in &self.panels {
            for s in &p.series {
                let n = s.x.len();
                if s.y.len() != n || s.err.as_ref().is_some_and(|e| e.len() != n) {
                    return Err(format!("panel '{}' series '{}': arrays differ in length", p.title, s.name));
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates a plot-data file body.
pub fn validate_plot(text: &str) -> Result<PlotData> {
    let p: PlotData = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    p.validate().map_err(|message| Error::Parse { line: 1, message })?;
    Ok(p)
}

pub fn series(name: &str, x: &[f64], y: &[f64], err: Option<&[f64]>) -> Series {
    Series {
        name: name.into(),
        x: x.to_vec(),
        y: y.to_vec(),
        err: err.map(<[f64]>::to_vec),
    }
}

/// A report being assembled in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub records: Vec<Value>,
    pub plot: PlotData,
}

impl Report {
    pub fn new(report: &str, config: Value) -> Self {
        Self {
            records: vec![json!({ "record": "meta", "report": report, "config": config })],
            plot: PlotData::new(report),
        }
    }

    pub fn push(&mut self, record: &str, mut fields: Value) {
        fields["record"] = Value::from(record);
        self.records.push(fields);
    }

    pub fn findings(&mut self, findings: &[Finding]) {
        for f in findings {
            self.push("finding", serde_json::to_value(f).expect("finding serializes"));
        }
    }

    pub fn to_jsonl(&self) -> String {
        self.records.iter().map(|r| r.to_string() + "\n").collect()
    }

    /// Writes `<stem>.jsonl` and `<stem>.plot.json` next to each other.
    pub fn write(&self, stem: &Path) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
        let jsonl = stem.with_extension("jsonl");
        let plot = stem.with_extension("plot.json");
        std::fs::write(&jsonl, self.to_jsonl()).map_err(|e| Error::io(&jsonl, e))?;
        let text = serde_json::to_string_pretty(&self.plot).expect("plot serializes");
        std::fs::write(&plot, text).map_err(|e| Error::io(&plot, e))?;
        Ok((jsonl, plot))
    }
}

pub fn sweep_report(sweep: &LambdaSweepResult, config: Value) -> Report {
    let mut r = Report::new("lambda_sweep", config);
    for i in 0..sweep.grid.len() {
        r.push(
            "sweep_point",
            json!({
                "lambda": sweep.grid[i],
                "mean_return": sweep.mean_return[i],
                "return_stderr": sweep.return_stderr[i],
                "mean_distance": sweep.mean_distance[i],
                "episodes": sweep.episodes,
            }),
        );
    }
    r.plot = sweep_plot(PlotData::new("lambda sweep"), "lion", sweep);
    r
}

fn sweep_plot(plot: PlotData, name: &str, s: &LambdaSweepResult) -> PlotData {
    plot.panel(
        "return",
        "lambda",
        "mean return",
        vec![series(name, &s.grid, &s.mean_return, Some(&s.return_stderr))],
    )
    .panel("distance", "lambda", "distance to behavior", vec![series(name, &s.grid, &s.mean_distance, None)])
}

/// Baseline records, optionally next to the λ-conditioned policy's sweep.
pub fn baseline_report(b: &BaselineReport, reference: Option<&LambdaSweepResult>, config: Value) -> Report {
    let method = b.method.name();
    let mut r = Report::new(&format!("baseline_{}", method.replace('-', "_")), config);
    for i in 0..b.settings.len() {
        r.push(
            "setting",
            json!({
                "method": method,
                "setting": b.settings[i],
                "mean_return": b.mean_return[i],
                "return_stderr": b.return_stderr[i],
                "behavior_distance": b.behavior_distance[i],
            }),
        );
    }
    let mut adj = serde_json::to_value(&b.adjacency).expect("adjacency serializes");
    adj["method"] = Value::from(method);
    r.push("adjacency", adj);
    if let Some(a) = &b.reference_adjacency {
        let mut adj = serde_json::to_value(a).expect("adjacency serializes");
        adj["method"] = Value::from("lion");
        r.push("adjacency", adj);
    }
    r.findings(&b.findings);
    if let Some(e) = &b.error {
        r.push("error", json!({ "message": e }));
    }
    let mut ret = vec![series(method, &b.settings, &b.mean_return, Some(&b.return_stderr))];
    let mut dist = vec![series(method, &b.settings, &b.behavior_distance, None)];
    if let Some(s) = reference {
        ret.push(series("lion", &s.grid, &s.mean_return, Some(&s.return_stderr)));
        dist.push(series("lion", &s.grid, &s.mean_distance, None));
    }
    let mid: Vec<f64> = b.settings.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let mut jumps = vec![series(method, &mid, &b.adjacency.jumps, None)];
    if let Some(a) = &b.reference_adjacency {
        jumps.push(series("lion", &mid, &a.jumps, None));
    }
    r.plot = PlotData::new(format!("{method} baseline"))
        .panel("return", "setting", "mean return", ret)
        .panel("distance", "setting", "distance to behavior", dist)
        .panel("adjacency", "setting", "mean squared action jump", jumps);
    r
}

pub fn ablation_report(a: &AblationReport, config: Value) -> Report {
    let kind = serde_json::to_value(a.kind).expect("kind serializes");
    let kind = kind.as_str().unwrap_or("ablation").to_string();
    let mut r = Report::new(&format!("ablation_{kind}"), config);
    for s in &a.scores {
        let mut v = serde_json::to_value(s).expect("score serializes");
        v["kind"] = Value::from(kind.as_str());
        r.push("ablation_score", v);
    }
    r.findings(&a.findings);
    let x: Vec<f64> = a.scores.iter().map(|s| s.setting).collect();
    let bm: Vec<f64> = a.scores.iter().map(|s| s.behavior_mismatch).collect();
    let dm: Vec<f64> = a.scores.iter().map(|s| s.dataset_action_mse).collect();
    r.plot = PlotData::new(format!("{kind} ablation"))
        .panel("lambda = 0 mismatch", &kind, "squared distance", vec![
            series("behavior clone", &x, &bm, None),
            series("dataset actions", &x, &dm, None),
        ]);
    r
}

pub fn aggregation_report(a: &AggregationReport, config: Value) -> Report {
    let mut r = Report::new("ablation_aggregation", config);
    for (m, v) in a.modes.iter().zip(&a.return_at_one) {
        r.push("aggregation", json!({ "mode": m.name(), "return_at_one": if v.is_finite() { json!(v) } else { Value::Null } }));
    }
    for (m, s) in a.modes.iter().zip(&a.sweeps) {
        for i in 0..s.grid.len() {
            r.push(
                "sweep_point",
                json!({
                    "mode": m.name(),
                    "lambda": s.grid[i],
                    "mean_return": s.mean_return[i],
                    "return_stderr": s.return_stderr[i],
                    "mean_distance": s.mean_distance[i],
                    "episodes": s.episodes,
                }),
            );
        }
    }
    r.findings(&a.findings);
    let ret = a.modes.iter().zip(&a.sweeps).map(|(m, s)| series(m.name(), &s.grid, &s.mean_return, Some(&s.return_stderr))).collect();
    let dist = a.modes.iter().zip(&a.sweeps).map(|(m, s)| series(m.name(), &s.grid, &s.mean_distance, None)).collect();
    r.plot = PlotData::new("aggregation ablation")
        .panel("return", "lambda", "mean return", ret)
        .panel("distance", "lambda", "distance to behavior", dist);
    r
}

pub fn strategy_report(s: &StrategyResult, config: Value) -> Report {
    let mut r = Report::new("strategy", config);
    for (l, ret) in s.visited.iter().zip(&s.returns) {
        r.push("strategy_step", json!({ "lambda": l, "mean_return": ret }));
    }
    r.push(
        "strategy_result",
        json!({
            "final_lambda": s.final_lambda,
            "final_return": s.final_return,
            "stop_reason": s.stop_reason,
            "baseline_return": s.baseline_return,
        }),
    );
    r.plot = PlotData::new("user strategy").panel("return", "lambda", "mean return", vec![
        series("visited", &s.visited, &s.returns, None),
        series("baseline", &[0.0, 1.0], &[s.baseline_return, s.baseline_return], None),
    ]);
    r
}

/// Streams training records as JSON lines.
pub struct TrainLog {
    out: BufWriter<File>,
}

impl TrainLog {
    pub fn create(path: &Path, config: Value) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut log = Self { out: BufWriter::new(file) };
        log.line(&json!({ "record": "meta", "report": "train_policy", "config": config }))
            .map_err(|e| Error::io(path, e))?;
        Ok(log)
    }

    fn line(&mut self, v: &Value) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.out, v)?;
        self.out.write_all(b"\n")
    }

    pub fn record(&mut self, r: &TrainRecord) -> std::io::Result<()> {
        self.line(&train_record(r))
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.out.flush()
    }
}

pub fn train_record(r: &TrainRecord) -> Value {
    json!({
        "record": "train",
        "update": r.update,
        "loss": r.loss,
        "rollout_loss": r.rollout_loss,
        "anchor_loss": r.anchor_loss,
        "lambda_mean": r.lambda_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use lion_core::evalsuite::{Adjacency, BaselineMethod, StopReason};

    fn sweep() -> LambdaSweepResult {
        LambdaSweepResult {
            grid: vec![0.0, 0.5, 1.0],
            mean_return: vec![0.1, 0.2, 0.3],
            return_stderr: vec![0.01, 0.01, 0.02],
            mean_distance: vec![0.0, 0.1, 0.4],
            episodes: 5,
            final_observations: vec![vec![]; 3],
        }
    }

    #[test]
    fn sweep_report_validates() {
        let r = sweep_report(&sweep(), json!({"seed": 1}));
        assert_eq!(validate_report(&r.to_jsonl()).unwrap(), 4);
        let text = serde_json::to_string(&r.plot).unwrap();
        let p = validate_plot(&text).unwrap();
        assert_eq!(p.panels.len(), 2);
    }

    #[test]
    fn validator_rejects_bad_records() {
        assert!(validate_report("").is_err());
        assert!(validate_report("{\"record\":\"sweep_point\",\"lambda\":0}\n").is_err());
        let meta = "{\"record\":\"meta\",\"report\":\"x\",\"config\":null}\n";
        assert!(validate_report(&format!("{meta}{{\"record\":\"nope\"}}\n")).is_err());
        let bad = format!("{meta}{{\"record\":\"finding\",\"name\":\"a\",\"expected\":\"b\",\"observed\":1,\"detail\":\"\"}}\n");
        assert!(matches!(validate_report(&bad), Err(Error::Parse { line: 2, .. })));
        let null_num = format!("{meta}{{\"record\":\"strategy_step\",\"lambda\":null,\"mean_return\":1}}\n");
        assert!(validate_report(&null_num).is_err());
    }

    #[test]
    fn plot_validator_checks_lengths() {
        let p = PlotData::new("t").panel("a", "x", "y", vec![series("s", &[0.0, 1.0], &[1.0], None)]);
        assert!(p.validate().is_err());
        let mut ok = PlotData::new("t").panel("a", "x", "y", vec![series("s", &[0.0], &[1.0], Some(&[0.1]))]);
        assert!(ok.validate().is_ok());
        ok.schema = "other".into();
        assert!(ok.validate().is_err());
    }

    #[test]
    fn baseline_and_strategy_reports_validate() {
        let b = BaselineReport {
            method: BaselineMethod::Discrete,
            settings: vec![0.0, 1.0],
            mean_return: vec![0.1, 0.2],
            return_stderr: vec![0.0, 0.0],
            behavior_distance: vec![0.0, 0.3],
            adjacency: Adjacency::from_jumps(vec![0.2]),
            reference_adjacency: Some(Adjacency::from_jumps(vec![0.1])),
            findings: vec![Finding::new("f", "e", true, "d".into())],
            error: Some("stopped".into()),
        };
        let r = baseline_report(&b, Some(&sweep()), Value::Null);
        assert_eq!(validate_report(&r.to_jsonl()).unwrap(), 1 + 2 + 2 + 1 + 1);
        r.plot.validate().unwrap();
        let s = StrategyResult {
            visited: vec![0.0, 0.05],
            returns: vec![1.0, 0.9],
            final_lambda: 0.0,
            final_return: 1.0,
            stop_reason: StopReason::PerformanceDrop,
            baseline_return: 0.5,
        };
        let r = strategy_report(&s, Value::Null);
        validate_report(&r.to_jsonl()).unwrap();
        assert!(r.to_jsonl().contains("\"stop_reason\":\"performance_drop\""));
    }
}
