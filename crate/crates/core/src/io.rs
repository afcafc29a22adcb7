//! Versioned CSV schemas, run reports and plot-data files.
//!
//! Every CSV starts with a `# schema_version=1` line followed by a header.
//! Columns may appear in any order, but unknown or missing columns are
//! rejected by name. Empty cells stand for absent optional values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::detector::{AbsorptionRow, AbsorptionTable, CountRow, DetectorRecord};
use crate::error::{Error, Result};
use crate::estimation::FilmPoint;
use crate::planner::PlanRow;
use crate::transport::{HallRecord, HallSweep, TransportRecord, TransportSweep};

pub const SCHEMA_LINE: &str = "# schema_version=1";

pub const FILM_POINTS_COLUMNS: [&str; 6] = ["d0_nm", "fluence_per_nm2", "r_sheet_ohm", "tc_K", "sigma_r_ohm", "sigma_tc_K"];
pub const RT_SWEEP_COLUMNS: [&str; 3] = ["temperature_K", "field_T", "resistance_ohm"];
pub const HALL_SWEEP_COLUMNS: [&str; 3] = ["field_T", "hall_voltage_V", "current_A"];
pub const DETECTOR_COLUMNS: [&str; 8] =
    ["id", "d0_nm", "fluence_per_nm2", "width_nm", "fill_factor", "area_um", "isw_uA", "photon_rate_hz"];
pub const DETECTOR_OPTIONAL_COLUMNS: [&str; 1] = ["wire_length_um"];
pub const COUNTS_COLUMNS: [&str; 3] = ["bias_uA", "cr_hz", "dcr_hz"];
pub const ABSORPTION_COLUMNS: [&str; 6] = ["d0_nm", "width_nm", "width_sigma_nm", "n", "k", "alpha_percent"];
pub const ANCHOR_COLUMNS: [&str; 2] = ["id", "anchor_value"];
pub const PLAN_COLUMNS: [&str; 5] = ["id", "fluence_per_nm2", "predicted_metric", "extrapolated", "warning"];
pub const TRAJECTORY_COLUMNS: [&str; 3] = ["fluence_per_nm2", "occupied_fraction", "stderr"];
pub const PLOT_COLUMNS: [&str; 5] = ["series", "kind", "x", "y", "y_err"];

/// Reads a whole file, mapping failures to [`Error::Io`].
pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.display().to_string(), message: e.to_string() })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Lower-case hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// A parsed CSV file with a validated header.
#[derive(Debug, Clone)]
pub struct CsvTable {
    file: String,
    columns: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

impl CsvTable {
    /// Parses `text`, requiring the schema line, every column of `required`
    /// and nothing outside `required` and `optional`.
    pub fn parse(text: &str, file: &str, required: &[&str], optional: &[&str]) -> Result<Self> {
        let schema_err = |line: usize, column: &str, message: String| Error::Schema {
            file: file.to_string(),
            line,
            column: column.to_string(),
            message,
        };
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some(SCHEMA_LINE) => {}
            Some(l) if l.starts_with("# schema_version=") => {
                return Err(schema_err(1, "", format!("unsupported schema version line `{l}`, expected `{SCHEMA_LINE}`")))
            }
            _ => return Err(schema_err(1, "", format!("first line must be `{SCHEMA_LINE}`"))),
        }
        let body = text.split_once('\n').map_or("", |(_, rest)| rest);
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(body.as_bytes());
        let header = reader.headers().map_err(|e| schema_err(2, "", e.to_string()))?.clone();
        let columns: Vec<String> = header.iter().map(str::to_string).collect();
        for (i, c) in columns.iter().enumerate() {
            if !required.contains(&c.as_str()) && !optional.contains(&c.as_str()) {
                return Err(schema_err(2, c, "unknown column".into()));
            }
            if columns[..i].contains(c) {
                return Err(schema_err(2, c, "duplicate column".into()));
            }
        }
        if let Some(missing) = required.iter().find(|r| !columns.iter().any(|c| c == *r)) {
            return Err(schema_err(2, missing, "missing column".into()));
        }
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize + 1);
                schema_err(line, "", e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize + 1);
            rows.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(CsvTable { file: file.to_string(), columns, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Source line of row `i`, 1-based.
    pub fn line(&self, i: usize) -> usize {
        self.rows[i].0
    }

    fn cell(&self, i: usize, column: &str) -> Option<&str> {
        let j = self.columns.iter().position(|c| c == column)?;
        Some(self.rows[i].1[j].as_str())
    }

    fn error(&self, i: usize, column: &str, message: String) -> Error {
        Error::Schema { file: self.file.clone(), line: self.rows[i].0, column: column.to_string(), message }
    }

    pub fn opt_f64(&self, i: usize, column: &str) -> Result<Option<f64>> {
        match self.cell(i, column) {
            None | Some("") => Ok(None),
            Some(s) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Some(v)),
                _ => Err(self.error(i, column, format!("`{s}` is not a finite number"))),
            },
        }
    }

    pub fn f64(&self, i: usize, column: &str) -> Result<f64> {
        self.opt_f64(i, column)?.ok_or_else(|| self.error(i, column, "value is required".into()))
    }

    pub fn string(&self, i: usize, column: &str) -> Result<String> {
        match self.cell(i, column) {
            Some(s) if !s.is_empty() => Ok(s.to_string()),
            _ => Err(self.error(i, column, "value is required".into())),
        }
    }

    pub fn boolean(&self, i: usize, column: &str) -> Result<bool> {
        match self.cell(i, column) {
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(s) => Err(self.error(i, column, format!("`{s}` is not true/false"))),
            None => Err(self.error(i, column, "value is required".into())),
        }
    }

    /// Attaches the row position to a validation failure.
    pub fn at_row(&self, i: usize, e: Error) -> Error {
        match e {
            Error::InvalidInput { field, reason } => self.error(i, &field, reason),
            Error::NonPositiveInput { field, value } => self.error(i, field, format!("must be positive, got {value}")),
            other => other,
        }
    }
}

/// Serialises rows under the schema line and `header`.
pub fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(&r).expect("writing to memory");
    }
    let body = String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8");
    format!("{SCHEMA_LINE}\n{body}")
}

pub fn parse_film_points(text: &str, file: &str) -> Result<Vec<FilmPoint>> {
    let t = CsvTable::parse(text, file, &FILM_POINTS_COLUMNS, &[])?;
    (0..t.len())
        .map(|i| {
            let p = FilmPoint {
                d0: t.f64(i, "d0_nm")?,
                fluence: t.f64(i, "fluence_per_nm2")?,
                r_sheet: t.opt_f64(i, "r_sheet_ohm")?,
                tc: t.opt_f64(i, "tc_K")?,
                sigma_r: t.opt_f64(i, "sigma_r_ohm")?,
                sigma_tc: t.opt_f64(i, "sigma_tc_K")?,
            };
            p.validate().map_err(|e| t.at_row(i, e))?;
            Ok(p)
        })
        .collect()
}

pub fn film_points_csv(points: &[FilmPoint]) -> String {
    write_csv(
        &FILM_POINTS_COLUMNS,
        points.iter().map(|p| {
            vec![fmt_f64(p.d0), fmt_f64(p.fluence), fmt_opt(p.r_sheet), fmt_opt(p.tc), fmt_opt(p.sigma_r), fmt_opt(p.sigma_tc)]
        }),
    )
}

pub fn parse_rt_sweep(text: &str, file: &str) -> Result<TransportSweep> {
    let t = CsvTable::parse(text, file, &RT_SWEEP_COLUMNS, &[])?;
    let mut records = Vec::with_capacity(t.len());
    for i in 0..t.len() {
        let r = TransportRecord {
            temperature: t.f64(i, "temperature_K")?,
            field: t.f64(i, "field_T")?,
            resistance: t.f64(i, "resistance_ohm")?,
        };
        if r.resistance < 0.0 {
            return Err(t.at_row(i, Error::invalid("resistance_ohm", "must be >= 0")));
        }
        records.push(r);
    }
    TransportSweep::new(records)
}

pub fn rt_sweep_csv(sweep: &TransportSweep) -> String {
    write_csv(
        &RT_SWEEP_COLUMNS,
        sweep.records.iter().map(|r| vec![fmt_f64(r.temperature), fmt_f64(r.field), fmt_f64(r.resistance)]),
    )
}

pub fn parse_hall_sweep(text: &str, file: &str, d0: f64) -> Result<HallSweep> {
    let t = CsvTable::parse(text, file, &HALL_SWEEP_COLUMNS, &[])?;
    let mut records = Vec::with_capacity(t.len());
    for i in 0..t.len() {
        let r = HallRecord {
            field: t.f64(i, "field_T")?,
            hall_voltage: t.f64(i, "hall_voltage_V")?,
            current: t.f64(i, "current_A")?,
        };
        if r.current == 0.0 {
            return Err(t.at_row(i, Error::invalid("current_A", "must be non-zero")));
        }
        records.push(r);
    }
    Ok(HallSweep { records, d0 })
}

pub fn hall_sweep_csv(sweep: &HallSweep) -> String {
    write_csv(
        &HALL_SWEEP_COLUMNS,
        sweep.records.iter().map(|r| vec![fmt_f64(r.field), fmt_f64(r.hall_voltage), fmt_f64(r.current)]),
    )
}

pub fn parse_counts(text: &str, file: &str) -> Result<Vec<CountRow>> {
    let t = CsvTable::parse(text, file, &COUNTS_COLUMNS, &[])?;
    (0..t.len())
        .map(|i| {
            let c = CountRow { bias: t.f64(i, "bias_uA")?, cr: t.f64(i, "cr_hz")?, dcr: t.f64(i, "dcr_hz")? };
            if c.cr < 0.0 || c.dcr < 0.0 {
                return Err(t.at_row(i, Error::invalid(if c.cr < 0.0 { "cr_hz" } else { "dcr_hz" }, "must be >= 0")));
            }
            Ok(c)
        })
        .collect()
}

pub fn counts_csv(counts: &[CountRow]) -> String {
    write_csv(&COUNTS_COLUMNS, counts.iter().map(|c| vec![fmt_f64(c.bias), fmt_f64(c.cr), fmt_f64(c.dcr)]))
}

/// Detector table without count data; see [`load_detectors`] for the
/// directory layout that attaches `counts_<id>.csv`.
pub fn parse_detectors(text: &str, file: &str) -> Result<Vec<DetectorRecord>> {
    let t = CsvTable::parse(text, file, &DETECTOR_COLUMNS, &DETECTOR_OPTIONAL_COLUMNS)?;
    let mut out: Vec<DetectorRecord> = Vec::with_capacity(t.len());
    for i in 0..t.len() {
        let rec = DetectorRecord {
            id: t.string(i, "id")?,
            d0: t.f64(i, "d0_nm")?,
            fluence: t.f64(i, "fluence_per_nm2")?,
            width: t.f64(i, "width_nm")?,
            fill_factor: t.f64(i, "fill_factor")?,
            area_side: t.f64(i, "area_um")?,
            wire_length: t.opt_f64(i, "wire_length_um")?,
            i_sw: t.f64(i, "isw_uA")?,
            counts: Vec::new(),
            photon_rate: t.f64(i, "photon_rate_hz")?,
        };
        if out.iter().any(|d| d.id == rec.id) {
            return Err(t.at_row(i, Error::invalid("id", format!("duplicate detector id `{}`", rec.id))));
        }
        if rec.id.contains(['/', '\\']) || rec.id.starts_with('.') {
            return Err(t.at_row(i, Error::invalid("id", "ids are used in file names and may not contain path separators")));
        }
        rec.validate().map_err(|e| match e {
            Error::InvalidInput { field, reason } => {
                let col = field.rsplit(": ").next().unwrap_or(&field).to_string();
                t.at_row(i, Error::InvalidInput { field: col, reason })
            }
            other => other,
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn detectors_csv(detectors: &[DetectorRecord]) -> String {
    let with_length = detectors.iter().any(|d| d.wire_length.is_some());
    let mut header: Vec<&str> = DETECTOR_COLUMNS.to_vec();
    if with_length {
        header.push("wire_length_um");
    }
    write_csv(
        &header,
        detectors.iter().map(|d| {
            let mut row = vec![
                d.id.clone(),
                fmt_f64(d.d0),
                fmt_f64(d.fluence),
                fmt_f64(d.width),
                fmt_f64(d.fill_factor),
                fmt_f64(d.area_side),
                fmt_f64(d.i_sw),
                fmt_f64(d.photon_rate),
            ];
            if with_length {
                row.push(fmt_opt(d.wire_length));
            }
            row
        }),
    )
}

/// Loads `detectors.csv` and, for each detector, `counts_<id>.csv` from the
/// same directory when present. Returns the records and the files read.
pub fn load_detectors(path: &Path) -> Result<(Vec<DetectorRecord>, Vec<std::path::PathBuf>)> {
    let (file, dir) = if path.is_dir() { (path.join("detectors.csv"), path.to_path_buf()) } else {
        (path.to_path_buf(), path.parent().map(Path::to_path_buf).unwrap_or_default())
    };
    let mut files = vec![file.clone()];
    let mut dets = parse_detectors(&read_text(&file)?, &file.display().to_string())?;
    for d in &mut dets {
        let counts = dir.join(format!("counts_{}.csv", d.id));
        if counts.is_file() {
            d.counts = parse_counts(&read_text(&counts)?, &counts.display().to_string())?;
            d.validate()?;
            files.push(counts);
        }
    }
    Ok((dets, files))
}

pub fn parse_absorption(text: &str, file: &str) -> Result<AbsorptionTable> {
    let t = CsvTable::parse(text, file, &ABSORPTION_COLUMNS, &[])?;
    let rows = (0..t.len())
        .map(|i| {
            Ok(AbsorptionRow {
                d0: t.f64(i, "d0_nm")?,
                width: t.f64(i, "width_nm")?,
                width_sigma: t.f64(i, "width_sigma_nm")?,
                n: t.f64(i, "n")?,
                k: t.f64(i, "k")?,
                alpha_percent: t.f64(i, "alpha_percent")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    AbsorptionTable::new(rows)
}

pub fn absorption_csv(table: &AbsorptionTable) -> String {
    write_csv(
        &ABSORPTION_COLUMNS,
        table.rows.iter().map(|r| {
            vec![fmt_f64(r.d0), fmt_f64(r.width), fmt_f64(r.width_sigma), fmt_f64(r.n), fmt_f64(r.k), fmt_f64(r.alpha_percent)]
        }),
    )
}

/// Pre-irradiation measurements keyed by device id.
pub fn parse_anchors(text: &str, file: &str) -> Result<BTreeMap<String, f64>> {
    let t = CsvTable::parse(text, file, &ANCHOR_COLUMNS, &[])?;
    let mut out = BTreeMap::new();
    for i in 0..t.len() {
        let id = t.string(i, "id")?;
        let v = t.f64(i, "anchor_value")?;
        if out.insert(id.clone(), v).is_some() {
            return Err(t.at_row(i, Error::invalid("id", format!("duplicate id `{id}`"))));
        }
    }
    Ok(out)
}

pub fn anchors_csv(anchors: &BTreeMap<String, f64>) -> String {
    write_csv(&ANCHOR_COLUMNS, anchors.iter().map(|(k, v)| vec![k.clone(), fmt_f64(*v)]))
}

pub fn plan_csv(rows: &[PlanRow]) -> String {
    write_csv(
        &PLAN_COLUMNS,
        rows.iter().map(|r| {
            vec![
                r.id.clone(),
                fmt_f64(r.fluence_per_nm2),
                fmt_f64(r.predicted_metric),
                r.extrapolated.to_string(),
                r.warning.clone(),
            ]
        }),
    )
}

pub fn parse_plan(text: &str, file: &str) -> Result<Vec<PlanRow>> {
    let t = CsvTable::parse(text, file, &PLAN_COLUMNS, &[])?;
    (0..t.len())
        .map(|i| {
            Ok(PlanRow {
                id: t.string(i, "id")?,
                fluence_per_nm2: t.f64(i, "fluence_per_nm2")?,
                predicted_metric: t.opt_f64(i, "predicted_metric")?.unwrap_or(f64::NAN),
                extrapolated: t.boolean(i, "extrapolated")?,
                warning: t.cell(i, "warning").unwrap_or("").to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub fluence_per_nm2: f64,
    pub occupied_fraction: f64,
    pub stderr: f64,
}

pub fn trajectory_csv(rows: &[TrajectoryRow]) -> String {
    write_csv(
        &TRAJECTORY_COLUMNS,
        rows.iter().map(|r| vec![fmt_f64(r.fluence_per_nm2), fmt_f64(r.occupied_fraction), fmt_f64(r.stderr)]),
    )
}

pub fn parse_trajectory(text: &str, file: &str) -> Result<Vec<TrajectoryRow>> {
    let t = CsvTable::parse(text, file, &TRAJECTORY_COLUMNS, &[])?;
    (0..t.len())
        .map(|i| {
            Ok(TrajectoryRow {
                fluence_per_nm2: t.f64(i, "fluence_per_nm2")?,
                occupied_fraction: t.f64(i, "occupied_fraction")?,
                stderr: t.f64(i, "stderr")?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Data,
    Fit,
}

/// One point of a tidy plot-data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub series: String,
    pub kind: PointKind,
    pub x: f64,
    pub y: f64,
    pub y_err: Option<f64>,
}

pub fn plot_csv(points: &[PlotPoint]) -> String {
    write_csv(
        &PLOT_COLUMNS,
        points.iter().map(|p| {
            let kind = match p.kind {
                PointKind::Data => "data",
                PointKind::Fit => "fit",
            };
            vec![p.series.clone(), kind.to_string(), fmt_f64(p.x), fmt_f64(p.y), fmt_opt(p.y_err)]
        }),
    )
}

pub fn parse_plot(text: &str, file: &str) -> Result<Vec<PlotPoint>> {
    let t = CsvTable::parse(text, file, &PLOT_COLUMNS, &[])?;
    (0..t.len())
        .map(|i| {
            let kind = match t.string(i, "kind")?.as_str() {
                "data" => PointKind::Data,
                "fit" => PointKind::Fit,
                other => return Err(t.at_row(i, Error::invalid("kind", format!("`{other}` is not data/fit")))),
            };
            Ok(PlotPoint {
                series: t.string(i, "series")?,
                kind,
                x: t.f64(i, "x")?,
                y: t.f64(i, "y")?,
                y_err: t.opt_f64(i, "y_err")?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub label: String,
    pub unit: String,
    pub scale: Scale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub name: String,
    pub kind: PointKind,
    pub label: String,
}

/// Declarative description of one plot-data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub file: String,
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub series: Vec<SeriesSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlotSpec {
    pub schema_version: u32,
    pub figures: Vec<FigureSpec>,
}

/// Series declared in `points`, in first-appearance order.
pub fn series_of(points: &[PlotPoint]) -> Vec<SeriesSpec> {
    let mut out: Vec<SeriesSpec> = Vec::new();
    for p in points {
        if !out.iter().any(|s| s.name == p.series && s.kind == p.kind) {
            let label = match p.kind {
                PointKind::Data => p.series.clone(),
                PointKind::Fit => format!("{} (model)", p.series),
            };
            out.push(SeriesSpec { name: p.series.clone(), kind: p.kind, label });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of_file(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        Ok(InputDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Seconds since the Unix epoch; the only field allowed to differ
    /// between identical runs.
    pub timestamp: u64,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: ReportMeta,
    pub result: serde_json::Value,
    pub warnings: Vec<String>,
}

/// `SOURCE_DATE_EPOCH` when set, the current time otherwise.
pub fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

impl Report {
    pub fn new(command: &str, seed: Option<u64>, inputs: Vec<InputDigest>, result: serde_json::Value, warnings: Vec<String>) -> Self {
        Report {
            meta: ReportMeta {
                tool: "hedose".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.into(),
                timestamp: timestamp(),
                seed,
                inputs,
            },
            result,
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}
