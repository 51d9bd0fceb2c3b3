use super::config::RunConfig;
use crate::diagnostics::{DiagnosticsRecord, Snapshot};
use crate::error::{Error, Result};
use crate::models::{rhs_unidirectional_f, rhs_unidirectional_u, ModelKind, ModelParams, WaveState};
use crate::spectral::{FourierGrid, SpectralField};
use crate::timestepper::{integrate, lift_second_order, pack_wave_state, unpack_wave_state, SecondOrderSystem};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const CONFIG_ECHO_FILE: &str = "config.toml";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const SNAPSHOT_INDEX_FILE: &str = "snapshots/index.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    BlowUp,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the run directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub wall_time_s: f64,
    pub termination: Termination,
    /// Last time reached by the integration.
    pub final_time: f64,
    pub message: Option<String>,
    pub time_window: (f64, f64),
    pub snapshot_times: Vec<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path,
            message: e.to_string(),
        })
    }

    /// Files that are missing or whose checksum no longer matches.
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| match fs::read(dir.join(&f.path)) {
                Ok(bytes) => sha256_hex(&bytes) != f.sha256,
                Err(_) => true,
            })
            .map(|f| f.path.clone())
            .collect()
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// The time integrator's view of a model: a flat coefficient vector and its
/// derivative.
enum Evolution {
    Wave(SecondOrderSystem),
    Elevation(ModelParams),
    Slope(ModelParams),
}

impl Evolution {
    fn new(grid: &Arc<FourierGrid>, params: &ModelParams) -> Result<Self> {
        Ok(match params.model {
            ModelKind::BidirectionalFull | ModelKind::BidirectionalReduced => {
                Evolution::Wave(lift_second_order(grid, params)?)
            }
            ModelKind::UnidirectionalF => Evolution::Elevation(*params),
            ModelKind::UnidirectionalU => Evolution::Slope(*params),
        })
    }

    fn rhs(&self, grid: &Arc<FourierGrid>, y: &[Complex64], dy: &mut [Complex64]) -> Result<()> {
        match self {
            Evolution::Wave(sys) => sys.eval_flat(y, dy),
            Evolution::Elevation(p) => {
                let f = SpectralField::from_coefficients(grid, y.to_vec())?;
                dy.copy_from_slice(rhs_unidirectional_f(&f, p)?.coefficients());
                Ok(())
            }
            Evolution::Slope(p) => {
                let u = SpectralField::from_coefficients(grid, y.to_vec())?;
                dy.copy_from_slice(rhs_unidirectional_u(&u, p)?.coefficients());
                Ok(())
            }
        }
    }
}

/// Owned state decoded from the flat vector.
enum State {
    Wave(WaveState),
    Field(SpectralField),
}

impl State {
    fn decode(model: ModelKind, grid: &Arc<FourierGrid>, y: &[Complex64]) -> Result<Self> {
        if model.is_bidirectional() {
            Ok(State::Wave(unpack_wave_state(grid, y)?))
        } else {
            Ok(State::Field(SpectralField::from_coefficients(grid, y.to_vec())?))
        }
    }

    fn view(&self, model: ModelKind) -> Snapshot<'_> {
        match (self, model) {
            (State::Wave(w), _) => Snapshot::Wave(w),
            (State::Field(f), ModelKind::UnidirectionalU) => Snapshot::Slope(f),
            (State::Field(f), _) => Snapshot::Elevation(f),
        }
    }
}

/// Output instants: diagnostics rows every `output_stride` and profile
/// snapshots at `snapshots + 1` uniform times, merged.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    record: bool,
    snapshot: bool,
}

fn schedule(config: &RunConfig) -> Vec<Event> {
    let tf = config.t_final;
    let merge_tol = 1e-9 * tf;
    let n_rows = (tf / config.output_stride - 1e-9).ceil() as usize;
    let mut events: Vec<Event> = (0..=n_rows)
        .map(|i| Event {
            time: (i as f64 * config.output_stride).min(tf),
            record: true,
            snapshot: false,
        })
        .collect();
    for j in 0..=config.snapshots {
        let time = tf * j as f64 / config.snapshots as f64;
        match events.iter_mut().find(|e| (e.time - time).abs() <= merge_tol) {
            Some(e) => e.snapshot = true,
            None => events.push(Event {
                time,
                record: false,
                snapshot: true,
            }),
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    events
}

struct Outputs {
    dir: PathBuf,
    grid: Arc<FourierGrid>,
    model: ModelKind,
    params: ModelParams,
    config: RunConfig,
    diagnostics: Option<csv::Writer<fs::File>>,
    snapshot_index: Vec<(String, f64)>,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path, config: &RunConfig, grid: &Arc<FourierGrid>) -> Result<Self> {
        fs::create_dir_all(dir.join(SNAPSHOT_DIR)).map_err(|e| Error::io(dir.join(SNAPSHOT_DIR), e))?;
        let echo = dir.join(CONFIG_ECHO_FILE);
        fs::write(&echo, config.to_toml()).map_err(|e| Error::io(&echo, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            grid: Arc::clone(grid),
            model: config.model,
            params: config.model_params(),
            config: config.clone(),
            diagnostics: None,
            snapshot_index: Vec::new(),
            files: vec![CONFIG_ECHO_FILE.to_string()],
        })
    }

    fn record(&mut self, time: f64, state: &State) -> Result<()> {
        let rec = DiagnosticsRecord::compute(time, state.view(self.model), &self.params, &self.config.diagnostics)?;
        let path = self.dir.join(DIAGNOSTICS_FILE);
        if self.diagnostics.is_none() {
            let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
            w.write_record(rec.csv_header()).map_err(|e| csv_error(&path, e))?;
            self.diagnostics = Some(w);
            self.files.push(DIAGNOSTICS_FILE.to_string());
        }
        let w = self.diagnostics.as_mut().expect("opened above");
        w.write_record(rec.csv_values().iter().map(|v| format_value(*v)))
            .map_err(|e| csv_error(&path, e))
    }

    fn snapshot(&mut self, time: f64, state: &State) -> Result<()> {
        let name = format!("{SNAPSHOT_DIR}/snapshot_{:04}.csv", self.snapshot_index.len());
        let path = self.dir.join(&name);
        let view = state.view(self.model);
        let (header, columns): (Vec<&str>, Vec<Vec<f64>>) = match view {
            Snapshot::Wave(w) => (
                vec!["x", "f", "f_t", "u"],
                vec![w.f.to_physical(), w.f_t.to_physical(), view.profile().to_physical()],
            ),
            Snapshot::Elevation(f) => (vec!["x", "f", "u"], vec![f.to_physical(), view.profile().to_physical()]),
            Snapshot::Slope(u) => (vec!["x", "u", "f"], vec![u.to_physical(), view.elevation().to_physical()]),
        };
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(&header).map_err(|e| csv_error(&path, e))?;
        for (j, x) in self.grid.points().into_iter().enumerate() {
            let row = std::iter::once(x).chain(columns.iter().map(|c| c[j]));
            w.write_record(row.map(format_value)).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        self.snapshot_index.push((name.clone(), time));
        self.files.push(name);
        Ok(())
    }

    fn finish(mut self) -> Result<Vec<FileEntry>> {
        if let Some(mut w) = self.diagnostics.take() {
            w.flush().map_err(|e| Error::io(self.dir.join(DIAGNOSTICS_FILE), e))?;
        }
        let path = self.dir.join(SNAPSHOT_INDEX_FILE);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(["file", "time"]).map_err(|e| csv_error(&path, e))?;
        for (name, time) in &self.snapshot_index {
            let file = name.trim_start_matches(&format!("{SNAPSHOT_DIR}/")).to_string();
            w.write_record([file, format_value(*time)]).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        self.files.push(SNAPSHOT_INDEX_FILE.to_string());
        self.files
            .iter()
            .map(|name| {
                let p = self.dir.join(name);
                let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
                Ok(FileEntry {
                    path: name.clone(),
                    sha256: sha256_hex(&bytes),
                    bytes: bytes.len() as u64,
                })
            })
            .collect()
    }
}

/// Shortest round-trip representation.
pub(crate) fn format_value(v: f64) -> String {
    format!("{v:e}")
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// Runs one configuration into `dir`, writing the diagnostics table, profile
/// snapshots, a config echo and the manifest.
///
/// An integration failure is not an error: everything up to the failure time
/// is written and the manifest records the reason.
pub fn run_simulation(config: &RunConfig, dir: &Path) -> Result<RunManifest> {
    let started = Instant::now();
    let config = config.clone().validated()?;
    let grid = config.grid()?;
    let params = config.model_params();
    let evolution = Evolution::new(&grid, &params)?;
    let (data, velocity) = config.initial_fields(&grid)?;
    let mut y = if config.model.is_bidirectional() {
        pack_wave_state(&WaveState::new(data, velocity)?)
    } else {
        data.into_coefficients()
    };

    let mut out = Outputs::new(dir, &config, &grid)?;
    let events = schedule(&config);
    let mut step = config.step;
    let mut t = 0.0;
    let mut termination = Termination::Completed;
    let mut message = None;
    let mut accepted = 0;
    let mut rejected = 0;

    for ev in &events {
        if ev.time > t {
            let run = integrate(
                |_, y, dy| evolution.rhs(&grid, y, dy),
                &y,
                (t, ev.time),
                &step,
                |_, _| {},
            );
            match run {
                Ok(run) => {
                    accepted += run.accepted();
                    rejected += run.rejected;
                    step.initial_dt = run.next_dt;
                    y = run.state;
                    t = ev.time;
                }
                Err(e) if e.is_integration_failure() => {
                    let (time, state) = match e {
                        Error::BlowUp { time, ref state, .. } | Error::StepLimit { time, ref state, .. } => {
                            (time, state.clone())
                        }
                        _ => unreachable!("checked by is_integration_failure"),
                    };
                    termination = match e {
                        Error::BlowUp { .. } => Termination::BlowUp,
                        _ => Termination::StepLimit,
                    };
                    message = Some(e.to_string());
                    if time > t {
                        let s = State::decode(config.model, &grid, &state)?;
                        out.record(time, &s)?;
                        out.snapshot(time, &s)?;
                    }
                    t = time;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let state = State::decode(config.model, &grid, &y)?;
        if ev.record {
            out.record(ev.time, &state)?;
        }
        if ev.snapshot {
            out.snapshot(ev.time, &state)?;
        }
    }

    let snapshot_times = out.snapshot_index.iter().map(|s| s.1).collect();
    let files = out.finish()?;
    let manifest = RunManifest {
        run_id: config.run_id.clone(),
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        time_window: (0.0, config.t_final),
        config,
        wall_time_s: started.elapsed().as_secs_f64(),
        termination,
        final_time: t,
        message,
        snapshot_times,
        accepted_steps: accepted,
        rejected_steps: rejected,
        files,
    };
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::config::parse_config;

    fn config(extra: &str) -> RunConfig {
        let text = format!(
            r#"
run_id = "t"
model = "unidirectional_u"
t_final = 0.2
output_stride = 0.05
snapshots = 4
[params]
epsilon = 1.0
alpha_o = 1.0
beta = 1.0
[grid]
n_points = 32
{extra}
"#
        );
        parse_config(&text, Path::new("mem")).unwrap()
    }

    #[test]
    fn schedule_merges_rows_and_snapshots() {
        let c = config("");
        let ev = schedule(&c);
        assert_eq!(ev.len(), 5);
        assert!(ev.iter().all(|e| e.record && e.snapshot));
        assert_eq!(ev.last().unwrap().time, 0.2);
    }

    #[test]
    fn zero_data_run_completes_with_zero_series() {
        let dir = tempfile::tempdir().unwrap();
        let m = run_simulation(&config(""), dir.path()).unwrap();
        assert_eq!(m.termination, Termination::Completed);
        assert!(m.verify(dir.path()).is_empty());
        let text = fs::read_to_string(dir.path().join(DIAGNOSTICS_FILE)).unwrap();
        let rows: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(rows.len(), 5);
        for row in rows {
            let vals: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
            assert!(vals[1..].iter().all(|v| *v == 0.0), "{row}");
        }
    }
}
