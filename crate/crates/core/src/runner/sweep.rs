use super::config::RunConfig;
use super::run::{run_simulation, RunManifest, Termination, MANIFEST_FILE};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub const SWEEP_INDEX_FILE: &str = "sweep_index.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Epsilon,
    AlphaO,
    Beta,
    Mu,
    /// Multiplier on every initial amplitude.
    Amplitude,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Epsilon => "epsilon",
            SweepParameter::AlphaO => "alpha_o",
            SweepParameter::Beta => "beta",
            SweepParameter::Mu => "mu",
            SweepParameter::Amplitude => "amplitude",
        }
    }

    fn apply(self, config: &mut RunConfig, value: f64) {
        match self {
            SweepParameter::Epsilon => config.params.epsilon = value,
            SweepParameter::AlphaO => config.params.alpha_o = value,
            SweepParameter::Beta => config.params.beta = value,
            SweepParameter::Mu => config.params.mu = value,
            SweepParameter::Amplitude => config.scale_amplitude(value),
        }
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "epsilon" => SweepParameter::Epsilon,
            "alpha_o" => SweepParameter::AlphaO,
            "beta" => SweepParameter::Beta,
            "mu" => SweepParameter::Mu,
            "amplitude" => SweepParameter::Amplitude,
            _ => {
                return Err(Error::validation(
                    "axis",
                    format!("unknown parameter `{s}` (expected epsilon, alpha_o, beta, mu or amplitude)"),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl FromStr for SweepAxis {
    type Err = Error;

    /// Parses `name=v1,v2,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, values) = s
            .split_once('=')
            .ok_or_else(|| Error::validation("axis", format!("`{s}` is not of the form name=v1,v2")))?;
        let parameter = name.trim().parse()?;
        let values = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::validation("axis", format!("`{v}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            return Err(Error::validation("axis", "needs at least one value"));
        }
        Ok(SweepAxis { parameter, values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub workers: usize,
    /// Largest admissible number of grid points.
    pub max_points: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            workers: 1,
            max_points: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Completed,
    BlowUp,
    StepLimit,
    /// The run could not start or write its outputs.
    Failed,
}

impl From<Termination> for PointStatus {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Completed => PointStatus::Completed,
            Termination::BlowUp => PointStatus::BlowUp,
            Termination::StepLimit => PointStatus::StepLimit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub run_id: String,
    /// `(parameter name, value)` for every axis.
    pub parameters: Vec<(String, f64)>,
    /// Run directory relative to the sweep directory.
    pub directory: String,
    pub manifest: Option<String>,
    pub status: PointStatus,
    pub message: Option<String>,
    /// True when an existing manifest was reused.
    pub resumed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepIndex {
    pub base_run_id: String,
    pub axes: Vec<SweepAxis>,
    pub points: Vec<SweepPoint>,
}

/// Cartesian product of the axis values, first axis slowest.
fn grid_points(axes: &[SweepAxis]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Runs `base` at every point of the parameter grid under `dir`, one
/// subdirectory per point, and writes `sweep_index.json`.
///
/// Points whose directory already holds a manifest are not rerun. One failed
/// point does not stop the others.
pub fn run_sweep(base: &RunConfig, axes: &[SweepAxis], dir: &Path, options: &SweepOptions) -> Result<SweepIndex> {
    let points = grid_points(axes);
    if points.len() > options.max_points {
        return Err(Error::validation(
            "axis",
            format!(
                "sweep has {} points, more than the cap of {}",
                points.len(),
                options.max_points
            ),
        ));
    }
    let mut seen = std::collections::HashSet::new();
    for axis in axes {
        if !seen.insert(axis.parameter) {
            return Err(Error::validation("axis", format!("`{}` given twice", axis.parameter)));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let jobs: Vec<(RunConfig, SweepPoint)> = points
        .iter()
        .enumerate()
        .map(|(i, values)| {
            let mut config = base.clone();
            let mut parameters = Vec::with_capacity(axes.len());
            for (axis, &v) in axes.iter().zip(values) {
                axis.parameter.apply(&mut config, v);
                parameters.push((axis.parameter.name().to_string(), v));
            }
            let directory = format!("point_{i:04}");
            config.run_id = format!("{}_{directory}", base.run_id);
            let point = SweepPoint {
                run_id: config.run_id.clone(),
                parameters,
                directory,
                manifest: None,
                status: PointStatus::Failed,
                message: None,
                resumed: false,
            };
            (config, point)
        })
        .collect();

    let results: Vec<Mutex<Option<SweepPoint>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = options.workers.clamp(1, jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((config, point)) = jobs.get(i) else { break };
                let settled = run_point(config, point.clone(), &dir.join(&point.directory));
                *results[i].lock().expect("no worker panics while holding the lock") = Some(settled);
            });
        }
    });

    let index = SweepIndex {
        base_run_id: base.run_id.clone(),
        axes: axes.to_vec(),
        points: results
            .into_iter()
            .map(|m| m.into_inner().expect("lock not poisoned").expect("every job settles"))
            .collect(),
    };
    let path = dir.join(SWEEP_INDEX_FILE);
    let text = serde_json::to_string_pretty(&index).expect("index serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(index)
}

fn run_point(config: &RunConfig, mut point: SweepPoint, run_dir: &PathBuf) -> SweepPoint {
    let manifest_rel = format!("{}/{MANIFEST_FILE}", point.directory);
    if run_dir.join(MANIFEST_FILE).exists() {
        match RunManifest::read(run_dir) {
            Ok(m) => {
                point.status = m.termination.into();
                point.message = m.message;
                point.manifest = Some(manifest_rel);
                point.resumed = true;
                return point;
            }
            Err(e) => point.message = Some(format!("unreadable manifest, rerunning: {e}")),
        }
    }
    match run_simulation(config, run_dir) {
        Ok(m) => {
            point.status = m.termination.into();
            point.message = m.message;
            point.manifest = Some(manifest_rel);
        }
        Err(e) => {
            point.status = PointStatus::Failed;
            point.message = Some(e.to_string());
        }
    }
    point
}
