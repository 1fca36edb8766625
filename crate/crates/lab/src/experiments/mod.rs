//! Built-in experiments. Each has a parameter table with defaults and a
//! `run` writing CSV and SVG files into the output directory.

use std::path::{Path, PathBuf};

use crate::error::{LabError, Result};
use crate::params::{ParamDef, Params};
use crate::plot::{plot_to, PlotKind};
use crate::table::Table;

pub mod divergence_sweep;
pub mod em_demo;
pub mod minimax_sim;
pub mod mode_collapse;
pub mod optimal_d;
pub mod parallel_lines;
pub mod train;
pub mod vanishing_gradient;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Experiment {
    DivergenceSweep,
    MinimaxSim,
    EmDemo,
    ParallelLines,
    OptimalD,
    VanishingGradient,
    ModeCollapse,
    Train,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::DivergenceSweep,
        Experiment::MinimaxSim,
        Experiment::EmDemo,
        Experiment::ParallelLines,
        Experiment::OptimalD,
        Experiment::VanishingGradient,
        Experiment::ModeCollapse,
        Experiment::Train,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DivergenceSweep => "divergence_sweep",
            Experiment::MinimaxSim => "minimax_sim",
            Experiment::EmDemo => "em_demo",
            Experiment::ParallelLines => "parallel_lines",
            Experiment::OptimalD => "optimal_d",
            Experiment::VanishingGradient => "vanishing_gradient",
            Experiment::ModeCollapse => "mode_collapse",
            Experiment::Train => "train",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn defaults(self) -> Vec<ParamDef> {
        match self {
            Experiment::DivergenceSweep => divergence_sweep::defaults(),
            Experiment::MinimaxSim => minimax_sim::defaults(),
            Experiment::EmDemo => em_demo::defaults(),
            Experiment::ParallelLines => parallel_lines::defaults(),
            Experiment::OptimalD => optimal_d::defaults(),
            Experiment::VanishingGradient => vanishing_gradient::defaults(),
            Experiment::ModeCollapse => mode_collapse::defaults(),
            Experiment::Train => train::defaults(),
        }
    }
}

/// Files written by a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub csvs: Vec<PathBuf>,
    pub plots: Vec<PathBuf>,
}

impl Outputs {
    /// Writes `table` to `<name>.csv` and, with a plot kind, `<name>.svg`.
    pub(crate) fn emit(&mut self, out: &Path, name: &str, table: &Table, kind: Option<PlotKind>) -> Result<()> {
        let csv = out.join(format!("{name}.csv"));
        table.write(&csv)?;
        if let Some(kind) = kind {
            let svg = out.join(format!("{name}.svg"));
            plot_to(&csv, kind, &svg)?;
            self.plots.push(svg);
        }
        self.csvs.push(csv);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifact {
    pub dir: PathBuf,
    pub manifest: PathBuf,
    pub outputs: Outputs,
}

pub const MANIFEST: &str = "manifest.json";

/// Writes the manifest, runs the experiment and checks every reported file exists.
pub fn run(experiment: Experiment, params: &Params, out: &Path) -> Result<RunArtifact> {
    std::fs::create_dir_all(out)?;
    let manifest = out.join(MANIFEST);
    std::fs::write(&manifest, serde_json::to_string_pretty(&params.manifest())? + "\n")?;
    let outputs = match experiment {
        Experiment::DivergenceSweep => divergence_sweep::run(params, out)?,
        Experiment::MinimaxSim => minimax_sim::run(params, out)?,
        Experiment::EmDemo => em_demo::run(params, out)?,
        Experiment::ParallelLines => parallel_lines::run(params, out)?,
        Experiment::OptimalD => optimal_d::run(params, out)?,
        Experiment::VanishingGradient => vanishing_gradient::run(params, out)?,
        Experiment::ModeCollapse => mode_collapse::run(params, out)?,
        Experiment::Train => train::run(params, out)?,
    };
    let missing: Vec<PathBuf> = outputs.csvs.iter().chain(&outputs.plots).filter(|p| !p.exists()).cloned().collect();
    if !missing.is_empty() {
        return Err(LabError::Missing(missing));
    }
    Ok(RunArtifact {
        dir: out.to_path_buf(),
        manifest,
        outputs,
    })
}

/// `points` evenly spaced values from `start` to `stop`, endpoints exact.
pub(crate) fn linspace(field: &str, start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    match points {
        0 => Err(LabError::config(field, "need at least one point")),
        1 => Ok(vec![start]),
        n => {
            let m = (n - 1) as f64;
            Ok((0..n).map(|i| (start * (m - i as f64) + stop * i as f64) / m).collect())
        }
    }
}
