//! Gradient play on `min_x max_y xy`.

use std::path::Path;

use ganlab_core::dynamics::{simulate, GameState, UpdateRule};

use super::Outputs;
use crate::error::{LabError, Result};
use crate::params::{choice, paper, ParamDef, Params};
use crate::plot::PlotKind;
use crate::table::Table;

pub const HEADER: [&str; 4] = ["step", "x", "y", "radius"];

pub fn defaults() -> Vec<ParamDef> {
    vec![
        choice("x0", 1.0),
        choice("y0", 1.0),
        paper("eta", 0.1),
        choice("steps", 1000),
        paper("rule", "simultaneous"),
        choice("max_rows", 10_000),
    ]
}

pub fn rule(params: &Params) -> Result<UpdateRule> {
    match params.str("rule")? {
        "simultaneous" => Ok(UpdateRule::Simultaneous),
        "alternating" => Ok(UpdateRule::Alternating),
        other => Err(LabError::config("rule", format!("expected simultaneous or alternating, got `{other}`"))),
    }
}

pub fn run(params: &Params, out: &Path) -> Result<Outputs> {
    let start = GameState::new(params.f64("x0")?, params.f64("y0")?, params.f64("eta")?)?;
    let steps = params.usize("steps")?;
    let max_rows = params.usize("max_rows")?.max(2);
    let traj = simulate(start, steps, rule(params)?);
    // Keep every k-th state plus the last one when the run is long.
    let stride = steps.div_ceil(max_rows - 1).max(1);
    let mut t = Table::new(&HEADER);
    let n = traj.states.len();
    for (i, s) in traj.states.iter().enumerate() {
        if i % stride == 0 || i + 1 == n {
            t.push(vec![s.step.to_string(), fmt(s.x), fmt(s.y), fmt(s.radius())]);
        }
    }
    let mut o = Outputs::default();
    o.emit(out, "minimax_sim", &t, Some(PlotKind::Trajectory))?;
    Ok(o)
}

fn fmt(v: f64) -> String {
    crate::table::fmt_f64(v)
}
