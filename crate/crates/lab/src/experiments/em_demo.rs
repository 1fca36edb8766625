//! Earth mover's distance between two dirt piles, by the running-surplus
//! recurrence and by exhaustive transport-plan search.

use std::path::Path;

use ganlab_core::distributions::Histogram;
use ganlab_core::divergences::{em_bruteforce, em_recurrence, BRUTEFORCE_MAX_MASS};

use super::Outputs;
use crate::error::{LabError, Result};
use crate::params::{paper, ParamDef, Params};
use crate::plot::PlotKind;
use crate::table::{fmt_f64, Table};

pub const HEADER: [&str; 5] = ["i", "p", "q", "delta", "w"];

pub fn defaults() -> Vec<ParamDef> {
    vec![paper("p", vec![3, 2, 1, 4]), paper("q", vec![1, 2, 4, 3])]
}

fn piles(params: &Params, key: &str) -> Result<Vec<u32>> {
    params
        .usize_list(key)?
        .into_iter()
        .map(|v| u32::try_from(v).map_err(|_| LabError::config(key, "pile too large")))
        .collect()
}

pub fn run(params: &Params, out: &Path) -> Result<Outputs> {
    let p = piles(params, "p")?;
    let q = piles(params, "q")?;
    let rec = em_recurrence(&Histogram::from_counts(&p), &Histogram::from_counts(&q))?;
    let mut t = Table::new(&HEADER);
    let mut w = 0.0;
    for (i, d) in rec.deltas.iter().enumerate() {
        w += d.abs();
        t.push(vec![
            (i + 1).to_string(),
            p[i].to_string(),
            q[i].to_string(),
            fmt_f64(*d),
            fmt_f64(w),
        ]);
    }
    let mut o = Outputs::default();
    o.emit(out, "em_demo", &t, Some(PlotKind::EarthMover))?;

    let total: u32 = p.iter().sum();
    if total <= BRUTEFORCE_MAX_MASS {
        let (cost, plan) = em_bruteforce(&p, &q)?;
        let mut pt = Table::new(&["from", "to", "amount", "cost"]);
        for m in &plan.moves {
            pt.push(vec![m.from.to_string(), m.to.to_string(), fmt_f64(m.amount), fmt_f64(cost)]);
        }
        o.emit(out, "em_plan", &pt, None)?;
    }
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ConfigFile;

    #[test]
    fn default_piles_end_at_five() {
        let dir = tempfile::tempdir().unwrap();
        let p = Params::resolve("em_demo", &defaults(), &ConfigFile::default(), Some(1)).unwrap();
        run(&p, dir.path()).unwrap();
        let t = Table::read(&dir.path().join("em_demo.csv")).unwrap();
        assert_eq!(t.column_f64("delta").unwrap(), vec![2.0, 2.0, -1.0, 0.0]);
        assert_eq!(t.rows.last().unwrap()[4], "5");
        let plan = Table::read(&dir.path().join("em_plan.csv")).unwrap();
        assert!(plan.column_f64("cost").unwrap().iter().all(|&c| c == 5.0));
    }

    #[test]
    fn unequal_totals_fail() {
        let dir = tempfile::tempdir().unwrap();
        let f = ConfigFile::from_toml("q = [1, 1, 1, 1]").unwrap();
        let p = Params::resolve("em_demo", &defaults(), &f, Some(1)).unwrap();
        assert!(matches!(run(&p, dir.path()), Err(LabError::Numeric(_))));
    }
}
