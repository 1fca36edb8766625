//! Distribution specs written as `name(arg, ...)`:
//! `gaussian(mean, std)`, `uniform(lo, hi)`, `segment(theta)`,
//! `ring(modes, radius, std)`. An argument may be the sweep variable `t`.

use ganlab_core::distributions::{AnalyticDistribution, Gaussian1D, GaussianMixture2D, SegmentDistribution, Uniform1D};

use crate::error::{LabError, Result};

/// Parses `spec` from config field `field`, substituting `t` for the sweep variable.
pub fn parse(field: &str, spec: &str, t: Option<f64>) -> Result<AnalyticDistribution> {
    let bad = |reason: String| LabError::config(field, reason);
    let spec = spec.trim();
    let open = spec.find('(').ok_or_else(|| bad(format!("expected name(args), got `{spec}`")))?;
    if !spec.ends_with(')') {
        return Err(bad(format!("missing closing parenthesis in `{spec}`")));
    }
    let name = spec[..open].trim();
    let args = spec[open + 1..spec.len() - 1]
        .split(',')
        .map(|a| {
            let a = a.trim();
            if a == "t" {
                t.ok_or_else(|| bad("`t` is only allowed in sweep templates".into()))
            } else {
                a.parse::<f64>().map_err(|_| bad(format!("`{a}` is not a number")))
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(bad(format!("`{name}` takes {n} arguments, got {}", args.len())))
        }
    };
    let dist: AnalyticDistribution = match name {
        "gaussian" => {
            arity(2)?;
            Gaussian1D::new(args[0], args[1]).map_err(|e| bad(e.to_string()))?.into()
        }
        "uniform" => {
            arity(2)?;
            Uniform1D::new(args[0], args[1]).map_err(|e| bad(e.to_string()))?.into()
        }
        "segment" => {
            arity(1)?;
            SegmentDistribution::new(args[0]).map_err(|e| bad(e.to_string()))?.into()
        }
        "ring" => {
            arity(3)?;
            if args[0] < 1.0 || args[0].fract() != 0.0 {
                return Err(bad(format!("mode count must be a positive integer, got {}", args[0])));
            }
            GaussianMixture2D::ring(args[0] as usize, args[1], args[2]).map_err(|e| bad(e.to_string()))?.into()
        }
        other => return Err(bad(format!("unknown distribution `{other}`"))),
    };
    Ok(dist)
}
