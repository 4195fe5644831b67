//! Long-format `(x, y, series)` tables for external plotting.

use crate::failure::Failure;
use crate::output::META_FILE;
use std::collections::HashMap;
use std::path::{Path, PathBuf};

/// Figure id, source table, and the columns used for `x`, `y` and the series label.
struct Recipe {
    id: &'static str,
    table: &'static str,
    x: &'static str,
    y: &'static str,
    series: Series,
}

enum Series {
    Fixed(&'static str),
    Column(&'static str, &'static str),
}

const RECIPES: &[Recipe] = &[
    Recipe { id: "fig-1", table: "portrait", x: "x", y: "y", series: Series::Column("phi", "phi=") },
    Recipe { id: "fig-NdepScaling", table: "scaling", x: "n", y: "alpha", series: Series::Column("series", "") },
    Recipe { id: "fig-sftT1", table: "spectrum", x: "s", y: "abs_rho", series: Series::Fixed("quantum") },
    Recipe { id: "fig-sftT1", table: "semiclassical", x: "s", y: "abs_rho", series: Series::Fixed("semiclassical") },
    Recipe { id: "fig-sftT1", table: "orbits", x: "action", y: "amplitude", series: Series::Fixed("orbit") },
    Recipe { id: "fig-jcut", table: "heights", x: "j_cut", y: "height", series: Series::Column("n", "N=") },
    Recipe { id: "fig-delta", table: "delta", x: "j", y: "delta", series: Series::Fixed("delta") },
    Recipe { id: "fig-formfactor", table: "formfactor", x: "T", y: "K", series: Series::Column("N", "N=") },
    Recipe { id: "fig-formfactor", table: "formfactor", x: "T", y: "prediction", series: Series::Column("N", "prediction N=") },
];

pub fn figure_ids() -> Vec<&'static str> {
    let mut ids: Vec<&str> = RECIPES.iter().map(|r| r.id).collect();
    ids.dedup();
    ids
}

/// Writes `figure-<id>.csv` into `run_dir` from whichever source tables of the recipe exist.
pub fn export_figure_data(run_dir: &Path, figure_id: &str) -> Result<PathBuf, Failure> {
    let recipes: Vec<&Recipe> = RECIPES.iter().filter(|r| r.id == figure_id).collect();
    if recipes.is_empty() {
        return Err(Failure::Validation(format!("unknown figure `{figure_id}`; known: {}", figure_ids().join(", "))));
    }
    if !run_dir.join(META_FILE).exists() {
        return Err(Failure::Validation(format!("missing artifacts: {} has no {META_FILE}", run_dir.display())));
    }
    let mut out = csv::Writer::from_path(run_dir.join(format!("figure-{figure_id}.csv")))?;
    out.write_record(["x", "y", "series"])?;
    let mut found = false;
    for r in recipes {
        let path = run_dir.join(format!("{}.csv", r.table));
        if !path.exists() {
            continue;
        }
        found = true;
        let mut rd = csv::Reader::from_path(&path)?;
        let cols: HashMap<String, usize> = rd.headers()?.iter().enumerate().map(|(k, h)| (h.to_string(), k)).collect();
        let col = |name: &str| cols.get(name).copied().ok_or_else(|| Failure::Validation(format!("{}: missing column `{name}`", path.display())));
        let (xi, yi) = (col(r.x)?, col(r.y)?);
        let si = match r.series {
            Series::Column(c, _) => Some(col(c)?),
            Series::Fixed(_) => None,
        };
        for rec in rd.records() {
            let rec = rec?;
            let label = match (&r.series, si) {
                (Series::Column(_, prefix), Some(k)) => format!("{prefix}{}", &rec[k]),
                (Series::Fixed(s), _) => s.to_string(),
                _ => unreachable!(),
            };
            out.write_record([&rec[xi], &rec[yi], label.as_str()])?;
        }
    }
    out.flush()?;
    if !found {
        let _ = std::fs::remove_file(run_dir.join(format!("figure-{figure_id}.csv")));
        let tables: Vec<&str> = RECIPES.iter().filter(|r| r.id == figure_id).map(|r| r.table).collect();
        return Err(Failure::Validation(format!("missing artifacts: {figure_id} needs one of {}.csv in {}", tables.join(".csv, "), run_dir.display())));
    }
    Ok(run_dir.join(format!("figure-{figure_id}.csv")))
}
