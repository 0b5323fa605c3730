//! Figure bundles and parameter sweeps.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};
use crate::presets::{self, Panel};
use crate::runner::{
    run_scenario, summarize, write_csv_file, write_json, ScenarioRun, ScenarioSummary,
};

pub struct PanelRun {
    pub panel: String,
    pub variant: Option<&'static str>,
    pub csv: PathBuf,
    pub run: ScenarioRun,
}

/// Runs a list of panels concurrently, one CSV per panel variant.
pub fn run_panels(panels: &[Panel], out_dir: &Path) -> Result<Vec<PanelRun>> {
    let jobs: Vec<(&Panel, Option<&'static str>, &ScenarioConfig)> = panels
        .iter()
        .flat_map(|p| p.variants.iter().map(move |(v, c)| (p, *v, c)))
        .collect();
    jobs.par_iter()
        .map(|&(panel, variant, config)| {
            let scenario = config.validate()?;
            let run = run_scenario(&scenario)?;
            let csv = out_dir.join(format!("{}.csv", panel.stem(variant)));
            write_csv_file(&run, &csv)?;
            Ok(PanelRun {
                panel: panel.id.clone(),
                variant,
                csv,
                run,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct BundleSummary {
    pub id: String,
    pub panels: Vec<ScenarioSummary>,
}

/// Runs every panel of a figure (or a single panel) and writes the CSV bundle
/// and `<id>_summary.json` into `out_dir`.
pub fn reproduce_figure(id: &str, out_dir: &Path) -> Result<Vec<PanelRun>> {
    let panels = presets::resolve(id)?;
    let runs = run_panels(&panels, out_dir)?;
    let label = format!("fig{}", id.trim().trim_start_matches("fig"));
    let summary = BundleSummary {
        id: label.clone(),
        panels: runs
            .iter()
            .map(|r| summarize(&r.run, Some(&r.csv)))
            .collect(),
    };
    write_json(&summary, &out_dir.join(format!("{label}_summary.json")))?;
    Ok(runs)
}

/// `PARAM=lo:hi:n`, n ≥ 1 evenly spaced values including both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct Vary {
    pub param: String,
    pub values: Vec<f64>,
}

impl std::str::FromStr for Vary {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let bad =
            |why: &str| CliError::config("vary", format!("`{s}`: {why} (expected PARAM=lo:hi:n)"));
        let (param, range) = s.split_once('=').ok_or_else(|| bad("missing `=`"))?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range needs three fields"));
        }
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| bad("bad lower bound"))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| bad("bad upper bound"))?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad("bad count"))?;
        if n == 0 || !lo.is_finite() || !hi.is_finite() {
            return Err(bad("count must be positive and bounds finite"));
        }
        let values = (0..n)
            .map(|i| {
                if n == 1 {
                    lo
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect();
        Ok(Vary {
            param: param.trim().to_string(),
            values,
        })
    }
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub param: String,
    pub values: Vec<f64>,
    pub runs: Vec<ScenarioSummary>,
}

/// Runs one scenario per value, writing `<stem>_<param>_<i>.csv` next to `base_csv`.
pub fn sweep(config: &ScenarioConfig, vary: &Vary, base_csv: &Path) -> Result<Vec<PathBuf>> {
    let stem = base_csv
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sweep")
        .to_string();
    let configs: Vec<(PathBuf, ScenarioConfig)> = vary
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut c = config.clone();
            c.set_param(&vary.param, v)?;
            c.name = Some(format!("{stem}_{}_{i:03}", vary.param));
            let path = base_csv.with_file_name(format!("{stem}_{}_{i:03}.csv", vary.param));
            Ok((path, c))
        })
        .collect::<Result<_>>()?;
    let scenarios = configs
        .iter()
        .map(|(p, c)| Ok((p, c.validate()?)))
        .collect::<Result<Vec<_>>>()?;
    let summaries = scenarios
        .par_iter()
        .map(|(path, s)| {
            let run = run_scenario(s)?;
            write_csv_file(&run, path)?;
            Ok(summarize(&run, Some(path)))
        })
        .collect::<Result<Vec<_>>>()?;
    write_json(
        &SweepSummary {
            param: vary.param.clone(),
            values: vary.values.clone(),
            runs: summaries,
        },
        &base_csv.with_file_name(format!("{stem}_sweep.json")),
    )?;
    Ok(configs.into_iter().map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vary_parsing() {
        let v: Vary = "drive=0:1:5".parse().unwrap();
        assert_eq!(v.param, "drive");
        assert_eq!(v.values, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let one: Vary = "lambda=2:9:1".parse().unwrap();
        assert_eq!(one.values, vec![2.0]);
        for bad in ["drive", "drive=0:1", "drive=a:1:2", "drive=0:1:0"] {
            assert!(bad.parse::<Vary>().is_err(), "{bad}");
        }
    }
}
