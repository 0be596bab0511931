//! Synthetic datasets with a truth sidecar.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use spinres::fitlab::Model;
use spinres::spincore::{AxisKind, Resonator};
use spinres::synth::{gen_map, gen_trace, linspace, NoiseKind, SpinSweep};

use super::noise_spec;
use crate::{io, CliError, CliResult, GenArgs};

/// Parameter names of the `anticrossing` map model.
pub const MAP_PARAMS: [&str; 7] = ["f_c", "kappa_c", "kappa_i", "v", "gamma2", "b_cross", "slope"];

#[derive(Debug, Serialize)]
struct Grid {
    min: f64,
    max: f64,
    points: usize,
}

#[derive(Debug, Serialize)]
struct Noise {
    kind: &'static str,
    level: f64,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct Truth {
    model: String,
    params: BTreeMap<String, f64>,
    axis: &'static str,
    grid: Grid,
    #[serde(skip_serializing_if = "Option::is_none")]
    fields: Option<Grid>,
    noise: Noise,
}

fn parse_params(specs: &[String], names: &[String]) -> CliResult<Vec<f64>> {
    let mut given: BTreeMap<&str, f64> = BTreeMap::new();
    for s in specs {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--param expects name=value, got '{s}'")))?;
        let (k, v) = (k.trim(), v.trim());
        if !names.iter().any(|n| n == k) {
            return Err(CliError::usage(format!(
                "unknown parameter '{k}'; expected {}",
                names.join(", ")
            )));
        }
        let value: f64 = v
            .parse()
            .map_err(|_| CliError::usage(format!("parameter '{k}': '{v}' is not a number")))?;
        if given.insert(k, value).is_some() {
            return Err(CliError::usage(format!("parameter '{k}' given twice")));
        }
    }
    names
        .iter()
        .map(|n| {
            given
                .get(n.as_str())
                .copied()
                .ok_or_else(|| CliError::usage(format!("missing --param {n}=<value>")))
        })
        .collect()
}

fn noise_name(kind: NoiseKind) -> &'static str {
    match kind {
        NoiseKind::None => "none",
        NoiseKind::GaussianRelative => "gaussian_relative",
        NoiseKind::GaussianAbsolute => "gaussian_absolute",
    }
}

/// `dir/stem.truth.json` next to `data`.
pub fn sidecar_path(data: &Path) -> PathBuf {
    let stem = data.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    data.with_file_name(format!("{stem}.truth.json"))
}

pub(super) fn run(a: &GenArgs) -> CliResult<()> {
    let noise = noise_spec(&a.noise)?;
    if a.points < 2 || !(a.x_min < a.x_max) {
        return Err(CliError::usage("--x-min must be below --x-max with --points >= 2"));
    }
    let grid = linspace(a.x_min, a.x_max, a.points);
    let x_grid = Grid { min: a.x_min, max: a.x_max, points: a.points };
    let noise_doc = Noise { kind: noise_name(noise.kind), level: noise.level, seed: noise.seed };

    let truth = if a.model == "anticrossing" {
        let names: Vec<String> = MAP_PARAMS.iter().map(|s| s.to_string()).collect();
        let p = parse_params(&a.params, &names)?;
        let (b_lo, b_hi) = match (a.field_min, a.field_max) {
            (Some(lo), Some(hi)) if lo < hi && a.fields >= 2 => (lo, hi),
            _ => {
                return Err(CliError::usage(
                    "the anticrossing map needs --field-min-t < --field-max-t and --fields >= 2",
                ))
            }
        };
        let res = Resonator::new("gen", p[0], p[1], p[2])?;
        let sweep = SpinSweep { b_cross: p[5], f_cross: p[0], slope: p[6], gamma2: p[4], couplings: vec![p[3]] };
        let map = gen_map(&[res], &[sweep], &linspace(b_lo, b_hi, a.fields), &grid, &noise)?;
        io::write_map(&a.out, &map)?;
        Truth {
            model: a.model.clone(),
            params: names.into_iter().zip(p).collect(),
            axis: AxisKind::Frequency.name(),
            grid: x_grid,
            fields: Some(Grid { min: b_lo, max: b_hi, points: a.fields }),
            noise: noise_doc,
        }
    } else {
        let model = Model::parse(&a.model, &grid).map_err(|e| CliError::usage(e.to_string()))?;
        let names = model.param_names();
        let p = parse_params(&a.params, &names)?;
        let kind = match &a.axis {
            Some(s) => AxisKind::parse(s).ok_or_else(|| CliError::usage(format!("unknown axis kind '{s}'")))?,
            None if model == Model::Exponential => AxisKind::Time,
            None => AxisKind::Frequency,
        };
        let trace = gen_trace(model, &p, kind, &grid, &noise)?;
        io::write_trace(&a.out, &trace)?;
        Truth {
            model: model.to_string(),
            params: names.into_iter().zip(p).collect(),
            axis: kind.name(),
            grid: x_grid,
            fields: None,
            noise: noise_doc,
        }
    };
    let side = sidecar_path(&a.out);
    io::write_json(&side, &truth)?;
    println!("gen: {} written to {} (truth in {})", truth.model, a.out.display(), side.display());
    Ok(())
}
