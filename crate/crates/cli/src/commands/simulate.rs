//! Line positions and simulated transmission map of a configured experiment.

use spinres::hamiltonian::esr_line_positions;
use spinres::synth::{gen_map, linspace};

use super::{noise_spec, parse_range, positive};
use crate::{config, io, CliError, CliResult, SimulateEsrArgs};

pub const LINES_HEADER: [&str; 3] = ["label", "field_T", "status"];

pub(super) fn run(a: &SimulateEsrArgs) -> CliResult<()> {
    let exp = config::load(&a.config)?;
    positive("freq-hz", a.freq_hz)?;
    let noise = noise_spec(&a.noise)?;

    let lines = esr_line_positions(&exp.line_set(), a.freq_hz);
    let rows = lines.iter().map(|l| match &l.field {
        Ok(b) => vec![l.label.clone(), b.to_string(), "ok".to_string()],
        Err(e) => vec![l.label.clone(), String::new(), e.to_string()],
    });
    let table = a.out.join("lines.csv");
    io::write_table(&table, &LINES_HEADER, rows)?;
    println!("simulate-esr: {} lines written to {}", lines.len(), table.display());

    let Some(range) = &a.field_range else {
        return Ok(());
    };
    let (b_lo, b_hi) = parse_range("field-range-t", range)?;
    if exp.resonators.is_empty() {
        return Err(CliError::usage("a map needs at least one resonator in the configuration"));
    }
    let (f_lo, f_hi) = match &a.freq_range {
        Some(r) => parse_range("freq-range-hz", r)?,
        None => {
            let lo = exp.resonators.iter().map(|r| r.f_c - 10.0 * r.kappa()).fold(f64::INFINITY, f64::min);
            let hi = exp.resonators.iter().map(|r| r.f_c + 10.0 * r.kappa()).fold(f64::NEG_INFINITY, f64::max);
            (lo.max(0.0), hi)
        }
    };
    if a.field_points < 2 || a.freq_points < 2 {
        return Err(CliError::usage("map grids need at least 2 points"));
    }
    let map = gen_map(
        &exp.resonators,
        &exp.spin_sweeps()?,
        &linspace(b_lo, b_hi, a.field_points),
        &linspace(f_lo, f_hi, a.freq_points),
        &noise,
    )?;
    let path = a.out.join("map.csv");
    io::write_map(&path, &map)?;
    println!("simulate-esr: {} × {} map written to {}", a.field_points, a.freq_points, path.display());
    Ok(())
}
