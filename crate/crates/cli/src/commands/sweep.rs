//! g-factor and coupling versus rotation angle.

use spinres::coupling::{collective_coupling, g_ac, g_dc, single_spin_coupling, AnisotropyPlane};

use crate::svg::{line_plot, Series};
use crate::{io, CliError, CliResult, SweepAngleArgs};

pub const HEADER: [&str; 5] = ["phi_deg", "g", "g1", "g_times_g1", "v_hz"];

pub(super) fn run(a: &SweepAngleArgs) -> CliResult<()> {
    let plane = AnisotropyPlane::new(a.gy, a.gz)?;
    let mut rows = Vec::with_capacity(a.max_deg as usize + 1);
    let (mut phis, mut gs, mut g1s) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..=a.max_deg {
        let phi_deg = k as f64;
        let phi = phi_deg.to_radians();
        let g = g_dc(&plane, phi);
        let g1 = g_ac(&plane, phi)?;
        let v = collective_coupling(single_spin_coupling(g1, a.b1)?, a.n_spins, a.polarization)?;
        rows.push(vec![phi_deg.to_string(), g.to_string(), g1.to_string(), (g * g1).to_string(), v.to_string()]);
        phis.push(phi_deg);
        gs.push(g);
        g1s.push(g1);
    }
    io::write_table(&a.out, &HEADER, rows)?;
    if let Some(path) = &a.svg {
        let svg = line_plot(
            "g-factors vs rotation angle",
            "phi [deg]",
            "g",
            &[
                Series { label: "g (DC)", x: &phis, y: &gs, points: false },
                Series { label: "g1 (AC)", x: &phis, y: &g1s, points: false },
            ],
        );
        std::fs::write(path, svg).map_err(|e| CliError::io(path, e))?;
    }
    println!("sweep-angle: {} angles written to {}", phis.len(), a.out.display());
    Ok(())
}
