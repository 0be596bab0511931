use super::*;
use crate::spincore::constants::{H, MU_B};
use crate::spincore::NuclearSpin;

fn site1() -> GTensor {
    GTensor::diagonal(0.0, 1.5, 14.8).unwrap()
}

fn yz(phi: f64) -> Vector3<f64> {
    Vector3::new(0.0, phi.cos(), phi.sin())
}

/// Independent closed forms for rotation about the g-tensor x axis.
fn g_closed(gy: f64, gz: f64, phi: f64) -> f64 {
    (gy * gy * phi.cos().powi(2) + gz * gz * phi.sin().powi(2)).sqrt()
}

fn er167(a_perp: f64, a_par: f64, q: f64) -> SpinSpecies {
    let frame = Matrix3::identity();
    let a = axial_tensor(a_perp, a_par, &frame);
    let qt = Matrix3::from_diagonal(&Vector3::new(-q / 2.0, -q / 2.0, q));
    SpinSpecies::new(
        "167Er",
        GTensor::diagonal(1.5, 1.5, 14.8).unwrap(),
        NuclearSpin::from_twice(7),
        a,
        qt,
        0.2295,
    )
    .unwrap()
}

#[test]
fn zeeman_only_eigenvalues() {
    let sp = SpinSpecies::electronic("S1", site1());
    let model = HamiltonianModel::new(sp, Vector3::new(0.0, 0.0, 0.1)).unwrap();
    let es = eigensystem(&build_hamiltonian(&model).unwrap()).unwrap();
    let expect = 14.8 * 9.2740100783e-24 * 0.1 / (2.0 * 6.62607015e-34);
    assert!((es.values[1] - expect).abs() < 1e-6 * expect);
    assert!((es.values[0] + expect).abs() < 1e-6 * expect);
    assert!((expect - 10.357e9).abs() < 1e6);
}

#[test]
fn no_interactions_gives_zero_matrix() {
    let sp = SpinSpecies::new(
        "x",
        site1(),
        NuclearSpin::from_twice(7),
        Matrix3::zeros(),
        Matrix3::zeros(),
        1.0,
    )
    .unwrap();
    let model = HamiltonianModel::new(sp, Vector3::zeros()).unwrap();
    let h = build_hamiltonian(&model).unwrap();
    assert_eq!(h.nrows(), 16);
    assert!(h.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
}

#[test]
fn er167_is_sixteen_dimensional_and_hermitian() {
    let model = HamiltonianModel::new(er167(1e8, 9e8, 2e7), Vector3::new(0.02, 0.1, 0.2))
        .unwrap()
        .with_nuclear_g(-0.1618);
    let h = build_hamiltonian(&model).unwrap();
    assert_eq!((h.nrows(), h.ncols()), (16, 16));
    let norm = h.norm();
    assert!((&h - h.adjoint()).norm() <= 1e-12 * norm);
    let es = eigensystem(&h).unwrap();
    assert!(reconstruction_error(&h, &es) <= 1e-9 * norm);
}

#[test]
fn capacity_limit() {
    let big = |two_i| {
        SpinSpecies::new(
            "x",
            site1(),
            NuclearSpin::from_twice(two_i),
            Matrix3::zeros(),
            Matrix3::zeros(),
            1.0,
        )
        .unwrap()
    };
    assert!(HamiltonianModel::new(big(31), Vector3::zeros()).is_ok());
    assert!(matches!(
        HamiltonianModel::new(big(32), Vector3::zeros()),
        Err(Error::Capacity { dim: 66, max: 64 })
    ));
}

#[test]
fn g_effective_cases() {
    let g = site1();
    assert!((g_effective(&g, &Vector3::z()).unwrap() - 14.8).abs() < 1e-14);
    for k in 0..181 {
        let phi = (k as f64).to_radians();
        let ge = g_effective(&g, &yz(phi)).unwrap();
        let expect = g_closed(1.5, 14.8, phi);
        assert!((ge - expect).abs() <= 1e-12 * expect, "phi={k}");
    }
    let iso = GTensor::isotropic(2.0).unwrap();
    let n = Vector3::new(0.3, -0.4, 0.5).normalize();
    assert!((g_effective(&iso, &n).unwrap() - 2.0).abs() < 1e-15);
    assert!(g_effective(&iso, &Vector3::new(1.0, 1.0, 0.0)).is_err());
}

#[test]
fn single_line_matches_closed_forms_on_x_rotation() {
    let sp = SpinSpecies::electronic("S1", site1());
    let b = 0.25;
    for k in 0..181 {
        let phi = (k as f64).to_radians();
        let model = HamiltonianModel::new(sp.clone(), yz(phi) * b).unwrap();
        let ac = yz(phi + std::f64::consts::FRAC_PI_2);
        let lines = transitions(&model, &ac, (1.0, 1e12)).unwrap();
        assert_eq!(lines.len(), 1);
        let g = g_closed(1.5, 14.8, phi);
        let g1 = 1.5 * 14.8 / g;
        let g_eng = lines[0].freq / (MU_B * b / H);
        let g1_eng = 2.0 * H * lines[0].element / MU_B;
        assert!((g_eng - g).abs() <= 1e-10 * g, "g at {k}");
        assert!((g1_eng - g1).abs() <= 1e-10 * g1, "g1 at {k}");
        assert!((g_eng * g1_eng - 1.5 * 14.8).abs() <= 1e-10 * 22.2);
        assert_eq!(lines[0].kind, LineKind::Electronic);
    }
}

#[test]
fn g_ac_effective_matches_engine_element() {
    let g = GTensor::new([0.4, 2.1, 9.0], [0.3, 1.1, -0.7]).unwrap();
    let sp = SpinSpecies::electronic("t", g.clone());
    let dc = Vector3::new(0.2, -0.5, 0.8).normalize();
    let ac = Vector3::new(0.9, 0.1, 0.3).normalize();
    let model = HamiltonianModel::new(sp, dc * 0.2).unwrap();
    let lines = transitions(&model, &ac, (1.0, 1e12)).unwrap();
    let g1 = g_ac_effective(&g, &dc, &ac).unwrap();
    let g1_eng = 2.0 * H * lines[0].element / MU_B;
    assert!((g1 - g1_eng).abs() <= 1e-10 * g1);
    for k in 0..=90 {
        let phi = (k as f64).to_radians();
        let g1 = g_ac_effective(&site1(), &yz(phi), &yz(phi + std::f64::consts::FRAC_PI_2)).unwrap();
        assert!((g1 - 1.5 * 14.8 / g_closed(1.5, 14.8, phi)).abs() <= 1e-10 * g1);
    }
    let flat = GTensor::diagonal(0.0, 1.0, 1.0).unwrap();
    assert!(g_ac_effective(&flat, &Vector3::x(), &Vector3::y()).is_err());
}

#[test]
fn hyperfine_free_lines_are_degenerate() {
    let sp = SpinSpecies::new(
        "167Er",
        site1(),
        NuclearSpin::from_twice(7),
        Matrix3::zeros(),
        Matrix3::zeros(),
        0.23,
    )
    .unwrap();
    let model = HamiltonianModel::new(sp, Vector3::new(0.0, 0.0, 0.02)).unwrap();
    let lines = transitions(&model, &Vector3::y(), (1e9, 1e11)).unwrap();
    assert_eq!(lines.len(), 8);
    let f0 = lines[0].freq;
    for l in &lines {
        assert!((l.freq - f0).abs() < 1e-6 * f0);
        assert_eq!(l.delta_mi, 0);
        assert_eq!(l.kind, LineKind::HyperfineHf);
        assert!(!l.ambiguous);
    }
}

#[test]
fn hf_lines_stronger_than_q_lines() {
    // field tilted off the hyperfine axis so that nuclear-flip lines acquire weight
    let tilt = 40f64.to_radians();
    let b0 = Vector3::new(tilt.sin(), 0.0, tilt.cos()) * 0.05;
    let model = HamiltonianModel::new(er167(1.2e8, 9e8, 1.5e7), b0).unwrap();
    let lines = transitions(&model, &Vector3::y(), (2e9, 1.5e10)).unwrap();

    let hf: Vec<_> = lines.iter().filter(|l| l.kind == LineKind::HyperfineHf).collect();
    let q: Vec<_> = lines.iter().filter(|l| l.kind == LineKind::QuadrupoleQ).collect();
    assert_eq!(hf.len(), 8);
    assert!(!q.is_empty());
    let min_hf = hf.iter().map(|l| l.element).fold(f64::INFINITY, f64::min);
    let max_q = q.iter().map(|l| l.element).fold(0.0, f64::max);
    assert!(min_hf > max_q, "{min_hf} vs {max_q}");
    for l in &lines {
        match l.kind {
            LineKind::HyperfineHf => assert_eq!(l.delta_mi, 0),
            LineKind::QuadrupoleQ => assert_eq!(l.delta_mi.abs(), 1),
            LineKind::Electronic => assert!(l.ambiguous || l.delta_mi.abs() > 1),
        }
    }
}

#[test]
fn hyperfine_spread_collapses_linearly() {
    let spread = |scale: f64| {
        let model = HamiltonianModel::new(
            er167(1.2e8 * scale, 9e8 * scale, 1.5e7 * scale),
            Vector3::new(0.0, 0.0, 0.025),
        )
        .unwrap();
        let lines = transitions(&model, &Vector3::x(), (1e9, 1e10)).unwrap();
        let hf: Vec<f64> = lines
            .iter()
            .filter(|l| l.kind == LineKind::HyperfineHf)
            .map(|l| l.freq)
            .collect();
        assert_eq!(hf.len(), 8);
        hf.iter().cloned().fold(f64::MIN, f64::max) - hf.iter().cloned().fold(f64::MAX, f64::min)
    };
    let s1 = spread(1e-2);
    let s2 = spread(1e-3);
    let s3 = spread(1e-4);
    assert!(s3 < s2 && s2 < s1);
    assert!((s1 / s2 - 10.0).abs() < 0.05, "{}", s1 / s2);
    assert!((s2 / s3 - 10.0).abs() < 0.05, "{}", s2 / s3);
}

#[test]
fn level_sweep_matches_serial_evaluation() {
    let sp = er167(1.2e8, 9e8, 1.5e7);
    let fields: Vec<f64> = (1..=12).map(|k| 0.005 * k as f64).collect();
    let par = level_sweep(&sp, &Vector3::z(), &fields).unwrap();
    for (b, levels) in fields.iter().zip(&par) {
        let m = HamiltonianModel::new(sp.clone(), Vector3::z() * *b).unwrap();
        let serial = eigensystem(&build_hamiltonian(&m).unwrap()).unwrap().values;
        assert_eq!(&serial, levels);
    }
}

fn iso(label: &str, g: f64) -> SpeciesOrientation {
    SpeciesOrientation {
        species: SpinSpecies::electronic(label, GTensor::isotropic(g).unwrap()),
        orientation: CrystalOrientation::new(0.3, 1.0).unwrap(),
    }
}

#[test]
fn resonance_field_anchors() {
    let o = CrystalOrientation::new(0.7, 2.0).unwrap();
    let s = SpinSpecies::electronic("S2a", GTensor::isotropic(1.394).unwrap());
    let b = resonance_field(&s, &o, 5.331e9, LineSelector::Electronic).unwrap();
    assert!((b - 0.2732).abs() < 0.5e-3, "{b}");
    // cross-check the g-value implied by the anchors
    assert!((H * 5.331e9 / (MU_B * 0.2732) - 1.394).abs() < 2e-3);

    let b = resonance_field(&s, &o, 4.891e9, LineSelector::Electronic).unwrap();
    assert!((b - 0.2507).abs() < 0.5e-3, "{b}");

    let s = SpinSpecies::electronic("S1a", GTensor::isotropic(14.8).unwrap());
    let b = resonance_field(&s, &o, 5e9, LineSelector::Electronic).unwrap();
    let exact = H * 5e9 / (14.8 * MU_B);
    assert!((b - exact).abs() < 1e-3 / (MU_B * 14.8 / H) * 1e0 + 1e-8);
    assert!((b - 24.13e-3).abs() < 0.01e-3);
}

#[test]
fn resonance_field_on_full_hamiltonian_levels() {
    let o = CrystalOrientation::new(0.0, 0.0).unwrap();
    let s = SpinSpecies::electronic("S", GTensor::diagonal(1.5, 1.5, 14.8).unwrap());
    let b = resonance_field(&s, &o, 5e9, LineSelector::Levels { lo: 0, hi: 1 }).unwrap();
    let exact = H * 5e9 / (14.8 * MU_B);
    assert!((b - exact).abs() < 1e-7);
}

#[test]
fn resonance_field_without_solution() {
    let o = CrystalOrientation::new(0.0, 0.0).unwrap();
    let s = SpinSpecies::electronic("weak", GTensor::isotropic(0.01).unwrap());
    assert!(matches!(
        resonance_field(&s, &o, 1e11, LineSelector::Electronic),
        Err(Error::NoSolution(_))
    ));
    // g_x = 0 direction never tunes
    let s = SpinSpecies::electronic("S1", site1());
    let ox = CrystalOrientation::new(std::f64::consts::FRAC_PI_2, 0.0).unwrap();
    assert!(resonance_field(&s, &ox, 5e9, LineSelector::Electronic).is_err());
}

#[test]
fn table_line_positions() {
    let set = vec![iso("S1a", 13.4), iso("S2b", 2.7), iso("S1b", 1.6), iso("S2a", 1.4)];
    let f = 4.89e9;
    let lines = esr_line_positions(&set, f);
    let expect_mt = [26.1, 129.4, 218.4, 249.6];
    for ((line, g), e) in lines.iter().zip([13.4, 2.7, 1.6, 1.4]).zip(expect_mt) {
        let b = *line.field.as_ref().unwrap();
        let oracle = H * f / (g * MU_B);
        assert!((b - oracle).abs() < 1e-6, "{}", line.label);
        assert!((b * 1e3 - e).abs() < 0.1, "{} {}", line.label, b);
    }
    let fields: Vec<f64> = lines.iter().map(|l| *l.field.as_ref().unwrap()).collect();
    assert!(fields.windows(2).all(|w| w[0] < w[1]));

    let single = esr_line_positions(&[iso("free", 2.0)], 5e9);
    assert!((single[0].field.as_ref().unwrap() * 1e3 - 178.6).abs() < 0.05);
    assert!(esr_line_positions(&[], 5e9).is_empty());
}

#[test]
fn per_line_failure_is_not_fatal() {
    let set = vec![iso("ok", 2.0), iso("weak", 1e-4)];
    let lines = esr_line_positions(&set, 5e9);
    assert!(lines[0].field.is_ok());
    assert!(lines[1].field.is_err());
}
