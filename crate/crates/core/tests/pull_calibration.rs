//! Monte-Carlo check that reported 1σ uncertainties match the scatter of
//! repeated fits.

use spinres::fitlab::{fit_lorentzian, least_squares_fit, FitOptions, FitProblem, FitResult, Model};
use spinres::spincore::{AxisKind, Spectrum1D};
use spinres::synth::{gen_trace, linspace, NoiseKind, NoiseSpec};

const REPEATS: u64 = 200;
const TRUTH: [f64; 4] = [5.331e9, 13.8e6, 0.12, 1.0];

fn traces(kind: NoiseKind, repeats: u64) -> Vec<Spectrum1D> {
    let grid = linspace(5.331e9 - 50e6, 5.331e9 + 50e6, 401);
    (0..repeats)
        .map(|k| {
            let noise = NoiseSpec::new(kind, 0.01, k).unwrap();
            gen_trace(Model::Lorentzian, &TRUTH, AxisKind::Frequency, &grid, &noise).unwrap()
        })
        .collect()
}

/// With `n` repeats the sample variance scatters by about `sqrt(2 / n)`.
fn check_pulls(fits: &[FitResult], var_tol: f64) {
    assert!(fits.iter().all(|f| f.converged));
    for (i, name) in ["center", "fwhm", "depth", "background"].iter().enumerate() {
        let pulls: Vec<f64> = fits.iter().map(|f| (f.value(name) - TRUTH[i]) / f.sigma(name)).collect();
        let n = pulls.len() as f64;
        let mean = pulls.iter().sum::<f64>() / n;
        let var = pulls.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0);
        println!("{name}: pull mean {mean:.3}, variance {var:.3}");
        assert!(mean.abs() < 0.2, "{name} mean {mean}");
        assert!((var - 1.0).abs() < var_tol, "{name} variance {var}");
    }
}

#[test]
fn lorentzian_pulls_are_standard_normal() {
    let fits: Vec<FitResult> =
        traces(NoiseKind::GaussianAbsolute, REPEATS).iter().map(|d| fit_lorentzian(d).unwrap()).collect();
    check_pulls(&fits, 0.2);
}

#[test]
fn pull_variance_is_tight_over_many_repeats() {
    let fits: Vec<FitResult> =
        traces(NoiseKind::GaussianAbsolute, 10 * REPEATS).iter().map(|d| fit_lorentzian(d).unwrap()).collect();
    check_pulls(&fits, 0.1);
}

#[test]
fn relative_noise_pulls_need_inverse_square_weights() {
    // unit weights treat the shallower noise inside the dip as if it were
    // full size, which inflates sigma(depth). Weights from the noisy samples
    // themselves bias the background low, so take them from a first-pass fit.
    let fits: Vec<FitResult> = traces(NoiseKind::GaussianRelative, REPEATS)
        .into_iter()
        .map(|d| {
            let start = fit_lorentzian(&d).unwrap().values();
            let w = d.axis().iter().map(|&x| Model::Lorentzian.eval(x, &start).powi(-2)).collect();
            let problem = FitProblem::new(Model::Lorentzian, d, &start).unwrap().with_weights(w);
            least_squares_fit(&problem, &FitOptions::default()).unwrap()
        })
        .collect();
    check_pulls(&fits, 0.2);
}
