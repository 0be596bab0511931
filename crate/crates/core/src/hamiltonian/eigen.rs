//! Cyclic Jacobi diagonalization of small complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot element with a diagonal
//! unitary, then applies the classic real Jacobi rotation. The sweep stops once
//! the off-diagonal Frobenius norm falls below `1e-12 * ||H||_F`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub const MAX_DIM: usize = 64;
const OFF_DIAG_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: DMatrix<Complex64>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> nalgebra::DVectorView<'_, Complex64> {
        self.vectors.column(k)
    }
}

fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn off_diagonal_norm(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

pub fn eigensystem(h: &DMatrix<Complex64>) -> Result<Eigensystem> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::invalid(format!(
            "matrix must be square, got {}x{}",
            n,
            h.ncols()
        )));
    }
    if n > MAX_DIM {
        return Err(Error::Capacity { dim: n, max: MAX_DIM });
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("matrix contains non-finite entries"));
    }
    let norm = frobenius(h);
    let asym = frobenius(&(h - h.adjoint()));
    if asym > HERMITIAN_TOL * norm {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (asymmetry {:.3e} of norm {:.3e})",
            asym, norm
        )));
    }

    let mut a = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v = DMatrix::<Complex64>::identity(n, n);

    if norm > 0.0 {
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&a) <= OFF_DIAG_TOL * norm {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged && off_diagonal_norm(&a) > OFF_DIAG_TOL * norm {
            return Err(Error::Numerical(
                "Jacobi sweeps did not converge".to_string(),
            ));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Eigensystem { values, vectors })
}

fn rotate(a: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let n = a.nrows();
    let phase = apq / b;
    let pc = phase.conj();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let theta = (aqq - app) / (2.0 * b);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
        sgn / (theta.abs() + theta.hypot(1.0))
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    // A <- A U, V <- V U
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * pc * s;
        a[(k, q)] = akp * s + akq * pc * c;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * pc * s;
        v[(k, q)] = vkp * s + vkq * pc * c;
    }
    // A <- U† A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * s + aqk * phase * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// `||V Λ V† - H||_F`, used by tests and debug checks.
pub fn reconstruction_error(h: &DMatrix<Complex64>, es: &Eigensystem) -> f64 {
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        es.dim(),
        es.values.iter().map(|&x| Complex64::new(x, 0.0)),
    ));
    frobenius(&(&es.vectors * lambda * es.vectors.adjoint() - h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hermitian_from(n: usize, entries: &[(f64, f64)]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(n, n);
        let mut it = entries.iter().cycle();
        for i in 0..n {
            let &(d, _) = it.next().unwrap();
            m[(i, i)] = c(d, 0.0);
            for j in (i + 1)..n {
                let &(re, im) = it.next().unwrap();
                m[(i, j)] = c(re, im);
                m[(j, i)] = c(re, -im);
            }
        }
        m
    }

    #[test]
    fn diagonal_input() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0, 0.0), c(-5.0, 0.0)]));
        let es = eigensystem(&h).unwrap();
        assert_eq!(es.values, vec![-5.0, 3.0]);
        assert_eq!(es.vectors[(1, 0)].norm(), 1.0);
        assert_eq!(es.vectors[(0, 1)].norm(), 1.0);
    }

    #[test]
    fn two_level_closed_form() {
        let (e1, e2, vr, vi) = (1.3, -0.4, 0.25, -0.7);
        let h = DMatrix::from_row_slice(2, 2, &[c(e1, 0.0), c(vr, vi), c(vr, -vi), c(e2, 0.0)]);
        let es = eigensystem(&h).unwrap();
        let mean = 0.5 * (e1 + e2);
        let half = ((e1 - e2).powi(2) / 4.0 + vr * vr + vi * vi).sqrt();
        assert!((es.values[0] - (mean - half)).abs() < 1e-14);
        assert!((es.values[1] - (mean + half)).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix() {
        let h = DMatrix::<Complex64>::zeros(4, 4);
        let es = eigensystem(&h).unwrap();
        assert!(es.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(eigensystem(&h), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn rejects_oversized() {
        let h = DMatrix::<Complex64>::identity(65, 65);
        assert!(matches!(eigensystem(&h), Err(Error::Capacity { .. })));
    }

    #[test]
    fn degenerate_spectrum_is_handled() {
        // two degenerate pairs coupled only within the pair
        let mut h = DMatrix::<Complex64>::zeros(4, 4);
        h[(0, 0)] = c(1.0, 0.0);
        h[(1, 1)] = c(1.0, 0.0);
        h[(2, 2)] = c(-1.0, 0.0);
        h[(3, 3)] = c(-1.0, 0.0);
        h[(0, 2)] = c(0.0, 0.5);
        h[(2, 0)] = c(0.0, -0.5);
        let es = eigensystem(&h).unwrap();
        assert!(reconstruction_error(&h, &es) < 1e-13);
        let gram = es.vectors.adjoint() * &es.vectors;
        assert!((gram - DMatrix::identity(4, 4)).iter().all(|z| z.norm() < 1e-12));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn random_hermitian_reconstruction(
            n in 2usize..=16,
            entries in prop::collection::vec((-1e9f64..1e9, -1e9f64..1e9), 16 * 17 / 2),
        ) {
            let h = hermitian_from(n, &entries);
            let es = eigensystem(&h).unwrap();
            let norm = frobenius(&h);
            prop_assert!(reconstruction_error(&h, &es) <= 1e-9 * norm);
            prop_assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
            let gram = es.vectors.adjoint() * &es.vectors;
            let defect = (gram - DMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(defect < 1e-10);
            // residual of each eigenpair
            for k in 0..n {
                let vk = es.vectors.column(k).into_owned();
                let r = &h * &vk - &vk * Complex64::new(es.values[k], 0.0);
                prop_assert!(r.norm() <= 1e-9 * norm);
            }
        }
    }
}
