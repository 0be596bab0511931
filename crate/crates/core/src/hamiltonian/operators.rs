use nalgebra::DMatrix;
use num_complex::Complex64;

/// Cartesian angular momentum matrices `[Jx, Jy, Jz]` for spin `two_j / 2`, in
/// the basis `m = j, j-1, ..., -j`.
pub fn spin_matrices(two_j: u32) -> [DMatrix<Complex64>; 3] {
    let n = two_j as usize + 1;
    let j = two_j as f64 / 2.0;
    let m_of = |k: usize| j - k as f64;
    let mut jp = DMatrix::<Complex64>::zeros(n, n);
    for k in 1..n {
        // <m+1| J+ |m>, with row k-1 holding m+1
        let m = m_of(k);
        jp[(k - 1, k)] = Complex64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let jx = (&jp + &jm) * half;
    let jy = (&jp - &jm) * Complex64::new(0.0, -0.5);
    let jz = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(m_of(r), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    [jx, jy, jz]
}
