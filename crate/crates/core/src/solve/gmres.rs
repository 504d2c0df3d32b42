//! Full (non-restarted) GMRES with modified Gram-Schmidt and one
//! reorthogonalization pass.

use num_complex::Complex64;

use crate::error::{QbxError, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    /// Relative residual target `|b - Ax| / |b|`.
    pub tol: f64,
    /// Iteration cap; `None` means `min(n, 400)`.
    pub max_iter: Option<usize>,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { tol: 1e-14, max_iter: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresResult {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// Relative residual estimate after each iteration, starting with the
    /// initial residual 1.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl GmresResult {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("history starts with the initial residual")
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Solves `A x = b` from a zero initial guess, with `apply(v, out)` writing
/// `A v` into `out`.
pub fn gmres<F>(mut apply: F, rhs: &[Complex64], opts: GmresOptions) -> Result<GmresResult>
where
    F: FnMut(&[Complex64], &mut [Complex64]) -> Result<()>,
{
    let n = rhs.len();
    if rhs.iter().any(|z| !z.is_finite()) {
        return Err(QbxError::NonFinite("GMRES right-hand side".into()));
    }
    let beta = norm(rhs);
    if beta == 0.0 {
        return Ok(GmresResult {
            x: vec![ZERO; n],
            iterations: 0,
            residuals: vec![0.0],
            converged: true,
        });
    }
    let max_iter = opts.max_iter.unwrap_or(n.min(400)).min(n).max(1);
    let mut basis: Vec<Vec<Complex64>> = vec![rhs.iter().map(|z| z / beta).collect()];
    // Columns of the Hessenberg matrix, already rotated.
    let mut h: Vec<Vec<Complex64>> = Vec::new();
    let mut rotations: Vec<(f64, Complex64)> = Vec::new();
    let mut g = vec![Complex64::new(beta, 0.0)];
    let mut residuals = vec![1.0];
    let mut converged = false;
    let mut w = vec![ZERO; n];
    for j in 0..max_iter {
        apply(&basis[j], &mut w)?;
        if w.iter().any(|z| !z.is_finite()) {
            return Err(QbxError::NonFinite(format!("operator output in GMRES iteration {}", j + 1)));
        }
        let mut col = vec![ZERO; j + 2];
        for _pass in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                col[i] += c;
                w.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
            }
        }
        let hn = norm(&w);
        col[j + 1] = Complex64::new(hn, 0.0);
        // Happy breakdown: the Krylov space is invariant.
        let breakdown = hn <= f64::EPSILON * norm(&col);
        for (i, &(c, s)) in rotations.iter().enumerate() {
            let (a, b) = (col[i], col[i + 1]);
            col[i] = c * a + s * b;
            col[i + 1] = -s.conj() * a + c * b;
        }
        let (a, b) = (col[j], col[j + 1]);
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (1.0, ZERO)
        } else if a.norm() == 0.0 {
            (0.0, Complex64::new(1.0, 0.0))
        } else {
            let c = a.norm() / r;
            (c, (a / a.norm()) * b.conj() / r)
        };
        col[j] = c * a + s * b;
        col[j + 1] = ZERO;
        rotations.push((c, s));
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s.conj() * gj);
        h.push(col);
        let res = g[j + 1].norm() / beta;
        // Guard the monotone history against rounding in the last digit.
        residuals.push(res.min(*residuals.last().expect("non-empty")));
        if res <= opts.tol || breakdown {
            converged = true;
            break;
        }
        basis.push(w.iter().map(|z| z / hn).collect());
    }
    let m = h.len();
    let mut y = vec![ZERO; m];
    for i in (0..m).rev() {
        let mut acc = g[i];
        for (k, yk) in y.iter().enumerate().skip(i + 1) {
            acc -= h[k][i] * yk;
        }
        y[i] = if h[i][i] == ZERO { ZERO } else { acc / h[i][i] };
    }
    let mut x = vec![ZERO; n];
    for (v, yi) in basis.iter().zip(&y) {
        x.iter_mut().zip(v).for_each(|(a, b)| *a += yi * b);
    }
    Ok(GmresResult {
        x,
        iterations: m,
        residuals,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn matvec(a: &DMatrix<Complex64>) -> impl FnMut(&[Complex64], &mut [Complex64]) -> Result<()> + '_ {
        move |v, out| {
            for (i, o) in out.iter_mut().enumerate() {
                *o = (0..v.len()).map(|k| a[(i, k)] * v[k]).sum();
            }
            Ok(())
        }
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0)];
        let r = gmres(|v, out| Ok(out.copy_from_slice(v)), &b, GmresOptions::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        for (x, y) in r.x.iter().zip(&b) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn diagonal_two_by_two_is_exact() {
        let b = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let r = gmres(
            |v, out| {
                out[0] = 2.0 * v[0];
                out[1] = 3.0 * v[1];
                Ok(())
            },
            &b,
            GmresOptions::default(),
        )
        .unwrap();
        assert!(r.iterations <= 2 && r.converged);
        assert!((r.x[0] - 0.5).norm() < 1e-14 && (r.x[1] - 1.0 / 3.0).norm() < 1e-14);
    }

    #[test]
    fn random_system_matches_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let a = DMatrix::from_fn(n, n, |i, k| {
            let d = if i == k { 4.0 } else { 0.0 };
            c(d + rng.gen_range(-0.5..0.5) / (n as f64).sqrt(), rng.gen_range(-0.5..0.5) / (n as f64).sqrt())
        });
        let b: Vec<Complex64> = (0..n).map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let r = gmres(matvec(&a), &b, GmresOptions::default()).unwrap();
        assert!(r.converged && r.final_residual() <= 1e-13);
        let exact = a.clone().lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
        let err = r.x.iter().zip(exact.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-10, "{err}");
        assert!(r.residuals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn zero_rhs_and_nan_operator() {
        let r = gmres(|v, out| Ok(out.copy_from_slice(v)), &[ZERO; 4], GmresOptions::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.x.iter().all(|z| *z == ZERO));
        let err = gmres(
            |_, out| {
                out.fill(c(f64::NAN, 0.0));
                Ok(())
            },
            &[c(1.0, 0.0)],
            GmresOptions::default(),
        );
        assert!(matches!(err, Err(QbxError::NonFinite(_))));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn residual_history_is_monotone(seed in 0u64..10_000, n in 2usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = DMatrix::from_fn(n, n, |i, j| {
                let diag = if i == j { c(3.0, 0.0) } else { c(0.0, 0.0) };
                diag + c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (n as f64).sqrt()
            });
            let b: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let r = gmres(matvec(&a), &b, GmresOptions::default()).unwrap();
            proptest::prop_assert!(r.converged);
            proptest::prop_assert!(r.residuals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
            let mut ax = vec![c(0.0, 0.0); n];
            matvec(&a)(&r.x, &mut ax).unwrap();
            let res = ax.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            let bn = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            proptest::prop_assert!(res <= 1e-13 * bn);
        }
    }
}
