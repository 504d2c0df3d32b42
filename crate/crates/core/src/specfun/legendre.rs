//! Gauss-Legendre rules, Legendre series and polynomial interpolation on
//! arbitrary node sets.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

/// A Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integral over `[a, b]` of `f`, mapped affinely.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
pub fn legendre_p(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // P_n'(+-1) = (+-1)^{n+1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Computes the `q`-point rule by Newton iteration from Chebyshev guesses.
///
/// # Panics
/// Panics if `q` is zero.
pub fn gauss_legendre_rule(q: usize) -> QuadratureRule {
    assert!(q >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    for i in 0..q.div_ceil(2) {
        // i-th largest root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_p(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                dp = legendre_p(q, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[q - 1 - i] = x;
        nodes[i] = -x;
        weights[q - 1 - i] = w;
        weights[i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

/// Cached access to Gauss-Legendre rules; each order is computed once.
pub fn gauss_legendre(q: usize) -> Arc<QuadratureRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(q)
        .or_insert_with(|| Arc::new(gauss_legendre_rule(q)))
        .clone()
}

/// Barycentric weights for polynomial interpolation through `nodes`,
/// scaled so their magnitudes stay near unity.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] *= 2.0 * (nodes[j] - nodes[k]);
            }
        }
        w[j] = 1.0 / w[j];
    }
    let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    w.iter_mut().for_each(|v| *v /= scale);
    w
}

/// Matrix mapping samples at `from` to values of the interpolating
/// polynomial at `to`.
pub fn legendre_interp_matrix(from: &[f64], to: &[f64]) -> DMatrix<f64> {
    if from.len() > 40 {
        log::warn!(
            "interpolating through {} nodes; the matrix may be ill-conditioned",
            from.len()
        );
    }
    let w = barycentric_weights(from);
    let mut m = DMatrix::zeros(to.len(), from.len());
    for (i, &x) in to.iter().enumerate() {
        if let Some(j) = from.iter().position(|&xj| (x - xj).abs() < 1e-15) {
            m[(i, j)] = 1.0;
            continue;
        }
        let mut denom = 0.0;
        for (j, &xj) in from.iter().enumerate() {
            let c = w[j] / (x - xj);
            m[(i, j)] = c;
            denom += c;
        }
        for j in 0..from.len() {
            m[(i, j)] /= denom;
        }
    }
    m
}

/// Differentiation matrix of the interpolating polynomial at its own nodes.
pub fn legendre_diff_matrix(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let w = barycentric_weights(nodes);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Legendre coefficients `c_0..c_{n-1}` of the degree `n-1` interpolant of
/// `values` sampled at the nodes of the `n`-point Gauss rule.
pub fn legendre_coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let rule = gauss_legendre(n);
    let mut c = vec![0.0; n];
    for (k, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let f = values[k] * w;
        let (mut p0, mut p1) = (1.0, x);
        c[0] += f;
        if n > 1 {
            c[1] += f * x;
        }
        for m in 2..n {
            let mf = m as f64;
            let p2 = ((2.0 * mf - 1.0) * x * p1 - (mf - 1.0) * p0) / mf;
            c[m] += f * p2;
            p0 = p1;
            p1 = p2;
        }
    }
    for (m, v) in c.iter_mut().enumerate() {
        *v *= (2 * m + 1) as f64 / 2.0;
    }
    c
}

/// Value, first and second derivative of a Legendre series at `x`.
pub fn legendre_eval(coeffs: &[f64], x: f64) -> [f64; 3] {
    // P_m, P_m', P_m'' by the differentiated recurrences.
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    let (mut s0, mut s1) = (0.0, 0.0);
    let mut out = [0.0; 3];
    for (m, &c) in coeffs.iter().enumerate() {
        let (p, d, s) = match m {
            0 => (1.0, 0.0, 0.0),
            1 => (x, 1.0, 0.0),
            _ => {
                let mf = m as f64;
                let a = (2.0 * mf - 1.0) / mf;
                let b = (mf - 1.0) / mf;
                let p2 = a * x * p1 - b * p0;
                let d2 = a * (p1 + x * d1) - b * d0;
                let s2 = a * (2.0 * d1 + x * s1) - b * s0;
                p0 = p1;
                p1 = p2;
                d0 = d1;
                d1 = d2;
                s0 = s1;
                s1 = s2;
                (p2, d2, s2)
            }
        };
        out[0] += c * p;
        out[1] += c * d;
        out[2] += c * s;
    }
    out
}
