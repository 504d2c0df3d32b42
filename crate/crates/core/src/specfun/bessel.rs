//! Bessel functions of the first kind and Hankel functions of the first kind
//! for integer order and real positive argument.
//!
//! `J_n` comes from Miller's downward recurrence normalized by
//! `J_0 + 2 sum J_2k = 1`. `Y_0` and `Y_1` use the Neumann series in the
//! Miller-generated `J`s for moderate arguments and the Hankel asymptotic
//! expansion beyond [`ASYMPTOTIC_THRESHOLD`]; higher `Y_n` follow by upward
//! recurrence, which is stable for `Y`.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{QbxError, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Values above this are rescaled during downward recurrence.
const RESCALE_ABOVE: f64 = 1e200;

/// Argument beyond which `Y_0`, `Y_1` come from the asymptotic expansion.
/// The optimally truncated expansion is accurate to roughly `exp(-2x)`.
pub const ASYMPTOTIC_THRESHOLD: f64 = 25.0;

fn miller_start(nmax: usize, x: f64) -> usize {
    let m0 = (nmax as f64).max(x.ceil()).max(1.0);
    let cap = (m0 + 16.0 + (48.0 * m0).sqrt()) as usize;
    // Beyond max(nmax, x) the orders decay at least like prod x / (2m);
    // stop once that ratio is negligible, with a margin for the transition
    // region near m = x.
    let mut m = m0 as usize;
    let mut ratio = 1.0;
    while ratio > 1e-18 && m < cap {
        m += 1;
        ratio *= x / (2.0 * m as f64);
    }
    let m = (m + 6 + (3.0 * x.cbrt()) as usize).min(cap).max(nmax + 2);
    m + (m & 1)
}

/// Miller table `J_0(x), ..., J_start(x)` in `j` (at least `nmax + 2`
/// entries) for reuse in Neumann sums.
fn miller_table_into(nmax: usize, x: f64, j: &mut Vec<f64>) {
    let start = miller_start(nmax, x);
    j.clear();
    j.resize(start + 2, 0.0);
    j[start] = 1e-300;
    let mut norm = 0.0;
    let two_over_x = 2.0 / x;
    for n in (1..=start).rev() {
        let next = (n as f64) * two_over_x * j[n] - j[n + 1];
        j[n - 1] = next;
        if (n - 1) % 2 == 0 && n - 1 > 0 {
            norm += 2.0 * next;
        }
        if next.abs() > RESCALE_ABOVE {
            let s = 1.0 / RESCALE_ABOVE;
            for v in j[n - 1..].iter_mut() {
                *v *= s;
            }
            norm *= s;
        }
    }
    norm += j[0];
    let scale = 1.0 / norm;
    for v in j.iter_mut() {
        *v *= scale;
    }
}

fn miller_table(nmax: usize, x: f64) -> Vec<f64> {
    let mut j = Vec::new();
    miller_table_into(nmax, x, &mut j);
    j
}

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(QbxError::Domain(format!(
            "Bessel argument must be finite and non-negative, got {x}"
        )));
    }
    Ok(())
}

/// `J_0(x), ..., J_nmax(x)`.
pub fn bessel_j_seq(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    if x == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    let mut j = miller_table(nmax, x);
    j.truncate(nmax + 1);
    Ok(j)
}

/// `J_l(x)` for integer `l`, using `J_{-l} = (-1)^l J_l`.
pub fn bessel_j(l: i64, x: f64) -> Result<f64> {
    let n = l.unsigned_abs() as usize;
    let v = bessel_j_seq(n, x)?[n];
    Ok(if l < 0 && n % 2 == 1 { -v } else { v })
}

/// Asymptotic `H^(1)_nu(x)` for `nu` in {0, 1} and large `x`.
fn hankel_asymptotic(nu: u32, x: f64) -> Complex64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev_mag = f64::INFINITY;
    for k in 1..80 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        // a_k / a_{k-1} = (mu - (2k-1)^2) / (8k), times i / x.
        let next = term * Complex64::new(0.0, (mu - odd * odd) / (8.0 * kf * x));
        let mag = next.norm();
        if mag >= prev_mag || mag < 1e-17 * sum.norm() {
            if mag < prev_mag {
                sum += next;
            }
            break;
        }
        prev_mag = mag;
        term = next;
        sum += term;
    }
    let phase = x - (nu as f64) * PI / 2.0 - FRAC_PI_4;
    (FRAC_2_PI / x).sqrt() * Complex64::from_polar(1.0, phase) * sum
}

/// `H^(1)_0(x), ..., H^(1)_nmax(x)` for `x > 0`.
///
/// Large orders at small arguments overflow to infinity in the imaginary
/// part; that is the honest value in double precision.
pub fn hankel1_seq(nmax: usize, x: f64) -> Result<Vec<Complex64>> {
    let mut out = Vec::with_capacity(nmax + 1);
    hankel1_seq_into(nmax, x, &mut out, &mut Vec::new())?;
    Ok(out)
}

/// [`hankel1_seq`] writing into `out`, with `work` as reusable scratch.
pub fn hankel1_seq_into(nmax: usize, x: f64, out: &mut Vec<Complex64>, work: &mut Vec<f64>) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(QbxError::Domain(format!(
            "Hankel argument must be finite and positive, got {x}"
        )));
    }
    out.clear();
    if x > ASYMPTOTIC_THRESHOLD && nmax <= 1 {
        out.push(hankel_asymptotic(0, x));
        if nmax == 1 {
            out.push(hankel_asymptotic(1, x));
        }
        return Ok(());
    }
    miller_table_into(nmax.max(1), x, work);
    let j_all = &work[..];
    let (y0, y1) = if x > ASYMPTOTIC_THRESHOLD {
        (hankel_asymptotic(0, x).im, hankel_asymptotic(1, x).im)
    } else {
        neumann_y01(j_all, x)
    };
    out.push(Complex64::new(j_all[0], y0));
    if nmax == 0 {
        return Ok(());
    }
    out.push(Complex64::new(j_all[1], y1));
    let (mut ym1, mut y) = (y0, y1);
    let two_over_x = 2.0 / x;
    for n in 1..nmax {
        let next = (n as f64) * two_over_x * y - ym1;
        ym1 = y;
        y = next;
        out.push(Complex64::new(j_all[n + 1], y));
    }
    Ok(())
}

/// `Y_0`, `Y_1` from the Neumann expansions
/// `Y_0 = (2/pi)(ln(x/2)+gamma) J_0 - (4/pi) sum (-1)^k J_2k / k` and its
/// negated derivative.
fn neumann_y01(j: &[f64], x: f64) -> (f64, f64) {
    let m = j.len() - 2;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k < m {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
        k += 1;
    }
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let y0 = FRAC_2_PI * lg * j[0] - 2.0 * FRAC_2_PI * s0;
    let y1 = -FRAC_2_PI * j[0] / x + FRAC_2_PI * lg * j[1] + FRAC_2_PI * s1;
    (y0, y1)
}

/// `H^(1)_l(x)` for integer `l`, using `H_{-l} = (-1)^l H_l`.
pub fn hankel1(l: i64, x: f64) -> Result<Complex64> {
    let n = l.unsigned_abs() as usize;
    let v = hankel1_seq(n, x)?[n];
    Ok(if l < 0 && n % 2 == 1 { -v } else { v })
}

/// `H^(1)_0(x)` and `H^(1)_1(x)` together; the kernel hot path.
#[inline]
pub fn hankel01(x: f64) -> Result<(Complex64, Complex64)> {
    let v = hankel1_seq(1, x)?;
    Ok((v[0], v[1]))
}
