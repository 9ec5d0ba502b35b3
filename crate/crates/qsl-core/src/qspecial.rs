//! q-special functions: q-Pochhammer symbols, the entire q-exponential
//! `E_q`, the basic trigonometric functions `cos(z; q)` and `sin(z; q)`,
//! and their positive zeros.

use crate::error::{QslError, Result};

/// Truncation policy for q-series evaluation.
#[derive(Clone, Copy, Debug)]
pub struct QSeriesConfig {
    pub q: f64,
    pub max_terms: usize,
    pub term_floor: f64,
}

impl QSeriesConfig {
    pub fn new(q: f64) -> Self {
        QSeriesConfig {
            q,
            max_terms: 200,
            term_floor: 1e-18,
        }
    }
}

/// q-Pochhammer `(z; q)_n`; `n = None` gives the infinite product, truncated
/// when factors are within machine precision of 1.
pub fn q_pochhammer(z: f64, q: f64, n: Option<usize>) -> f64 {
    let mut prod = 1.0;
    let mut zq = z;
    match n {
        Some(n) => {
            for _ in 0..n {
                prod *= 1.0 - zq;
                zq *= q;
            }
        }
        None => {
            for _ in 0..10_000 {
                if zq.abs() < f64::EPSILON {
                    break;
                }
                prod *= 1.0 - zq;
                zq *= q;
            }
        }
    }
    prod
}

fn sum_series(
    first: f64,
    mut ratio: impl FnMut(usize) -> f64,
    cfg: &QSeriesConfig,
) -> Result<f64> {
    let mut term = first;
    let mut sum = term;
    let mut peak = term.abs();
    for n in 0..cfg.max_terms {
        term *= ratio(n);
        sum += term;
        peak = peak.max(sum.abs());
        if term.abs() <= cfg.term_floor * peak.max(1e-300) {
            return Ok(sum);
        }
        if !term.is_finite() {
            break;
        }
    }
    Err(QslError::SeriesDivergence {
        max_terms: cfg.max_terms,
    })
}

/// Entire q-exponential `E_q(z) = sum q^{n(n-1)/2} (z(1-q))^n / (q; q)_n`.
pub fn q_exp_e(z: f64, cfg: &QSeriesConfig) -> Result<f64> {
    let q = cfg.q;
    let u = z * (1.0 - q);
    // term ratio: t_{n+1}/t_n = q^n u / (1 - q^{n+1})
    sum_series(1.0, |n| q.powi(n as i32) * u / (1.0 - q.powi(n as i32 + 1)), cfg)
}

/// Basic cosine `cos(z; q) = sum (-1)^n q^{n^2} (z(1-q))^{2n} / (q; q)_{2n}`.
pub fn q_cos(z: f64, cfg: &QSeriesConfig) -> Result<f64> {
    phi_cos(z * z, 1.0, cfg)
}

/// Basic sine `sin(z; q) = sum (-1)^n q^{n^2+n} (z(1-q))^{2n+1} / (q; q)_{2n+1}`.
pub fn q_sin(z: f64, cfg: &QSeriesConfig) -> Result<f64> {
    phi_sin_over_s(z * z, 1.0, cfg).map(|v| v * z)
}

/// `cos(sqrt(lambda) x; q)` as an entire function of `lambda`, valid for all
/// real `lambda` including negative values.
pub(crate) fn phi_cos(lambda: f64, x: f64, cfg: &QSeriesConfig) -> Result<f64> {
    let q = cfg.q;
    let u2 = lambda * (x * (1.0 - q)) * (x * (1.0 - q));
    // t_{n+1}/t_n = -u2 q^{2n+1} / ((1 - q^{2n+1})(1 - q^{2n+2}))
    sum_series(
        1.0,
        |n| {
            let k = 2 * n as i32;
            -u2 * q.powi(k + 1) / ((1.0 - q.powi(k + 1)) * (1.0 - q.powi(k + 2)))
        },
        cfg,
    )
}

/// `sin(sqrt(lambda) x; q) / sqrt(lambda)` as an entire function of `lambda`.
pub(crate) fn phi_sin_over_s(lambda: f64, x: f64, cfg: &QSeriesConfig) -> Result<f64> {
    let q = cfg.q;
    let u2 = lambda * (x * (1.0 - q)) * (x * (1.0 - q));
    // first term x; t_{n+1}/t_n = -u2 q^{2n+2} / ((1 - q^{2n+2})(1 - q^{2n+3}))
    sum_series(
        x,
        |n| {
            let k = 2 * n as i32;
            -u2 * q.powi(k + 2) / ((1.0 - q.powi(k + 2)) * (1.0 - q.powi(k + 3)))
        },
        cfg,
    )
}

/// Which basic trigonometric function a zero request refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrigKind {
    Cos,
    Sin,
}

/// Asymptotic seed for the n-th positive zero (`n >= 1`):
/// `x_n ~ q^{-n+1/2}/(1-q)` for cosine, `y_n ~ q^{-n}/(1-q)` for sine.
pub fn zero_seed(kind: TrigKind, q: f64, n: usize) -> f64 {
    assert!(n >= 1, "zeros are indexed from 1");
    let e = match kind {
        TrigKind::Cos => -(n as f64) + 0.5,
        TrigKind::Sin => -(n as f64),
    };
    q.powf(e) / (1.0 - q)
}

/// First `count` positive zeros of `cos(z; q)` or `sin(z; q)`, ascending.
///
/// Zeros are collected by a geometric scan starting below the first
/// asymptotic seed (the function is positive between 0 and its first zero),
/// with 8 samples per expected zero gap, and refined by bisection to `1e-12`
/// relative. The scan aborts past `seed(count)/q^2` if too few sign changes
/// appeared.
pub fn zeros_of(kind: TrigKind, q: f64, count: usize) -> Result<Vec<f64>> {
    let cfg = QSeriesConfig::new(q);
    let f = |z: f64| -> Result<f64> {
        match kind {
            TrigKind::Cos => q_cos(z, &cfg),
            TrigKind::Sin => q_sin(z, &cfg),
        }
    };
    let mut zeros = Vec::with_capacity(count);
    if count == 0 {
        return Ok(zeros);
    }
    let z_end = zero_seed(kind, q, count) / (q * q);
    let ratio = q.powf(-0.125);
    // At larger q the first zero sits well below its asymptotic seed, so the
    // scan never starts above 1.0; the leading series terms keep both
    // functions positive up to sqrt(1 + q) >= 1.
    let mut x0 = (zero_seed(kind, q, 1) * q * q * q).min(1.0);
    let mut f0 = f(x0)?;
    while zeros.len() < count {
        let x1 = x0 * ratio;
        if x1 > z_end {
            return Err(QslError::BracketNotFound {
                what: format!("{kind:?} zero {}", zeros.len() + 1),
                seed: zero_seed(kind, q, zeros.len() + 1),
            });
        }
        let f1 = f(x1)?;
        if f0 == 0.0 {
            zeros.push(x0);
        } else if (f0 > 0.0) != (f1 > 0.0) {
            let root = bisect_zero(&f, x0, x1, f0)?;
            check_simple(&f, root)?;
            zeros.push(root);
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(zeros)
}

fn bisect_zero(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, flo: f64) -> Result<f64> {
    let mut fl = flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi || (hi - lo) <= 1e-12 * lo {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (fl > 0.0) {
            lo = mid;
            fl = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_simple(f: &impl Fn(f64) -> Result<f64>, root: f64) -> Result<()> {
    // relative swing of f across the root; a double zero leaves equal signs
    // and a near-vanishing swing
    let delta = 1e-6 * root;
    let (fa, fb) = (f(root - delta)?, f(root + delta)?);
    let swing = (fb - fa).abs() / (fa.abs() + fb.abs() + 1e-300);
    if swing < 1e-8 {
        return Err(QslError::DegenerateRoot {
            lambda: root,
            floor: 1e-8,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pochhammer_basics() {
        assert_eq!(q_pochhammer(0.3, 0.5, Some(0)), 1.0);
        let p2 = q_pochhammer(0.3, 0.5, Some(2));
        assert!((p2 - (1.0 - 0.3) * (1.0 - 0.15)).abs() < 1e-15);
        let pinf = q_pochhammer(0.3, 0.5, None);
        // converged product: adding more factors changes nothing
        let p60 = q_pochhammer(0.3, 0.5, Some(60));
        assert!((pinf - p60).abs() < 1e-15);
    }

    #[test]
    fn q_exp_small_argument() {
        // E_q(z) -> 1 + z(1-q)/(1-q) = 1 + z + O(z^2) as z -> 0
        let cfg = QSeriesConfig::new(0.5);
        let v = q_exp_e(1e-6, &cfg).unwrap();
        assert!((v - (1.0 + 1e-6)).abs() < 1e-11);
    }

    #[test]
    fn q_exp_product_form() {
        // E_q(z) = (-z(1-q); q)_infinity for z > 0
        let q = 0.5;
        let cfg = QSeriesConfig::new(q);
        for &z in &[0.3, 1.0, 2.5, 10.0] {
            let series = q_exp_e(z, &cfg).unwrap();
            let product = q_pochhammer(-z * (1.0 - q), q, None);
            assert!(
                (series - product).abs() <= 1e-13 * product.abs(),
                "z = {z}: {series} vs {product}"
            );
        }
    }

    #[test]
    fn trig_small_argument() {
        let cfg = QSeriesConfig::new(0.5);
        assert!((q_cos(1e-8, &cfg).unwrap() - 1.0).abs() < 1e-15);
        assert!((q_sin(1e-8, &cfg).unwrap() - 1e-8).abs() < 1e-23);
    }

    #[test]
    fn trig_parity() {
        let cfg = QSeriesConfig::new(0.4);
        for &z in &[0.7, 2.0, 5.0] {
            assert_eq!(q_cos(z, &cfg).unwrap(), q_cos(-z, &cfg).unwrap());
            assert_eq!(q_sin(z, &cfg).unwrap(), -q_sin(-z, &cfg).unwrap());
        }
    }

    #[test]
    fn entire_helpers_match_trig() {
        let q = 0.5;
        let cfg = QSeriesConfig::new(q);
        let lam: f64 = 7.3;
        let s = lam.sqrt();
        let x = 0.8;
        let c = phi_cos(lam, x, &cfg).unwrap();
        assert!((c - q_cos(s * x, &cfg).unwrap()).abs() < 1e-14);
        let sn = phi_sin_over_s(lam, x, &cfg).unwrap();
        assert!((sn - q_sin(s * x, &cfg).unwrap() / s).abs() < 1e-14);
    }

    #[test]
    fn entire_helpers_negative_lambda() {
        // for lambda < 0 both helpers are positive (all series terms positive)
        let cfg = QSeriesConfig::new(0.5);
        let c = phi_cos(-4.0, 1.0, &cfg).unwrap();
        let s = phi_sin_over_s(-4.0, 1.0, &cfg).unwrap();
        assert!(c > 1.0);
        assert!(s > 1.0);
    }

    #[test]
    fn zeros_match_sign_changes() {
        for &q in &[0.3, 0.5, 0.8] {
            let cfg = QSeriesConfig::new(q);
            for kind in [TrigKind::Cos, TrigKind::Sin] {
                let zs = zeros_of(kind, q, 6).unwrap();
                assert_eq!(zs.len(), 6);
                for (i, z) in zs.iter().enumerate() {
                    let f = |z: f64| match kind {
                        TrigKind::Cos => q_cos(z, &cfg).unwrap(),
                        TrigKind::Sin => q_sin(z, &cfg).unwrap(),
                    };
                    // residual small relative to neighborhood values
                    let d = 1e-9 * z;
                    let scale = f(z - 1e-3 * z).abs().max(f(z + 1e-3 * z).abs());
                    assert!(
                        f(*z).abs() <= 1e-6 * scale.max(1e-300),
                        "q={q} {kind:?} zero {i}"
                    );
                    assert!((f(z - d) > 0.0) != (f(z + d) > 0.0) || f(*z) == 0.0);
                }
                // strictly increasing
                for w in zs.windows(2) {
                    assert!(w[1] > w[0]);
                }
            }
        }
    }

    #[test]
    fn zeros_approach_seeds() {
        // relative gap to the asymptotic seed shrinks like q^n
        let q = 0.5;
        let zs = zeros_of(TrigKind::Sin, q, 8).unwrap();
        let mut prev_gap = f64::INFINITY;
        for (i, z) in zs.iter().enumerate().skip(2) {
            let seed = zero_seed(TrigKind::Sin, q, i + 1);
            let gap = (z / seed - 1.0).abs();
            assert!(gap < prev_gap.max(1e-14));
            prev_gap = gap;
        }
        let last_gap = (zs[7] / zero_seed(TrigKind::Sin, q, 8) - 1.0).abs();
        assert!(last_gap < 1e-2);
    }

    #[test]
    fn sine_zero_interlaces_cosine() {
        let q = 0.5;
        let cz = zeros_of(TrigKind::Cos, q, 5).unwrap();
        let sz = zeros_of(TrigKind::Sin, q, 5).unwrap();
        // cos zero n sits below sin zero n, which sits below cos zero n+1
        for n in 0..4 {
            assert!(cz[n] < sz[n]);
            assert!(sz[n] < cz[n + 1]);
        }
    }
}
