//! Direct problem: initial-value solvers for the q-difference equation
//!
//! `-(1/q) D_{q^-1} D_q y + v y = lambda y`
//!
//! on the lattice, equivalent to the three-term functional relation
//! `y(q x) + q y(x/q) = c(x) y(x)` with
//! `c(x) = (1 + q) + (v(x) - lambda) x^2 (1 - q)^2`.

use crate::error::{QslError, Result};
use crate::qcore::{BivariateFn, LatticeFn, QLattice};
use crate::qspecial::{self, QSeriesConfig};

use sha2::{Digest, Sha256};

/// Magnitude limit for marched solution values before an overflow error.
pub const OVERFLOW_LIMIT: f64 = 1e280;

/// A q-Sturm-Liouville problem: lattice, potential, and Robin coefficients
/// `h` at the origin-side condition and `H` at `x = a`.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    lattice: QLattice,
    v: LatticeFn,
    h: f64,
    big_h: f64,
}

impl ProblemSpec {
    pub fn new(lattice: QLattice, v: LatticeFn, h: f64, big_h: f64) -> Result<Self> {
        if v.lattice() != &lattice {
            return Err(QslError::LatticeMismatch);
        }
        if !h.is_finite() || !big_h.is_finite() {
            return Err(QslError::Config {
                reason: "boundary coefficients must be finite".into(),
            });
        }
        Ok(ProblemSpec {
            lattice,
            v,
            h,
            big_h,
        })
    }

    /// The free problem `v = 0`, `h = H = 0`.
    pub fn free(lattice: QLattice) -> Self {
        ProblemSpec {
            lattice,
            v: LatticeFn::constant(lattice, 0.0),
            h: 0.0,
            big_h: 0.0,
        }
    }

    pub fn lattice(&self) -> &QLattice {
        &self.lattice
    }

    pub fn v(&self) -> &LatticeFn {
        &self.v
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn big_h(&self) -> f64 {
        self.big_h
    }

    /// Potential sample with constant continuation `v(0)` below the lattice.
    pub(crate) fn v_at(&self, m: usize) -> f64 {
        if m <= self.lattice.depth() {
            self.v.values()[m]
        } else {
            self.v.value_at_zero()
        }
    }

    /// SHA-256 digest of the canonical parameter encoding, for report
    /// provenance.
    pub fn digest(&self) -> String {
        let mut text = format!(
            "q={:.16e};a={:.16e};depth={};h={:.16e};H={:.16e};v0={:.16e};v=",
            self.lattice.q(),
            self.lattice.a(),
            self.lattice.depth(),
            self.h,
            self.big_h,
            self.v.value_at_zero()
        );
        for val in self.v.values() {
            text.push_str(&format!("{val:.16e},"));
        }
        let digest = Sha256::digest(text.as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

/// Solution of the initial-value problem at one `lambda`.
///
/// `phi` carries the lattice samples, `phi(0) = c1`, and the super-lattice
/// value `phi(a/q)`. The residual is the worst relative defect of the
/// three-term relation over interior points.
#[derive(Clone, Debug)]
pub struct IVPSolution {
    pub lambda: f64,
    pub phi: LatticeFn,
    pub c1: f64,
    pub c2: f64,
    pub residual: f64,
}

/// Depth used internally by the IVP solvers: deep enough that the q-Taylor
/// seed error `O(x_N^4)` is below machine precision, i.e. `a q^N <= e^{-4}`.
pub(crate) fn effective_depth(q: f64, depth: usize) -> usize {
    let needed = (16.0 / (1.0 / q).ln()).ceil() as usize;
    depth.max(needed)
}

/// Marches the three-term relation from the two deepest points upward.
///
/// Returns values on indices `0..=n_eff`, the super-lattice value `y(a/q)`,
/// and the backward increment `zs = y(a/q) - y(a)`.
pub(crate) fn march_raw(
    spec: &ProblemSpec,
    lambda: f64,
    c1: f64,
    c2: f64,
    n_eff: usize,
) -> Result<(Vec<f64>, f64, f64)> {
    let lat = spec.lattice();
    let q = lat.q();
    let a = lat.a();
    let omq = 1.0 - q;
    let mut vals = vec![0.0; n_eff + 1];

    // q-Taylor seed y = c1 + c2 x + beta x^2 at the two deepest points
    let beta = q * (spec.v.value_at_zero() - lambda) * c1 / (1.0 + q);
    let xn = a * q.powi(n_eff as i32);
    let xn1 = a * q.powi(n_eff as i32 - 1);
    vals[n_eff] = c1 + xn * c2 + beta * xn * xn;
    let mut z = c2 * xn1 * omq + beta * xn1 * xn1 * (1.0 - q * q);
    vals[n_eff - 1] = vals[n_eff] + z;

    for m in (1..n_eff).rev() {
        let xm = a * q.powi(m as i32);
        let ww = (spec.v_at(m) - lambda) * xm * xm * omq * omq;
        z = (z + ww * vals[m]) / q;
        vals[m - 1] = vals[m] + z;
        if vals[m - 1].abs() > OVERFLOW_LIMIT {
            return Err(QslError::Overflow {
                context: format!("march at lambda = {lambda:e}, index {}", m - 1),
                limit: OVERFLOW_LIMIT,
            });
        }
    }
    let w0 = (spec.v_at(0) - lambda) * a * a * omq * omq;
    let zs = (z + w0 * vals[0]) / q;
    let sup = vals[0] + zs;
    if !sup.is_finite() {
        return Err(QslError::Overflow {
            context: format!("march at lambda = {lambda:e}, super point"),
            limit: OVERFLOW_LIMIT,
        });
    }
    Ok((vals, sup, zs))
}

/// Worst relative three-term defect of `y` over the user lattice, using the
/// super-lattice value at the shallow end.
fn recurrence_residual(spec: &ProblemSpec, lambda: f64, vals: &[f64], sup: f64) -> f64 {
    let lat = spec.lattice();
    let q = lat.q();
    let omq = 1.0 - q;
    let mut worst = 0.0f64;
    for m in 0..lat.depth() {
        let xm = lat.point(m as i64);
        let cm = (1.0 + q) + (spec.v_at(m) - lambda) * xm * xm * omq * omq;
        let up = if m == 0 { sup } else { vals[m - 1] };
        let lhs = vals[m + 1] + q * up;
        let rhs = cm * vals[m];
        let scale = vals[m + 1]
            .abs()
            .max((q * up).abs())
            .max(rhs.abs())
            .max(1e-300);
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    worst
}

/// Direct marching solver for the IVP `y(0) = c1`, `D_{q^-1} y(0) = c2`.
///
/// Marches at an internally padded depth when the user lattice is too shallow
/// for machine-accurate seeding, then restricts to the user lattice.
pub fn solve_ivp_march(spec: &ProblemSpec, lambda: f64, c1: f64, c2: f64) -> Result<IVPSolution> {
    let lat = spec.lattice();
    let n_eff = effective_depth(lat.q(), lat.depth());
    let (mut vals, sup, _zs) = march_raw(spec, lambda, c1, c2, n_eff)?;
    vals.truncate(lat.depth() + 1);
    let residual = recurrence_residual(spec, lambda, &vals, sup);
    let phi = LatticeFn::new(*lat, vals, c1)?.with_super_value(sup);
    Ok(IVPSolution {
        lambda,
        phi,
        c1,
        c2,
        residual,
    })
}

/// The eigenfunction-normalized solution `phi(x, lambda)`: `c1 = 1`, `c2 = h`,
/// so that `D_{q^-1} phi(0) - h phi(0) = 0`.
pub fn phi_with_bc(spec: &ProblemSpec, lambda: f64) -> Result<IVPSolution> {
    solve_ivp_march(spec, lambda, 1.0, spec.h)
}

/// Characteristic-function march kept in scaled form; see `spectral`.
///
/// Returns `(y(a), zs, log_scale)` where the true values are
/// `y(a) * exp(log_scale)` etc.
pub(crate) fn march_boundary_scaled(spec: &ProblemSpec, lambda: f64) -> (f64, f64, f64) {
    let lat = spec.lattice();
    let q = lat.q();
    let a = lat.a();
    let omq = 1.0 - q;
    let n = lat.depth();
    let (c1, c2) = (1.0, spec.h);

    let beta = q * (spec.v.value_at_zero() - lambda) * c1 / (1.0 + q);
    let xn = a * q.powi(n as i32);
    let xn1 = a * q.powi(n as i32 - 1);
    let mut y = c1 + xn * c2 + beta * xn * xn;
    let mut z = c2 * xn1 * omq + beta * xn1 * xn1 * (1.0 - q * q);
    y += z;
    let mut log_scale = 0.0f64;
    for m in (1..n).rev() {
        let xm = a * q.powi(m as i32);
        let ww = (spec.v_at(m) - lambda) * xm * xm * omq * omq;
        z = (z + ww * y) / q;
        y += z;
        let mag = y.abs().max(z.abs());
        if mag > 1e140 {
            y /= mag;
            z /= mag;
            log_scale += mag.ln();
        }
    }
    let w0 = (spec.v_at(0) - lambda) * a * a * omq * omq;
    let zs = (z + w0 * y) / q;
    (y, zs, log_scale)
}

/// Sine-kernel `S_q(x, t) = sin(s x; q) cos(s t; q) - cos(s x; q) sin(s t; q)`
/// for real `s`.
pub fn s_q_kernel(x: f64, t: f64, s: f64, cfg: &QSeriesConfig) -> Result<f64> {
    Ok(qspecial::q_sin(s * x, cfg)? * qspecial::q_cos(s * t, cfg)?
        - qspecial::q_cos(s * x, cfg)? * qspecial::q_sin(s * t, cfg)?)
}

/// Volterra-series solver for the same IVP, iterating
/// `phi_{k+1}(x) = (1/s) \int_0^x S_q(x, xi) v(xi) phi_k(xi) dq xi`
/// from the free solution `c1 cos(s x; q) + c2 sin(s x; q)/s`.
///
/// Requires `lambda != 0`; the free solution is expressed through entire
/// functions of `lambda`, so negative `lambda` is fine.
pub fn solve_ivp_series(
    spec: &ProblemSpec,
    lambda: f64,
    c1: f64,
    c2: f64,
    tol: f64,
) -> Result<IVPSolution> {
    if lambda == 0.0 {
        return Err(QslError::Config {
            reason: "series solver requires lambda != 0; use the marching solver".into(),
        });
    }
    let lat = spec.lattice();
    let q = lat.q();
    let a = lat.a();
    let n_eff = effective_depth(q, lat.depth());
    let cfg = QSeriesConfig::new(q);

    // lattice points 0..=n_eff plus the super point a/q at slot n_eff+1
    let mut pts: Vec<f64> = (0..=n_eff as i32).map(|m| a * q.powi(m)).collect();
    pts.push(a / q);
    let sup_slot = n_eff + 1;
    let npts = pts.len();

    let mut pc = vec![0.0; npts];
    let mut ps = vec![0.0; npts];
    for (i, &x) in pts.iter().enumerate() {
        pc[i] = qspecial::phi_cos(lambda, x, &cfg)?;
        ps[i] = qspecial::phi_sin_over_s(lambda, x, &cfg)?;
    }
    let w: Vec<f64> = (0..=n_eff as i32).map(|m| (1.0 - q) * a * q.powi(m)).collect();
    let vv: Vec<f64> = (0..=n_eff).map(|m| spec.v_at(m)).collect();

    let mut term: Vec<f64> = (0..npts).map(|i| c1 * pc[i] + c2 * ps[i]).collect();
    let mut sum = term.clone();
    let mut converged = false;
    for _ in 0..200 {
        let mut next = vec![0.0; npts];
        for i in 0..npts {
            // integrate over lattice points strictly inside (0, x_i);
            // the j = i summand vanishes since S_q(x, x) = 0
            let j0 = if i == sup_slot { 0 } else { i + 1 };
            let mut acc = 0.0;
            for j in j0..=n_eff {
                acc += w[j] * (ps[i] * pc[j] - pc[i] * ps[j]) * vv[j] * term[j];
            }
            next[i] = acc;
        }
        let term_max = next.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let sum_max = sum.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        for (s, t) in sum.iter_mut().zip(next.iter()) {
            *s += t;
        }
        term = next;
        if term_max <= tol * sum_max.max(1e-300) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(QslError::SeriesDivergence { max_terms: 200 });
    }

    let sup = sum[sup_slot];
    sum.truncate(lat.depth() + 1);
    if sum.iter().any(|v| !v.is_finite()) || !sup.is_finite() {
        return Err(QslError::Overflow {
            context: format!("series solution at lambda = {lambda:e}"),
            limit: OVERFLOW_LIMIT,
        });
    }
    let residual = recurrence_residual(spec, lambda, &sum, sup);
    let phi = LatticeFn::new(*lat, sum, c1)?.with_super_value(sup);
    Ok(IVPSolution {
        lambda,
        phi,
        c1,
        c2,
        residual,
    })
}

/// Iterated sine-kernel Volterra kernel `W = sum_n W_n` with
/// `W_1(x, t) = (1/s) S_q(x, t) v(t)` and
/// `W_{n+1}(x, t) = (q/s) \int_t^x S_q(x, q eta) v(q eta) W_n(q eta, t) dq eta`,
/// tabulated on lattice pairs `x = x_m`, `t = x_j`, `j >= m`.
#[derive(Clone, Debug)]
pub struct VolterraKernel {
    pub w: BivariateFn,
    pub terms_used: usize,
}

pub fn volterra_kernel(spec: &ProblemSpec, s: f64, n_max: usize) -> Result<VolterraKernel> {
    if s == 0.0 {
        return Err(QslError::Config {
            reason: "volterra kernel requires s != 0".into(),
        });
    }
    let lat = spec.lattice();
    let q = lat.q();
    let n = lat.depth();
    let cfg = QSeriesConfig::new(q);
    let pts = lat.points();
    let wts = lat.weights();
    let vv = spec.v.values();

    let mut sin_v = vec![0.0; n + 1];
    let mut cos_v = vec![0.0; n + 1];
    for m in 0..=n {
        sin_v[m] = qspecial::q_sin(s * pts[m], &cfg)?;
        cos_v[m] = qspecial::q_cos(s * pts[m], &cfg)?;
    }
    let sq = |m: usize, j: usize| sin_v[m] * cos_v[j] - cos_v[m] * sin_v[j];

    let mut current = BivariateFn::zeros(*lat);
    for m in 0..=n {
        for j in m..=n {
            current.set(m, j, sq(m, j) * vv[j] / s);
        }
    }
    let mut total = current.clone();
    let mut terms_used = 1;
    for _ in 1..n_max {
        let mut next = BivariateFn::zeros(*lat);
        let mut next_max = 0.0f64;
        for m in 0..=n {
            for j in (m + 1)..=n {
                let mut acc = 0.0;
                for k in m..j {
                    acc += wts[k] * sq(m, k + 1) * vv[k + 1] * current.get(k + 1, j);
                }
                let val = q * acc / s;
                next.set(m, j, val);
                next_max = next_max.max(val.abs());
            }
        }
        let mut total_max = 0.0f64;
        for m in 0..=n {
            for j in m..=n {
                let t = total.get(m, j) + next.get(m, j);
                total.set(m, j, t);
                total_max = total_max.max(t.abs());
            }
        }
        terms_used += 1;
        if next_max <= 1e-18 * total_max.max(1e-300) {
            break;
        }
        current = next;
    }
    Ok(VolterraKernel {
        w: total,
        terms_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::q_wronskian_inv;

    fn lat(q: f64, depth: usize) -> QLattice {
        QLattice::new(q, 1.0, depth).unwrap()
    }

    fn sample_potential(l: QLattice) -> LatticeFn {
        LatticeFn::from_fn(l, |x| 0.4 * x / (1.0 + x))
    }

    #[test]
    fn free_problem_at_lambda_zero_is_constant() {
        let spec = ProblemSpec::free(lat(0.5, 48));
        let sol = solve_ivp_march(&spec, 0.0, 1.0, 0.0).unwrap();
        for v in sol.phi.values() {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!((sol.phi.super_value().unwrap() - 1.0).abs() < 1e-14);
        assert!(sol.residual < 1e-13);
    }

    #[test]
    fn march_matches_q_cosine_for_free_problem() {
        let l = lat(0.5, 48);
        let spec = ProblemSpec::free(l);
        let lam: f64 = 2.0;
        let s = lam.sqrt();
        let cfg = QSeriesConfig::new(l.q());
        let sol = solve_ivp_march(&spec, lam, 1.0, 0.0).unwrap();
        for (m, v) in sol.phi.values().iter().enumerate() {
            let x = l.point(m as i64);
            let expect = qspecial::q_cos(s * x, &cfg).unwrap();
            assert!(
                (v - expect).abs() <= 1e-11 * expect.abs().max(1.0),
                "m = {m}: {v} vs {expect}"
            );
        }
    }

    #[test]
    fn march_matches_q_sine_for_free_problem() {
        let l = lat(0.5, 48);
        let spec = ProblemSpec::free(l);
        let lam: f64 = 2.0;
        let s = lam.sqrt();
        let cfg = QSeriesConfig::new(l.q());
        let sol = solve_ivp_march(&spec, lam, 0.0, 1.0).unwrap();
        for (m, v) in sol.phi.values().iter().enumerate() {
            let x = l.point(m as i64);
            let expect = qspecial::q_sin(s * x, &cfg).unwrap() / s;
            assert!(
                (v - expect).abs() <= 1e-11 * expect.abs().max(1.0),
                "m = {m}: {v} vs {expect}"
            );
        }
    }

    #[test]
    fn dual_solvers_agree_with_potential() {
        for &q in &[0.3, 0.5, 0.8] {
            let l = lat(q, 48);
            let spec = ProblemSpec::new(l, sample_potential(l), 0.2, -0.1).unwrap();
            for &lam in &[0.5, 3.0, 40.0] {
                let a = solve_ivp_march(&spec, lam, 1.0, 0.2).unwrap();
                let b = solve_ivp_series(&spec, lam, 1.0, 0.2, 1e-12).unwrap();
                for (x, y) in a.phi.values().iter().zip(b.phi.values()) {
                    let scale = x.abs().max(1.0);
                    assert!((x - y).abs() <= 1e-9 * scale, "q={q} lam={lam}: {x} vs {y}");
                }
                let (sa, sb) = (
                    a.phi.super_value().unwrap(),
                    b.phi.super_value().unwrap(),
                );
                assert!((sa - sb).abs() <= 1e-9 * sa.abs().max(1.0));
            }
        }
    }

    #[test]
    fn residuals_are_tiny() {
        let l = lat(0.5, 48);
        let spec = ProblemSpec::new(l, sample_potential(l), 0.2, 0.0).unwrap();
        let a = solve_ivp_march(&spec, 7.0, 1.0, 0.2).unwrap();
        assert!(a.residual < 1e-12, "march residual {}", a.residual);
        let b = solve_ivp_series(&spec, 7.0, 1.0, 0.2, 1e-12).unwrap();
        assert!(b.residual < 1e-9, "series residual {}", b.residual);
    }

    #[test]
    fn series_rejects_lambda_zero() {
        let spec = ProblemSpec::free(lat(0.5, 16));
        assert!(solve_ivp_series(&spec, 0.0, 1.0, 0.0, 1e-12).is_err());
    }

    #[test]
    fn march_overflows_at_absurd_lambda() {
        let spec = ProblemSpec::free(lat(0.5, 48));
        let res = solve_ivp_march(&spec, 1e40, 1.0, 0.0);
        assert!(matches!(res, Err(QslError::Overflow { .. })));
    }

    #[test]
    fn wronskian_of_independent_solutions_is_constant() {
        let l = lat(0.4, 32);
        let spec = ProblemSpec::new(l, sample_potential(l), 0.0, 0.0).unwrap();
        let lam = 1.7;
        let y = solve_ivp_march(&spec, lam, 1.0, 0.3).unwrap();
        let z = solve_ivp_march(&spec, lam, 0.2, 1.0).unwrap();
        // expected constant c1_y c2_z - c2_y c1_z = 1.0 - 0.06
        let expect = 1.0 * 1.0 - 0.3 * 0.2;
        for n in 0..=6 {
            let w = q_wronskian_inv(&y.phi, &z.phi, n).unwrap();
            assert!((w - expect).abs() < 1e-9, "n = {n}: {w}");
        }
    }

    #[test]
    fn volterra_series_reconstructs_march() {
        let l = lat(0.5, 24);
        let spec = ProblemSpec::new(l, sample_potential(l), 0.0, 0.0).unwrap();
        let s = 1.3f64;
        let lam = s * s;
        let kern = volterra_kernel(&spec, s, 40).unwrap();
        assert!(kern.terms_used >= 2);
        let cfg = QSeriesConfig::new(l.q());
        let w = l.weights();
        // phi(x) = phi0(x) + \int_0^x W(x, t) phi0(t) dq t against the march
        let march = solve_ivp_march(&spec, lam, 1.0, 0.0).unwrap();
        for m in 0..=l.depth() {
            let x = l.point(m as i64);
            let phi0 = |t: f64| qspecial::q_cos(s * t, &cfg).unwrap();
            let mut val = phi0(x);
            for j in m..=l.depth() {
                val += w[j] * kern.w.get(m, j) * phi0(l.point(j as i64));
            }
            let got = march.phi.values()[m];
            assert!(
                (val - got).abs() <= 1e-6 * got.abs().max(1.0),
                "m = {m}: {val} vs {got}"
            );
        }
    }

    #[test]
    fn volterra_kernel_diagonal_vanishes() {
        let l = lat(0.5, 16);
        let spec = ProblemSpec::new(l, sample_potential(l), 0.0, 0.0).unwrap();
        let kern = volterra_kernel(&spec, 1.0, 30).unwrap();
        for m in 0..=l.depth() {
            assert_eq!(kern.w.get(m, m), 0.0);
        }
    }

    #[test]
    fn volterra_terms_obey_growth_bound() {
        // |W_n(x, t)| <= M^n L^n (1-q)^{n-1} q^{n(n-1)/2} x^{n-1} / (|s|^n (q; q)_{n-1})
        // with M = max |v|, L = max |S_q| over lattice pairs
        let l = lat(0.5, 16);
        let q = l.q();
        let spec = ProblemSpec::new(l, sample_potential(l), 0.0, 0.0).unwrap();
        let s = 1.1f64;
        let cfg = QSeriesConfig::new(q);
        let pts = l.points();
        let wts = l.weights();
        let vv = spec.v.values();
        let mut sin_v = vec![0.0; pts.len()];
        let mut cos_v = vec![0.0; pts.len()];
        for m in 0..pts.len() {
            sin_v[m] = qspecial::q_sin(s * pts[m], &cfg).unwrap();
            cos_v[m] = qspecial::q_cos(s * pts[m], &cfg).unwrap();
        }
        let sq = |m: usize, j: usize| sin_v[m] * cos_v[j] - cos_v[m] * sin_v[j];
        let big_m = vv.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut big_l = 0.0f64;
        for m in 0..pts.len() {
            for j in m..pts.len() {
                big_l = big_l.max(sq(m, j).abs());
            }
        }
        let mut current = BivariateFn::zeros(l);
        for m in 0..pts.len() {
            for j in m..pts.len() {
                current.set(m, j, sq(m, j) * vv[j] / s);
            }
        }
        for n in 1..=6usize {
            let bound = |x: f64| {
                big_m.powi(n as i32) * big_l.powi(n as i32) * (1.0 - q).powi(n as i32 - 1)
                    * q.powi((n * (n - 1) / 2) as i32)
                    * x.powi(n as i32 - 1)
                    / (s.abs().powi(n as i32) * crate::qspecial::q_pochhammer(q, q, Some(n - 1)))
            };
            for m in 0..pts.len() {
                for j in m..pts.len() {
                    assert!(
                        current.get(m, j).abs() <= bound(pts[m]) * (1.0 + 1e-9),
                        "n = {n}, m = {m}, j = {j}"
                    );
                }
            }
            let mut next = BivariateFn::zeros(l);
            for m in 0..pts.len() {
                for j in (m + 1)..pts.len() {
                    let mut acc = 0.0;
                    for k in m..j {
                        acc += wts[k] * sq(m, k + 1) * vv[k + 1] * current.get(k + 1, j);
                    }
                    next.set(m, j, q * acc / s);
                }
            }
            current = next;
        }
    }

    #[test]
    fn digest_distinguishes_problems() {
        let l = lat(0.5, 16);
        let a = ProblemSpec::free(l);
        let b = ProblemSpec::new(l, LatticeFn::constant(l, 0.0), 0.0, 0.1).unwrap();
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest(), ProblemSpec::free(l).digest());
    }
}
