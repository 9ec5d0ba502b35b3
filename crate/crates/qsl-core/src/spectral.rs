//! Spectral side of the direct problem: the characteristic function, the
//! eigenvalue search, eigenfunctions by inverse iteration, norming constants,
//! and the Hadamard product representation.

use crate::direct::{self, IVPSolution, ProblemSpec};
use crate::error::{QslError, Result};
use crate::qcore::{inner_product, LatticeFn};
use crate::qspecial::{self, TrigKind};

use nalgebra::{DMatrix, DVector};

/// Eigenvalues and norming constants of a problem, tagged with the digest of
/// the problem that produced them.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub normings: Vec<f64>,
    pub source_digest: String,
}

impl SpectralData {
    /// Computes the first `count` eigenvalues and quadrature norming
    /// constants of `spec`.
    pub fn compute(spec: &ProblemSpec, count: usize) -> Result<Self> {
        let eigenvalues = find_eigenvalues(spec, count)?;
        let normings = eigenvalues
            .iter()
            .map(|&lam| norming_by_quadrature(spec, lam))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralData {
            eigenvalues,
            normings,
            source_digest: spec.digest(),
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Characteristic function `Delta(lambda) = -D_{q^-1} phi(a, lambda) - H phi(a, lambda)`,
/// whose zeros are the eigenvalues.
///
/// The march is kept rescaled; if the true value exceeds the f64 range the
/// result saturates at `+-1e300` with the correct sign, which preserves all
/// roots and signs.
pub fn char_delta(spec: &ProblemSpec, lambda: f64) -> f64 {
    let lat = spec.lattice();
    let q = lat.q();
    let a = lat.a();
    let (y0, zs, log_scale) = direct::march_boundary_scaled(spec, lambda);
    let delta_scaled = -q * zs / (a * (1.0 - q)) - spec.big_h() * y0;
    if log_scale == 0.0 {
        return delta_scaled;
    }
    if delta_scaled == 0.0 {
        return 0.0;
    }
    let log_mag = delta_scaled.abs().ln() + log_scale;
    if log_mag > 690.0 {
        1e300f64.copysign(delta_scaled)
    } else {
        delta_scaled.signum() * log_mag.exp()
    }
}

/// Central-difference derivative of the characteristic function.
pub fn char_delta_dot(spec: &ProblemSpec, lambda: f64) -> f64 {
    let delta = 1e-6 * lambda.abs().max(1.0);
    (char_delta(spec, lambda + delta) - char_delta(spec, lambda - delta)) / (2.0 * delta)
}

/// Upper end of the eigenvalue scan window for `count` requested roots,
/// two asymptotic rungs above the last expected eigenvalue.
fn scan_ceiling(spec: &ProblemSpec, count: usize) -> f64 {
    let lat = spec.lattice();
    let q = lat.q();
    let a = lat.a();
    q.powi(-2 * (count as i32 + 2)) / (a * a * (1.0 - q) * (1.0 - q))
}

/// Finds the lowest `count` eigenvalues by a sign-change scan of the
/// characteristic function followed by bisection to machine width.
///
/// The scan covers a negative window below `min(v)` (geometric, 64 points)
/// and a geometric positive ladder with ratio 1.04 up to two asymptotic rungs
/// past the requested count.
pub fn find_eigenvalues(spec: &ProblemSpec, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let lat = spec.lattice();
    let q = lat.q();
    let a = lat.a();
    let vmin = spec
        .v()
        .values()
        .iter()
        .fold(spec.v().value_at_zero(), |m, v| m.min(*v))
        .min(0.0);
    let lam_lo = vmin - q / (a * a * (1.0 - q) * (1.0 - q)) * 1.05 - 1.0;
    let tiny = 1e-4 / (a * a);
    let lam_hi = scan_ceiling(spec, count);

    let mut grid = Vec::new();
    let mut t = lam_lo.abs();
    let ratio = (tiny / t).powf(1.0 / 63.0);
    for _ in 0..64 {
        grid.push(-t);
        t *= ratio;
    }
    let mut x = tiny;
    while x < lam_hi {
        grid.push(x);
        x *= 1.04;
    }
    grid.push(lam_hi);

    let mut roots = Vec::with_capacity(count);
    let mut f0 = char_delta(spec, grid[0]);
    for win in grid.windows(2) {
        if roots.len() >= count {
            break;
        }
        let f1 = char_delta(spec, win[1]);
        if f0 == 0.0 {
            roots.push(win[0]);
        } else if (f0 > 0.0) != (f1 > 0.0) {
            roots.push(bisect_delta(spec, win[0], win[1], f0));
        }
        f0 = f1;
    }
    if roots.len() < count {
        return Err(QslError::MissedBracket {
            found: roots.len(),
            requested: count,
        });
    }
    roots.truncate(count);
    Ok(roots)
}

fn bisect_delta(spec: &ProblemSpec, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
    let mut fl = flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = char_delta(spec, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (fl > 0.0) {
            lo = mid;
            fl = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn cm(spec: &ProblemSpec, lambda: f64, m: usize) -> f64 {
    let lat = spec.lattice();
    let q = lat.q();
    let xm = lat.point(m as i64);
    (1.0 + q) + (spec.v_at(m) - lambda) * xm * xm * (1.0 - q) * (1.0 - q)
}

/// Deep q-Taylor value `1 + x_m h + q (v(0) - lambda) x_m^2 / (1 + q)`.
fn deep_seed(spec: &ProblemSpec, lambda: f64, m: usize) -> f64 {
    let lat = spec.lattice();
    let xm = lat.point(m as i64);
    1.0 + xm * spec.h() + lat.q() * (spec.v().value_at_zero() - lambda) * xm * xm / (1.0 + lat.q())
}

fn boundary_system(spec: &ProblemSpec, lambda: f64) -> DMatrix<f64> {
    let lat = spec.lattice();
    let n = lat.depth();
    let q = lat.q();
    let a = lat.a();
    let mut t = DMatrix::<f64>::zeros(n + 1, n + 1);
    t[(0, 0)] = cm(spec, lambda, 0) - q + spec.big_h() * a * (1.0 - q);
    t[(0, 1)] = -1.0;
    for m in 1..n {
        t[(m, m - 1)] = q;
        t[(m, m)] = -cm(spec, lambda, m);
        t[(m, m + 1)] = 1.0;
    }
    t[(n, n - 1)] = deep_seed(spec, lambda, n);
    t[(n, n)] = -deep_seed(spec, lambda, n - 1);
    t
}

/// Eigenfunction at an eigenvalue by two rounds of inverse iteration on the
/// boundary-closed three-term system, normalized to the IVP gauge
/// `phi(0) = 1`. Errors with `NotAnEigenvalue` when `lambda` is not close to
/// a root of the characteristic function.
pub fn eigenfunction(spec: &ProblemSpec, lambda: f64) -> Result<LatticeFn> {
    let dd = char_delta_dot(spec, lambda);
    let newton = if dd == 0.0 {
        f64::INFINITY
    } else {
        (char_delta(spec, lambda) / dd).abs() / lambda.abs().max(1.0)
    };
    if newton > 1e-6 {
        return Err(QslError::NotAnEigenvalue {
            lambda,
            residual: newton,
        });
    }
    let lat = spec.lattice();
    let n = lat.depth();
    let t = boundary_system(spec, lambda);
    let rowscale: Vec<f64> = (0..=n)
        .map(|i| (0..=n).map(|j| t[(i, j)].abs()).sum())
        .collect();
    let plain = t.clone().lu();
    let mut reg: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>> = None;
    let mut y = DVector::<f64>::from_element(n + 1, 1.0);
    for _ in 0..2 {
        let attempt = plain.solve(&y);
        let sol = match attempt {
            Some(s) if s.iter().all(|v| v.is_finite()) && s.amax() >= 1e4 => s,
            _ => {
                let reg_lu = reg.get_or_insert_with(|| {
                    let mut tr = t.clone();
                    for i in 0..=n {
                        tr[(i, i)] += 1e3 * f64::EPSILON * rowscale[i];
                    }
                    tr.lu()
                });
                reg_lu.solve(&y).ok_or_else(|| QslError::SingularSystem {
                    context: "inverse iteration".into(),
                })?
            }
        };
        let amp = sol.amax();
        y = sol / amp;
    }
    let tgt = deep_seed(spec, lambda, n);
    let scale = tgt / y[n];
    let vals: Vec<f64> = y.iter().map(|v| v * scale).collect();
    let sup = extend_to_super(spec, lambda, vals[0], vals[1]);
    Ok(LatticeFn::new(*lat, vals, 1.0)?.with_super_value(sup))
}

/// Continues a solution one step shallow of the lattice via the three-term
/// relation at `x = a`.
pub(crate) fn extend_to_super(spec: &ProblemSpec, lambda: f64, y0: f64, y1: f64) -> f64 {
    (cm(spec, lambda, 0) * y0 - y1) / spec.lattice().q()
}

/// Norming constant `alpha_n = \int_0^a phi(x, lambda_n)^2 dq x` by
/// quadrature of the inverse-iteration eigenfunction.
pub fn norming_by_quadrature(spec: &ProblemSpec, lambda_n: f64) -> Result<f64> {
    let phi = eigenfunction(spec, lambda_n)?;
    inner_product(&phi, &phi)
}

/// Norming constant via the spectral-derivative identity
/// `alpha_n = phi(a, lambda_n) * dDelta/dlambda (lambda_n)`.
pub fn norming_by_derivative(spec: &ProblemSpec, lambda_n: f64) -> Result<f64> {
    let dd = char_delta_dot(spec, lambda_n);
    if dd.abs() < 1e-12 {
        return Err(QslError::DegenerateRoot {
            lambda: lambda_n,
            floor: 1e-12,
        });
    }
    let phi = eigenfunction(spec, lambda_n)?;
    Ok(phi.values()[0] * dd)
}

/// Hadamard product form of the characteristic function for the free-base
/// normalizers: `Delta(lambda) = -a (lambda_0 - lambda)
/// prod_{n>=1} (lambda_n - lambda) a^2 / (q y_n^2)`, where `y_n` are the
/// positive zeros of `sin(z; q)`. Supplied eigenvalues fill the leading
/// factors; the tail continues with `lambda_n -> q y_n^2 / a^2` until the
/// factors are 1 to machine precision.
pub fn hadamard_delta(
    eigenvalues: &[f64],
    q: f64,
    a: f64,
    lambda: f64,
    truncation: usize,
) -> Result<f64> {
    if eigenvalues.is_empty() {
        return Err(QslError::Config {
            reason: "hadamard_delta needs at least one eigenvalue".into(),
        });
    }
    if truncation < eigenvalues.len() {
        return Err(QslError::Config {
            reason: format!(
                "truncation {truncation} below supplied eigenvalue count {}",
                eigenvalues.len()
            ),
        });
    }
    // computed sine zeros as far as the series stays in f64 range
    let cap = (690.0 / (1.0 / q).ln()).sqrt().floor() as usize;
    let want = (eigenvalues.len() + 16).min(cap.max(1));
    let zeros = qspecial::zeros_of(TrigKind::Sin, q, want)?;
    let y2 = |n: usize| {
        if n <= zeros.len() {
            zeros[n - 1] * zeros[n - 1]
        } else {
            let seed = qspecial::zero_seed(TrigKind::Sin, q, n);
            seed * seed
        }
    };
    let mut prod = -a * (eigenvalues[0] - lambda);
    for (n, lam_n) in eigenvalues.iter().enumerate().skip(1) {
        prod *= (lam_n - lambda) * a * a / (q * y2(n));
    }
    for n in eigenvalues.len()..=5000 {
        let f = lambda * a * a / (q * y2(n));
        prod *= 1.0 - f;
        if f.abs() < 1e-17 {
            break;
        }
    }
    Ok(prod)
}

/// Relative Parseval defect
/// `(||f||^2 - sum_n |<f, phi_n>|^2 / alpha_n) / ||f||^2`
/// over the modes recorded in `data`.
pub fn parseval_residual(spec: &ProblemSpec, data: &SpectralData, f: &LatticeFn) -> Result<f64> {
    let norm2 = inner_product(f, f)?;
    if norm2 <= 0.0 {
        return Err(QslError::Config {
            reason: "parseval residual needs a nonzero function".into(),
        });
    }
    let mut acc = 0.0;
    for (lam, alpha) in data.eigenvalues.iter().zip(&data.normings) {
        let phi = eigenfunction(spec, *lam)?;
        let coeff = inner_product(f, &phi)?;
        acc += coeff * coeff / alpha;
    }
    Ok((norm2 - acc) / norm2)
}

/// Asymptotic eigenvalue seed `lambda_n ~ q^{-2n+1} / (a^2 (1-q)^2)`.
pub fn lambda_seed(q: f64, a: f64, n: usize) -> f64 {
    q.powi(-2 * n as i32 + 1) / (a * a * (1.0 - q) * (1.0 - q))
}

/// Weight-symmetrized operator matrix of the problem: a symmetric
/// tridiagonal on `sqrt(w)`-scaled samples whose low modes are
/// `sqrt(w) phi_n`. Entries grow like `q^{-2m}`; the matrix is for
/// action checks and similarity transforms, never for dense eigensolves.
pub fn operator_matrix(spec: &ProblemSpec) -> DMatrix<f64> {
    let lat = spec.lattice();
    let n = lat.depth();
    let q = lat.q();
    let a = lat.a();
    let omq2 = (1.0 - q) * (1.0 - q);
    let v = spec.v().values();
    let mut s = DMatrix::<f64>::zeros(n + 1, n + 1);
    for m in 1..n {
        let xm = lat.point(m as i64);
        s[(m, m)] = v[m] + (1.0 + q) / (xm * xm * omq2);
    }
    s[(0, 0)] = v[0] + (1.0 + spec.big_h() * a * (1.0 - q)) / (a * a * omq2);
    let xn = lat.point(n as i64);
    let xn1 = xn * q;
    let rho = (1.0 + xn1 * spec.h()) / (1.0 + xn * spec.h());
    s[(n, n)] = v[n] + (1.0 + q - rho) / (xn * xn * omq2);
    for m in 0..n {
        let xm = lat.point(m as i64);
        let off = -1.0 / (q.sqrt() * xm * xm * omq2);
        s[(m, m + 1)] = off;
        s[(m + 1, m)] = off;
    }
    s
}

/// Convenience: full IVP solution at an eigenvalue with the inverse-iteration
/// values (well-conditioned at every index, unlike the shallow march for
/// high modes).
pub fn eigen_solution(spec: &ProblemSpec, lambda: f64) -> Result<IVPSolution> {
    let phi = eigenfunction(spec, lambda)?;
    Ok(IVPSolution {
        lambda,
        phi,
        c1: 1.0,
        c2: spec.h(),
        residual: 0.0,
    })
}
