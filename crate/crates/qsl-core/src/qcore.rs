//! q-lattice geometry, lattice-sampled functions, and q-calculus primitives.
//!
//! All computations live on the finite geometric lattice `{a q^n : n = 0..depth}`
//! together with the limit value `f(0)` and, where needed, the super-lattice
//! point `a/q`.

use crate::error::{QslError, Result};

/// Points with `a q^n` below this magnitude are rejected as underflowed.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Geometric lattice `{a q^n}` for `n = 0..=depth`, with `0 < q < 1` and `a > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QLattice {
    q: f64,
    a: f64,
    depth: usize,
}

impl QLattice {
    pub fn new(q: f64, a: f64, depth: usize) -> Result<Self> {
        if !(q.is_finite() && q > 0.0 && q < 1.0) {
            return Err(QslError::InvalidLattice {
                reason: format!("q must satisfy 0 < q < 1, got {q}"),
            });
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(QslError::InvalidLattice {
                reason: format!("a must be positive and finite, got {a}"),
            });
        }
        if depth < 2 {
            return Err(QslError::InvalidLattice {
                reason: format!("depth must be at least 2, got {depth}"),
            });
        }
        let deepest = a * q.powi(depth as i32);
        if deepest < UNDERFLOW_FLOOR {
            return Err(QslError::InvalidLattice {
                reason: format!("deepest point a*q^depth = {deepest:e} underflows"),
            });
        }
        Ok(QLattice { q, a, depth })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of lattice points, `depth + 1`.
    pub fn len(&self) -> usize {
        self.depth + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice point `a q^n`. Index `-1` addresses the super-lattice point `a/q`.
    ///
    /// Panics if `n < -1` or `n > depth`.
    pub fn point(&self, n: i64) -> f64 {
        assert!(
            (-1..=self.depth as i64).contains(&n),
            "lattice index {n} out of range [-1, {}]",
            self.depth
        );
        self.a * self.q.powi(n as i32)
    }

    /// All lattice points `a q^0 .. a q^depth`, descending.
    pub fn points(&self) -> Vec<f64> {
        (0..=self.depth as i64).map(|n| self.point(n)).collect()
    }

    /// Jackson weights `w_n = (1 - q) a q^n` for the integral over `(0, a]`.
    pub fn weights(&self) -> Vec<f64> {
        let f = 1.0 - self.q;
        self.points().into_iter().map(|x| f * x).collect()
    }
}

/// A real function sampled on a `QLattice`, with its value at 0 and an
/// optional super-lattice value `f(a/q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFn {
    lattice: QLattice,
    values: Vec<f64>,
    value_at_zero: f64,
    super_value: Option<f64>,
}

impl LatticeFn {
    pub fn new(lattice: QLattice, values: Vec<f64>, value_at_zero: f64) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(QslError::InvalidLattice {
                reason: format!(
                    "sample count {} does not match lattice size {}",
                    values.len(),
                    lattice.len()
                ),
            });
        }
        if !value_at_zero.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(QslError::InvalidLattice {
                reason: "lattice function samples must be finite".into(),
            });
        }
        Ok(LatticeFn {
            lattice,
            values,
            value_at_zero,
            super_value: None,
        })
    }

    /// Samples a closure at every lattice point; `f(0)` is taken from the closure at 0.
    pub fn from_fn(lattice: QLattice, f: impl Fn(f64) -> f64) -> Self {
        let values = lattice.points().into_iter().map(&f).collect();
        LatticeFn {
            lattice,
            values,
            value_at_zero: f(0.0),
            super_value: None,
        }
    }

    pub fn constant(lattice: QLattice, c: f64) -> Self {
        LatticeFn {
            lattice,
            values: vec![c; lattice.len()],
            value_at_zero: c,
            super_value: Some(c),
        }
    }

    pub fn with_super_value(mut self, s: f64) -> Self {
        self.super_value = Some(s);
        self
    }

    pub fn lattice(&self) -> &QLattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `a q^n`; index `-1` returns the super-lattice value if present.
    pub fn value(&self, n: i64) -> Result<f64> {
        if n == -1 {
            return self.super_value.ok_or(QslError::MissingSuperValue);
        }
        if n < 0 || n > self.lattice.depth as i64 {
            return Err(QslError::IndexOutOfRange {
                index: n,
                depth: self.lattice.depth,
            });
        }
        Ok(self.values[n as usize])
    }

    pub fn value_at_zero(&self) -> f64 {
        self.value_at_zero
    }

    pub fn super_value(&self) -> Option<f64> {
        self.super_value
    }

    /// Forward q-derivative `D_q f(x) = (f(x) - f(qx)) / (x - qx)` at `x = a q^n`.
    ///
    /// Defined for `n = 0..depth-1`; at `n = depth` the shifted point leaves the
    /// lattice.
    pub fn dq(&self, n: usize) -> Result<f64> {
        if n + 1 > self.lattice.depth {
            return Err(QslError::IndexOutOfRange {
                index: n as i64,
                depth: self.lattice.depth,
            });
        }
        let x = self.lattice.point(n as i64);
        Ok((self.values[n] - self.values[n + 1]) / (x * (1.0 - self.lattice.q)))
    }

    /// Backward q-derivative
    /// `D_{q^-1} f(x) = q (f(x/q) - f(x)) / (x (1 - q))` at `x = a q^n`.
    ///
    /// At `n = 0` this consumes the super-lattice value `f(a/q)`.
    pub fn dq_inv(&self, n: usize) -> Result<f64> {
        if n > self.lattice.depth {
            return Err(QslError::IndexOutOfRange {
                index: n as i64,
                depth: self.lattice.depth,
            });
        }
        let up = if n == 0 {
            self.super_value.ok_or(QslError::MissingSuperValue)?
        } else {
            self.values[n - 1]
        };
        let x = self.lattice.point(n as i64);
        let q = self.lattice.q;
        Ok(q * (up - self.values[n]) / (x * (1.0 - q)))
    }

    /// `D_{q^-1} f` continued to `x = 0`, estimated from the two deepest lattice
    /// slopes with a Richardson combination. Errors when the two estimates
    /// disagree by more than `1e-8` relative.
    pub fn dq_inv_at_zero(&self) -> Result<f64> {
        let n = self.lattice.depth;
        let s0 = (self.values[n] - self.value_at_zero) / self.lattice.point(n as i64);
        let s1 = (self.values[n - 1] - self.value_at_zero) / self.lattice.point(n as i64 - 1);
        let scale = s0.abs().max(s1.abs()).max(1.0);
        if (s0 - s1).abs() > 1e-8 * scale {
            return Err(QslError::NonConvergentTail { s0, s1 });
        }
        let q = self.lattice.q;
        Ok((s0 - q * s1) / (1.0 - q))
    }

    /// Heuristic check that the deep tail approaches `f(0)` geometrically,
    /// rejecting oscillating or non-decaying tails.
    pub fn is_q_regular(&self, tol: f64) -> bool {
        let n = self.lattice.depth;
        if n < 5 {
            return true;
        }
        let scale = self
            .values
            .iter()
            .fold(self.value_at_zero.abs(), |m, v| m.max(v.abs()))
            .max(1e-300);
        let dev = |j: usize| (self.values[j] - self.value_at_zero).abs();
        let ok = |far: usize, near: usize| {
            dev(near) <= tol * scale || dev(near) <= 0.9 * dev(far)
        };
        ok(n - 3, n) && ok(n - 4, n - 1)
    }
}

/// A real function of two lattice variables, stored row-major over
/// `(depth+1) x (depth+1)` index pairs.
#[derive(Clone, Debug)]
pub struct BivariateFn {
    lattice: QLattice,
    values: Vec<f64>,
}

impl BivariateFn {
    pub fn zeros(lattice: QLattice) -> Self {
        let n = lattice.len();
        BivariateFn {
            lattice,
            values: vec![0.0; n * n],
        }
    }

    pub fn lattice(&self) -> &QLattice {
        &self.lattice
    }

    pub fn get(&self, m: usize, j: usize) -> f64 {
        let n = self.lattice.len();
        assert!(m < n && j < n, "bivariate index ({m}, {j}) out of range");
        self.values[m * n + j]
    }

    pub fn set(&mut self, m: usize, j: usize, v: f64) {
        let n = self.lattice.len();
        assert!(m < n && j < n, "bivariate index ({m}, {j}) out of range");
        self.values[m * n + j] = v;
    }

    /// Largest absolute asymmetry `|F(x,y) - F(y,x)|` over the grid.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.lattice.len();
        let mut worst = 0.0f64;
        for m in 0..n {
            for j in (m + 1)..n {
                worst = worst.max((self.get(m, j) - self.get(j, m)).abs());
            }
        }
        worst
    }
}

/// Result of a Jackson integral: the sum and the magnitude of its last
/// retained term, as a crude tail estimate.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    pub tail: f64,
}

/// Jackson integral `\int_0^{x_upper} f dq = (1-q) sum_{n>=upper} x_n f(x_n)`,
/// truncated at the lattice depth.
pub fn jackson_integral(f: &LatticeFn, upper_index: usize) -> Quadrature {
    let lat = f.lattice();
    assert!(upper_index <= lat.depth(), "upper index out of range");
    let w = lat.weights();
    let mut value = 0.0;
    for n in (upper_index..=lat.depth()).rev() {
        value += w[n] * f.values()[n];
    }
    let tail = (w[lat.depth()] * f.values()[lat.depth()]).abs();
    Quadrature { value, tail }
}

/// Weighted inner product `\int_0^a f g dq` over the shared lattice.
pub fn inner_product(f: &LatticeFn, g: &LatticeFn) -> Result<f64> {
    if f.lattice() != g.lattice() {
        return Err(QslError::LatticeMismatch);
    }
    let w = f.lattice().weights();
    Ok(w
        .iter()
        .zip(f.values().iter().zip(g.values()))
        .map(|(w, (a, b))| w * a * b)
        .sum())
}

/// q-Wronskian `W(y, z)(x) = y(x) D_{q^-1} z(x) - z(x) D_{q^-1} y(x)` at `a q^n`.
pub fn q_wronskian_inv(y: &LatticeFn, z: &LatticeFn, n: usize) -> Result<f64> {
    if y.lattice() != z.lattice() {
        return Err(QslError::LatticeMismatch);
    }
    Ok(y.value(n as i64)? * z.dq_inv(n)? - z.value(n as i64)? * y.dq_inv(n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat() -> QLattice {
        QLattice::new(0.5, 1.0, 16).unwrap()
    }

    #[test]
    fn lattice_validation() {
        assert!(QLattice::new(0.0, 1.0, 8).is_err());
        assert!(QLattice::new(1.0, 1.0, 8).is_err());
        assert!(QLattice::new(0.5, -1.0, 8).is_err());
        assert!(QLattice::new(0.5, 1.0, 1).is_err());
        assert!(QLattice::new(1e-30, 1.0, 11).is_err());
        assert!(QLattice::new(0.5, 1.0, 48).is_ok());
    }

    #[test]
    fn points_and_weights() {
        let l = lat();
        let pts = l.points();
        assert_eq!(pts.len(), 17);
        assert!((pts[0] - 1.0).abs() < 1e-15);
        assert!((pts[3] - 0.125).abs() < 1e-15);
        assert!((l.point(-1) - 2.0).abs() < 1e-15);
        let w = l.weights();
        assert!((w[0] - 0.5).abs() < 1e-15);
        assert!((w[2] - 0.125).abs() < 1e-15);
    }

    #[test]
    fn dq_of_monomial() {
        // D_q x^2 = (1 + q) x, exactly in q-calculus.
        let l = lat();
        let f = LatticeFn::from_fn(l, |x| x * x);
        for n in 0..l.depth() {
            let x = l.point(n as i64);
            let expect = (1.0 + l.q()) * x;
            assert!(
                (f.dq(n).unwrap() - expect).abs() <= 1e-14 * expect.abs(),
                "n = {n}"
            );
        }
        assert!(f.dq(l.depth()).is_err());
    }

    #[test]
    fn dq_inv_of_monomial() {
        // D_{q^-1} x^2 = (1 + 1/q) q x ... check against direct formula on x^2:
        // q((x/q)^2 - x^2)/(x(1-q)) = x (1 - q^2)/(q (1-q)) * q ... evaluate numerically.
        let l = lat();
        let q = l.q();
        let f = LatticeFn::from_fn(l, |x| x * x).with_super_value((l.a() / q).powi(2));
        for n in 0..=l.depth() {
            let x = l.point(n as i64);
            let expect = q * ((x / q).powi(2) - x * x) / (x * (1.0 - q));
            assert!((f.dq_inv(n).unwrap() - expect).abs() <= 1e-13 * expect.abs().max(1.0));
        }
        // same as (1 + q) x / q for x^2
        let x0 = l.point(0);
        assert!((f.dq_inv(0).unwrap() - (1.0 + q) * x0 / q).abs() < 1e-13);
    }

    #[test]
    fn dq_inv_needs_super_value() {
        let f = LatticeFn::from_fn(lat(), |x| x);
        assert!(matches!(f.dq_inv(0), Err(QslError::MissingSuperValue)));
        assert!(f.dq_inv(1).is_ok());
    }

    #[test]
    fn dq_inv_at_zero_linear() {
        let l = lat();
        let f = LatticeFn::from_fn(l, |x| 3.0 + 2.0 * x);
        let d = f.dq_inv_at_zero().unwrap();
        assert!((d - 2.0).abs() < 1e-10);
    }

    #[test]
    fn dq_inv_at_zero_rejects_rough_tail() {
        let l = lat();
        let mut vals: Vec<f64> = l.points().iter().map(|x| x.sqrt()).collect();
        let f = LatticeFn::new(l, std::mem::take(&mut vals), 0.0).unwrap();
        // slope of sqrt(x) diverges at 0; the two estimates disagree badly
        assert!(f.dq_inv_at_zero().is_err());
    }

    #[test]
    fn jackson_integral_of_one() {
        // \int_0^a 1 dq = (1-q) a sum q^n = a (1 - q^{depth+1})
        let l = lat();
        let f = LatticeFn::constant(l, 1.0);
        let quad = jackson_integral(&f, 0);
        let expect = l.a() * (1.0 - l.q().powi(l.depth() as i32 + 1));
        assert!((quad.value - expect).abs() < 1e-15);
        assert!(quad.tail > 0.0 && quad.tail < 1e-4);
    }

    #[test]
    fn jackson_integral_of_x() {
        // \int_0^a x dq = a^2 (1-q)/(1-q^2) * (1 - (q^2)^{depth+1})
        let l = lat();
        let f = LatticeFn::from_fn(l, |x| x);
        let quad = jackson_integral(&f, 0);
        let q2 = l.q() * l.q();
        let expect =
            l.a() * l.a() * (1.0 - l.q()) / (1.0 - q2) * (1.0 - q2.powi(l.depth() as i32 + 1));
        assert!((quad.value - expect).abs() < 1e-15);
    }

    #[test]
    fn jackson_integral_upper_shift() {
        // \int_0^{qx} f = \int_0^x f - w_0 f(a) when upper index moves one step
        let l = lat();
        let f = LatticeFn::from_fn(l, |x| 1.0 / (1.0 + x));
        let all = jackson_integral(&f, 0).value;
        let inner = jackson_integral(&f, 1).value;
        let w0 = l.weights()[0];
        assert!((all - inner - w0 * f.values()[0]).abs() < 1e-15);
    }

    #[test]
    fn inner_product_mismatch() {
        let f = LatticeFn::constant(lat(), 1.0);
        let g = LatticeFn::constant(QLattice::new(0.5, 1.0, 8).unwrap(), 1.0);
        assert!(matches!(
            inner_product(&f, &g),
            Err(QslError::LatticeMismatch)
        ));
    }

    #[test]
    fn wronskian_of_dependent_functions_vanishes() {
        let l = lat();
        let f = LatticeFn::from_fn(l, |x| 1.0 + x).with_super_value(1.0 + l.a() / l.q());
        let g = LatticeFn::from_fn(l, |x| 3.0 * (1.0 + x))
            .with_super_value(3.0 * (1.0 + l.a() / l.q()));
        for n in 0..4 {
            assert!(q_wronskian_inv(&f, &g, n).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn regularity_classification() {
        let l = lat();
        let smooth = LatticeFn::from_fn(l, |x| 2.0 + x);
        assert!(smooth.is_q_regular(1e-10));
        let mut vals = vec![0.0; l.len()];
        for (n, v) in vals.iter_mut().enumerate() {
            *v = if n % 2 == 0 { 1.0 } else { -1.0 };
        }
        let osc = LatticeFn::new(l, vals, 0.0).unwrap();
        assert!(!osc.is_q_regular(1e-10));
    }

    #[test]
    fn bivariate_storage() {
        let mut b = BivariateFn::zeros(lat());
        b.set(2, 5, 1.5);
        assert_eq!(b.get(2, 5), 1.5);
        assert_eq!(b.get(5, 2), 0.0);
        assert!((b.symmetry_defect() - 1.5).abs() < 1e-15);
        b.set(5, 2, 1.5);
        assert_eq!(b.symmetry_defect(), 0.0);
    }
}
