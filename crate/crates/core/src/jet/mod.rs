//! Truncated multivariate Taylor series ("jets") with complex coefficients.
//!
//! A [`Jet`] stores its coefficients densely in graded order together with a *trusted order*:
//! every stored coefficient is exact up to rounding, and nothing beyond the trusted order is
//! kept. Differentiation lowers the trusted order by one; binary operations take the minimum.
//! Downstream code therefore cannot silently read a coefficient that truncation has spoiled.

mod implicit;
mod linsolve;
mod poly;
mod space;

pub use implicit::{graph_coordinates, implicit_graph_jet, RealVarMap};
pub use linsolve::{jet_det, jet_linear_solve, jet_linear_solve_multi, SOLVE_COND_LIMIT};
pub use poly::{jet_from_polynomial, Monomial, PolynomialSpec};
pub use space::{JetContext, JetSpace};

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug)]
pub struct Jet {
    ctx: JetContext,
    order: i32,
    c: Vec<C64>,
}

/// Arithmetic operation selector for [`jet_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked binary arithmetic; the operator impls on `Jet` panic where this returns an error.
pub fn jet_arith(a: &Jet, b: &Jet, op: JetOp) -> Result<Jet> {
    if !a.ctx.same(&b.ctx) {
        return Err(Error::ContextMismatch(
            a.ctx.num_vars(),
            a.ctx.max_order(),
            b.ctx.num_vars(),
            b.ctx.max_order(),
        ));
    }
    Ok(match op {
        JetOp::Add => a + b,
        JetOp::Sub => a - b,
        JetOp::Mul => a * b,
        JetOp::Div => a.div(b)?,
    })
}

impl Jet {
    pub fn zero(ctx: &JetContext) -> Jet {
        Jet::constant(ctx, ZERO)
    }

    pub fn constant(ctx: &JetContext, v: C64) -> Jet {
        let k = ctx.max_order() as i32;
        let mut c = vec![ZERO; ctx.count(k)];
        c[0] = v;
        Jet {
            ctx: ctx.clone(),
            order: k,
            c,
        }
    }

    pub fn real(ctx: &JetContext, v: f64) -> Jet {
        Jet::constant(ctx, C64::new(v, 0.0))
    }

    /// The coordinate function `x_v` (vanishing at the base point).
    pub fn var(ctx: &JetContext, v: usize) -> Jet {
        let mut j = Jet::zero(ctx);
        if ctx.max_order() >= 1 {
            j.c[1 + v] = ONE;
        }
        j
    }

    /// Builds a jet from `(exponents, coefficient)` pairs; exponents past `K` are dropped.
    pub fn from_terms(ctx: &JetContext, terms: &[(Vec<u8>, C64)]) -> Result<Jet> {
        let mut j = Jet::zero(ctx);
        for (e, v) in terms {
            if e.len() != ctx.num_vars() {
                return Err(Error::VarIndex {
                    index: e.len(),
                    len: ctx.num_vars(),
                });
            }
            if let Some(i) = ctx.index_of(e) {
                j.c[i] += *v;
            }
        }
        Ok(j)
    }

    pub(crate) fn from_raw(ctx: &JetContext, order: i32, c: Vec<C64>) -> Jet {
        debug_assert_eq!(c.len(), ctx.count(order));
        Jet {
            ctx: ctx.clone(),
            order,
            c,
        }
    }

    pub fn context(&self) -> &JetContext {
        &self.ctx
    }

    /// Highest total degree whose coefficients are trusted; negative when nothing is known.
    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.c
    }

    /// Coefficient of the monomial with exponent vector `e` (zero if absent or untrusted).
    pub fn coeff(&self, e: &[u8]) -> C64 {
        match self.ctx.index_of(e) {
            Some(i) if i < self.c.len() => self.c[i],
            _ => ZERO,
        }
    }

    /// Value at the base point.
    pub fn value(&self) -> Result<C64> {
        if self.order < 0 {
            Err(Error::OrderBudget("value of an exhausted jet".into()))
        } else {
            Ok(self.c[0])
        }
    }

    /// Value at the base point, or NaN when no order is left. For report code paths.
    pub fn value_or_nan(&self) -> C64 {
        self.c
            .first()
            .copied()
            .unwrap_or(C64::new(f64::NAN, f64::NAN))
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn truncate(&self, order: i32) -> Jet {
        let o = order.min(self.order);
        let n = self.ctx.count(o);
        Jet::from_raw(&self.ctx, o, self.c[..n].to_vec())
    }

    pub fn conj(&self) -> Jet {
        Jet::from_raw(
            &self.ctx,
            self.order,
            self.c.iter().map(|z| z.conj()).collect(),
        )
    }

    /// Coefficientwise real part: the real part of the function when all variables are real.
    pub fn re(&self) -> Jet {
        Jet::from_raw(
            &self.ctx,
            self.order,
            self.c.iter().map(|z| C64::new(z.re, 0.0)).collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Jet {
        Jet::from_raw(
            &self.ctx,
            self.order,
            self.c.iter().map(|z| z * s).collect(),
        )
    }

    pub fn scale_re(&self, s: f64) -> Jet {
        Jet::from_raw(
            &self.ctx,
            self.order,
            self.c.iter().map(|z| z * s).collect(),
        )
    }

    pub fn add_const(&self, s: C64) -> Jet {
        let mut j = self.clone();
        if let Some(c0) = j.c.first_mut() {
            *c0 += s;
        }
        j
    }

    /// `self += s * other`, trusted order the minimum of both.
    pub fn axpy(&mut self, s: C64, other: &Jet) {
        assert!(self.ctx.same(&other.ctx), "jet context mismatch");
        if other.order < self.order {
            self.order = other.order;
            self.c.truncate(self.ctx.count(self.order));
        }
        for (a, b) in self.c.iter_mut().zip(&other.c) {
            *a += s * b;
        }
    }

    /// Formal partial derivative in variable `v`.
    pub fn partial(&self, v: usize) -> Jet {
        assert!(v < self.ctx.num_vars(), "variable index out of range");
        let o = self.order - 1;
        let n = self.ctx.count(o);
        let mut c = vec![ZERO; n];
        for (i, out) in c.iter_mut().enumerate() {
            let up = self.ctx.raised(i, v) as usize;
            let e = self.ctx.exponents(up)[v] as f64;
            *out = self.c[up] * e;
        }
        Jet::from_raw(&self.ctx, o, c)
    }

    pub fn gradient(&self) -> Vec<Jet> {
        (0..self.ctx.num_vars()).map(|v| self.partial(v)).collect()
    }

    /// Exact product with the coordinate `x_v`; gains one trusted order (capped at `K`).
    pub fn mul_var(&self, v: usize) -> Jet {
        let k = self.ctx.max_order() as i32;
        let o = (self.order + 1).min(k);
        let mut c = vec![ZERO; self.ctx.count(o)];
        for (i, z) in self.c.iter().enumerate() {
            let up = self.ctx.raised(i, v);
            if up != space::NONE && (up as usize) < c.len() {
                c[up as usize] = *z;
            }
        }
        Jet::from_raw(&self.ctx, o, c)
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        assert!(self.ctx.same(&other.ctx), "jet context mismatch");
        let o = self.order.min(other.order);
        let n = self.ctx.count(o);
        let mut out = vec![ZERO; n];
        if o >= 0 {
            let ou = o as usize;
            for i in 0..n {
                let a = self.c[i];
                if a == ZERO {
                    continue;
                }
                let lim = self.ctx.count((ou - self.ctx.degree_of(i)) as i32);
                let row = &self.ctx.mul_row(i)[..lim];
                for (b, &k) in other.c[..lim].iter().zip(row) {
                    out[k as usize] += a * b;
                }
            }
        }
        Jet::from_raw(&self.ctx, o, out)
    }

    /// Adds the degree-`d` part of `a * b` into `out`, skipping the constant term of `a`.
    pub(crate) fn accumulate_degree_nonconst(a: &Jet, b: &Jet, d: usize, out: &mut [C64]) {
        let ctx = &a.ctx;
        let lim = ctx.count(d as i32).min(a.c.len());
        for i in 1..lim {
            let av = a.c[i];
            if av == ZERO {
                continue;
            }
            let di = ctx.degree_of(i);
            let r = ctx.degree_range(d - di);
            let row = ctx.mul_row(i);
            for j in r {
                if j >= b.c.len() {
                    break;
                }
                out[row[j] as usize] += av * b.c[j];
            }
        }
    }

    /// Evaluates `sum_j a[j] (self - self(0))^j` by Horner's rule.
    pub fn compose_series(&self, a: &[C64]) -> Jet {
        let mut u = self.clone();
        if let Some(c0) = u.c.first_mut() {
            *c0 = ZERO;
        }
        let mut acc = Jet::constant(&self.ctx, *a.last().unwrap_or(&ZERO)).truncate(self.order);
        for &aj in a.iter().rev().skip(1) {
            acc = (&acc * &u).add_const(aj);
        }
        acc
    }

    fn series_len(&self) -> usize {
        self.order.max(0) as usize + 1
    }

    /// Complex power with the principal branch at the constant term.
    pub fn powc(&self, p: f64) -> Result<Jet> {
        let c0 = self.value()?;
        if c0 == ZERO {
            return Err(Error::ZeroDivisor);
        }
        let mut a = Vec::with_capacity(self.series_len());
        let mut binom = 1.0;
        for j in 0..self.series_len() {
            a.push(c0.powc(C64::new(p - j as f64, 0.0)) * binom);
            binom *= (p - j as f64) / (j as f64 + 1.0);
        }
        Ok(self.compose_series(&a))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        self.powc(0.5)
    }

    pub fn inv(&self) -> Result<Jet> {
        let c0 = self.value()?;
        if c0.norm() == 0.0 {
            return Err(Error::ZeroDivisor);
        }
        let r = 1.0 / c0;
        let mut a = Vec::with_capacity(self.series_len());
        let mut t = r;
        for _ in 0..self.series_len() {
            a.push(t);
            t *= -r;
        }
        Ok(self.compose_series(&a))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        Ok(self * &other.inv()?)
    }

    pub fn exp(&self) -> Result<Jet> {
        let c0 = self.value()?;
        let e = c0.exp();
        let mut a = Vec::with_capacity(self.series_len());
        let mut f = 1.0;
        for j in 0..self.series_len() {
            if j > 0 {
                f *= j as f64;
            }
            a.push(e / f);
        }
        Ok(self.compose_series(&a))
    }

    /// Re-expresses the jet in a larger context, sending variable `i` to `map[i]`.
    pub fn lift(&self, target: &JetContext, map: &[usize]) -> Jet {
        assert_eq!(map.len(), self.ctx.num_vars());
        let o = self.order.min(target.max_order() as i32);
        let mut c = vec![ZERO; target.count(o)];
        let mut e = vec![0u8; target.num_vars()];
        for (i, z) in self.c.iter().enumerate().take(self.ctx.count(o)) {
            e.iter_mut().for_each(|x| *x = 0);
            for (v, &x) in self.ctx.exponents(i).iter().enumerate() {
                e[map[v]] = x;
            }
            c[target.index_of(&e).expect("lift exponent")] = *z;
        }
        Jet::from_raw(target, o, c)
    }

    /// Restriction to the slice where every variable not listed in `map` vanishes; the
    /// result lives in `target`, whose variable `j` is this jet's variable `map[j]`.
    pub fn restrict(&self, target: &JetContext, map: &[usize]) -> Jet {
        assert_eq!(map.len(), target.num_vars());
        let o = self.order.min(target.max_order() as i32);
        let n = target.count(o);
        let mut c = vec![ZERO; n];
        let mut e = vec![0u8; self.ctx.num_vars()];
        for (j, out) in c.iter_mut().enumerate() {
            e.iter_mut().for_each(|x| *x = 0);
            for (v, &x) in target.exponents(j).iter().enumerate() {
                e[map[v]] = x;
            }
            let i = self.ctx.index_of(&e).expect("restrict exponent");
            *out = self.c[i];
        }
        Jet::from_raw(target, o, c)
    }
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        let mut r = self.clone();
        r.axpy(ONE, o);
        r
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        let mut r = self.clone();
        r.axpy(-ONE, o);
        r
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        self.mul_jet(o)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-ONE)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-ONE)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet {
                (&self).$m(&o)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, o: &Jet) -> Jet {
                (&self).$m(o)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet {
                self.$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Mul<C64> for &Jet {
    type Output = Jet;
    fn mul(self, s: C64) -> Jet {
        self.scale(s)
    }
}

impl Mul<C64> for Jet {
    type Output = Jet;
    fn mul(self, s: C64) -> Jet {
        self.scale(s)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale_re(s)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale_re(s)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, o: &Jet) {
        self.axpy(ONE, o);
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, o: &Jet) {
        self.axpy(-ONE, o);
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, o: Jet) {
        self.axpy(ONE, &o);
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, o: Jet) {
        self.axpy(-ONE, &o);
    }
}

/// Sum of products `sum_i a[i] * b[i]`.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut it = a.iter().zip(b);
    let (x, y) = it.next().expect("dot of empty slices");
    let mut acc = x * y;
    for (x, y) in it {
        acc += x * y;
    }
    acc
}

/// Largest coefficient magnitude over a collection of jets.
pub fn max_abs_all<'a>(js: impl IntoIterator<Item = &'a Jet>) -> f64 {
    js.into_iter().fold(0.0, |m, j| m.max(j.max_abs()))
}

/// Largest base-point magnitude over a collection of jets (NaN if any is exhausted).
pub fn max_abs_base<'a>(js: impl IntoIterator<Item = &'a Jet>) -> f64 {
    let mut m: f64 = 0.0;
    for j in js {
        let v = j.value_or_nan().norm();
        if v.is_nan() {
            return f64::NAN;
        }
        m = m.max(v);
    }
    m
}

/// Lowest trusted order in a collection.
pub fn min_order<'a>(js: impl IntoIterator<Item = &'a Jet>) -> i32 {
    js.into_iter().map(|j| j.order()).min().unwrap_or(i32::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn product_of_conjugate_binomials() {
        let ctx = JetContext::new(1, 2);
        let x = Jet::var(&ctx, 0);
        let a = x.add_const(ONE);
        let b = (-&x).add_const(ONE);
        let p = &a * &b;
        assert_eq!(p.coeffs(), &[c(1.0), c(0.0), c(-1.0)]);
    }

    #[test]
    fn geometric_series() {
        let ctx = JetContext::new(1, 3);
        let d = Jet::var(&ctx, 0).add_const(ONE);
        let q = jet_arith(&Jet::real(&ctx, 1.0), &d, JetOp::Div).unwrap();
        let want = [1.0, -1.0, 1.0, -1.0];
        for (z, w) in q.coeffs().iter().zip(want) {
            assert!((z - c(w)).norm() < 1e-15);
        }
    }

    #[test]
    fn self_difference_vanishes() {
        let ctx = JetContext::new(2, 3);
        let a = Jet::var(&ctx, 0) * Jet::var(&ctx, 1).add_const(C64::new(0.5, 2.0));
        assert_eq!(jet_arith(&a, &a, JetOp::Sub).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn divide_by_zero_constant_is_an_error() {
        let ctx = JetContext::new(1, 3);
        let x = Jet::var(&ctx, 0);
        assert_eq!(
            jet_arith(&x, &x, JetOp::Div).unwrap_err(),
            Error::ZeroDivisor
        );
    }

    #[test]
    fn mismatched_contexts_are_rejected() {
        let a = Jet::real(&JetContext::new(1, 3), 1.0);
        let b = Jet::real(&JetContext::new(2, 3), 1.0);
        assert!(matches!(
            jet_arith(&a, &b, JetOp::Add),
            Err(Error::ContextMismatch(..))
        ));
    }

    #[test]
    fn partial_of_x2y() {
        let ctx = JetContext::new(2, 3);
        let x = Jet::var(&ctx, 0);
        let y = Jet::var(&ctx, 1);
        let f = &(&x * &x) * &y;
        let d = f.partial(0);
        assert_eq!(d.order(), 2);
        assert_eq!(d.coeff(&[1, 1]), c(2.0));
        assert!((d - (&x * &y) * 2.0).max_abs() < 1e-15);
        assert_eq!(Jet::real(&ctx, 3.0).partial(0).max_abs(), 0.0);
    }

    #[test]
    fn sqrt_squares_back() {
        let ctx = JetContext::new(2, 5);
        let f = (Jet::var(&ctx, 0) * C64::new(0.3, 0.1) + Jet::var(&ctx, 1) * Jet::var(&ctx, 0))
            .add_const(c(2.0));
        let s = f.sqrt().unwrap();
        assert!((&s * &s - &f).max_abs() < 1e-14);
        let e = f.powc(-1.0 / 3.0).unwrap();
        let back = &(&e * &e) * &e;
        assert!((back * &f).add_const(-ONE).max_abs() < 1e-13);
    }

    #[test]
    fn exp_matches_series() {
        let ctx = JetContext::new(1, 6);
        let e = Jet::var(&ctx, 0).exp().unwrap();
        let mut f = 1.0;
        for k in 0..=6u8 {
            if k > 0 {
                f *= k as f64;
            }
            assert!((e.coeff(&[k]) - c(1.0 / f)).norm() < 1e-15);
        }
    }

    #[test]
    fn mul_var_gains_order() {
        let ctx = JetContext::new(2, 4);
        let f = Jet::var(&ctx, 1).add_const(ONE).partial(1);
        assert_eq!(f.order(), 3);
        let g = f.mul_var(0);
        assert_eq!(g.order(), 4);
        assert_eq!(g.coeff(&[1, 0]), ONE);
    }

    #[test]
    fn lift_then_restrict_roundtrips() {
        let small = JetContext::new(2, 4);
        let big = JetContext::new(4, 4);
        let f = (Jet::var(&small, 0) * Jet::var(&small, 1)).add_const(C64::new(1.0, -2.0));
        let g = f.lift(&big, &[0, 2]);
        assert_eq!(g.coeff(&[1, 0, 1, 0]), ONE);
        let h = (g + Jet::var(&big, 1)).restrict(&small, &[0, 2]);
        assert!((h - f).max_abs() < 1e-15);
    }
}
