use super::implicit::RealVarMap;
use super::{Jet, JetContext, ONE, ZERO};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub re: f64,
    pub im: f64,
    pub z_exponents: Vec<u32>,
    pub zbar_exponents: Vec<u32>,
}

impl Monomial {
    pub fn coef(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// A polynomial in `Z_1..Z_N` and their conjugates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialSpec {
    pub num_complex_vars: usize,
    pub monomials: Vec<Monomial>,
}

impl PolynomialSpec {
    pub fn new(num_complex_vars: usize) -> Self {
        PolynomialSpec {
            num_complex_vars,
            monomials: Vec::new(),
        }
    }

    /// Adds `c * Z^z * Zbar^zb`, merging with an existing term of the same exponents.
    pub fn term(mut self, c: C64, z: &[u32], zb: &[u32]) -> Self {
        self.add_term(c, z, zb);
        self
    }

    pub fn add_term(&mut self, c: C64, z: &[u32], zb: &[u32]) {
        assert_eq!(z.len(), self.num_complex_vars);
        assert_eq!(zb.len(), self.num_complex_vars);
        if let Some(m) = self
            .monomials
            .iter_mut()
            .find(|m| m.z_exponents == z && m.zbar_exponents == zb)
        {
            m.re += c.re;
            m.im += c.im;
            return;
        }
        self.monomials.push(Monomial {
            re: c.re,
            im: c.im,
            z_exponents: z.to_vec(),
            zbar_exponents: zb.to_vec(),
        });
    }

    /// `sum |Z_k|^2 - r^2`.
    pub fn sphere(num_complex_vars: usize, radius: f64) -> Self {
        let n = num_complex_vars;
        let mut p = PolynomialSpec::new(n);
        for k in 0..n {
            let mut e = vec![0; n];
            e[k] = 1;
            p.add_term(ONE, &e, &e);
        }
        p.add_term(C64::new(-radius * radius, 0.0), &vec![0; n], &vec![0; n]);
        p
    }

    /// The holomorphic coordinate `Z_k`.
    pub fn coordinate(num_complex_vars: usize, k: usize) -> Self {
        let mut e = vec![0; num_complex_vars];
        e[k] = 1;
        PolynomialSpec::new(num_complex_vars).term(ONE, &e, &vec![0; num_complex_vars])
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, m) in self.monomials.iter().enumerate() {
            if m.z_exponents.len() != self.num_complex_vars
                || m.zbar_exponents.len() != self.num_complex_vars
            {
                return Err(Error::Invalid(format!(
                    "monomial {i}: exponent vectors must have length {}",
                    self.num_complex_vars
                )));
            }
            if !seen.insert((m.z_exponents.clone(), m.zbar_exponents.clone())) {
                return Err(Error::Invalid(format!("monomial {i}: duplicate exponents")));
            }
            if !m.re.is_finite() || !m.im.is_finite() {
                return Err(Error::Invalid(format!(
                    "monomial {i}: non-finite coefficient"
                )));
            }
        }
        Ok(())
    }

    pub fn is_holomorphic(&self) -> bool {
        self.monomials
            .iter()
            .all(|m| m.zbar_exponents.iter().all(|&e| e == 0) || m.coef() == ZERO)
    }

    /// Whether the polynomial is real valued (invariant under swapping `Z` and `Zbar`
    /// exponents with conjugated coefficients).
    pub fn is_real(&self, tol: f64) -> bool {
        self.monomials.iter().all(|m| {
            let partner = self
                .monomials
                .iter()
                .find(|p| p.z_exponents == m.zbar_exponents && p.zbar_exponents == m.z_exponents)
                .map(|p| p.coef())
                .unwrap_or(ZERO);
            (partner - m.coef().conj()).norm() <= tol
        })
    }

    pub fn d_z(&self, k: usize) -> Self {
        self.derive(k, false)
    }

    pub fn d_zbar(&self, k: usize) -> Self {
        self.derive(k, true)
    }

    fn derive(&self, k: usize, bar: bool) -> Self {
        let mut p = PolynomialSpec::new(self.num_complex_vars);
        for m in &self.monomials {
            let e = if bar {
                m.zbar_exponents[k]
            } else {
                m.z_exponents[k]
            };
            if e == 0 {
                continue;
            }
            let mut z = m.z_exponents.clone();
            let mut zb = m.zbar_exponents.clone();
            if bar {
                zb[k] -= 1;
            } else {
                z[k] -= 1;
            }
            p.add_term(m.coef() * e as f64, &z, &zb);
        }
        p
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        let zb: Vec<C64> = z.iter().map(|x| x.conj()).collect();
        self.eval_split(z, &zb)
    }

    /// Evaluates with independent values for `Z` and `Zbar`.
    pub fn eval_split(&self, z: &[C64], zb: &[C64]) -> C64 {
        let mut s = ZERO;
        for m in &self.monomials {
            let mut t = m.coef();
            for k in 0..self.num_complex_vars {
                t *= z[k].powu(m.z_exponents[k]) * zb[k].powu(m.zbar_exponents[k]);
            }
            s += t;
        }
        s
    }

    /// Evaluates on jets standing for `Z_k` and `Zbar_k`.
    pub fn eval_jets(&self, z: &[Jet], zb: &[Jet]) -> Jet {
        let ctx = z[0].context().clone();
        let mut pz: Vec<Vec<Jet>> = z
            .iter()
            .map(|j| vec![Jet::real(&ctx, 1.0), j.clone()])
            .collect();
        let mut pzb: Vec<Vec<Jet>> = zb
            .iter()
            .map(|j| vec![Jet::real(&ctx, 1.0), j.clone()])
            .collect();
        fn power(cache: &mut Vec<Jet>, e: usize) -> Jet {
            while cache.len() <= e {
                let next = &cache[cache.len() - 1] * &cache[1];
                cache.push(next);
            }
            cache[e].clone()
        }
        let o = super::min_order(z.iter().chain(zb));
        let mut acc = Jet::zero(&ctx).truncate(o);
        for m in &self.monomials {
            let mut t: Option<Jet> = None;
            for k in 0..self.num_complex_vars {
                for (cache, e) in [
                    (&mut pz[k], m.z_exponents[k]),
                    (&mut pzb[k], m.zbar_exponents[k]),
                ] {
                    if e == 0 {
                        continue;
                    }
                    let p = power(cache, e as usize);
                    t = Some(match t {
                        None => p,
                        Some(t) => &t * &p,
                    });
                }
            }
            match t {
                None => acc = acc.add_const(m.coef()),
                Some(t) => acc.axpy(m.coef(), &t),
            }
        }
        acc
    }
}

/// Jets of `Z_k` and `Zbar_k` recentred at `base`, with real and imaginary parts
/// assigned to jet variables (or frozen) by `map`.
pub fn coordinate_jets(
    base: &[C64],
    map: &RealVarMap,
    ctx: &JetContext,
) -> Result<(Vec<Jet>, Vec<Jet>)> {
    if map.re.len() != base.len() || map.im.len() != base.len() {
        return Err(Error::Invalid(
            "variable map length differs from base".into(),
        ));
    }
    let mut z = Vec::with_capacity(base.len());
    let mut zb = Vec::with_capacity(base.len());
    for k in 0..base.len() {
        let mut a = Jet::constant(ctx, base[k]);
        let mut b = Jet::constant(ctx, base[k].conj());
        for (slot, unit) in [(map.re[k], ONE), (map.im[k], C64::new(0.0, 1.0))] {
            if let Some(v) = slot {
                if v >= ctx.num_vars() {
                    return Err(Error::VarIndex {
                        index: v,
                        len: ctx.num_vars(),
                    });
                }
                let x = Jet::var(ctx, v);
                a.axpy(unit, &x);
                b.axpy(unit.conj(), &x);
            }
        }
        z.push(a);
        zb.push(b);
    }
    Ok((z, zb))
}

/// Taylor jet of a polynomial recentred at `base`.
pub fn jet_from_polynomial(
    spec: &PolynomialSpec,
    base: &[C64],
    map: &RealVarMap,
    ctx: &JetContext,
) -> Result<Jet> {
    spec.validate()?;
    if base.len() != spec.num_complex_vars {
        return Err(Error::Invalid(format!(
            "base has {} entries, polynomial has {} variables",
            base.len(),
            spec.num_complex_vars
        )));
    }
    let (z, zb) = coordinate_jets(base, map, ctx)?;
    Ok(spec.eval_jets(&z, &zb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_squared() {
        let ctx = JetContext::new(2, 2);
        let p = PolynomialSpec::new(1).term(ONE, &[1], &[1]);
        let map = RealVarMap::full(1);
        let j = jet_from_polynomial(&p, &[ZERO], &map, &ctx).unwrap();
        assert_eq!(j.coeff(&[2, 0]), ONE);
        assert_eq!(j.coeff(&[0, 2]), ONE);
        assert_eq!(j.coeff(&[1, 1]), ZERO);
        assert_eq!(j.coeffs()[0], ZERO);
    }

    #[test]
    fn linear_recentering() {
        let ctx = JetContext::new(2, 1);
        let p = PolynomialSpec::coordinate(1, 0);
        let j = jet_from_polynomial(&p, &[ONE], &RealVarMap::full(1), &ctx).unwrap();
        assert_eq!(j.coeffs(), &[ONE, ONE, C64::new(0.0, 1.0)]);
    }

    #[test]
    fn sphere_vanishes_at_base() {
        let ctx = JetContext::new(4, 2);
        let p = PolynomialSpec::sphere(2, 1.0);
        let j = jet_from_polynomial(&p, &[ZERO, ONE], &RealVarMap::full(2), &ctx).unwrap();
        assert!(j.coeffs()[0].norm() < 1e-15);
    }

    #[test]
    fn bad_map_is_rejected() {
        let ctx = JetContext::new(1, 2);
        let p = PolynomialSpec::coordinate(1, 0);
        let r = jet_from_polynomial(&p, &[ONE], &RealVarMap::full(1), &ctx);
        assert!(matches!(r, Err(Error::VarIndex { .. })));
        let dup = PolynomialSpec {
            num_complex_vars: 1,
            monomials: vec![p.monomials[0].clone(), p.monomials[0].clone()],
        };
        assert!(dup.validate().is_err());
    }

    #[test]
    fn derivatives_and_reality() {
        let p = PolynomialSpec::sphere(2, 1.0)
            .term(C64::new(0.05, 0.0), &[2, 0], &[0, 2])
            .term(C64::new(0.05, 0.0), &[0, 2], &[2, 0]);
        assert!(p.is_real(1e-15));
        let d = p.d_zbar(1);
        let z = [C64::new(0.3, 0.1), C64::new(-0.2, 0.4)];
        let want = z[1] + 0.1 * z[0] * z[0] * z[1].conj();
        assert!((d.eval(&z) - want).norm() < 1e-15);
    }
}
