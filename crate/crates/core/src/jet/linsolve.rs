use super::{Jet, ONE, ZERO};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Constant-term matrices with a larger 2-norm condition number are rejected.
pub const SOLVE_COND_LIMIT: f64 = 1e12;

/// Solves `A x = b` for a square jet matrix `A` (given as rows).
pub fn jet_linear_solve(a: &[Vec<Jet>], b: &[Jet]) -> Result<Vec<Jet>> {
    Ok(jet_linear_solve_multi(a, &[b.to_vec()])?.pop().unwrap())
}

/// Solves `A x_r = b_r` for several right-hand sides sharing one factorization.
///
/// The constant-term system is factored once; each higher degree is then obtained from the
/// lower ones, since `(A x)_d = A_0 x_d + sum_{e>0} A_e x_{d-e}`.
pub fn jet_linear_solve_multi(a: &[Vec<Jet>], rhs: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let n = a.len();
    if n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid(
            "jet_linear_solve needs a square matrix".into(),
        ));
    }
    if rhs.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid("right-hand side length mismatch".into()));
    }
    let ctx = a[0][0].context().clone();
    for j in a.iter().flatten().chain(rhs.iter().flatten()) {
        if !j.context().same(&ctx) {
            return Err(Error::ContextMismatch(
                ctx.num_vars(),
                ctx.max_order(),
                j.context().num_vars(),
                j.context().max_order(),
            ));
        }
    }
    let o = super::min_order(a.iter().flatten().chain(rhs.iter().flatten()));
    if o < 0 {
        return Err(Error::OrderBudget(
            "linear solve with exhausted jets".into(),
        ));
    }
    let a0 = DMatrix::from_fn(n, n, |i, j| a[i][j].coeffs()[0]);
    let sv = a0.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(cond < SOLVE_COND_LIMIT) {
        return Err(Error::Singular(cond));
    }
    let lu = a0.lu();
    let len = ctx.count(o);
    let mut xs: Vec<Vec<Jet>> = rhs
        .iter()
        .map(|_| {
            (0..n)
                .map(|_| Jet::from_raw(&ctx, o, vec![ZERO; len]))
                .collect()
        })
        .collect();
    let mut buf = vec![vec![ZERO; len]; n];
    for d in 0..=(o as usize) {
        let range = ctx.degree_range(d);
        for (b, x) in rhs.iter().zip(xs.iter_mut()) {
            for i in 0..n {
                let row = &mut buf[i];
                for k in range.clone() {
                    row[k] = b[i].coeffs()[k];
                }
                if d > 0 {
                    let mut acc = vec![ZERO; len];
                    for j in 0..n {
                        Jet::accumulate_degree_nonconst(&a[i][j], &x[j], d, &mut acc);
                    }
                    for k in range.clone() {
                        row[k] -= acc[k];
                    }
                }
            }
            for k in range.clone() {
                let v = DVector::from_fn(n, |i, _| buf[i][k]);
                let s = lu.solve(&v).ok_or(Error::Singular(f64::INFINITY))?;
                for j in 0..n {
                    x[j].c[k] = s[j];
                }
            }
        }
    }
    Ok(xs)
}

/// Determinant by Gaussian elimination with pivots chosen on constant terms.
pub fn jet_det(a: &[Vec<Jet>]) -> Result<Jet> {
    let n = a.len();
    let mut m: Vec<Vec<Jet>> = a.to_vec();
    let ctx = m[0][0].context().clone();
    let mut det = Jet::constant(&ctx, ONE);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                m[i][col]
                    .value_or_nan()
                    .norm()
                    .total_cmp(&m[j][col].value_or_nan().norm())
            })
            .unwrap();
        if m[piv][col].value_or_nan().norm() == 0.0 || m[piv][col].order() < 0 {
            return Ok(Jet::zero(&ctx).truncate(super::min_order(a.iter().flatten())));
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        let inv = m[col][col].inv()?;
        det = &det * &m[col][col];
        for r in col + 1..n {
            let f = &m[r][col] * &inv;
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetContext;
    use num_complex::Complex64 as C64;

    fn sample(ctx: &super::super::JetContext, s: f64) -> Jet {
        let x = Jet::var(ctx, 0);
        let y = Jet::var(ctx, 1);
        (&x * &y * C64::new(s, 0.3) + &x * (s * 0.7) + &y * &y * C64::new(0.0, s))
            .add_const(C64::new(s, -0.2 * s))
    }

    #[test]
    fn identity_returns_rhs() {
        let ctx = JetContext::new(2, 4);
        let id: Vec<Vec<Jet>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| Jet::real(&ctx, (i == j) as u8 as f64))
                    .collect()
            })
            .collect();
        let b: Vec<Jet> = (0..3).map(|i| sample(&ctx, i as f64 + 1.0)).collect();
        let x = jet_linear_solve(&id, &b).unwrap();
        for (u, v) in x.iter().zip(&b) {
            assert!((u - v).max_abs() < 1e-15);
        }
    }

    #[test]
    fn residual_vanishes() {
        let ctx = JetContext::new(2, 5);
        let a: Vec<Vec<Jet>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| {
                        let s = sample(&ctx, 0.3 + i as f64 * 0.5 - j as f64 * 0.2);
                        if i == j {
                            s.add_const(C64::new(3.0, 0.0))
                        } else {
                            s
                        }
                    })
                    .collect()
            })
            .collect();
        let b: Vec<Jet> = (0..3).map(|i| sample(&ctx, 1.0 - i as f64)).collect();
        let x = jet_linear_solve(&a, &b).unwrap();
        for i in 0..3 {
            let ax = super::super::dot(&a[i], &x);
            assert!((ax - &b[i]).max_abs() < 1e-12);
        }
    }

    #[test]
    fn singular_constant_term_is_rejected() {
        let ctx = JetContext::new(1, 3);
        let x = Jet::var(&ctx, 0);
        let a = vec![
            vec![x.clone(), Jet::real(&ctx, 1.0)],
            vec![x.clone(), Jet::real(&ctx, 1.0)],
        ];
        let r = jet_linear_solve(&a, &[x.clone(), x]);
        assert!(matches!(r, Err(Error::Singular(_))));
    }

    #[test]
    fn determinant_of_diagonal() {
        let ctx = JetContext::new(1, 3);
        let x = Jet::var(&ctx, 0);
        let a = vec![
            vec![Jet::real(&ctx, 0.0), x.add_const(ONE)],
            vec![x.add_const(C64::new(2.0, 0.0)), x.clone()],
        ];
        let d = jet_det(&a).unwrap();
        // 0*x - (1+x)(2+x) = -(2 + 3x + x^2)
        assert!((d.coeffs()[0] + 2.0).norm() < 1e-15);
        assert!((d.coeff(&[1]) + 3.0).norm() < 1e-15);
        assert!((d.coeff(&[2]) + 1.0).norm() < 1e-15);
    }
}
