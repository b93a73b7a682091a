use super::poly::{coordinate_jets, PolynomialSpec};
use super::{Jet, JetContext, ONE};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

/// Assignment of the real and imaginary part of each complex variable to a jet variable;
/// `None` freezes that part at its base value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealVarMap {
    pub re: Vec<Option<usize>>,
    pub im: Vec<Option<usize>>,
}

impl RealVarMap {
    /// `x_k -> 2k`, `y_k -> 2k+1`.
    pub fn full(n: usize) -> Self {
        RealVarMap {
            re: (0..n).map(|k| Some(2 * k)).collect(),
            im: (0..n).map(|k| Some(2 * k + 1)).collect(),
        }
    }

    /// All real coordinates except `solve`, numbered consecutively in order.
    pub fn graph(n: usize, solve: usize) -> Self {
        let slot = |r: usize| match r.cmp(&solve) {
            std::cmp::Ordering::Less => Some(r),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(r - 1),
        };
        RealVarMap {
            re: (0..n).map(|k| slot(2 * k)).collect(),
            im: (0..n).map(|k| slot(2 * k + 1)).collect(),
        }
    }
}

/// Derivative of a real polynomial along the real coordinate `r` (`x_k` for even `r`,
/// `y_k` for odd), as a pair of polynomials whose sum is that derivative.
pub(crate) fn real_direction(
    rho: &PolynomialSpec,
    r: usize,
) -> (PolynomialSpec, C64, PolynomialSpec, C64) {
    let k = r / 2;
    if r.is_multiple_of(2) {
        (rho.d_z(k), ONE, rho.d_zbar(k), ONE)
    } else {
        (
            rho.d_z(k),
            C64::new(0.0, 1.0),
            rho.d_zbar(k),
            C64::new(0.0, -1.0),
        )
    }
}

/// Jets of `Z`, `Zbar` on the graph chart, with the solved coordinate equal to `h`.
pub fn graph_coordinates(
    base: &[C64],
    solve: usize,
    h: &Jet,
    ctx: &JetContext,
) -> Result<(Vec<Jet>, Vec<Jet>)> {
    let (mut z, mut zb) = coordinate_jets(base, &RealVarMap::graph(base.len(), solve), ctx)?;
    let k = solve / 2;
    let unit = if solve.is_multiple_of(2) {
        ONE
    } else {
        C64::new(0.0, 1.0)
    };
    z[k].axpy(unit, h);
    zb[k].axpy(unit.conj(), h);
    Ok((z, zb))
}

/// Graphing function of `{rho = 0}` over the real coordinates other than `solve_var`.
///
/// Newton's method on truncated series: each step doubles the number of correct orders,
/// so `ceil(log2 K) + 2` steps always suffice when the gradient is nondegenerate.
pub fn implicit_graph_jet(
    rho: &PolynomialSpec,
    base: &[C64],
    solve_var: usize,
    ctx: &JetContext,
) -> Result<Jet> {
    rho.validate()?;
    let n = rho.num_complex_vars;
    if base.len() != n {
        return Err(Error::Invalid("base length differs from polynomial".into()));
    }
    if solve_var >= 2 * n {
        return Err(Error::VarIndex {
            index: solve_var,
            len: 2 * n,
        });
    }
    if ctx.num_vars() != 2 * n - 1 {
        return Err(Error::Invalid(format!(
            "graph chart needs {} variables, context has {}",
            2 * n - 1,
            ctx.num_vars()
        )));
    }
    let (pz, cz, pzb, czb) = real_direction(rho, solve_var);
    let zb0: Vec<C64> = base.iter().map(|z| z.conj()).collect();
    let g0 = cz * pz.eval_split(base, &zb0) + czb * pzb.eval_split(base, &zb0);
    if g0.norm() < 1e-12 {
        return Err(Error::DegenerateGradient(solve_var));
    }
    let k = ctx.max_order().max(1);
    let max_iter = (usize::BITS - (k - 1).leading_zeros()) as usize + 2;
    let tol = 1e-11 * (1.0 + base.iter().map(|z| z.norm()).fold(0.0, f64::max));
    let mut h = Jet::zero(ctx);
    let mut res = f64::INFINITY;
    for _ in 0..max_iter {
        let (z, zb) = graph_coordinates(base, solve_var, &h, ctx)?;
        let r = rho.eval_jets(&z, &zb);
        res = r.max_abs();
        if res < tol {
            return Ok(h);
        }
        let mut d = pz.eval_jets(&z, &zb) * cz;
        d.axpy(czb, &pzb.eval_jets(&z, &zb));
        h = (&h - &r.div(&d)?).re();
    }
    let (z, zb) = graph_coordinates(base, solve_var, &h, ctx)?;
    let r = rho.eval_jets(&z, &zb).max_abs();
    if r < tol {
        Ok(h)
    } else {
        Err(Error::NonConvergence(max_iter, r.max(res)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::ZERO;

    fn heisenberg() -> PolynomialSpec {
        // Im w - |z|^2 with variables (z, w)
        PolynomialSpec::new(2)
            .term(C64::new(0.0, -0.5), &[0, 1], &[0, 0])
            .term(C64::new(0.0, 0.5), &[0, 0], &[0, 1])
            .term(C64::new(-1.0, 0.0), &[1, 0], &[1, 0])
    }

    #[test]
    fn heisenberg_graph_is_quadratic() {
        let ctx = JetContext::new(3, 4);
        let h = implicit_graph_jet(&heisenberg(), &[ZERO, ZERO], 3, &ctx).unwrap();
        // chart variables (x, y, u)
        let want = Jet::var(&ctx, 0) * Jet::var(&ctx, 0) + Jet::var(&ctx, 1) * Jet::var(&ctx, 1);
        assert!((h - want).max_abs() < 1e-14);
    }

    #[test]
    fn sphere_graph_annihilates_rho() {
        let ctx = JetContext::new(3, 6);
        let rho = PolynomialSpec::sphere(2, 1.0);
        let base = [ZERO, ONE];
        let h = implicit_graph_jet(&rho, &base, 2, &ctx).unwrap();
        let (z, zb) = graph_coordinates(&base, 2, &h, &ctx).unwrap();
        assert!(rho.eval_jets(&z, &zb).max_abs() < 1e-12);
        // Re w = sqrt(1 - x^2 - y^2 - v^2) - 1 starts with -(x^2+y^2+v^2)/2
        assert!((h.coeff(&[2, 0, 0]) + 0.5).norm() < 1e-14);
        assert!((h.coeff(&[4, 0, 0]) + 0.125).norm() < 1e-14);
    }

    #[test]
    fn vanishing_gradient_is_rejected() {
        let ctx = JetContext::new(3, 3);
        let rho = PolynomialSpec::sphere(2, 1.0);
        let r = implicit_graph_jet(&rho, &[ZERO, ONE], 3, &ctx);
        assert_eq!(r.unwrap_err(), Error::DegenerateGradient(3));
    }
}
