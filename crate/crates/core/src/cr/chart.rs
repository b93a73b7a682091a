use crate::error::{Error, Result};
use crate::forms::chart_pair;
use crate::jet::{implicit_graph_jet, jet_linear_solve_multi, Jet, JetContext, PolynomialSpec};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// A real hypersurface `{ρ = 0}` in `C^{n+1}` with a marked point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypersurfaceSpec {
    pub ambient_complex_dim: usize,
    pub rho: PolynomialSpec,
    pub base_point: Vec<C64>,
}

impl HypersurfaceSpec {
    pub fn new(rho: PolynomialSpec, base_point: Vec<C64>) -> Self {
        HypersurfaceSpec {
            ambient_complex_dim: rho.num_complex_vars,
            rho,
            base_point,
        }
    }

    /// CR dimension `n`.
    pub fn cr_dim(&self) -> usize {
        self.ambient_complex_dim - 1
    }

    pub fn validate(&self) -> Result<()> {
        self.rho.validate()?;
        if self.rho.num_complex_vars != self.ambient_complex_dim
            || self.base_point.len() != self.ambient_complex_dim
        {
            return Err(Error::Invalid(
                "ambient dimension, polynomial variables and base point disagree".into(),
            ));
        }
        if self.ambient_complex_dim < 2 {
            return Err(Error::Invalid(
                "ambient dimension must be at least 2".into(),
            ));
        }
        if !self.rho.is_real(1e-12) {
            return Err(Error::Invalid(
                "defining polynomial is not real valued".into(),
            ));
        }
        let v = self.rho.eval(&self.base_point).norm();
        if v > 1e-12 {
            return Err(Error::BaseOffZeroSet(v));
        }
        Ok(())
    }

    /// Gradient `∂ρ/∂x_k, ∂ρ/∂y_k` at the base point, interleaved.
    pub fn real_gradient(&self) -> Vec<f64> {
        let p = &self.base_point;
        let mut g = Vec::with_capacity(2 * p.len());
        for k in 0..p.len() {
            let rz = self.rho.d_z(k).eval(p);
            g.push(2.0 * rz.re);
            g.push(-2.0 * rz.im);
        }
        g
    }
}

/// Local parametrization of a hypersurface by real chart variables vanishing at the base.
#[derive(Clone, Debug)]
pub struct Chart {
    pub spec: HypersurfaceSpec,
    pub ctx: JetContext,
    /// Solved real coordinate and its graphing jet, for graph charts.
    pub graph: Option<(usize, Jet)>,
    pub z: Vec<Jet>,
    pub zbar: Vec<Jet>,
}

/// Graph chart over the real coordinates other than the one of largest gradient component.
pub fn build_chart(spec: &HypersurfaceSpec, order: usize) -> Result<Chart> {
    spec.validate()?;
    let g = spec.real_gradient();
    let mut solve = 0;
    for (r, v) in g.iter().enumerate() {
        if v.abs() > g[solve].abs() {
            solve = r;
        }
    }
    if g[solve].abs() < 1e-12 {
        return Err(Error::DegenerateGradient(solve));
    }
    let nn = spec.ambient_complex_dim;
    let ctx = JetContext::new(2 * nn - 1, order);
    let h = implicit_graph_jet(&spec.rho, &spec.base_point, solve, &ctx)?;
    let (z, zbar) = crate::jet::graph_coordinates(&spec.base_point, solve, &h, &ctx)?;
    Ok(Chart {
        spec: spec.clone(),
        ctx,
        graph: Some((solve, h)),
        z,
        zbar,
    })
}

impl Chart {
    /// A chart given by an explicit parametrization `Z(x)` of the hypersurface.
    pub fn parametrized(spec: &HypersurfaceSpec, ctx: &JetContext, z: Vec<Jet>) -> Result<Chart> {
        if z.len() != spec.ambient_complex_dim || ctx.num_vars() != 2 * z.len() - 1 {
            return Err(Error::Invalid("parametrization has the wrong shape".into()));
        }
        let zbar = z.iter().map(|j| j.conj()).collect();
        Ok(Chart {
            spec: spec.clone(),
            ctx: ctx.clone(),
            graph: None,
            z,
            zbar,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.ctx.num_vars()
    }

    pub fn cr_dim(&self) -> usize {
        self.spec.cr_dim()
    }

    /// `ρ ∘ Z` as a jet; vanishes to trusted order on a valid chart.
    pub fn rho_residual(&self) -> Jet {
        self.spec.rho.eval_jets(&self.z, &self.zbar)
    }

    /// `ρ_{Z_k} ∘ Z` (or the `Zbar_k` derivative).
    pub fn rho_d(&self, k: usize, bar: bool) -> Jet {
        let p = if bar {
            self.spec.rho.d_zbar(k)
        } else {
            self.spec.rho.d_z(k)
        };
        eval_poly(&p, &self.z, &self.zbar, &self.ctx)
    }

    /// Pivot `j*` maximizing `|ρ_{Z_j}(p)|`, first index on ties.
    pub fn pivot(&self) -> usize {
        let p = &self.spec.base_point;
        let mut best = 0;
        let mut bv = -1.0;
        for j in 0..p.len() {
            let v = self.spec.rho.d_z(j).eval(p).norm();
            if v > bv {
                bv = v;
                best = j;
            }
        }
        best
    }

    /// Pullback of `θ = i Σ ρ_{Zbar_k} dZbar_k` and of its differential
    /// `dθ = i Σ ρ_{Z_l Zbar_k} dZ_l ∧ dZbar_k`, in chart components.
    pub fn contact_from_rho(&self) -> ContactForm {
        let m = self.num_vars();
        let nn = self.z.len();
        let dz: Vec<Vec<Jet>> = self.z.iter().map(|j| j.gradient()).collect();
        let dzb: Vec<Vec<Jet>> = self.zbar.iter().map(|j| j.gradient()).collect();
        let i = C64::new(0.0, 1.0);
        let mut theta: Vec<Jet> = vec![Jet::zero(&self.ctx); m];
        for k in 0..nn {
            let r = self.rho_d(k, true);
            for v in 0..m {
                theta[v].axpy(i, &(&r * &dzb[k][v]));
            }
        }
        let mut dtheta = vec![Jet::zero(&self.ctx); m * (m - 1) / 2];
        for l in 0..nn {
            for k in 0..nn {
                let p = self.spec.rho.d_z(l).d_zbar(k);
                if p.monomials.iter().all(|t| t.coef() == C64::new(0.0, 0.0)) {
                    continue;
                }
                let h = eval_poly(&p, &self.z, &self.zbar, &self.ctx);
                let constant = p.monomials.iter().all(|t| {
                    t.z_exponents
                        .iter()
                        .chain(&t.zbar_exponents)
                        .all(|&e| e == 0)
                });
                for a in 0..m {
                    for b in a + 1..m {
                        let w = &dz[l][a] * &dzb[k][b] - &dz[l][b] * &dzb[k][a];
                        let w = if constant {
                            w.scale(h.coeffs()[0])
                        } else {
                            &w * &h
                        };
                        dtheta[chart_pair(a, b, m)].axpy(i, &w);
                    }
                }
            }
        }
        ContactForm {
            theta: theta.into_iter().map(|j| j.re()).collect(),
            dtheta: dtheta.into_iter().map(|j| j.re()).collect(),
        }
    }

    /// Jacobian rows `∂_v Z_k` and `∂_v Zbar_k`.
    pub fn jacobian(&self) -> Vec<Vec<Jet>> {
        self.z
            .iter()
            .chain(&self.zbar)
            .map(|j| j.gradient())
            .collect()
    }

    /// Chart components `c` of ambient (1,0) vectors `a`, i.e. solutions of
    /// `∂Z·c = a, ∂Zbar·c = 0`, made square with a constant left inverse of the Jacobian.
    pub fn tangent_components(&self, ambient: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
        let jac = self.jacobian();
        let nn = self.z.len();
        let m = self.num_vars();
        let j0 = DMatrix::from_fn(2 * nn, m, |r, v| jac[r][v].value_or_nan());
        let p = j0
            .pseudo_inverse(1e-12)
            .map_err(|e| Error::Invalid(e.to_string()))?;
        let mat: Vec<Vec<Jet>> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|v| {
                        let mut acc = Jet::zero(&self.ctx);
                        for q in 0..2 * nn {
                            acc.axpy(p[(r, q)], &jac[q][v]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        let rhs: Vec<Vec<Jet>> = ambient
            .iter()
            .map(|a| {
                (0..m)
                    .map(|r| {
                        let mut acc = Jet::zero(&self.ctx);
                        for q in 0..nn {
                            acc.axpy(p[(r, q)], &a[q]);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        jet_linear_solve_multi(&mat, &rhs)
    }

    /// Raw CR frame `L_α = ρ_{Z_{j*}} ∂_{Z_α} − ρ_{Z_α} ∂_{Z_{j*}}` (α ≠ j*), ambient and
    /// chart components.
    pub fn raw_cr_frame(&self) -> Result<RawFrame> {
        let js = self.pivot();
        let nn = self.z.len();
        let rz: Vec<Jet> = (0..nn).map(|k| self.rho_d(k, false)).collect();
        let mut ambient = Vec::with_capacity(nn - 1);
        for a in (0..nn).filter(|&a| a != js) {
            let mut v = vec![Jet::zero(&self.ctx); nn];
            v[a] = rz[js].clone();
            v[js] = -&rz[a];
            ambient.push(v);
        }
        let chart = self.tangent_components(&ambient)?;
        Ok(RawFrame {
            pivot: js,
            ambient,
            chart,
        })
    }
}

fn eval_poly(p: &PolynomialSpec, z: &[Jet], zb: &[Jet], ctx: &JetContext) -> Jet {
    if p.monomials.is_empty() {
        return Jet::zero(ctx);
    }
    p.eval_jets(z, zb)
}

/// A contact form and its differential in chart components (`dθ` indexed by [`chart_pair`]).
#[derive(Clone, Debug)]
pub struct ContactForm {
    pub theta: Vec<Jet>,
    pub dtheta: Vec<Jet>,
}

impl ContactForm {
    /// `vθ` with `d(vθ) = dv∧θ + v dθ`.
    pub fn rescaled(&self, v: &Jet) -> ContactForm {
        let m = self.theta.len();
        let dv = v.gradient();
        let theta = self.theta.iter().map(|t| t * v).collect();
        let mut dtheta: Vec<Jet> = self.dtheta.iter().map(|t| t * v).collect();
        for a in 0..m {
            for b in a + 1..m {
                let w = &dv[a] * &self.theta[b] - &dv[b] * &self.theta[a];
                dtheta[chart_pair(a, b, m)] += w;
            }
        }
        ContactForm { theta, dtheta }
    }

    /// `dθ(X, Y)` for chart vector fields.
    pub fn dtheta_on(&self, x: &[Jet], y: &[Jet]) -> Jet {
        let m = self.theta.len();
        let ctx = self.theta[0].context();
        let mut acc = Jet::zero(ctx);
        for a in 0..m {
            for b in a + 1..m {
                let w = &x[a] * &y[b] - &x[b] * &y[a];
                acc += &w * &self.dtheta[chart_pair(a, b, m)];
            }
        }
        acc
    }

    /// Components of `X ⌟ dθ`.
    pub fn contract(&self, x: &[Jet]) -> Vec<Jet> {
        let m = self.theta.len();
        let ctx = self.theta[0].context();
        let mut out = vec![Jet::zero(ctx); m];
        for a in 0..m {
            for b in a + 1..m {
                let w = &self.dtheta[chart_pair(a, b, m)];
                out[b] += &x[a] * w;
                out[a] -= &x[b] * w;
            }
        }
        out
    }
}

/// Unnormalized CR frame of a chart.
#[derive(Clone, Debug)]
pub struct RawFrame {
    pub pivot: usize,
    pub ambient: Vec<Vec<Jet>>,
    pub chart: Vec<Vec<Jet>>,
}
