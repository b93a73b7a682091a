use super::chart::{Chart, ContactForm, RawFrame};
use crate::error::{Error, Result};
use crate::forms::{Form1, Form2, FrameBasis, MovingFrame};
use crate::jet::{jet_linear_solve, jet_linear_solve_multi, max_abs_base, Jet, JetContext};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

const I: C64 = C64::new(0.0, 1.0);

/// Reeb field of `θ`: `θ(T) = 1`, `dθ(L_α, T) = dθ(L_ᾱ, T) = 0`, in chart components.
pub fn characteristic_field(contact: &ContactForm, l_chart: &[Vec<Jet>]) -> Result<Vec<Jet>> {
    let m = contact.theta.len();
    let ctx = contact.theta[0].context().clone();
    let mut rows = vec![contact.theta.clone()];
    for l in l_chart {
        rows.push(contact.contract(l));
    }
    for l in l_chart {
        let lb: Vec<Jet> = l.iter().map(|j| j.conj()).collect();
        rows.push(contact.contract(&lb));
    }
    if rows.len() != m {
        return Err(Error::Invalid(
            "frame size does not match chart dimension".into(),
        ));
    }
    let mut rhs = vec![Jet::zero(&ctx); m];
    rhs[0] = Jet::real(&ctx, 1.0);
    let t = jet_linear_solve(&rows, &rhs).map_err(|e| match e {
        Error::Singular(_) => Error::LeviNotPositive,
        other => other,
    })?;
    Ok(t.into_iter().map(|j| j.re()).collect())
}

/// `g_{αβ̄} = −i dθ(L_α, L_β̄)`.
pub fn levi_matrix(contact: &ContactForm, l_chart: &[Vec<Jet>]) -> Vec<Vec<Jet>> {
    let conj: Vec<Vec<Jet>> = l_chart
        .iter()
        .map(|l| l.iter().map(|j| j.conj()).collect())
        .collect();
    l_chart
        .iter()
        .map(|la| {
            conj.iter()
                .map(|lb| contact.dtheta_on(la, lb).scale(-I))
                .collect()
        })
        .collect()
}

/// Jet Cholesky factor `g = C C^H` with positive real diagonal, and its inverse.
fn cholesky_inverse(g: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>> {
    let n = g.len();
    let ctx = g[0][0].context().clone();
    let mut c = vec![vec![Jet::zero(&ctx); n]; n];
    for j in 0..n {
        let mut d = g[j][j].clone();
        for k in 0..j {
            d -= &c[j][k] * &c[j][k].conj();
        }
        let d = d.re();
        if d.value()?.re <= 0.0 {
            return Err(Error::LeviNotPositive);
        }
        c[j][j] = d.sqrt()?;
        let inv = c[j][j].inv()?;
        for i in j + 1..n {
            let mut s = g[i][j].clone();
            for k in 0..j {
                s -= &c[i][k] * &c[j][k].conj();
            }
            c[i][j] = &s * &inv;
        }
    }
    // forward substitution for C^{-1}, also lower triangular
    let mut w = vec![vec![Jet::zero(&ctx); n]; n];
    for i in 0..n {
        let inv = c[i][i].inv()?;
        w[i][i] = inv.clone();
        for j in 0..i {
            let mut s = Jet::zero(&ctx);
            for k in j..i {
                s += &c[i][k] * &w[k][j];
            }
            w[i][j] = -&(&s * &inv);
        }
    }
    Ok(w)
}

/// An admissible coframe `(θ, θ^α, θ^ᾱ)` with dual frame `(T, L_α, L_ᾱ)` on a chart,
/// normalized so that `dθ = i Σ θ^α∧θ^ᾱ`.
#[derive(Clone, Debug)]
pub struct AdmissibleCoframe {
    pub basis: FrameBasis,
    pub ctx: JetContext,
    pub contact: ContactForm,
    /// Frame vectors `T, L_α, L_ᾱ` in chart components.
    pub frame: Vec<Vec<Jet>>,
    /// Coframe `θ, θ^α, θ^ᾱ` in chart components.
    pub coframe: Vec<Vec<Jet>>,
    /// Levi matrix of the unnormalized frame.
    pub levi_raw: Vec<Vec<Jet>>,
    /// Ambient (1,0) components of `L_α`.
    pub ambient_l: Vec<Vec<Jet>>,
    /// `T(Z_k)` for the ambient coordinates.
    pub ambient_t: Vec<Jet>,
    /// Chart embedding `Z(x)`, kept for pushforwards.
    pub z: Vec<Jet>,
    gamma: Vec<Vec<Jet>>,
}

/// Gram–Schmidt normalization of a raw CR frame against the Levi form of `contact`.
pub fn normalize_admissible(
    chart: &Chart,
    raw: &RawFrame,
    contact: &ContactForm,
) -> Result<AdmissibleCoframe> {
    let n = raw.chart.len();
    if 2 * n + 1 != chart.num_vars() {
        return Err(Error::Invalid("raw frame has the wrong size".into()));
    }
    let levi_raw = levi_matrix(contact, &raw.chart);
    let g0 = DMatrix::from_fn(n, n, |a, b| levi_raw[a][b].value_or_nan());
    if g0.iter().any(|z| !z.is_finite()) || g0.cholesky().is_none() {
        return Err(Error::LeviNotPositive);
    }
    let w = cholesky_inverse(&levi_raw)?;
    let ctx = chart.ctx.clone();
    let mix = |vs: &[Vec<Jet>]| -> Vec<Vec<Jet>> {
        (0..n)
            .map(|a| {
                (0..vs[0].len())
                    .map(|v| {
                        let mut s = Jet::zero(&ctx);
                        for b in 0..=a {
                            s += &w[a][b] * &vs[b][v];
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    };
    let l = mix(&raw.chart);
    let amb = mix(&raw.ambient);
    let t = characteristic_field(contact, &l)?;
    assemble(chart.z.clone(), contact.clone(), t, l, amb, levi_raw)
}

fn assemble(
    z: Vec<Jet>,
    contact: ContactForm,
    t: Vec<Jet>,
    l: Vec<Vec<Jet>>,
    ambient_l: Vec<Vec<Jet>>,
    levi_raw: Vec<Vec<Jet>>,
) -> Result<AdmissibleCoframe> {
    let n = l.len();
    let m = 2 * n + 1;
    let ctx = t[0].context().clone();
    let basis = FrameBasis::new(n);
    let mut frame = Vec::with_capacity(m);
    frame.push(t);
    for v in &l {
        frame.push(v.clone());
    }
    for v in &l {
        frame.push(v.iter().map(|j| j.conj()).collect());
    }
    let rhs: Vec<Vec<Jet>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| Jet::real(&ctx, if a == b { 1.0 } else { 0.0 }))
                .collect()
        })
        .collect();
    let coframe = jet_linear_solve_multi(&frame, &rhs)?;
    let ambient_t = z
        .iter()
        .map(|zk| {
            let g = zk.gradient();
            let mut s = Jet::zero(&ctx);
            for v in 0..m {
                s += &frame[0][v] * &g[v];
            }
            s
        })
        .collect();
    let gamma = structure_functions(&basis, &frame, &coframe);
    Ok(AdmissibleCoframe {
        basis,
        ctx,
        contact,
        frame,
        coframe,
        levi_raw,
        ambient_l,
        ambient_t,
        z,
        gamma,
    })
}

/// `Γ^a_{bc} = de^a(e_b, e_c) = −e^a([e_b, e_c])`.
fn structure_functions(
    basis: &FrameBasis,
    frame: &[Vec<Jet>],
    coframe: &[Vec<Jet>],
) -> Vec<Vec<Jet>> {
    let m = frame.len();
    let ctx = frame[0][0].context().clone();
    let dframe: Vec<Vec<Vec<Jet>>> = frame
        .iter()
        .map(|e| e.iter().map(|c| c.gradient()).collect())
        .collect();
    let brackets: Vec<Vec<Jet>> = basis
        .pairs()
        .iter()
        .map(|&(b, c)| {
            (0..m)
                .map(|v| {
                    let mut s = Jet::zero(&ctx);
                    for w in 0..m {
                        s += &frame[b][w] * &dframe[c][v][w];
                        s -= &frame[c][w] * &dframe[b][v][w];
                    }
                    s
                })
                .collect()
        })
        .collect();
    (0..m)
        .map(|a| {
            brackets
                .iter()
                .map(|br| {
                    let mut s = Jet::zero(&ctx);
                    for v in 0..m {
                        s -= &coframe[a][v] * &br[v];
                    }
                    s
                })
                .collect()
        })
        .collect()
}

impl AdmissibleCoframe {
    /// Coframe of `θ = i∂̄ρ` on the chart.
    pub fn new(chart: &Chart) -> Result<Self> {
        let raw = chart.raw_cr_frame()?;
        let contact = chart.contact_from_rho();
        normalize_admissible(chart, &raw, &contact)
    }

    pub fn n(&self) -> usize {
        self.basis.n()
    }

    /// Frame obtained from `L'_α = Σ_β u_{αβ} L_β` for a constant unitary `u`.
    pub fn rotated(&self, u: &DMatrix<C64>) -> Result<Self> {
        let n = self.n();
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::Invalid("rotation has the wrong size".into()));
        }
        let uu = u.adjoint() * u - DMatrix::<C64>::identity(n, n);
        if uu.iter().any(|z| z.norm() > 1e-10) {
            return Err(Error::Invalid("rotation is not unitary".into()));
        }
        let mix = |vs: &[Vec<Jet>]| -> Vec<Vec<Jet>> {
            (0..n)
                .map(|a| {
                    (0..vs[0].len())
                        .map(|v| {
                            let mut s = Jet::zero(&self.ctx);
                            for b in 0..n {
                                s.axpy(u[(a, b)], &vs[b][v]);
                            }
                            s
                        })
                        .collect()
                })
                .collect()
        };
        let l: Vec<Vec<Jet>> = self.frame[1..=n].to_vec();
        assemble(
            self.z.clone(),
            self.contact.clone(),
            self.frame[0].clone(),
            mix(&l),
            mix(&self.ambient_l),
            self.levi_raw.clone(),
        )
    }

    /// Frame components `ω(e_b)` of a chart 1-form.
    pub fn to_frame(&self, chart_form: &[Jet]) -> Form1 {
        Form1 {
            c: self
                .frame
                .iter()
                .map(|e| {
                    let mut s = Jet::zero(&self.ctx);
                    for (a, b) in e.iter().zip(chart_form) {
                        s += a * b;
                    }
                    s
                })
                .collect(),
        }
    }

    /// `dθ` in the frame basis.
    pub fn dtheta(&self) -> Form2 {
        Form2 {
            c: self
                .basis
                .pairs()
                .iter()
                .map(|&(b, c)| self.contact.dtheta_on(&self.frame[b], &self.frame[c]))
                .collect(),
        }
    }

    /// Normalized Levi matrix `−i dθ(L_α, L_β̄)`.
    pub fn levi(&self) -> Vec<Vec<Jet>> {
        let n = self.n();
        (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| {
                        self.contact
                            .dtheta_on(&self.frame[1 + a], &self.frame[1 + n + b])
                            .scale(-I)
                    })
                    .collect()
            })
            .collect()
    }

    /// Largest base-point deviation of `⟨e^a, e_b⟩` from `δ`.
    pub fn duality_residual(&self) -> f64 {
        let m = self.frame.len();
        let mut r: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                let mut s = Jet::zero(&self.ctx);
                for v in 0..m {
                    s += &self.coframe[a][v] * &self.frame[b][v];
                }
                let want = if a == b { 1.0 } else { 0.0 };
                r = r.max(max_abs_base([&s.add_const(C64::new(-want, 0.0))]));
            }
        }
        r
    }

    /// Residual of `θ(T) = 1`, `T⌟dθ = 0`.
    pub fn reeb_residual(&self) -> f64 {
        let t = &self.frame[0];
        let mut th = Jet::zero(&self.ctx);
        for (a, b) in t.iter().zip(&self.contact.theta) {
            th += a * b;
        }
        let c = self.contact.contract(t);
        max_abs_base([&th.add_const(C64::new(-1.0, 0.0))]).max(max_abs_base(&c))
    }

    /// Residual of `dθ = i Σ θ^α∧θ^ᾱ`.
    pub fn levi_residual(&self) -> f64 {
        let mut d = self.dtheta();
        let n = self.n();
        for a in 0..n {
            let k = self.basis.pair_index(self.basis.l(a), self.basis.lbar(a));
            d.c[k] = d.c[k].add_const(-I);
        }
        d.max_abs_base()
    }

    /// Largest imaginary part among the chart coefficients of `θ`.
    pub fn theta_imag(&self) -> f64 {
        self.contact
            .theta
            .iter()
            .flat_map(|j| j.coeffs().iter())
            .fold(0.0, |m, z| m.max(z.im.abs()))
    }
}

impl MovingFrame for AdmissibleCoframe {
    fn basis(&self) -> &FrameBasis {
        &self.basis
    }

    fn context(&self) -> &JetContext {
        &self.ctx
    }

    fn frame_derivatives(&self, f: &Jet) -> Vec<Jet> {
        let g = f.gradient();
        self.frame
            .iter()
            .map(|e| {
                let mut s = Jet::zero(&self.ctx);
                for (a, b) in e.iter().zip(&g) {
                    s += a * b;
                }
                s
            })
            .collect()
    }

    fn structure(&self, a: usize) -> &[Jet] {
        &self.gamma[a]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cr::{build_chart, HypersurfaceSpec};
    use crate::jet::PolynomialSpec;

    fn heisenberg() -> HypersurfaceSpec {
        // |z|^2 - Im w
        let rho = PolynomialSpec::new(2)
            .term(C64::new(0.0, 0.5), &[0, 1], &[0, 0])
            .term(C64::new(0.0, -0.5), &[0, 0], &[0, 1])
            .term(C64::new(1.0, 0.0), &[1, 0], &[1, 0]);
        HypersurfaceSpec::new(rho, vec![C64::new(0.0, 0.0); 2])
    }

    fn sphere() -> HypersurfaceSpec {
        HypersurfaceSpec::new(
            PolynomialSpec::sphere(2, 1.0),
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        )
    }

    #[test]
    fn sphere_frame_is_admissible() {
        let chart = build_chart(&sphere(), 5).unwrap();
        let raw = chart.raw_cr_frame().unwrap();
        assert_eq!(raw.pivot, 1);
        // L_1 = w̄ ∂_z - z̄ ∂_w is ∂_z at the base point
        assert!((raw.ambient[0][0].value().unwrap() - 1.0).norm() < 1e-14);
        assert!(raw.ambient[0][1].value().unwrap().norm() < 1e-14);
        let cf = AdmissibleCoframe::new(&chart).unwrap();
        assert!(cf.duality_residual() < 1e-12);
        assert!(cf.reeb_residual() < 1e-12);
        assert!(cf.levi_residual() < 1e-10);
        assert!(cf.theta_imag() < 1e-12);
    }

    #[test]
    fn heisenberg_reeb_field_is_vertical() {
        let chart = build_chart(&heisenberg(), 4).unwrap();
        let cf = AdmissibleCoframe::new(&chart).unwrap();
        // chart variables (x, y, u); θ = du/2 + ..., so T = 2 ∂_u
        let t = &cf.frame[0];
        assert!(t[0].max_abs() < 1e-12 && t[1].max_abs() < 1e-12);
        assert!((t[2].value().unwrap() - 2.0).norm() < 1e-12);
        assert!(cf.levi_residual() < 1e-12);
    }

    #[test]
    fn scaling_theta_rescales_the_frame() {
        let chart = build_chart(&heisenberg(), 4).unwrap();
        let raw = chart.raw_cr_frame().unwrap();
        let contact = chart.contact_from_rho();
        let a = normalize_admissible(&chart, &raw, &contact).unwrap();
        let two = Jet::real(&chart.ctx, 2.0);
        let b = normalize_admissible(&chart, &raw, &contact.rescaled(&two)).unwrap();
        for v in 0..3 {
            let d = &b.frame[1][v] - &a.frame[1][v].scale_re(1.0 / 2f64.sqrt());
            assert!(d.max_abs() < 1e-12);
        }
        let g = b.levi();
        assert!((g[0][0].value().unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn levi_degenerate_surface_is_rejected() {
        // Im w = 0
        let rho = PolynomialSpec::new(2)
            .term(C64::new(0.0, -0.5), &[0, 1], &[0, 0])
            .term(C64::new(0.0, 0.5), &[0, 0], &[0, 1]);
        let spec = HypersurfaceSpec::new(rho, vec![C64::new(0.0, 0.0); 2]);
        let chart = build_chart(&spec, 3).unwrap();
        assert_eq!(
            AdmissibleCoframe::new(&chart).unwrap_err(),
            Error::LeviNotPositive
        );
    }

    #[test]
    fn gram_schmidt_ignores_unimodular_triangular_mixing() {
        let spec = HypersurfaceSpec::new(
            PolynomialSpec::sphere(3, 1.0),
            vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.4), C64::new(0.0, 0.0)],
        );
        let mut spec = spec;
        let s: f64 = spec.base_point.iter().map(|z| z.norm_sqr()).sum();
        spec.base_point[2] = C64::new((1.0 - s).sqrt(), 0.0);
        let chart = build_chart(&spec, 3).unwrap();
        let raw = chart.raw_cr_frame().unwrap();
        let contact = chart.contact_from_rho();
        let a = normalize_admissible(&chart, &raw, &contact).unwrap();
        let c = C64::new(0.7, -1.3);
        let mut mixed = raw.clone();
        for v in 0..mixed.chart[1].len() {
            mixed.chart[1][v].axpy(c, &raw.chart[0][v]);
        }
        for v in 0..mixed.ambient[1].len() {
            mixed.ambient[1][v].axpy(c, &raw.ambient[0][v]);
        }
        let b = normalize_admissible(&chart, &mixed, &contact).unwrap();
        for (x, y) in a.frame.iter().zip(&b.frame) {
            for (p, q) in x.iter().zip(y) {
                assert!((p - q).max_abs() < 1e-10);
            }
        }
    }
}
