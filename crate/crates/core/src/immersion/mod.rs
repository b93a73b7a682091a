//! CR maps into spheres: adapted target frames, the second fundamental form and its
//! covariant derivatives, the `E_k` filtration, Codazzi and Gauss equations, and the
//! induced pseudoconformal coefficients.

mod adapted;
mod degeneracy;
mod gauss;
mod induced;
mod sff;
mod target;

pub use adapted::{adapt_target_frame, AdaptedConnection, AdaptedFrameData, PullbackResiduals};
pub use degeneracy::{degeneracy_from_sff, ek_spaces, numerical_rank, DegeneracyProfile, RankInfo};
pub use gauss::{gauss_residuals, polarization_check, GaussReport, PolarizationReport};
pub use induced::{induced_connection_coefficients, InducedCoefficients};
pub use sff::{
    codazzi_check, second_fundamental_form, sff_covariant_derivatives, CodazziReport, SffData,
};
pub use target::{target_coframe, TargetData};

use crate::cr::{AdmissibleCoframe, HypersurfaceSpec};
use crate::error::{Error, Result};
use crate::forms::MovingFrame;
use crate::jet::{max_abs_all, Jet, PolynomialSpec};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// A holomorphic polynomial map from a hypersurface into a sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CRMapSpec {
    pub source: HypersurfaceSpec,
    pub target: HypersurfaceSpec,
    pub components: Vec<PolynomialSpec>,
}

impl CRMapSpec {
    pub fn new(
        source: HypersurfaceSpec,
        target: HypersurfaceSpec,
        components: Vec<PolynomialSpec>,
    ) -> Result<Self> {
        let m = CRMapSpec {
            source,
            target,
            components,
        };
        m.validate()?;
        Ok(m)
    }

    /// Target sphere through `f(base)`, with the radius read from the source base point.
    pub fn into_sphere(source: HypersurfaceSpec, components: Vec<PolynomialSpec>) -> Result<Self> {
        let image: Vec<C64> = components
            .iter()
            .map(|p| p.eval(&source.base_point))
            .collect();
        let r = image.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let target = HypersurfaceSpec::new(PolynomialSpec::sphere(image.len(), r), image);
        CRMapSpec::new(source, target, components)
    }

    pub fn n(&self) -> usize {
        self.source.cr_dim()
    }

    pub fn n_hat(&self) -> usize {
        self.target.cr_dim()
    }

    pub fn codim(&self) -> usize {
        self.n_hat() - self.n()
    }

    /// Shape checks that need no chart.
    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.target.validate()?;
        self.target_radius()?;
        if self.components.len() != self.target.ambient_complex_dim {
            return Err(Error::Invalid(format!(
                "map has {} components, target lives in C^{}",
                self.components.len(),
                self.target.ambient_complex_dim
            )));
        }
        if self.n_hat() < self.n() {
            return Err(Error::Invalid("target CR dimension below source".into()));
        }
        for (k, p) in self.components.iter().enumerate() {
            p.validate()?;
            if p.num_complex_vars != self.source.ambient_complex_dim {
                return Err(Error::Invalid(format!(
                    "component {k} has the wrong variables"
                )));
            }
            if !p.is_holomorphic() {
                return Err(Error::Invalid(format!("component {k} is not holomorphic")));
            }
        }
        let miss = self
            .components
            .iter()
            .zip(&self.target.base_point)
            .map(|(p, q)| (p.eval(&self.source.base_point) - q).norm())
            .fold(0.0, f64::max);
        if miss > 1e-10 {
            return Err(Error::Invalid(format!(
                "f(base) misses the target base point by {miss:e}"
            )));
        }
        Ok(())
    }

    /// Radius `r` when the target is `Σ|Z'|² − r²`.
    pub fn target_radius(&self) -> Result<f64> {
        let rho = &self.target.rho;
        let nn = rho.num_complex_vars;
        let zero = vec![0; nn];
        let r2: f64 = -rho
            .monomials
            .iter()
            .filter(|t| t.z_exponents == zero && t.zbar_exponents == zero)
            .map(|t| t.re)
            .sum::<f64>();
        if r2 <= 0.0 {
            return Err(Error::Invalid("target is not a sphere".into()));
        }
        let mut diff = rho.clone();
        for t in &PolynomialSpec::sphere(nn, r2.sqrt()).monomials {
            let z: Vec<u32> = t.z_exponents.clone();
            diff.add_term(-t.coef(), &z, &t.zbar_exponents);
        }
        if diff.monomials.iter().any(|t| t.coef().norm() > 1e-12) {
            return Err(Error::Invalid("target is not a sphere".into()));
        }
        Ok(r2.sqrt())
    }

    /// `f ∘ Z` on the source chart.
    pub fn map_jets(&self, cf: &AdmissibleCoframe) -> Vec<Jet> {
        let zb: Vec<Jet> = cf.z.iter().map(|j| j.conj()).collect();
        self.components
            .iter()
            .map(|p| p.eval_jets(&cf.z, &zb))
            .collect()
    }

    /// Size of `ρ̂ ∘ f` on the source chart through its trusted order.
    pub fn sphere_residual(&self, cf: &AdmissibleCoframe) -> f64 {
        let f = self.map_jets(cf);
        let fb: Vec<Jet> = f.iter().map(|j| j.conj()).collect();
        max_abs_all([&self.target.rho.eval_jets(&f, &fb)])
    }

    /// `f_* L_α` in ambient components at the base point, one row per `α`.
    pub fn pushforward_at_base(&self, cf: &AdmissibleCoframe) -> Vec<Vec<C64>> {
        let f = self.map_jets(cf);
        let n = cf.n();
        let d: Vec<Vec<Jet>> = f.iter().map(|fk| cf.frame_derivatives(fk)).collect();
        (0..n)
            .map(|a| {
                d.iter()
                    .map(|row| row[cf.basis.l(a)].value_or_nan())
                    .collect()
            })
            .collect()
    }

    /// Chart-dependent invariants: `ρ̂∘f ≡ 0` and `f_*` injective on `T^{1,0}`.
    pub fn check_on(&self, cf: &AdmissibleCoframe) -> Result<()> {
        let r = self.sphere_residual(cf);
        if r > 1e-10 {
            return Err(Error::Invalid(format!(
                "map leaves the target sphere: {r:e}"
            )));
        }
        let push = self.pushforward_at_base(cf);
        let a = nalgebra::DMatrix::from_fn(push.len(), push[0].len(), |i, j| push[i][j]);
        let info = numerical_rank(&a);
        if info.rank != self.n() {
            return Err(Error::RankDeficient {
                rank: info.rank,
                expected: self.n(),
            });
        }
        Ok(())
    }
}
