use super::CRMapSpec;
use crate::cr::{normalize_admissible, AdmissibleCoframe, Chart};
use crate::error::{Error, Result};
use crate::forms::{chart_pair, MovingFrame};
use crate::jet::{Jet, JetContext};
use crate::pseudohermitian::{
    webster_connection, webster_curvature, ConnectionData, CurvaturePack,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

const I: C64 = C64::new(0.0, 1.0);

/// The target sphere near `f(base)` in a chart `(s, t)` whose slice `t = 0` is the image of
/// the source chart, with a reference admissible coframe for a contact form `θ̂` that pulls
/// back to `θ` and whose Reeb field is tangent to `f(M)` along it.
#[derive(Clone, Debug)]
pub struct TargetData {
    pub ctx: JetContext,
    pub chart: Chart,
    /// Ambient directions `∂/∂t_j` at the base point.
    pub normals: Vec<Vec<C64>>,
    /// `v₀ = 1/⟨f*θ̂_ρ, T⟩` on the source chart.
    pub v0: Jet,
    /// Scale with `θ̂ = v θ̂_ρ`.
    pub v: Jet,
    pub coframe: AdmissibleCoframe,
    pub conn: ConnectionData,
    pub pack: CurvaturePack,
    /// Number of source chart variables, which are the first target variables.
    pub source_vars: usize,
}

impl TargetData {
    /// Indices of the source variables inside the target context.
    pub fn source_map(&self) -> Vec<usize> {
        (0..self.source_vars).collect()
    }

    /// Restriction of a target jet to `t = 0`, as a jet on the source chart.
    pub fn restrict(&self, j: &Jet, source: &JetContext) -> Jet {
        j.restrict(source, &self.source_map())
    }
}

/// Orthonormal basis of the Hermitian complement of the span of `vs` in `C^N`.
fn hermitian_complement(vs: &[Vec<C64>], want: usize) -> Result<Vec<Vec<C64>>> {
    let nn = vs[0].len();
    let a = DMatrix::from_fn(nn, vs.len(), |i, j| vs[j][i]);
    let pinv = a
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let proj = DMatrix::<C64>::identity(nn, nn) - &a * pinv;
    let eig = proj.symmetric_eigen();
    let mut picked: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.5)
        .map(|(i, &l)| (l, i))
        .collect();
    if picked.len() != want {
        return Err(Error::RankDeficient {
            rank: nn - picked.len(),
            expected: nn - want,
        });
    }
    picked.sort_by_key(|&(_, i)| i);
    Ok(picked
        .into_iter()
        .map(|(_, i)| {
            let v: DVector<C64> = eig.eigenvectors.column(i).into_owned();
            v.iter().copied().collect()
        })
        .collect())
}

/// Builds the `(s, t)` chart of the target sphere and its reference coframe.
pub fn target_coframe(map: &CRMapSpec, source: &AdmissibleCoframe) -> Result<TargetData> {
    map.validate()?;
    map.check_on(source)?;
    let n = source.n();
    let nh = map.n_hat();
    let d = nh - n;
    let ms = 2 * n + 1;
    let mt = 2 * nh + 1;
    let r = map.target_radius()?;
    let sctx = &source.ctx;
    let ctx = JetContext::new(mt, sctx.max_order());
    let smap: Vec<usize> = (0..ms).collect();

    let f = map.map_jets(source);
    let p_hat: Vec<C64> = f.iter().map(|j| j.value_or_nan()).collect();
    let mut span = vec![p_hat.clone()];
    span.extend(map.pushforward_at_base(source));
    let nu = hermitian_complement(&span, d)?;
    let normals: Vec<Vec<C64>> = nu
        .iter()
        .flat_map(|v| [v.clone(), v.iter().map(|z| z * I).collect()])
        .collect();

    let x: Vec<Jet> = (0..=nh)
        .map(|k| {
            let mut j = f[k].lift(&ctx, &smap);
            for (t, dir) in normals.iter().enumerate() {
                j += Jet::var(&ctx, ms + t).scale(dir[k]);
            }
            j
        })
        .collect();
    let mut norm2 = Jet::zero(&ctx);
    for xk in &x {
        norm2 += xk * &xk.conj();
    }
    let s = norm2.powc(-0.5)?.scale_re(r);
    let z: Vec<Jet> = x.iter().map(|xk| xk * &s).collect();
    let chart = Chart::parametrized(&map.target, &ctx, z)?;
    let theta_r = chart.contact_from_rho();

    // v₀ on M, then its first normal derivatives from tangency of the Reeb field
    let th: Vec<Jet> = theta_r
        .theta
        .iter()
        .map(|j| j.restrict(sctx, &smap))
        .collect();
    let t_src = &source.frame[0];
    let mut lambda = Jet::zero(sctx);
    for i in 0..ms {
        lambda += &th[i] * &t_src[i];
    }
    let v0 = lambda.inv()?;
    let tv0 = source.frame_derivatives(&v0).swap_remove(0);
    let mut v = v0.lift(&ctx, &smap);
    for j in 0..2 * d {
        let col = ms + j;
        let mut dth = Jet::zero(sctx);
        for i in 0..ms {
            let w = theta_r.dtheta[chart_pair(i, col, mt)].restrict(sctx, &smap);
            dth += &t_src[i] * &w;
        }
        let vj = &v0 * &(&(&tv0 * &th[col]) + &(&v0 * &dth));
        v += vj.lift(&ctx, &smap).mul_var(col);
    }
    let contact = theta_r.rescaled(&v);
    let raw = chart.raw_cr_frame()?;
    let coframe = normalize_admissible(&chart, &raw, &contact)?;
    let conn = webster_connection(&coframe)?;
    let pack = webster_curvature(&conn, &coframe)?;
    Ok(TargetData {
        ctx,
        chart,
        normals,
        v0,
        v,
        coframe,
        conn,
        pack,
        source_vars: ms,
    })
}
