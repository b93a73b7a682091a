//! The sphere as the quadric `(ζ, ζ) = 0` in projective space: Q-frames along a CR map,
//! their Maurer–Cartan forms, and the dictionary relating those forms to the
//! pseudoconformal forms of the target.
//!
//! A sphere `Σ|Z'|² = r²` in `C^{n̂+1}` is carried to the quadric by the fixed linear map
//! `L(x₀, x_1, …, x_{n̂+1}) = (r x₀ − x_{n̂+1}, x_1, …, x_{n̂}, i(r x₀ + x_{n̂+1}))` on
//! homogeneous coordinates, which satisfies `(Lx, Lx) = Σ_{k≥1}|x_k|² − r²|x₀|²`.

use crate::cr::AdmissibleCoframe;
use crate::error::{Error, Result};
use crate::forms::{Form1, FrameBasis, MovingFrame};
use crate::immersion::{AdaptedFrameData, CRMapSpec, CodazziReport, InducedCoefficients, SffData};
use crate::jet::{jet_det, jet_linear_solve_multi, max_abs_all, Jet, JetContext};
use crate::pseudoconformal::{deb_coefficients, PhiForms};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[cfg(test)]
mod tests;

const I: C64 = C64::new(0.0, 1.0);

/// `δ_{AB̄} ζ^A τ̄^B + (i/2)(ζ^{n̂+1} τ̄⁰ − ζ⁰ τ̄^{n̂+1})`.
pub fn q_inner(z: &[C64], t: &[C64]) -> Result<C64> {
    if z.len() != t.len() || z.len() < 2 {
        return Err(Error::Invalid(format!(
            "q_inner on lengths {} and {}",
            z.len(),
            t.len()
        )));
    }
    let last = z.len() - 1;
    let mut s: C64 = (1..last).map(|a| z[a] * t[a].conj()).sum();
    s += 0.5 * I * (z[last] * t[0].conj() - z[0] * t[last].conj());
    Ok(s)
}

fn q_inner_jets(z: &[Jet], t: &[Jet]) -> Jet {
    let last = z.len() - 1;
    let mut s = Jet::zero(z[0].context());
    for a in 1..last {
        s += &z[a] * &t[a].conj();
    }
    s += (&z[last] * &t[0].conj() - &z[0] * &t[last].conj()).scale(0.5 * I);
    s
}

/// `(Z_Λ, Z_Ω)` required of a Q-frame.
pub fn q_gram(size: usize) -> DMatrix<C64> {
    let last = size - 1;
    DMatrix::from_fn(size, size, |l, o| match (l, o) {
        (l, o) if l == o && l != 0 && l != last => C64::new(1.0, 0.0),
        (l, 0) if l == last => 0.5 * I,
        (0, o) if o == last => -0.5 * I,
        _ => C64::new(0.0, 0.0),
    })
}

/// Largest deviation of the columns of `z` from the Q-frame products, together with
/// `|det z − 1|`.
pub fn validate_q_frame(z: &DMatrix<C64>) -> Result<f64> {
    let size = z.nrows();
    if z.ncols() != size || size < 3 {
        return Err(Error::Invalid(
            "a Q-frame is a square matrix of size at least 3".into(),
        ));
    }
    let want = q_gram(size);
    let cols: Vec<Vec<C64>> = (0..size)
        .map(|c| z.column(c).iter().copied().collect())
        .collect();
    let mut r: f64 = (z.determinant() - C64::new(1.0, 0.0)).norm();
    for l in 0..size {
        for o in 0..size {
            r = r.max((q_inner(&cols[l], &cols[o])? - want[(l, o)]).norm());
        }
    }
    Ok(r)
}

/// `L(x)` for homogeneous sphere coordinates `x = (x₀, Z')`.
fn to_quadric(x0: &Jet, z: &[Jet], r: f64) -> Vec<Jet> {
    let nn = z.len();
    let u = x0.scale(C64::new(r, 0.0));
    let mut out = Vec::with_capacity(nn + 1);
    out.push(&u - &z[nn - 1]);
    out.extend(z[..nn - 1].iter().cloned());
    out.push((&u + &z[nn - 1]).scale(I));
    out
}

/// Jet-valued Q-frame along the source chart; `z[Λ]` is the column `Z_Λ`.
#[derive(Clone, Debug)]
pub struct QFrameField {
    pub z: Vec<Vec<Jet>>,
}

impl QFrameField {
    pub fn size(&self) -> usize {
        self.z.len()
    }

    pub fn at_base(&self) -> DMatrix<C64> {
        let s = self.size();
        DMatrix::from_fn(s, s, |i, c| self.z[c][i].value_or_nan())
    }

    /// Q-frame products and `det − 1` as jets, through their trusted orders.
    pub fn jet_residual(&self) -> Result<f64> {
        let s = self.size();
        let want = q_gram(s);
        let mut r: f64 = 0.0;
        for l in 0..s {
            for o in 0..s {
                let g = q_inner_jets(&self.z[l], &self.z[o]).add_const(-want[(l, o)]);
                r = r.max(max_abs_all([&g]));
            }
        }
        let rows: Vec<Vec<Jet>> = (0..s)
            .map(|i| (0..s).map(|c| self.z[c][i].clone()).collect())
            .collect();
        let det = jet_det(&rows)?.add_const(C64::new(-1.0, 0.0));
        Ok(r.max(max_abs_all([&det])))
    }

    /// `Z₀` against the lift `L(1, f)` of the map, as a projective point.
    pub fn adaptedness_residual(&self, map: &CRMapSpec, source: &AdmissibleCoframe) -> Result<f64> {
        let r = map.target_radius()?;
        let f = map.map_jets(source);
        let zeta = to_quadric(&Jet::real(&source.ctx, 1.0), &f, r);
        let z0 = &self.z[0];
        let mut worst: f64 = 0.0;
        for i in 0..zeta.len() {
            for j in 0..zeta.len() {
                let m = &z0[i] * &zeta[j] - &z0[j] * &zeta[i];
                worst = worst.max(max_abs_all([&m]));
            }
        }
        Ok(worst)
    }
}

/// Builds the adapted Q-frame along `M` whose induced coframe is `(θ, θ^A)` of the adapted
/// target frame, with `ξ = 0`.
///
/// With `ζ = L(1, f)`, `Y_A = L(0, L̃_A f)` and `Y_T = L(0, T f)`:
/// `Z₀ = λζ`, `Z_A = λY_A − i|λ|²λ(Y_A, Y_T)ζ`, `Z_{n̂+1} = λ(Y_T/2 + κζ)`, where
/// `λ^{n̂+2} = 2/det(ζ, Y, Y_T)` gives unimodularity, `Im κ = −|λ|²(Y_T, Y_T)/4` makes
/// `Z_{n̂+1}` null and `Re κ = Re(Tλ/λ)/2` removes the real part of `π₀⁰`.
pub fn adapted_qframe_along(
    map: &CRMapSpec,
    source: &AdmissibleCoframe,
    adapted: &AdaptedFrameData,
) -> Result<QFrameField> {
    let n = source.n();
    let nh = map.n_hat();
    let ctx = &source.ctx;
    let sb = &source.basis;
    let r = map.target_radius()?;
    let f = map.map_jets(source);
    let df: Vec<Vec<Jet>> = f.iter().map(|fk| source.frame_derivatives(fk)).collect();
    let zero = Jet::zero(ctx);
    let zeta = to_quadric(&Jet::real(ctx, 1.0), &f, r);

    // ambient components of the adapted frame vectors
    let amb = &adapted.target.coframe.ambient_l;
    let nn = f.len();
    let mut ys: Vec<Vec<Jet>> = Vec::with_capacity(nh);
    for a in 0..nh {
        let v: Vec<Jet> = if a < n {
            (0..nn).map(|k| df[k][sb.l(a)].clone()).collect()
        } else {
            (0..nn)
                .map(|k| {
                    let mut s = Jet::zero(ctx);
                    for c in 0..nh {
                        s += &adapted.u[a][c] * &adapted.target.restrict(&amb[c][k], ctx);
                    }
                    s
                })
                .collect()
        };
        ys.push(to_quadric(&zero, &v, r));
    }
    let tf: Vec<Jet> = (0..nn).map(|k| df[k][0].clone()).collect();
    let yt = to_quadric(&zero, &tf, r);

    let size = nh + 2;
    let rows: Vec<Vec<Jet>> = (0..size)
        .map(|i| {
            let mut row = vec![zeta[i].clone()];
            row.extend(ys.iter().map(|y| y[i].clone()));
            row.push(yt[i].clone());
            row
        })
        .collect();
    let det = jet_det(&rows)?;
    let lambda = det
        .inv()?
        .scale(C64::new(2.0, 0.0))
        .powc(1.0 / size as f64)?;
    let v = &lambda * &lambda.conj();

    let t_log = source.frame_derivatives(&lambda)[0].div(&lambda)?;
    let kappa = &t_log.re().scale_re(0.5) - &(&v * &q_inner_jets(&yt, &yt)).scale(0.25 * I);

    let axpy = |a: &Jet, x: &[Jet], b: &Jet, y: &[Jet]| -> Vec<Jet> {
        x.iter()
            .zip(y)
            .map(|(xi, yi)| &(a * xi) + &(b * yi))
            .collect()
    };
    let mut z = Vec::with_capacity(size);
    z.push(zeta.iter().map(|c| &lambda * c).collect::<Vec<_>>());
    for y in &ys {
        let c = (&(&v * &lambda) * &q_inner_jets(y, &yt)).scale(-I);
        z.push(axpy(&lambda, y, &c, &zeta));
    }
    z.push(axpy(
        &lambda.scale(C64::new(0.5, 0.0)),
        &yt,
        &(&lambda * &kappa),
        &zeta,
    ));
    Ok(QFrameField { z })
}

/// `π_Λ^Ω` with `dZ_Λ = π_Λ^Ω Z_Ω`, as 1-forms on the source frame.
#[derive(Clone, Debug)]
pub struct MaurerCartan {
    /// `pi[Λ][Ω]`.
    pub pi: Vec<Vec<Form1>>,
}

pub fn maurer_cartan(frame: &QFrameField, source: &AdmissibleCoframe) -> Result<MaurerCartan> {
    let s = frame.size();
    let m = source.basis.m();
    let rows: Vec<Vec<Jet>> = (0..s)
        .map(|i| (0..s).map(|c| frame.z[c][i].clone()).collect())
        .collect();
    let dz: Vec<Vec<Vec<Jet>>> = frame
        .z
        .iter()
        .map(|col| col.iter().map(|c| source.frame_derivatives(c)).collect())
        .collect();
    let mut rhs = Vec::with_capacity(s * m);
    for l in 0..s {
        for b in 0..m {
            rhs.push((0..s).map(|i| dz[l][i][b].clone()).collect::<Vec<_>>());
        }
    }
    let sol = jet_linear_solve_multi(&rows, &rhs)?;
    let pi = (0..s)
        .map(|l| {
            (0..s)
                .map(|o| Form1 {
                    c: (0..m).map(|b| sol[l * m + b][o].clone()).collect(),
                })
                .collect()
        })
        .collect();
    Ok(MaurerCartan { pi })
}

impl MaurerCartan {
    pub fn size(&self) -> usize {
        self.pi.len()
    }

    /// Base-point size of `dπ_Λ^Ω − π_Λ^Γ ∧ π_Γ^Ω`.
    pub fn flatness_residual(&self, source: &AdmissibleCoframe) -> f64 {
        let s = self.size();
        let basis = &source.basis;
        let mut r: f64 = 0.0;
        for l in 0..s {
            for o in 0..s {
                let mut e = self.pi[l][o].d(source);
                for g in 0..s {
                    e.sub_assign(&self.pi[l][g].wedge(&self.pi[g][o], basis));
                }
                r = r.max(e.max_abs_base());
            }
        }
        r
    }

    /// Base-point size of `π G + G π*` (the forms take values in `su(n̂+1, 1)`) and of the
    /// trace `π_Λ^Λ`.
    pub fn su_residual(&self, basis: &FrameBasis) -> f64 {
        let s = self.size();
        let g = q_gram(s);
        let m = basis.m();
        let mut r: f64 = 0.0;
        for b in 0..m {
            let p = DMatrix::from_fn(s, s, |l, o| self.pi[l][o].c[b].value_or_nan());
            let pb = DMatrix::from_fn(s, s, |l, o| {
                self.pi[l][o].c[basis.bar(b)].value_or_nan().conj()
            });
            // (dZ_Λ, Z_Ω) + (Z_Λ, dZ_Ω) on e_b
            let e = &p * &g + &g * pb.transpose();
            r = r.max(e.iter().map(|z| z.norm()).fold(0.0, f64::max));
            r = r.max(p.trace().norm());
        }
        r
    }
}

/// Pulled-back pseudoconformal forms of the target in the adapted frame; blocks a route
/// cannot supply are `None`.
#[derive(Clone, Debug)]
pub struct TargetPhi {
    /// `phi[A][B] = φ̂_A^B`.
    pub phi: Vec<Vec<Option<Form1>>>,
    pub phi_up: Vec<Option<Form1>>,
    pub psi: Option<Form1>,
}

fn transform_d(d: &[Vec<Jet>], u: &[Vec<Jet>], ctx: &JetContext) -> Vec<Vec<Jet>> {
    let nh = u.len();
    (0..nh)
        .map(|a| {
            (0..nh)
                .map(|b| {
                    let mut s = Jet::zero(ctx);
                    for c in 0..nh {
                        for e in 0..nh {
                            s += &(&u[a][c] * &d[c][e]) * &u[b][e].conj();
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

impl TargetPhi {
    /// From the target curvature, moved to the adapted frame along `M`.
    pub fn direct(adapted: &AdaptedFrameData, source: &AdmissibleCoframe) -> Result<TargetPhi> {
        let t = &adapted.target;
        let deb = deb_coefficients(&t.pack, &t.conn, &t.coframe)?;
        let ctx = &source.ctx;
        let sb = &source.basis;
        let n = source.n();
        let nh = adapted.n_hat();
        let d_ref: Vec<Vec<Jet>> = deb
            .d
            .iter()
            .map(|row| row.iter().map(|j| t.restrict(j, ctx)).collect())
            .collect();
        let d = transform_d(&d_ref, &adapted.u, ctx);
        let e_ref: Vec<Jet> = deb.e.iter().map(|j| t.restrict(j, ctx)).collect();
        let e: Vec<Jet> = (0..nh)
            .map(|a| {
                let mut s = Jet::zero(ctx);
                for c in 0..nh {
                    s += &e_ref[c] * &adapted.u_inv[c][a];
                }
                s
            })
            .collect();
        let b = t.restrict(&deb.b, ctx);
        let phi = (0..nh)
            .map(|a| {
                (0..nh)
                    .map(|c| {
                        let mut f = adapted.omega[a][c].clone();
                        f.c[0] += &d[a][c];
                        Some(f)
                    })
                    .collect()
            })
            .collect();
        let phi_up = (0..nh)
            .map(|a| {
                let mut f = adapted.tau[a].clone();
                for mu in 0..n {
                    f.c[sb.l(mu)] += &d[mu][a];
                }
                f.c[0] += &e[a];
                Some(f)
            })
            .collect();
        let mut psi = Form1::zero(ctx, sb);
        for mu in 0..n {
            psi.c[sb.l(mu)] = e[mu].conj().scale(I);
            psi.c[sb.lbar(mu)] = e[mu].scale(-I);
        }
        psi.c[0] = b;
        Ok(TargetPhi {
            phi,
            phi_up,
            psi: Some(psi),
        })
    }

    /// From the forms of `M` and the coefficients `C, F, A`, the second fundamental form and
    /// `D̂_β^a`; normal–normal blocks and `φ̂^a` are left out. Coefficients enter through their
    /// base values, so only base-point comparisons are meaningful.
    pub fn from_induced(
        source_phi: &PhiForms,
        induced: &InducedCoefficients,
        sff: &SffData,
        codazzi: &CodazziReport,
        source: &AdmissibleCoframe,
    ) -> Result<TargetPhi> {
        let (Some(fv), Some(a)) = (&induced.f, induced.a) else {
            return Err(Error::OrderBudget(
                "F and A are needed for the chain route".into(),
            ));
        };
        let ctx = &source.ctx;
        let sb = &source.basis;
        let n = source.n();
        let d = sff.codim();
        let nh = n + d;
        let k = |z: C64| Jet::constant(ctx, z);
        let mut phi = vec![vec![None; nh]; nh];
        for be in 0..n {
            for al in 0..n {
                let mut f = source_phi.phi_ba[be][al].clone();
                f.c[0] += &k(induced.c[be][al]);
                phi[be][al] = Some(f);
            }
            for x in 0..d {
                let mut f = Form1::zero(ctx, sb);
                for ga in 0..n {
                    f.c[sb.l(ga)] = sff.omega.get(&[be, x, ga]).clone();
                }
                f.c[0] = k(codazzi.dhat[be][x]);
                phi[n + x][be] = Some(f.conj(sb).scale_c(C64::new(-1.0, 0.0)));
                phi[be][n + x] = Some(f);
            }
        }
        let mut phi_up = vec![None; nh];
        for al in 0..n {
            let mut f = source_phi.phi_a[al].clone();
            for mu in 0..n {
                f.c[sb.l(mu)] += &k(induced.c[mu][al]);
            }
            f.c[0] += &k(fv[al]);
            phi_up[al] = Some(f);
        }
        let mut psi = source_phi.psi.clone();
        for mu in 0..n {
            psi.c[sb.l(mu)] += &k(I * fv[mu].conj());
            psi.c[sb.lbar(mu)] += &k(-I * fv[mu]);
        }
        psi.c[0] += &k(a);
        Ok(TargetPhi {
            phi,
            phi_up,
            psi: Some(psi),
        })
    }

    fn trace(&self) -> Option<Form1> {
        let mut it = (0..self.phi.len()).map(|c| self.phi[c][c].as_ref());
        let first = it.next()??.clone();
        it.try_fold(first, |acc, f| f.map(|f| acc.add(f)))
    }
}

/// Base-point residuals of the rows relating `π` to the coframe and to `φ̂`, each row
/// maximized over its available indices. `None` marks rows with no available entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DictionaryReport {
    /// `π₀^{n̂+1} − 2θ`.
    pub theta: f64,
    /// `π₀^A − θ^A`.
    pub theta_upper: f64,
    /// `π_A^{n̂+1} − 2iθ_A`.
    pub theta_lower: f64,
    /// `ξ = −π₀⁰ − conj(π₀⁰)`.
    pub xi: f64,
    /// `(n̂+2)π₀⁰ + φ̂_C^C`.
    pub trace: Option<f64>,
    /// `(n̂+2)π_{n̂+1}^{n̂+1} − conj(φ̂_C^C)`.
    pub trace_bar: Option<f64>,
    /// `π_A^B − φ̂_A^B − δ_A^B π₀⁰`.
    pub connection: Option<f64>,
    /// `π_A^0 + iφ̂_A`.
    pub phi_lower: Option<f64>,
    /// `2π_{n̂+1}^A − φ̂^A`.
    pub phi_upper: Option<f64>,
    /// `4π_{n̂+1}^0 + ψ̂`.
    pub psi: Option<f64>,
}

impl DictionaryReport {
    /// Largest residual among the coframe rows, which need no `φ̂`.
    pub fn coframe_max(&self) -> f64 {
        self.theta
            .max(self.theta_upper)
            .max(self.theta_lower)
            .max(self.xi)
    }

    pub fn max(&self) -> f64 {
        [
            self.trace,
            self.trace_bar,
            self.connection,
            self.phi_lower,
            self.phi_upper,
            self.psi,
        ]
        .into_iter()
        .flatten()
        .fold(self.coframe_max(), f64::max)
    }
}

fn opt_max(acc: Option<f64>, v: f64) -> Option<f64> {
    Some(acc.map_or(v, |a| a.max(v)))
}

pub fn piphi_dictionary_residual(
    mc: &MaurerCartan,
    phi: &TargetPhi,
    source: &AdmissibleCoframe,
) -> DictionaryReport {
    let sb = &source.basis;
    let ctx = &source.ctx;
    let n = source.n();
    let s = mc.size();
    let nh = s - 2;
    let last = s - 1;
    let pi = &mc.pi;
    let theta_up = |a: usize| {
        if a < n {
            Form1::basis_element(ctx, sb, sb.l(a))
        } else {
            Form1::zero(ctx, sb)
        }
    };
    let mut r = DictionaryReport {
        theta: pi[0][last]
            .sub(&Form1::basis_element(ctx, sb, 0).scale_c(C64::new(2.0, 0.0)))
            .max_abs_base(),
        xi: pi[0][0].add(&pi[0][0].conj(sb)).max_abs_base(),
        ..Default::default()
    };
    for a in 0..nh {
        let t = theta_up(a);
        r.theta_upper = r.theta_upper.max(pi[0][1 + a].sub(&t).max_abs_base());
        let lower = t.conj(sb).scale_c(2.0 * I);
        r.theta_lower = r
            .theta_lower
            .max(pi[1 + a][last].sub(&lower).max_abs_base());
    }
    let sf = s as f64;
    if let Some(tr) = phi.trace() {
        r.trace = Some(pi[0][0].scale_c(C64::new(sf, 0.0)).add(&tr).max_abs_base());
        r.trace_bar = Some(
            pi[last][last]
                .scale_c(C64::new(sf, 0.0))
                .sub(&tr.conj(sb))
                .max_abs_base(),
        );
    }
    for a in 0..nh {
        for b in 0..nh {
            if let Some(f) = &phi.phi[a][b] {
                let mut e = pi[1 + a][1 + b].sub(f);
                if a == b {
                    e = e.sub(&pi[0][0]);
                }
                r.connection = opt_max(r.connection, e.max_abs_base());
            }
        }
        if let Some(f) = &phi.phi_up[a] {
            let lower = f.conj(sb).scale_c(I);
            r.phi_lower = opt_max(r.phi_lower, pi[1 + a][0].add(&lower).max_abs_base());
            let e = pi[last][1 + a].scale_c(C64::new(2.0, 0.0)).sub(f);
            r.phi_upper = opt_max(r.phi_upper, e.max_abs_base());
        }
    }
    if let Some(psi) = &phi.psi {
        r.psi = Some(
            pi[last][0]
                .scale_c(C64::new(4.0, 0.0))
                .add(psi)
                .max_abs_base(),
        );
    }
    r
}
