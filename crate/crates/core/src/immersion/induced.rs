use super::sff::adapted_ricci;
use super::{AdaptedFrameData, CodazziReport, SffData};
use crate::cr::AdmissibleCoframe;
use crate::error::{Error, Result};
use crate::forms::{IndexedTensor, Slot, SlotKind};
use crate::jet::Jet;
use crate::pseudoconformal::{deb_coefficients, CmComponents, Deb};
use crate::pseudohermitian::covariant_derivative;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const I: C64 = C64::new(0.0, 1.0);

/// Differences `Ĉ = D̂ − D`, `F = Ê − E`, `A = B̂ − B` between the pseudoconformal
/// coefficients of the target (pulled back, adapted frame) and of the source, each computed
/// from the second fundamental form and again directly from the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InducedCoefficients {
    /// `c[α][β] = C_{αβ̄}` from the second fundamental form.
    pub c: Vec<Vec<C64>>,
    /// `D̂_{αβ̄} − D_{αβ̄}` from the target curvature.
    pub c_direct: Vec<Vec<C64>>,
    pub c_dual: f64,
    /// `F^α` from derivatives of `C`; needs `n ≥ 2`.
    pub f: Option<Vec<C64>>,
    /// `Ê^α − E^α` with the target `E` moved to the adapted frame.
    pub f_direct: Option<Vec<C64>>,
    pub f_dual: Option<f64>,
    /// `A` from the trace formula.
    pub a: Option<C64>,
    /// `B̂ − B`.
    pub a_direct: Option<C64>,
    pub a_dual: Option<f64>,
    /// `D̂_μ^a ω_a^α_ν̄ − iF^α δ_{μν} − ½ iF^ν δ_μ^α − (V^α_{μν̄} − V̂ − C_μ^α_{;ν̄})`.
    pub identity_residual: Option<f64>,
}

fn dual(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

#[allow(clippy::too_many_arguments)]
pub fn induced_connection_coefficients(
    sff: &SffData,
    source: &AdmissibleCoframe,
    deb: &Deb,
    comps: &CmComponents,
    adapted: &AdaptedFrameData,
    codazzi: &CodazziReport,
) -> Result<InducedCoefficients> {
    let n = sff.n();
    let d = sff.codim();
    let nh = n + d;
    let nf = n as f64;
    let sb = &source.basis;
    let ctx = &source.ctx;
    let w = &sff.omega;

    // C from ω ω̄ with the target tangential Ŝ dropped
    let g: Vec<Vec<Jet>> = (0..n)
        .map(|al| {
            (0..n)
                .map(|be| {
                    let mut s = Jet::zero(ctx);
                    for mu in 0..n {
                        for a in 0..d {
                            s += w.get(&[mu, a, al]) * &w.get(&[mu, a, be]).conj();
                        }
                    }
                    s
                })
                .collect()
        })
        .collect();
    let mut gs = Jet::zero(ctx);
    for mu in 0..n {
        gs += &g[mu][mu];
    }
    let c1 = I / (nf + 2.0);
    let c2 = I / (2.0 * (nf + 1.0) * (nf + 2.0));
    let cj: Vec<Vec<Jet>> = (0..n)
        .map(|al| {
            (0..n)
                .map(|be| {
                    let mut v = g[al][be].scale(c1);
                    if al == be {
                        v -= gs.scale(c2);
                    }
                    v
                })
                .collect()
        })
        .collect();
    let c: Vec<Vec<C64>> = cj
        .iter()
        .map(|r| r.iter().map(|j| j.value_or_nan()).collect())
        .collect();

    let nhf = nh as f64;
    let ric = adapted_ricci(adapted);
    let scal = adapted.target.pack.scalar.value_or_nan();
    let c_direct: Vec<Vec<C64>> = (0..n)
        .map(|al| {
            (0..n)
                .map(|be| {
                    let mut dh = I * ric[(al, be)] / (nhf + 2.0);
                    if al == be {
                        dh -= I * scal / (2.0 * (nhf + 1.0) * (nhf + 2.0));
                    }
                    dh - deb.d[al][be].value_or_nan()
                })
                .collect()
        })
        .collect();
    let c_dual = dual(&c.concat(), &c_direct.concat());

    // direct F and A need the target E and B
    let target_deb = deb_coefficients(
        &adapted.target.pack,
        &adapted.target.conn,
        &adapted.target.coframe,
    )
    .ok();
    let u_inv = &adapted.u_inv;
    let f_direct = target_deb.as_ref().and_then(|td| {
        let e_hat: Vec<C64> = td.e.iter().map(|j| j.value_or_nan()).collect();
        let v: Vec<C64> = (0..n)
            .map(|al| {
                let t: C64 = (0..nh)
                    .map(|cc| e_hat[cc] * u_inv[cc][al].value_or_nan())
                    .sum();
                t - deb.e[al].value_or_nan()
            })
            .collect();
        v.iter().all(|z| z.is_finite()).then_some(v)
    });
    let a_direct = target_deb
        .as_ref()
        .map(|td| td.b.value_or_nan() - deb.b.value_or_nan())
        .filter(|z| z.is_finite());

    let mut out = InducedCoefficients {
        c,
        c_direct,
        c_dual,
        f: None,
        f_direct,
        f_dual: None,
        a: None,
        a_direct,
        a_dual: None,
        identity_residual: None,
    };
    if n < 2 {
        return Ok(out);
    }

    let conn = &adapted.source_conn;
    let ct = IndexedTensor::from_fn(
        vec![Slot::down(SlotKind::Unbarred), Slot::up(SlotKind::Unbarred)],
        vec![n, n],
        |i| cj[i[0]][i[1]].clone(),
    );
    let dc = covariant_derivative(&ct, conn, source)?;
    // swapping α, γ in the V-trace identity and contracting gives (1 − n)/2 · iF^α
    let cf = C64::new(0.0, 2.0 / (nf - 1.0));
    let fj: Vec<Jet> = (0..n)
        .map(|al| {
            let mut s = Jet::zero(ctx);
            for mu in 0..n {
                s += dc.get(&[mu, mu, sb.lbar(al)]);
                s -= dc.get(&[mu, al, sb.lbar(mu)]);
            }
            s.scale(cf)
        })
        .collect();
    let f: Vec<C64> = fj.iter().map(|j| j.value_or_nan()).collect();
    if f.iter().any(|z| !z.is_finite()) {
        return Err(Error::OrderBudget("F needs one derivative of C".into()));
    }

    let mut ident: f64 = 0.0;
    for al in 0..n {
        for mu in 0..n {
            for nu in 0..n {
                let mut lhs = C64::new(0.0, 0.0);
                for a in 0..d {
                    let w_a = adapted.omega[n + a][al].c[sb.lbar(nu)].value_or_nan();
                    lhs += codazzi.dhat[mu][a] * w_a;
                }
                if mu == nu {
                    lhs -= I * f[al];
                }
                if mu == al {
                    lhs -= 0.5 * I * f[nu];
                }
                let rhs =
                    comps.v_bar.get(&[al, mu, nu]) - dc.get(&[mu, al, sb.lbar(nu)]).value_or_nan();
                ident = ident.max((lhs - rhs).norm());
            }
        }
    }
    out.identity_residual = Some(ident);
    out.f_dual = out.f_direct.as_ref().map(|fd| dual(&f, fd));

    let ft = IndexedTensor::from_fn(vec![Slot::up(SlotKind::Unbarred)], vec![n], |i| {
        fj[i[0]].clone()
    });
    let df = covariant_derivative(&ft, conn, source)?.at_base();
    let dfb = covariant_derivative(&ft.conj(), conn, source)?.at_base();
    let mut na = C64::new(0.0, 0.0);
    for mu in 0..n {
        na += dfb.get(&[mu, sb.lbar(mu)]) + df.get(&[mu, sb.l(mu)]);
        for ga in 0..n {
            let cv = out.c[mu][ga];
            let dv = deb.d[mu][ga].value_or_nan();
            na += 2.0 * (cv.norm_sqr() + cv * dv.conj() + cv.conj() * dv);
        }
        for a in 0..d {
            na += 2.0 * codazzi.dhat[mu][a].norm_sqr();
        }
    }
    let a = na / nf;
    if a.is_finite() {
        out.a = Some(a);
        out.a_dual = out.a_direct.map(|ad| (ad - a).norm());
    }
    out.f = Some(f);
    Ok(out)
}
