use super::{AdaptedFrameData, CRMapSpec};
use crate::cr::AdmissibleCoframe;
use crate::error::{Error, Result};
use crate::forms::conformal::CTensor;
use crate::forms::{IndexedTensor, MovingFrame, Slot, SlotKind};
use crate::jet::{max_abs_base, Jet};
use crate::pseudohermitian::covariant_derivative;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const I: C64 = C64::new(0.0, 1.0);

/// Second fundamental form `ω_α^a_β` with its covariant derivatives.
#[derive(Clone, Debug)]
pub struct SffData {
    /// Slots `(α, a, β)`: down tangential, up normal, down tangential.
    pub omega: IndexedTensor<Jet>,
    /// The same form read from second derivatives of `ρ̂_{Z̄'} ∘ f`, at the base point.
    pub extrinsic: CTensor,
    /// Order `l` to `ω_{γ₁}^a_{γ₂;γ₃…γ_l}`, derivative slots in application order.
    pub derivs: BTreeMap<usize, IndexedTensor<Jet>>,
    /// `ω_α^a_β − ω_β^a_α`.
    pub symmetry: f64,
    /// `θ` and `θ^β̄` components of `ω̃_α^a`, which must vanish.
    pub extra_components: f64,
    /// Intrinsic against extrinsic.
    pub route_difference: f64,
}

impl SffData {
    pub fn n(&self) -> usize {
        self.omega.dims[0]
    }

    pub fn codim(&self) -> usize {
        self.omega.dims[1]
    }

    /// Base-point size of the form.
    pub fn norm(&self) -> f64 {
        self.omega.at_base().max_abs()
    }
}

fn sff_slots() -> Vec<Slot> {
    vec![
        Slot::down(SlotKind::Unbarred),
        Slot::up(SlotKind::NormalUnbarred),
        Slot::down(SlotKind::Unbarred),
    ]
}

/// Both routes to `ω_α^a_β`; fails when they disagree beyond `1e−8`.
pub fn second_fundamental_form(
    map: &CRMapSpec,
    source: &AdmissibleCoframe,
    adapted: &AdaptedFrameData,
) -> Result<SffData> {
    let n = source.n();
    let nh = adapted.n_hat();
    let d = nh - n;
    let sb = &source.basis;
    let omega = IndexedTensor::from_fn(sff_slots(), vec![n, d, n], |i| {
        adapted.omega[i[0]][n + i[1]].c[sb.l(i[2])].clone()
    });
    let mut extra: f64 = 0.0;
    for a in 0..n {
        for b in 0..d {
            let f = &adapted.omega[a][n + b];
            extra = extra.max(max_abs_base([&f.c[0]]));
            for be in 0..n {
                extra = extra.max(max_abs_base([&f.c[sb.lbar(be)]]));
            }
        }
    }
    let mut symmetry: f64 = 0.0;
    for i in omega.indices() {
        let s = omega.get(&i) - omega.get(&[i[2], i[1], i[0]]);
        symmetry = symmetry.max(max_abs_base([&s]));
    }

    // L_α L_β (v₀ ρ̂_{Z̄'_k} ∘ f) paired with the adapted normal directions
    let f = map.map_jets(source);
    let fb: Vec<Jet> = f.iter().map(|j| j.conj()).collect();
    let nn = f.len();
    let g: Vec<Jet> = (0..nn)
        .map(|k| &adapted.target.v0 * &map.target.rho.d_zbar(k).eval_jets(&f, &fb))
        .collect();
    let lg: Vec<Vec<Jet>> = g.iter().map(|gk| source.frame_derivatives(gk)).collect();
    let u0 = adapted.u_at_base();
    let amb = &adapted.target.coframe.ambient_l;
    let ell: Vec<Vec<C64>> = (0..d)
        .map(|a| {
            (0..nn)
                .map(|k| {
                    (0..nh)
                        .map(|c| u0[(n + a, c)] * amb[c][k].value_or_nan())
                        .sum()
                })
                .collect()
        })
        .collect();
    let extrinsic = IndexedTensor::from_fn(sff_slots(), vec![n, d, n], |i| {
        let (al, a, be) = (i[0], i[1], i[2]);
        (0..nn)
            .map(|k| {
                let h = source.frame_derivatives(&lg[k][sb.l(be)])[sb.l(al)].value_or_nan();
                h * ell[a][k].conj()
            })
            .sum()
    });
    let route_difference = omega.at_base().sub(&extrinsic).max_abs();
    if !(route_difference < 1e-8) {
        return Err(Error::Invalid(format!(
            "second fundamental form routes disagree by {route_difference:e}"
        )));
    }
    Ok(SffData {
        omega,
        extrinsic,
        derivs: BTreeMap::new(),
        symmetry,
        extra_components: extra,
        route_difference,
    })
}

/// Keeps the `L_μ` components of a trailing direction slot.
fn unbarred_directions(t: &IndexedTensor<Jet>, n: usize) -> IndexedTensor<Jet> {
    let k = t.rank() - 1;
    let mut slots = t.slots.clone();
    slots[k] = Slot::down(SlotKind::Unbarred);
    let mut dims = t.dims.clone();
    dims[k] = n;
    IndexedTensor::from_fn(slots, dims, |i| {
        let mut j = i.to_vec();
        j[k] = 1 + i[k];
        t.get(&j).clone()
    })
}

/// Fills `derivs` for orders `2..=max_order` by repeated covariant differentiation in
/// unbarred directions.
pub fn sff_covariant_derivatives(
    sff: &mut SffData,
    source: &AdmissibleCoframe,
    adapted: &AdaptedFrameData,
    max_order: usize,
) -> Result<()> {
    let n = source.n();
    let conn = adapted.connection();
    let mut t = sff.omega.clone();
    sff.derivs.clear();
    sff.derivs.insert(2, t.clone());
    for l in 3..=max_order {
        if t.data.iter().all(|j| j.order() < 1) {
            return Err(Error::OrderBudget(format!(
                "derivative order {l} of the second fundamental form"
            )));
        }
        t = unbarred_directions(&covariant_derivative(&t, &conn, source)?, n);
        sff.derivs.insert(l, t.clone());
    }
    Ok(())
}

/// Codazzi residuals at the base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodazziReport {
    /// `D̂_β^a` from the contraction, `dhat[β][a]`.
    pub dhat: Vec<Vec<C64>>,
    /// `ω_α^a_{β;γ̄} − i(δ_{αγ} D̂_β^a + δ_{βγ} D̂_α^a)`.
    pub residual: f64,
    /// Contraction against `i R̂_{βā}/(n̂+2)` of the target.
    pub dhat_dual: f64,
}

/// `ω_α^a_{β;γ̄}` and the Codazzi equations it satisfies.
pub fn codazzi_check(
    sff: &SffData,
    source: &AdmissibleCoframe,
    adapted: &AdaptedFrameData,
) -> Result<CodazziReport> {
    let n = sff.n();
    let d = sff.codim();
    let nh = n + d;
    let sb = &source.basis;
    let dw = covariant_derivative(&sff.omega, &adapted.connection(), source)?.at_base();
    let at = |al: usize, a: usize, be: usize, ga: usize| dw.get(&[al, a, be, sb.lbar(ga)]);
    let scale = -I / (n as f64 + 1.0);
    let dhat: Vec<Vec<C64>> = (0..n)
        .map(|be| {
            (0..d)
                .map(|a| scale * (0..n).map(|mu| at(mu, a, be, mu)).sum::<C64>())
                .collect()
        })
        .collect();
    let mut residual: f64 = 0.0;
    for al in 0..n {
        for a in 0..d {
            for be in 0..n {
                for ga in 0..n {
                    let mut want = C64::new(0.0, 0.0);
                    if al == ga {
                        want += I * dhat[be][a];
                    }
                    if be == ga {
                        want += I * dhat[al][a];
                    }
                    residual = residual.max((at(al, a, be, ga) - want).norm());
                }
            }
        }
    }
    let ric = adapted_ricci(adapted);
    let mut dhat_dual: f64 = 0.0;
    for be in 0..n {
        for a in 0..d {
            let direct = I * ric[(be, n + a)] / (nh as f64 + 2.0);
            dhat_dual = dhat_dual.max((direct - dhat[be][a]).norm());
        }
    }
    if residual.is_nan() || dhat_dual.is_nan() {
        return Err(Error::OrderBudget(
            "Codazzi needs one more derivative".into(),
        ));
    }
    Ok(CodazziReport {
        dhat,
        residual,
        dhat_dual,
    })
}

/// Target Ricci tensor `R̂_{AB̄}` in the adapted frame at the base point.
pub(crate) fn adapted_ricci(adapted: &AdaptedFrameData) -> nalgebra::DMatrix<C64> {
    let nh = adapted.n_hat();
    let u = adapted.u_at_base();
    let ric = nalgebra::DMatrix::from_fn(nh, nh, |a, b| {
        adapted.target.pack.ricci[a][b].value_or_nan()
    });
    &u * ric * u.adjoint()
}
