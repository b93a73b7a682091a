//! Chern–Moser tensor, the coefficients `D, E, B` and the pulled-back pseudoconformal forms.

use crate::error::{Error, Result};
use crate::forms::conformal::{symmetry_defect, traceless_project, traces, CTensor};
use crate::forms::{Form1, Form2, FrameBasis, IndexedTensor, MovingFrame, Slot, SlotKind};
use crate::jet::{Jet, JetContext};
use crate::pseudohermitian::{covariant_derivative, ConnectionData, CurvaturePack};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

const I: C64 = C64::new(0.0, 1.0);

fn identity(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

/// `S`, the trace-free part of `R`, at the base point.
pub fn chern_moser_tensor(pack: &CurvaturePack) -> Result<CTensor> {
    let r = pack.r.at_base();
    traceless_project(&r, &identity(r.dims[0]))
}

/// `D_{αβ̄}`, `E^α` and `B` as jets.
#[derive(Clone, Debug)]
pub struct Deb {
    /// `d[α][β] = D_{αβ̄}`, numerically also `D_α^β` and `D^{β̄α}`.
    pub d: Vec<Vec<Jet>>,
    pub e: Vec<Jet>,
    pub b: Jet,
}

fn d_tensor(d: &[Vec<Jet>]) -> IndexedTensor<Jet> {
    let n = d.len();
    IndexedTensor::from_fn(
        vec![Slot::down(SlotKind::Unbarred), Slot::down(SlotKind::Barred)],
        vec![n, n],
        |i| d[i[0]][i[1]].clone(),
    )
}

pub fn deb_coefficients(
    pack: &CurvaturePack,
    conn: &ConnectionData,
    frame: &impl MovingFrame,
) -> Result<Deb> {
    let basis = frame.basis();
    let ctx = frame.context();
    let n = conn.n();
    let nf = n as f64;
    let c1 = I / (nf + 2.0);
    let c2 = I / (2.0 * (nf + 1.0) * (nf + 2.0));
    let d: Vec<Vec<Jet>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let mut v = pack.ricci[a][b].scale(c1);
                    if a == b {
                        v -= pack.scalar.scale(c2);
                    }
                    v
                })
                .collect()
        })
        .collect();

    let da = covariant_derivative(&conn.torsion_tensor(), conn, frame)?;
    let dd = covariant_derivative(&d_tensor(&d), conn, frame)?;
    let ce = C64::new(0.0, 2.0 / (2.0 * nf + 1.0));
    let e: Vec<Jet> = (0..n)
        .map(|a| {
            let mut s = Jet::zero(ctx);
            for mu in 0..n {
                s += da.get(&[a, mu, basis.l(mu)]);
                s -= dd.get(&[mu, a, basis.lbar(mu)]);
            }
            s.scale(ce)
        })
        .collect();
    if e.iter().any(|j| j.order() < 0) {
        return Err(Error::OrderBudget(
            "E needs one order below the curvature".into(),
        ));
    }

    let et = IndexedTensor::from_fn(vec![Slot::up(SlotKind::Unbarred)], vec![n], |i| {
        e[i[0]].clone()
    });
    let de = covariant_derivative(&et, conn, frame)?;
    let deb = covariant_derivative(&et.conj(), conn, frame)?;
    let mut b = Jet::zero(ctx);
    for mu in 0..n {
        b += de.get(&[mu, basis.l(mu)]);
        b += deb.get(&[mu, basis.lbar(mu)]);
        for beta in 0..n {
            let a = &conn.torsion[beta][mu];
            b -= (a * &a.conj()).scale_re(2.0);
            let dv = &d[mu][beta];
            b += (dv * &dv.conj()).scale_re(2.0);
        }
    }
    let b = b.scale_re(1.0 / nf);
    Ok(Deb { d, e, b })
}

/// Pulled-back `φ_β^α`, `φ^α`, `ψ`.
#[derive(Clone, Debug)]
pub struct PhiForms {
    /// `phi_ba[β][α] = φ_β^α`.
    pub phi_ba: Vec<Vec<Form1>>,
    pub phi_a: Vec<Form1>,
    pub psi: Form1,
}

pub fn pulled_back_phi_forms(
    conn: &ConnectionData,
    deb: &Deb,
    basis: &FrameBasis,
    ctx: &JetContext,
) -> PhiForms {
    let n = conn.n();
    let phi_ba = (0..n)
        .map(|b| {
            (0..n)
                .map(|a| {
                    let mut f = conn.omega[b][a].clone();
                    f.c[0] += &deb.d[b][a];
                    f
                })
                .collect()
        })
        .collect();
    let phi_a = (0..n)
        .map(|a| {
            let mut f = conn.tau[a].clone();
            for mu in 0..n {
                f.c[basis.l(mu)] += &deb.d[mu][a];
            }
            f.c[0] += &deb.e[a];
            f
        })
        .collect();
    let mut psi = Form1::zero(ctx, basis);
    for mu in 0..n {
        psi.c[basis.l(mu)] = deb.e[mu].conj().scale(I);
        psi.c[basis.lbar(mu)] = deb.e[mu].scale(-I);
    }
    psi.c[0] = deb.b.clone();
    PhiForms { phi_ba, phi_a, psi }
}

impl PhiForms {
    /// Base-point residual of `φ_{αβ̄} + φ_{β̄α} = 0`.
    pub fn skew_residual(&self, basis: &FrameBasis) -> f64 {
        let n = self.phi_a.len();
        let mut r: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                r = r.max(
                    self.phi_ba[a][b]
                        .add(&self.phi_ba[b][a].conj(basis))
                        .max_abs_base(),
                );
            }
        }
        r
    }
}

/// Residuals and read-off components of the pulled-back Chern–Moser structure equations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CmResiduals {
    /// `dθ = iθ^μ∧θ_μ`.
    pub eq_dtheta: f64,
    /// `dθ^α = θ^μ∧φ_μ^α + θ∧φ^α`.
    pub eq_dtheta_alpha: f64,
    /// `dφ = 0` in its `θ` slots.
    pub eq_dphi_theta_slots: f64,
    /// Components of `Φ_β^α` outside the `S`, `V` slots.
    pub phi_ba_extra: f64,
    /// Components of `Φ^α` outside the `V`, `P`, `Q` slots.
    pub phi_a_extra: f64,
    pub s_symmetry: f64,
    pub s_trace: f64,
    /// `V_α^μ_μ`.
    pub v_trace: f64,
    /// `V^α_μ^μ`.
    pub v_trace_bar: f64,
    pub p_trace: f64,
    /// `V^α_{βν̄}` from `Φ_β^α` against `V^α_{μν̄}` from `Φ^α`.
    pub v_cross: f64,
    /// `P` read from `Φ^α` against `P` read from the `dψ` equation.
    pub p_cross: f64,
    /// `‖S(read off) − S(projected)‖`.
    pub s_dual: f64,
    /// `E` from the trace condition on `V` against the covariant-derivative formula.
    pub e_dual: f64,
    /// `B` from the trace condition on `P` against the covariant-derivative formula.
    pub b_dual: f64,
    pub s_norm: f64,
}

/// Components read off the curvature forms at the base point.
#[derive(Clone, Debug)]
pub struct CmComponents {
    /// `S_β^α_{μν̄}`.
    pub s: CTensor,
    /// `V_β^α_μ`.
    pub v: CTensor,
    /// `V^α_{μν̄}`.
    pub v_bar: CTensor,
    /// `P_μ^α`.
    pub p: DMatrix<C64>,
    /// `Q_ν̄^α`.
    pub q: DMatrix<C64>,
    /// `R_μ`, `R_ν̄` from `Ψ`.
    pub r_mu: Vec<C64>,
    pub r_nubar: Vec<C64>,
}

fn basis_forms(ctx: &JetContext, basis: &FrameBasis) -> Vec<Form1> {
    (0..basis.m())
        .map(|a| Form1::basis_element(ctx, basis, a))
        .collect()
}

fn at(f: &Form2, basis: &FrameBasis, a: usize, b: usize) -> C64 {
    f.get(basis, a, b).value_or_nan()
}

fn tensor3(kinds: [Slot; 3], n: usize, f: impl FnMut(&[usize]) -> C64) -> CTensor {
    IndexedTensor::from_fn(kinds.to_vec(), vec![n; 3], f)
}

/// Curvature forms `Φ_β^α`, `Φ^α` and `Ψ` on `M`, where `φ = 0`.
pub fn cm_curvature_forms(
    phi: &PhiForms,
    frame: &impl MovingFrame,
) -> (Vec<Vec<Form2>>, Vec<Form2>, Form2) {
    let basis = frame.basis();
    let ctx = frame.context();
    let n = basis.n();
    let e = basis_forms(ctx, basis);
    let theta = &e[0];
    let lower = |f: &Form1| f.conj(basis);
    let big_phi_ba = (0..n)
        .map(|b| {
            (0..n)
                .map(|a| {
                    let mut f = phi.phi_ba[b][a].d(frame);
                    for mu in 0..n {
                        f.sub_assign(&phi.phi_ba[b][mu].wedge(&phi.phi_ba[mu][a], basis));
                    }
                    let theta_b = &e[basis.lbar(b)];
                    f.axpy_c(-I, &theta_b.wedge(&phi.phi_a[a], basis));
                    f.axpy_c(I, &lower(&phi.phi_a[b]).wedge(&e[basis.l(a)], basis));
                    if a == b {
                        for mu in 0..n {
                            f.axpy_c(I, &lower(&phi.phi_a[mu]).wedge(&e[basis.l(mu)], basis));
                        }
                        f.axpy_c(C64::new(0.5, 0.0), &phi.psi.wedge(theta, basis));
                    }
                    f
                })
                .collect()
        })
        .collect();
    let big_phi_a = (0..n)
        .map(|a| {
            let mut f = phi.phi_a[a].d(frame);
            for mu in 0..n {
                f.sub_assign(&phi.phi_a[mu].wedge(&phi.phi_ba[mu][a], basis));
            }
            f.axpy_c(C64::new(0.5, 0.0), &phi.psi.wedge(&e[basis.l(a)], basis));
            f
        })
        .collect();
    let mut big_psi = phi.psi.d(frame);
    for mu in 0..n {
        big_psi.axpy_c(
            -2.0 * I,
            &phi.phi_a[mu].wedge(&lower(&phi.phi_a[mu]), basis),
        );
    }
    (big_phi_ba, big_phi_a, big_psi)
}

/// Checks the pulled-back structure equations and reads off `S, V, P, Q, R_μ`.
pub fn cm_structure_residuals(
    phi: &PhiForms,
    pack: &CurvaturePack,
    deb: &Deb,
    frame: &impl MovingFrame,
) -> Result<(CmResiduals, CmComponents)> {
    let basis = frame.basis();
    let ctx = frame.context();
    let n = basis.n();
    let nf = n as f64;
    let e = basis_forms(ctx, basis);
    let gamma = |a: usize| Form2 {
        c: frame.structure(a).to_vec(),
    };

    let mut eq2 = gamma(0);
    for mu in 0..n {
        eq2.axpy_c(-I, &e[basis.l(mu)].wedge(&e[basis.lbar(mu)], basis));
    }
    let mut eq3: f64 = 0.0;
    for a in 0..n {
        let mut f = gamma(basis.l(a));
        for mu in 0..n {
            f.sub_assign(&e[basis.l(mu)].wedge(&phi.phi_ba[mu][a], basis));
        }
        f.sub_assign(&e[0].wedge(&phi.phi_a[a], basis));
        eq3 = eq3.max(f.max_abs_base());
    }
    let mut eq4 = Form2::zero(ctx, basis);
    for nu in 0..n {
        eq4.axpy_c(I, &e[basis.l(nu)].wedge(&phi.phi_a[nu].conj(basis), basis));
        eq4.axpy_c(I, &phi.phi_a[nu].wedge(&e[basis.lbar(nu)], basis));
    }
    eq4.add_assign(&e[0].wedge(&phi.psi, basis));
    let eq4 = eq4.max_abs_base_where(basis, |a, _| a == 0);

    let (fba, fa, fpsi) = cm_curvature_forms(phi, frame);
    let tangent_only = |a: usize, b: usize| a != 0 && b != 0 && (a <= n) == (b <= n);
    let mut phi_ba_extra: f64 = 0.0;
    for row in &fba {
        for f in row {
            phi_ba_extra = phi_ba_extra.max(f.max_abs_base_where(basis, tangent_only));
        }
    }
    let mut phi_a_extra: f64 = 0.0;
    for f in &fa {
        phi_a_extra = phi_a_extra.max(f.max_abs_base_where(basis, tangent_only));
    }

    let s = IndexedTensor::from_fn(crate::forms::curvature_slots(), vec![n; 4], |i| {
        at(&fba[i[0]][i[1]], basis, basis.l(i[2]), basis.lbar(i[3]))
    });
    let v = tensor3(
        [
            Slot::down(SlotKind::Unbarred),
            Slot::up(SlotKind::Unbarred),
            Slot::down(SlotKind::Unbarred),
        ],
        n,
        |i| -at(&fba[i[0]][i[1]], basis, 0, basis.l(i[2])),
    );
    // V^α_{βν̄} as it appears in Φ_β^α
    let v_from_ba = tensor3(
        [
            Slot::up(SlotKind::Unbarred),
            Slot::down(SlotKind::Unbarred),
            Slot::down(SlotKind::Barred),
        ],
        n,
        |i| at(&fba[i[1]][i[0]], basis, 0, basis.lbar(i[2])),
    );
    let v_bar = tensor3(
        [
            Slot::up(SlotKind::Unbarred),
            Slot::down(SlotKind::Unbarred),
            Slot::down(SlotKind::Barred),
        ],
        n,
        |i| at(&fa[i[0]], basis, basis.l(i[1]), basis.lbar(i[2])),
    );
    let p = DMatrix::from_fn(n, n, |mu, a| -at(&fa[a], basis, 0, basis.l(mu)));
    let q = DMatrix::from_fn(n, n, |nu, a| -at(&fa[a], basis, 0, basis.lbar(nu)));
    // Ψ = −2i P_{μν̄} θ^μ∧θ^ν̄ + ...
    let p_psi = DMatrix::from_fn(n, n, |mu, nu| {
        at(&fpsi, basis, basis.l(mu), basis.lbar(nu)) / (-2.0 * I)
    });
    let r_mu = (0..n).map(|mu| -at(&fpsi, basis, 0, basis.l(mu))).collect();
    let r_nubar = (0..n)
        .map(|nu| -at(&fpsi, basis, 0, basis.lbar(nu)))
        .collect();
    let psi_extra = fpsi.max_abs_base_where(basis, tangent_only);
    phi_a_extra = phi_a_extra.max(psi_extra);

    let g = identity(n);
    let s_symmetry = symmetry_defect(&s);
    let (s_ric, _) = traces(&s, &g)?;
    let s_trace = s_ric.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
    let mut v_trace: f64 = 0.0;
    let mut v_trace_bar: f64 = 0.0;
    for a in 0..n {
        let mut t1 = C64::new(0.0, 0.0);
        let mut t2 = C64::new(0.0, 0.0);
        for mu in 0..n {
            t1 += v.get(&[a, mu, mu]);
            t2 += v_bar.get(&[a, mu, mu]);
        }
        v_trace = v_trace.max(t1.norm());
        v_trace_bar = v_trace_bar.max(t2.norm());
    }
    let p_trace = p.trace().norm();
    let v_cross = v_from_ba.sub(&v_bar).max_abs();
    let p_cross = (&p - &p_psi).iter().fold(0.0, |m: f64, z| m.max(z.norm()));
    let s_proj = chern_moser_tensor(pack)?;
    let s_dual = s.sub(&s_proj).max_abs();

    // V^α_{μν̄} = X^α_{μν̄} + iE^α δ_{μν} + ½ i E_ν̄ δ_μ^α with X the slot value without E;
    // the trace condition then fixes E.
    let e0: Vec<C64> = deb.e.iter().map(|j| j.value_or_nan()).collect();
    let mut e_dual: f64 = 0.0;
    for a in 0..n {
        let mut x = C64::new(0.0, 0.0);
        for mu in 0..n {
            x += v_bar.get(&[a, mu, mu]);
        }
        x -= I * e0[a] * (nf + 0.5);
        let e2 = -x / (I * (nf + 0.5));
        e_dual = e_dual.max((e2 - e0[a]).norm());
    }
    // Φ^α(L_μ, T) picks up −½ B δ_μ^α from ½ψ∧θ^α; P_μ^μ = 0 then fixes B.
    let b0 = deb.b.value_or_nan();
    let b2 = (p.trace() + b0 * (0.5 * nf)) / (0.5 * nf);
    let b_dual = (b2 - b0).norm();

    let res = CmResiduals {
        eq_dtheta: eq2.max_abs_base(),
        eq_dtheta_alpha: eq3,
        eq_dphi_theta_slots: eq4,
        phi_ba_extra,
        phi_a_extra,
        s_symmetry,
        s_trace,
        v_trace,
        v_trace_bar,
        p_trace,
        v_cross,
        p_cross,
        s_dual,
        e_dual,
        b_dual,
        s_norm: s.max_abs(),
    };
    let comps = CmComponents {
        s,
        v,
        v_bar,
        p,
        q,
        r_mu,
        r_nubar,
    };
    Ok((res, comps))
}

#[cfg(test)]
mod tests;
