use super::*;
use crate::cr::{build_chart, AdmissibleCoframe, HypersurfaceSpec};
use crate::pseudohermitian::{webster_connection, webster_curvature};
use crate::testutil::*;

struct Run {
    cf: AdmissibleCoframe,
    pack: CurvaturePack,
    deb: Deb,
    phi: PhiForms,
    res: CmResiduals,
    comps: CmComponents,
}

fn run(spec: &HypersurfaceSpec, k: usize) -> Run {
    let chart = build_chart(spec, k).unwrap();
    let cf = AdmissibleCoframe::new(&chart).unwrap();
    let conn = webster_connection(&cf).unwrap();
    let pack = webster_curvature(&conn, &cf).unwrap();
    let deb = deb_coefficients(&pack, &conn, &cf).unwrap();
    let phi = pulled_back_phi_forms(&conn, &deb, &cf.basis, &cf.ctx);
    let (res, comps) = cm_structure_residuals(&phi, &pack, &deb, &cf).unwrap();
    Run {
        cf,
        pack,
        deb,
        phi,
        res,
        comps,
    }
}

fn all_small(r: &CmResiduals, tol: f64) {
    let fields = [
        ("eq_dtheta", r.eq_dtheta),
        ("eq_dtheta_alpha", r.eq_dtheta_alpha),
        ("eq_dphi_theta_slots", r.eq_dphi_theta_slots),
        ("phi_ba_extra", r.phi_ba_extra),
        ("phi_a_extra", r.phi_a_extra),
        ("s_symmetry", r.s_symmetry),
        ("s_trace", r.s_trace),
        ("v_trace", r.v_trace),
        ("v_trace_bar", r.v_trace_bar),
        ("p_trace", r.p_trace),
        ("v_cross", r.v_cross),
        ("p_cross", r.p_cross),
        ("s_dual", r.s_dual),
        ("e_dual", r.e_dual),
        ("b_dual", r.b_dual),
    ];
    for (name, v) in fields {
        assert!(v < tol, "{name} = {v:e}");
    }
}

#[test]
fn heisenberg_report_vanishes() {
    let r = run(&heisenberg(), 6);
    assert!(r.deb.d[0][0].max_abs() < 1e-12);
    assert!(r.deb.e[0].max_abs() < 1e-12);
    assert!(r.deb.b.max_abs() < 1e-12);
    assert!(r.phi.phi_a[0].max_abs_base() < 1e-12 && r.phi.psi.max_abs_base() < 1e-12);
    all_small(&r.res, 1e-12);
    assert!(r.res.s_norm < 1e-12);
}

#[test]
fn sphere_is_spherical() {
    let spec = sphere_at(&[c(0.3, -0.2), c(0.1, 0.4)]);
    let r = run(&spec, 6);
    assert!(chern_moser_tensor(&r.pack).unwrap().max_abs() < 1e-8);
    assert!(r.phi.skew_residual(&r.cf.basis) < 1e-10);
    all_small(&r.res, 1e-8);
    assert!(r.res.s_norm < 1e-8);
    for e in &r.deb.e {
        assert!(e.value().unwrap().norm() < 1e-9);
    }
    // D is a multiple of δ with the same constant at another point
    let d0 = r.deb.d[0][0].value().unwrap();
    assert!((r.deb.d[0][1].value().unwrap()).norm() < 1e-9);
    assert!((r.deb.d[1][1].value().unwrap() - d0).norm() < 1e-9);
    let other = run(&sphere_at(&[c(-0.5, 0.1), c(0.2, 0.0)]), 5);
    assert!((other.deb.d[0][0].value().unwrap() - d0).norm() < 1e-9);
    assert!(d0.norm() > 1e-3);
}

#[test]
fn perturbed_sphere_dual_routes_agree() {
    let r = run(&perturbed_sphere(c(0.3, 0.2), c(-0.25, 0.35)), 6);
    eprintln!("{:#?}", r.res);
    all_small(&r.res, 1e-7);
    assert!(r.res.s_norm > 1e-4);
    let (h, _) =
        crate::forms::conformal::conformal_flat_decompose(&r.pack.r.at_base(), &identity(2))
            .unwrap();
    assert!(h.iter().any(|z| z.norm() > 1e-3));
    for a in 0..2 {
        for b in 0..2 {
            let d = r.deb.d[a][b].value().unwrap() + r.deb.d[b][a].value().unwrap().conj();
            assert!(d.norm() < 1e-10);
        }
    }
    assert!(r.deb.b.value().unwrap().im.abs() < 1e-8);
    assert!(r.deb.e.iter().any(|e| e.value().unwrap().norm() > 1e-5));
    let _ = &r.comps;
}
