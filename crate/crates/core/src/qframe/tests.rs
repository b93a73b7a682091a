use super::*;
use crate::corpus::{linear_embedding, sphere_at, whitney_at_default};
use crate::cr::build_chart;
use crate::immersion::{
    adapt_target_frame, codazzi_check, induced_connection_coefficients, second_fundamental_form,
    target_coframe,
};
use crate::pseudoconformal::{cm_structure_residuals, pulled_back_phi_forms};
use crate::pseudohermitian::webster_curvature;
use crate::testutil::c;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn e(size: usize, k: usize) -> Vec<C64> {
    let mut v = vec![c(0.0, 0.0); size];
    v[k] = c(1.0, 0.0);
    v
}

#[test]
fn q_inner_on_unit_vectors() {
    let s = 5;
    assert_eq!(q_inner(&e(s, 0), &e(s, 0)).unwrap(), c(0.0, 0.0));
    assert_eq!(q_inner(&e(s, s - 1), &e(s, 0)).unwrap(), c(0.0, 0.5));
    assert_eq!(q_inner(&e(s, 2), &e(s, 2)).unwrap(), c(1.0, 0.0));
    assert!(q_inner(&e(s, 0), &e(4, 0)).is_err());
}

#[test]
fn identity_is_a_q_frame() {
    let id = DMatrix::<C64>::identity(5, 5);
    assert_eq!(validate_q_frame(&id).unwrap(), 0.0);
    let mut scaled = id.clone();
    scaled[(0, 0)] = c(2.0, 0.0);
    assert!((validate_q_frame(&scaled).unwrap() - 1.0).abs() < 1e-15);
}

/// `exp X` with `X*H + HX = 0`, trace free, where `(ζ, τ) = τ* H ζ`.
fn random_su(size: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = q_gram(size).transpose();
    let mut k = DMatrix::from_fn(size, size, |_, _| {
        c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
    });
    k = &k - k.adjoint();
    let mut x = h.clone().try_inverse().unwrap() * k;
    let tr = x.trace() / size as f64;
    for i in 0..size {
        x[(i, i)] -= tr;
    }
    x.exp()
}

#[test]
fn group_orbit_of_identity_is_a_q_frame() {
    for seed in 0..5 {
        let g = random_su(5, seed);
        assert!(validate_q_frame(&g).unwrap() < 1e-10);
    }
}

#[test]
fn constant_frame_has_zero_maurer_cartan_forms() {
    let chart = build_chart(&sphere_at(&[c(0.2, 0.1), c(-0.3, 0.2)]), 3).unwrap();
    let cf = AdmissibleCoframe::new(&chart).unwrap();
    let g = random_su(5, 11);
    let frame = QFrameField {
        z: (0..5)
            .map(|col| {
                (0..5)
                    .map(|i| Jet::constant(&cf.ctx, g[(i, col)]))
                    .collect()
            })
            .collect(),
    };
    assert!(frame.jet_residual().unwrap() < 1e-10);
    let mc = maurer_cartan(&frame, &cf).unwrap();
    assert!(mc.pi.iter().flatten().all(|f| max_abs_all(&f.c) == 0.0));
}

struct Pipeline {
    cf: AdmissibleCoframe,
    frame: QFrameField,
    mc: MaurerCartan,
    direct: TargetPhi,
    chain: TargetPhi,
}

fn pipeline(map: &CRMapSpec, k: usize) -> Pipeline {
    let chart = build_chart(&map.source, k).unwrap();
    let cf = AdmissibleCoframe::new(&chart).unwrap();
    let target = target_coframe(map, &cf).unwrap();
    let adapted = adapt_target_frame(map, &cf, &target).unwrap();
    let sff = second_fundamental_form(map, &cf, &adapted).unwrap();
    let codazzi = codazzi_check(&sff, &cf, &adapted).unwrap();
    let conn = &adapted.source_conn;
    let pack = webster_curvature(conn, &cf).unwrap();
    let deb = deb_coefficients(&pack, conn, &cf).unwrap();
    let phi = pulled_back_phi_forms(conn, &deb, &cf.basis, &cf.ctx);
    let (_, comps) = cm_structure_residuals(&phi, &pack, &deb, &cf).unwrap();
    let induced =
        induced_connection_coefficients(&sff, &cf, &deb, &comps, &adapted, &codazzi).unwrap();
    let frame = adapted_qframe_along(map, &cf, &adapted).unwrap();
    let mc = maurer_cartan(&frame, &cf).unwrap();
    let direct = TargetPhi::direct(&adapted, &cf).unwrap();
    let chain = TargetPhi::from_induced(&phi, &induced, &sff, &codazzi, &cf).unwrap();
    Pipeline {
        cf,
        frame,
        mc,
        direct,
        chain,
    }
}

#[test]
fn linear_embedding_frame_and_dictionary() {
    let map = linear_embedding(sphere_at(&[c(0.3, -0.2), c(0.1, 0.4)]), 1).unwrap();
    let p = pipeline(&map, 6);
    assert!(p.frame.jet_residual().unwrap() < 1e-9);
    assert!(p.frame.adaptedness_residual(&map, &p.cf).unwrap() < 1e-9);
    assert!(validate_q_frame(&p.frame.at_base()).unwrap() < 1e-9);
    assert!(p.mc.flatness_residual(&p.cf) < 1e-8);
    assert!(p.mc.su_residual(&p.cf.basis) < 1e-9);
    let d = piphi_dictionary_residual(&p.mc, &p.direct, &p.cf);
    eprintln!("direct {d:?}");
    assert!(d.coframe_max() < 1e-9);
    assert!(d.trace.unwrap() < 1e-8);
    assert!(d.max() < 1e-8);
    let ch = piphi_dictionary_residual(&p.mc, &p.chain, &p.cf);
    eprintln!("chain {ch:?}");
    assert!(ch.trace.is_none());
    assert!(ch.max() < 1e-8);
}

#[test]
fn whitney_frame_and_dictionary() {
    let map = whitney_at_default(2).unwrap();
    let p = pipeline(&map, 6);
    assert!(p.frame.jet_residual().unwrap() < 1e-9);
    assert!(p.mc.flatness_residual(&p.cf) < 1e-8);
    assert!(p.mc.su_residual(&p.cf.basis) < 1e-9);
    let d = piphi_dictionary_residual(&p.mc, &p.direct, &p.cf);
    eprintln!("direct {d:?}");
    assert!(d.coframe_max() < 1e-8);
    assert!(d.max() < 1e-8);
    let ch = piphi_dictionary_residual(&p.mc, &p.chain, &p.cf);
    eprintln!("chain {ch:?}");
    assert!(ch.max() < 1e-8);
}
