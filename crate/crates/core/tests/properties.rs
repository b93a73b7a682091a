//! Randomized invariants across the pipeline.

use crlab::corpus::{perturbed_sphere, sphere_at, sphere_section, whitney_map};
use crlab::cr::{build_chart, normalize_admissible, AdmissibleCoframe, HypersurfaceSpec};
use crlab::forms::conformal::{flat_combination, traceless_project, traces, CTensor};
use crlab::forms::{curvature_slots, Form1, IndexedTensor, MovingFrame};
use crlab::immersion::{
    adapt_target_frame, codazzi_check, degeneracy_from_sff, ek_spaces, gauss_residuals,
    second_fundamental_form, sff_covariant_derivatives, target_coframe, CRMapSpec,
};
use crlab::jet::{jet_linear_solve, max_abs_all, Jet, JetContext};
use crlab::pseudoconformal::{cm_structure_residuals, deb_coefficients, pulled_back_phi_forms};
use crlab::pseudohermitian::{lee_identity_residual, webster_connection, webster_curvature};
use crlab::qframe::{
    adapted_qframe_along, maurer_cartan, piphi_dictionary_residual, q_gram, validate_q_frame,
    TargetPhi,
};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rc(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn exponents(m: usize, k: usize) -> Vec<Vec<u8>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for e in 0..=k {
        for mut rest in exponents(m - 1, k - e) {
            rest.insert(0, e as u8);
            out.push(rest);
        }
    }
    out
}

fn random_jet(ctx: &JetContext, rng: &mut ChaCha8Rng) -> Jet {
    let terms: Vec<(Vec<u8>, C64)> = exponents(ctx.num_vars(), ctx.max_order())
        .into_iter()
        .map(|e| (e, rc(rng)))
        .collect();
    Jet::from_terms(ctx, &terms).unwrap()
}

fn rel(a: &Jet, b: &Jet) -> f64 {
    (a - b).max_abs() / a.max_abs().max(b.max_abs()).max(1.0)
}

/// A point of the unit sphere in `C^{n+1}` with `|z| ≤ 0.6`.
fn sphere_point(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let z: Vec<C64> = (0..n).map(|_| rc(rng)).collect();
    let s = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let r = rng.gen_range(0.05..0.6);
    z.iter().map(|v| v * (r / s)).collect()
}

fn coframe(spec: &HypersurfaceSpec, k: usize) -> AdmissibleCoframe {
    AdmissibleCoframe::new(&build_chart(spec, k).unwrap()).unwrap()
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| rc(rng)).qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jet_ring_axioms(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = JetContext::new(3, 4);
        let (a, b, d) = (random_jet(&ctx, &mut rng), random_jet(&ctx, &mut rng), random_jet(&ctx, &mut rng));
        prop_assert!(rel(&(&(&a * &b) * &d), &(&a * &(&b * &d))) < 1e-12);
        prop_assert!(rel(&(&a * &(&b + &d)), &(&(&a * &b) + &(&a * &d))) < 1e-12);
        prop_assert!(rel(&(&a * &b), &(&b * &a)) < 1e-12);
    }

    #[test]
    fn partials_commute(seed in any::<u64>(), i in 0usize..3, j in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = JetContext::new(3, 5);
        let a = random_jet(&ctx, &mut rng);
        prop_assert!(rel(&a.partial(i).partial(j), &a.partial(j).partial(i)) < 1e-12);
    }

    #[test]
    fn linear_solve_reproduces_rhs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ctx = JetContext::new(2, 4);
        let n = 3;
        let a: Vec<Vec<Jet>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = random_jet(&ctx, &mut rng);
                        if i == j { v.add_const(c(4.0, 0.0)) } else { v }
                    })
                    .collect()
            })
            .collect();
        let b: Vec<Jet> = (0..n).map(|_| random_jet(&ctx, &mut rng)).collect();
        let x = jet_linear_solve(&a, &b).unwrap();
        for i in 0..n {
            let mut s = Jet::zero(&ctx);
            for j in 0..n {
                s += &a[i][j] * &x[j];
            }
            prop_assert!((&s - &b[i]).max_abs() < 1e-10);
        }
    }

    #[test]
    fn traceless_projection_kills_exactly_the_flat_part(seed in any::<u64>(), n in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::<C64>::identity(n, n);
        let a = DMatrix::from_fn(n, n, |_, _| rc(&mut rng));
        let h = (&a + a.adjoint()) * c(0.5, 0.0);
        let symmetric = |rng: &mut ChaCha8Rng| -> CTensor {
            let q = DMatrix::from_fn(n, n, |_, _| rc(rng));
            let q = (&q + q.transpose()) * c(0.5, 0.0);
            IndexedTensor::from_fn(curvature_slots(), vec![n; 4], |i| q[(i[0], i[2])] * q[(i[1], i[3])].conj())
        };
        let t1 = symmetric(&mut rng);
        let t2 = symmetric(&mut rng);
        let w = rng.gen_range(-2.0..2.0);
        let p1 = traceless_project(&t1, &g).unwrap();
        let p2 = traceless_project(&t2, &g).unwrap();
        // linear
        let lin = traceless_project(&t1.add(&t2.scale(c(w, 0.0))), &g).unwrap();
        prop_assert!(lin.sub(&p1.add(&p2.scale(c(w, 0.0)))).max_abs() < 1e-10);
        // idempotent, trace free
        prop_assert!(traceless_project(&p1, &g).unwrap().sub(&p1).max_abs() < 1e-10);
        prop_assert!(traces(&p1, &g).unwrap().0.iter().all(|z| z.norm() < 1e-10));
        // flat part is annihilated and only it: T − P(T) is flat
        prop_assert!(traceless_project(&flat_combination(&h, &g), &g).unwrap().max_abs() < 1e-10);
        let rest = t1.sub(&p1);
        prop_assert!(traceless_project(&rest, &g).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn exterior_derivative_is_an_antiderivation(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cf = coframe(&sphere_at(&sphere_point(2, &mut rng)), 4);
        let ctx = cf.context().clone();
        let basis = cf.basis().clone();
        let f = random_jet(&ctx, &mut rng);
        let omega = Form1 { c: (0..basis.m()).map(|_| random_jet(&ctx, &mut rng)).collect() };
        let lhs = omega.scale(&f).d(&cf);
        let rhs = Form1::differential(&f, &cf).wedge(&omega, &basis).add(&omega.d(&cf).scale(&f));
        prop_assert!(max_abs_all(&lhs.sub(&rhs).c) < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn chart_invariants_on_perturbed_spheres(seed in any::<u64>(), eps in -0.08f64..0.08) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = sphere_point(2, &mut rng);
        let spec = perturbed_sphere(z[0], z[1], eps);
        let chart = build_chart(&spec, 6).unwrap();
        prop_assert!(max_abs_all([&chart.rho_residual()]) < 1e-10);
        let cf = AdmissibleCoframe::new(&chart).unwrap();
        prop_assert!(cf.duality_residual() < 1e-9);
        prop_assert!(cf.reeb_residual() < 1e-9);
        prop_assert!(cf.levi_residual() < 1e-9);
        prop_assert!(cf.theta_imag() < 1e-9);
        // deterministic down to the bit
        let again = AdmissibleCoframe::new(&build_chart(&spec, 6).unwrap()).unwrap();
        for (x, y) in cf.coframe.iter().flatten().zip(again.coframe.iter().flatten()) {
            prop_assert_eq!(x.coeffs(), y.coeffs());
        }
    }

    #[test]
    fn gram_schmidt_ignores_triangular_mixing(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chart = build_chart(&sphere_at(&sphere_point(2, &mut rng)), 4).unwrap();
        let raw = chart.raw_cr_frame().unwrap();
        let contact = chart.contact_from_rho();
        let a = normalize_admissible(&chart, &raw, &contact).unwrap();
        let k = rc(&mut rng);
        let mut mixed = raw.clone();
        for v in 0..mixed.chart[1].len() {
            mixed.chart[1][v].axpy(k, &raw.chart[0][v]);
        }
        for v in 0..mixed.ambient[1].len() {
            mixed.ambient[1][v].axpy(k, &raw.ambient[0][v]);
        }
        let b = normalize_admissible(&chart, &mixed, &contact).unwrap();
        for (x, y) in a.frame.iter().flatten().zip(b.frame.iter().flatten()) {
            prop_assert!((x - y).max_abs() < 1e-10);
        }
    }

    #[test]
    fn webster_and_chern_moser_identities(seed in any::<u64>(), eps in -0.08f64..0.08) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = sphere_point(2, &mut rng);
        let cf = coframe(&perturbed_sphere(z[0], z[1], eps), 6);
        let conn = webster_connection(&cf).unwrap();
        prop_assert!(conn.structure_residual(&cf) < 1e-9);
        let pack = webster_curvature(&conn, &cf).unwrap();
        let (l1, l2) = lee_identity_residual(&pack, &conn, &cf).unwrap();
        prop_assert!(l1 < 1e-8 && l2 < 1e-8);
        let deb = deb_coefficients(&pack, &conn, &cf).unwrap();
        let phi = pulled_back_phi_forms(&conn, &deb, &cf.basis, &cf.ctx);
        let (r, _) = cm_structure_residuals(&phi, &pack, &deb, &cf).unwrap();
        prop_assert!(r.s_dual < 1e-7);
        prop_assert!(r.v_trace < 1e-8 && r.p_trace < 1e-8);
        for a in 0..2 {
            for b in 0..2 {
                let dab = deb.d[a][b].value_or_nan();
                let dba = deb.d[b][a].value_or_nan();
                // D is i times a Hermitian matrix
                prop_assert!((dab + dba.conj()).norm() < 1e-10);
            }
        }
        prop_assert!(deb.b.value_or_nan().im.abs() < 1e-10);
    }
}

fn rotated_whitney(rng: &mut ChaCha8Rng) -> CRMapSpec {
    whitney_map(sphere_at(&sphere_point(2, rng))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn immersion_dual_routes_on_whitney(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = rotated_whitney(&mut rng);
        let cf = coframe(&map.source, 6);
        let target = target_coframe(&map, &cf).unwrap();
        let adapted = adapt_target_frame(&map, &cf, &target).unwrap();
        let mut sff = second_fundamental_form(&map, &cf, &adapted).unwrap();
        prop_assert!(sff.route_difference < 1e-8);
        let pack = webster_curvature(&adapted.source_conn, &cf).unwrap();
        let g = gauss_residuals(&sff, &pack, &adapted).unwrap();
        prop_assert!(g.pseudohermitian < 1e-8 && g.expanded < 1e-7);
        prop_assert!(codazzi_check(&sff, &cf, &adapted).unwrap().residual < 1e-7);
        let ek = ek_spaces(&map, &cf, 3).unwrap();
        sff_covariant_derivatives(&mut sff, &cf, &adapted, 3).unwrap();
        prop_assert_eq!(ek.dims, degeneracy_from_sff(&sff, 3).dims);
    }

    #[test]
    fn unitary_rotation_keeps_residuals(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = rotated_whitney(&mut rng);
        let cf = coframe(&map.source, 6);
        let u = random_unitary(2, &mut rng);
        let residuals = |cf: &AdmissibleCoframe| {
            let target = target_coframe(&map, cf).unwrap();
            let adapted = adapt_target_frame(&map, cf, &target).unwrap();
            let sff = second_fundamental_form(&map, cf, &adapted).unwrap();
            let pack = webster_curvature(&adapted.source_conn, cf).unwrap();
            let g = gauss_residuals(&sff, &pack, &adapted).unwrap();
            let cz = codazzi_check(&sff, cf, &adapted).unwrap();
            vec![
                adapted.residuals.max(),
                sff.route_difference,
                sff.omega.at_base().data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
                g.pseudohermitian,
                g.expanded,
                cz.residual,
                cz.dhat_dual,
            ]
        };
        let a = residuals(&cf);
        let b = residuals(&cf.rotated(&u).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y);
        }
    }

    #[test]
    fn q_frames_on_sphere_sections(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = sphere_section(sphere_at(&sphere_point(2, &mut rng)), 1).unwrap();
        let cf = coframe(&map.source, 5);
        let target = target_coframe(&map, &cf).unwrap();
        let adapted = adapt_target_frame(&map, &cf, &target).unwrap();
        let frame = adapted_qframe_along(&map, &cf, &adapted).unwrap();
        prop_assert!(frame.jet_residual().unwrap() < 1e-9);
        prop_assert!(validate_q_frame(&frame.at_base()).unwrap() < 1e-9);
        let mc = maurer_cartan(&frame, &cf).unwrap();
        prop_assert!(mc.flatness_residual(&cf) < 1e-8);
        let d = piphi_dictionary_residual(&mc, &TargetPhi::direct(&adapted, &cf).unwrap(), &cf);
        prop_assert!(d.coframe_max() < 1e-9);
    }

    #[test]
    fn group_orbit_stays_a_q_frame(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = 5;
        let h = q_gram(size).transpose();
        let k = DMatrix::from_fn(size, size, |_, _| rc(&mut rng) * 0.5);
        let k = &k - k.adjoint();
        let mut x = h.try_inverse().unwrap() * k;
        let tr = x.trace() / size as f64;
        for i in 0..size {
            x[(i, i)] -= tr;
        }
        prop_assert!(validate_q_frame(&x.exp()).unwrap() < 1e-9);
    }
}
