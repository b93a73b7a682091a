use super::*;
use crate::cr::{build_chart, AdmissibleCoframe, HypersurfaceSpec};
use crate::jet::max_abs_all;
use crate::testutil::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(spec: &HypersurfaceSpec, k: usize) -> (AdmissibleCoframe, ConnectionData) {
    let chart = build_chart(spec, k).unwrap();
    let cf = AdmissibleCoframe::new(&chart).unwrap();
    let conn = webster_connection(&cf).unwrap();
    (cf, conn)
}

#[test]
fn heisenberg_is_flat_and_torsion_free() {
    let (cf, conn) = setup(&heisenberg(), 5);
    assert!(conn.structure_residual(&cf) < 1e-12);
    assert!(conn.skew_residual() < 1e-12);
    assert!(max_abs_all(&conn.torsion[0]) < 1e-12);
    assert!(conn.omega[0][0].max_abs_base() < 1e-12);
    let pack = webster_curvature(&conn, &cf).unwrap();
    assert!(pack.r.at_base().max_abs() < 1e-12);
    assert!(pack.decomposition_residual < 1e-12);
    let (a, b) = lee_identity_residual(&pack, &conn, &cf).unwrap();
    assert!(a < 1e-12 && b < 1e-12);
}

#[test]
fn sphere_is_torsion_free() {
    let (cf, conn) = setup(&sphere_at(&[c(0.3, -0.2), c(0.1, 0.4)]), 5);
    assert!(conn.structure_residual(&cf) < 1e-9);
    assert!(conn.skew_residual() < 1e-9);
    for row in &conn.torsion {
        assert!(max_abs_all(row) < 1e-10);
    }
    let pack = webster_curvature(&conn, &cf).unwrap();
    assert!(pack.decomposition_residual < 1e-8);
    assert!(pack.w.at_base().max_abs() < 1e-9);
    assert!(pack.w_bar.at_base().max_abs() < 1e-9);
    let (a, b) = lee_identity_residual(&pack, &conn, &cf).unwrap();
    assert!(a < 1e-9 && b < 1e-9);
}

#[test]
fn perturbed_sphere_satisfies_lee_identity() {
    let (cf, conn) = setup(&perturbed_sphere(c(0.3, 0.2), c(-0.25, 0.35)), 6);
    assert!(conn.structure_residual(&cf) < 1e-9);
    assert!(conn.skew_residual() < 1e-9);
    assert!(conn.torsion_symmetry_residual() < 1e-9);
    let pack = webster_curvature(&conn, &cf).unwrap();
    assert!(pack.decomposition_residual < 1e-8);
    assert!(pack.r.at_base().max_abs() > 1e-3);
    assert!(pack.w.at_base().max_abs() > 1e-4);
    assert!(pack.w_bar.at_base().max_abs() > 1e-4);
    let (a, b) = lee_identity_residual(&pack, &conn, &cf).unwrap();
    assert!(a < 1e-8 && b < 1e-8, "{a} {b}");
}

#[test]
fn curvature_has_hermitian_pair_symmetry() {
    let (cf, conn) = setup(&perturbed_sphere(c(0.3, 0.2), c(-0.25, 0.35)), 5);
    let r = webster_curvature(&conn, &cf).unwrap().r.at_base();
    for i in r.indices() {
        let d = r.get(&i) - r.get(&[i[1], i[0], i[3], i[2]]).conj();
        assert!(d.norm() < 1e-9);
    }
}

#[test]
fn unitary_rotation_conjugates_the_connection() {
    let (cf, conn) = setup(&sphere_at(&[c(0.2, 0.1), c(-0.3, 0.2)]), 4);
    let t = 0.7f64;
    let ph = C64::from_polar(1.0, 0.4);
    let u = DMatrix::from_row_slice(
        2,
        2,
        &[
            c(t.cos(), 0.0),
            ph * t.sin(),
            -ph.conj() * t.sin(),
            c(t.cos(), 0.0),
        ],
    );
    let cf2 = cf.rotated(&u).unwrap();
    let conn2 = webster_connection(&cf2).unwrap();
    assert!(conn2.structure_residual(&cf2) < 1e-9);
    // constant u: ω' = u ω u⁻¹ evaluated on frames related by the same u
    let ui = u.adjoint();
    let basis = &cf.basis;
    for c_new in 0..basis.m() {
        // e'_c in terms of e_c
        let coeffs: Vec<(usize, C64)> = if c_new == 0 {
            vec![(0, c(1.0, 0.0))]
        } else if c_new <= 2 {
            (0..2).map(|b| (basis.l(b), u[(c_new - 1, b)])).collect()
        } else {
            (0..2)
                .map(|b| (basis.lbar(b), u[(c_new - 3, b)].conj()))
                .collect()
        };
        for a in 0..2 {
            for b in 0..2 {
                let mut want = c(0.0, 0.0);
                for p in 0..2 {
                    for q in 0..2 {
                        let mut w = c(0.0, 0.0);
                        for &(k, s) in &coeffs {
                            w += s * conn.omega[p][q].c[k].value().unwrap();
                        }
                        want += u[(a, p)] * w * ui[(q, b)];
                    }
                }
                let got = conn2.omega[a][b].c[c_new].value().unwrap();
                assert!((got - want).norm() < 1e-9);
            }
        }
    }
}

#[test]
fn metric_is_parallel() {
    let (cf, conn) = setup(&perturbed_sphere(c(0.1, -0.3), c(0.2, 0.2)), 4);
    let g = IndexedTensor::from_fn(
        vec![Slot::down(SlotKind::Unbarred), Slot::down(SlotKind::Barred)],
        vec![2, 2],
        |i| Jet::real(&cf.ctx, if i[0] == i[1] { 1.0 } else { 0.0 }),
    );
    let dg = covariant_derivative(&g, &conn, &cf).unwrap();
    assert!(dg.at_base().max_abs() < 1e-10);
}

#[test]
fn scalar_derivative_is_the_differential() {
    let (cf, conn) = setup(&sphere_at(&[c(0.2, 0.1), c(-0.3, 0.2)]), 3);
    let f = &Jet::var(&cf.ctx, 0) * &Jet::var(&cf.ctx, 3);
    let t = IndexedTensor::from_fn(vec![], vec![], |_| f.clone());
    let d = covariant_derivative(&t, &conn, &cf).unwrap();
    let df = Form1::differential(&f, &cf);
    for (a, b) in d.data.iter().zip(&df.c) {
        assert!((a - b).max_abs() < 1e-14);
    }
}

#[test]
fn covariant_derivative_obeys_leibniz() {
    let (cf, conn) = setup(&perturbed_sphere(c(0.1, -0.3), c(0.2, 0.2)), 4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ctx = cf.ctx.clone();
    let mut random_jet = || {
        let mut j = Jet::constant(&ctx, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        for v in 0..ctx.num_vars() {
            j += Jet::var(&ctx, v).scale(c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
        j
    };
    let s = IndexedTensor::from_fn(vec![Slot::up(SlotKind::Unbarred)], vec![2], |_| {
        random_jet()
    });
    let t = IndexedTensor::from_fn(
        vec![Slot::down(SlotKind::Barred), Slot::down(SlotKind::Unbarred)],
        vec![2, 2],
        |_| random_jet(),
    );
    let st = IndexedTensor::from_fn(
        vec![
            Slot::up(SlotKind::Unbarred),
            Slot::down(SlotKind::Barred),
            Slot::down(SlotKind::Unbarred),
        ],
        vec![2, 2, 2],
        |i| s.get(&i[..1]) * t.get(&i[1..]),
    );
    let ds = covariant_derivative(&s, &conn, &cf).unwrap();
    let dt = covariant_derivative(&t, &conn, &cf).unwrap();
    let dst = covariant_derivative(&st, &conn, &cf).unwrap();
    for i in dst.indices() {
        let (a, b, g, d) = (i[0], i[1], i[2], i[3]);
        let want = ds.get(&[a, d]) * t.get(&[b, g]) + s.get(&[a]) * dt.get(&[b, g, d]);
        assert!(max_abs_base([&(dst.get(&i) - &want)]) < 1e-9);
    }
}

#[test]
fn rank_is_full() {
    let (_, conn) = setup(&heisenberg(), 2);
    assert_eq!(conn.rank, 2 * (3 + 1));
    assert!(conn.rank_margin > 1e-3);
}
