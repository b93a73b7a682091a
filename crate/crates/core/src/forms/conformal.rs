//! Traceless projection of curvature-type tensors `T_{αβ̄μν̄}` against a Hermitian metric.

use super::tensor::{curvature_slots, IndexedTensor};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CTensor = IndexedTensor<C64>;

/// Largest violation of `T_{αβ̄μν̄} = T_{μβ̄αν̄} = T_{μν̄αβ̄} = conj(T_{βᾱνμ̄})`.
pub fn symmetry_defect(t: &CTensor) -> f64 {
    let mut r: f64 = 0.0;
    for i in t.indices() {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        let v = *t.get(&i);
        r = r
            .max((v - t.get(&[c, b, a, d])).norm())
            .max((v - t.get(&[c, d, a, b])).norm())
            .max((v - t.get(&[b, a, d, c]).conj()).norm());
    }
    r
}

fn check(t: &CTensor, g: &DMatrix<C64>) -> Result<usize> {
    let n = g.nrows();
    if t.rank() != 4 || t.dims.iter().any(|&d| d != n) || g.ncols() != n {
        return Err(Error::Invalid("tensor and metric dimensions differ".into()));
    }
    let s = symmetry_defect(t);
    let scale = t.max_abs().max(1.0);
    if s.is_nan() || s > 1e-9 * scale {
        return Err(Error::Symmetry(s));
    }
    Ok(n)
}

/// `g^{αβ̄}` arranged so that `Σ_β g_{αβ̄} g^{γβ̄} = δ_α^γ`.
fn inverse_metric(g: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    g.clone()
        .try_inverse()
        .map(|m| m.transpose())
        .ok_or(Error::Singular(f64::INFINITY))
}

/// Ricci-type trace `T_μ^μ_{αβ̄}` and its full trace.
pub fn traces(t: &CTensor, g: &DMatrix<C64>) -> Result<(DMatrix<C64>, C64)> {
    let n = g.nrows();
    let h = inverse_metric(g)?;
    let ric = DMatrix::from_fn(n, n, |a, b| {
        let mut s = C64::new(0.0, 0.0);
        for m in 0..n {
            for v in 0..n {
                s += h[(m, v)] * t.get(&[m, v, a, b]);
            }
        }
        s
    });
    let mut r = C64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            r += h[(a, b)] * ric[(a, b)];
        }
    }
    Ok((ric, r))
}

/// `H_{αβ̄}g_{μν̄} + H_{μβ̄}g_{αν̄} + H_{αν̄}g_{μβ̄} + H_{μν̄}g_{αβ̄}`.
pub fn flat_combination(h: &DMatrix<C64>, g: &DMatrix<C64>) -> CTensor {
    let n = g.nrows();
    IndexedTensor::from_fn(curvature_slots(), vec![n; 4], |i| {
        let (a, b, m, v) = (i[0], i[1], i[2], i[3]);
        h[(a, b)] * g[(m, v)]
            + h[(m, b)] * g[(a, v)]
            + h[(a, v)] * g[(m, b)]
            + h[(m, v)] * g[(a, b)]
    })
}

/// The trace-free part of `T`.
pub fn traceless_project(t: &CTensor, g: &DMatrix<C64>) -> Result<CTensor> {
    let n = check(t, g)?;
    let (ric, r) = traces(t, g)?;
    let nf = n as f64;
    let c1 = 1.0 / (nf + 2.0);
    let c2 = r / ((nf + 1.0) * (nf + 2.0));
    Ok(IndexedTensor::from_fn(curvature_slots(), vec![n; 4], |i| {
        let (a, b, m, v) = (i[0], i[1], i[2], i[3]);
        let rg = ric[(a, b)] * g[(m, v)]
            + ric[(m, b)] * g[(a, v)]
            + ric[(a, v)] * g[(m, b)]
            + ric[(m, v)] * g[(a, b)];
        let gg = g[(a, b)] * g[(m, v)] + g[(a, v)] * g[(m, b)];
        t.get(i) - rg * c1 + gg * c2
    }))
}

/// Split `T = flat_combination(H, g) + residual` with `residual` trace-free.
pub fn conformal_flat_decompose(t: &CTensor, g: &DMatrix<C64>) -> Result<(DMatrix<C64>, CTensor)> {
    let n = check(t, g)?;
    let (ric, r) = traces(t, g)?;
    let nf = n as f64;
    let h = (ric - g * (r / (2.0 * (nf + 1.0)))) / C64::new(nf + 2.0, 0.0);
    let residual = t.sub(&flat_combination(&h, g));
    Ok((h, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        let a = DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        (&a + a.adjoint()) * C64::new(0.5, 0.0)
    }

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> CTensor {
        // Σ_k q^k_{αμ} conj(q^k_{βν}) with q^k symmetric has every required symmetry
        let mut t = IndexedTensor::filled(curvature_slots(), vec![n; 4], C64::new(0.0, 0.0));
        for _ in 0..3 {
            let q = DMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let q = (&q + q.transpose()) * C64::new(0.5, 0.0);
            let w = rng.gen_range(-1.0..1.0);
            for i in t.indices() {
                let v = q[(i[0], i[2])] * q[(i[1], i[3])].conj() * w;
                let o = t.offset(&i);
                t.data[o] += v;
            }
        }
        t
    }

    #[test]
    fn levi_multiples_project_to_zero() {
        let g = DMatrix::<C64>::identity(3, 3);
        let t = flat_combination(&(g.clone() * C64::new(0.5, 0.0)), &g);
        assert!(traceless_project(&t, &g).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn projection_is_idempotent_and_trace_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = DMatrix::<C64>::identity(3, 3);
        let t = random_symmetric(3, &mut rng);
        let s = traceless_project(&t, &g).unwrap();
        let (ric, _) = traces(&s, &g).unwrap();
        assert!(ric.iter().all(|z| z.norm() < 1e-10));
        assert!(traceless_project(&s, &g).unwrap().sub(&s).max_abs() < 1e-10);
    }

    #[test]
    fn decomposition_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DMatrix::from_fn(2, 2, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let g = &a * a.adjoint() + DMatrix::identity(2, 2);
        let h0 = random_hermitian(2, &mut rng);
        let free = traceless_project(&random_symmetric(2, &mut rng), &g).unwrap();
        let t = flat_combination(&h0, &g).add(&free);
        let (h, res) = conformal_flat_decompose(&t, &g).unwrap();
        assert!((h - h0).iter().all(|z| z.norm() < 1e-10));
        assert!(res.sub(&free).max_abs() < 1e-10);
    }

    #[test]
    fn trace_free_input_has_zero_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = DMatrix::<C64>::identity(3, 3);
        let s = traceless_project(&random_symmetric(3, &mut rng), &g).unwrap();
        let (h, _) = conformal_flat_decompose(&s, &g).unwrap();
        assert!(h.iter().all(|z| z.norm() < 1e-10));
        assert!(traceless_project(&s, &g).unwrap().sub(&s).max_abs() < 1e-10);
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let g = DMatrix::<C64>::identity(2, 2);
        let mut t = IndexedTensor::filled(curvature_slots(), vec![2; 4], C64::new(0.0, 0.0));
        t.set(&[0, 1, 1, 1], C64::new(1.0, 0.0));
        assert!(matches!(traceless_project(&t, &g), Err(Error::Symmetry(_))));
    }
}
