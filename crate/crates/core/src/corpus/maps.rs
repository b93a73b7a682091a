//! Built-in hypersurfaces and CR maps into spheres.

use crate::cr::HypersurfaceSpec;
use crate::error::Result;
use crate::immersion::CRMapSpec;
use crate::jet::PolynomialSpec;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn unit(k: usize, len: usize) -> Vec<u32> {
    let mut e = vec![0; len];
    e[k] = 1;
    e
}

/// `|z|² − Im w` in `C^{n+1}` at the origin.
pub fn heisenberg(n: usize) -> HypersurfaceSpec {
    let nn = n + 1;
    let zero = vec![0; nn];
    let mut rho = PolynomialSpec::new(nn)
        .term(c(0.0, 0.5), &unit(n, nn), &zero)
        .term(c(0.0, -0.5), &zero, &unit(n, nn));
    for k in 0..n {
        rho.add_term(c(1.0, 0.0), &unit(k, nn), &unit(k, nn));
    }
    HypersurfaceSpec::new(rho, vec![c(0.0, 0.0); nn])
}

/// Unit sphere at `(z, w)` with `w = √(1 − |z|²)` real.
pub fn sphere_at(z: &[C64]) -> HypersurfaceSpec {
    let mut base = z.to_vec();
    let s: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    base.push(c((1.0 - s).sqrt(), 0.0));
    HypersurfaceSpec::new(PolynomialSpec::sphere(base.len(), 1.0), base)
}

/// `|z₁|² + |z₂|² + |w|² + ε(z₁²z̄₂² + z̄₁²z₂²) = 1` at the point over `(z₁, z₂)`.
pub fn perturbed_sphere(z1: C64, z2: C64, eps: f64) -> HypersurfaceSpec {
    let rho = PolynomialSpec::sphere(3, 1.0)
        .term(c(eps, 0.0), &[2, 0, 0], &[0, 2, 0])
        .term(c(eps, 0.0), &[0, 2, 0], &[2, 0, 0]);
    let q = z1.norm_sqr() + z2.norm_sqr() + 2.0 * eps * (z1 * z1 * (z2 * z2).conj()).re;
    HypersurfaceSpec::new(rho, vec![z1, z2, c((1.0 - q).sqrt(), 0.0)])
}

/// Components `Σ_k a_{jk} Z_k` of a linear map.
fn linear_components(a: &[Vec<C64>], nn: usize) -> Vec<PolynomialSpec> {
    a.iter()
        .map(|row| {
            let mut p = PolynomialSpec::new(nn);
            for (k, &v) in row.iter().enumerate() {
                if v != c(0.0, 0.0) {
                    p.add_term(v, &unit(k, nn), &vec![0; nn]);
                }
            }
            p
        })
        .collect()
}

/// `z ↦ (z, 0, …, 0)` from the unit sphere in `C^{n+1}` into the one in `C^{n+d+1}`.
pub fn linear_embedding(source: HypersurfaceSpec, d: usize) -> Result<CRMapSpec> {
    let nn = source.ambient_complex_dim;
    let a: Vec<Vec<C64>> = (0..nn + d)
        .map(|j| {
            (0..nn)
                .map(|k| c(if j == k { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    CRMapSpec::into_sphere(source, linear_components(&a, nn))
}

/// A linear isometry `C^{n+1} → C^{n+d+1}` mixing every target coordinate.
pub fn sphere_section(source: HypersurfaceSpec, d: usize) -> Result<CRMapSpec> {
    let nn = source.ambient_complex_dim;
    let m = nn + d;
    // unitary factor of a seeded random matrix
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = nalgebra::DMatrix::from_fn(m, m, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let u = g.qr().q();
    let a: Vec<Vec<C64>> = (0..m)
        .map(|j| (0..nn).map(|k| u[(j, k)]).collect())
        .collect();
    CRMapSpec::into_sphere(source, linear_components(&a, nn))
}

/// `(z₁,…,z_n, z₁z_{n+1},…,z_nz_{n+1}, z_{n+1}²)` from the unit sphere in `C^{n+1}`.
pub fn whitney_map(source: HypersurfaceSpec) -> Result<CRMapSpec> {
    let nn = source.ambient_complex_dim;
    let n = nn - 1;
    let zero = vec![0; nn];
    let mut comps = Vec::with_capacity(2 * n + 1);
    for k in 0..n {
        comps.push(PolynomialSpec::new(nn).term(c(1.0, 0.0), &unit(k, nn), &zero));
    }
    for k in 0..n {
        let mut e = unit(k, nn);
        e[n] = 1;
        comps.push(PolynomialSpec::new(nn).term(c(1.0, 0.0), &e, &zero));
    }
    let mut e = vec![0; nn];
    e[n] = 2;
    comps.push(PolynomialSpec::new(nn).term(c(1.0, 0.0), &e, &zero));
    CRMapSpec::into_sphere(source, comps)
}

/// The Whitney map at `(1/√2, 0, …, 0, 1/√2)`.
pub fn whitney_at_default(n: usize) -> Result<CRMapSpec> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut z = vec![c(0.0, 0.0); n];
    z[0] = c(s, 0.0);
    whitney_map(sphere_at(&z))
}
