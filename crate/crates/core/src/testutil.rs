//! Surfaces shared by unit tests.

use crate::cr::HypersurfaceSpec;
use crate::jet::PolynomialSpec;
use num_complex::Complex64 as C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `|z|² − Im w` at the origin.
pub fn heisenberg() -> HypersurfaceSpec {
    let rho = PolynomialSpec::new(2)
        .term(c(0.0, 0.5), &[0, 1], &[0, 0])
        .term(c(0.0, -0.5), &[0, 0], &[0, 1])
        .term(c(1.0, 0.0), &[1, 0], &[1, 0]);
    HypersurfaceSpec::new(rho, vec![c(0.0, 0.0); 2])
}

/// Unit sphere at the point `(z, w)` with `w > 0` real.
pub fn sphere_at(z: &[C64]) -> HypersurfaceSpec {
    let mut base = z.to_vec();
    let s: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    base.push(c((1.0 - s).sqrt(), 0.0));
    HypersurfaceSpec::new(PolynomialSpec::sphere(base.len(), 1.0), base)
}

/// `|z₁|²+|z₂|²+|w|²+0.1 Re(z₁²z̄₂²)−1` at the point over `(z₁, z₂)` with `w > 0` real.
pub fn perturbed_sphere(z1: C64, z2: C64) -> HypersurfaceSpec {
    let rho = PolynomialSpec::sphere(3, 1.0)
        .term(c(0.05, 0.0), &[2, 0, 0], &[0, 2, 0])
        .term(c(0.05, 0.0), &[0, 2, 0], &[2, 0, 0]);
    let q = z1.norm_sqr() + z2.norm_sqr() + 0.1 * (z1 * z1 * (z2 * z2).conj()).re;
    HypersurfaceSpec::new(rho, vec![z1, z2, c((1.0 - q).sqrt(), 0.0)])
}
