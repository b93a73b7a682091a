use super::{AdaptedFrameData, SffData};
use crate::error::Result;
use crate::forms::conformal::{conformal_flat_decompose, traceless_project, CTensor};
use crate::forms::{curvature_slots, IndexedTensor};
use crate::pseudohermitian::CurvaturePack;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussReport {
    /// `R̂_{αβ̄μν̄} − R_{αβ̄μν̄} − ω_α^a_μ ω_β̄^ā_ν̄`.
    pub pseudohermitian: f64,
    /// `[Ŝ] − S − [ω ω̄]` on tangential indices.
    pub pseudoconformal: f64,
    /// `S` against the expanded formula in terms of `Ŝ` and `ω`.
    pub expanded: f64,
    /// Size of the tangential `Ŝ`.
    pub s_hat_norm: f64,
    /// Size of `⟨Π, Π⟩` and of its trace-free part.
    pub pi_pi_norm: f64,
    pub pi_pi_traceless: f64,
    /// Residual of writing `⟨Π, Π⟩` as a multiple of the Levi form.
    pub flat_decomposition: f64,
}

impl GaussReport {
    pub fn max(&self) -> f64 {
        self.pseudohermitian
            .max(self.pseudoconformal)
            .max(self.expanded)
    }
}

/// Transforms a target `(A, B̄, C, D̄)` tensor by `U` and keeps tangential indices.
fn tangential(t: &CTensor, u: &DMatrix<C64>, n: usize) -> CTensor {
    let nh = u.nrows();
    IndexedTensor::from_fn(curvature_slots(), vec![n; 4], |i| {
        let mut s = C64::new(0.0, 0.0);
        for p in 0..nh {
            let up = u[(i[0], p)];
            for q in 0..nh {
                let uq = up * u[(i[1], q)].conj();
                for r in 0..nh {
                    let ur = uq * u[(i[2], r)];
                    for w in 0..nh {
                        s += ur * u[(i[3], w)].conj() * t.get(&[p, q, r, w]);
                    }
                }
            }
        }
        s
    })
}

/// Tangential `Ŝ` of the target in the adapted frame.
pub(crate) fn tangential_s_hat(adapted: &AdaptedFrameData) -> Result<CTensor> {
    let n = adapted.n();
    let u = adapted.u_at_base();
    let nh = u.nrows();
    let s_full = traceless_project(&adapted.target.pack.r.at_base(), &DMatrix::identity(nh, nh))?;
    Ok(tangential(&s_full, &u, n))
}

/// `g_{ab̄} ω_α^a_μ ω_β̄^b̄_ν̄` at the base point.
pub(crate) fn pi_pi(sff: &SffData) -> CTensor {
    let w = sff.omega.at_base();
    let d = sff.codim();
    IndexedTensor::from_fn(curvature_slots(), vec![sff.n(); 4], |i| {
        (0..d)
            .map(|a| w.get(&[i[0], a, i[2]]) * w.get(&[i[1], a, i[3]]).conj())
            .sum()
    })
}

pub fn gauss_residuals(
    sff: &SffData,
    source: &CurvaturePack,
    adapted: &AdaptedFrameData,
) -> Result<GaussReport> {
    let n = sff.n();
    let g = DMatrix::<C64>::identity(n, n);
    let u = adapted.u_at_base();
    let r_hat = tangential(&adapted.target.pack.r.at_base(), &u, n);
    let r = source.r.at_base();
    let pp = pi_pi(sff);
    let pseudohermitian = r_hat.sub(&r).sub(&pp).max_abs();

    let s = traceless_project(&r, &g)?;
    let s_hat = tangential_s_hat(adapted)?;
    let pp_tl = traceless_project(&pp, &g)?;
    let pseudoconformal = traceless_project(&s_hat, &g)?.sub(&s).sub(&pp_tl).max_abs();

    // expanded form, traces written out by hand
    let nf = n as f64;
    let c1 = 1.0 / (nf + 2.0);
    let c2 = 1.0 / ((nf + 1.0) * (nf + 2.0));
    let sh_tr = |a: usize, b: usize| (0..n).map(|ga| s_hat.get(&[ga, ga, a, b])).sum::<C64>();
    let sh_tr2: C64 = (0..n).map(|de| sh_tr(de, de)).sum();
    let w = sff.omega.at_base();
    let d = sff.codim();
    // ω_γ^a_α ω^γ_{aβ̄}
    let ww = |a: usize, b: usize| -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for ga in 0..n {
            for x in 0..d {
                s += w.get(&[ga, x, a]) * w.get(&[ga, x, b]).conj();
            }
        }
        s
    };
    let ww2: C64 = (0..n).map(|de| ww(de, de)).sum();
    let dl = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let expanded_s = IndexedTensor::from_fn(curvature_slots(), vec![n; 4], |i| {
        let (al, be, mu, nu) = (i[0], i[1], i[2], i[3]);
        let flat = dl(al, be) * dl(mu, nu) + dl(al, nu) * dl(mu, be);
        let tr4 = |f: &dyn Fn(usize, usize) -> C64| {
            f(al, be) * dl(mu, nu)
                + f(mu, be) * dl(al, nu)
                + f(al, nu) * dl(mu, be)
                + f(mu, nu) * dl(al, be)
        };
        s_hat.get(i) - tr4(&sh_tr) * c1 + sh_tr2 * flat * c2 - pp.get(i) + tr4(&ww) * c1
            - ww2 * flat * c2
    });
    let expanded = expanded_s.sub(&s).max_abs();

    let (_, rest) = conformal_flat_decompose(&pp, &g)?;
    Ok(GaussReport {
        pseudohermitian,
        pseudoconformal,
        expanded,
        s_hat_norm: s_hat.max_abs(),
        pi_pi_norm: pp.max_abs(),
        pi_pi_traceless: pp_tl.max_abs(),
        flat_decomposition: rest.max_abs(),
    })
}

/// Outcome of comparing two quadratic forms whose squared moduli differ by a multiple of
/// `(z, z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizationReport {
    /// Trace-free part of the difference tensor.
    pub traceless_residual: f64,
    /// `h` with difference `= h_{αβ̄}g_{μν̄} + …` (four terms), so `H(z, z) = 4 h(z, z)`.
    pub h: Vec<Vec<C64>>,
    /// `max |Q|² − |Q̃|² − (z,z) H(z,z)` over the samples.
    pub sample_residual: f64,
    /// Largest deviation of `H(z, z)` from `expected_h` at the samples, when given.
    pub expected_residual: Option<f64>,
    pub samples: usize,
    pub seed: u64,
}

/// `Q(z) = Σ q_{αβ} z_α z_β` with `q` symmetric.
fn quad(q: &DMatrix<C64>, z: &[C64]) -> C64 {
    let n = z.len();
    let mut s = C64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            s += q[(a, b)] * z[a] * z[b];
        }
    }
    s
}

/// Checks `|Q|² − |Q̃|² = (z, z) H(z, z)` with `H` recovered from the trace decomposition of
/// `Π_{αμ} Π̄_{βν} − Π̃_{αμ} Π̃̄_{βν}`.
pub fn polarization_check(
    q: &DMatrix<C64>,
    q_tilde: &DMatrix<C64>,
    expected_h: Option<&DMatrix<C64>>,
    samples: usize,
    seed: u64,
) -> Result<PolarizationReport> {
    let n = q.nrows();
    let g = DMatrix::<C64>::identity(n, n);
    let t = IndexedTensor::from_fn(curvature_slots(), vec![n; 4], |i| {
        q[(i[0], i[2])] * q[(i[1], i[3])].conj()
            - q_tilde[(i[0], i[2])] * q_tilde[(i[1], i[3])].conj()
    });
    let (h, rest) = conformal_flat_decompose(&t, &g)?;
    let hz = |z: &[C64]| {
        let mut s = C64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                s += h[(a, b)] * z[a] * z[b].conj();
            }
        }
        s * 4.0
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample_residual: f64 = 0.0;
    let mut expected_residual: f64 = 0.0;
    for _ in 0..samples {
        let z: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let zz: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let lhs = quad(q, &z).norm_sqr() - quad(q_tilde, &z).norm_sqr();
        let hv = hz(&z);
        sample_residual = sample_residual.max((lhs - zz * hv).norm());
        if let Some(e) = expected_h {
            let mut want = C64::new(0.0, 0.0);
            for a in 0..n {
                for b in 0..n {
                    want += e[(a, b)] * z[a] * z[b].conj();
                }
            }
            expected_residual = expected_residual.max((hv - want).norm());
        }
    }
    Ok(PolarizationReport {
        traceless_residual: rest.max_abs(),
        h: (0..n)
            .map(|a| (0..n).map(|b| h[(a, b)]).collect())
            .collect(),
        sample_residual,
        expected_residual: expected_h.map(|_| expected_residual),
        samples,
        seed,
    })
}
