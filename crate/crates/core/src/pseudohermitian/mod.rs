//! Webster connection, torsion and curvature of a normalized admissible coframe.

mod covariant;

pub use covariant::{covariant_derivative, IndexConnection};

use crate::error::{Error, Result};
use crate::forms::{
    curvature_slots, Form1, Form2, FrameBasis, IndexedTensor, MovingFrame, Slot, SlotKind,
};
use crate::jet::{max_abs_base, min_order, Jet, JetContext};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

const I: C64 = C64::new(0.0, 1.0);

/// Webster connection forms `ω_α^β` and torsion `A^β_ν̄` of a frame with `g = δ`.
#[derive(Clone, Debug)]
pub struct ConnectionData {
    pub omega: Vec<Vec<Form1>>,
    /// `torsion[β][ν] = A^β_ν̄`.
    pub torsion: Vec<Vec<Jet>>,
    /// `τ^β = A^β_ν̄ θ^ν̄`.
    pub tau: Vec<Form1>,
    omega_bar: Vec<Vec<Form1>>,
    pub rank: usize,
    /// Smallest retained singular value over the largest one.
    pub rank_margin: f64,
}

/// Real-linear system `Σ a_k z_k + Σ b_k conj(z_k) = r` in complex unknowns.
struct RealSystem {
    cols: usize,
    rows: Vec<Vec<f64>>,
}

impl RealSystem {
    fn new(unknowns: usize) -> Self {
        RealSystem {
            cols: 2 * unknowns,
            rows: Vec::new(),
        }
    }

    /// Appends one complex equation given as `(unknown, coefficient, conjugated)` terms.
    fn push(&mut self, terms: &[(usize, C64, bool)]) {
        let mut re = vec![0.0; self.cols];
        let mut im = vec![0.0; self.cols];
        for &(k, a, conj) in terms {
            let (x, y) = (2 * k, 2 * k + 1);
            if conj {
                re[x] += a.re;
                re[y] += a.im;
                im[x] += a.im;
                im[y] -= a.re;
            } else {
                re[x] += a.re;
                re[y] -= a.im;
                im[x] += a.im;
                im[y] += a.re;
            }
        }
        self.rows.push(re);
        self.rows.push(im);
    }

    fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows.len(), self.cols, |i, j| self.rows[i][j])
    }
}

/// Pseudo-inverse together with numerical rank and the ratio `σ_min/σ_max` over retained values.
fn pseudo_inverse(a: DMatrix<f64>) -> (DMatrix<f64>, usize, f64) {
    // AᵀA is small and well conditioned here; its symmetric eigensolver is more reliable
    // than a bidiagonal SVD on these large sparse ±1 systems
    let at = a.transpose();
    let eig = (&at * &a).symmetric_eigen();
    let sv: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let tol = 1e-8 * smax.max(1.0);
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let smin = sv
        .iter()
        .copied()
        .filter(|&s| s > tol)
        .fold(f64::INFINITY, f64::min);
    let inv_l = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        sv.len(),
        sv.iter()
            .map(|&s| if s > tol { 1.0 / (s * s) } else { 0.0 }),
    ));
    let v = &eig.eigenvectors;
    let pinv = v * inv_l * v.transpose() * at;
    (pinv, rank, if smax > 0.0 { smin / smax } else { 0.0 })
}

/// Solves `dθ^β = θ^α∧ω_α^β + θ∧τ^β` together with `ω_α^β + conj(ω_β^α) = 0`.
///
/// The system has constant coefficients in frame components, so it is solved monomial by
/// monomial with one pseudo-inverse.
pub fn webster_connection(frame: &impl MovingFrame) -> Result<ConnectionData> {
    let basis = frame.basis();
    let ctx = frame.context();
    let n = basis.n();
    let m = basis.m();
    let w_idx = |a: usize, b: usize, c: usize| (a * n + b) * m + c;
    let a_idx = |b: usize, v: usize| n * n * m + b * n + v;
    let unknowns = n * n * m + n * n;
    let one = C64::new(1.0, 0.0);

    let mut sys = RealSystem::new(unknowns);
    for beta in 0..n {
        for &(b, c) in basis.pairs() {
            let mut terms = Vec::new();
            for alpha in 0..n {
                if b == basis.l(alpha) {
                    terms.push((w_idx(alpha, beta, c), one, false));
                }
                if c == basis.l(alpha) {
                    terms.push((w_idx(alpha, beta, b), -one, false));
                }
            }
            for nu in 0..n {
                if b == 0 && c == basis.lbar(nu) {
                    terms.push((a_idx(beta, nu), one, false));
                }
            }
            sys.push(&terms);
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..m {
                sys.push(&[
                    (w_idx(a, b, c), one, false),
                    (w_idx(b, a, basis.bar(c)), one, true),
                ]);
            }
        }
    }
    let (pinv, rank, margin) = pseudo_inverse(sys.matrix());
    if rank != 2 * unknowns {
        return Err(Error::RankDeficient {
            rank,
            expected: 2 * unknowns,
        });
    }

    let gammas: Vec<&[Jet]> = (0..n).map(|b| frame.structure(basis.l(b))).collect();
    let order = gammas
        .iter()
        .map(|g| min_order(g.iter()))
        .min()
        .unwrap_or(-1);
    let len = ctx.count(order);
    let mut sol = vec![vec![C64::new(0.0, 0.0); len]; unknowns];
    let nrows = pinv.ncols();
    let mut rhs = nalgebra::DVector::<f64>::zeros(nrows);
    for k in 0..len {
        rhs.fill(0.0);
        for (beta, g) in gammas.iter().enumerate() {
            for (p, j) in g.iter().enumerate() {
                let v = j.coeffs()[k];
                let r = 2 * (beta * basis.num_pairs() + p);
                rhs[r] = v.re;
                rhs[r + 1] = v.im;
            }
        }
        let x = &pinv * &rhs;
        for (u, s) in sol.iter_mut().enumerate() {
            s[k] = C64::new(x[2 * u], x[2 * u + 1]);
        }
    }
    let jet = |u: usize| Jet::from_raw(ctx, order, sol[u].clone());
    let omega: Vec<Vec<Form1>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| Form1 {
                    c: (0..m).map(|c| jet(w_idx(a, b, c))).collect(),
                })
                .collect()
        })
        .collect();
    let torsion: Vec<Vec<Jet>> = (0..n)
        .map(|b| (0..n).map(|v| jet(a_idx(b, v))).collect())
        .collect();
    Ok(ConnectionData::assemble(
        basis, ctx, omega, torsion, rank, margin,
    ))
}

impl ConnectionData {
    fn assemble(
        basis: &FrameBasis,
        ctx: &JetContext,
        omega: Vec<Vec<Form1>>,
        torsion: Vec<Vec<Jet>>,
        rank: usize,
        rank_margin: f64,
    ) -> Self {
        let n = basis.n();
        let tau = torsion
            .iter()
            .map(|row| {
                let mut f = Form1::zero(ctx, basis);
                for (v, a) in row.iter().enumerate() {
                    f.c[basis.lbar(v)] = a.clone();
                }
                f
            })
            .collect();
        let omega_bar = (0..n)
            .map(|a| (0..n).map(|b| omega[a][b].conj(basis)).collect())
            .collect();
        ConnectionData {
            omega,
            torsion,
            tau,
            omega_bar,
            rank,
            rank_margin,
        }
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    /// `conj(ω_α^β)`, the connection on barred indices.
    pub fn omega_bar(&self, a: usize, b: usize) -> &Form1 {
        &self.omega_bar[a][b]
    }

    /// Base-point residual of `dθ^β = θ^α∧ω_α^β + θ∧τ^β`.
    pub fn structure_residual(&self, frame: &impl MovingFrame) -> f64 {
        let basis = frame.basis();
        let ctx = frame.context();
        let theta = Form1::basis_element(ctx, basis, 0);
        let mut r: f64 = 0.0;
        for beta in 0..self.n() {
            let mut e = Form2 {
                c: frame.structure(basis.l(beta)).to_vec(),
            };
            for alpha in 0..self.n() {
                let ta = Form1::basis_element(ctx, basis, basis.l(alpha));
                e.sub_assign(&ta.wedge(&self.omega[alpha][beta], basis));
            }
            e.sub_assign(&theta.wedge(&self.tau[beta], basis));
            r = r.max(e.max_abs_base());
        }
        r
    }

    /// Base-point residual of `ω_α^β + conj(ω_β^α) = 0`.
    pub fn skew_residual(&self) -> f64 {
        let n = self.n();
        let mut r: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                r = r.max(self.omega[a][b].add(&self.omega_bar[b][a]).max_abs_base());
            }
        }
        r
    }

    /// Base-point violation of `A^{αβ} = A^{βα}`.
    pub fn torsion_symmetry_residual(&self) -> f64 {
        let n = self.n();
        let mut r: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                r = r.max(max_abs_base([&(&self.torsion[a][b] - &self.torsion[b][a])]));
            }
        }
        r
    }

    /// The torsion as the tensor `A^β_ν̄`.
    pub fn torsion_tensor(&self) -> IndexedTensor<Jet> {
        let n = self.n();
        IndexedTensor::from_fn(
            vec![Slot::up(SlotKind::Unbarred), Slot::down(SlotKind::Barred)],
            vec![n, n],
            |i| self.torsion[i[0]][i[1]].clone(),
        )
    }

    /// `A_{αμ}`, numerically `conj(A^α_μ̄)` when `g = δ`.
    pub fn torsion_lowered(&self) -> IndexedTensor<Jet> {
        let n = self.n();
        IndexedTensor::from_fn(
            vec![
                Slot::down(SlotKind::Unbarred),
                Slot::down(SlotKind::Unbarred),
            ],
            vec![n, n],
            |i| self.torsion[i[0]][i[1]].conj(),
        )
    }
}

impl IndexConnection for ConnectionData {
    fn form(&self, kind: SlotKind, a: usize, b: usize) -> Option<&Form1> {
        match kind {
            SlotKind::Unbarred => Some(&self.omega[a][b]),
            SlotKind::Barred => Some(&self.omega_bar[a][b]),
            _ => None,
        }
    }
}

/// Pseudohermitian curvature with `g = δ`, so index position only records variance.
#[derive(Clone, Debug)]
pub struct CurvaturePack {
    /// `R_{αβ̄μν̄}`.
    pub r: IndexedTensor<Jet>,
    /// `W_α^β_μ`.
    pub w: IndexedTensor<Jet>,
    /// `W^β_{αν̄}`.
    pub w_bar: IndexedTensor<Jet>,
    /// `R_{αβ̄} = R_μ^μ_{αβ̄}`.
    pub ricci: Vec<Vec<Jet>>,
    pub scalar: Jet,
    /// Base-point size of what the decomposition does not account for.
    pub decomposition_residual: f64,
}

/// `Π_α^β = dω_α^β − ω_α^γ∧ω_γ^β`.
pub fn curvature_forms(conn: &ConnectionData, frame: &impl MovingFrame) -> Vec<Vec<Form2>> {
    let basis = frame.basis();
    let n = conn.n();
    (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let mut p = conn.omega[a][b].d(frame);
                    for g in 0..n {
                        p.sub_assign(&conn.omega[a][g].wedge(&conn.omega[g][b], basis));
                    }
                    p
                })
                .collect()
        })
        .collect()
}

/// Splits `Π_α^β` into `R θ^μ∧θ^ν̄ + W θ^μ∧θ − W θ^ν̄∧θ + iθ_α∧τ^β − iτ_α∧θ^β`.
pub fn webster_curvature(conn: &ConnectionData, frame: &impl MovingFrame) -> Result<CurvaturePack> {
    let basis = frame.basis();
    let ctx = frame.context();
    let n = conn.n();
    let pi = curvature_forms(conn, frame);
    let r = IndexedTensor::from_fn(curvature_slots(), vec![n; 4], |i| {
        pi[i[0]][i[1]].get(basis, basis.l(i[2]), basis.lbar(i[3]))
    });
    // stored pair (0, μ) is θ∧θ^μ = −θ^μ∧θ
    let w = IndexedTensor::from_fn(
        vec![
            Slot::down(SlotKind::Unbarred),
            Slot::up(SlotKind::Unbarred),
            Slot::down(SlotKind::Unbarred),
        ],
        vec![n; 3],
        |i| -pi[i[0]][i[1]].get(basis, 0, basis.l(i[2])),
    );
    let w_bar = IndexedTensor::from_fn(
        vec![
            Slot::up(SlotKind::Unbarred),
            Slot::down(SlotKind::Unbarred),
            Slot::down(SlotKind::Barred),
        ],
        vec![n; 3],
        |i| pi[i[1]][i[0]].get(basis, 0, basis.lbar(i[2])),
    );
    if r.data.iter().any(|j| j.order() < 0) {
        return Err(Error::OrderBudget(
            "curvature needs two orders below the connection".into(),
        ));
    }

    let theta = Form1::basis_element(ctx, basis, 0);
    let mut residual: f64 = 0.0;
    for a in 0..n {
        let theta_a = Form1::basis_element(ctx, basis, basis.lbar(a));
        let tau_a = conn.tau[a].conj(basis);
        for b in 0..n {
            let mut e = pi[a][b].clone();
            for mu in 0..n {
                let tm = Form1::basis_element(ctx, basis, basis.l(mu));
                for nu in 0..n {
                    let tn = Form1::basis_element(ctx, basis, basis.lbar(nu));
                    e.sub_assign(&tm.wedge(&tn, basis).scale(r.get(&[a, b, mu, nu])));
                }
                e.sub_assign(&tm.wedge(&theta, basis).scale(w.get(&[a, b, mu])));
                let tmb = Form1::basis_element(ctx, basis, basis.lbar(mu));
                e.add_assign(&tmb.wedge(&theta, basis).scale(w_bar.get(&[b, a, mu])));
            }
            let tb = Form1::basis_element(ctx, basis, basis.l(b));
            e.axpy_c(-I, &theta_a.wedge(&conn.tau[b], basis));
            e.axpy_c(I, &tau_a.wedge(&tb, basis));
            residual = residual.max(e.max_abs_base());
        }
    }

    let ricci: Vec<Vec<Jet>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let mut s = Jet::zero(ctx);
                    for mu in 0..n {
                        s += r.get(&[mu, mu, a, b]);
                    }
                    s
                })
                .collect()
        })
        .collect();
    let mut scalar = Jet::zero(ctx);
    for (a, row) in ricci.iter().enumerate() {
        scalar += &row[a];
    }
    Ok(CurvaturePack {
        r,
        w,
        w_bar,
        ricci,
        scalar,
        decomposition_residual: residual,
    })
}

/// Base-point `max |W_α^β_μ − A_{αμ;}^β|` and `max |W^β_{αν̄} − A^β_{ν̄;α}|`.
pub fn lee_identity_residual(
    pack: &CurvaturePack,
    conn: &ConnectionData,
    frame: &impl MovingFrame,
) -> Result<(f64, f64)> {
    let basis = frame.basis();
    let n = conn.n();
    let da = covariant_derivative(&conn.torsion_lowered(), conn, frame)?;
    let db = covariant_derivative(&conn.torsion_tensor(), conn, frame)?;
    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for mu in 0..n {
                let lhs = pack.w.get(&[a, b, mu]);
                let rhs = da.get(&[a, mu, basis.lbar(b)]);
                r1 = r1.max(max_abs_base([&(lhs - rhs)]));
                let lhs = pack.w_bar.get(&[b, a, mu]);
                let rhs = db.get(&[b, mu, basis.l(a)]);
                r2 = r2.max(max_abs_base([&(lhs - rhs)]));
            }
        }
    }
    Ok((r1, r2))
}

#[cfg(test)]
mod tests;
