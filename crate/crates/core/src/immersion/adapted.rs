use super::{CRMapSpec, TargetData};
use crate::cr::AdmissibleCoframe;
use crate::error::{Error, Result};
use crate::forms::{Form1, SlotKind};
use crate::jet::{max_abs_base, Jet};
use crate::pseudohermitian::{webster_connection, ConnectionData, IndexConnection};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// How far the adapted target coframe is from pulling back to `(θ, θ^α, 0)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PullbackResiduals {
    /// `f*θ̂ − θ`.
    pub theta: f64,
    /// `f*θ̂^α − θ^α`.
    pub theta_alpha: f64,
    /// `f*θ̂^a`.
    pub theta_normal: f64,
    /// `U U* − 1`.
    pub unitary: f64,
    /// Adapted `ω̂_α^β` against the source connection.
    pub omega_tangential: f64,
    /// Adapted `τ̂^α` against the source torsion form.
    pub tau_tangential: f64,
    /// Adapted `τ̂^a`.
    pub tau_normal: f64,
}

impl PullbackResiduals {
    pub fn max(&self) -> f64 {
        [
            self.theta,
            self.theta_alpha,
            self.theta_normal,
            self.unitary,
            self.omega_tangential,
            self.tau_tangential,
            self.tau_normal,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Frame change along `M` from the reference target frame to an adapted one, and the
/// adapted connection and torsion forms pulled back to `M`.
#[derive(Clone, Debug)]
pub struct AdaptedFrameData {
    pub target: TargetData,
    /// Source connection, kept for the tangential slots of covariant derivatives.
    pub source_conn: ConnectionData,
    /// `u[A][C]` with `L̃_A = Σ_C U_A^C L̂_C` along `M`.
    pub u: Vec<Vec<Jet>>,
    /// `U⁻¹ = U*`.
    pub u_inv: Vec<Vec<Jet>>,
    /// `ê^x(f_* e_b)` on the source chart.
    pub push: Vec<Vec<Jet>>,
    /// Adapted `ω̃_A^B` on `M`.
    pub omega: Vec<Vec<Form1>>,
    omega_bar: Vec<Vec<Form1>>,
    /// Adapted `τ̃^B` on `M`.
    pub tau: Vec<Form1>,
    pub residuals: PullbackResiduals,
}

impl AdaptedFrameData {
    pub fn n(&self) -> usize {
        self.source_conn.n()
    }

    pub fn n_hat(&self) -> usize {
        self.u.len()
    }

    /// `U` at the base point.
    pub fn u_at_base(&self) -> nalgebra::DMatrix<C64> {
        let nh = self.n_hat();
        nalgebra::DMatrix::from_fn(nh, nh, |a, c| self.u[a][c].value_or_nan())
    }

    /// `f*φ` for a 1-form given in the reference target frame.
    pub fn pull_back(&self, phi: &Form1, source: &AdmissibleCoframe) -> Form1 {
        let comps: Vec<Jet> = phi
            .c
            .iter()
            .map(|j| self.target.restrict(j, &source.ctx))
            .collect();
        let m = source.basis.m();
        Form1 {
            c: (0..m)
                .map(|b| {
                    let mut s = Jet::zero(&source.ctx);
                    for (x, cx) in comps.iter().enumerate() {
                        s += cx * &self.push[x][b];
                    }
                    s
                })
                .collect(),
        }
    }

    /// Connection used for covariant derivatives of tensors with normal slots.
    pub fn connection(&self) -> AdaptedConnection<'_> {
        AdaptedConnection { data: self }
    }
}

/// `ω_α^β` of `M` on tangential slots and the adapted normal block `ω̃_a^b` on normal slots.
pub struct AdaptedConnection<'a> {
    data: &'a AdaptedFrameData,
}

impl IndexConnection for AdaptedConnection<'_> {
    fn form(&self, kind: SlotKind, a: usize, b: usize) -> Option<&Form1> {
        let n = self.data.n();
        match kind {
            SlotKind::Unbarred | SlotKind::Barred => self.data.source_conn.form(kind, a, b),
            SlotKind::NormalUnbarred => Some(&self.data.omega[n + a][n + b]),
            SlotKind::NormalBarred => Some(&self.data.omega_bar[n + a][n + b]),
            SlotKind::Direction => None,
        }
    }
}

fn inner(x: &[Jet], y: &[Jet]) -> Jet {
    let mut s = Jet::zero(x[0].context());
    for (a, b) in x.iter().zip(y) {
        s += a * &b.conj();
    }
    s
}

/// Completes the rows `f_* L_α` to a unitary frame change along `M`.
pub fn adapt_target_frame(
    map: &CRMapSpec,
    source: &AdmissibleCoframe,
    target: &TargetData,
) -> Result<AdaptedFrameData> {
    let n = source.n();
    let nh = map.n_hat();
    let ms = target.source_vars;
    let sctx = &source.ctx;
    let tb = &target.coframe.basis;
    let sb = &source.basis;

    // ê^x(f_* e_b): f_* e_b = (e_b, 0) in (s, t) chart components
    let cof: Vec<Vec<Jet>> = target
        .coframe
        .coframe
        .iter()
        .map(|row| row[..ms].iter().map(|j| target.restrict(j, sctx)).collect())
        .collect();
    let push: Vec<Vec<Jet>> = cof
        .iter()
        .map(|row| {
            source
                .frame
                .iter()
                .map(|e| {
                    let mut s = Jet::zero(sctx);
                    for (a, b) in row.iter().zip(e) {
                        s += a * b;
                    }
                    s
                })
                .collect()
        })
        .collect();

    let mut u: Vec<Vec<Jet>> = (0..n)
        .map(|a| (0..nh).map(|c| push[tb.l(c)][sb.l(a)].clone()).collect())
        .collect();
    for cand in 0..nh {
        if u.len() == nh {
            break;
        }
        let mut row: Vec<Jet> = (0..nh)
            .map(|c| Jet::real(sctx, if c == cand { 1.0 } else { 0.0 }))
            .collect();
        for prev in u.iter() {
            let k = inner(&row, prev);
            for (x, p) in row.iter_mut().zip(prev) {
                *x -= &k * p;
            }
        }
        let norm2 = inner(&row, &row);
        if norm2.value_or_nan().re < 1e-2 {
            continue;
        }
        let s = norm2.powc(-0.5)?;
        u.push(row.iter().map(|x| x * &s).collect());
    }
    if u.len() != nh {
        return Err(Error::RankDeficient {
            rank: u.len(),
            expected: nh,
        });
    }
    let u_inv: Vec<Vec<Jet>> = (0..nh)
        .map(|c| (0..nh).map(|b| u[b][c].conj()).collect())
        .collect();

    let mut unitary: f64 = 0.0;
    for a in 0..nh {
        for b in 0..nh {
            let g = inner(&u[a], &u[b]).add_const(C64::new(if a == b { -1.0 } else { 0.0 }, 0.0));
            unitary = unitary.max(max_abs_base([&g]));
        }
    }

    let mut data = AdaptedFrameData {
        target: target.clone(),
        source_conn: webster_connection(source)?,
        u,
        u_inv,
        push,
        omega: Vec::new(),
        omega_bar: Vec::new(),
        tau: Vec::new(),
        residuals: PullbackResiduals::default(),
    };

    let pulled_omega: Vec<Vec<Form1>> = (0..nh)
        .map(|c| {
            (0..nh)
                .map(|dd| data.pull_back(&target.conn.omega[c][dd], source))
                .collect()
        })
        .collect();
    let pulled_tau: Vec<Form1> = target
        .conn
        .tau
        .iter()
        .map(|t| data.pull_back(t, source))
        .collect();
    let du: Vec<Vec<Form1>> = data
        .u
        .iter()
        .map(|row| row.iter().map(|j| Form1::differential(j, source)).collect())
        .collect();

    // L̃_A = U_A^C L̂_C gives ω̃ = dU U⁻¹ + U ω̂ U⁻¹ and τ̃ = τ̂ U⁻¹
    let mut omega = vec![vec![Form1::zero(sctx, sb); nh]; nh];
    for a in 0..nh {
        let mut uw = vec![Form1::zero(sctx, sb); nh];
        for c in 0..nh {
            for dd in 0..nh {
                uw[dd].axpy(&data.u[a][c], &pulled_omega[c][dd]);
            }
        }
        for b in 0..nh {
            for c in 0..nh {
                omega[a][b].axpy(&data.u_inv[c][b], &du[a][c]);
                omega[a][b].axpy(&data.u_inv[c][b], &uw[c]);
            }
        }
    }
    let tau: Vec<Form1> = (0..nh)
        .map(|b| {
            let mut t = Form1::zero(sctx, sb);
            for c in 0..nh {
                t.axpy(&data.u_inv[c][b], &pulled_tau[c]);
            }
            t
        })
        .collect();

    let mut res = PullbackResiduals {
        unitary,
        ..Default::default()
    };
    for b in 0..sb.m() {
        let want = if b == 0 { 1.0 } else { 0.0 };
        res.theta = res.theta.max(max_abs_base([
            &data.push[0][b].add_const(C64::new(-want, 0.0))
        ]));
    }
    for bb in 0..nh {
        for b in 0..sb.m() {
            let mut s = Jet::zero(sctx);
            for c in 0..nh {
                s += &data.push[tb.l(c)][b] * &data.u_inv[c][bb];
            }
            let want = if bb < n && b == sb.l(bb) { 1.0 } else { 0.0 };
            let r = max_abs_base([&s.add_const(C64::new(-want, 0.0))]);
            if bb < n {
                res.theta_alpha = res.theta_alpha.max(r);
            } else {
                res.theta_normal = res.theta_normal.max(r);
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            let diff = omega[a][b].sub(&data.source_conn.omega[a][b]);
            res.omega_tangential = res.omega_tangential.max(diff.max_abs_base());
        }
    }
    for b in 0..nh {
        if b < n {
            let diff = tau[b].sub(&data.source_conn.tau[b]);
            res.tau_tangential = res.tau_tangential.max(diff.max_abs_base());
        } else {
            res.tau_normal = res.tau_normal.max(tau[b].max_abs_base());
        }
    }
    data.omega_bar = omega
        .iter()
        .map(|row| row.iter().map(|f| f.conj(sb)).collect())
        .collect();
    data.omega = omega;
    data.tau = tau;
    data.residuals = res;
    Ok(data)
}
