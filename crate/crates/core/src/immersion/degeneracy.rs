use super::{CRMapSpec, SffData};
use crate::cr::AdmissibleCoframe;
use crate::error::{Error, Result};
use crate::forms::MovingFrame;
use crate::jet::Jet;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Rank with the relative threshold `1e−8·max(1, σ_max)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankInfo {
    pub rank: usize,
    /// Some singular value lies within a factor 10 of the threshold.
    pub unstable: bool,
    pub sigma_max: f64,
}

pub fn numerical_rank(a: &DMatrix<C64>) -> RankInfo {
    if a.nrows() == 0 || a.ncols() == 0 {
        return RankInfo {
            rank: 0,
            unstable: false,
            sigma_max: 0.0,
        };
    }
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let thr = 1e-8 * smax.max(1.0);
    RankInfo {
        rank: sv.iter().filter(|&&s| s > thr).count(),
        unstable: sv.iter().any(|&s| s > thr / 10.0 && s < thr * 10.0),
        sigma_max: smax,
    }
}

/// `dim E_k` for `k = 0..=k_max`, with the codimension minimum `s0` and where it is first
/// reached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyProfile {
    pub dims: Vec<usize>,
    pub s0: usize,
    pub k0: usize,
    pub unstable: bool,
    /// Jet budget ran out; the last dims are lower bounds.
    pub truncated: bool,
}

impl DegeneracyProfile {
    fn from_dims(dims: Vec<usize>, ambient: usize, unstable: bool, truncated: bool) -> Self {
        let best = *dims.iter().max().unwrap_or(&0);
        let k0 = dims.iter().position(|&d| d == best).unwrap_or(0);
        DegeneracyProfile {
            s0: ambient - best,
            k0,
            dims,
            unstable,
            truncated,
        }
    }
}

fn stack(rows: &[Vec<C64>]) -> DMatrix<C64> {
    let cols = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

/// `E_k = span{L̄^J (ρ̂_{Z'} ∘ f) : |J| ≤ k}` at the base point, over every ordering of `J`.
pub fn ek_spaces(
    map: &CRMapSpec,
    source: &AdmissibleCoframe,
    k_max: usize,
) -> Result<DegeneracyProfile> {
    let n = source.n();
    let f = map.map_jets(source);
    let fb: Vec<Jet> = f.iter().map(|j| j.conj()).collect();
    let nn = f.len();
    let mut layer: Vec<Vec<Jet>> = vec![(0..nn)
        .map(|k| map.target.rho.d_z(k).eval_jets(&f, &fb))
        .collect()];
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut dims = Vec::new();
    let mut unstable = false;
    let mut truncated = false;
    for k in 0..=k_max {
        if k > 0 {
            let mut next = Vec::with_capacity(layer.len() * n);
            for v in &layer {
                let d: Vec<Vec<Jet>> = v.iter().map(|j| source.frame_derivatives(j)).collect();
                for mu in 0..n {
                    next.push(
                        d.iter()
                            .map(|dk| dk[source.basis.lbar(mu)].clone())
                            .collect(),
                    );
                }
            }
            layer = next;
        }
        if layer.iter().flatten().any(|j| j.order() < 0) {
            truncated = true;
            break;
        }
        rows.extend(
            layer
                .iter()
                .map(|v| v.iter().map(|j| j.value_or_nan()).collect::<Vec<_>>()),
        );
        let info = numerical_rank(&stack(&rows));
        unstable |= info.unstable;
        dims.push(info.rank);
    }
    if dims.is_empty() {
        return Err(Error::OrderBudget("no jet order for E_0".into()));
    }
    Ok(DegeneracyProfile::from_dims(dims, nn, unstable, truncated))
}

/// The same profile from spans of `ω_{γ₁}^a_{γ₂;γ₃…γ_l}` in the normal space: `E_0` is the
/// line of `ρ̂_{Z'}`, `E_1` adds the `n` tangential directions, higher `E_k` add the span of
/// derivatives of order `l ≤ k`.
pub fn degeneracy_from_sff(sff: &SffData, k_max: usize) -> DegeneracyProfile {
    let n = sff.n();
    let d = sff.codim();
    let mut dims = Vec::new();
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut unstable = false;
    let mut truncated = false;
    for k in 0..=k_max {
        match k {
            0 => dims.push(1),
            1 => dims.push(n + 1),
            _ => {
                let Some(t) = sff.derivs.get(&k) else {
                    truncated = true;
                    break;
                };
                let tb = t.at_base();
                if tb.data.iter().any(|z| !z.is_finite()) {
                    truncated = true;
                    break;
                }
                for idx in t.indices().into_iter().filter(|i| i[1] == 0) {
                    rows.push(
                        (0..d)
                            .map(|a| {
                                let mut j = idx.clone();
                                j[1] = a;
                                *tb.get(&j)
                            })
                            .collect(),
                    );
                }
                let info = numerical_rank(&stack(&rows));
                unstable |= info.unstable;
                dims.push(n + 1 + info.rank);
            }
        }
    }
    DegeneracyProfile::from_dims(dims, n + d + 1, unstable, truncated)
}
