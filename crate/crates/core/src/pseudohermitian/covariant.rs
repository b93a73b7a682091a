use crate::error::{Error, Result};
use crate::forms::{Form1, IndexedTensor, MovingFrame, Slot, SlotKind};
use crate::jet::Jet;

/// Connection 1-forms `ω_a^b` acting on one kind of tensor slot.
pub trait IndexConnection {
    fn form(&self, kind: SlotKind, a: usize, b: usize) -> Option<&Form1>;
}

/// `∇t` with one extra lower slot running over the frame `T, L_μ, L_ν̄`.
///
/// Upper slots pick up `+t^γ ω_γ^b`, lower slots `−ω_a^γ t_γ`; a direction slot `0` is
/// parallel and `μ`, `ν̄` slots use the tangential connection and its conjugate.
pub fn covariant_derivative(
    t: &IndexedTensor<Jet>,
    conn: &impl IndexConnection,
    frame: &impl MovingFrame,
) -> Result<IndexedTensor<Jet>> {
    let basis = frame.basis();
    let m = basis.m();
    let n = basis.n();
    let ctx = frame.context();

    let mut slots = t.slots.clone();
    slots.push(Slot::down(SlotKind::Direction));
    let mut dims = t.dims.clone();
    dims.push(m);

    // connection form for a given slot at frame index `a -> b`
    let resolve = |slot: &Slot, a: usize, b: usize| -> Result<Option<&Form1>> {
        match slot.kind {
            SlotKind::Direction => {
                if a == 0 || b == 0 {
                    return Ok(None);
                }
                let (ka, ia) = if a <= n {
                    (SlotKind::Unbarred, a - 1)
                } else {
                    (SlotKind::Barred, a - 1 - n)
                };
                let (kb, ib) = if b <= n {
                    (SlotKind::Unbarred, b - 1)
                } else {
                    (SlotKind::Barred, b - 1 - n)
                };
                if ka != kb {
                    return Ok(None);
                }
                conn.form(ka, ia, ib)
                    .map(Some)
                    .ok_or_else(|| Error::Invalid("missing connection for slot".into()))
            }
            kind => conn
                .form(kind, a, b)
                .map(Some)
                .ok_or_else(|| Error::Invalid(format!("no connection for {kind:?} slots"))),
        }
    };

    let mut out = IndexedTensor::filled(slots, dims, Jet::zero(ctx));
    for idx in t.indices() {
        let d = frame.frame_derivatives(t.get(&idx));
        for (c, v) in d.into_iter().enumerate() {
            let mut o = idx.clone();
            o.push(c);
            out.set(&o, v);
        }
    }
    for idx in t.indices() {
        let val = t.get(&idx);
        for (s, slot) in t.slots.iter().enumerate() {
            // t_{..g..} feeds the component whose slot s carries i
            let g = idx[s];
            for i in 0..t.dims[s] {
                let form = if slot.up {
                    resolve(slot, g, i)?
                } else {
                    resolve(slot, i, g)?
                };
                let Some(form) = form else { continue };
                let mut o = idx.clone();
                o[s] = i;
                o.push(0);
                for c in 0..m {
                    *o.last_mut().unwrap() = c;
                    let k = out.offset(&o);
                    let term = val * &form.c[c];
                    if slot.up {
                        out.data[k] += term;
                    } else {
                        out.data[k] -= term;
                    }
                }
            }
        }
    }
    Ok(out)
}
