use crate::jet::Jet;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotKind {
    Unbarred,
    Barred,
    NormalUnbarred,
    NormalBarred,
    /// A differentiation slot running over the whole frame `0, μ, ν̄`.
    Direction,
}

impl SlotKind {
    pub fn conj(self) -> SlotKind {
        match self {
            SlotKind::Unbarred => SlotKind::Barred,
            SlotKind::Barred => SlotKind::Unbarred,
            SlotKind::NormalUnbarred => SlotKind::NormalBarred,
            SlotKind::NormalBarred => SlotKind::NormalUnbarred,
            SlotKind::Direction => SlotKind::Direction,
        }
    }

    pub fn is_barred(self) -> bool {
        matches!(self, SlotKind::Barred | SlotKind::NormalBarred)
    }

    fn label(self) -> &'static str {
        match self {
            SlotKind::Unbarred => "t",
            SlotKind::Barred => "tb",
            SlotKind::NormalUnbarred => "n",
            SlotKind::NormalBarred => "nb",
            SlotKind::Direction => "d",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub kind: SlotKind,
    pub up: bool,
}

impl Slot {
    pub const fn down(kind: SlotKind) -> Slot {
        Slot { kind, up: false }
    }

    pub const fn up(kind: SlotKind) -> Slot {
        Slot { kind, up: true }
    }
}

/// A dense tensor over frame indices, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedTensor<T> {
    pub slots: Vec<Slot>,
    pub dims: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Clone> IndexedTensor<T> {
    pub fn filled(slots: Vec<Slot>, dims: Vec<usize>, fill: T) -> Self {
        assert_eq!(slots.len(), dims.len());
        let len = dims.iter().product();
        IndexedTensor {
            slots,
            dims,
            data: vec![fill; len],
        }
    }

    pub fn from_fn(slots: Vec<Slot>, dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        assert_eq!(slots.len(), dims.len());
        let len: usize = dims.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0; dims.len()];
        for _ in 0..len {
            data.push(f(&idx));
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        IndexedTensor { slots, dims, data }
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            debug_assert!(i < d);
            acc * d + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: T) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> IndexedTensor<U> {
        IndexedTensor {
            slots: self.slots.clone(),
            dims: self.dims.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    /// All multi-indices in storage order.
    pub fn indices(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.data.len());
        let mut idx = vec![0; self.dims.len()];
        for _ in 0..self.data.len() {
            out.push(idx.clone());
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        out
    }
}

impl IndexedTensor<Jet> {
    /// Conjugate tensor: every slot flips its bar and every component is conjugated.
    pub fn conj(&self) -> Self {
        IndexedTensor {
            slots: self
                .slots
                .iter()
                .map(|s| Slot {
                    kind: s.kind.conj(),
                    up: s.up,
                })
                .collect(),
            dims: self.dims.clone(),
            data: self.data.iter().map(|j| j.conj()).collect(),
        }
    }

    pub fn at_base(&self) -> IndexedTensor<C64> {
        self.map(|j| j.value_or_nan())
    }
}

impl IndexedTensor<C64> {
    pub fn conj(&self) -> Self {
        IndexedTensor {
            slots: self
                .slots
                .iter()
                .map(|s| Slot {
                    kind: s.kind.conj(),
                    up: s.up,
                })
                .collect(),
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Max-abs norm; NaN propagates so that missing data never reads as zero.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m: f64, z| {
            if m.is_nan() || z.is_nan() {
                f64::NAN
            } else {
                m.max(z.norm())
            }
        })
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.dims, o.dims);
        IndexedTensor {
            slots: self.slots.clone(),
            dims: self.dims.clone(),
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.dims, o.dims);
        IndexedTensor {
            slots: self.slots.clone(),
            dims: self.dims.clone(),
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn dump(&self) -> TensorDump {
        TensorDump {
            signature: self
                .slots
                .iter()
                .map(|s| format!("{}{}", s.kind.label(), if s.up { "^" } else { "_" }))
                .collect(),
            dims: self.dims.clone(),
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

/// Serialized tensor: index-signature header plus row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorDump {
    pub signature: Vec<String>,
    pub dims: Vec<usize>,
    pub data: Vec<[f64; 2]>,
}

/// Slots of a curvature-type tensor `T_{αβ̄μν̄}`.
pub fn curvature_slots() -> Vec<Slot> {
    vec![
        Slot::down(SlotKind::Unbarred),
        Slot::down(SlotKind::Barred),
        Slot::down(SlotKind::Unbarred),
        Slot::down(SlotKind::Barred),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_fn_is_row_major() {
        let t = IndexedTensor::from_fn(
            vec![Slot::down(SlotKind::Unbarred), Slot::up(SlotKind::Barred)],
            vec![2, 3],
            |i| C64::new((10 * i[0] + i[1]) as f64, 0.0),
        );
        assert_eq!(t.data[4], C64::new(11.0, 0.0));
        assert_eq!(*t.get(&[1, 2]), C64::new(12.0, 0.0));
        assert_eq!(t.indices()[5], vec![1, 2]);
    }

    #[test]
    fn conjugation_flips_bars() {
        let t = IndexedTensor::filled(
            vec![
                Slot::down(SlotKind::Unbarred),
                Slot::up(SlotKind::NormalBarred),
            ],
            vec![1, 1],
            C64::new(1.0, 2.0),
        );
        let c = t.conj();
        assert_eq!(c.slots[0].kind, SlotKind::Barred);
        assert_eq!(c.slots[1].kind, SlotKind::NormalUnbarred);
        assert_eq!(c.data[0], C64::new(1.0, -2.0));
        assert_eq!(c.conj(), t);
    }

    #[test]
    fn dump_has_header() {
        let t = IndexedTensor::filled(curvature_slots(), vec![1; 4], C64::new(0.5, -1.0));
        let d = t.dump();
        assert_eq!(d.signature, vec!["t_", "tb_", "t_", "tb_"]);
        assert_eq!(d.data, vec![[0.5, -1.0]]);
    }
}
