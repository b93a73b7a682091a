//! Differential forms in a moving coframe and indexed tensors over the CR frame indices.

mod basis;
pub mod conformal;
mod form;
mod tensor;

pub use basis::{chart_pair, FrameBasis};
pub use form::{Form1, Form2, MovingFrame};
pub use tensor::{curvature_slots, IndexedTensor, Slot, SlotKind, TensorDump};
