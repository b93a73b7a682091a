//! Local charts of real hypersurfaces and their admissible coframes.

mod chart;
mod frame;

pub use chart::{build_chart, Chart, ContactForm, HypersurfaceSpec, RawFrame};
pub use frame::{characteristic_field, levi_matrix, normalize_admissible, AdmissibleCoframe};
