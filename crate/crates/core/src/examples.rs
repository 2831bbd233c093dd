//! Worked examples used by tests and by `fdp reproduce-example`.

use crate::error::Result;
use crate::model::{AlternativeFamily, MixtureModel};

/// The 15 p-values of the Benjamini–Hochberg (1995) worked example.
pub const EXAMPLE1: [f64; 15] = [
    0.0001, 0.0004, 0.0019, 0.0095, 0.0201, 0.0278, 0.0298, 0.0344, 0.0459, 0.3240, 0.4262, 0.5719, 0.6528, 0.7590,
    1.0,
];

/// Size of the synthetic second example.
pub const EXAMPLE2_M: usize = 1000;

/// a = 0.25 with one-sided normal alternatives at θ = 3.
pub fn example2_model() -> Result<MixtureModel> {
    MixtureModel::from_family(0.25, &AlternativeFamily::OneSidedNormal { theta: 3.0, n: 1.0 })
}
