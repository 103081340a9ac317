//! Built-in models used by the simulation studies.

use alloc::vec;

use crate::model::MarSpec;

/// `0.5 N(-0.5 y_{t-1}, 1) + 0.5 N(y_{t-1}, 4)`; the second component is a unit-root AR(1).
pub fn model_a() -> MarSpec {
    MarSpec::new(vec![0.5, 0.5], vec![0.0, 0.0], vec![vec![-0.5], vec![1.0]], vec![1.0, 2.0])
        .expect("model A is valid")
}

/// Three components with orders (2, 1, 1), weights 0.5/0.3/0.2 and scales 1/2/4.
pub fn model_b() -> MarSpec {
    MarSpec::new(
        vec![0.5, 0.3, 0.2],
        vec![0.0, 0.0, 0.0],
        vec![vec![-0.5, 0.5], vec![-0.4], vec![1.0]],
        vec![1.0, 2.0, 4.0],
    )
    .expect("model B is valid")
}

/// Series length used with [`model_a`].
pub const MODEL_A_LEN: usize = 300;
/// Series length used with [`model_b`].
pub const MODEL_B_LEN: usize = 600;
