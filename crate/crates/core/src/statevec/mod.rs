//! Dense complex state vectors over ordered products of qudit registers.
//!
//! Registers have arbitrary dimension and are stored row-major: the first
//! register in a [`RegisterLayout`] is the outermost (slowest varying) index.
//! Every unitary needed by the counting pipelines is provided here, either as a
//! direct method on [`QState`] or as a recordable [`Op`].

mod layout;
mod ops;
mod state;

pub use layout::{RegId, Register, RegisterLayout, MAX_DIM_CEILING};
pub use ops::{run_adjoint, Direction, EffectiveDim, Op, PhasePredicate, Recording};
pub use state::{sample_index as sample_from, QState, StateDump};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stream `index` derived from `seed`.
///
/// Streams with different indices are independent, and adding streams never
/// perturbs the existing ones, so repetition counts can change freely.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
