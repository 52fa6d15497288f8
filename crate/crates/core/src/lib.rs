//! Exact amplitude-level simulation of quantum counting subroutines applied to
//! number-theoretic problems: a witness-counting primality test, a unitary
//! count of the primes below `N`, and a count of the ordered prime pairs
//! summing to an even `2N`.
//!
//! Every estimate produced here is paired with classical ground truth from
//! [`ntcore`] and with the analytic error bound it is supposed to satisfy.

pub mod counting;
pub mod error;
pub mod hl;
pub mod mainloop;
pub mod ntcore;
pub mod pnt;
pub mod primality;
pub mod statevec;

pub use num_complex::Complex64;

pub use counting::{CountEstimate, CountSetup, SincWeights};
pub use error::{QntError, Result};
pub use hl::{HlConfig, HlReport, HlSimulation, SPrime};
pub use mainloop::{ErrorBudget, LoopStatistics, WitnessTable};
pub use ntcore::{OddDecomposition, WitnessVerdict};
pub use pnt::{CheckVerdict, PntCheck, PntConfig, PntReport, PntSimulation, STilde};
pub use primality::{PrimalityConfig, PrimalityOutcome, Verdict};
pub use statevec::{
    Direction, EffectiveDim, Op, PhasePredicate, QState, Recording, RegId, RegisterLayout,
    StateDump, MAX_DIM_CEILING,
};
