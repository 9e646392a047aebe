//! Entanglement recovery for two identical qubits degraded by local noise.
//!
//! Two qubits start in the singlet on separated regions `A` and `B`, pass
//! through independent amplitude-damping, phase-damping or depolarizing
//! environments driven by a Lorentzian bath, and are then spatially deformed
//! so that their wave functions overlap on regions `L` and `R`. A spatially
//! localized projection (sLOCC) post-selects one particle per region and the
//! Wootters concurrence of the result measures the recovered entanglement.
//!
//! The crate is organised bottom-up:
//!
//! * [`nolabel`]: identical-particle kets without particle labels.
//! * [`channels`]: the decoherence function `p(t)`, Kraus sets and noisy evolution.
//! * [`protocol`]: deformation, sLOCC projection and the indistinguishability measure.
//! * [`entanglement`]: Wootters concurrence and closed-form curves per channel.
//! * [`oracle`]: an independent labeled (first-quantized) brute-force pipeline.
//! * [`cli`]: sweeps, figure presets and validation runs behind the `slocc` binary.

pub mod channels;
pub mod cli;
pub mod density;
pub mod entanglement;
mod error;
pub mod nolabel;
mod ode;
pub mod oracle;
pub mod protocol;

pub use channels::{
    evolve_ab, kraus_set, p_analytic, p_numeric, p_numeric_grid, ChannelKind, KrausSet, LorentzianBath,
};
pub use density::DensityMatrix4;
pub use entanglement::{
    c_infinity, concurrence_closed, delta_c, statistics_dual, success_probability_closed,
    wootters, ClosedForms, ConcurrenceValue,
};
pub use error::{Error, Result};
pub use nolabel::{
    apply_sp_map, normalize_ket, sp_inner, tp_inner, EnsembleState, Mode, SingleParticleKet,
    Slot, Spin, Statistics, TwoParticleKet,
};
pub use protocol::{
    deform, indistinguishability, slocc, spec_for_target_i, DeformationSpec, SloccOutcome,
};
