//! Numerical model of a two-way QKD protocol built on pre- and post-selected
//! (two-state vector) measurements, with two eavesdropping analyses:
//! an intercept-resend attack in an arbitrary spin basis and a collective
//! attack with a four-dimensional probe.

pub mod collective;
pub mod error;
pub mod intercept;
pub mod montecarlo;
pub mod protocol;
pub mod qmath;
pub mod sampling;
pub mod sweep;
pub mod tolerances;

pub use error::{Error, Result};
pub use protocol::{
    abl_probability, initial_state, lift_to_channel, pauli_projector, r_basis, spin_projector,
    table1, MeasurementAxis, Outcome, ProtocolRound, RBasis, Subsequence, Table1,
};
pub use qmath::{
    hermitian_eigen, hermitian_eigenvalues, inner_product, tensor_product, trace_norm, Complex,
    ComplexMatrix, Eigen, HermitianOperator, StateVector,
};
pub use collective::{
    fidelity_from_ab, k_value, p_eve, probe_basis, probe_state, rho_pair, sweep_collective,
    CollectiveParams, CollectiveReport, CollectiveSweep, ProbeBasis, ProbeLabel, ProbeState,
};
pub use intercept::{
    attack_amplitude, euler_unitary, fg_uv_table, ir_report, p1, p2, p2_tilde, q_ratio_4,
    sweep_ir, symmetric_beta, xi_projector, FgUvTable, InterceptParams, IrReport,
    SymmetricBranch,
};
pub use montecarlo::{
    simulate_collective, simulate_honest, simulate_ir, FrequencyReport, Scenario, TrialBatch,
};
pub use sweep::{ArgmaxRecord, Provenance, SweepResult, SweepRow};
