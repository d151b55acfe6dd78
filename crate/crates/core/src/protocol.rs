//! The attack-free protocol: entangled preparation, Bob's Pauli measurement on
//! the channel qubit, and Alice's final measurement in the entangled R basis.
//!
//! Two-qubit states live on A⊗C (auxiliary ⊗ channel) with flat index `2A + C`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    apply, inner_product, tensor_product, Complex, ComplexMatrix, HermitianOperator, StateVector,
};
use crate::sampling::{rng_from_seed, sample_index};
use crate::tolerances::{EPS_DENOM, EPS_HERM, EPS_PROB};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasurementAxis {
    X,
    Y,
    Z,
}

impl MeasurementAxis {
    /// The two axes Bob chooses between.
    pub const PROTOCOL: [MeasurementAxis; 2] = [MeasurementAxis::X, MeasurementAxis::Z];

    /// Euler angles `(α, β)` at which the spin projector reduces to this Pauli axis.
    pub fn euler_angles(self) -> (f64, f64) {
        match self {
            MeasurementAxis::Z => (0.0, 0.0),
            MeasurementAxis::X => (0.0, FRAC_PI_2),
            MeasurementAxis::Y => (FRAC_PI_2, FRAC_PI_2),
        }
    }

    /// Eigenvector for `outcome`: Z gives |0⟩/|1⟩, X gives |±⟩, Y gives (|0⟩ ± i|1⟩)/√2.
    pub fn eigenstate(self, outcome: Outcome) -> StateVector {
        let s = FRAC_1_SQRT_2;
        let sign = outcome.value() as f64;
        let amps = match self {
            MeasurementAxis::Z => match outcome {
                Outcome::Plus => [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)],
                Outcome::Minus => [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
            },
            MeasurementAxis::X => [Complex::new(s, 0.0), Complex::new(sign * s, 0.0)],
            MeasurementAxis::Y => [Complex::new(s, 0.0), Complex::new(0.0, sign * s)],
        };
        StateVector::normalized(&amps).expect("unit eigenvector")
    }

    pub fn label(self) -> &'static str {
        match self {
            MeasurementAxis::X => "x",
            MeasurementAxis::Y => "y",
            MeasurementAxis::Z => "z",
        }
    }
}

impl fmt::Display for MeasurementAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A ±1 measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            _ => Err(Error::InvalidParameter(format!("outcome must be ±1, got {v}"))),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// `(1/√2)(|00⟩ + |11⟩)` on A⊗C.
pub fn initial_state() -> StateVector {
    let zero = StateVector::basis(2, 0).unwrap();
    let one = StateVector::basis(2, 1).unwrap();
    let sum = tensor_product(&zero, &zero)
        .unwrap()
        .add(&tensor_product(&one, &one).unwrap())
        .unwrap()
        .scale(Complex::new(FRAC_1_SQRT_2, 0.0));
    StateVector::normalized(sum.amps()).expect("normalized Bell state")
}

/// Alice's four entangled detection states `r₁ … r₄`.
#[derive(Debug, Clone, Copy)]
pub struct RBasis {
    vectors: [StateVector; 4],
}

impl RBasis {
    /// `r_index` is 1-based, matching the detection labels.
    pub fn get(&self, r_index: usize) -> Result<&StateVector> {
        if !(1..=4).contains(&r_index) {
            return Err(Error::IndexOutOfRange {
                what: "R-basis index",
                index: r_index,
            });
        }
        Ok(&self.vectors[r_index - 1])
    }

    pub fn vectors(&self) -> &[StateVector; 4] {
        &self.vectors
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut err: f64 = 0.0;
        for (j, u) in self.vectors.iter().enumerate() {
            for (k, v) in self.vectors.iter().enumerate() {
                let want = if j == k { 1.0 } else { 0.0 };
                let ip = inner_product(u, v).unwrap();
                err = err.max((ip - Complex::new(want, 0.0)).norm());
            }
        }
        err
    }

    /// `Σ|r_i⟩⟨r_i|`.
    pub fn resolution(&self) -> ComplexMatrix {
        self.vectors
            .iter()
            .map(|v| *HermitianOperator::projector(v).matrix())
            .reduce(|a, b| a.add(&b).unwrap())
            .unwrap()
    }
}

pub fn r_basis() -> RBasis {
    let h = FRAC_1_SQRT_2;
    let w = Complex::from_polar(0.5, FRAC_PI_4);
    let wc = w.conj();
    let z = Complex::new(0.0, 0.0);
    let re = |x: f64| Complex::new(x, 0.0);
    // amplitudes on |00⟩, |01⟩, |10⟩, |11⟩ (A first)
    let rows = [
        [re(h), w, wc, z],
        [re(h), -w, -wc, z],
        [z, wc, w, re(h)],
        [z, -wc, -w, re(h)],
    ];
    RBasis {
        vectors: rows.map(|r| StateVector::normalized(&r).expect("unit R-basis vector")),
    }
}

/// Closed-form qubit projector onto spin-up (`Plus`) or spin-down (`Minus`)
/// along the direction with polar angle `beta` and azimuth `alpha`.
pub fn spin_projector(alpha: f64, beta: f64, outcome: Outcome) -> HermitianOperator {
    let (s, c) = (beta / 2.0).sin_cos();
    let off = Complex::from_polar(s * c, -alpha);
    let m = match outcome {
        Outcome::Plus => [[Complex::new(c * c, 0.0), off], [off.conj(), Complex::new(s * s, 0.0)]],
        Outcome::Minus => [[Complex::new(s * s, 0.0), -off], [-off.conj(), Complex::new(c * c, 0.0)]],
    };
    let m = ComplexMatrix::from_rows(&[&m[0], &m[1]]).expect("2x2");
    HermitianOperator::new(m).expect("spin projector is Hermitian")
}

/// Projector onto the `outcome` eigenspace of the Pauli operator along `axis`.
pub fn pauli_projector(axis: MeasurementAxis, outcome: Outcome) -> HermitianOperator {
    let (alpha, beta) = axis.euler_angles();
    spin_projector(alpha, beta, outcome)
}

/// `I_A ⊗ P`: a channel-qubit operator acting on A⊗C.
pub fn lift_to_channel(p: &HermitianOperator) -> Result<HermitianOperator> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: p.dim(),
        });
    }
    let id = ComplexMatrix::identity(2)?;
    HermitianOperator::new(ComplexMatrix::kron(&id, p.matrix())?)
}

/// Pre/post-selected probability of outcome `which` of an intermediate measurement.
///
/// Returns `Ok(None)` when every branch has vanishing weight (denominator
/// below [`EPS_DENOM`]); an incomplete projector set is a contract violation.
pub fn abl_probability(
    pre_state: &StateVector,
    post_state: &StateVector,
    projectors: &[HermitianOperator],
    which: usize,
) -> Result<Option<f64>> {
    if which >= projectors.len() {
        return Err(Error::IndexOutOfRange {
            what: "projector",
            index: which,
        });
    }
    let dim = pre_state.dim();
    if post_state.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: post_state.dim(),
        });
    }
    let mut sum = ComplexMatrix::zeros(dim)?;
    for p in projectors {
        sum = sum.add(p.matrix())?;
    }
    let dev = sum.max_abs_diff(&ComplexMatrix::identity(dim)?);
    if dev > EPS_PROB {
        return Err(Error::IncompleteProjectors(dev));
    }
    let weights = projectors
        .iter()
        .map(|p| Ok(inner_product(post_state, &apply(p.matrix(), pre_state)?)?.norm_sqr()))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = weights.iter().sum();
    if total < EPS_DENOM {
        return Ok(None);
    }
    Ok(Some(weights[which] / total))
}

/// The deterministic outcome Bob must have obtained given Alice's detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Table1 {
    /// `entries[r - 1] = [σ_x outcome, σ_z outcome]`
    pub entries: [[Outcome; 2]; 4],
}

impl Table1 {
    pub fn outcome(&self, r_index: usize, axis: MeasurementAxis) -> Result<Outcome> {
        if !(1..=4).contains(&r_index) {
            return Err(Error::IndexOutOfRange {
                what: "R-basis index",
                index: r_index,
            });
        }
        let col = match axis {
            MeasurementAxis::X => 0,
            MeasurementAxis::Z => 1,
            MeasurementAxis::Y => {
                return Err(Error::InvalidParameter(
                    "Table 1 covers only the x and z axes".into(),
                ))
            }
        };
        Ok(self.entries[r_index - 1][col])
    }
}

/// Derives Table 1 from the ABL rule and checks every entry is deterministic.
pub fn table1() -> Result<Table1> {
    let psi = initial_state();
    let basis = r_basis();
    let mut entries = [[Outcome::Plus; 2]; 4];
    for (r_idx, post) in basis.vectors().iter().enumerate() {
        for (col, axis) in MeasurementAxis::PROTOCOL.iter().enumerate() {
            let set = Outcome::ALL
                .iter()
                .map(|&o| lift_to_channel(&pauli_projector(*axis, o)))
                .collect::<Result<Vec<_>>>()?;
            let p_plus = abl_probability(&psi, post, &set, 0)?;
            let p_minus = abl_probability(&psi, post, &set, 1)?;
            let (Some(p_plus), Some(p_minus)) = (p_plus, p_minus) else {
                return Err(Error::Table1Violation(format!(
                    "r{} / σ_{axis}: undefined ABL probability",
                    r_idx + 1
                )));
            };
            entries[r_idx][col] = if (p_plus - 1.0).abs() < EPS_HERM && p_minus.abs() < EPS_HERM {
                Outcome::Plus
            } else if (p_minus - 1.0).abs() < EPS_HERM && p_plus.abs() < EPS_HERM {
                Outcome::Minus
            } else {
                return Err(Error::Table1Violation(format!(
                    "r{} / σ_{axis}: p(+1) = {p_plus}, p(-1) = {p_minus}",
                    r_idx + 1
                )));
            };
        }
    }
    Ok(Table1 { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsequence {
    /// Key-generating detections r₁, r₄.
    S14,
    /// Eavesdropping-check detections r₂, r₃.
    S23,
}

impl Subsequence {
    pub fn of_detection(r_index: u8) -> Self {
        if r_index == 1 || r_index == 4 {
            Subsequence::S14
        } else {
            Subsequence::S23
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProtocolRound {
    pub bob_axis: MeasurementAxis,
    pub bob_outcome: Outcome,
    /// 1-based R-basis index.
    pub alice_detection: u8,
    pub subsequence: Subsequence,
}

impl ProtocolRound {
    pub fn consistent_with(&self, table: &Table1) -> bool {
        table
            .outcome(self.alice_detection as usize, self.bob_axis)
            .is_ok_and(|o| o == self.bob_outcome)
    }
}

/// Born-rule measurement of `lift(P(axis, ·))` on `state`; returns the outcome
/// and the collapsed (renormalized) state.
pub(crate) fn measure_channel<R: Rng + ?Sized>(
    rng: &mut R,
    state: &StateVector,
    projectors: &[HermitianOperator; 2],
) -> (Outcome, StateVector) {
    let branches = projectors.map(|p| apply(p.matrix(), state).expect("4-dim state"));
    let weights = branches.map(|b| b.norm_sqr());
    let k = sample_index(rng, &weights);
    let collapsed = branches[k].normalize().expect("sampled branch has weight");
    (Outcome::ALL[k], collapsed)
}

/// Born-rule detection in the R basis; returns the 1-based index.
pub(crate) fn detect_r<R: Rng + ?Sized>(rng: &mut R, basis: &RBasis, state: &StateVector) -> u8 {
    let weights = basis
        .vectors()
        .map(|r| inner_product(&r, state).expect("4-dim state").norm_sqr());
    sample_index(rng, &weights) as u8 + 1
}

pub(crate) fn lifted_pair(axis: MeasurementAxis) -> [HermitianOperator; 2] {
    Outcome::ALL.map(|o| lift_to_channel(&pauli_projector(axis, o)).expect("2-dim projector"))
}

/// One attack-free round drawn from a generator the caller owns.
pub fn honest_round_with<R: Rng + ?Sized>(rng: &mut R) -> ProtocolRound {
    let psi = initial_state();
    let bob_axis = if rng.random_bool(0.5) {
        MeasurementAxis::X
    } else {
        MeasurementAxis::Z
    };
    let (bob_outcome, after_bob) = measure_channel(rng, &psi, &lifted_pair(bob_axis));
    let alice_detection = detect_r(rng, &r_basis(), &after_bob);
    ProtocolRound {
        bob_axis,
        bob_outcome,
        alice_detection,
        subsequence: Subsequence::of_detection(alice_detection),
    }
}

/// One attack-free round with a generator seeded from `rng_seed`.
pub fn honest_round(rng_seed: u64) -> ProtocolRound {
    honest_round_with(&mut rng_from_seed(rng_seed))
}
