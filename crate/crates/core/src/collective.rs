//! Collective attack on the Bob → Alice leg.
//!
//! Eve entangles a four-dimensional probe with the channel qubit through
//! `U|0⟩|X⟩ = √F|0⟩|α⟩ + √(1−F)|1⟩|β⟩`, `U|1⟩|X⟩ = √(1−F)|0⟩|γ⟩ + √F|1⟩|δ⟩`
//! and keeps the probe unmeasured until the public discussion. The probe basis
//! is fixed by two angles `(a, b)`, and `F` follows from requiring the check
//! statistics to look like those of a depolarized channel.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{initial_state, r_basis, MeasurementAxis, Outcome};
use crate::qmath::{Complex, ComplexMatrix, HermitianOperator, StateVector};
use crate::sweep::{ArgmaxRecord, SweepResult, SweepRow};
use crate::tolerances::{EPS_FIDELITY_DENOM, EPS_HERM};

const ZERO: Complex = Complex::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectiveParams {
    pub a: f64,
    pub b: f64,
    pub fidelity: f64,
}

/// `cos b (1 − F) − (−1 + 2F − F cos a)`; zero on the constraint surface.
pub fn constraint_residual(a: f64, b: f64, fidelity: f64) -> f64 {
    b.cos() * (1.0 - fidelity) - (-1.0 + 2.0 * fidelity - fidelity * a.cos())
}

impl CollectiveParams {
    /// Checks angle ranges, `F ∈ [0, 1]`, and the fidelity constraint.
    pub fn new(a: f64, b: f64, fidelity: f64) -> Result<Self> {
        let p = Self::unconstrained(a, b, fidelity)?;
        let res = constraint_residual(a, b, fidelity);
        if res.abs() > EPS_HERM {
            return Err(Error::InvalidParameter(format!(
                "(a, b, F) = ({a}, {b}, {fidelity}) violates the fidelity constraint by {res:e}"
            )));
        }
        Ok(p)
    }

    /// `F` derived from `(a, b)`; `None` at the degenerate corner.
    pub fn from_angles(a: f64, b: f64) -> Result<Option<Self>> {
        check_angle("a", a)?;
        check_angle("b", b)?;
        Ok(fidelity_from_ab(a, b).map(|fidelity| Self { a, b, fidelity }))
    }

    /// Any `(a, b, F)` in range, without the constraint.
    pub fn unconstrained(a: f64, b: f64, fidelity: f64) -> Result<Self> {
        check_angle("a", a)?;
        check_angle("b", b)?;
        if !fidelity.is_finite() || !(0.0..=1.0).contains(&fidelity) {
            return Err(Error::InvalidParameter(format!("fidelity {fidelity} outside [0, 1]")));
        }
        Ok(Self { a, b, fidelity })
    }
}

fn check_angle(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::NonFinite("collective angle"));
    }
    if !(0.0..=PI).contains(&x) {
        return Err(Error::InvalidParameter(format!("{name} = {x} outside [0, π]")));
    }
    Ok(())
}

/// `F = (1 + cos b) / (2 + cos b − cos a)`, or `None` when the denominator vanishes.
pub fn fidelity_from_ab(a: f64, b: f64) -> Option<f64> {
    let den = 2.0 + b.cos() - a.cos();
    if den < EPS_FIDELITY_DENOM {
        return None;
    }
    let f = (1.0 + b.cos()) / den;
    // the exact value lies in [0, 1]; rounding can push it a few ulps outside
    if !(-EPS_HERM..=1.0 + EPS_HERM).contains(&f) {
        return None;
    }
    Some(f.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeBasis {
    pub alpha_e: StateVector,
    pub beta_e: StateVector,
    pub gamma_e: StateVector,
    pub delta_e: StateVector,
}

impl ProbeBasis {
    pub fn vectors(&self) -> [&StateVector; 4] {
        [&self.alpha_e, &self.beta_e, &self.gamma_e, &self.delta_e]
    }
}

pub fn probe_basis(p: &CollectiveParams) -> ProbeBasis {
    let (sa, ca) = p.a.sin_cos();
    let (sb, cb) = p.b.sin_cos();
    let v = |x: [f64; 4]| StateVector::from_real(&x).expect("4-dim");
    ProbeBasis {
        alpha_e: v([1.0, 0.0, 0.0, 0.0]),
        beta_e: v([0.0, cb, 0.0, sb]),
        gamma_e: v([0.0, 1.0, 0.0, 0.0]),
        delta_e: v([ca, 0.0, sa, 0.0]),
    }
}

/// Probe vector attached to each channel basis state, indexed `[c_in][c_out]`:
/// `U|c_in⟩|X⟩ = Σ_{c_out} |c_out⟩ ⊗ iso[c_in][c_out]`.
pub type Isometry = [[[Complex; 4]; 2]; 2];

pub fn eve_isometry(p: &CollectiveParams) -> Isometry {
    let basis = probe_basis(p);
    let sf = p.fidelity.sqrt();
    let sg = (1.0 - p.fidelity).sqrt();
    let scaled = |v: &StateVector, s: f64| {
        let mut out = [ZERO; 4];
        for (o, a) in out.iter_mut().zip(v.amps()) {
            *o = a * s;
        }
        out
    };
    [
        [scaled(&basis.alpha_e, sf), scaled(&basis.beta_e, sg)],
        [scaled(&basis.gamma_e, sg), scaled(&basis.delta_e, sf)],
    ]
}

/// `U (|χ⟩_C |X⟩_E)` for an arbitrary channel state `χ`, as `[c_out] → probe vector`.
pub fn apply_isometry(iso: &Isometry, channel: [Complex; 2]) -> [[Complex; 4]; 2] {
    let mut out = [[ZERO; 4]; 2];
    for (c_in, amp) in channel.iter().enumerate() {
        for (c_out, slot) in out.iter_mut().enumerate() {
            for (e, o) in slot.iter_mut().enumerate() {
                *o += amp * iso[c_in][c_out][e];
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProbeLabel {
    pub axis: MeasurementAxis,
    pub bob: Outcome,
    /// 1-based R-basis index.
    pub r_index: usize,
}

impl ProbeLabel {
    /// All sixteen labels, x before z, + before −, r₁ … r₄.
    pub fn all() -> Vec<ProbeLabel> {
        let mut out = Vec::with_capacity(16);
        for axis in MeasurementAxis::PROTOCOL {
            for bob in Outcome::ALL {
                for r_index in 1..=4 {
                    out.push(ProbeLabel { axis, bob, r_index });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeState {
    pub label: ProbeLabel,
    /// Sub-normalized probe vector.
    pub vector: StateVector,
}

fn protocol_axis(axis: MeasurementAxis) -> Result<()> {
    match axis {
        MeasurementAxis::Y => Err(Error::InvalidParameter("Bob measures only x or z".into())),
        _ => Ok(()),
    }
}

/// `⟨r_j|_AC (⟨i_t|ψ⟩)(U|i_t⟩|X⟩)`, evaluated from the state vectors.
pub fn probe_state(
    axis: MeasurementAxis,
    bob: Outcome,
    r_index: usize,
    p: &CollectiveParams,
) -> Result<ProbeState> {
    protocol_axis(axis)?;
    let basis = r_basis();
    let r = basis.get(r_index)?;
    let psi = initial_state();
    let e = axis.eigenstate(bob);
    // partial inner product over C leaves an (unnormalized) state of A
    let aux: [Complex; 2] =
        [0, 1].map(|a| (0..2).map(|c| e.amp(c).conj() * psi.amp(2 * a + c)).sum());
    let resent = apply_isometry(&eve_isometry(p), [e.amp(0), e.amp(1)]);
    let mut phi = [ZERO; 4];
    for a in 0..2 {
        for c in 0..2 {
            let w = r.amp(2 * a + c).conj() * aux[a];
            for (o, x) in phi.iter_mut().zip(&resent[c]) {
                *o += w * x;
            }
        }
    }
    Ok(ProbeState {
        label: ProbeLabel { axis, bob, r_index },
        vector: StateVector::new(&phi)?,
    })
}

/// `K(σ_t = i, r_j) = ‖φ(σ_t = i, r_j)‖²`.
pub fn k_value(axis: MeasurementAxis, bob: Outcome, r_index: usize, p: &CollectiveParams) -> Result<f64> {
    Ok(probe_state(axis, bob, r_index, p)?.vector.norm_sqr())
}

/// The printed check-detection K-values, valid for any `(a, b, F)`.
pub fn general_k_check(axis: MeasurementAxis, bob: Outcome, r_index: usize, p: &CollectiveParams) -> Result<f64> {
    protocol_axis(axis)?;
    if r_index != 2 && r_index != 3 {
        return Err(Error::IndexOutOfRange { what: "check-detection index", index: r_index });
    }
    let f = p.fidelity;
    // r₃ mirrors r₂ with Bob's outcome flipped
    let bob = if r_index == 3 { bob.flipped() } else { bob };
    let x_low = (1.0 - f * p.a.cos() - (1.0 - f) * p.b.cos()) / 16.0;
    let x_high = (3.0 + f * p.a.cos() + (1.0 - f) * p.b.cos()) / 16.0;
    Ok(match (axis, bob) {
        (MeasurementAxis::Z, Outcome::Plus) => (1.0 + f) / 8.0,
        (MeasurementAxis::Z, Outcome::Minus) => (1.0 - f) / 8.0,
        (_, Outcome::Plus) => x_low,
        (_, Outcome::Minus) => x_high,
    })
}

/// `(1 + F)/8` when Bob's outcome is the one Table 1 predicts for `r_j`, else `(1 − F)/8`.
pub fn constrained_k(axis: MeasurementAxis, bob: Outcome, r_index: usize, fidelity: f64) -> Result<f64> {
    let table = crate::protocol::table1()?;
    let consistent = table.outcome(r_index, axis)? == bob;
    Ok(if consistent { (1.0 + fidelity) / 8.0 } else { (1.0 - fidelity) / 8.0 })
}

/// Closed-form probe states, expanded in the probe basis.
pub mod probe_expansion {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    /// Coefficients on `(√F α, √(1−F) β, √(1−F) γ, √F δ)`.
    pub fn coefficients(axis: MeasurementAxis, bob: Outcome, r_index: usize) -> Result<[Complex; 4]> {
        protocol_axis(axis)?;
        let z = ZERO;
        let h = c(0.5, 0.0);
        let mi4 = c(1.0, -1.0) / 4.0;
        let pi4 = c(1.0, 1.0) / 4.0;
        let m8 = c(1.0, -1.0) / 8.0;
        let t8 = c(3.0, 1.0) / 8.0;
        use MeasurementAxis::{X, Z};
        use Outcome::{Minus, Plus};
        Ok(match (axis, bob, r_index) {
            (Z, Plus, 1) => [h, mi4, z, z],
            (Z, Minus, 1) => [z, z, pi4, z],
            (X, Plus, 1) => [t8, m8, t8, m8],
            (X, Minus, 1) => [m8, m8, -m8, -m8],
            (Z, Plus, 4) => [z, -pi4, z, z],
            (Z, Minus, 4) => [z, z, -mi4, h],
            (X, Plus, 4) => [-m8, m8, -m8, m8],
            (X, Minus, 4) => [m8, -t8, -m8, t8],
            (Z, Plus, 2) => [h, -mi4, z, z],
            (Z, Minus, 2) => [z, z, -pi4, z],
            (X, Plus, 2) => [m8, -m8, m8, -m8],
            (X, Minus, 2) => [t8, -m8, -t8, m8],
            (Z, Plus, 3) => [z, pi4, z, z],
            (Z, Minus, 3) => [z, z, mi4, h],
            (X, Plus, 3) => [m8, t8, m8, t8],
            (X, Minus, 3) => [-m8, -m8, m8, m8],
            (_, _, k) => return Err(Error::IndexOutOfRange { what: "R-basis index", index: k }),
        })
    }

    pub fn probe_state(axis: MeasurementAxis, bob: Outcome, r_index: usize, p: &CollectiveParams) -> Result<StateVector> {
        let coef = coefficients(axis, bob, r_index)?;
        let basis = probe_basis(p);
        let sf = p.fidelity.sqrt();
        let sg = (1.0 - p.fidelity).sqrt();
        let weights = [sf, sg, sg, sf];
        let mut out = StateVector::zeros(4)?;
        for ((v, k), w) in basis.vectors().iter().zip(coef).zip(weights) {
            out = out.add(&v.scale(k * w))?;
        }
        Ok(out)
    }
}

fn rho_for(r_index: usize, p: &CollectiveParams) -> Result<HermitianOperator> {
    let mut m = ComplexMatrix::zeros(4)?;
    for axis in MeasurementAxis::PROTOCOL {
        for bob in Outcome::ALL {
            let phi = probe_state(axis, bob, r_index, p)?.vector;
            m = m.add(&ComplexMatrix::outer(&phi, &phi)?)?;
        }
    }
    HermitianOperator::new(m)
}

/// Eve's (unnormalized) probe operators conditioned on Alice detecting r₁ and r₄.
pub fn rho_pair(p: &CollectiveParams) -> Result<(HermitianOperator, HermitianOperator)> {
    Ok((rho_for(1, p)?, rho_for(4, p)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollectiveReport {
    pub a: f64,
    pub b: f64,
    pub fidelity: f64,
    /// Probability that the S₂₃ check passes.
    pub p_ab: f64,
    /// Helstrom success probability for Eve on S₁₄.
    pub p_e: f64,
}

/// Sum of the four check-passing K-values.
pub fn p_ab_from_k(p: &CollectiveParams) -> Result<f64> {
    Ok(k_value(MeasurementAxis::X, Outcome::Minus, 2, p)?
        + k_value(MeasurementAxis::X, Outcome::Plus, 3, p)?
        + k_value(MeasurementAxis::Z, Outcome::Plus, 2, p)?
        + k_value(MeasurementAxis::Z, Outcome::Minus, 3, p)?)
}

pub fn report(p: &CollectiveParams) -> Result<CollectiveReport> {
    let (rho0, rho1) = rho_pair(p)?;
    let dist = rho0.sub(&rho1)?.trace_norm()?;
    Ok(CollectiveReport {
        a: p.a,
        b: p.b,
        fidelity: p.fidelity,
        p_ab: (1.0 + p.fidelity) / 2.0,
        p_e: 0.5 + 0.5 * dist,
    })
}

/// `P_E` and `P_AB` at `(a, b)`; `Ok(None)` where the fidelity is undefined.
pub fn p_eve(a: f64, b: f64) -> Result<Option<CollectiveReport>> {
    match CollectiveParams::from_angles(a, b)? {
        Some(p) => report(&p).map(Some),
        None => Ok(None),
    }
}

pub const COLLECTIVE_SWEEP_COLUMNS: [&str; 3] = ["F", "p_ab", "p_e"];
pub const COLLECTIVE_SLICE_COLUMNS: [&str; 2] = ["F", "p_e"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollectiveSweep {
    /// Coordinates `(n, m, a, b)`, values `F`, `p_ab`, `p_e`; row-major in `n`.
    pub grid: SweepResult,
    /// Fixed `b` at the argmax cell; coordinate `a`, values `F`, `p_e`.
    pub slice: SweepResult,
    pub invalid_cells: Vec<(usize, usize)>,
}

/// Evaluates `a = nπ/n_max`, `b = mπ/m_max` for `n = 0..=n_max`, `m = 0..=m_max`.
pub fn sweep_collective(n_max: usize, m_max: usize) -> Result<CollectiveSweep> {
    if n_max < 1 || m_max < 1 {
        return Err(Error::InvalidParameter(format!(
            "grid sizes must be at least 1, got ({n_max}, {m_max})"
        )));
    }
    let da = PI / n_max as f64;
    let db = PI / m_max as f64;
    let cells = (n_max + 1) * (m_max + 1);
    let rows: Vec<SweepRow> = (0..cells)
        .into_par_iter()
        .map(|k| {
            let (n, m) = (k / (m_max + 1), k % (m_max + 1));
            let a = (n as f64 * PI / n_max as f64).min(PI);
            let b = (m as f64 * PI / m_max as f64).min(PI);
            let values = match p_eve(a, b).expect("grid angles lie in [0, π]") {
                Some(r) => vec![Some(r.fidelity), Some(r.p_ab), Some(r.p_e)],
                None => vec![None; 3],
            };
            SweepRow { coords: vec![n as f64, m as f64, a, b], values }
        })
        .collect();
    let invalid_cells = rows
        .iter()
        .filter(|r| r.values[0].is_none())
        .map(|r| (r.coords[0] as usize, r.coords[1] as usize))
        .collect();
    let mut grid = SweepResult::new(
        ["n", "m", "a", "b"].map(String::from).to_vec(),
        COLLECTIVE_SWEEP_COLUMNS.map(String::from).to_vec(),
        vec![1.0, 1.0, da, db],
        rows,
    );
    let best = ArgmaxRecord::of_column(&grid, "p_e");
    let m_star = best.as_ref().map_or(0, |r| r.coords[1] as usize);
    if let Some(rec) = best {
        grid.argmax.push(rec);
    }

    let slice_rows = (0..=n_max)
        .map(|n| {
            let row = &grid.rows[n * (m_max + 1) + m_star];
            SweepRow { coords: vec![row.coords[2]], values: vec![row.values[0], row.values[2]] }
        })
        .collect();
    let mut slice = SweepResult::new(
        vec!["a".into()],
        COLLECTIVE_SLICE_COLUMNS.map(String::from).to_vec(),
        vec![da],
        slice_rows,
    );
    if let Some(rec) = ArgmaxRecord::of_column(&slice, "p_e") {
        slice.argmax.push(rec);
    }
    Ok(CollectiveSweep { grid, slice, invalid_cells })
}
