//! Intercept/resend attack: Eve measures the channel qubit along an arbitrary
//! spin direction, then resends the collapsed state to Bob.
//!
//! Everything here is first computed from raw amplitudes
//! `⟨r_j| (I⊗P(σ_t = i)) (I⊗P(σ_ξ = l)) |ψ⟩`; the printed closed forms live in
//! [`closed_form`] and are used as an independent regression oracle.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{initial_state, lift_to_channel, pauli_projector, r_basis, MeasurementAxis, Outcome};
use crate::qmath::{apply, inner_product, Complex, ComplexMatrix, HermitianOperator, StateVector};
use crate::sweep::{ArgmaxRecord, SweepResult, SweepRow};
use crate::tolerances::EPS_DENOM;

/// Euler angles of Eve's measurement direction. `gamma` never reaches the projectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterceptParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl InterceptParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::NonFinite("intercept angles"));
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn from_angles(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 0.0)
    }

    /// `(α, β) = (0, π/4)`.
    pub fn breidbart() -> Self {
        Self { alpha: 0.0, beta: std::f64::consts::FRAC_PI_4, gamma: 0.0 }
    }
}

pub fn euler_unitary(p: &InterceptParams) -> ComplexMatrix {
    let (s, c) = (p.beta / 2.0).sin_cos();
    let sum = (p.alpha + p.gamma) / 2.0;
    let diff = (p.alpha - p.gamma) / 2.0;
    let m00 = Complex::from_polar(c, -sum);
    let m01 = -Complex::from_polar(s, -diff);
    let m10 = Complex::from_polar(s, diff);
    let m11 = Complex::from_polar(c, sum);
    ComplexMatrix::from_rows(&[&[m00, m01], &[m10, m11]]).expect("2x2")
}

/// `U |k⟩⟨k| U†` with `k = 0` for ξ = +1 and `k = 1` for ξ = −1.
pub fn xi_projector(p: &InterceptParams, outcome: Outcome) -> HermitianOperator {
    let u = euler_unitary(p);
    let col = match outcome {
        Outcome::Plus => 0,
        Outcome::Minus => 1,
    };
    let m = ComplexMatrix::from_fn(2, |j, k| u.get(j, col) * u.get(k, col).conj()).expect("2x2");
    HermitianOperator::new(m).expect("rank-one projector is Hermitian")
}

fn axis_index(axis: MeasurementAxis) -> Result<usize> {
    match axis {
        MeasurementAxis::X => Ok(0),
        MeasurementAxis::Z => Ok(1),
        MeasurementAxis::Y => Err(Error::InvalidParameter("Bob measures only x or z".into())),
    }
}


/// Every attack amplitude at once, indexed `[r - 1][axis: x, z][bob: +, −][eve: +, −]`.
pub type AmplitudeGrid = [[[[Complex; 2]; 2]; 2]; 4];

pub fn amplitude_grid(p: &InterceptParams) -> AmplitudeGrid {
    let psi = initial_state();
    let basis = r_basis();
    let after_eve: [StateVector; 2] = Outcome::ALL.map(|l| {
        let pl = lift_to_channel(&xi_projector(p, l)).expect("2-dim projector");
        apply(pl.matrix(), &psi).expect("4-dim")
    });
    let mut grid = [[[[Complex::new(0.0, 0.0); 2]; 2]; 2]; 4];
    for (ti, axis) in MeasurementAxis::PROTOCOL.iter().enumerate() {
        for (ii, &i) in Outcome::ALL.iter().enumerate() {
            let pb = lift_to_channel(&pauli_projector(*axis, i)).expect("2-dim projector");
            for (li, state) in after_eve.iter().enumerate() {
                let after_bob = apply(pb.matrix(), state).expect("4-dim");
                for (j, r) in basis.vectors().iter().enumerate() {
                    grid[j][ti][ii][li] = inner_product(r, &after_bob).expect("4-dim");
                }
            }
        }
    }
    grid
}

/// `⟨r_j| P(σ_t = bob) P(σ_ξ = eve) |ψ⟩`, with both projectors acting on the channel qubit.
pub fn attack_amplitude(
    r_index: usize,
    axis: MeasurementAxis,
    bob: Outcome,
    eve: Outcome,
    p: &InterceptParams,
) -> Result<Complex> {
    let ti = axis_index(axis)?;
    let basis = r_basis();
    let r = basis.get(r_index)?;
    let pe = lift_to_channel(&xi_projector(p, eve))?;
    let pb = lift_to_channel(&pauli_projector(MeasurementAxis::PROTOCOL[ti], bob))?;
    let state = apply(pb.matrix(), &apply(pe.matrix(), &initial_state())?)?;
    inner_product(r, &state)
}

/// The sixteen outcome-marginalized weights.
///
/// `f`/`g` cover the check detections (r₂,x), (r₂,z), (r₃,x), (r₃,z) with Bob's
/// outcome +1/−1, summed over Eve's outcome. `u`/`v` cover the key detections
/// (r₁,x), (r₁,z), (r₄,x), (r₄,z) with Eve's outcome +1/−1, summed over Bob's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgUvTable {
    pub f: [f64; 4],
    pub g: [f64; 4],
    pub u: [f64; 4],
    pub v: [f64; 4],
}

impl FgUvTable {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for k in 0..4 {
            d = d
                .max((self.f[k] - other.f[k]).abs())
                .max((self.g[k] - other.g[k]).abs())
                .max((self.u[k] - other.u[k]).abs())
                .max((self.v[k] - other.v[k]).abs());
        }
        d
    }

    /// Eve's outcome relabeled: `u ↔ v`.
    pub fn eve_relabeled(&self) -> Self {
        Self { f: self.f, g: self.g, u: self.v, v: self.u }
    }

    pub fn entries(&self) -> impl Iterator<Item = f64> + '_ {
        self.f.iter().chain(&self.g).chain(&self.u).chain(&self.v).copied()
    }
}

// (r index, axis index) for each slot of the f/g and u/v families
const CHECK_SLOTS: [(usize, usize); 4] = [(1, 0), (1, 1), (2, 0), (2, 1)];
const KEY_SLOTS: [(usize, usize); 4] = [(0, 0), (0, 1), (3, 0), (3, 1)];

pub fn fg_uv_from_grid(grid: &AmplitudeGrid) -> FgUvTable {
    let mut t = FgUvTable { f: [0.0; 4], g: [0.0; 4], u: [0.0; 4], v: [0.0; 4] };
    for (k, &(j, ti)) in CHECK_SLOTS.iter().enumerate() {
        let cell = &grid[j][ti];
        t.f[k] = cell[0][0].norm_sqr() + cell[0][1].norm_sqr();
        t.g[k] = cell[1][0].norm_sqr() + cell[1][1].norm_sqr();
    }
    for (k, &(j, ti)) in KEY_SLOTS.iter().enumerate() {
        let cell = &grid[j][ti];
        t.u[k] = cell[0][0].norm_sqr() + cell[1][0].norm_sqr();
        t.v[k] = cell[0][1].norm_sqr() + cell[1][1].norm_sqr();
    }
    t
}

pub fn fg_uv_table(p: &InterceptParams) -> FgUvTable {
    fg_uv_from_grid(&amplitude_grid(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetricBranch {
    /// `β = arctan(1 / cos α)`
    Plus,
    /// `β = arctan(−1 / cos α)`
    Minus,
}

/// Principal-value solution of `cos²β = cos²α sin²β`; `π/2` where `cos α = 0`.
pub fn symmetric_beta(alpha: f64, branch: SymmetricBranch) -> f64 {
    let c = alpha.cos();
    if c.abs() < f64::EPSILON {
        return FRAC_PI_2;
    }
    match branch {
        SymmetricBranch::Plus => (1.0 / c).atan(),
        SymmetricBranch::Minus => (-1.0 / c).atan(),
    }
}

/// Residual `cos²β − cos²α sin²β` of the symmetric condition.
pub fn symmetric_residual(alpha: f64, beta: f64) -> f64 {
    beta.cos().powi(2) - alpha.cos().powi(2) * beta.sin().powi(2)
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den >= EPS_DENOM).then(|| num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrReport {
    pub params: InterceptParams,
    pub table: FgUvTable,
    /// Probability that Alice and Bob see no sign of the attack on S₂₃.
    pub p1: f64,
    /// Probability that Eve guesses Alice's key bit on S₁₄.
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
    /// Normalized detection weights of r₁ … r₄.
    pub q_ratios: [f64; 4],
    /// `g₁/(f₁+g₁)` and `f₂/(f₂+g₂)`.
    pub p1_components: [f64; 2],
    /// `Q₁ u₁/(u₁+v₁)` and `Q₂ v₃/(u₃+v₃)`.
    pub p2_components: [f64; 2],
}

/// `P₁`, `P₂` and their ingredients from any table (amplitude- or closed-form-derived).
pub fn ir_report_from_table(params: InterceptParams, t: FgUvTable) -> Option<IrReport> {
    let (f, g, u, v) = (t.f, t.g, t.u, t.v);
    let pass = [
        ratio(g[0], f[0] + g[0])?,
        ratio(f[1], f[1] + g[1])?,
        ratio(f[2], f[2] + g[2])?,
        ratio(g[3], f[3] + g[3])?,
    ];
    let p1 = pass.iter().sum::<f64>() / 4.0;
    let r_total: f64 = u.iter().sum::<f64>() + v.iter().sum::<f64>();
    let q1 = ratio(u[0] + v[0] + u[1] + v[1], r_total)?;
    let q2 = ratio(u[2] + v[2] + u[3] + v[3], r_total)?;
    let guess = [
        ratio(u[0], u[0] + v[0])?,
        ratio(u[1], u[1] + v[1])?,
        ratio(v[2], u[2] + v[2])?,
        ratio(v[3], u[3] + v[3])?,
    ];
    let p2 = q1 / 2.0 * (guess[0] + guess[1]) + q2 / 2.0 * (guess[2] + guess[3]);
    Some(IrReport {
        params,
        table: t,
        p1,
        p2,
        q1,
        q2,
        q_ratios: q_ratios_from_table(&t),
        p1_components: [pass[0], pass[1]],
        p2_components: [q1 * guess[0], q2 * guess[2]],
    })
}

pub fn ir_report(params: &InterceptParams) -> Option<IrReport> {
    ir_report_from_table(*params, fg_uv_table(params))
}

fn symmetric_params(alpha: f64, branch: SymmetricBranch) -> InterceptParams {
    InterceptParams { alpha, beta: symmetric_beta(alpha, branch), gamma: 0.0 }
}

/// Report on the plus branch of the symmetric condition.
pub fn symmetric_report(alpha: f64) -> Option<IrReport> {
    ir_report(&symmetric_params(alpha, SymmetricBranch::Plus))
}

pub fn p1(alpha: f64) -> Option<f64> {
    symmetric_report(alpha).map(|r| r.p1)
}

/// `P₂` with its `(Q₁, Q₂)` weights.
pub fn p2(alpha: f64) -> Option<(f64, f64, f64)> {
    symmetric_report(alpha).map(|r| (r.p2, r.q1, r.q2))
}

/// `u₁/(u₁+v₁)`, `u₂/(u₂+v₂)`, `v₃/(u₃+v₃)`, `v₄/(u₄+v₄)` on the minus branch.
pub fn p2_tilde_pieces(alpha: f64) -> Option<[f64; 4]> {
    let t = fg_uv_table(&symmetric_params(alpha, SymmetricBranch::Minus));
    let (u, v) = (t.u, t.v);
    Some([
        ratio(u[0], u[0] + v[0])?,
        ratio(u[1], u[1] + v[1])?,
        ratio(v[2], u[2] + v[2])?,
        ratio(v[3], u[3] + v[3])?,
    ])
}

/// Unweighted average of the minus-branch guess probabilities.
pub fn p2_tilde(alpha: f64) -> Option<f64> {
    p2_tilde_pieces(alpha).map(|p| p.iter().sum::<f64>() / 4.0)
}

fn q_ratios_from_table(t: &FgUvTable) -> [f64; 4] {
    let (f, g, u, v) = (t.f, t.g, t.u, t.v);
    let w = [
        u[0] + v[0] + u[1] + v[1],
        f[0] + g[0] + f[1] + g[1],
        f[2] + g[2] + f[3] + g[3],
        u[2] + v[2] + u[3] + v[3],
    ];
    let total: f64 = w.iter().sum();
    w.map(|x| x / total)
}

/// Relative detection weights of r₁ … r₄, normalized to sum 1.
pub fn q_ratio_4(p: &InterceptParams) -> [f64; 4] {
    q_ratios_from_table(&fg_uv_table(p))
}

pub const IR_SWEEP_COLUMNS: [&str; 8] = [
    "p1",
    "p1_comp_r2r3_a",
    "p1_comp_r2r3_b",
    "p2",
    "p2_comp_r1",
    "p2_comp_r4",
    "q1",
    "q2",
];

/// Tabulates the plus-branch curves on `alpha_points` uniform nodes of `[0, 2π)`.
pub fn sweep_ir(alpha_points: usize) -> Result<SweepResult> {
    if alpha_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "alpha_points must be at least 2, got {alpha_points}"
        )));
    }
    let step = 2.0 * PI / alpha_points as f64;
    let rows: Vec<SweepRow> = (0..alpha_points)
        .into_par_iter()
        .map(|k| {
            let alpha = k as f64 * step;
            let values = match symmetric_report(alpha) {
                Some(r) => vec![
                    Some(r.p1),
                    Some(r.p1_components[0]),
                    Some(r.p1_components[1]),
                    Some(r.p2),
                    Some(r.p2_components[0]),
                    Some(r.p2_components[1]),
                    Some(r.q1),
                    Some(r.q2),
                ],
                None => vec![None; IR_SWEEP_COLUMNS.len()],
            };
            SweepRow { coords: vec![alpha], values }
        })
        .collect();
    let mut result = SweepResult::new(
        vec!["alpha".into()],
        IR_SWEEP_COLUMNS.iter().map(|s| s.to_string()).collect(),
        vec![step],
        rows,
    );
    for col in ["p1", "p2"] {
        if let Some(rec) = ArgmaxRecord::of_column(&result, col) {
            result.argmax.push(rec);
        }
    }
    Ok(result)
}

/// The printed closed forms, transcribed for use as a regression oracle.
pub mod closed_form {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    /// Closed-form attack amplitude.
    pub fn amplitude(
        r_index: usize,
        axis: MeasurementAxis,
        bob: Outcome,
        eve: Outcome,
        alpha: f64,
        beta: f64,
    ) -> Result<Complex> {
        let ti = axis_index(axis)?;
        if !(1..=4).contains(&r_index) {
            return Err(Error::IndexOutOfRange { what: "R-basis index", index: r_index });
        }
        let (sb, cb) = beta.sin_cos();
        let (sa, ca) = alpha.sin_cos();
        let (s2, c2) = (beta / 2.0).sin_cos();
        let e = Complex::from_polar(1.0, -alpha);
        let ec = e.conj();
        let one_m_i = c(1.0, -1.0);
        let one_p_i = c(1.0, 1.0);
        let two = c(2.0, 0.0);
        let i = c(0.0, 1.0);
        let q = 0.25 * one_m_i * s2 * c2;

        // x-axis amplitudes
        let xa = |s1: f64, s_ca: f64, s_sa: f64| {
            (two + s1 * one_m_i * cb + s_ca * 2.0 * ca * sb + s_sa * one_p_i * sa * sb) / 8.0
        };
        let xb = (one_p_i * cb + one_m_i * sa * sb) / 8.0;
        let xc = -one_m_i * (i * cb + sa * sb) / 8.0;
        let xd = one_p_i * (cb + i * sa * sb) / 8.0;

        let val = match (r_index, ti, bob, eve) {
            (1, 0, Outcome::Plus, Outcome::Plus) => xa(1.0, 1.0, 1.0),
            (1, 0, Outcome::Plus, Outcome::Minus) => xa(-1.0, -1.0, -1.0),
            (1, 0, Outcome::Minus, Outcome::Plus) => xb,
            (1, 0, Outcome::Minus, Outcome::Minus) => xc,
            (1, 1, Outcome::Plus, Outcome::Plus) => 0.5 * c2 * (c2 + 0.5 * one_p_i * e * s2),
            (1, 1, Outcome::Plus, Outcome::Minus) => 0.5 * s2 * (s2 - 0.5 * one_p_i * e * c2),
            (1, 1, Outcome::Minus, Outcome::Plus) => q * ec,
            (1, 1, Outcome::Minus, Outcome::Minus) => -q * ec,

            (2, 0, Outcome::Plus, Outcome::Plus) => xd,
            (2, 0, Outcome::Plus, Outcome::Minus) => -xd,
            (2, 0, Outcome::Minus, Outcome::Plus) => xa(1.0, -1.0, -1.0),
            (2, 0, Outcome::Minus, Outcome::Minus) => xa(-1.0, 1.0, 1.0),
            (2, 1, Outcome::Plus, Outcome::Plus) => 0.5 * c2 * (c2 - 0.5 * one_p_i * e * s2),
            (2, 1, Outcome::Plus, Outcome::Minus) => 0.5 * s2 * (s2 + 0.5 * one_p_i * e * c2),
            (2, 1, Outcome::Minus, Outcome::Plus) => -q * ec,
            (2, 1, Outcome::Minus, Outcome::Minus) => q * ec,

            (3, 0, Outcome::Plus, Outcome::Plus) => xa(-1.0, 1.0, -1.0),
            (3, 0, Outcome::Plus, Outcome::Minus) => xa(1.0, -1.0, 1.0),
            (3, 0, Outcome::Minus, Outcome::Plus) => xc,
            (3, 0, Outcome::Minus, Outcome::Minus) => xb,
            (3, 1, Outcome::Plus, Outcome::Plus) => q * e,
            (3, 1, Outcome::Plus, Outcome::Minus) => -q * e,
            (3, 1, Outcome::Minus, Outcome::Plus) => 0.5 * s2 * (s2 + 0.5 * one_p_i * ec * c2),
            (3, 1, Outcome::Minus, Outcome::Minus) => 0.5 * c2 * (c2 - 0.5 * one_p_i * ec * s2),

            (4, 0, Outcome::Plus, Outcome::Plus) => -xd,
            (4, 0, Outcome::Plus, Outcome::Minus) => xd,
            (4, 0, Outcome::Minus, Outcome::Plus) => xa(-1.0, -1.0, 1.0),
            (4, 0, Outcome::Minus, Outcome::Minus) => xa(1.0, 1.0, -1.0),
            (4, 1, Outcome::Plus, Outcome::Plus) => -q * e,
            (4, 1, Outcome::Plus, Outcome::Minus) => q * e,
            (4, 1, Outcome::Minus, Outcome::Plus) => 0.5 * s2 * (s2 - 0.5 * one_p_i * ec * c2),
            (4, 1, Outcome::Minus, Outcome::Minus) => 0.5 * c2 * (c2 + 0.5 * one_p_i * ec * s2),
            _ => unreachable!("indices validated above"),
        };
        Ok(val)
    }

    /// The sixteen marginal weights in trigonometric form, for arbitrary `(α, β)`.
    pub fn fg_uv(alpha: f64, beta: f64) -> FgUvTable {
        let (sb, cb) = beta.sin_cos();
        let (sa, ca) = alpha.sin_cos();
        let (s2a, c2a) = (2.0 * alpha).sin_cos();
        let (s2b, c2b) = (2.0 * beta).sin_cos();
        let ch2 = (beta / 2.0).cos().powi(2);
        let sh2 = (beta / 2.0).sin().powi(2);

        let f1 = (cb * cb + sa * sa * sb * sb) / 16.0;
        let g1 = (4.0 + 2.0 * cb * cb - 4.0 * ca * cb * sb + (3.0 + c2a + 2.0 * s2a) * sb * sb) / 32.0;
        let f2 = (7.0 + c2b - 2.0 * (ca + sa) * s2b) / 32.0;
        let g2 = sb * sb / 16.0;
        let f3 = (4.0 + 2.0 * cb * cb - 4.0 * ca * cb * sb + (3.0 + c2a - 2.0 * s2a) * sb * sb) / 32.0;
        let g3 = f1;
        let f4 = g2;
        let g4 = (7.0 + c2b + 2.0 * (sa - ca) * s2b) / 32.0;

        let u1 = (2.0 * cb + 2.0 * (1.0 + ca * sb) * (2.0 + sa * sb) + ca * s2b) / 32.0;
        let v1 = (-2.0 * cb + 2.0 * (1.0 - ca * sb) * (2.0 - sa * sb) + ca * s2b) / 32.0;
        let u2 = ch2 * (2.0 + (ca + sa) * sb) / 8.0;
        let v2 = -sh2 * (-2.0 + (ca + sa) * sb) / 8.0;
        let u3 = (-2.0 * cb - 2.0 * (ca * sb - 1.0) * (2.0 + sa * sb) + ca * s2b) / 32.0;
        let v3 = (2.0 * cb - 2.0 * (1.0 + ca * sb) * (sa * sb - 2.0) + ca * s2b) / 32.0;
        let u4 = sh2 * (2.0 + (sa - ca) * sb) / 8.0;
        let v4 = ch2 * (2.0 + (ca - sa) * sb) / 8.0;

        FgUvTable {
            f: [f1, f2, f3, f4],
            g: [g1, g2, g3, g4],
            u: [u1, u2, u3, u4],
            v: [v1, v2, v3, v4],
        }
    }

    /// Below this `|cos α|` the `sec α` substitutions are not evaluated.
    pub const SEC_CUTOFF: f64 = 1e-6;

    struct SecTerms {
        c: f64,
        t: f64,
        sec: f64,
        s: f64,
        at: f64,
    }

    fn sec_terms(alpha: f64) -> Option<SecTerms> {
        let c = alpha.cos();
        if c.abs() < SEC_CUTOFF {
            return None;
        }
        let sec = 1.0 / c;
        Some(SecTerms { c, t: alpha.tan(), sec, s: (1.0 + sec * sec).sqrt(), at: sec.atan() })
    }

    /// The weights with `β = arctan(1/cos α)` substituted.
    pub fn symmetric_plus(alpha: f64) -> Option<FgUvTable> {
        let SecTerms { c, t, sec, s, at } = sec_terms(alpha)?;
        let (s2a, c2a) = (2.0 * alpha).sin_cos();
        let f1 = 1.0 / (8.0 * (3.0 + c2a));
        let g1 = (4.0 + c2a + s2a) / (8.0 * (3.0 + c2a));
        let f2 = (7.0 + (2.0 * at).cos() - 2.0 * (alpha.cos() + alpha.sin()) * (2.0 * at).sin()) / 32.0;
        let f3 = (4.0 + c2a - s2a) / (8.0 * (3.0 + c2a));
        let ch2 = (at / 2.0).cos().powi(2);
        let sh2 = (at / 2.0).sin().powi(2);
        let u1 = (2.0 + (3.0 + t) / s + (1.0 + t) / (s * s)) / 16.0;
        let v1 = (2.0 - (3.0 + t) / s + (1.0 + t) / (s * s)) / 16.0;
        let u2 = ch2 * (2.0 + (1.0 + t) / s) / 8.0;
        let v2 = -sh2 * (-2.0 + (1.0 + t) / s) / 8.0;
        let u3 = (-(s - 1.0) * (t - 3.0) + sec * sec * (-3.0 + 2.0 * s + t)) / (16.0 * s.powi(3));
        let v3 = (4.0 + 6.0 / s + c * (2.0 * at).sin() - 2.0 * (1.0 + s) * t / (s * s)) / 32.0;
        let u4 = sh2 * (2.0 + (t - 1.0) / s) / 8.0;
        let v4 = ch2 * (2.0 + (1.0 - t) / s) / 8.0;
        Some(FgUvTable {
            f: [f1, f2, f3, f1],
            g: [g1, f1, f1, g1],
            u: [u1, u2, u3, u4],
            v: [v1, v2, v3, v4],
        })
    }

    /// `(ũ, ṽ)` with `β = arctan(−1/cos α)` substituted.
    pub fn symmetric_minus_uv(alpha: f64) -> Option<([f64; 4], [f64; 4])> {
        let SecTerms { t, sec, s, at, .. } = sec_terms(alpha)?;
        let s3 = 16.0 * s.powi(3);
        let sec2 = sec * sec;
        let ch2 = (at / 2.0).cos().powi(2);
        let sh2 = (at / 2.0).sin().powi(2);
        let u1 = (2.0 - (1.0 + t) / s + (t - 1.0) / (s * s)) / 16.0;
        let v1 = ((1.0 + s) * (1.0 + t) + sec2 * (1.0 + 2.0 * s + t)) / s3;
        let u2 = ch2 * (2.0 - (1.0 + t) / s) / 8.0;
        let v2 = sh2 * (2.0 + (1.0 + t) / s) / 8.0;
        let u3 = (sec2 * (1.0 + 2.0 * s - t) - (1.0 + s) * (t - 1.0)) / s3;
        let v3 = ((1.0 - s) * (t - 1.0) + sec2 * (-1.0 + 2.0 * s + t)) / s3;
        let u4 = sh2 * (2.0 + (1.0 - t) / s) / 8.0;
        let v4 = ch2 * (2.0 + (t - 1.0) / s) / 8.0;
        Some(([u1, u2, u3, u4], [v1, v2, v3, v4]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn p(alpha: f64, beta: f64) -> InterceptParams {
        InterceptParams::from_angles(alpha, beta).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn euler_examples() {
        let id = ComplexMatrix::identity(2).unwrap();
        assert!(euler_unitary(&p(0.0, 0.0)).max_abs_diff(&id) < 1e-15);
        let want = ComplexMatrix::from_rows(&[&[c(0.0, 0.0), c(-1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]])
            .unwrap();
        assert!(euler_unitary(&p(0.0, PI)).max_abs_diff(&want) < 1e-15);
        for &(a, b, g) in &[(0.3, 1.7, 2.9), (5.0, 0.1, 11.0), (12.0, 3.3, 0.4)] {
            let u = euler_unitary(&InterceptParams::new(a, b, g).unwrap());
            assert!(u.mul(&u.adjoint()).unwrap().max_abs_diff(&id) < 1e-12);
        }
    }

    #[test]
    fn xi_projector_special_angles() {
        let cases = [
            ((0.0, 0.0), MeasurementAxis::Z),
            ((0.0, FRAC_PI_2), MeasurementAxis::X),
            ((FRAC_PI_2, FRAC_PI_2), MeasurementAxis::Y),
        ];
        for ((a, b), axis) in cases {
            for o in Outcome::ALL {
                let got = xi_projector(&p(a, b), o);
                assert!(got.matrix().max_abs_diff(pauli_projector(axis, o).matrix()) < 1e-15);
            }
        }
    }

    #[test]
    fn xi_projector_matches_spin_closed_form_and_ignores_gamma() {
        for &(a, b) in &[(0.4, 2.2), (3.9, 5.1), (7.0, 0.2)] {
            for o in Outcome::ALL {
                let base = xi_projector(&InterceptParams::new(a, b, 0.0).unwrap(), o);
                let cf = crate::protocol::spin_projector(a, b, o);
                assert!(base.matrix().max_abs_diff(cf.matrix()) < 1e-15);
                let m = base.matrix().mul(base.matrix()).unwrap();
                assert!(m.max_abs_diff(base.matrix()) < 1e-12);
                for g in [1.0, 3.0, 10.0] {
                    let other = xi_projector(&InterceptParams::new(a, b, g).unwrap(), o);
                    assert!(other.matrix().max_abs_diff(base.matrix()) <= 1e-15);
                }
            }
        }
    }

    #[test]
    fn amplitude_examples() {
        let a = attack_amplitude(1, MeasurementAxis::X, Outcome::Plus, Outcome::Plus, &p(0.0, 0.0))
            .unwrap();
        assert!((a - c(3.0, -1.0) / 8.0).norm() < 1e-15);
        let (al, be) = (0.7, 1.9);
        let got =
            attack_amplitude(1, MeasurementAxis::Z, Outcome::Minus, Outcome::Plus, &p(al, be)).unwrap();
        let want = 0.25 * c(1.0, -1.0) * Complex::from_polar(1.0, al) * (be / 2.0).sin() * (be / 2.0).cos();
        assert!((got - want).norm() < 1e-15);
        let plus =
            attack_amplitude(2, MeasurementAxis::X, Outcome::Plus, Outcome::Plus, &p(al, be)).unwrap();
        let minus =
            attack_amplitude(2, MeasurementAxis::X, Outcome::Plus, Outcome::Minus, &p(al, be)).unwrap();
        assert!((plus + minus).norm() < 1e-15);
        assert!(attack_amplitude(1, MeasurementAxis::Y, Outcome::Plus, Outcome::Plus, &p(0.0, 0.0)).is_err());
        assert!(attack_amplitude(5, MeasurementAxis::X, Outcome::Plus, Outcome::Plus, &p(0.0, 0.0)).is_err());
    }

    #[test]
    fn probabilities_sum_to_one() {
        for &(a, b) in &[(0.0, 0.0), (1.1, 2.3), (4.0, 5.5)] {
            let grid = amplitude_grid(&p(a, b));
            let total: f64 = grid.iter().flatten().flatten().flatten().map(|z| 0.5 * z.norm_sqr()).sum();
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn breidbart_table() {
        let t = fg_uv_table(&InterceptParams::breidbart());
        let (lo, hi) = (1.0 / 32.0, 5.0 / 32.0);
        let want_f = [lo, hi, hi, lo];
        let want_g = [hi, lo, lo, hi];
        let up = (5.0 + 3.0 * SQRT2) / 32.0;
        let dn = (5.0 - 3.0 * SQRT2) / 32.0;
        for k in 0..4 {
            assert!((t.f[k] - want_f[k]).abs() < 1e-15);
            assert!((t.g[k] - want_g[k]).abs() < 1e-15);
        }
        for (k, want) in [up, up, dn, dn].iter().enumerate() {
            assert!((t.u[k] - want).abs() < 1e-15);
        }
        for (k, want) in [dn, dn, up, up].iter().enumerate() {
            assert!((t.v[k] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn alpha_pi_table() {
        let t = fg_uv_table(&p(PI, FRAC_PI_4));
        assert!((t.f[0] - 1.0 / 32.0).abs() < 1e-15);
        assert!((t.g[0] - 9.0 / 32.0).abs() < 1e-15);
        let r = ir_report(&p(PI, FRAC_PI_4)).unwrap();
        assert!((r.p1 - 0.9).abs() < 1e-12);
        let want = [3.0 / 16.0, 5.0 / 16.0, 5.0 / 16.0, 3.0 / 16.0];
        for k in 0..4 {
            assert!((r.q_ratios[k] - want[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn table_entries_bounded() {
        for &(a, b) in &[(0.2, 0.3), (2.0, 4.0), (9.0, 1.0)] {
            let t = fg_uv_table(&p(a, b));
            assert!(t.entries().all(|x| (-1e-15..=0.5 + 1e-15).contains(&x)));
            for k in 0..4 {
                assert!(t.f[k] + t.g[k] <= 0.5 + 1e-15);
                assert!(t.u[k] + t.v[k] <= 0.5 + 1e-15);
            }
        }
    }

    #[test]
    fn symmetric_beta_examples() {
        assert!((symmetric_beta(0.0, SymmetricBranch::Plus) - FRAC_PI_4).abs() < 1e-15);
        assert!((symmetric_beta(PI, SymmetricBranch::Plus) + FRAC_PI_4).abs() < 1e-15);
        assert_eq!(symmetric_beta(FRAC_PI_2, SymmetricBranch::Plus), FRAC_PI_2);
        for k in 0..720 {
            let a = k as f64 * 2.0 * PI / 720.0;
            for br in [SymmetricBranch::Plus, SymmetricBranch::Minus] {
                assert!(symmetric_residual(a, symmetric_beta(a, br)).abs() < 1e-12, "α={a}");
            }
        }
    }

    #[test]
    fn breidbart_probabilities() {
        let r = symmetric_report(0.0).unwrap();
        assert!((r.p1 - 5.0 / 6.0).abs() < 1e-12);
        assert!((r.p2 - (5.0 + 3.0 * SQRT2) / 10.0).abs() < 1e-12);
        assert!((r.q1 / r.q2 - 1.0).abs() < 1e-12);
        // the detection weights come out 5:3:3:5, not uniform
        let want = [5.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 5.0 / 16.0];
        for (q, w) in r.q_ratios.iter().zip(want) {
            assert!((q - w).abs() < 1e-12, "{:?}", r.q_ratios);
        }
    }

    #[test]
    fn p2_tilde_identity_and_pi_pieces() {
        assert!((p2_tilde(0.3).unwrap() - 0.5).abs() < 1e-10);
        let pieces = p2_tilde_pieces(PI).unwrap();
        let lo = (3.0 - SQRT2) / 6.0;
        let hi = (3.0 + SQRT2) / 6.0;
        for (got, want) in pieces.iter().zip([lo, hi, lo, hi]) {
            assert!((got - want).abs() < 1e-12, "{pieces:?}");
        }
    }

    #[test]
    fn half_turn_in_beta_relabels_eve() {
        for &(a, b) in &[(0.0, FRAC_PI_4), (1.3, 0.8), (PI, -FRAC_PI_4), (4.4, 2.0)] {
            let t = fg_uv_table(&p(a, b));
            let shifted = fg_uv_table(&p(a, b + PI));
            assert!(shifted.max_abs_diff(&t.eve_relabeled()) < 1e-14);
            let r = ir_report(&p(a, b)).unwrap();
            let rs = ir_report(&p(a, b + PI)).unwrap();
            assert!((r.p1 - rs.p1).abs() < 1e-14);
            assert!((r.p2 + rs.p2 - 1.0).abs() < 1e-14);
        }
        // (π, 7π/4) and (π, 3π/4): P₁ agrees, P₂ agrees after relabeling
        let a = ir_report(&p(PI, 7.0 * FRAC_PI_4)).unwrap();
        let b = ir_report(&p(PI, 3.0 * FRAC_PI_4)).unwrap();
        assert!((a.p1 - b.p1).abs() < 1e-14);
        assert!((a.p2.max(1.0 - a.p2) - b.p2.max(1.0 - b.p2)).abs() < 1e-14);
    }

    #[test]
    fn both_branches_have_period_pi() {
        for k in 0..64 {
            let a = 0.05 + k as f64 * 0.1;
            for br in [SymmetricBranch::Plus, SymmetricBranch::Minus] {
                let here = fg_uv_table(&symmetric_params(a, br));
                let there = fg_uv_table(&symmetric_params(a + PI, br));
                assert!(here.max_abs_diff(&there) < 1e-14, "α={a} {br:?}");
            }
        }
    }

    #[test]
    fn closed_form_amplitudes_match() {
        for &(a, b) in &[(0.0, 0.0), (0.3, 1.2), (2.5, 4.0), (6.0, 10.0), (11.0, 0.7)] {
            let grid = amplitude_grid(&p(a, b));
            for j in 1..=4 {
                for (ti, axis) in MeasurementAxis::PROTOCOL.iter().enumerate() {
                    for (ii, &i) in Outcome::ALL.iter().enumerate() {
                        for (li, &l) in Outcome::ALL.iter().enumerate() {
                            let cf = closed_form::amplitude(j, *axis, i, l, a, b).unwrap();
                            let d = (cf - grid[j - 1][ti][ii][li]).norm();
                            assert!(d < 1e-12, "r{j} {axis} {i} {l}: {d}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn closed_form_weights_match() {
        for &(a, b) in &[(0.0, FRAC_PI_4), (0.3, 1.2), (2.5, 4.0), (6.0, 10.0)] {
            let d = closed_form::fg_uv(a, b).max_abs_diff(&fg_uv_table(&p(a, b)));
            assert!(d < 1e-12, "({a},{b}): {d}");
        }
    }

    #[test]
    fn substituted_forms_match() {
        for &a in &[0.0, 0.3, 1.0, 2.0, 2.5, PI, 3.5, 4.5, 5.9] {
            let plus = fg_uv_table(&symmetric_params(a, SymmetricBranch::Plus));
            let cf = closed_form::symmetric_plus(a).unwrap();
            assert!(plus.max_abs_diff(&cf) < 1e-12, "α={a}");
            let minus = fg_uv_table(&symmetric_params(a, SymmetricBranch::Minus));
            let (u, v) = closed_form::symmetric_minus_uv(a).unwrap();
            for k in 0..4 {
                assert!((minus.u[k] - u[k]).abs() < 1e-12 && (minus.v[k] - v[k]).abs() < 1e-12, "α={a}");
            }
        }
        assert!(closed_form::symmetric_plus(FRAC_PI_2).is_none());
    }

    #[test]
    fn sweep_shape_and_argmax() {
        let s = sweep_ir(720).unwrap();
        assert_eq!(s.rows.len(), 720);
        assert_eq!(s.columns.len(), IR_SWEEP_COLUMNS.len());
        let p1 = s.argmax_of("p1").unwrap();
        assert_eq!(p1.index, 0);
        assert!((p1.value - 5.0 / 6.0).abs() < 1e-12);
        let p2 = s.argmax_of("p2").unwrap();
        assert_eq!(p2.index, 0);
        assert!((p2.value - (5.0 + 3.0 * SQRT2) / 10.0).abs() < 1e-12);
        assert!(sweep_ir(1).is_err());
    }
}
