//! Sequential Born-rule simulation of whole protocol rounds.
//!
//! The sampler works only from state vectors and measurement operators: each
//! batch first builds the measurement tree (branch weights and collapsed
//! states for every prefix of outcomes), then draws one path per trial. The
//! closed-form f/g/u/v and K expressions are never consulted while sampling;
//! the analytic modules only supply the expected values the counts are compared
//! against.
//!
//! Trials are processed in chunks of [`CHUNK_TRIALS`]; chunk `k` draws from
//! its own generator seeded with [`chunk_seed`]`(seed, k)`, so the merged counts
//! are the same for any number of workers.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::collective::{apply_isometry, eve_isometry, k_value, CollectiveParams};
use crate::error::{Error, Result};
use crate::intercept::{amplitude_grid, q_ratio_4, xi_projector, InterceptParams};
use crate::protocol::{
    initial_state, lift_to_channel, lifted_pair, r_basis, table1, MeasurementAxis, Outcome, Table1,
};
use crate::qmath::{apply, inner_product, Complex, StateVector};
use crate::sampling::{chunk_seed, rng_from_seed, sample_index, ProtocolRng, CHUNK_TRIALS};
use crate::tolerances::MC_SIGMA_LIMIT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Scenario {
    Honest,
    InterceptResend(InterceptParams),
    Collective(CollectiveParams),
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::Honest => "honest",
            Scenario::InterceptResend(_) => "intercept_resend",
            Scenario::Collective(_) => "collective",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialBatch {
    pub scenario: Scenario,
    pub trials: u64,
    pub seed: u64,
}

impl TrialBatch {
    pub fn new(scenario: Scenario, trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(Self { scenario, trials, seed })
    }

    pub fn run(&self) -> Result<FrequencyReport> {
        match self.scenario {
            Scenario::Honest => simulate_honest(self.trials, self.seed),
            Scenario::InterceptResend(p) => simulate_ir(&p, self.trials, self.seed),
            Scenario::Collective(p) => simulate_collective(&p, self.trials, self.seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CellKey {
    pub axis: MeasurementAxis,
    pub bob: Outcome,
    /// Eve's outcome; only present for the intercept/resend scenario.
    pub eve: Option<Outcome>,
    pub r_index: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub key: CellKey,
    pub count: u64,
    pub observed: f64,
    pub expected: f64,
    /// `|observed − expected| / σ` with `σ = √(p(1 − p)/N)`.
    pub sigma_deviation: f64,
}

/// A derived frequency compared against its analytic value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedCheck {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    /// Trials the frequency is conditioned on.
    pub sample_size: u64,
    pub sigma: f64,
    pub sigma_deviation: f64,
    pub pass: bool,
}

impl NamedCheck {
    pub fn new(name: &str, hits: u64, sample_size: u64, expected: f64) -> Self {
        let observed = if sample_size == 0 { 0.0 } else { hits as f64 / sample_size as f64 };
        let sigma = binomial_sigma(expected, sample_size);
        let sigma_deviation = sigma_deviation(observed, expected, sigma);
        Self {
            name: name.to_string(),
            observed,
            expected,
            sample_size,
            sigma,
            sigma_deviation,
            pass: sigma_deviation <= MC_SIGMA_LIMIT,
        }
    }

    /// Deviation of the observed frequency from another reference value, in this check's σ.
    pub fn deviation_from(&self, reference: f64) -> f64 {
        sigma_deviation(self.observed, reference, binomial_sigma(reference, self.sample_size))
    }
}

fn binomial_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

fn sigma_deviation(observed: f64, expected: f64, sigma: f64) -> f64 {
    let diff = (observed - expected).abs();
    if sigma > 0.0 {
        diff / sigma
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyReport {
    pub scenario: Scenario,
    pub trials: u64,
    pub seed: u64,
    pub cells: Vec<Cell>,
    pub max_sigma_deviation: f64,
    pub checks: Vec<NamedCheck>,
    pub table1_violations: u64,
}

impl FrequencyReport {
    pub fn check(&self, name: &str) -> Option<&NamedCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn cell(&self, key: &CellKey) -> Option<&Cell> {
        self.cells.iter().find(|c| &c.key == key)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn total_count(&self) -> u64 {
        self.cells.iter().map(|c| c.count).sum()
    }

    pub fn total_expected(&self) -> f64 {
        self.cells.iter().map(|c| c.expected).sum()
    }
}

/// Runs `draw` once per trial across chunks and sums the per-cell counts.
fn run_chunks<F>(trials: u64, seed: u64, n_cells: usize, draw: F) -> Vec<u64>
where
    F: Fn(&mut ProtocolRng) -> usize + Sync,
{
    let n_chunks = trials.div_ceil(CHUNK_TRIALS);
    (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_from_seed(chunk_seed(seed, k));
            let len = CHUNK_TRIALS.min(trials - k * CHUNK_TRIALS);
            let mut counts = vec![0u64; n_cells];
            for _ in 0..len {
                counts[draw(&mut rng)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; n_cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

fn uniform_axis<R: Rng + ?Sized>(rng: &mut R) -> usize {
    usize::from(!rng.random_bool(0.5))
}

/// Branch weights of a channel measurement and the collapsed state on each branch.
struct Split {
    weights: [f64; 2],
    states: [Option<StateVector>; 2],
}

fn split(state: &StateVector, pair: &[crate::qmath::HermitianOperator; 2]) -> Split {
    let branches = pair.each_ref().map(|p| apply(p.matrix(), state).expect("4-dim"));
    Split {
        weights: branches.each_ref().map(|b| b.norm_sqr()),
        states: branches.each_ref().map(|b| b.normalize()),
    }
}

fn detection_weights(state: &StateVector) -> [f64; 4] {
    r_basis().vectors().map(|r| inner_product(&r, state).expect("4-dim").norm_sqr())
}

// flat index over (axis, bob, r) cells
fn cell3(t: usize, i: usize, j: usize) -> usize {
    (t * 2 + i) * 4 + j
}

fn key3(idx: usize) -> (usize, usize, usize) {
    (idx / 8, (idx / 4) % 2, idx % 4)
}

fn make_cell(key: CellKey, count: u64, trials: u64, expected: f64) -> Cell {
    let observed = count as f64 / trials as f64;
    Cell {
        key,
        count,
        observed,
        expected,
        sigma_deviation: sigma_deviation(observed, expected, binomial_sigma(expected, trials)),
    }
}

fn max_dev(cells: &[Cell]) -> f64 {
    cells.iter().map(|c| c.sigma_deviation).fold(0.0, f64::max)
}

fn is_check(j: usize) -> bool {
    j == 1 || j == 2
}

fn passes(table: &Table1, t: usize, i: usize, j: usize) -> bool {
    table.outcome(j + 1, MeasurementAxis::PROTOCOL[t]).expect("x or z") == Outcome::ALL[i]
}

/// Honest-round tree: Bob's axis and outcome, then Alice's detection.
fn honest_tree() -> ([[f64; 2]; 2], [[[f64; 4]; 2]; 2]) {
    let psi = initial_state();
    let mut bob_w = [[0.0; 2]; 2];
    let mut det_w = [[[0.0; 4]; 2]; 2];
    for (t, axis) in MeasurementAxis::PROTOCOL.iter().enumerate() {
        let s = split(&psi, &lifted_pair(*axis));
        bob_w[t] = s.weights;
        for i in 0..2 {
            if let Some(st) = &s.states[i] {
                det_w[t][i] = detection_weights(st);
            }
        }
    }
    (bob_w, det_w)
}

/// Attack-free rounds; any Table-1 violation is a hard error.
pub fn simulate_honest(trials: u64, seed: u64) -> Result<FrequencyReport> {
    TrialBatch::new(Scenario::Honest, trials, seed)?;
    let (bob_w, det_w) = honest_tree();
    let counts = run_chunks(trials, seed, 16, |rng| {
        let t = uniform_axis(rng);
        let i = sample_index(rng, &bob_w[t]);
        let j = sample_index(rng, &det_w[t][i]);
        cell3(t, i, j)
    });
    let table = table1()?;
    let psi = initial_state();
    let basis = r_basis();
    let mut cells = Vec::with_capacity(16);
    let mut violations = 0;
    let mut per_r = [0u64; 4];
    for (idx, &count) in counts.iter().enumerate() {
        let (t, i, j) = key3(idx);
        let axis = MeasurementAxis::PROTOCOL[t];
        let proj = lift_to_channel(&crate::protocol::pauli_projector(axis, Outcome::ALL[i]))?;
        let amp = inner_product(basis.get(j + 1)?, &apply(proj.matrix(), &psi)?)?;
        let key = CellKey { axis, bob: Outcome::ALL[i], eve: None, r_index: j as u8 + 1 };
        cells.push(make_cell(key, count, trials, 0.5 * amp.norm_sqr()));
        if !passes(&table, t, i, j) {
            violations += count;
        }
        per_r[j] += count;
    }
    if violations > 0 {
        return Err(Error::Table1Violation(format!(
            "{violations} honest rounds contradicted Table 1 (seed {seed})"
        )));
    }
    let checks = (0..4)
        .map(|j| NamedCheck::new(&format!("r{}_fraction", j + 1), per_r[j], trials, 0.25))
        .collect();
    Ok(FrequencyReport {
        scenario: Scenario::Honest,
        trials,
        seed,
        max_sigma_deviation: max_dev(&cells),
        cells,
        checks,
        table1_violations: 0,
    })
}

/// Rounds with Eve measuring and resending on the Alice → Bob leg.
pub fn simulate_ir(p: &InterceptParams, trials: u64, seed: u64) -> Result<FrequencyReport> {
    TrialBatch::new(Scenario::InterceptResend(*p), trials, seed)?;
    let psi = initial_state();
    let eve_pair = Outcome::ALL.map(|l| lift_to_channel(&xi_projector(p, l)).expect("2-dim"));
    let eve = split(&psi, &eve_pair);
    let mut bob_w = [[[0.0; 2]; 2]; 2];
    let mut det_w = [[[[0.0; 4]; 2]; 2]; 2];
    for l in 0..2 {
        let Some(after_eve) = &eve.states[l] else { continue };
        for (t, axis) in MeasurementAxis::PROTOCOL.iter().enumerate() {
            let s = split(after_eve, &lifted_pair(*axis));
            bob_w[l][t] = s.weights;
            for i in 0..2 {
                if let Some(st) = &s.states[i] {
                    det_w[l][t][i] = detection_weights(st);
                }
            }
        }
    }
    // flat index ((t * 2 + i) * 2 + l) * 4 + j
    let counts = run_chunks(trials, seed, 32, |rng| {
        let l = sample_index(rng, &eve.weights);
        let t = uniform_axis(rng);
        let i = sample_index(rng, &bob_w[l][t]);
        let j = sample_index(rng, &det_w[l][t][i]);
        ((t * 2 + i) * 2 + l) * 4 + j
    });

    let grid = amplitude_grid(p);
    let table = table1()?;
    let mut cells = Vec::with_capacity(32);
    let (mut s23, mut s23_pass, mut s23_expected, mut s23_pass_expected) = (0u64, 0u64, 0.0, 0.0);
    let (mut s14, mut agree, mut s14_expected, mut agree_expected) = (0u64, 0u64, 0.0, 0.0);
    let mut per_r = [0u64; 4];
    for (idx, &count) in counts.iter().enumerate() {
        let (j, l, i, t) = (idx % 4, (idx / 4) % 2, (idx / 8) % 2, idx / 16);
        let expected = 0.5 * grid[j][t][i][l].norm_sqr();
        let key = CellKey {
            axis: MeasurementAxis::PROTOCOL[t],
            bob: Outcome::ALL[i],
            eve: Some(Outcome::ALL[l]),
            r_index: j as u8 + 1,
        };
        cells.push(make_cell(key, count, trials, expected));
        per_r[j] += count;
        if is_check(j) {
            s23 += count;
            s23_expected += expected;
            if passes(&table, t, i, j) {
                s23_pass += count;
                s23_pass_expected += expected;
            }
        } else {
            s14 += count;
            s14_expected += expected;
            // Eve names r₁ on ξ = +1 and r₄ on ξ = −1
            if (l == 0) == (j == 0) {
                agree += count;
                agree_expected += expected;
            }
        }
    }
    let q = q_ratio_4(p);
    let mut checks = vec![
        NamedCheck::new("s23_pass_rate", s23_pass, s23, s23_pass_expected / s23_expected),
        NamedCheck::new("eve_alice_agreement", agree, s14, agree_expected / s14_expected),
    ];
    for j in 0..4 {
        checks.push(NamedCheck::new(&format!("r{}_fraction", j + 1), per_r[j], trials, q[j]));
    }
    Ok(FrequencyReport {
        scenario: Scenario::InterceptResend(*p),
        trials,
        seed,
        max_sigma_deviation: max_dev(&cells),
        cells,
        checks,
        table1_violations: s23 - s23_pass,
    })
}

/// Rounds with Eve's probe entangled on the Bob → Alice leg.
pub fn simulate_collective(p: &CollectiveParams, trials: u64, seed: u64) -> Result<FrequencyReport> {
    TrialBatch::new(Scenario::Collective(*p), trials, seed)?;
    let psi = initial_state();
    let iso = eve_isometry(p);
    let basis = r_basis();
    let mut bob_w = [[0.0; 2]; 2];
    let mut det_w = [[[0.0; 4]; 2]; 2];
    for (t, axis) in MeasurementAxis::PROTOCOL.iter().enumerate() {
        let s = split(&psi, &lifted_pair(*axis));
        bob_w[t] = s.weights;
        for i in 0..2 {
            let Some(after_bob) = &s.states[i] else { continue };
            // A⊗C⊗E state as a probe vector per AC basis index
            let mut joint = [[Complex::new(0.0, 0.0); 4]; 4];
            for a in 0..2 {
                let out = apply_isometry(&iso, [after_bob.amp(2 * a), after_bob.amp(2 * a + 1)]);
                for c in 0..2 {
                    joint[2 * a + c] = out[c];
                }
            }
            for (j, r) in basis.vectors().iter().enumerate() {
                let mut phi = [Complex::new(0.0, 0.0); 4];
                for (k, branch) in joint.iter().enumerate() {
                    let w = r.amp(k).conj();
                    phi.iter_mut().zip(branch).for_each(|(o, x)| *o += w * x);
                }
                det_w[t][i][j] = phi.iter().map(|z| z.norm_sqr()).sum();
            }
        }
    }
    let counts = run_chunks(trials, seed, 16, |rng| {
        let t = uniform_axis(rng);
        let i = sample_index(rng, &bob_w[t]);
        let j = sample_index(rng, &det_w[t][i]);
        cell3(t, i, j)
    });

    let table = table1()?;
    let mut cells = Vec::with_capacity(16);
    let (mut s23, mut s23_pass, mut s23_expected, mut s23_pass_expected) = (0u64, 0u64, 0.0, 0.0);
    for (idx, &count) in counts.iter().enumerate() {
        let (t, i, j) = key3(idx);
        let axis = MeasurementAxis::PROTOCOL[t];
        let expected = 0.5 * k_value(axis, Outcome::ALL[i], j + 1, p)?;
        let key = CellKey { axis, bob: Outcome::ALL[i], eve: None, r_index: j as u8 + 1 };
        cells.push(make_cell(key, count, trials, expected));
        if is_check(j) {
            s23 += count;
            s23_expected += expected;
            if passes(&table, t, i, j) {
                s23_pass += count;
                s23_pass_expected += expected;
            }
        }
    }
    let checks = vec![NamedCheck::new("p_ab", s23_pass, s23, s23_pass_expected / s23_expected)];
    Ok(FrequencyReport {
        scenario: Scenario::Collective(*p),
        trials,
        seed,
        max_sigma_deviation: max_dev(&cells),
        cells,
        checks,
        table1_violations: s23 - s23_pass,
    })
}
