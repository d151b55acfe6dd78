//! The closed-form table printed by `bubqkd breidbart`.

use std::f64::consts::{FRAC_PI_4, PI};

use bubqkd::intercept::{self, FgUvTable, InterceptParams, IrReport};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub name: String,
    pub symbolic: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointBlock {
    pub alpha: f64,
    pub beta: f64,
    pub label: String,
    pub table: FgUvTable,
    /// Normalized detection weights of r1..r4 and their smallest-integer form.
    pub q_ratios: [f64; 4],
    pub q_ratio_form: String,
    pub quantities: Vec<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreidbartReport {
    pub blocks: Vec<PointBlock>,
}

/// `p/q` with `q ≤ 64` when `x` is that rational to 1e-12.
pub fn rational(x: f64) -> Option<String> {
    for q in 1..=64u32 {
        let p = (x * q as f64).round();
        if (p / q as f64 - x).abs() < 1e-12 {
            return Some(if q == 1 { format!("{p}") } else { format!("{p}/{q}") });
        }
    }
    None
}

fn q(name: &str, symbolic: &str, value: f64) -> Quantity {
    Quantity { name: name.into(), symbolic: symbolic.into(), value }
}

/// Symbolic form as `a:b:c:d` in the smallest integers, when the ratios are rational.
fn ratio_form(w: &[f64; 4]) -> String {
    let scaled = w.map(|x| x * 16.0);
    if scaled.iter().all(|x| (x - x.round()).abs() < 1e-9) {
        let ints = scaled.map(|x| x.round() as u64);
        let g = ints.iter().copied().fold(0, gcd).max(1);
        ints.map(|i| (i / g).to_string()).join(":")
    } else {
        w.map(|x| format!("{x:.6}")).join(":")
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn common(r: &IrReport) -> Vec<Quantity> {
    vec![
        q("P1", &rational(r.p1).unwrap_or_default(), r.p1),
        q("q1", &rational(r.q1).unwrap_or_default(), r.q1),
        q("q2", &rational(r.q2).unwrap_or_default(), r.q2),
    ]
}

pub fn breidbart_report() -> BreidbartReport {
    let mut blocks = Vec::new();

    let p = InterceptParams::breidbart();
    let r = intercept::ir_report(&p).expect("Breidbart point is regular");
    let mut qs = common(&r);
    qs.insert(1, q("P2", "(5+3√2)/10", r.p2));
    blocks.push(PointBlock { alpha: 0.0, beta: FRAC_PI_4, label: "(0, pi/4)".into(), table: r.table, q_ratios: r.q_ratios, q_ratio_form: ratio_form(&r.q_ratios), quantities: qs });

    let p = InterceptParams::from_angles(PI, FRAC_PI_4).expect("finite angles");
    let r = intercept::ir_report(&p).expect("(pi, pi/4) is regular");
    let mut qs = common(&r);
    qs.insert(1, q("P2", &rational(r.p2).unwrap_or_default(), r.p2));
    let pieces = intercept::p2_tilde_pieces(PI).expect("regular");
    for (name, (v, sym)) in ["Eve|r1", "Eve|r2", "Eve|r3", "Eve|r4"]
        .iter()
        .zip(pieces.iter().zip(["(3-√2)/6", "(3+√2)/6", "(3-√2)/6", "(3+√2)/6"]))
    {
        qs.push(q(name, sym, *v));
    }
    let avg = pieces.iter().sum::<f64>() / 4.0;
    qs.push(q("Eve average", &rational(avg).unwrap_or_default(), avg));
    blocks.push(PointBlock { alpha: PI, beta: FRAC_PI_4, label: "(pi, pi/4)".into(), table: r.table, q_ratios: r.q_ratios, q_ratio_form: ratio_form(&r.q_ratios), quantities: qs });

    BreidbartReport { blocks }
}

impl BreidbartReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for b in &self.blocks {
            s += &format!("(alpha, beta) = {}\n", b.label);
            s += "  j        f_j              g_j              u_j              v_j\n";
            for j in 0..4 {
                let cell = |x: f64| format!("{:>6} {:.8}", rational(x).unwrap_or_default(), x);
                s += &format!(
                    "  {}  {}  {}  {}  {}\n",
                    j + 1,
                    cell(b.table.f[j]),
                    cell(b.table.g[j]),
                    cell(b.table.u[j]),
                    cell(b.table.v[j])
                );
            }
            for qt in &b.quantities {
                s += &format!("  {:<12} {:<12} {:.12}\n", qt.name, qt.symbolic, qt.value);
            }
            let w = b.q_ratios.map(|x| format!("{x:.6}")).join(":");
            s += &format!("  {:<12} {:<12} {w}\n", "Q1:Q2:Q3:Q4", b.q_ratio_form);
            s += "\n";
        }
        s
    }
}
