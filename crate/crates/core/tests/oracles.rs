mod common;

use bubqkd::collective::{self, CollectiveParams};
use bubqkd::intercept::{self, InterceptParams};
use bubqkd::qmath::{hermitian_eigenvalues, ComplexMatrix, HermitianOperator};
use bubqkd::{MeasurementAxis, Outcome};
use common::{c, M4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn to_lib(m: &M4) -> HermitianOperator {
    HermitianOperator::new(ComplexMatrix::from_fn(4, |j, k| m[j][k]).unwrap()).unwrap()
}

fn random_hermitian(rng: &mut ChaCha8Rng) -> M4 {
    let mut m = [[c(0.0, 0.0); 4]; 4];
    for j in 0..4 {
        m[j][j] = c(rng.random_range(-2.0..2.0), 0.0);
        for k in j + 1..4 {
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[j][k] = z;
            m[k][j] = z.conj();
        }
    }
    m
}

#[test]
fn jacobi_eigenvalues_match_characteristic_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..300 {
        let m = random_hermitian(&mut rng);
        let want = common::eig4(&m);
        let got = hermitian_eigenvalues(&to_lib(&m)).unwrap();
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-8, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn trace_norm_at_reported_optimum() {
    let (a, b) = (1.30, 0.990);
    let f = common::fidelity(a, b).unwrap();
    let mut d = [[c(0.0, 0.0); 4]; 4];
    let (r0, r1) = (common::rho(1, a, b, f), common::rho(4, a, b, f));
    for j in 0..4 {
        for k in 0..4 {
            d[j][k] = r0[j][k] - r1[j][k];
        }
    }
    let want: f64 = common::eig4(&d).iter().map(|x| x.abs()).sum();
    let got = to_lib(&d).trace_norm().unwrap();
    assert!((got - want).abs() < 1e-8);
    assert!((got - 0.854).abs() < 2e-3, "{got}");
}

#[test]
fn amplitudes_match_independent_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let (al, be) = (rng.random_range(0.0..4.0 * PI), rng.random_range(0.0..4.0 * PI));
        let p = InterceptParams::from_angles(al, be).unwrap();
        for j in 1..=4 {
            for (axis, t) in [(MeasurementAxis::X, 'x'), (MeasurementAxis::Z, 'z')] {
                for (bob, i) in [(Outcome::Plus, 1), (Outcome::Minus, -1)] {
                    for (eve, l) in [(Outcome::Plus, 1), (Outcome::Minus, -1)] {
                        let lib = intercept::attack_amplitude(j, axis, bob, eve, &p).unwrap();
                        let want = common::amp(j, t, i, l, al, be);
                        assert!((lib - want).norm() < 1e-12);
                    }
                }
            }
        }
        let t = intercept::fg_uv_table(&p);
        let o = common::fguv(al, be);
        for k in 0..4 {
            assert!((t.f[k] - o[0][k]).abs() < 1e-12);
            assert!((t.g[k] - o[1][k]).abs() < 1e-12);
            assert!((t.u[k] - o[2][k]).abs() < 1e-12);
            assert!((t.v[k] - o[3][k]).abs() < 1e-12);
        }
    }
}

#[test]
fn probe_states_and_p_e_match_independent_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let (a, b) = (rng.random_range(0.0..PI), rng.random_range(0.0..PI));
        let p = CollectiveParams::from_angles(a, b).unwrap().unwrap();
        for label in collective::ProbeLabel::all() {
            let t = if label.axis == MeasurementAxis::X { 'x' } else { 'z' };
            let lib = collective::probe_state(label.axis, label.bob, label.r_index, &p).unwrap();
            let want = common::probe(t, label.bob.value(), label.r_index, a, b, p.fidelity);
            for e in 0..4 {
                assert!((lib.vector.amp(e) - want[e]).norm() < 1e-12, "{label:?}");
            }
        }
        let lib = collective::p_eve(a, b).unwrap().unwrap().p_e;
        let want = common::p_e(a, b).unwrap();
        assert!((lib - want).abs() < 1e-7, "({a}, {b}): {lib} vs {want}");
    }
}

#[test]
fn p1_p2_match_independent_weights_on_grid() {
    for k in 0..90 {
        let alpha = k as f64 * 2.0 * PI / 90.0;
        let beta = intercept::symmetric_beta(alpha, intercept::SymmetricBranch::Plus);
        let [f, g, u, v] = common::fguv(alpha, beta);
        let p1 = 0.25
            * (g[0] / (f[0] + g[0]) + f[1] / (f[1] + g[1]) + f[2] / (f[2] + g[2]) + g[3] / (f[3] + g[3]));
        let r: f64 = u.iter().sum::<f64>() + v.iter().sum::<f64>();
        let q1 = (u[0] + v[0] + u[1] + v[1]) / r;
        let q2 = (u[2] + v[2] + u[3] + v[3]) / r;
        let p2 = q1 / 2.0 * (u[0] / (u[0] + v[0]) + u[1] / (u[1] + v[1]))
            + q2 / 2.0 * (v[2] / (u[2] + v[2]) + v[3] / (u[3] + v[3]));
        assert!((intercept::p1(alpha).unwrap() - p1).abs() < 1e-10);
        let (lp2, lq1, lq2) = intercept::p2(alpha).unwrap();
        assert!((lp2 - p2).abs() < 1e-10);
        assert!((lq1 - q1).abs() < 1e-12 && (lq2 - q2).abs() < 1e-12);
        assert!((lq1 + lq2 - 1.0).abs() < 1e-12);
    }
}
