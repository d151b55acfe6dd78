//! Independent reference computations for the integration tests.
//!
//! Nothing here calls into the library: states, projectors and probe vectors
//! are rebuilt from their defining formulas with plain arrays, and eigenvalues
//! come from the characteristic polynomial instead of Jacobi rotations.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

pub type M2 = [[C; 2]; 2];
pub type M4 = [[C; 4]; 4];

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn psi() -> [C; 4] {
    let h = c(FRAC_1_SQRT_2, 0.0);
    [h, c(0.0, 0.0), c(0.0, 0.0), h]
}

/// Detection state `r_j`, 1-based.
pub fn r(j: usize) -> [C; 4] {
    let h = c(FRAC_1_SQRT_2, 0.0);
    let w = C::from_polar(0.5, FRAC_PI_4);
    let z = c(0.0, 0.0);
    match j {
        1 => [h, w, w.conj(), z],
        2 => [h, -w, -w.conj(), z],
        3 => [z, w.conj(), w, h],
        4 => [z, -w.conj(), -w, h],
        _ => panic!("r index {j}"),
    }
}

/// `σ_x` / `σ_z` eigenprojector from the Pauli matrix: `(I + s σ) / 2`.
pub fn pauli(axis: char, s: i8) -> M2 {
    let s = s as f64;
    match axis {
        'x' => [[c(0.5, 0.0), c(0.5 * s, 0.0)], [c(0.5 * s, 0.0), c(0.5, 0.0)]],
        'z' => [[c(0.5 + 0.5 * s, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5 - 0.5 * s, 0.0)]],
        _ => panic!("axis {axis}"),
    }
}

/// `(I + s n·σ) / 2` for the unit vector `n = (sin β cos α, sin β sin α, cos β)`.
pub fn spin(alpha: f64, beta: f64, s: i8) -> M2 {
    let s = s as f64;
    let (nx, ny, nz) = (beta.sin() * alpha.cos(), beta.sin() * alpha.sin(), beta.cos());
    [
        [c(0.5 * (1.0 + s * nz), 0.0), c(0.5 * s * nx, -0.5 * s * ny)],
        [c(0.5 * s * nx, 0.5 * s * ny), c(0.5 * (1.0 - s * nz), 0.0)],
    ]
}

/// `(I_A ⊗ P) v` with index `2A + C`.
pub fn act_on_channel(p: &M2, v: &[C; 4]) -> [C; 4] {
    let mut out = [c(0.0, 0.0); 4];
    for a in 0..2 {
        for co in 0..2 {
            for ci in 0..2 {
                out[2 * a + co] += p[co][ci] * v[2 * a + ci];
            }
        }
    }
    out
}

pub fn dot(u: &[C; 4], v: &[C; 4]) -> C {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `⟨r_j | P(σ_t = i) P(σ_ξ = l) | ψ⟩`.
pub fn amp(j: usize, axis: char, i: i8, l: i8, alpha: f64, beta: f64) -> C {
    let after_eve = act_on_channel(&spin(alpha, beta, l), &psi());
    let after_bob = act_on_channel(&pauli(axis, i), &after_eve);
    dot(&r(j), &after_bob)
}

/// `[f, g, u, v]`, each a length-4 array.
pub fn fguv(alpha: f64, beta: f64) -> [[f64; 4]; 4] {
    let p = |j, t, i, l| amp(j, t, i, l, alpha, beta).norm_sqr();
    let checks = [(2, 'x'), (2, 'z'), (3, 'x'), (3, 'z')];
    let keys = [(1, 'x'), (1, 'z'), (4, 'x'), (4, 'z')];
    let mut out = [[0.0; 4]; 4];
    for k in 0..4 {
        let (j, t) = checks[k];
        out[0][k] = p(j, t, 1, 1) + p(j, t, 1, -1);
        out[1][k] = p(j, t, -1, 1) + p(j, t, -1, -1);
        let (j, t) = keys[k];
        out[2][k] = p(j, t, 1, 1) + p(j, t, -1, 1);
        out[3][k] = p(j, t, 1, -1) + p(j, t, -1, -1);
    }
    out
}

/// Eve's probe vector after Bob found `i` along `axis` and Alice detected `r_j`.
pub fn probe(axis: char, i: i8, j: usize, a: f64, b: f64, f: f64) -> [C; 4] {
    let alpha_e = [1.0, 0.0, 0.0, 0.0];
    let beta_e = [0.0, b.cos(), 0.0, b.sin()];
    let gamma_e = [0.0, 1.0, 0.0, 0.0];
    let delta_e = [a.cos(), 0.0, a.sin(), 0.0];
    let (sf, sg) = (f.sqrt(), (1.0 - f).sqrt());
    // U|c⟩|X⟩ as (channel-out, probe) pairs
    let u_of = |cin: usize| -> [[f64; 4]; 2] {
        let mut o = [[0.0; 4]; 2];
        for e in 0..4 {
            if cin == 0 {
                o[0][e] = sf * alpha_e[e];
                o[1][e] = sg * beta_e[e];
            } else {
                o[0][e] = sg * gamma_e[e];
                o[1][e] = sf * delta_e[e];
            }
        }
        o
    };
    let ket: [f64; 2] = match (axis, i) {
        ('z', 1) => [1.0, 0.0],
        ('z', -1) => [0.0, 1.0],
        ('x', s) => [FRAC_1_SQRT_2, s as f64 * FRAC_1_SQRT_2],
        _ => panic!(),
    };
    let ps = psi();
    let rj = r(j);
    let mut out = [c(0.0, 0.0); 4];
    for aa in 0..2 {
        let aux: C = (0..2).map(|cc| ket[cc] * ps[2 * aa + cc]).sum();
        for cin in 0..2 {
            let u = u_of(cin);
            for cout in 0..2 {
                let w = rj[2 * aa + cout].conj() * aux * ket[cin];
                for e in 0..4 {
                    out[e] += w * u[cout][e];
                }
            }
        }
    }
    out
}

pub fn fidelity(a: f64, b: f64) -> Option<f64> {
    let den = 2.0 + b.cos() - a.cos();
    (den > 1e-12).then(|| ((1.0 + b.cos()) / den).clamp(0.0, 1.0))
}

pub fn rho(j: usize, a: f64, b: f64, f: f64) -> M4 {
    let mut m = [[c(0.0, 0.0); 4]; 4];
    for axis in ['x', 'z'] {
        for i in [1, -1] {
            let v = probe(axis, i, j, a, b, f);
            for x in 0..4 {
                for y in 0..4 {
                    m[x][y] += v[x] * v[y].conj();
                }
            }
        }
    }
    m
}

pub fn p_e(a: f64, b: f64) -> Option<f64> {
    let f = fidelity(a, b)?;
    let (r0, r1) = (rho(1, a, b, f), rho(4, a, b, f));
    let mut d = [[c(0.0, 0.0); 4]; 4];
    for x in 0..4 {
        for y in 0..4 {
            d[x][y] = r0[x][y] - r1[x][y];
        }
    }
    Some(0.5 + 0.5 * eig4(&d).iter().map(|l| l.abs()).sum::<f64>())
}

fn matmul(a: &M4, b: &M4) -> M4 {
    let mut out = [[c(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            for j in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// Characteristic polynomial coefficients `[c0, c1, c2, c3, 1]` (Faddeev–LeVerrier).
pub fn char_poly(a: &M4) -> [f64; 5] {
    let n = 4;
    let mut coef = [0.0; 5];
    coef[n] = 1.0;
    let mut m = [[c(0.0, 0.0); 4]; 4];
    for k in 1..=n {
        let mut next = matmul(a, &m);
        for d in 0..4 {
            next[d][d] += coef[n - k + 1];
        }
        m = next;
        let am = matmul(a, &m);
        let tr: f64 = (0..4).map(|d| am[d][d].re).sum();
        coef[n - k] = -tr / k as f64;
    }
    coef
}

/// Eigenvalues of a Hermitian 4×4 matrix, descending, via Durand–Kerner on its
/// characteristic polynomial.
pub fn eig4(a: &M4) -> [f64; 4] {
    let coef = char_poly(a);
    let poly = |z: C| -> C {
        let mut acc = c(0.0, 0.0);
        for k in (0..5).rev() {
            acc = acc * z + coef[k];
        }
        acc
    };
    let bound = 1.0 + coef[..4].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let seed = c(0.4, 0.9);
    let mut z: Vec<C> = (0..4).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for k in 0..4 {
            let mut den = c(1.0, 0.0);
            for m in 0..4 {
                if m != k {
                    den *= z[k] - z[m];
                }
            }
            if den.norm() == 0.0 {
                den = c(1e-300, 0.0);
            }
            let step = poly(z[k]) / den;
            z[k] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * bound {
            break;
        }
    }
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[k] = z[k].re;
    }
    out.sort_by(|x, y| y.partial_cmp(x).unwrap());
    out
}
