//! Dense complex linear algebra for dimensions 2 and 4.
//!
//! Vectors and matrices are stored inline (no heap allocation) and are `Copy`.
//!
//! Tensor-product ordering: for `v ⊗ w` with `v`, `w` of dimension 2, the
//! component `v_j w_k` sits at flat index `2j + k`. The first factor is the
//! left-hand subsystem (A in A⊗C, C in C⊗E).

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::{EPS_EIG, EPS_HERM, MAX_JACOBI_SWEEPS};

pub type Complex = Complex64;

const MAX_DIM: usize = 4;
const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

fn check_dim(dim: usize) -> Result<()> {
    match dim {
        2 | 4 => Ok(()),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

fn is_finite(z: Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Complex amplitude vector of dimension 2 or 4.
#[derive(Clone, Copy, PartialEq)]
pub struct StateVector {
    dim: usize,
    amps: [Complex; MAX_DIM],
    normalized: bool,
}

impl StateVector {
    /// Builds an unflagged vector; sub-normalized vectors (probe states) are fine.
    pub fn new(amps: &[Complex]) -> Result<Self> {
        check_dim(amps.len())?;
        if !amps.iter().copied().all(is_finite) {
            return Err(Error::NonFinite("state vector"));
        }
        let mut buf = [ZERO; MAX_DIM];
        buf[..amps.len()].copy_from_slice(amps);
        Ok(Self {
            dim: amps.len(),
            amps: buf,
            normalized: false,
        })
    }

    /// Builds a vector flagged as normalized; fails unless `Σ|a_k|² = 1` within [`EPS_HERM`].
    pub fn normalized(amps: &[Complex]) -> Result<Self> {
        let mut v = Self::new(amps)?;
        let n = v.norm_sqr();
        if (n - 1.0).abs() > EPS_HERM {
            return Err(Error::NotNormalized(n));
        }
        v.normalized = true;
        Ok(v)
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        let c: Vec<Complex> = amps.iter().map(|&x| Complex::new(x, 0.0)).collect();
        Self::new(&c)
    }

    /// Computational basis vector `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        check_dim(dim)?;
        if k >= dim {
            return Err(Error::IndexOutOfRange {
                what: "basis index",
                index: k,
            });
        }
        let mut amps = [ZERO; MAX_DIM];
        amps[k] = ONE;
        Ok(Self {
            dim,
            amps,
            normalized: true,
        })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            amps: [ZERO; MAX_DIM],
            normalized: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amps(&self) -> &[Complex] {
        &self.amps[..self.dim]
    }

    pub fn amp(&self, k: usize) -> Complex {
        self.amps()[k]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps().iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&self, c: Complex) -> Self {
        let mut out = *self;
        for a in &mut out.amps[..self.dim] {
            *a *= c;
        }
        out.normalized = false;
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim, other.dim)?;
        let mut out = *self;
        for (a, b) in out.amps[..self.dim].iter_mut().zip(other.amps()) {
            *a += b;
        }
        out.normalized = false;
        Ok(out)
    }

    /// Unit vector along `self`, or `None` for a (numerically) zero vector.
    pub fn normalize(&self) -> Option<Self> {
        let n = self.norm_sqr().sqrt();
        if n <= f64::MIN_POSITIVE {
            return None;
        }
        let mut out = self.scale(Complex::new(1.0 / n, 0.0));
        out.normalized = true;
        Some(out)
    }

    /// Largest entrywise distance to `other`; `f64::INFINITY` on dimension mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.amps()
            .iter()
            .zip(other.amps())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.amps()).finish()
    }
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.amps().iter().map(|a| [a.re, a.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        let amps: Vec<Complex> = pairs.iter().map(|p| Complex::new(p[0], p[1])).collect();
        StateVector::new(&amps).map_err(serde::de::Error::custom)
    }
}

/// Square complex matrix of dimension 2 or 4, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    m: [[Complex; MAX_DIM]; MAX_DIM],
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            m: [[ZERO; MAX_DIM]; MAX_DIM],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut out = Self::zeros(dim)?;
        for k in 0..dim {
            out.m[k][k] = ONE;
        }
        Ok(out)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Result<Self> {
        let mut out = Self::zeros(dim)?;
        for j in 0..dim {
            for k in 0..dim {
                let z = f(j, k);
                if !is_finite(z) {
                    return Err(Error::NonFinite("matrix"));
                }
                out.m[j][k] = z;
            }
        }
        Ok(out)
    }

    pub fn from_rows(rows: &[&[Complex]]) -> Result<Self> {
        let dim = rows.len();
        for r in rows {
            same_dim(dim, r.len())?;
        }
        Self::from_fn(dim, |j, k| rows[j][k])
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        Self::from_fn(entries.len(), |j, k| {
            if j == k {
                Complex::new(entries[j], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &StateVector, v: &StateVector) -> Result<Self> {
        same_dim(u.dim, v.dim)?;
        Self::from_fn(u.dim, |j, k| u.amp(j) * v.amp(k).conj())
    }

    /// Kronecker product of two 2×2 matrices, same index ordering as [`tensor_product`].
    pub fn kron(a: &Self, b: &Self) -> Result<Self> {
        same_dim(2, a.dim)?;
        same_dim(2, b.dim)?;
        Self::from_fn(4, |r, c| a.m[r / 2][c / 2] * b.m[r % 2][c % 2])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, j: usize, k: usize) -> Complex {
        assert!(j < self.dim && k < self.dim, "matrix index out of range");
        self.m[j][k]
    }

    pub fn adjoint(&self) -> Self {
        let mut out = *self;
        for j in 0..self.dim {
            for k in 0..self.dim {
                out.m[j][k] = self.m[k][j].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim, other.dim)?;
        let n = self.dim;
        let mut out = Self::zeros(n)?;
        for j in 0..n {
            for k in 0..n {
                out.m[j][k] = (0..n).map(|l| self.m[j][l] * other.m[l][k]).sum();
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim, other.dim)?;
        let mut out = *self;
        for j in 0..self.dim {
            for k in 0..self.dim {
                out.m[j][k] += other.m[j][k];
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex) -> Self {
        let mut out = *self;
        for row in &mut out.m[..self.dim] {
            for z in &mut row[..self.dim] {
                *z *= c;
            }
        }
        out
    }

    pub fn trace(&self) -> Complex {
        (0..self.dim).map(|k| self.m[k][k]).sum()
    }

    /// Largest `|M_jk - conj(M_kj)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for j in 0..self.dim {
            for k in j..self.dim {
                dev = dev.max((self.m[j][k] - self.m[k][j].conj()).norm());
            }
        }
        dev
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        let mut d: f64 = 0.0;
        for j in 0..self.dim {
            for k in 0..self.dim {
                d = d.max((self.m[j][k] - other.m[j][k]).norm());
            }
        }
        d
    }

    fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for j in 0..self.dim {
            for k in 0..self.dim {
                s += self.m[j][k].norm_sqr();
            }
        }
        s.sqrt()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[Complex]> = self.m[..self.dim].iter().map(|r| &r[..self.dim]).collect();
        f.debug_list().entries(rows).finish()
    }
}

/// A [`ComplexMatrix`] satisfying `M_jk = conj(M_kj)` within [`EPS_HERM`].
#[derive(Clone, Copy, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dev = matrix.hermitian_deviation();
        if dev > EPS_HERM {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { matrix })
    }

    /// Rank-one projector `|v⟩⟨v|` (not rescaled; pass a unit vector for a true projector).
    pub fn projector(v: &StateVector) -> Self {
        Self {
            matrix: ComplexMatrix::outer(v, v).expect("same vector on both sides"),
        }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Ok(Self {
            matrix: ComplexMatrix::zeros(dim)?,
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Ok(Self {
            matrix: ComplexMatrix::identity(dim)?,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.add(&other.matrix)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.sub(&other.matrix)?,
        })
    }

    pub fn scale(&self, x: f64) -> Self {
        Self {
            matrix: self.matrix.scale(Complex::new(x, 0.0)),
        }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Σ|λ_k|`.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(self)?.iter().map(|l| l.abs()).sum())
    }
}

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.matrix.fmt(f)
    }
}

/// `v ⊗ w` for two qubit vectors; see the module docs for the index ordering.
pub fn tensor_product(v: &StateVector, w: &StateVector) -> Result<StateVector> {
    same_dim(2, v.dim)?;
    same_dim(2, w.dim)?;
    let mut amps = [ZERO; MAX_DIM];
    for j in 0..2 {
        for k in 0..2 {
            amps[2 * j + k] = v.amps[j] * w.amps[k];
        }
    }
    Ok(StateVector {
        dim: 4,
        amps,
        normalized: v.normalized && w.normalized,
    })
}

/// `⟨u|v⟩`, conjugate-linear in `u`.
pub fn inner_product(u: &StateVector, v: &StateVector) -> Result<Complex> {
    same_dim(u.dim, v.dim)?;
    Ok(u.amps().iter().zip(v.amps()).map(|(a, b)| a.conj() * b).sum())
}

/// Matrix-vector product `M v`.
pub fn apply(m: &ComplexMatrix, v: &StateVector) -> Result<StateVector> {
    same_dim(m.dim, v.dim)?;
    let mut amps = [ZERO; MAX_DIM];
    for (j, out) in amps[..m.dim].iter_mut().enumerate() {
        *out = (0..m.dim).map(|k| m.m[j][k] * v.amps[k]).sum();
    }
    Ok(StateVector {
        dim: m.dim,
        amps,
        normalized: false,
    })
}

/// Eigenpairs of a Hermitian operator, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

/// Cyclic complex Jacobi eigensolver.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary and then applies a real Givens rotation, so the combined step is
/// `J = diag(1, e^{-iφ}) · R(θ)` on the (p, q) plane.
pub fn hermitian_eigen(h: &HermitianOperator) -> Result<Eigen> {
    let n = h.dim();
    let mut a = h.matrix.m;
    let mut v = ComplexMatrix::identity(n)?.m;
    for k in 0..n {
        a[k][k] = Complex::new(a[k][k].re, 0.0);
    }
    let threshold = EPS_EIG * h.matrix.frobenius().max(1.0);

    let off_diag = |a: &[[Complex; MAX_DIM]; MAX_DIM]| {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[p][q].norm());
            }
        }
        off
    };

    let mut converged = false;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if off_diag(&a) < threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let theta = (a[q][q].re - a[p][p].re) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let e = phase.conj();

                // A <- A J
                for row in a.iter_mut().take(n) {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = akp * c - akq * e * s;
                    row[q] = akp * s + akq * e * c;
                }
                // A <- J† A
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = apk * c - aqk * phase * s;
                    a[q][k] = apk * s + aqk * phase * c;
                }
                a[p][q] = ZERO;
                a[q][p] = ZERO;
                a[p][p] = Complex::new(a[p][p].re, 0.0);
                a[q][q] = Complex::new(a[q][q].re, 0.0);
                // V <- V J
                for row in v.iter_mut().take(n) {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = vkp * c - vkq * e * s;
                    row[q] = vkp * s + vkq * e * c;
                }
            }
        }
    }
    if !converged {
        let off = off_diag(&a);
        if off >= threshold {
            return Err(Error::NoConvergence(off));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[y][y].re.total_cmp(&a[x][x].re));
    let values = order.iter().map(|&k| a[k][k].re).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let col: Vec<Complex> = (0..n).map(|r| v[r][k]).collect();
            StateVector::new(&col).expect("finite eigenvector")
        })
        .collect();
    Ok(Eigen { values, vectors })
}

/// Real eigenvalues of `h` in descending order.
pub fn hermitian_eigenvalues(h: &HermitianOperator) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(h)?.values)
}

/// Trace norm `Tr|M|` of a Hermitian matrix; non-Hermitian input is rejected.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    HermitianOperator::new(*m)?.trace_norm()
}
