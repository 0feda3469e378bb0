//! Dense complex linear algebra for dimensions 2 to 4.
//!
//! Everything the crate needs fits in fixed 4x4 storage: Hermitian
//! eigendecomposition (cyclic Jacobi), orthonormalization of Gaussian draws
//! into unitaries, singular values (one-sided Jacobi), Kronecker products and
//! the Pauli constants. No external solver pulls its weight at this size.

use std::fmt;
use std::ops::Index;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Off-diagonal Frobenius norm at which a Jacobi iteration stops.
pub const JACOBI_OFF_TOL: f64 = 1e-13;
/// Column pivot below which orthonormalization reports rank deficiency.
pub const RANK_TOL: f64 = 1e-14;
/// Symmetry slack accepted by [`sym3_spectrum`].
pub const SYM_TOL: f64 = 1e-12;

const MAX_SWEEPS: usize = 60;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not hermitian: max |H - H^dagger| entry {0:.3e}")]
    NotHermitian(f64),
    #[error("matrix is not symmetric: max |S - S^t| entry {0:.3e}")]
    NotSymmetric(f64),
    #[error("rank deficient input: column {column} pivot {pivot:.3e}")]
    RankDeficient { column: usize, pivot: f64 },
    #[error("jacobi iteration did not converge: off-diagonal norm {0:.3e}")]
    NoConvergence(f64),
}

/// Row-major complex matrix of dimension 2, 3 or 4 in fixed storage.
///
/// Unused slots beyond `dim * dim` stay zero so derived equality is honest.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    e: [C64; 16],
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        debug_assert!((2..=4).contains(&dim));
        ComplexMatrix { dim, e: [ZERO; 16] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, ONE);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.e[i * self.dim + j] = v;
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += self[(i, k)] * rhs[(k, j)];
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        Self::from_fn(self.dim, |i, j| self[(i, j)] + rhs[(i, j)])
    }

    pub fn scaled(&self, by: f64) -> ComplexMatrix {
        Self::from_fn(self.dim, |i, j| self[(i, j)] * by)
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.e.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, rhs: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        let mut dev = 0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                dev = dev.max((self[(i, j)] - rhs[(i, j)]).norm());
            }
        }
        dev
    }

    /// Max entry of |M - M^dagger|; zero for exactly Hermitian input.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev = 0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn hermitian_part(&self) -> ComplexMatrix {
        Self::from_fn(self.dim, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut acc = 0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    acc += self[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.e[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix dim {}", self.dim)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self[(i, j)];
                write!(f, " {:+.6}{:+.6}i", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The three Pauli matrices and the 2x2 identity.
pub struct PauliBasis {
    pub sigma: [ComplexMatrix; 3],
    pub identity: ComplexMatrix,
}

/// Shared Pauli constants; index `sigma[u]` with u in 0..3 for sigma_{u+1}.
pub fn pauli() -> &'static PauliBasis {
    static BASIS: OnceLock<PauliBasis> = OnceLock::new();
    BASIS.get_or_init(|| {
        let i = C64::new(0.0, 1.0);
        let mut s1 = ComplexMatrix::zeros(2);
        s1.set(0, 1, ONE);
        s1.set(1, 0, ONE);
        let mut s2 = ComplexMatrix::zeros(2);
        s2.set(0, 1, -i);
        s2.set(1, 0, i);
        let mut s3 = ComplexMatrix::identity(2);
        s3.set(1, 1, -ONE);
        PauliBasis {
            sigma: [s1, s2, s3],
            identity: ComplexMatrix::identity(2),
        }
    })
}

/// Kronecker product of two 2x2 factors, left factor on the slow index.
pub fn kron2(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert!(a.dim == 2 && b.dim == 2, "kron2 takes 2x2 factors");
    ComplexMatrix::from_fn(4, |r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub struct EigenDecomposition {
    dim: usize,
    values: [f64; 4],
    vectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// Ascending eigenvalues.
    pub fn values(&self) -> &[f64] {
        &self.values[..self.dim]
    }

    /// Unitary whose k-th column pairs with `values()[k]`.
    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }
}

/// Diagonalizes a Hermitian matrix by cyclic Jacobi rotations.
///
/// Inputs farther than `herm_tol` from Hermitian are rejected; closer ones
/// are symmetrized before iterating. Sized for O(1)-scale entries: the sweep
/// stops at an absolute off-diagonal norm of [`JACOBI_OFF_TOL`].
pub fn hermitian_eig(
    h: &ComplexMatrix,
    herm_tol: f64,
) -> Result<EigenDecomposition, LinalgError> {
    let dev = h.hermiticity_deviation();
    if dev > herm_tol {
        return Err(LinalgError::NotHermitian(dev));
    }
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(h.dim);
    let mut off = a.off_diagonal_norm();
    let mut sweeps = 0;
    while off > JACOBI_OFF_TOL {
        if sweeps >= MAX_SWEEPS {
            return Err(LinalgError::NoConvergence(off));
        }
        for p in 0..h.dim {
            for q in (p + 1)..h.dim {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
        off = a.off_diagonal_norm();
        sweeps += 1;
    }

    let dim = h.dim;
    let mut order: [usize; 4] = [0, 1, 2, 3];
    order[..dim].sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let mut values = [0f64; 4];
    for k in 0..dim {
        values[k] = a[(order[k], order[k])].re;
    }
    let vectors = ComplexMatrix::from_fn(dim, |i, k| v[(i, order[k])]);
    Ok(EigenDecomposition { dim, values, vectors })
}

/// One unitary rotation in the (p, q) plane annihilating `a[(p, q)]`.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let dim = a.dim;
    let apq = a[(p, q)];
    let g = apq.norm();
    if g < 1e-300 {
        a.set(p, q, ZERO);
        a.set(q, p, ZERO);
        return;
    }
    let alpha = a[(p, p)].re;
    let beta = a[(q, q)].re;
    let phase = apq / g;
    // Smaller-angle root of the 2x2 secular equation; stable as g -> 0.
    let theta = (beta - alpha) / (2.0 * g);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let gp = phase * c;
    let gq = phase * s;

    // A <- A G with G = [[c phase, s phase], [-s, c]] on the (p, q) plane.
    for k in 0..dim {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a.set(k, p, akp * gp - akq * s);
        a.set(k, q, akp * gq + akq * c);
    }
    // A <- G^dagger A.
    for k in 0..dim {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a.set(p, k, apk * gp.conj() - aqk * s);
        a.set(q, k, apk * gq.conj() + aqk * c);
    }
    a.set(p, q, ZERO);
    a.set(q, p, ZERO);
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    a.set(p, p, C64::new(app.re, 0.0));
    a.set(q, q, C64::new(aqq.re, 0.0));
    for k in 0..dim {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v.set(k, p, vkp * gp - vkq * s);
        v.set(k, q, vkp * gq + vkq * c);
    }
}

/// Orthonormalizes the columns of a full-rank matrix into a unitary.
///
/// Modified Gram-Schmidt with one re-orthogonalization pass. Each pivot is a
/// positive column norm, which fixes the QR phase convention: the implied
/// upper-triangular factor has a real positive diagonal, so Gaussian input
/// maps to the unitary group's uniform measure.
pub fn unitary_from_gaussian(g: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let dim = g.dim;
    let mut q = *g;
    for k in 0..dim {
        // Two projection passes keep orthogonality near machine precision.
        for _ in 0..2 {
            for j in 0..k {
                let mut dot = ZERO;
                for i in 0..dim {
                    dot += q[(i, j)].conj() * q[(i, k)];
                }
                for i in 0..dim {
                    let v = q[(i, k)] - dot * q[(i, j)];
                    q.set(i, k, v);
                }
            }
        }
        let norm = (0..dim).map(|i| q[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm < RANK_TOL {
            return Err(LinalgError::RankDeficient { column: k, pivot: norm });
        }
        for i in 0..dim {
            let v = q[(i, k)] / norm;
            q.set(i, k, v);
        }
    }
    Ok(q)
}

/// Eigenvalues of a real symmetric 3x3 matrix, descending.
pub fn sym3_spectrum(s: &[[f64; 3]; 3]) -> Result<[f64; 3], LinalgError> {
    let mut dev = 0f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            dev = dev.max((s[i][j] - s[j][i]).abs());
        }
    }
    if dev > SYM_TOL {
        return Err(LinalgError::NotSymmetric(dev));
    }
    let m = ComplexMatrix::from_fn(3, |i, j| C64::new(0.5 * (s[i][j] + s[j][i]), 0.0));
    let eig = hermitian_eig(&m, 1e-9).expect("symmetrized input is hermitian");
    Ok([eig.values[2], eig.values[1], eig.values[0]])
}

/// Singular values, descending; entries `[..dim]` are valid.
///
/// One-sided Jacobi on the columns. Unlike the sqrt-of-Gram-eigenvalue
/// route this keeps absolute error near machine epsilon even for singular
/// values at zero, which the rank witness and the concurrence rely on.
pub(crate) fn singular_values(m: &ComplexMatrix) -> [f64; 4] {
    let dim = m.dim;
    let mut b = *m;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..dim {
            for q in (p + 1)..dim {
                let mut npp = 0f64;
                let mut nqq = 0f64;
                let mut gpq = ZERO;
                for i in 0..dim {
                    npp += b[(i, p)].norm_sqr();
                    nqq += b[(i, q)].norm_sqr();
                    gpq += b[(i, p)].conj() * b[(i, q)];
                }
                let g = gpq.norm();
                if g < 1e-300 || g <= 1e-15 * (npp * nqq).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gpq / g;
                let theta = (nqq - npp) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let gp = phase * c;
                let gq = phase * s;
                for i in 0..dim {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    b.set(i, p, bip * gp - biq * s);
                    b.set(i, q, bip * gq + biq * c);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv = [0f64; 4];
    for k in 0..dim {
        sv[k] = (0..dim).map(|i| b[(i, k)].norm_sqr()).sum::<f64>().sqrt();
    }
    sv[..dim].sort_by(|x, y| y.total_cmp(x));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand::rngs::StdRng;

    fn random_hermitian(rng: &mut StdRng, dim: usize) -> ComplexMatrix {
        let raw = ComplexMatrix::from_fn(dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        raw.hermitian_part()
    }

    #[test]
    fn pauli_algebra() {
        let basis = pauli();
        for s in &basis.sigma {
            assert!(s.hermiticity_deviation() == 0.0);
            assert_eq!(s.trace(), ZERO);
            assert!(s.mul(s).max_abs_diff(&basis.identity) == 0.0);
        }
        // sigma_1 sigma_2 = i sigma_3, cyclically.
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let lhs = basis.sigma[a].mul(&basis.sigma[b]);
            let rhs = basis.sigma[c].scaled(1.0); // copy
            let rhs = ComplexMatrix::from_fn(2, |i, j| rhs[(i, j)] * C64::new(0.0, 1.0));
            assert!(lhs.max_abs_diff(&rhs) < 1e-15);
        }
    }

    #[test]
    fn eig_recovers_diagonal_matrix() {
        let mut h = ComplexMatrix::zeros(4);
        for (i, v) in [2.0, 1.0, 0.0, 1.0].into_iter().enumerate() {
            h.set(i, i, C64::new(v, 0.0));
        }
        let eig = hermitian_eig(&h, 1e-10).unwrap();
        assert_eq!(eig.values(), &[0.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = StdRng::seed_from_u64(7);
        for dim in 2..=4 {
            for _ in 0..50 {
                let h = random_hermitian(&mut rng, dim);
                let eig = hermitian_eig(&h, 1e-10).unwrap();
                let v = eig.vectors();
                // Orthonormal columns.
                assert!(v.adjoint().mul(v).max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-12);
                // H v_k = lambda_k v_k, entrywise.
                let lam = ComplexMatrix::from_fn(dim, |i, j| {
                    if i == j { C64::new(eig.values()[i], 0.0) } else { ZERO }
                });
                let recon = v.mul(&lam).mul(&v.adjoint());
                assert!(recon.max_abs_diff(&h) < 1e-12);
                // Ascending order and trace identity.
                for w in eig.values().windows(2) {
                    assert!(w[0] <= w[1]);
                }
                let tr: f64 = eig.values().iter().sum();
                assert!((tr - h.trace().re).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut rng = StdRng::seed_from_u64(8);
        let mut h = random_hermitian(&mut rng, 4);
        let bumped = h[(0, 1)] + C64::new(1e-6, 0.0);
        h.set(0, 1, bumped);
        match hermitian_eig(&h, 1e-10) {
            Err(LinalgError::NotHermitian(dev)) => {
                assert!((dev - 1e-6).abs() < 1e-9);
            }
            other => panic!("expected hermiticity rejection, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn unitary_from_identity_is_identity() {
        let u = unitary_from_gaussian(&ComplexMatrix::identity(4)).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn unitary_is_unitary_and_deterministic() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..50 {
            let g = ComplexMatrix::from_fn(4, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let u = unitary_from_gaussian(&g).unwrap();
            assert!(u.adjoint().mul(&u).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
            let again = unitary_from_gaussian(&g).unwrap();
            assert!(u == again, "same input must give bit-identical output");
        }
    }

    #[test]
    fn unitary_rejects_rank_deficient() {
        let mut g = ComplexMatrix::identity(3);
        g.set(2, 2, ZERO);
        match unitary_from_gaussian(&g) {
            Err(LinalgError::RankDeficient { column: 2, .. }) => {}
            other => panic!("expected rank rejection, got ok={}", other.is_ok()),
        }
    }

    #[test]
    fn kron_of_sigma3_pair() {
        let s3 = &pauli().sigma[2];
        let k = kron2(s3, s3);
        let expect = ComplexMatrix::from_fn(4, |i, j| {
            if i != j {
                ZERO
            } else {
                C64::new([1.0, -1.0, -1.0, 1.0][i], 0.0)
            }
        });
        assert!(k.max_abs_diff(&expect) == 0.0);
    }

    #[test]
    fn kron_bilinear_and_trace_multiplicative() {
        let mut rng = StdRng::seed_from_u64(10);
        for _ in 0..50 {
            let a = ComplexMatrix::from_fn(2, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let b = ComplexMatrix::from_fn(2, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let c = ComplexMatrix::from_fn(2, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let lhs = kron2(&a.add(&c), &b);
            let rhs = kron2(&a, &b).add(&kron2(&c, &b));
            assert!(lhs.max_abs_diff(&rhs) < 1e-14);
            let tk = kron2(&a, &b).trace();
            let tt = a.trace() * b.trace();
            assert!((tk - tt).norm() < 1e-14);
        }
    }

    #[test]
    fn sym3_known_spectrum() {
        // Rotate diag(3, 2, 1) by a fixed orthogonal matrix.
        let c = (0.3f64).cos();
        let s = (0.3f64).sin();
        let q = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
        let d = [3.0, 2.0, 1.0];
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    m[i][j] += q[i][k] * d[k] * q[j][k];
                }
            }
        }
        let spec = sym3_spectrum(&m).unwrap();
        for (got, want) in spec.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn sym3_rejects_asymmetric() {
        let m = [[1.0, 0.5, 0.0], [0.5 + 1e-6, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(sym3_spectrum(&m), Err(LinalgError::NotSymmetric(_))));
    }

    #[test]
    fn singular_values_of_unitary_are_ones() {
        let mut rng = StdRng::seed_from_u64(11);
        let g = ComplexMatrix::from_fn(4, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let u = unitary_from_gaussian(&g).unwrap();
        for sv in &singular_values(&u)[..4] {
            assert!((sv - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_values_of_rank_one_matrix() {
        // Outer product u v^dagger has exactly one nonzero singular value.
        let u = [C64::new(0.5, 0.1), C64::new(-0.3, 0.2), C64::new(0.0, 0.7), C64::new(0.2, 0.0)];
        let v = [C64::new(0.1, -0.4), C64::new(0.8, 0.0), C64::new(0.3, 0.3), C64::new(-0.2, 0.1)];
        let m = ComplexMatrix::from_fn(4, |i, j| u[i] * v[j].conj());
        let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let sv = singular_values(&m);
        assert!((sv[0] - nu * nv).abs() < 1e-13);
        assert!(sv[1] < 1e-13 && sv[2] < 1e-13 && sv[3] < 1e-13);
    }

    #[test]
    fn singular_values_match_gram_route() {
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..50 {
            let m = ComplexMatrix::from_fn(4, |_, _| {
                C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let sv = singular_values(&m);
            let gram = m.adjoint().mul(&m);
            let eig = hermitian_eig(&gram, 1e-9).unwrap();
            for k in 0..4 {
                let want = eig.values()[3 - k].max(0.0).sqrt();
                assert!((sv[k] - want).abs() < 1e-7);
            }
        }
    }
}
