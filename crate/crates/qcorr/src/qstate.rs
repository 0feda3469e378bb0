//! Two-qubit density matrices, their Bloch decomposition, and named families.
//!
//! The computational basis is |00>, |01>, |10>, |11> with subsystem A on the
//! left tensor factor. Bell states are ordered Phi+, Phi-, Psi+, Psi- with
//! Phi+- = (|00> +- |11>)/sqrt(2) and Psi+- = (|01> +- |10>)/sqrt(2).

use std::sync::OnceLock;

use thiserror::Error;

use crate::linalg::{self, C64, ComplexMatrix, kron2, pauli};

/// Default slack for hermiticity, trace and positivity checks.
pub const STATE_TOL: f64 = 1e-10;
/// A partial transpose counts as positive down to this eigenvalue.
pub const PPT_TOL: f64 = 1e-10;

const FAMILY_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("not hermitian: max |M - M^dagger| entry {0}")]
    NotHermitian(f64),
    #[error("trace deviation {0}")]
    TraceDeviation(f64),
    #[error("negative eigenvalue {0}")]
    NegativeEigenvalue(f64),
    #[error("parameter {value} outside [{lo}, {hi}] for family {family}")]
    ParameterOutOfRange {
        family: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("bell probability {index} is {value}, outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("bell probabilities sum to {0}, not 1")]
    ProbabilitySum(f64),
}

#[derive(Debug, Error)]
pub enum StateParseError {
    #[error("line {line}: {problem}")]
    Malformed { line: usize, problem: String },
    #[error("expected 16 matrix entries, found {0}")]
    EntryCount(usize),
}

/// Rounds to 12 significant digits so diagnostics read cleanly.
fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let scale = 10f64.powi(11 - x.abs().log10().floor() as i32);
    (x * scale).round() / scale
}

/// A validated two-qubit density matrix: Hermitian, unit trace, positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates a candidate matrix within `tol` and repairs benign drift.
    ///
    /// Hermiticity and trace deviations beyond `tol` are rejected, as is any
    /// eigenvalue below `-tol`. Eigenvalues inside the tolerance band are
    /// clamped to [0, 1] and the spectrum renormalized, so accumulated
    /// round-off never leaks a slightly unphysical state into the measures.
    pub fn new(m: ComplexMatrix, tol: f64) -> Result<DensityMatrix, StateError> {
        assert_eq!(m.dim(), 4, "two-qubit states are 4x4");
        let herm_dev = m.hermiticity_deviation();
        if herm_dev > tol {
            return Err(StateError::NotHermitian(sig12(herm_dev)));
        }
        let mut h = m.hermitian_part();
        let trace = h.trace().re;
        if (trace - 1.0).abs() > tol {
            return Err(StateError::TraceDeviation(sig12((trace - 1.0).abs())));
        }
        if trace != 1.0 {
            h = h.scaled(1.0 / trace);
        }
        let eig = linalg::hermitian_eig(&h, tol).map_err(|_| {
            StateError::NotHermitian(sig12(herm_dev))
        })?;
        let min = eig.values()[0];
        if min < -tol {
            return Err(StateError::NegativeEigenvalue(sig12(min)));
        }
        if min < 0.0 {
            // Clamp into [0, 1] and renormalize, then rebuild the matrix.
            let mut lam: Vec<f64> = eig.values().iter().map(|v| v.clamp(0.0, 1.0)).collect();
            let sum: f64 = lam.iter().sum();
            for v in &mut lam {
                *v /= sum;
            }
            let v = eig.vectors();
            h = ComplexMatrix::from_fn(4, |i, j| {
                (0..4).map(|k| v[(i, k)] * lam[k] * v[(j, k)].conj()).sum()
            });
        }
        Ok(DensityMatrix { m: h })
    }

    /// Projector onto a (not necessarily normalized) pure state vector.
    pub fn from_pure(psi: &[C64; 4]) -> DensityMatrix {
        let norm_sq: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert!(norm_sq > 0.0, "zero state vector");
        let m = ComplexMatrix::from_fn(4, |i, j| psi[i] * psi[j].conj() / norm_sq);
        DensityMatrix { m }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    /// Tr(rho^2); 1/4 for maximally mixed, 1 for pure.
    pub fn purity(&self) -> f64 {
        let mut acc = 0f64;
        for i in 0..4 {
            for j in 0..4 {
                acc += self.m[(i, j)].norm_sqr();
            }
        }
        acc
    }

    /// Expansion over the Pauli product basis.
    pub fn bloch_decompose(&self) -> BlochForm {
        let ops = bloch_ops();
        let tr = |op: &ComplexMatrix| -> f64 {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    acc += self.m[(i, j)] * op[(j, i)];
                }
            }
            debug_assert!(acc.im.abs() < 1e-10, "bloch trace must be real");
            acc.re
        };
        let mut form = BlochForm::default();
        for u in 0..3 {
            form.x[u] = tr(&ops.x[u]);
            form.y[u] = tr(&ops.y[u]);
            for v in 0..3 {
                form.t[u][v] = tr(&ops.t[u][v]);
            }
        }
        form
    }

    /// Marginal of the kept subsystem.
    pub fn reduce(&self, keep: Subsystem) -> ComplexMatrix {
        match keep {
            Subsystem::A => ComplexMatrix::from_fn(2, |i, j| {
                self.m[(2 * i, 2 * j)] + self.m[(2 * i + 1, 2 * j + 1)]
            }),
            Subsystem::B => ComplexMatrix::from_fn(2, |k, l| {
                self.m[(k, l)] + self.m[(2 + k, 2 + l)]
            }),
        }
    }

    /// Transpose of the B factor; Hermitian but not necessarily positive.
    pub fn partial_transpose_b(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(4, |r, c| {
            self.m[(2 * (r / 2) + c % 2, 2 * (c / 2) + r % 2)]
        })
    }

    /// Positivity of the partial transpose, which for two qubits is exactly
    /// separability.
    pub fn is_ppt(&self) -> bool {
        let pt = self.partial_transpose_b();
        let eig = linalg::hermitian_eig(&pt, 1e-9).expect("partial transpose is hermitian");
        eig.values()[0] >= -PPT_TOL
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Subsystem {
    A,
    B,
}

/// Pauli expansion coefficients: 4 rho = I + x.sigma (x) I + I (x) y.sigma
/// + sum_uv t[u][v] sigma_u (x) sigma_v.
///
/// Decompositions of valid states land in [-1, 1] entrywise. Arbitrary
/// coefficients are allowed here; [`bloch_compose`] decides physicality.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BlochForm {
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub t: [[f64; 3]; 3],
}

impl BlochForm {
    pub fn x_norm_sq(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum()
    }

    pub fn y_norm_sq(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum()
    }

    pub fn t_norm_sq(&self) -> f64 {
        self.t.iter().flatten().map(|v| v * v).sum()
    }
}

/// Rebuilds a matrix from Pauli coefficients and validates it as a state.
pub fn bloch_compose(form: &BlochForm, tol: f64) -> Result<DensityMatrix, StateError> {
    let ops = bloch_ops();
    let mut acc = ComplexMatrix::identity(4);
    for u in 0..3 {
        acc = acc.add(&ops.x[u].scaled(form.x[u]));
        acc = acc.add(&ops.y[u].scaled(form.y[u]));
        for v in 0..3 {
            acc = acc.add(&ops.t[u][v].scaled(form.t[u][v]));
        }
    }
    DensityMatrix::new(acc.scaled(0.25), tol)
}

struct BlochOps {
    x: [ComplexMatrix; 3],
    y: [ComplexMatrix; 3],
    t: [[ComplexMatrix; 3]; 3],
}

fn bloch_ops() -> &'static BlochOps {
    static OPS: OnceLock<BlochOps> = OnceLock::new();
    OPS.get_or_init(|| {
        let p = pauli();
        let x = std::array::from_fn(|u| kron2(&p.sigma[u], &p.identity));
        let y = std::array::from_fn(|u| kron2(&p.identity, &p.sigma[u]));
        let t = std::array::from_fn(|u| std::array::from_fn(|v| kron2(&p.sigma[u], &p.sigma[v])));
        BlochOps { x, y, t }
    })
}

/// Unitary whose columns are the Bell vectors, in the fixed order.
pub fn bell_transform() -> &'static ComplexMatrix {
    static Q: OnceLock<ComplexMatrix> = OnceLock::new();
    Q.get_or_init(|| {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let cols: [[f64; 4]; 4] = [
            [h, 0.0, 0.0, h],
            [h, 0.0, 0.0, -h],
            [0.0, h, h, 0.0],
            [0.0, h, -h, 0.0],
        ];
        ComplexMatrix::from_fn(4, |i, k| C64::new(cols[k][i], 0.0))
    })
}

/// Mixture of the four Bell projectors with the given probabilities.
pub fn bell_diagonal(p: &[f64; 4]) -> Result<DensityMatrix, StateError> {
    for (index, &value) in p.iter().enumerate() {
        if !(-FAMILY_SLACK..=1.0 + FAMILY_SLACK).contains(&value) {
            return Err(StateError::ProbabilityOutOfRange { index, value });
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > STATE_TOL {
        return Err(StateError::ProbabilitySum(sig12(sum)));
    }
    let q = bell_transform();
    let m = ComplexMatrix::from_fn(4, |i, j| {
        (0..4).map(|k| q[(i, k)] * (p[k] / sum) * q[(j, k)].conj()).sum()
    });
    DensityMatrix::new(m, STATE_TOL)
}

/// cos(theta)|00> + sin(theta)|11>, theta in [0, pi/2].
pub fn schmidt_pure(theta: f64) -> Result<DensityMatrix, StateError> {
    let hi = std::f64::consts::FRAC_PI_2;
    if !(-FAMILY_SLACK..=hi + FAMILY_SLACK).contains(&theta) {
        return Err(StateError::ParameterOutOfRange {
            family: "schmidt",
            value: theta,
            lo: 0.0,
            hi,
        });
    }
    let zero = C64::new(0.0, 0.0);
    let psi = [
        C64::new(theta.cos(), 0.0),
        zero,
        zero,
        C64::new(theta.sin(), 0.0),
    ];
    Ok(DensityMatrix::from_pure(&psi))
}

/// Bell mixture diag(1 - 3x, x, x, x); x in [0, 1/3].
///
/// x = 0 is the Phi+ projector, x = 1/4 the maximally mixed state, and the
/// tail up to 1/3 continues the line to the orthogonal-complement mixture.
pub fn werner(x: f64) -> Result<DensityMatrix, StateError> {
    let hi = 1.0 / 3.0;
    if !(-FAMILY_SLACK..=hi + FAMILY_SLACK).contains(&x) {
        return Err(StateError::ParameterOutOfRange {
            family: "werner",
            value: x,
            lo: 0.0,
            hi,
        });
    }
    let x = x.clamp(0.0, hi);
    bell_diagonal(&[1.0 - 3.0 * x, x, x, x])
}

/// Maximally entangled mixed states at concurrence x, x in [0, 1].
///
/// Rank-3 mixture of the Phi+- projectors and |01><01| whose entanglement is
/// maximal for its purity; the usual two-branch weight g(x) switches at 2/3.
pub fn mems(x: f64) -> Result<DensityMatrix, StateError> {
    if !(-FAMILY_SLACK..=1.0 + FAMILY_SLACK).contains(&x) {
        return Err(StateError::ParameterOutOfRange {
            family: "mems",
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let x = x.clamp(0.0, 1.0);
    let g = if x <= 2.0 / 3.0 { 1.0 / 3.0 } else { x / 2.0 };
    let mut m = ComplexMatrix::zeros(4);
    m.set(0, 0, C64::new(g, 0.0));
    m.set(1, 1, C64::new(1.0 - 2.0 * g, 0.0));
    m.set(3, 3, C64::new(g, 0.0));
    m.set(0, 3, C64::new(x / 2.0, 0.0));
    m.set(3, 0, C64::new(x / 2.0, 0.0));
    DensityMatrix::new(m, STATE_TOL)
}

/// Rank-2 mixture diag(1 - x, x) of the Phi+- projectors; x in [0, 1/2].
///
/// Maximally nonlocal for given mixedness: the CHSH ceiling at fixed purity.
pub fn mnms(x: f64) -> Result<DensityMatrix, StateError> {
    let hi = 0.5;
    if !(-FAMILY_SLACK..=hi + FAMILY_SLACK).contains(&x) {
        return Err(StateError::ParameterOutOfRange {
            family: "mnms",
            value: x,
            lo: 0.0,
            hi,
        });
    }
    let x = x.clamp(0.0, hi);
    bell_diagonal(&[1.0 - x, x, 0.0, 0.0])
}

/// Parses the 16-entry `re im` state file format, `#` comments allowed.
pub fn parse_state_text(text: &str) -> Result<ComplexMatrix, StateParseError> {
    let mut entries: Vec<C64> = Vec::with_capacity(16);
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(StateParseError::Malformed {
                line,
                problem: format!("expected `re im`, found {} fields", fields.len()),
            });
        }
        let mut parts = [0f64; 2];
        for (slot, field) in parts.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|_| StateParseError::Malformed {
                line,
                problem: format!("cannot parse `{field}` as a number"),
            })?;
        }
        entries.push(C64::new(parts[0], parts[1]));
    }
    if entries.len() != 16 {
        return Err(StateParseError::EntryCount(entries.len()));
    }
    Ok(ComplexMatrix::from_fn(4, |i, j| entries[4 * i + j]))
}
