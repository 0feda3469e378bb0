//! Correlation measures for two-qubit states.
//!
//! Everything is reported in bits (log base 2). The entropic quantities
//! (mutual information, classical correlations, discord) sit on top of a
//! measurement optimizer over projective axes on side B; the geometric
//! quantities (geometric discord, rank witness, CHSH) come straight from the
//! Bloch form.

use thiserror::Error;

use crate::linalg::{self, C64, ComplexMatrix, kron2, pauli};
use crate::qstate::{BlochForm, DensityMatrix, Subsystem};

/// Eigenvalues below this contribute nothing to an entropy.
pub const ENTROPY_EIG_CUTOFF: f64 = 1e-14;
/// Singular values above this count toward the correlation rank.
pub const RANK_WITNESS_TOL: f64 = 1e-8;
/// The two closed forms of the geometric discord must agree this tightly.
pub const GEOMETRIC_FORM_TOL: f64 = 1e-10;
/// Discord may undershoot zero by at most this much before being clamped.
pub const DISCORD_NEG_TOL: f64 = 1e-9;

/// Spectrum weights below this are treated as exact zeros when the state is
/// factored for the concurrence, so flat directions stay exactly flat.
const SPECTRUM_CUTOFF: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("measurement axis must be nonzero")]
    ZeroAxis,
}

/// Unit vector on the Bloch sphere selecting a projective measurement on B.
#[derive(Clone, Copy, Debug)]
pub struct MeasurementAxis {
    n: [f64; 3],
}

impl MeasurementAxis {
    pub fn new(v: [f64; 3]) -> Result<MeasurementAxis, MeasureError> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm < 1e-12 {
            return Err(MeasureError::ZeroAxis);
        }
        Ok(MeasurementAxis {
            n: [v[0] / norm, v[1] / norm, v[2] / norm],
        })
    }

    pub fn from_angles(theta: f64, phi: f64) -> MeasurementAxis {
        MeasurementAxis {
            n: axis_from_angles(theta, phi),
        }
    }

    pub fn direction(&self) -> [f64; 3] {
        self.n
    }
}

#[inline]
fn axis_from_angles(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Binary entropy in bits, safe at the endpoints.
pub fn binary_entropy(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let mut acc = 0.0;
    if p > ENTROPY_EIG_CUTOFF {
        acc -= p * p.log2();
    }
    let q = 1.0 - p;
    if q > ENTROPY_EIG_CUTOFF {
        acc -= q * q.log2();
    }
    acc
}

/// Von Neumann entropy in bits of a Hermitian positive unit-trace matrix.
pub fn vn_entropy(m: &ComplexMatrix) -> f64 {
    let eig = linalg::hermitian_eig(m, 1e-8).expect("entropy input must be hermitian");
    eig.values()
        .iter()
        .filter(|&&lam| lam > ENTROPY_EIG_CUTOFF)
        .map(|&lam| -lam * lam.log2())
        .sum()
}

/// Quantum mutual information S(A) + S(B) - S(AB).
pub fn qmi(rho: &DensityMatrix) -> f64 {
    vn_entropy(&rho.reduce(Subsystem::A)) + vn_entropy(&rho.reduce(Subsystem::B))
        - vn_entropy(rho.matrix())
}

/// Average post-measurement entropy of A for a projective axis on B.
///
/// Built from the explicit projector sandwich. The optimizer uses the
/// algebraically identical Bloch-form path below, which this definition
/// anchors in tests.
pub fn conditional_entropy(rho: &DensityMatrix, axis: &MeasurementAxis) -> f64 {
    let p = pauli();
    let n = axis.n;
    let mut acc = 0.0;
    for sign in [1.0f64, -1.0] {
        let mut proj = ComplexMatrix::identity(2);
        for u in 0..3 {
            proj = proj.add(&p.sigma[u].scaled(sign * n[u]));
        }
        let op = kron2(&p.identity, &proj.scaled(0.5));
        let sandwich = op.mul(rho.matrix()).mul(&op);
        let prob = sandwich.trace().re;
        if prob < 1e-14 {
            continue;
        }
        let cond_a = ComplexMatrix::from_fn(2, |i, j| {
            (sandwich[(2 * i, 2 * j)] + sandwich[(2 * i + 1, 2 * j + 1)]) / prob
        });
        acc += prob * vn_entropy(&cond_a);
    }
    acc
}

/// Same quantity computed from the Bloch form: outcome probabilities
/// (1 +- y.n)/2 and conditioned A vectors (x +- T n)/(1 +- y.n).
#[inline]
fn conditional_entropy_bloch(b: &BlochForm, n: [f64; 3]) -> f64 {
    let yn = b.y[0] * n[0] + b.y[1] * n[1] + b.y[2] * n[2];
    let tn: [f64; 3] = std::array::from_fn(|u| {
        b.t[u][0] * n[0] + b.t[u][1] * n[1] + b.t[u][2] * n[2]
    });
    let mut acc = 0.0;
    for sign in [1.0f64, -1.0] {
        let prob = 0.5 * (1.0 + sign * yn);
        if prob < 1e-14 {
            continue;
        }
        let rx = (b.x[0] + sign * tn[0]) / (2.0 * prob);
        let ry = (b.x[1] + sign * tn[1]) / (2.0 * prob);
        let rz = (b.x[2] + sign * tn[2]) / (2.0 * prob);
        let r = (rx * rx + ry * ry + rz * rz).sqrt().min(1.0);
        acc += prob * binary_entropy(0.5 * (1.0 + r));
    }
    acc
}

/// Measurement-axis search strategy for the entropic quantities.
#[derive(Clone, Copy, Debug)]
pub struct OptimizerSettings {
    /// Polar grid lines including both poles.
    pub theta_steps: usize,
    /// Azimuthal grid lines, endpoint excluded.
    pub phi_steps: usize,
    /// Simplex diameter in radians at which refinement stops.
    pub refine_tol: f64,
    /// Distinct coarse-grid basins handed to the refiner.
    pub refine_starts: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            theta_steps: 64,
            phi_steps: 128,
            refine_tol: 1e-6,
            refine_starts: 3,
        }
    }
}

/// Minimum conditional entropy over measurement axes: coarse sphere grid,
/// then derivative-free simplex refinement from the best separated basins.
fn optimize_measurement(b: &BlochForm, opt: &OptimizerSettings) -> (f64, [f64; 3]) {
    let nt = opt.theta_steps.max(2);
    let np = opt.phi_steps.max(1);
    let dt = std::f64::consts::PI / (nt - 1) as f64;
    let dp = std::f64::consts::TAU / np as f64;

    let mut grid: Vec<(f64, f64, f64)> = Vec::with_capacity(nt * np);
    for i in 0..nt {
        let theta = i as f64 * dt;
        let at_pole = i == 0 || i == nt - 1;
        let cols = if at_pole { 1 } else { np };
        for j in 0..cols {
            let phi = j as f64 * dp;
            let e = conditional_entropy_bloch(b, axis_from_angles(theta, phi));
            grid.push((e, theta, phi));
        }
    }
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Refine from the best few basins, keeping starts angularly separated so
    // thin secondary minima are not lost to one deep basin.
    let mut starts: Vec<(f64, f64)> = Vec::new();
    let min_sep = (3.0 * dt).cos();
    for &(_, theta, phi) in &grid {
        if starts.len() >= opt.refine_starts.max(1) {
            break;
        }
        let n = axis_from_angles(theta, phi);
        let separated = starts.iter().all(|&(t2, p2)| {
            let m = axis_from_angles(t2, p2);
            let dot = (n[0] * m[0] + n[1] * m[1] + n[2] * m[2]).abs();
            dot < min_sep
        });
        if starts.is_empty() || separated {
            starts.push((theta, phi));
        }
    }

    let f = |theta: f64, phi: f64| conditional_entropy_bloch(b, axis_from_angles(theta, phi));
    let mut best = (grid[0].0, axis_from_angles(grid[0].1, grid[0].2));
    for (theta, phi) in starts {
        let (e, t, p) = nelder_mead(&f, (theta, phi), dt, opt.refine_tol);
        if e < best.0 {
            best = (e, axis_from_angles(t, p));
        }
    }
    best
}

/// Minimal two-dimensional Nelder-Mead; returns (min, theta, phi).
fn nelder_mead(
    f: &dyn Fn(f64, f64) -> f64,
    start: (f64, f64),
    scale: f64,
    tol: f64,
) -> (f64, f64, f64) {
    let mut simplex = [
        (start.0, start.1),
        (start.0 + scale, start.1),
        (start.0, start.1 + scale),
    ];
    let mut values = simplex.map(|(t, p)| f(t, p));
    for _ in 0..300 {
        // Order ascending by value.
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.map(|k| simplex[k]);
        values = idx.map(|k| values[k]);

        let spread = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).hypot(a.1 - b.1);
        if spread(simplex[0], simplex[1]).max(spread(simplex[0], simplex[2])) < tol {
            break;
        }

        let centroid = (
            0.5 * (simplex[0].0 + simplex[1].0),
            0.5 * (simplex[0].1 + simplex[1].1),
        );
        let worst = simplex[2];
        let reflect = (
            centroid.0 + (centroid.0 - worst.0),
            centroid.1 + (centroid.1 - worst.1),
        );
        let fr = f(reflect.0, reflect.1);
        if fr < values[0] {
            let expand = (
                centroid.0 + 2.0 * (centroid.0 - worst.0),
                centroid.1 + 2.0 * (centroid.1 - worst.1),
            );
            let fe = f(expand.0, expand.1);
            if fe < fr {
                simplex[2] = expand;
                values[2] = fe;
            } else {
                simplex[2] = reflect;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflect;
            values[2] = fr;
        } else {
            let contract = (
                centroid.0 + 0.5 * (worst.0 - centroid.0),
                centroid.1 + 0.5 * (worst.1 - centroid.1),
            );
            let fc = f(contract.0, contract.1);
            if fc < values[2] {
                simplex[2] = contract;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = (
                        0.5 * (simplex[k].0 + simplex[0].0),
                        0.5 * (simplex[k].1 + simplex[0].1),
                    );
                    values[k] = f(simplex[k].0, simplex[k].1);
                }
            }
        }
    }
    (values[0], simplex[0].0, simplex[0].1)
}

/// Classical correlations: S(A) minus the best-case conditional entropy.
pub fn classical_correlations(rho: &DensityMatrix, opt: &OptimizerSettings) -> f64 {
    let b = rho.bloch_decompose();
    let s_a = vn_entropy(&rho.reduce(Subsystem::A));
    (s_a - optimize_measurement(&b, opt).0).max(0.0)
}

/// Measurement discord: mutual information minus classical correlations.
pub fn quantum_discord(rho: &DensityMatrix, opt: &OptimizerSettings) -> f64 {
    let d = qmi(rho) - classical_correlations(rho, opt);
    debug_assert!(d > -DISCORD_NEG_TOL, "discord fell below zero: {d}");
    d.max(0.0)
}

/// Plain dense scan over `n_theta * n_phi` axes; no refinement.
///
/// Slow on purpose. Tests use it as an optimizer-independent reference.
pub fn classical_correlations_scan(rho: &DensityMatrix, n_theta: usize, n_phi: usize) -> f64 {
    let b = rho.bloch_decompose();
    let s_a = vn_entropy(&rho.reduce(Subsystem::A));
    let dt = std::f64::consts::PI / (n_theta - 1) as f64;
    let dp = std::f64::consts::TAU / n_phi as f64;
    let mut e_min = f64::INFINITY;
    for i in 0..n_theta {
        let theta = i as f64 * dt;
        let cols = if i == 0 || i == n_theta - 1 { 1 } else { n_phi };
        for j in 0..cols {
            let e = conditional_entropy_bloch(&b, axis_from_angles(theta, j as f64 * dp));
            e_min = e_min.min(e);
        }
    }
    (s_a - e_min).max(0.0)
}

/// Both closed forms of the geometric discord, for consistency checks.
pub fn geometric_discord_forms(rho: &DensityMatrix) -> (f64, f64) {
    let b = rho.bloch_decompose();
    geometric_discord_forms_from(&b, rho.purity())
}

fn geometric_discord_forms_from(b: &BlochForm, purity: f64) -> (f64, f64) {
    let mut k = [[0f64; 3]; 3];
    for u in 0..3 {
        for v in 0..3 {
            let mut acc = b.x[u] * b.x[v];
            for w in 0..3 {
                acc += b.t[u][w] * b.t[v][w];
            }
            k[u][v] = acc;
        }
    }
    let lam_max = linalg::sym3_spectrum(&k).expect("gram matrix is symmetric")[0];
    let d1 = 0.25 * (b.x_norm_sq() + b.t_norm_sq() - lam_max);
    let d2 = purity - 0.25 - 0.25 * (b.y_norm_sq() + lam_max);
    (d1, d2)
}

/// Geometric discord: squared Hilbert-Schmidt distance to the nearest
/// classical-on-A state, in the closed eigenvalue form.
///
/// Both algebraic forms are evaluated every time; disagreement beyond
/// [`GEOMETRIC_FORM_TOL`] means the Bloch plumbing is broken and panics.
pub fn geometric_discord(rho: &DensityMatrix) -> f64 {
    geometric_discord_from(&rho.bloch_decompose(), rho.purity())
}

fn geometric_discord_from(b: &BlochForm, purity: f64) -> f64 {
    let (d1, d2) = geometric_discord_forms_from(b, purity);
    assert!(
        (d1 - d2).abs() <= GEOMETRIC_FORM_TOL,
        "geometric discord forms disagree: {d1} vs {d2}"
    );
    assert!(d1 >= -1e-12, "geometric discord fell below zero: {d1}");
    d1.max(0.0)
}

/// Rank of the stacked correlation block [[1, y^t], [x, T]]/4.
pub fn correlation_rank(rho: &DensityMatrix, tol: f64) -> usize {
    correlation_rank_from(&rho.bloch_decompose(), tol)
}

fn correlation_rank_from(b: &BlochForm, tol: f64) -> usize {
    let mut k = ComplexMatrix::zeros(4);
    k.set(0, 0, C64::new(0.25, 0.0));
    for u in 0..3 {
        k.set(0, u + 1, C64::new(0.25 * b.y[u], 0.0));
        k.set(u + 1, 0, C64::new(0.25 * b.x[u], 0.0));
        for v in 0..3 {
            k.set(u + 1, v + 1, C64::new(0.25 * b.t[u][v], 0.0));
        }
    }
    let sv = linalg::singular_values(&k);
    sv.iter().filter(|&&s| s > tol).count()
}

/// True exactly when the correlation rank admits a zero-discord state.
pub fn zero_discord_witness(rho: &DensityMatrix) -> bool {
    correlation_rank(rho, RANK_WITNESS_TOL) <= 2
}

/// Wootters concurrence.
///
/// Factoring rho = Z Z^dagger turns the usual spin-flipped spectrum into the
/// singular values of the complex symmetric Z^t (sigma2 (x) sigma2) Z, which
/// one-sided Jacobi delivers at absolute machine accuracy. The textbook
/// sqrt-of-eigenvalue route loses half the digits at the zeros.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let eig = linalg::hermitian_eig(rho.matrix(), 1e-9).expect("state is hermitian");
    let weights: Vec<f64> = eig
        .values()
        .iter()
        .map(|&lam| if lam < SPECTRUM_CUTOFF { 0.0 } else { lam.sqrt() })
        .collect();
    let v = eig.vectors();
    let z = ComplexMatrix::from_fn(4, |i, k| v[(i, k)] * weights[k]);
    let flip = spin_flip();
    let tau = z.transpose().mul(flip).mul(&z);
    let mu = linalg::singular_values(&tau);
    (mu[0] - mu[1] - mu[2] - mu[3]).max(0.0)
}

fn spin_flip() -> &'static ComplexMatrix {
    static FLIP: std::sync::OnceLock<ComplexMatrix> = std::sync::OnceLock::new();
    FLIP.get_or_init(|| {
        let s2 = &pauli().sigma[1];
        kron2(s2, s2)
    })
}

/// Participation ratio 1/Tr(rho^2): effective number of occupied levels.
pub fn participation_ratio(rho: &DensityMatrix) -> f64 {
    1.0 / rho.purity()
}

/// Largest CHSH expectation reachable with optimal local settings:
/// 2 sqrt(tau1 + tau2) over the two top eigenvalues of T^t T.
pub fn chsh_max(rho: &DensityMatrix) -> f64 {
    chsh_max_from(&rho.bloch_decompose())
}

fn chsh_max_from(b: &BlochForm) -> f64 {
    let mut m = [[0f64; 3]; 3];
    for u in 0..3 {
        for v in 0..3 {
            let mut acc = 0.0;
            for w in 0..3 {
                acc += b.t[w][u] * b.t[w][v];
            }
            m[u][v] = acc;
        }
    }
    let tau = linalg::sym3_spectrum(&m).expect("gram matrix is symmetric");
    2.0 * (tau[0] + tau[1]).max(0.0).sqrt()
}

/// Every measure of one state, in one pass.
///
/// The entropic pair (discord, classical correlations) is only computed when
/// optimizer settings are supplied; otherwise those fields stay empty rather
/// than pretending to be zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureRecord {
    pub participation_ratio: f64,
    pub geometric_discord: f64,
    pub discord: Option<f64>,
    pub classical_correlations: Option<f64>,
    pub mutual_information: f64,
    pub concurrence: f64,
    pub chsh: f64,
    pub ppt: bool,
    pub correlation_rank: usize,
}

pub fn measure_state(rho: &DensityMatrix, optimizer: Option<&OptimizerSettings>) -> MeasureRecord {
    let b = rho.bloch_decompose();
    let purity = rho.purity();
    let s_a = vn_entropy(&rho.reduce(Subsystem::A));
    let s_b = vn_entropy(&rho.reduce(Subsystem::B));
    let s_ab = vn_entropy(rho.matrix());
    let mutual_information = s_a + s_b - s_ab;
    let (discord, classical_correlations) = match optimizer {
        Some(opt) => {
            let cc = (s_a - optimize_measurement(&b, opt).0).max(0.0);
            let d = mutual_information - cc;
            debug_assert!(d > -DISCORD_NEG_TOL, "discord fell below zero: {d}");
            (Some(d.max(0.0)), Some(cc))
        }
        None => (None, None),
    };
    MeasureRecord {
        participation_ratio: 1.0 / purity,
        geometric_discord: geometric_discord_from(&b, purity),
        discord,
        classical_correlations,
        mutual_information,
        concurrence: concurrence(rho),
        chsh: chsh_max_from(&b),
        ppt: rho.is_ppt(),
        correlation_rank: correlation_rank_from(&b, RANK_WITNESS_TOL),
    }
}
