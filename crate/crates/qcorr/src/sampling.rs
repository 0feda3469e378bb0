//! Random-state ensembles.
//!
//! Mixed states are drawn with eigenvalues uniform on the probability simplex
//! and an independent Haar-random eigenbasis; pure states come from a
//! normalized complex Gaussian 4-vector. Everything is driven by explicit
//! counter-mode streams so a survey of n samples produces identical bytes no
//! matter how many workers it is split across.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{self, C64, ComplexMatrix};
use crate::qstate::{DensityMatrix, STATE_TOL};

/// Default half-width of the acceptance band for fixed participation ratio.
pub const R_BAND_HALF_WIDTH: f64 = 0.02;
/// Default rejection budget for fixed participation ratio.
pub const R_BAND_BUDGET: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum SampleError {
    #[error(
        "no state with participation ratio in [{lo:.4}, {hi:.4}] within {budget} draws; \
         widen the band or raise the budget"
    )]
    BudgetExhausted { lo: f64, hi: f64, budget: u64 },
    #[error("target participation ratio {0} lies outside [1, 4]")]
    TargetOutOfRange(f64),
}

/// ChaCha8 generator pinned to a (seed, stream) pair.
///
/// Sample i of a campaign always reads stream i of the campaign seed, so the
/// draw is a pure function of (seed, i) and reordering or resharding work
/// cannot change any output.
#[derive(Clone, Debug)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> RngStream {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        RngStream { inner }
    }

    /// Stream for one sample of a flat campaign. Indices share the low
    /// 32-bit stream space; ensemble streams live above it.
    pub fn for_sample(seed: u64, index: u64) -> RngStream {
        assert!(index < 1 << 32, "campaign size is limited to 2^32 samples");
        RngStream::new(seed, index)
    }

    /// Stream for sample `index` of ensemble `ensemble` (fixed-R sweeps run
    /// one ensemble per grid point, each with its own rejection history).
    pub fn for_ensemble(seed: u64, ensemble: u32, index: u64) -> RngStream {
        assert!(index < 1 << 32, "ensemble size is limited to 2^32 samples");
        RngStream::new(seed, ((ensemble as u64 + 1) << 32) | index)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// Uniform point on the 3-simplex: normalized unit exponentials.
pub fn sample_simplex<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    let mut w = [0f64; 4];
    let mut total = 0.0;
    for wk in &mut w {
        // Exp(1) via inversion; 1 - u keeps the argument strictly positive.
        let u: f64 = rng.random();
        *wk = -(1.0 - u).ln();
        total += *wk;
    }
    w.map(|wk| wk / total)
}

/// Square matrix of independent standard complex Gaussians.
pub fn sample_ginibre<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary: Gram-Schmidt orthonormalization of a Ginibre draw
/// with positive pivots, which fixes the phase gauge.
pub fn sample_haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    loop {
        // Rank deficiency has probability zero; retry instead of erroring.
        if let Ok(u) = linalg::unitary_from_gaussian(&sample_ginibre(rng, dim)) {
            return u;
        }
    }
}

/// Full-rank-almost-surely mixed state: Haar basis, flat simplex spectrum.
pub fn sample_mixed_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let lam = sample_simplex(rng);
    let u = sample_haar_unitary(rng, 4);
    let m = ComplexMatrix::from_fn(4, |i, j| {
        (0..4).map(|k| u[(i, k)] * lam[k] * u[(j, k)].conj()).sum()
    });
    DensityMatrix::new(m, STATE_TOL).expect("spectral synthesis yields a valid state")
}

/// Haar-random pure state of two qubits.
pub fn sample_pure_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    loop {
        let psi: [C64; 4] = std::array::from_fn(|_| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let norm_sq: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq > 1e-12 {
            return DensityMatrix::from_pure(&psi);
        }
    }
}

/// Rejection-sample a mixed state whose participation ratio 1/Tr(rho^2)
/// lands within `half_width` of `target`. Returns the state and the number
/// of draws it took. A target of exactly 1 short-circuits to the pure
/// sampler, since the band has zero weight under the mixed ensemble.
pub fn sample_at_r<R: Rng + ?Sized>(
    rng: &mut R,
    target: f64,
    half_width: f64,
    budget: u64,
) -> Result<(DensityMatrix, u64), SampleError> {
    if !(1.0..=4.0).contains(&target) {
        return Err(SampleError::TargetOutOfRange(target));
    }
    if target == 1.0 {
        return Ok((sample_pure_state(rng), 1));
    }
    for attempt in 1..=budget {
        let rho = sample_mixed_state(rng);
        let r = 1.0 / rho.purity();
        if (r - target).abs() <= half_width {
            return Ok((rho, attempt));
        }
    }
    Err(SampleError::BudgetExhausted {
        lo: target - half_width,
        hi: target + half_width,
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures;
    use std::f64::consts::TAU;

    #[test]
    fn streams_are_deterministic_and_disjoint() {
        let draw = |seed, stream| -> Vec<u64> {
            let mut rng = RngStream::new(seed, stream);
            (0..8).map(|_| rng.next_u64()).collect()
        };
        assert_eq!(draw(7, 3), draw(7, 3));
        assert_ne!(draw(7, 3), draw(7, 4));
        assert_ne!(draw(7, 3), draw(8, 3));
        // Ensemble streams never alias sample streams.
        let mut a = RngStream::for_sample(7, 3);
        let mut b = RngStream::for_ensemble(7, 0, 3);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn simplex_moments_match_flat_measure() {
        let mut rng = RngStream::new(11, 0);
        let n = 100_000;
        let mut mean = [0f64; 4];
        let mut mean_sq_sum = 0.0;
        for _ in 0..n {
            let lam = sample_simplex(&mut rng);
            let total: f64 = lam.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(lam.iter().all(|&l| l >= 0.0));
            for u in 0..4 {
                mean[u] += lam[u];
            }
            mean_sq_sum += lam.iter().map(|l| l * l).sum::<f64>();
        }
        for m in mean {
            assert!((m / n as f64 - 0.25).abs() < 5e-3);
        }
        // Flat 3-simplex: E[sum of squared weights] = 2/(4+1) = 0.4.
        assert!((mean_sq_sum / n as f64 - 0.4).abs() < 5e-3);
    }

    /// Elementary two-level rotation acting on rows (i, i+1), zero-based i.
    fn elementary(dim: usize, i: usize, phi: f64, psi: f64, chi: f64) -> ComplexMatrix {
        let mut e = ComplexMatrix::identity(dim);
        let (s, c) = phi.sin_cos();
        e.set(i, i, C64::from_polar(c, psi));
        e.set(i, i + 1, C64::from_polar(s, chi));
        e.set(i + 1, i, -C64::from_polar(s, -chi));
        e.set(i + 1, i + 1, C64::from_polar(c, -psi));
        e
    }

    /// Haar unitary on U(4) by composing elementary rotations, the classic
    /// Euler-angle construction. Kept test-only: it exists to cross-check
    /// the Gram-Schmidt sampler through an unrelated algorithm.
    fn composed_haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
        let n = 4usize;
        let alpha: f64 = rng.random_range(0.0..TAU);
        let phase = C64::from_polar(1.0, alpha);
        let mut u = ComplexMatrix::from_fn(n, |i, j| {
            if i == j {
                phase
            } else {
                C64::new(0.0, 0.0)
            }
        });
        for k in 1..n {
            // Chain from rows (n-k-1, n-k) down to (n-2, n-1), zero-based.
            // Only the terminal rotation of each chain carries a chi phase;
            // the polar angle at distance s from the chain end follows
            // sin^(2s), which is what makes the composition Haar.
            for i in (n - 1 - k)..(n - 1) {
                let s = (n - 1 - i) as f64;
                let xi: f64 = rng.random();
                let phi = xi.powf(1.0 / (2.0 * s)).asin();
                let psi: f64 = rng.random_range(0.0..TAU);
                let chi = if i == n - 2 {
                    rng.random_range(0.0..TAU)
                } else {
                    0.0
                };
                u = u.mul(&elementary(n, i, phi, psi, chi));
            }
        }
        u
    }

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = RngStream::new(12, 0);
        for dim in 2..=4 {
            let u = sample_haar_unitary(&mut rng, dim);
            let dev = u.adjoint().mul(&u).max_abs_diff(&ComplexMatrix::identity(dim));
            assert!(dev < 1e-12);
        }
        let u = composed_haar_unitary(&mut rng);
        let dev = u.adjoint().mul(&u).max_abs_diff(&ComplexMatrix::identity(4));
        assert!(dev < 1e-12);
    }

    #[test]
    fn haar_statistics_match_composition_oracle() {
        // For Haar on U(4): E|Tr U|^2 = 1, E|u00|^2 = 1/4, E|u00|^4 = 1/10.
        // Both samplers must land on all three.
        let n = 100_000;
        let run = |sampler: &mut dyn FnMut() -> ComplexMatrix| -> (f64, f64, f64) {
            let (mut tr2, mut p2, mut p4) = (0.0, 0.0, 0.0);
            for _ in 0..n {
                let u = sampler();
                tr2 += u.trace().norm_sqr();
                let q = u[(0, 0)].norm_sqr();
                p2 += q;
                p4 += q * q;
            }
            let n = n as f64;
            (tr2 / n, p2 / n, p4 / n)
        };
        let mut rng_a = RngStream::new(13, 0);
        let (tr2, p2, p4) = run(&mut || sample_haar_unitary(&mut rng_a, 4));
        assert!((tr2 - 1.0).abs() < 0.02, "gram-schmidt E|TrU|^2 = {tr2}");
        assert!((p2 - 0.25).abs() < 0.005, "gram-schmidt E|u|^2 = {p2}");
        assert!((p4 - 0.1).abs() < 0.005, "gram-schmidt E|u|^4 = {p4}");
        let mut rng_b = RngStream::new(13, 1);
        let (tr2, p2, p4) = run(&mut || composed_haar_unitary(&mut rng_b));
        assert!((tr2 - 1.0).abs() < 0.02, "composed E|TrU|^2 = {tr2}");
        assert!((p2 - 0.25).abs() < 0.005, "composed E|u|^2 = {p2}");
        assert!((p4 - 0.1).abs() < 0.005, "composed E|u|^4 = {p4}");
    }

    #[test]
    fn mixed_states_carry_the_simplex_spectrum() {
        let mut rng = RngStream::new(14, 0);
        for _ in 0..50 {
            let rho = sample_mixed_state(&mut rng);
            let purity = rho.purity();
            assert!((0.25..=1.0 + 1e-12).contains(&purity));
            let eig = linalg::hermitian_eig(rho.matrix(), 1e-9).unwrap();
            let total: f64 = eig.values().iter().sum();
            assert!((total - 1.0).abs() < 1e-10);
            let sq: f64 = eig.values().iter().map(|l| l * l).sum();
            assert!((sq - purity).abs() < 1e-10);
        }
    }

    #[test]
    fn pure_states_are_pure_and_match_known_moments() {
        let mut rng = RngStream::new(15, 0);
        let n = 10_000;
        let (mut c1, mut c4, mut d1) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let rho = sample_pure_state(&mut rng);
            assert!((rho.purity() - 1.0).abs() < 1e-12);
            let c = measures::concurrence(&rho);
            let d = measures::geometric_discord(&rho);
            // Pure two-qubit states: geometric discord is concurrence^2 / 2.
            assert!((d - 0.5 * c * c).abs() < 1e-9);
            c1 += c;
            c4 += c.powi(4);
            d1 += d;
        }
        let n = n as f64;
        // Concurrence density 3 c sqrt(1 - c^2): E[C] = 3 pi / 16,
        // E[C^4] = 8/35, E[D] = E[C^2]/2 = 1/5.
        assert!((c1 / n - 3.0 * std::f64::consts::PI / 16.0).abs() < 0.015);
        assert!((c4 / n - 8.0 / 35.0).abs() < 0.015);
        assert!((d1 / n - 0.2).abs() < 0.01);
    }

    #[test]
    fn fixed_r_sampler_respects_the_band() {
        let mut rng = RngStream::for_ensemble(16, 0, 0);
        let (rho, attempts) = sample_at_r(&mut rng, 2.0, 0.02, 1_000_000).unwrap();
        let r = 1.0 / rho.purity();
        assert!((r - 2.0).abs() <= 0.02, "landed at R = {r}");
        assert!(attempts >= 1);
        // Replaying the stream reproduces the draw exactly.
        let mut rng2 = RngStream::for_ensemble(16, 0, 0);
        let (rho2, attempts2) = sample_at_r(&mut rng2, 2.0, 0.02, 1_000_000).unwrap();
        assert_eq!(attempts, attempts2);
        assert!(rho.matrix().max_abs_diff(rho2.matrix()) == 0.0);
    }

    #[test]
    fn fixed_r_at_one_short_circuits_to_pure_states() {
        let mut rng = RngStream::new(17, 0);
        let (rho, attempts) = sample_at_r(&mut rng, 1.0, 0.02, 10).unwrap();
        assert_eq!(attempts, 1);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_r_budget_exhaustion_reports_the_band() {
        // The corner of the simplex near R = 4 is so thin that 100 draws
        // cannot reach a band this narrow.
        let mut rng = RngStream::new(18, 0);
        let err = sample_at_r(&mut rng, 3.99, 0.005, 100).unwrap_err();
        match err {
            SampleError::BudgetExhausted { lo, hi, budget } => {
                assert!((lo - 3.985).abs() < 1e-12);
                assert!((hi - 3.995).abs() < 1e-12);
                assert_eq!(budget, 100);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn fixed_r_rejects_targets_outside_range() {
        let mut rng = RngStream::new(19, 0);
        assert!(matches!(
            sample_at_r(&mut rng, 0.5, 0.02, 10),
            Err(SampleError::TargetOutOfRange(_))
        ));
        assert!(matches!(
            sample_at_r(&mut rng, 4.5, 0.02, 10),
            Err(SampleError::TargetOutOfRange(_))
        ));
    }
}
