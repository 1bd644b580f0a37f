//! Time-reversal-invariant operations.
//!
//! All matrices here are expressed in the self-conjugate basis, where time
//! reversal is complex conjugation. An efficient map `ρ ↦ KρK†` is TRIO
//! exactly when `K` is real up to one global phase.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    conj, max_abs_diff, random_complex_vector, random_real_matrix, spectral_norm,
    to_complex, CMatrix, CVector, RMatrix, C64,
};
use crate::{Error, Result, EXACT_TOL};

/// Deterministic generator used for every seeded routine in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A Kraus operator over self-conjugate labels.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausOperator {
    mat: CMatrix,
}

impl KrausOperator {
    pub fn new(mat: CMatrix) -> Self {
        KrausOperator { mat }
    }

    pub fn from_real(mat: &RMatrix) -> Self {
        KrausOperator { mat: to_complex(mat) }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// `(out, in)` dimensions.
    pub fn dims(&self) -> (usize, usize) {
        self.mat.shape()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.mat * v
    }

    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.mat)
    }

    /// Real part after removing the phase of the largest-magnitude entry.
    pub fn real_part(&self) -> RMatrix {
        let phase = global_phase(&self.mat);
        self.mat.map(|z| (z * phase).re)
    }

    pub fn is_trio(&self, tol: f64) -> bool {
        is_trio(self, tol)
    }
}

/// `e^{-i arg K_max}` for the largest-magnitude entry, or 1 for a zero matrix.
fn global_phase(m: &CMatrix) -> C64 {
    let mut best = C64::new(0.0, 0.0);
    for z in m.iter() {
        if z.norm_sqr() > best.norm_sqr() {
            best = *z;
        }
    }
    if best.norm_sqr() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        (best / best.norm()).conj()
    }
}

/// Largest imaginary magnitude left after removing the global phase of the
/// largest entry.
pub fn imaginary_defect(k: &KrausOperator) -> f64 {
    let phase = global_phase(&k.mat);
    k.mat.iter().map(|z| (z * phase).im.abs()).fold(0.0, f64::max)
}

/// TRIO criterion: `K` is entrywise real (to `tol`) after removing the phase
/// of its largest-magnitude entry.
pub fn is_trio(k: &KrausOperator, tol: f64) -> bool {
    imaginary_defect(k) <= tol
}

/// Checks `K θ̂|ψ⟩⟨ψ|θ̂† K† = θ̂ K|ψ⟩⟨ψ|K† θ̂†` on `trials` random states drawn
/// from complex-normal amplitudes. Returns `false` at the first violating state.
pub fn covariance_check(k: &KrausOperator, trials: usize, seed: u64, tol: f64) -> bool {
    find_covariance_violation(k, trials, seed, tol).is_none()
}

/// Like [`covariance_check`], returning the first violating state and its
/// defect (largest entrywise difference of the two projectors).
pub fn find_covariance_violation(
    k: &KrausOperator,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Option<(CVector, f64)> {
    let mut rng = seeded_rng(seed);
    let (_, cols) = k.dims();
    for _ in 0..trials {
        let v = random_complex_vector(cols, &mut rng);
        let psi = &v / C64::from(v.norm());
        let lhs = k.apply(&conj(&psi));
        let rhs = conj(&k.apply(&psi));
        let defect = max_abs_diff(&(&lhs * lhs.adjoint()), &(&rhs * rhs.adjoint()));
        if defect > tol {
            return Some((psi, defect));
        }
    }
    None
}

/// A measurement given by Kraus operators with a common shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    kraus: Vec<KrausOperator>,
}

impl Instrument {
    pub fn new(kraus: Vec<KrausOperator>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Dimension("instrument needs at least one Kraus operator".into()))?
            .dims();
        if let Some((i, k)) = kraus.iter().enumerate().find(|(_, k)| k.dims() != first) {
            return Err(Error::Dimension(format!(
                "Kraus operator {i} is {:?}, expected {:?}",
                k.dims(),
                first
            )));
        }
        Ok(Instrument { kraus })
    }

    pub fn from_real(mats: &[RMatrix]) -> Result<Self> {
        Self::new(mats.iter().map(KrausOperator::from_real).collect())
    }

    pub fn kraus(&self) -> &[KrausOperator] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.kraus[0].dims()
    }

    /// `Σ_k K_k† K_k`.
    pub fn effect_sum(&self) -> CMatrix {
        let (_, n) = self.dims();
        self.kraus
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, k| acc + k.mat.adjoint() * &k.mat)
    }

    /// Outcome probabilities `p_k = ⟨ψ|K_k†K_k|ψ⟩` and unnormalized
    /// post-measurement vectors `K_k|ψ⟩`.
    pub fn outcomes(&self, psi: &CVector) -> Vec<(f64, CVector)> {
        self.kraus
            .iter()
            .map(|k| {
                let v = k.apply(psi);
                (v.norm_squared(), v)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstrumentReport {
    pub complete: bool,
    pub trio: bool,
    /// Spectral norm of `Σ K†K - 1`.
    pub defect: f64,
}

/// Checks completeness `Σ K_k†K_k = 1` and the real-Kraus criterion for every
/// element. Kraus operators must be square.
pub fn validate_instrument(inst: &Instrument, tol: f64) -> Result<InstrumentReport> {
    let (rows, cols) = inst.dims();
    if rows != cols {
        return Err(Error::Dimension(format!("Kraus operators are {rows}x{cols}, expected square")));
    }
    let defect = spectral_norm(&(inst.effect_sum() - CMatrix::identity(cols, cols)));
    Ok(InstrumentReport {
        complete: defect <= tol,
        trio: inst.kraus.iter().all(|k| is_trio(k, tol)),
        defect,
    })
}

/// A density operator over self-conjugate labels.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    mat: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity and unit trace (to `1e-12`) and positivity
    /// (eigenvalues `≥ -1e-10`).
    pub fn new(mat: CMatrix) -> Result<Self> {
        let (r, c) = mat.shape();
        if r != c || r == 0 {
            return Err(Error::Dimension(format!("density matrix must be square and non-empty, got {r}x{c}")));
        }
        let herm = max_abs_diff(&mat, &mat.adjoint());
        if herm > EXACT_TOL {
            return Err(Error::Dimension(format!("matrix is not Hermitian (defect {herm:.3e})")));
        }
        let tr = mat.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > EXACT_TOL {
            return Err(Error::Normalization { norm_sq: tr.re, defect: (tr - C64::new(1.0, 0.0)).norm() });
        }
        let min_eig = mat.clone().symmetric_eigenvalues().min();
        if min_eig < -1e-10 {
            return Err(Error::Dimension(format!("matrix is not positive (eigenvalue {min_eig:.3e})")));
        }
        Ok(DensityOperator { mat })
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

/// TR group average `(ρ + θ̂ρθ̂†)/2`, which in the self-conjugate basis is
/// `(ρ + ρ*)/2`.
pub fn group_average(rho: &DensityOperator) -> DensityOperator {
    DensityOperator { mat: rho.mat.map(|z| C64::new(z.re, 0.0)) }
}

/// Haar-distributed real orthogonal matrix: QR of a Gaussian matrix with
/// the signs of `R`'s diagonal absorbed into `Q`.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> RMatrix {
    let g = random_real_matrix(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random pure state: complex-normal amplitudes, normalized.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = crate::linalg::random_complex_vector(dim, rng);
    let n = v.norm();
    v / C64::from(n)
}

/// Gaussian real matrix.
pub fn random_real<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> RMatrix {
    random_real_matrix(rows, cols, rng)
}

/// A reversible TRIO: Haar-random real orthogonal matrix.
pub fn random_trio_orthogonal(dim: usize, seed: u64) -> KrausOperator {
    KrausOperator::from_real(&random_orthogonal(dim, &mut seeded_rng(seed)))
}

/// Random complete TRIO instrument with `outcomes` real Kraus operators:
/// the `d×d` blocks of `Q` from a thin QR of stacked Gaussian blocks, so
/// `Σ K_kᵀK_k = QᵀQ = 1` to rounding.
pub fn random_trio_instrument<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Instrument {
    let outcomes = outcomes.max(1);
    let stacked = random_real_matrix(dim * outcomes, dim, rng);
    let q = stacked.qr().q();
    let kraus = (0..outcomes)
        .map(|k| KrausOperator::from_real(&q.rows(k * dim, dim).into_owned()))
        .collect();
    Instrument { kraus }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rotation(angle: f64) -> RMatrix {
        RMatrix::from_row_slice(2, 2, &[angle.cos(), -angle.sin(), angle.sin(), angle.cos()])
    }

    #[test]
    fn trio_examples() {
        let id = KrausOperator::new(CMatrix::identity(3, 3));
        assert!(is_trio(&id, 1e-12));
        let rot = KrausOperator::from_real(&rotation(0.3));
        assert!(is_trio(&rot, 1e-12));
        let d = KrausOperator::new(CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)])));
        assert!(!is_trio(&d, 1e-9));
    }

    #[test]
    fn global_phase_is_removed() {
        let phase = C64::from_polar(1.0, 0.7);
        let k = KrausOperator::new(to_complex(&rotation(1.1)) * phase);
        assert!(is_trio(&k, 1e-12));
        assert!(covariance_check(&k, 50, 1, 1e-9));
        assert!(is_trio(&KrausOperator::new(CMatrix::zeros(2, 2)), 0.0));
    }

    #[test]
    fn covariance_examples() {
        let rot = KrausOperator::from_real(&rotation(FRAC_PI_6));
        assert!(covariance_check(&rot, 100, 7, 1e-9));
        let d = KrausOperator::new(CMatrix::from_diagonal(&CVector::from_vec(vec![
            c(1.0, 0.0),
            C64::from_polar(1.0, FRAC_PI_4),
        ])));
        assert!(!covariance_check(&d, 100, 7, 1e-9));
        assert!(covariance_check(&KrausOperator::new(CMatrix::identity(4, 4)), 100, 7, 1e-9));
    }

    #[test]
    fn group_average_examples() {
        let real = DensityOperator::new(to_complex(&RMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]))).unwrap();
        assert_eq!(group_average(&real), real);

        // Standard state θ: purity of the average is (1 + cos²θ)/2.
        for theta in [0.0, 0.3, 1.0, std::f64::consts::FRAC_PI_2] {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let psi = CVector::from_vec(vec![C64::from_polar(h, theta / 2.0), C64::from_polar(h, -theta / 2.0)]);
            let avg = group_average(&DensityOperator::pure(&psi).unwrap());
            let expected = (1.0 + theta.cos().powi(2)) / 2.0;
            assert!((avg.purity() - expected).abs() < 1e-14);
            assert_eq!(group_average(&avg), avg);
        }
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::new(CMatrix::identity(2, 2)).is_err());
        let non_herm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityOperator::new(non_herm).is_err());
        let neg = to_complex(&RMatrix::from_row_slice(2, 2, &[1.5, 0.0, 0.0, -0.5]));
        assert!(DensityOperator::new(neg).is_err());
    }

    #[test]
    fn validate_examples() {
        let r = validate_instrument(&Instrument::new(vec![KrausOperator::new(CMatrix::identity(3, 3))]).unwrap(), 1e-10)
            .unwrap();
        assert!(r.complete && r.trio);
        assert_eq!(r.defect, 0.0);

        let half = CMatrix::identity(2, 2) * C64::from(std::f64::consts::FRAC_1_SQRT_2);
        let r = validate_instrument(&Instrument::new(vec![KrausOperator::new(half)]).unwrap(), 1e-10).unwrap();
        assert!(!r.complete);
        assert!((r.defect - 0.5).abs() < 1e-15);

        let mixed = Instrument::new(vec![
            KrausOperator::new(CMatrix::identity(2, 2)),
            KrausOperator::new(CMatrix::identity(3, 3)),
        ]);
        assert!(matches!(mixed, Err(Error::Dimension(_))));
        assert!(Instrument::new(vec![]).is_err());
    }

    #[test]
    fn random_orthogonal_properties() {
        let one = random_trio_orthogonal(1, 4);
        assert!((one.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-15);
        for dim in 1..10 {
            for seed in 0..5 {
                let o = random_trio_orthogonal(dim, seed).real_part();
                assert!((o.transpose() * &o - RMatrix::identity(dim, dim)).abs().max() < 1e-12);
            }
        }
        assert_eq!(random_trio_orthogonal(4, 9), random_trio_orthogonal(4, 9));
    }

    #[test]
    fn random_instruments_are_complete() {
        let mut rng = seeded_rng(17);
        for dim in 1..7 {
            for outcomes in 1..5 {
                let inst = random_trio_instrument(dim, outcomes, &mut rng);
                let r = validate_instrument(&inst, 1e-10).unwrap();
                assert!(r.complete && r.trio, "{r:?}");
            }
        }
    }
}
