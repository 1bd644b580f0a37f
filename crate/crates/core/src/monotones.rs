//! Frameness monotones `τ` and `τ∞` and tensor-power behaviour.

use serde::{Deserialize, Serialize};

use crate::angular::{
    couple_with_qubit_state, to_self_conjugate, Basis, PhaseConvention, PureState, SelfConjLabel,
};
use crate::linalg::{bilinear_square, kron_vec, norm_sq, CVector, C64};
use crate::standardform::{standard_amplitudes, standardize};
use crate::trio::{random_trio_instrument, seeded_rng, Instrument};
use crate::{Error, ExtReal, Result, CHECK_TOL, EXACT_TOL};

/// `|⟨ψ*|ψ⟩| = |Σ_n ψ_n²|` in a self-conjugate basis, i.e. `cos θ`.
pub fn conjugate_overlap(amp: &CVector) -> f64 {
    bilinear_square(amp).norm().min(1.0)
}

fn self_conjugate_amplitudes(psi: &PureState, conv: PhaseConvention) -> Result<CVector> {
    let n2 = norm_sq(psi.amplitudes());
    if (n2 - 1.0).abs() > CHECK_TOL {
        return Err(Error::Normalization { norm_sq: n2, defect: (n2 - 1.0).abs() });
    }
    if psi.basis().is_self_conjugate() {
        return Ok(psi.amplitudes().clone());
    }
    Ok(to_self_conjugate(psi, conv)?.amplitudes().clone())
}

/// `τ(ψ) = 1 - |⟨ψ*|ψ⟩|`. Angular-basis states are converted to the
/// self-conjugate basis under the Landau–Lifshitz convention first.
pub fn tau(psi: &PureState) -> Result<f64> {
    tau_with(psi, PhaseConvention::default())
}

/// [`tau`] with an explicit convention for angular-basis input.
pub fn tau_with(psi: &PureState, conv: PhaseConvention) -> Result<f64> {
    Ok(1.0 - conjugate_overlap(&self_conjugate_amplitudes(psi, conv)?))
}

/// `-log₂ c`, divergent when `c ≤ 1e-12`.
pub fn neg_log2(c: f64) -> ExtReal {
    if c <= EXACT_TOL {
        ExtReal::Infinite
    } else {
        ExtReal::Finite((-c.min(1.0).log2()).max(0.0))
    }
}

/// `τ∞(ψ) = -log₂ |⟨ψ*|ψ⟩| = -log₂ cos θ`.
pub fn tau_infinity(psi: &PureState) -> Result<ExtReal> {
    tau_infinity_with(psi, PhaseConvention::default())
}

pub fn tau_infinity_with(psi: &PureState, conv: PhaseConvention) -> Result<ExtReal> {
    Ok(neg_log2(conjugate_overlap(&self_conjugate_amplitudes(psi, conv)?)))
}

/// `τ∞` of the standard resource with angle `θ`.
pub fn tau_infinity_of_angle(theta: f64) -> ExtReal {
    neg_log2(theta.cos())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneValue {
    pub tau: f64,
    #[serde(rename = "tauInf")]
    pub tau_inf: ExtReal,
}

impl MonotoneValue {
    pub fn of(psi: &PureState) -> Result<Self> {
        Self::of_with(psi, PhaseConvention::default())
    }

    pub fn of_with(psi: &PureState, conv: PhaseConvention) -> Result<Self> {
        let c = conjugate_overlap(&self_conjugate_amplitudes(psi, conv)?);
        Ok(MonotoneValue { tau: 1.0 - c, tau_inf: neg_log2(c) })
    }
}

/// `θ_n = arccos(cosⁿ θ)`, the angle of the `n`-fold tensor power.
pub fn tensor_power_angle(theta: f64, n: u32) -> f64 {
    theta.cos().powi(n as i32).clamp(-1.0, 1.0).acos()
}

/// `|ψ⟩^{⊗n} = Σ_k √r_k |φ_k⟩` with `r_k = 2^{-n} C(n,k) e^{iθ(n-2k)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinomialExpansion {
    pub theta: f64,
    pub n: u32,
    pub coeffs: Vec<C64>,
}

impl BinomialExpansion {
    /// `Σ_k r_k`, which equals `cosⁿ θ`.
    pub fn sum(&self) -> C64 {
        self.coeffs.iter().sum()
    }

    /// Amplitude of `|φ_k⟩`: `√(C(n,k)/2ⁿ) e^{iθ(n-2k)/2}`.
    pub fn amplitude(&self, k: usize) -> C64 {
        C64::from_polar(self.coeffs[k].norm().sqrt(), self.theta * (f64::from(self.n) - 2.0 * k as f64) / 2.0)
    }

    /// `|φ_k⟩` over the `2ⁿ` product labels: the normalized equal
    /// superposition of all bit strings with `k` ones.
    pub fn component_state(&self, k: usize) -> CVector {
        let n = self.n as usize;
        let dim = 1usize << n;
        let weight = (binomial(self.n, k as u32)).sqrt().recip();
        CVector::from_fn(dim, |i, _| {
            if i.count_ones() as usize == k {
                C64::new(weight, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Largest copy count accepted by [`binomial_expansion`].
pub const MAX_EXPANSION_COPIES: u32 = 20;

pub fn binomial_expansion(theta: f64, n: u32) -> Result<BinomialExpansion> {
    if n == 0 || n > MAX_EXPANSION_COPIES {
        return Err(Error::Size(format!("copy count {n} outside 1..={MAX_EXPANSION_COPIES}")));
    }
    let scale = 0.5f64.powi(n as i32);
    let coeffs = (0..=n)
        .map(|k| C64::from_polar(scale * binomial(n, k), theta * (f64::from(n) - 2.0 * f64::from(k))))
        .collect();
    Ok(BinomialExpansion { theta, n, coeffs })
}

/// Largest copy count accepted by the literal tensor-power routines.
pub const MAX_BRUTE_FORCE_COPIES: u32 = 8;

/// The literal `n`-fold tensor power of the standard state, as a nested
/// product of two-dimensional self-conjugate bases.
pub fn standard_power_state(theta: f64, n: u32) -> Result<PureState> {
    if n == 0 || n > MAX_BRUTE_FORCE_COPIES {
        return Err(Error::Size(format!("copy count {n} outside 1..={MAX_BRUTE_FORCE_COPIES}")));
    }
    let one = Basis::SelfConjugate(SelfConjLabel::ladder(2));
    let single = standard_amplitudes(theta, 2);
    let mut basis = one.clone();
    let mut amp = single.clone();
    for _ in 1..n {
        basis = Basis::Product(Box::new(basis), Box::new(one.clone()));
        amp = kron_vec(&amp, &single);
    }
    PureState::new(basis, amp)
}

/// Builds `|ψ_θ⟩^{⊗n}` literally in the `2ⁿ`-dimensional product basis and
/// standardizes it. Independent of [`tensor_power_angle`].
pub fn brute_force_power_standardize(theta: f64, n: u32) -> Result<f64> {
    let psi = standard_power_state(theta, n)?;
    Ok(standardize(&psi)?.resource.theta())
}

/// `|ψ_θ⟩^{⊗n}` assembled by repeatedly coupling one more standard qubit
/// into total angular momentum. Output is over `|μ ℓ 0 +⟩` labels.
pub fn coupled_power_state(theta: f64, n: u32) -> Result<PureState> {
    if n == 0 || n > MAX_BRUTE_FORCE_COPIES {
        return Err(Error::Size(format!("copy count {n} outside 1..={MAX_BRUTE_FORCE_COPIES}")));
    }
    let q = standard_amplitudes(theta, 2);
    let mut psi = PureState::new(Basis::SelfConjugate(SelfConjLabel::ladder(2)), q.clone())?;
    for _ in 1..n {
        psi = couple_with_qubit_state(&psi, [q[0], q[1]])?;
    }
    Ok(psi)
}

/// Outcome of [`search_tau_infinity_ensemble_violation`].
#[derive(Clone, Debug)]
pub struct EnsembleViolationSearch {
    pub trials: usize,
    /// Trials where `Σ_k p_k τ∞(φ_k) > τ∞(ψ) + 1e-9` (divergent averages included).
    pub violations: usize,
    /// Largest finite excess `Σ_k p_k τ∞(φ_k) - τ∞(ψ)` seen.
    pub max_excess: f64,
    /// Input state and instrument of the largest excess.
    pub witness: Option<(CVector, Instrument)>,
}

/// Randomized search for TRIO instruments that increase `τ∞` on average.
/// `τ∞` is a deterministic monotone but not an ensemble monotone; this
/// utility collects evidence for the latter.
pub fn search_tau_infinity_ensemble_violation(
    dim: usize,
    trials: usize,
    seed: u64,
) -> EnsembleViolationSearch {
    let mut rng = seeded_rng(seed);
    let mut out = EnsembleViolationSearch { trials, violations: 0, max_excess: f64::NEG_INFINITY, witness: None };
    for _ in 0..trials {
        let v = crate::linalg::random_complex_vector(dim.max(1), &mut rng);
        let psi = &v / C64::from(v.norm());
        let outcomes = 2 + (rand::Rng::random_range(&mut rng, 0..3usize));
        let inst = random_trio_instrument(dim.max(1), outcomes, &mut rng);
        let before = neg_log2(conjugate_overlap(&psi));
        let mut average = 0.0;
        let mut diverged = false;
        for (p, phi) in inst.outcomes(&psi) {
            if p <= 1e-15 {
                continue;
            }
            match neg_log2(conjugate_overlap(&(phi / C64::from(p.sqrt())))) {
                ExtReal::Finite(t) => average += p * t,
                ExtReal::Infinite => diverged = true,
            }
        }
        let Some(before) = before.finite() else { continue };
        if diverged {
            out.violations += 1;
            continue;
        }
        let excess = average - before;
        if excess > 1e-9 {
            out.violations += 1;
        }
        if excess > out.max_excess {
            out.max_excess = excess;
            out.witness = Some((psi.clone(), inst.clone()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::AngularLabel;
    use crate::linalg::random_complex_vector;
    use crate::standardform::{standard_state, StandardResource};
    use crate::trio::random_trio_orthogonal;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn tau_examples() {
        let real = PureState::self_conjugate(SelfConjLabel::ladder(3), vec![c(0.6, 0.0), c(0.0, 0.0), c(-0.8, 0.0)])
            .unwrap();
        assert!(tau(&real).unwrap().abs() < 1e-15);
        let max = standard_state(StandardResource::new(FRAC_PI_2).unwrap(), 2).unwrap();
        assert!((tau(&max).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(tau_infinity(&max).unwrap(), ExtReal::Infinite);
        assert_eq!(tau_infinity(&real).unwrap(), ExtReal::Finite(0.0));
        let third = standard_state(StandardResource::new(FRAC_PI_3).unwrap(), 2).unwrap();
        assert!((tau_infinity(&third).unwrap().to_f64() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tau_of_standard_state_is_one_minus_cos() {
        for i in 0..=20 {
            let theta = FRAC_PI_2 * f64::from(i) / 20.0;
            let psi = standard_state(StandardResource::new(theta).unwrap(), 4).unwrap();
            assert!((tau(&psi).unwrap() - (1.0 - theta.cos())).abs() < 1e-15);
        }
    }

    #[test]
    fn tau_needs_normalized_input() {
        let psi = PureState::with_tolerance(
            Basis::SelfConjugate(SelfConjLabel::ladder(1)),
            CVector::from_vec(vec![c(0.9, 0.0)]),
            1.0,
        )
        .unwrap();
        assert!(matches!(tau(&psi), Err(Error::Normalization { .. })));
    }

    #[test]
    fn tau_on_angular_input_uses_self_conjugate_basis() {
        // |1,1,0⟩ = -i |e_{1,1,0,+}⟩ under LL: free state.
        let psi = PureState::angular(vec![AngularLabel { mu: 1, ell: 1, m: 0 }], vec![c(1.0, 0.0)]).unwrap();
        assert!(tau(&psi).unwrap().abs() < 1e-15);
        // |1,1,1⟩ = (|e+⟩ + i|e-⟩)/√2: maximal resource.
        let labels = vec![AngularLabel { mu: 1, ell: 1, m: 1 }, AngularLabel { mu: 1, ell: 1, m: -1 }];
        let psi = PureState::angular(labels, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((tau(&psi).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tau_unchanged_by_reversible_trio() {
        let mut rng = seeded_rng(31);
        for trial in 0..500u64 {
            let d = 2 + (trial as usize % 7);
            let v = random_complex_vector(d, &mut rng);
            let psi = &v / C64::from(v.norm());
            let o = random_trio_orthogonal(d, trial);
            let before = 1.0 - conjugate_overlap(&psi);
            let after = 1.0 - conjugate_overlap(&o.apply(&psi));
            assert!((before - after).abs() < 1e-12);
        }
    }

    #[test]
    fn tensor_power_angle_examples() {
        assert!((tensor_power_angle(0.7, 1) - 0.7).abs() < 1e-15);
        assert!((tensor_power_angle(FRAC_PI_3, 2) - 0.25f64.acos()).abs() < 1e-15);
        assert!((tensor_power_angle(FRAC_PI_3, 2) - 1.318116071652818).abs() < 1e-12);
        for n in 1..6 {
            assert!((tensor_power_angle(FRAC_PI_2, n) - FRAC_PI_2).abs() < 1e-15);
        }
    }

    #[test]
    fn binomial_examples() {
        let e = binomial_expansion(0.4, 1).unwrap();
        assert!((e.coeffs[0] - C64::from_polar(0.5, 0.4)).norm() < 1e-16);
        assert!((e.coeffs[1] - C64::from_polar(0.5, -0.4)).norm() < 1e-16);

        let e = binomial_expansion(FRAC_PI_3, 2).unwrap();
        assert!((e.coeffs[0] - C64::from_polar(0.25, 2.0 * FRAC_PI_3)).norm() < 1e-16);
        assert!((e.coeffs[1] - c(0.5, 0.0)).norm() < 1e-16);
        assert!((e.coeffs[2] - C64::from_polar(0.25, -2.0 * FRAC_PI_3)).norm() < 1e-16);
        assert!((e.sum() - c(0.25, 0.0)).norm() < 1e-15);

        for n in 1..=MAX_EXPANSION_COPIES {
            for i in 0..10 {
                let theta = FRAC_PI_2 * f64::from(i) / 9.0;
                let e = binomial_expansion(theta, n).unwrap();
                let abs: f64 = e.coeffs.iter().map(|z| z.norm()).sum();
                assert!((abs - 1.0).abs() < 1e-12);
                assert!((e.sum() - c(theta.cos().powi(n as i32), 0.0)).norm() < 1e-12);
            }
        }
        assert!(matches!(binomial_expansion(0.1, 0), Err(Error::Size(_))));
        assert!(matches!(binomial_expansion(0.1, 21), Err(Error::Size(_))));
    }

    #[test]
    fn binomial_components_rebuild_the_power() {
        for n in 1..=6 {
            let theta = 0.9;
            let e = binomial_expansion(theta, n).unwrap();
            let mut sum = CVector::zeros(1 << n);
            for k in 0..=n as usize {
                sum += e.component_state(k) * e.amplitude(k);
            }
            let literal = standard_power_state(theta, n).unwrap();
            assert!((sum - literal.amplitudes()).norm() < 1e-13);
        }
    }

    #[test]
    fn brute_force_edges() {
        assert!((brute_force_power_standardize(0.8, 1).unwrap() - 0.8).abs() < 1e-12);
        for n in 1..=6 {
            assert!(brute_force_power_standardize(0.0, n).unwrap().abs() < 1e-12);
        }
        assert!(matches!(brute_force_power_standardize(0.3, 9), Err(Error::Size(_))));
    }

    #[test]
    fn coupled_route_matches_power_angle() {
        for n in 1..=5 {
            for theta in [0.2, 0.7, 1.2] {
                let psi = coupled_power_state(theta, n).unwrap();
                let got = standardize(&psi).unwrap().resource.theta();
                assert!((got - tensor_power_angle(theta, n)).abs() < 1e-9, "n={n} θ={theta}");
            }
        }
    }

    #[test]
    fn tau_infinity_is_additive() {
        let mut rng = seeded_rng(8);
        for _ in 0..50 {
            let a = PureState::normalized(Basis::SelfConjugate(SelfConjLabel::ladder(3)), random_complex_vector(3, &mut rng))
                .unwrap();
            let b = PureState::normalized(Basis::SelfConjugate(SelfConjLabel::ladder(4)), random_complex_vector(4, &mut rng))
                .unwrap();
            let ab = crate::angular::tensor(&a, &b);
            let lhs = tau_infinity(&ab).unwrap().to_f64();
            let rhs = tau_infinity(&a).unwrap().to_f64() + tau_infinity(&b).unwrap().to_f64();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn tau_infinity_search_finds_ensemble_increase() {
        let found = search_tau_infinity_ensemble_violation(2, 200, 3);
        assert_eq!(found.trials, 200);
        assert!(found.violations > 0);
        assert!(found.witness.is_some());
        let again = search_tau_infinity_ensemble_violation(2, 200, 3);
        assert_eq!(found.violations, again.violations);
    }
}
