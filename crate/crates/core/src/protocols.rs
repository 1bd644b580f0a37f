//! Explicit TRIO instruments for state conversion.
//!
//! All protocols act on standard resources `(e^{iθ/2}|0⟩ + e^{-iθ/2}|1⟩)/√2`;
//! an arbitrary state is first brought there with
//! [`standardize`](crate::standardform::standardize).
//!
//! - [`deterministic_convert`]: `θ → γ` with certainty iff `γ ≤ θ`.
//! - [`ensemble_convert`]: `θ → {p_k, γ_k}` iff `Σ p_k τ(γ_k) ≤ τ(θ)`.
//! - [`max_probability`]: best success probability `min{τ(θ)/τ(γ), 1}`.
//! - [`asymptotic_rate`], [`max_copies`]: copy rates from `τ∞`.

use serde::{Deserialize, Serialize};

use crate::linalg::{to_complex, CVector, RMatrix, C64};
use crate::monotones::neg_log2;
use crate::standardform::{align_to_standard, standard_amplitudes, StandardResource};
use crate::trio::{seeded_rng, Instrument};
use crate::{Error, ExtReal, Result, EXACT_TOL};

/// A target ensemble `{(p_k, γ_k)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetEnsemble {
    items: Vec<(f64, StandardResource)>,
}

impl TargetEnsemble {
    /// Requires non-empty items, `p_k ≥ 0` and `Σ p_k = 1` to `1e-12`.
    pub fn new(items: Vec<(f64, StandardResource)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidTarget("ensemble is empty".into()));
        }
        if let Some((p, _)) = items.iter().find(|(p, _)| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidTarget(format!("probability {p} is negative or not finite")));
        }
        let total: f64 = items.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidTarget(format!("probabilities sum to {total}, not 1")));
        }
        Ok(TargetEnsemble { items })
    }

    /// From `(p_k, γ_k)` pairs with angles in radians.
    pub fn from_angles(items: &[(f64, f64)]) -> Result<Self> {
        let items = items
            .iter()
            .map(|&(p, g)| Ok((p, StandardResource::new(g)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(items)
    }

    pub fn items(&self) -> &[(f64, StandardResource)] {
        &self.items
    }

    /// `Σ_k p_k τ(γ_k)`.
    pub fn average_tau(&self) -> f64 {
        self.items.iter().map(|(p, g)| p * g.tau()).sum()
    }
}

/// One measurement round. Outcome `k` applies `instrument[k]` followed by
/// the reversible correction `corrections[k]`, after which the state is the
/// standard state of `resources[k]` up to a global phase.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanStage {
    pub description: String,
    pub instrument: Instrument,
    pub corrections: Vec<RMatrix>,
    pub resources: Vec<StandardResource>,
}

impl PlanStage {
    /// The instrument with corrections folded in, `{O_k K_k}`.
    pub fn corrected_instrument(&self) -> Instrument {
        let kraus = self
            .instrument
            .kraus()
            .iter()
            .zip(&self.corrections)
            .map(|(k, o)| crate::trio::KrausOperator::new(to_complex(o) * k.matrix()))
            .collect();
        Instrument::new(kraus).expect("stage instruments are non-empty with a common shape")
    }
}

/// Expected result of one complete outcome path through a plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    /// Outcome index per stage.
    pub path: Vec<usize>,
    pub probability: f64,
    pub resource: StandardResource,
    /// Index of the target-ensemble item this path produces.
    pub target: usize,
}

/// Parameters of the constructions, reported alongside the instruments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum PlanParameters {
    Deterministic {
        a: f64,
    },
    Ensemble {
        #[serde(rename = "gammaBar")]
        gamma_bar: f64,
        a: f64,
        /// `(a_k, b_k)` of the second-stage Kraus operators `[[a, b], [b, a]]`.
        ab: Vec<(f64, f64)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConversionPlan {
    pub input: StandardResource,
    pub stages: Vec<PlanStage>,
    pub outcomes: Vec<PlanOutcome>,
    pub parameters: PlanParameters,
}

/// A branch produced by [`ConversionPlan::execute`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExecutedBranch {
    pub path: Vec<usize>,
    pub probability: f64,
    /// Normalized post-measurement state (zero vector if the branch has
    /// probability zero).
    pub state: CVector,
}

impl ConversionPlan {
    /// Runs the plan on `psi` with exact branch arithmetic.
    pub fn execute(&self, psi: &CVector) -> Vec<ExecutedBranch> {
        let mut live: Vec<(Vec<usize>, CVector)> = vec![(Vec::new(), psi.clone())];
        for stage in &self.stages {
            let inst = stage.corrected_instrument();
            let mut next = Vec::with_capacity(live.len() * inst.len());
            for (path, v) in &live {
                for (k, (_, out)) in inst.outcomes(v).into_iter().enumerate() {
                    let mut p = path.clone();
                    p.push(k);
                    next.push((p, out));
                }
            }
            live = next;
        }
        live.into_iter()
            .map(|(path, v)| {
                let probability = v.norm_squared();
                let state = if probability > 0.0 { &v / C64::from(probability.sqrt()) } else { v };
                ExecutedBranch { path, probability, state }
            })
            .collect()
    }

    /// Runs the plan on its own input standard state.
    pub fn execute_on_input(&self) -> Vec<ExecutedBranch> {
        self.execute(&standard_amplitudes(self.input.theta(), 2))
    }

    /// Total probability of paths producing ensemble item `target`.
    pub fn target_probability(&self, target: usize) -> f64 {
        self.outcomes.iter().filter(|o| o.target == target).map(|o| o.probability).sum()
    }

    /// Draws `shots` outcome paths using the exact branch probabilities on the
    /// plan's input. Returns counts in the order of [`ConversionPlan::outcomes`].
    pub fn sample(&self, shots: usize, seed: u64) -> Vec<usize> {
        use rand::Rng;
        let mut rng = seeded_rng(seed);
        let probs: Vec<f64> = self.outcomes.iter().map(|o| o.probability).collect();
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..shots {
            let mut u: f64 = rng.random();
            let mut hit = probs.len() - 1;
            for (i, p) in probs.iter().enumerate() {
                if u < *p {
                    hit = i;
                    break;
                }
                u -= p;
            }
            counts[hit] += 1;
        }
        counts
    }
}

fn check_angle(name: &str, theta: f64) -> Result<StandardResource> {
    StandardResource::new(theta).map_err(|_| Error::InvalidAngle(format!("{name} = {theta} is outside [0, π/2]")))
}

/// `A = 1/2 + (1/2)√((cos²γ - cos²θ)/(1 - cos²θ))`.
pub fn deterministic_parameter(theta: f64, gamma: f64) -> f64 {
    let (ct, cg) = (theta.cos(), gamma.cos());
    let den = 1.0 - ct * ct;
    if den <= 0.0 {
        return 0.5;
    }
    0.5 + 0.5 * ((cg * cg - ct * ct) / den).clamp(0.0, 1.0).sqrt()
}

/// The two real Kraus operators
/// `K₁ = [[√(A/2), √((1-A)/2)], [√(A/2), -√((1-A)/2)]]`,
/// `K₂ = [[-√((1-A)/2), √(A/2)], [√((1-A)/2), √(A/2)]]`.
pub fn deterministic_kraus(a: f64) -> [RMatrix; 2] {
    let p = (a / 2.0).sqrt();
    let q = ((1.0 - a) / 2.0).sqrt();
    [
        RMatrix::from_row_slice(2, 2, &[p, q, p, -q]),
        RMatrix::from_row_slice(2, 2, &[-q, p, q, p]),
    ]
}

/// Builds a stage from real Kraus operators acting on the standard state of
/// `input`, computing each branch's correction by standardizing it.
fn stage_from_kraus(description: String, kraus: Vec<RMatrix>, input: StandardResource) -> Result<(PlanStage, Vec<f64>)> {
    let psi = standard_amplitudes(input.theta(), 2);
    let mut corrections = Vec::with_capacity(kraus.len());
    let mut resources = Vec::with_capacity(kraus.len());
    let mut probs = Vec::with_capacity(kraus.len());
    for k in &kraus {
        let out = to_complex(k) * &psi;
        let p = out.norm_squared();
        probs.push(p);
        if p <= 1e-300 {
            corrections.push(RMatrix::identity(2, 2));
            resources.push(StandardResource::free());
            continue;
        }
        let (res, o, _) = align_to_standard(&(&out / C64::from(p.sqrt())))?;
        corrections.push(o);
        resources.push(res);
    }
    let instrument = Instrument::from_real(&kraus)?;
    Ok((PlanStage { description, instrument, corrections, resources }, probs))
}

/// Deterministic conversion `θ → γ` (requires `γ ≤ θ`).
pub fn deterministic_convert(theta: f64, gamma: f64) -> Result<ConversionPlan> {
    let input = check_angle("θ", theta)?;
    let target = check_angle("γ", gamma)?;
    if target.theta() > input.theta() + EXACT_TOL {
        return Err(Error::MonotoneViolation(format!(
            "τ would increase: γ = {} > θ = {}",
            target.theta(),
            input.theta()
        )));
    }
    let gamma = target.theta().min(input.theta());
    let a = deterministic_parameter(input.theta(), gamma);
    let (stage, probs) = stage_from_kraus(
        format!("two-outcome measurement with A = {a}"),
        deterministic_kraus(a).to_vec(),
        input,
    )?;
    let target = StandardResource::new(gamma)?;
    let outcomes = probs
        .iter()
        .enumerate()
        .map(|(k, p)| PlanOutcome { path: vec![k], probability: *p, resource: target, target: 0 })
        .collect();
    Ok(ConversionPlan {
        input,
        stages: vec![stage],
        outcomes,
        parameters: PlanParameters::Deterministic { a },
    })
}

/// Second-stage coefficients `(a_k, b_k)` taking `φ̄(γ̄)` to `√p_k φ(γ_k)`,
/// with `cos²(γ̄/2) = Σ p_k cos²(γ_k/2)`, `sin²(γ̄/2) = Σ p_k sin²(γ_k/2)`.
/// Returns `(γ̄, [(a_k, b_k)])`.
pub fn ensemble_coefficients(target: &TargetEnsemble) -> (f64, Vec<(f64, f64)>) {
    let items = target.items();
    let s2: f64 = items.iter().map(|(p, g)| p * (g.theta() / 2.0).sin().powi(2)).sum();
    let c2: f64 = items.iter().map(|(p, g)| p * (g.theta() / 2.0).cos().powi(2)).sum();
    let (s, c) = (s2.sqrt(), c2.sqrt());
    let gamma_bar = 2.0 * s.atan2(c);
    let ab = items
        .iter()
        .map(|(p, g)| {
            let rp = p.sqrt();
            if s == 0.0 {
                // every γ_k = 0: K_k = √p_k·1
                return (rp, 0.0);
            }
            let (gs, gc) = (g.theta() / 2.0).sin_cos();
            (0.5 * rp * (gc / c + gs / s), 0.5 * rp * (gc / c - gs / s))
        })
        .collect();
    (gamma_bar, ab)
}

/// Converts `θ` into the ensemble `{p_k, γ_k}`: a deterministic step to the
/// average resource `γ̄` (`cos γ̄ = Σ p_k cos γ_k`) followed by the instrument
/// `K_k = [[a_k, b_k], [b_k, a_k]]`.
pub fn ensemble_convert(theta: f64, target: &TargetEnsemble) -> Result<ConversionPlan> {
    let input = check_angle("θ", theta)?;
    let avg = target.average_tau();
    if avg > input.tau() + EXACT_TOL {
        return Err(Error::MonotoneViolation(format!(
            "average τ of the target ({avg}) exceeds τ of the input ({})",
            input.tau()
        )));
    }
    if input.theta() <= EXACT_TOL && target.items().iter().any(|(p, g)| *p > 0.0 && g.theta() > EXACT_TOL) {
        return Err(Error::MonotoneViolation("a free input cannot produce a resource".into()));
    }
    let (gamma_bar, ab) = ensemble_coefficients(target);
    let gamma_bar = gamma_bar.min(input.theta());
    let first = deterministic_convert(input.theta(), gamma_bar)?;
    let PlanParameters::Deterministic { a } = first.parameters else { unreachable!() };
    let bar = StandardResource::new(gamma_bar)?;

    let kraus: Vec<RMatrix> = ab.iter().map(|&(a, b)| RMatrix::from_row_slice(2, 2, &[a, b, b, a])).collect();
    let (second, probs2) = stage_from_kraus(
        format!("{}-outcome ensemble preparation from γ̄ = {gamma_bar}", kraus.len()),
        kraus,
        bar,
    )?;
    let mut outcomes = Vec::new();
    for first_outcome in &first.outcomes {
        for (k, p2) in probs2.iter().enumerate() {
            let mut path = first_outcome.path.clone();
            path.push(k);
            outcomes.push(PlanOutcome {
                path,
                probability: first_outcome.probability * p2,
                resource: target.items()[k].1,
                target: k,
            });
        }
    }
    Ok(ConversionPlan {
        input,
        stages: vec![first.stages.into_iter().next().expect("one stage"), second],
        outcomes,
        parameters: PlanParameters::Ensemble { gamma_bar, a, ab },
    })
}

/// Maximal success probability of `θ → γ` and a plan achieving it. On
/// failure the plan lands on the free state (ensemble item 1).
pub fn max_probability(theta: f64, gamma: f64) -> Result<(f64, ConversionPlan)> {
    let input = check_angle("θ", theta)?;
    let target = check_angle("γ", gamma)?;
    if target.theta() <= EXACT_TOL || target.theta() <= input.theta() + EXACT_TOL {
        let g = target.theta().min(input.theta());
        return Ok((1.0, deterministic_convert(input.theta(), g)?));
    }
    let p = (input.tau() / target.tau()).min(1.0);
    let ens = TargetEnsemble::new(vec![(p, target), (1.0 - p, StandardResource::free())])?;
    Ok((p, ensemble_convert(input.theta(), &ens)?))
}

/// Asymptotic conversion rate `τ∞(ψ)/τ∞(φ)` between standard resources.
pub fn asymptotic_rate(theta_psi: f64, theta_phi: f64) -> Result<ExtReal> {
    let psi = check_angle("θψ", theta_psi)?;
    let phi = check_angle("θφ", theta_phi)?;
    if phi.theta() <= EXACT_TOL {
        return Err(Error::InvalidTarget("target is a free state; any number of copies can be made".into()));
    }
    if psi.theta() <= EXACT_TOL {
        return Ok(ExtReal::Finite(0.0));
    }
    Ok(match (neg_log2(psi.theta().cos()), neg_log2(phi.theta().cos())) {
        (ExtReal::Infinite, ExtReal::Infinite) => ExtReal::Finite(1.0),
        (ExtReal::Infinite, _) => ExtReal::Infinite,
        (_, ExtReal::Infinite) => ExtReal::Finite(0.0),
        (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a / b),
    })
}

/// Copy count reachable from `n` copies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CopyCount {
    Finite(u64),
    Unbounded(UnboundedMarker),
}

/// Serialized as the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnboundedMarker {
    #[serde(rename = "inf")]
    Inf,
}

impl CopyCount {
    pub const UNBOUNDED: CopyCount = CopyCount::Unbounded(UnboundedMarker::Inf);

    pub fn finite(self) -> Option<u64> {
        match self {
            CopyCount::Finite(m) => Some(m),
            CopyCount::Unbounded(_) => None,
        }
    }
}

/// Largest `m` with `m·τ∞(φ) ≤ n·τ∞(ψ) + 1e-12`.
pub fn max_copies(n: u64, theta_psi: f64, theta_phi: f64) -> Result<CopyCount> {
    if n == 0 {
        return Err(Error::Size("need at least one input copy".into()));
    }
    let psi = check_angle("θψ", theta_psi)?;
    let phi = check_angle("θφ", theta_phi)?;
    if phi.theta() <= EXACT_TOL {
        return Err(Error::InvalidTarget("target is a free state; any number of copies can be made".into()));
    }
    let (a, b) = match (neg_log2(psi.theta().cos()), neg_log2(phi.theta().cos())) {
        (ExtReal::Infinite, _) => return Ok(CopyCount::UNBOUNDED),
        (_, ExtReal::Infinite) => return Ok(CopyCount::Finite(0)),
        (ExtReal::Finite(a), ExtReal::Finite(b)) => (a, b),
    };
    let budget = n as f64 * a + EXACT_TOL;
    let fits = |m: u64| m as f64 * b <= budget;
    let mut m = (budget / b).floor().max(0.0) as u64;
    while m > 0 && !fits(m) {
        m -= 1;
    }
    while fits(m + 1) {
        m += 1;
    }
    Ok(CopyCount::Finite(m))
}
