//! Property suites behind `trframe verify <suite>`.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use trframe::angular::{
    apply_time_reversal, clebsch_gordan, factorwise_time_reversal, self_conjugate_transform, tensor, AngularLabel,
    Basis, PhaseConvention, PureState, SelfConjLabel,
};
use trframe::monotones::{
    brute_force_power_standardize, conjugate_overlap, search_tau_infinity_ensemble_violation, tau,
    tau_infinity, tensor_power_angle,
};
use trframe::protocols::{
    deterministic_convert, deterministic_kraus, ensemble_convert, max_copies, max_probability, CopyCount,
    PlanParameters, TargetEnsemble,
};
use trframe::standardform::{standard_amplitudes, standard_state, StandardResource};
use trframe::trio::{
    covariance_check, group_average, imaginary_defect, is_trio, random_orthogonal, random_real, random_state,
    random_trio_instrument, validate_instrument, DensityOperator, Instrument, KrausOperator,
};
use trframe::{CMatrix, CVector, ExtReal, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Basis,
    Trio,
    Monotone,
    Protocols,
    Asymptotic,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Basis => "basis",
            Suite::Trio => "trio",
            Suite::Monotone => "monotone",
            Suite::Protocols => "protocols",
            Suite::Asymptotic => "asymptotic",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Basis => 50,
            Suite::Trio => 100,
            Suite::Monotone => 1000,
            Suite::Protocols => 200,
            Suite::Asymptotic => 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PropertyReport {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub max_defect: f64,
    pub tolerance: f64,
}

impl PropertyReport {
    fn new(name: &str, tolerance: f64) -> Self {
        PropertyReport { name: name.into(), trials: 0, passed: 0, failed: 0, max_defect: 0.0, tolerance }
    }

    /// Records a trial whose defect must not exceed the tolerance.
    fn defect(&mut self, d: f64) {
        self.check(d <= self.tolerance, d);
    }

    fn check(&mut self, ok: bool, d: f64) {
        self.trials += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        if d.is_nan() || d > self.max_defect {
            self.max_defect = if d.is_nan() { f64::MAX } else { d };
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0 && self.trials > 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub pass: bool,
    pub properties: Vec<PropertyReport>,
    /// Findings reported without a pass/fail verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notes: Option<Value>,
}

pub fn run_suite(suite: Suite, trials: usize, seed: u64, tol: f64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (properties, notes) = match suite {
        Suite::Basis => (basis(trials, &mut rng), None),
        Suite::Trio => (trio(trials, &mut rng, tol), None),
        Suite::Monotone => monotone(trials, seed, &mut rng, tol),
        Suite::Protocols => (protocols(trials, &mut rng, tol), None),
        Suite::Asymptotic => (asymptotic(trials, &mut rng), None),
    };
    SuiteReport { suite: suite.name(), pass: properties.iter().all(PropertyReport::ok), properties, notes }
}

const CONVENTIONS: [PhaseConvention; 2] = [PhaseConvention::LandauLifshitz, PhaseConvention::Sakurai];

fn multiplet(mu: u32, ell: u32) -> Vec<AngularLabel> {
    (-(ell as i32)..=ell as i32).map(|m| AngularLabel { mu, ell, m }).collect()
}

fn max_diff(a: &CVector, b: &CVector) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_angular(ell: u32, rng: &mut ChaCha8Rng) -> PureState {
    PureState::new(Basis::Angular(multiplet(1, ell)), random_state((2 * ell + 1) as usize, rng))
        .expect("random states are normalized")
}

fn basis(trials: usize, rng: &mut ChaCha8Rng) -> Vec<PropertyReport> {
    let mut fixed = PropertyReport::new("selfConjugateFixedPoints", 1e-12);
    for conv in CONVENTIONS {
        for ell in 0..=4 {
            let labels = multiplet(1, ell);
            let t = self_conjugate_transform(&labels, conv).expect("complete multiplet");
            for col in 0..labels.len() {
                let e = PureState::new(Basis::Angular(t.angular.clone()), t.matrix.column(col).into_owned())
                    .expect("columns are unit vectors");
                let image = apply_time_reversal(&e, conv).expect("complete multiplet");
                fixed.defect(max_diff(image.amplitudes(), e.amplitudes()));
            }
        }
    }

    let mut involution = PropertyReport::new("timeReversalInvolution", 1e-12);
    for _ in 0..trials {
        let psi = random_angular(rng.random_range(0..=4), rng);
        for conv in CONVENTIONS {
            let twice = apply_time_reversal(&apply_time_reversal(&psi, conv).unwrap(), conv).unwrap();
            involution.defect(max_diff(twice.amplitudes(), psi.amplitudes()));
        }
    }

    let mut cg = PropertyReport::new("clebschGordanSignIdentity", 1e-12);
    for l1 in 0..=4u32 {
        for l2 in 0..=4u32 {
            for big_l in l1.abs_diff(l2)..=l1 + l2 {
                let sign = if (l1 + l2 + big_l) % 2 == 0 { 1.0 } else { -1.0 };
                for m1 in -(l1 as i32)..=l1 as i32 {
                    for m2 in -(l2 as i32)..=l2 as i32 {
                        let a = clebsch_gordan(l1, m1, l2, m2, big_l, m1 + m2);
                        let b = clebsch_gordan(l1, -m1, l2, -m2, big_l, -m1 - m2);
                        cg.defect((a - sign * b).abs());
                    }
                }
            }
        }
    }

    let mut factor = PropertyReport::new("landauLifshitzFactorization", 1e-12);
    for _ in 0..trials {
        let a = random_angular(rng.random_range(0..=3), rng);
        let b = random_angular(rng.random_range(0..=3), rng);
        let ab = tensor(&a, &b);
        let joint = apply_time_reversal(&ab, PhaseConvention::LandauLifshitz).unwrap();
        let split = factorwise_time_reversal(&ab, PhaseConvention::LandauLifshitz);
        factor.defect(max_diff(joint.amplitudes(), split.amplitudes()));
    }

    let mut sakurai = PropertyReport::new("sakuraiCounterexample", 0.0);
    let (mismatch, l1_flip, l2_agree) = sakurai_counterexample();
    sakurai.check(mismatch > 0.5 && l1_flip < 1e-12 && l2_agree < 1e-12, l1_flip.max(l2_agree));

    vec![fixed, involution, cg, factor, sakurai]
}

/// `|1,1,1⟩⊗|1,1,0⟩` under the Sakurai convention. Returns the largest
/// amplitude mismatch between coupled and factorwise reversal, and the
/// defects of "the `L = 1` channel flips sign" and "the `L = 2` channel
/// agrees".
pub fn sakurai_counterexample() -> (f64, f64, f64) {
    let conv = PhaseConvention::Sakurai;
    let ket = |m: i32| {
        let mut amp = CVector::zeros(3);
        amp[(m + 1) as usize] = C64::new(1.0, 0.0);
        PureState::new(Basis::Angular(multiplet(1, 1)), amp).unwrap()
    };
    let product = tensor(&ket(1), &ket(0));
    let joint = apply_time_reversal(&product, conv).unwrap();
    let split = factorwise_time_reversal(&product, conv);
    let channel = |s: &PureState, big_l: u32| -> f64 {
        let mut acc = 0.0;
        for m1 in -1..=1i32 {
            let m2 = -1 - m1;
            if m2.abs() <= 1 {
                let idx = ((m1 + 1) * 3 + (m2 + 1)) as usize;
                acc += clebsch_gordan(1, m1, 1, m2, big_l, -1) * s.amplitudes()[idx].re;
            }
        }
        acc
    };
    (
        max_diff(joint.amplitudes(), split.amplitudes()),
        (channel(&joint, 1) + channel(&split, 1)).abs(),
        (channel(&joint, 2) - channel(&split, 2)).abs(),
    )
}

fn random_phase(rng: &mut ChaCha8Rng) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..TAU))
}

/// Real Gaussian matrix times a random global phase.
pub fn random_phased_real(d: usize, rng: &mut ChaCha8Rng) -> KrausOperator {
    let phase = random_phase(rng);
    KrausOperator::new(random_real(d, d, rng).map(|x| phase * x))
}

/// Complex matrix whose imaginary part cannot be removed by a global
/// phase; the defect is at least `min_defect`.
pub fn random_irreducibly_complex(d: usize, min_defect: f64, rng: &mut ChaCha8Rng) -> KrausOperator {
    loop {
        let re = random_real(d, d, rng);
        let im = random_real(d, d, rng) * rng.random_range(0.01..1.0);
        let phase = random_phase(rng);
        let k = KrausOperator::new(CMatrix::from_fn(d, d, |r, c| phase * C64::new(re[(r, c)], im[(r, c)])));
        if imaginary_defect(&k) >= min_defect {
            return k;
        }
    }
}

fn trio(trials: usize, rng: &mut ChaCha8Rng, tol: f64) -> Vec<PropertyReport> {
    let mut forward = PropertyReport::new("realKrausIsCovariant", tol);
    let mut converse = PropertyReport::new("complexKrausIsNotCovariant", tol);
    for i in 0..trials {
        let d = rng.random_range(2..=8);
        let k = random_phased_real(d, rng);
        forward.check(is_trio(&k, 1e-12) && covariance_check(&k, 20, i as u64, tol), imaginary_defect(&k));
        let k = random_irreducibly_complex(d, 1e-3, rng);
        converse.check(!is_trio(&k, tol) && !covariance_check(&k, 50, i as u64, tol), 0.0);
    }

    let mut average = PropertyReport::new("groupAverageIdempotentAndReal", 1e-12);
    for _ in 0..trials {
        let d = rng.random_range(1..=6);
        let rho = DensityOperator::pure(&random_state(d, rng)).unwrap();
        let once = group_average(&rho);
        let twice = group_average(&once);
        let imag = once.matrix().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let drift = (once.matrix() - twice.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        average.defect(imag.max(drift));
    }

    let mut reversible = PropertyReport::new("orthogonalPreservesTau", 1e-12);
    for _ in 0..trials {
        let d = rng.random_range(1..=8);
        let psi = random_state(d, rng);
        let o = random_orthogonal(d, rng).map(|x| C64::new(x, 0.0));
        reversible.defect((conjugate_overlap(&psi) - conjugate_overlap(&(o * &psi))).abs());
    }

    let mut pair = PropertyReport::new("twoOutcomePairComplete", 1e-12);
    for i in 0..=100 {
        let a = f64::from(i) / 100.0;
        let inst = Instrument::from_real(&deterministic_kraus(a)).unwrap();
        let r = validate_instrument(&inst, 1e-12).unwrap();
        pair.check(r.complete && r.trio, r.defect);
    }

    vec![forward, converse, average, reversible, pair]
}

fn monotone(trials: usize, seed: u64, rng: &mut ChaCha8Rng, tol: f64) -> (Vec<PropertyReport>, Option<Value>) {
    let mut ensemble = PropertyReport::new("tauEnsembleMonotone", tol);
    for _ in 0..trials {
        let d = rng.random_range(2..=8);
        let inst = random_trio_instrument(d, rng.random_range(1..=4), rng);
        let psi = random_state(d, rng);
        let before = 1.0 - conjugate_overlap(&psi);
        let after: f64 = inst
            .outcomes(&psi)
            .into_iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(p, v)| p * (1.0 - conjugate_overlap(&(v / C64::from(p.sqrt())))))
            .sum();
        ensemble.defect((after - before).max(0.0));
    }

    let mut standard = PropertyReport::new("tauOfStandardState", 1e-12);
    for i in 0..=100 {
        let theta = FRAC_PI_2 * f64::from(i) / 100.0;
        for d in [2, 5] {
            let psi = standard_state(StandardResource::new(theta).unwrap(), d).unwrap();
            standard.defect((tau(&psi).unwrap() - (1.0 - theta.cos())).abs());
        }
    }

    let search = search_tau_infinity_ensemble_violation(4, trials.min(2000), seed);
    let notes = json!({
        "tauInfinityEnsembleSearch": {
            "dim": 4,
            "trials": search.trials,
            "violations": search.violations,
            "maxFiniteExcess": if search.max_excess.is_finite() { json!(search.max_excess) } else { Value::Null },
        }
    });
    (vec![ensemble, standard], Some(notes))
}

/// Random ensemble with `Σ p_k τ(γ_k) ≤ τ(θ)`; the probabilities sum to 1
/// exactly.
pub fn random_feasible_ensemble(theta: f64, rng: &mut ChaCha8Rng) -> TargetEnsemble {
    let k = rng.random_range(1..=4);
    let mut p: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    let rest: f64 = p[1..].iter().sum();
    p[0] = 1.0 - rest;
    let budget = 1.0 - theta.cos();
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..=1.0)).collect();
    let avg: f64 = p.iter().zip(&raw).map(|(p, t)| p * t).sum();
    let scale = if avg > 0.0 { (budget / avg).min(1.0) * rng.random_range(0.5..=1.0) } else { 0.0 };
    let items: Vec<(f64, f64)> = p.iter().zip(&raw).map(|(p, t)| (*p, (1.0 - (t * scale).min(1.0)).acos())).collect();
    TargetEnsemble::from_angles(&items).expect("feasible by construction")
}

/// Largest elementwise gap of `K_k φ̄ = √p_k φ_k` over the ensemble stage of
/// an ensemble plan.
pub fn ensemble_stage_defect(target: &TargetEnsemble, params: &PlanParameters) -> f64 {
    let PlanParameters::Ensemble { gamma_bar, ab, .. } = params else { return f64::INFINITY };
    let bar = standard_amplitudes(*gamma_bar, 2);
    target
        .items()
        .iter()
        .zip(ab)
        .map(|((p, g), &(a, b))| {
            let k = CMatrix::from_row_slice(2, 2, &[a.into(), b.into(), b.into(), a.into()]);
            max_diff(&(k * &bar), &(standard_amplitudes(g.theta(), 2) * C64::from(p.sqrt())))
        })
        .fold(0.0, f64::max)
}

fn protocols(trials: usize, rng: &mut ChaCha8Rng, tol: f64) -> Vec<PropertyReport> {
    let mut grid = PropertyReport::new("deterministicGrid", 1e-10);
    let mut necessity = PropertyReport::new("deterministicNecessity", 0.0);
    let mut soundness = PropertyReport::new("monotoneSoundness", tol);
    for i in 0..50 {
        for j in 0..50 {
            let theta = FRAC_PI_2 * f64::from(i) / 49.0;
            let gamma = theta * f64::from(j) / 49.0;
            let plan = deterministic_convert(theta, gamma).unwrap();
            let r = validate_instrument(&plan.stages[0].instrument, 1e-10).unwrap();
            let mut d = if r.complete && r.trio { r.defect } else { f64::INFINITY };
            let mut average = 0.0;
            for b in plan.execute_on_input() {
                let t = 1.0 - conjugate_overlap(&b.state);
                average += b.probability * t;
                d = d.max((t - (1.0 - gamma.cos())).abs());
            }
            grid.defect(d);
            soundness.defect((average - (1.0 - theta.cos())).max(0.0));

            let above = theta + (FRAC_PI_2 - theta) * f64::from(j + 1) / 50.0;
            if above > theta + 1e-12 {
                let rejected = matches!(deterministic_convert(theta, above), Err(trframe::Error::MonotoneViolation(_)));
                necessity.check(rejected, 0.0);
            }
        }
    }

    let mut ensemble = PropertyReport::new("ensembleKrausAction", 1e-10);
    for _ in 0..trials {
        let theta = rng.random_range(0.0..=FRAC_PI_2);
        let target = random_feasible_ensemble(theta, rng);
        let plan = ensemble_convert(theta, &target).unwrap();
        let mut d = ensemble_stage_defect(&target, &plan.parameters);
        for stage in &plan.stages {
            let r = validate_instrument(&stage.instrument, 1e-10).unwrap();
            d = d.max(if r.complete && r.trio { r.defect } else { f64::INFINITY });
        }
        ensemble.defect(d);
        let average: f64 = plan
            .execute_on_input()
            .iter()
            .filter(|b| b.probability > 0.0)
            .map(|b| b.probability * (1.0 - conjugate_overlap(&b.state)))
            .sum();
        soundness.defect((average - (1.0 - theta.cos())).max(0.0));
    }

    let mut corollary = PropertyReport::new("maxProbability", 1e-10);
    for _ in 0..trials {
        let theta = rng.random_range(0.0..=FRAC_PI_2);
        let gamma = rng.random_range(0.0..=FRAC_PI_2);
        let (p, plan) = max_probability(theta, gamma).unwrap();
        let expected = if gamma == 0.0 { 1.0 } else { ((1.0 - theta.cos()) / (1.0 - gamma.cos())).min(1.0) };
        let simulated: f64 = plan
            .execute_on_input()
            .iter()
            .zip(&plan.outcomes)
            .filter(|(_, o)| o.target == 0)
            .map(|(b, _)| b.probability)
            .sum();
        corollary.defect((simulated - expected).abs().max((p - expected).abs()));
    }

    vec![grid, necessity, ensemble, corollary, soundness]
}

fn asymptotic(trials: usize, rng: &mut ChaCha8Rng) -> Vec<PropertyReport> {
    let mut brute = PropertyReport::new("bruteForcePowerAngle", 1e-9);
    for theta in [0.2, 0.7, 1.2] {
        for n in 1..=6 {
            let b = brute_force_power_standardize(theta, n).unwrap();
            brute.defect((b - tensor_power_angle(theta, n)).abs());
        }
    }

    let mut additivity = PropertyReport::new("tauInfinityAdditivity", 1e-10);
    for _ in 0..trials {
        let mk = |rng: &mut ChaCha8Rng| {
            let d = rng.random_range(2..=5);
            PureState::new(Basis::SelfConjugate(SelfConjLabel::ladder(d)), random_state(d, rng)).unwrap()
        };
        let (a, b) = (mk(rng), mk(rng));
        let joint = tau_infinity(&tensor(&a, &b)).unwrap();
        match (tau_infinity(&a).unwrap(), tau_infinity(&b).unwrap(), joint) {
            (ExtReal::Finite(x), ExtReal::Finite(y), ExtReal::Finite(z)) => {
                additivity.defect((x + y - z).abs() / (1.0 + z.abs()))
            }
            (_, _, j) => additivity.check(j.is_infinite(), 0.0),
        }
    }

    let mut copies = PropertyReport::new("maxCopies", 0.0);
    let example = max_copies(4, 0.5f64.acos(), 0.25f64.acos()).unwrap();
    copies.check(example == CopyCount::Finite(2), 0.0);
    for _ in 0..trials {
        let tp = rng.random_range(0.05..FRAC_PI_2);
        let tf = rng.random_range(0.05..FRAC_PI_2);
        let n = rng.random_range(1..=6u32);
        let Ok(CopyCount::Finite(m)) = max_copies(u64::from(n), tp, tf) else {
            copies.check(false, 0.0);
            continue;
        };
        let have = tensor_power_angle(tp, n).cos();
        let reach = |k: u64| tf.cos().powi(k as i32) >= have * (1.0 - 1e-12);
        copies.check(reach(m) && !reach(m + 1), 0.0);
    }

    vec![brute, additivity, copies]
}
