//! Acceptance criteria. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion, including its time budget.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trframe::angular::{
    apply_time_reversal, clebsch_gordan, factorwise_time_reversal, self_conjugate_transform, tensor, AngularLabel,
    Basis, PhaseConvention, PureState, SelfConjLabel,
};
use trframe::monotones::{brute_force_power_standardize, conjugate_overlap, tau_infinity};
use trframe::protocols::{deterministic_convert, ensemble_convert, max_copies, max_probability, CopyCount};
use trframe::standardform::{standardize_amplitudes, two_slot_form};
use trframe::trio::{covariance_check, random_state, random_trio_instrument, validate_instrument, KrausOperator};
use trframe::{CMatrix, CVector, ExtReal, RMatrix, C64};
use trframe_cli::verify::{
    ensemble_stage_defect, random_feasible_ensemble, random_irreducibly_complex, random_phased_real,
    sakurai_counterexample,
};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn max_diff(a: &CVector, b: &CVector) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn multiplet(ell: u32) -> Vec<AngularLabel> {
    (-(ell as i32)..=ell as i32).map(|m| AngularLabel { mu: 1, ell, m }).collect()
}

fn self_conjugate_fixed_points() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for conv in [PhaseConvention::LandauLifshitz, PhaseConvention::Sakurai] {
        for ell in 0..=4 {
            let t = self_conjugate_transform(&multiplet(ell), conv).map_err(|e| e.to_string())?;
            for col in 0..t.matrix.ncols() {
                let e = PureState::new(Basis::Angular(t.angular.clone()), t.matrix.column(col).into_owned())
                    .map_err(|e| e.to_string())?;
                let image = apply_time_reversal(&e, conv).map_err(|e| e.to_string())?;
                worst = worst.max(max_diff(image.amplitudes(), e.amplitudes()));
                count += 1;
            }
        }
    }
    ensure(worst <= 1e-12, format!("max |θ̂e - e| = {worst:e}"))?;
    Ok(format!("{count} basis vectors, max defect {worst:.1e}"))
}

/// `min_φ max |Im(e^{iφ}K)|` by a dense scan over `φ ∈ [0, π)`.
fn irreducible_imaginary(k: &CMatrix) -> f64 {
    let eval = |phi: f64| {
        let p = C64::from_polar(1.0, phi);
        k.iter().map(|z| (z * p).im.abs()).fold(0.0, f64::max)
    };
    let steps = 4000;
    let (mut best_phi, mut best) = (0.0, f64::INFINITY);
    for i in 0..steps {
        let phi = PI * f64::from(i) / f64::from(steps);
        let v = eval(phi);
        if v < best {
            (best_phi, best) = (phi, v);
        }
    }
    let mut h = PI / f64::from(steps);
    for _ in 0..60 {
        for cand in [best_phi - h, best_phi + h] {
            let v = eval(cand);
            if v < best {
                (best_phi, best) = (cand, v);
            }
        }
        h *= 0.7;
    }
    best
}

fn real_kraus_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut real_pass = 0;
    for i in 0..120u64 {
        let k = random_phased_real(rng.random_range(2..=8), &mut rng);
        ensure(covariance_check(&k, 20, i, 1e-9), format!("real operator {i} failed covariance"))?;
        real_pass += 1;
    }
    let mut complex_fail = 0;
    let mut smallest = f64::INFINITY;
    for i in 0..120u64 {
        let d = rng.random_range(2..=8);
        let k = if i % 2 == 0 {
            random_irreducibly_complex(d, 1e-3, &mut rng)
        } else {
            // imaginary part close to the threshold
            let re = trframe::trio::random_real(d, d, &mut rng);
            let im = trframe::trio::random_real(d, d, &mut rng);
            let scale = 1.5e-3 / im.amax();
            KrausOperator::new(CMatrix::from_fn(d, d, |r, c| C64::new(re[(r, c)], scale * im[(r, c)])))
        };
        let irreducible = irreducible_imaginary(k.matrix());
        if irreducible < 1e-3 {
            continue;
        }
        smallest = smallest.min(irreducible);
        ensure(!covariance_check(&k, 50, 1000 + i, 1e-12), format!("complex operator {i} passed covariance"))?;
        complex_fail += 1;
    }
    ensure(complex_fail >= 100, format!("only {complex_fail} complex operators with irreducible part ≥ 1e-3"))?;
    Ok(format!(
        "{real_pass} real operators covariant, {complex_fail} complex operators rejected (smallest irreducible part {smallest:.2e})"
    ))
}

fn standard_form_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut orth, mut form, mut cosd) = (0.0f64, 0.0f64, 0.0f64);
    for d in 2..=16 {
        let id = RMatrix::identity(d, d);
        for _ in 0..1000 {
            let psi = random_state(d, &mut rng);
            let res = standardize_amplitudes(&psi).map_err(|e| e.to_string())?;
            orth = orth.max((res.transform.transpose() * &res.transform - &id).amax());
            form = form.max(max_diff(&res.reduce(&psi), &two_slot_form(res.resource.theta(), d)));
            let overlap = psi.iter().map(|z| z * z).sum::<C64>().norm();
            cosd = cosd.max((res.resource.theta().cos() - overlap).abs());
        }
    }
    ensure(orth <= 1e-10, format!("orthogonality defect {orth:e}"))?;
    ensure(form <= 1e-9, format!("two-slot defect {form:e}"))?;
    ensure(cosd <= 1e-10, format!("cos θ defect {cosd:e}"))?;
    Ok(format!("15000 states, orthogonality {orth:.1e}, form {form:.1e}, cos θ {cosd:.1e}"))
}

fn ensemble_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let d = rng.random_range(2..=8);
        let inst = random_trio_instrument(d, rng.random_range(1..=5), &mut rng);
        let psi = random_state(d, &mut rng);
        let before = 1.0 - conjugate_overlap(&psi);
        let after: f64 = inst
            .outcomes(&psi)
            .into_iter()
            .filter(|(p, _)| *p > 0.0)
            .map(|(p, v)| p * (1.0 - conjugate_overlap(&(v / C64::from(p.sqrt())))))
            .sum();
        if after > before + 1e-9 {
            violations += 1;
        }
        worst = worst.max(after - before);
    }
    ensure(violations == 0, format!("{violations} violations, worst increase {worst:e}"))?;
    Ok(format!("1000 pairs, largest change {worst:.2e}"))
}

fn theorem3_grid() -> Outcome {
    let (mut defect, mut tau_gap) = (0.0f64, 0.0f64);
    for i in 0..50 {
        for j in 0..50 {
            let theta = FRAC_PI_2 * f64::from(i) / 49.0;
            let gamma = theta * f64::from(j) / 49.0;
            let plan = deterministic_convert(theta, gamma).map_err(|e| e.to_string())?;
            let r = validate_instrument(&plan.stages[0].instrument, 1e-10).map_err(|e| e.to_string())?;
            ensure(r.complete && r.trio, format!("θ={theta} γ={gamma}: {r:?}"))?;
            defect = defect.max(r.defect);
            let psi = trframe::standardform::standard_amplitudes(theta, 2);
            for k in plan.stages[0].instrument.kraus() {
                let out = k.apply(&psi);
                let p = out.norm_squared();
                if p > 0.0 {
                    let t = 1.0 - conjugate_overlap(&(out / C64::from(p.sqrt())));
                    tau_gap = tau_gap.max((t - (1.0 - gamma.cos())).abs());
                }
            }
            let above = theta + (FRAC_PI_2 - theta) * f64::from(j + 1) / 50.0 + 2e-12;
            if above <= FRAC_PI_2 {
                ensure(
                    matches!(deterministic_convert(theta, above), Err(trframe::Error::MonotoneViolation(_))),
                    format!("θ={theta} γ={above} accepted"),
                )?;
            }
        }
    }
    ensure(tau_gap <= 1e-10, format!("branch τ gap {tau_gap:e}"))?;
    Ok(format!("2500 plans, completeness defect {defect:.1e}, branch τ gap {tau_gap:.1e}"))
}

fn theorem4_random() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut action, mut defect) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let theta = rng.random_range(0.0..=FRAC_PI_2);
        let target = random_feasible_ensemble(theta, &mut rng);
        let plan = ensemble_convert(theta, &target).map_err(|e| e.to_string())?;
        action = action.max(ensemble_stage_defect(&target, &plan.parameters));
        for stage in &plan.stages {
            let r = validate_instrument(&stage.instrument, 1e-10).map_err(|e| e.to_string())?;
            ensure(r.complete && r.trio, format!("{r:?}"))?;
            defect = defect.max(r.defect);
        }
    }
    ensure(action <= 1e-10, format!("K_k φ̄ gap {action:e}"))?;
    Ok(format!("200 ensembles, K_k φ̄ gap {action:.1e}, completeness defect {defect:.1e}"))
}

fn corollary_random() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut gap = 0.0f64;
    for _ in 0..100 {
        let theta = rng.random_range(0.0..=FRAC_PI_2);
        let gamma = rng.random_range(0.0..=FRAC_PI_2);
        let (_, plan) = max_probability(theta, gamma).map_err(|e| e.to_string())?;
        let expected = ((1.0 - theta.cos()) / (1.0 - gamma.cos())).min(1.0);
        let simulated: f64 = plan
            .execute_on_input()
            .iter()
            .zip(&plan.outcomes)
            .filter(|(_, o)| o.target == 0)
            .map(|(b, _)| b.probability)
            .sum();
        gap = gap.max((simulated - expected).abs());
    }
    ensure(gap <= 1e-10, format!("success probability gap {gap:e}"))?;
    Ok(format!("100 pairs, success probability gap {gap:.1e}"))
}

fn asymptotics() -> Outcome {
    let mut brute_gap = 0.0f64;
    for theta in [0.2, 0.7, 1.2] {
        for n in 1..=6 {
            let b = brute_force_power_standardize(theta, n).map_err(|e| e.to_string())?;
            brute_gap = brute_gap.max((b - theta.cos().powi(n as i32).acos()).abs());
        }
    }
    ensure(brute_gap <= 1e-9, format!("power angle gap {brute_gap:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut add_gap = 0.0f64;
    for _ in 0..200 {
        let mut mk = || {
            let d = rng.random_range(2..=5);
            PureState::new(Basis::SelfConjugate(SelfConjLabel::ladder(d)), random_state(d, &mut rng)).unwrap()
        };
        let (a, b) = (mk(), mk());
        let ab = tensor(&a, &b);
        match (tau_infinity(&a), tau_infinity(&b), tau_infinity(&ab)) {
            (Ok(ExtReal::Finite(x)), Ok(ExtReal::Finite(y)), Ok(ExtReal::Finite(z))) => {
                add_gap = add_gap.max((x + y - z).abs())
            }
            other => return Err(format!("unexpected τ∞ values {other:?}")),
        }
    }
    ensure(add_gap <= 1e-10, format!("additivity gap {add_gap:e}"))?;

    let copies = max_copies(4, 0.5f64.acos(), 0.25f64.acos()).map_err(|e| e.to_string())?;
    ensure(copies == CopyCount::Finite(2), format!("max_copies = {copies:?}"))?;
    Ok(format!("power angle gap {brute_gap:.1e}, additivity gap {add_gap:.1e}, max_copies = 2"))
}

fn clebsch_gordan_and_factorization() -> Outcome {
    let mut cg_gap = 0.0f64;
    for l1 in 0..=4u32 {
        for l2 in 0..=4u32 {
            for big_l in l1.abs_diff(l2)..=l1 + l2 {
                let sign = if (l1 + l2 + big_l) % 2 == 0 { 1.0 } else { -1.0 };
                for m1 in -(l1 as i32)..=l1 as i32 {
                    for m2 in -(l2 as i32)..=l2 as i32 {
                        let a = clebsch_gordan(l1, m1, l2, m2, big_l, m1 + m2);
                        let b = clebsch_gordan(l1, -m1, l2, -m2, big_l, -m1 - m2);
                        cg_gap = cg_gap.max((a - sign * b).abs());
                    }
                }
            }
        }
    }
    ensure(cg_gap <= 1e-12, format!("sign identity gap {cg_gap:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut fact_gap = 0.0f64;
    for _ in 0..100 {
        let mut mk = || {
            let ell = rng.random_range(0..=3);
            PureState::new(Basis::Angular(multiplet(ell)), random_state((2 * ell + 1) as usize, &mut rng)).unwrap()
        };
        let ab = tensor(&mk(), &mk());
        let joint = apply_time_reversal(&ab, PhaseConvention::LandauLifshitz).map_err(|e| e.to_string())?;
        let split = factorwise_time_reversal(&ab, PhaseConvention::LandauLifshitz);
        fact_gap = fact_gap.max(max_diff(joint.amplitudes(), split.amplitudes()));
    }
    ensure(fact_gap <= 1e-12, format!("factorization gap {fact_gap:e}"))?;

    let (mismatch, flip, agree) = sakurai_counterexample();
    ensure(mismatch > 0.5 && flip < 1e-12 && agree < 1e-12, "Sakurai counterexample did not reproduce")?;
    Ok(format!(
        "sign identity gap {cg_gap:.1e}, factorization gap {fact_gap:.1e}, Sakurai mismatch {mismatch:.3}"
    ))
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_trframe"))
        .args(args)
        .stdin(Stdio::null())
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn cli_determinism() -> Outcome {
    let runs: [&[&str]; 4] = [
        &["convert", "det", "--theta", "pi/3", "--gamma", "pi/4", "--seed", "11"],
        &["convert", "pmax", "--theta", "pi/3", "--gamma", "pi/2", "--seed", "11"],
        &["verify", "monotone", "--trials", "50", "--seed", "7"],
        &["power", "--theta", "0.7", "-n", "5"],
    ];
    for args in runs {
        let (c1, o1) = run_cli(args);
        let (c2, o2) = run_cli(args);
        ensure(c1 == 0 && c2 == 0, format!("{args:?} exited {c1}/{c2}"))?;
        ensure(o1 == o2, format!("{args:?} output differs between runs"))?;
    }

    let (code, out) = run_cli(&["convert", "det", "--theta", "pi/3", "--gamma", "pi/4"]);
    let doc: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let a = doc["outputs"]["A"].as_f64().unwrap_or(f64::NAN);
    ensure(code == 0 && (a - 0.78868).abs() < 1e-5, format!("det: exit {code}, A = {a}"))?;

    let (code, out) = run_cli(&["convert", "pmax", "--theta", "pi/3", "--gamma", "pi/2"]);
    let doc: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let p = doc["outputs"]["p"].as_f64().unwrap_or(f64::NAN);
    ensure(code == 0 && (p - 0.5).abs() < 1e-12, format!("pmax: exit {code}, p = {p}"))?;

    let (code, _) = run_cli(&["convert", "det", "--theta", "pi/4", "--gamma", "pi/3"]);
    ensure(code == 2, format!("infeasible det exited {code}"))?;
    Ok("byte-identical reruns; exits 0, 0, 2 on the convert examples".into())
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "self-conjugate fixed points", budget: Duration::from_secs(1), run: self_conjugate_fixed_points },
        Criterion { id: 2, name: "real-Kraus criterion, both directions", budget: Duration::from_secs(5), run: real_kraus_criterion },
        Criterion { id: 3, name: "standard form", budget: Duration::from_secs(10), run: standard_form_criterion },
        Criterion { id: 4, name: "ensemble monotonicity of tau", budget: Duration::from_secs(30), run: ensemble_monotonicity },
        Criterion { id: 5, name: "deterministic conversion grid", budget: Duration::from_secs(5), run: theorem3_grid },
        Criterion { id: 6, name: "ensemble conversion", budget: Duration::from_secs(5), run: theorem4_random },
        Criterion { id: 7, name: "maximal conversion probability", budget: Duration::from_secs(2), run: corollary_random },
        Criterion { id: 8, name: "asymptotics", budget: Duration::from_secs(30), run: asymptotics },
        Criterion { id: 9, name: "Clebsch-Gordan identity and factorization", budget: Duration::from_secs(5), run: clebsch_gordan_and_factorization },
        Criterion { id: 10, name: "CLI determinism and exit codes", budget: Duration::from_secs(2), run: cli_determinism },
    ];
    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let verdict = match result {
            Ok(detail) if elapsed <= c.budget => ("PASS", detail),
            Ok(detail) => ("FAIL", format!("{detail}; over time budget")),
            Err(e) => ("FAIL", e),
        };
        if verdict.0 == "FAIL" {
            failed += 1;
        }
        writeln!(
            out,
            "criterion {:>2} {} [{:.3}s / {}s] {}: {}",
            c.id,
            verdict.0,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            c.name,
            verdict.1
        )
        .unwrap();
    }
    writeln!(out, "acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len()).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
