use std::io::Read;

use serde_json::{json, Map, Value};
use trframe::angular::{PhaseConvention, PureState};
use trframe::monotones::{
    binomial_expansion, brute_force_power_standardize, conjugate_overlap, neg_log2, tau_infinity_of_angle,
    tensor_power_angle, MAX_BRUTE_FORCE_COPIES, MAX_EXPANSION_COPIES,
};
use trframe::protocols::{
    asymptotic_rate, deterministic_convert, ensemble_convert, max_copies, max_probability, ConversionPlan,
};
use trframe::standardform::{standardize, StandardResource};
use trframe::trio::{group_average, validate_instrument};

use crate::documents::{
    complex_pairs, complex_rows, parse_average_input, parse_ensemble_document, parse_state_document, real_rows,
    CommandEcho, ResultDocument, StateDocument,
};
use crate::error::CliError;
use crate::verify::run_suite;
use crate::{Cli, Command, ConvertMode};

struct Context<'a> {
    cli: &'a Cli,
    stdin: &'a mut dyn Read,
    raw_input: Option<Vec<u8>>,
}

impl Context<'_> {
    fn read_input(&mut self) -> Result<String, CliError> {
        let bytes = if self.cli.input == "-" {
            let mut buf = Vec::new();
            self.stdin.read_to_end(&mut buf).map_err(|e| CliError::Io(format!("stdin: {e}")))?;
            buf
        } else {
            std::fs::read(&self.cli.input).map_err(|e| CliError::Io(format!("{}: {e}", self.cli.input)))?
        };
        let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Parse("input is not UTF-8".into()))?;
        self.raw_input = Some(bytes);
        Ok(text)
    }

    fn convention(&self, document: Option<PhaseConvention>) -> PhaseConvention {
        self.cli.convention.map(Into::into).or(document).unwrap_or_default()
    }
}

fn convention_name(c: PhaseConvention) -> &'static str {
    match c {
        PhaseConvention::LandauLifshitz => "ll",
        PhaseConvention::Sakurai => "sakurai",
    }
}

fn echo(name: &str, args: Value) -> CommandEcho {
    let arguments = match args {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    CommandEcho { name: name.into(), arguments }
}

fn resource_json(r: StandardResource) -> Value {
    json!({ "theta": r.theta(), "tau": r.tau(), "tauInf": tau_infinity_of_angle(r.theta()) })
}

/// Runs the parsed command. The flag is `false` only for a failing
/// `verify` suite.
pub fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<(ResultDocument, bool), CliError> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", cli.tol)));
    }
    let mut ctx = Context { cli, stdin, raw_input: None };
    let mut passed = true;
    let (command, outputs) = match &cli.command {
        Command::Standardize => standardize_cmd(&mut ctx)?,
        Command::Tau => tau_cmd(&mut ctx)?,
        Command::Convert { mode } => convert_cmd(&mut ctx, mode)?,
        Command::Rate { theta_psi, theta_phi } => {
            let rate = asymptotic_rate(*theta_psi, *theta_phi)?;
            (
                echo("rate", json!({ "thetaPsi": theta_psi, "thetaPhi": theta_phi })),
                json!({
                    "tauInfPsi": neg_log2(theta_psi.cos()),
                    "tauInfPhi": neg_log2(theta_phi.cos()),
                    "rate": rate,
                }),
            )
        }
        Command::Copies { n, theta_psi, theta_phi } => {
            let copies = max_copies(*n, *theta_psi, *theta_phi)?;
            let rate = asymptotic_rate(*theta_psi, *theta_phi)?;
            (
                echo("copies", json!({ "n": n, "thetaPsi": theta_psi, "thetaPhi": theta_phi })),
                json!({ "copies": copies, "rate": rate }),
            )
        }
        Command::Power { theta, n } => power_cmd(*theta, *n)?,
        Command::Average => average_cmd(&mut ctx)?,
        Command::Verify { suite } => {
            let trials = cli.trials.unwrap_or(suite.default_trials());
            let report = run_suite(*suite, trials, cli.seed, cli.tol);
            passed = report.pass;
            (
                echo("verify", json!({ "suite": suite.name(), "trials": trials, "tol": cli.tol })),
                serde_json::to_value(&report).expect("reports serialize"),
            )
        }
    };
    let doc = ResultDocument::new(command, ctx.raw_input.as_deref(), outputs, cli.seed);
    Ok((doc, passed))
}

fn read_state(ctx: &mut Context<'_>) -> Result<(StateDocument, PureState, PhaseConvention), CliError> {
    let text = ctx.read_input()?;
    let doc = parse_state_document(&text)?;
    let conv = ctx.convention(doc.convention);
    let psi = doc.to_self_conjugate_state(ctx.cli.tol, conv)?;
    Ok((doc, psi, conv))
}

fn standardize_cmd(ctx: &mut Context<'_>) -> Result<(CommandEcho, Value), CliError> {
    let (doc, psi, conv) = read_state(ctx)?;
    let res = standardize(&psi)?;
    let labels = StateDocument::from_state(&psi, None).and_then(|d| d.labels);
    let c = conjugate_overlap(psi.amplitudes());
    Ok((
        echo("standardize", json!({ "convention": convention_name(conv), "tol": ctx.cli.tol })),
        json!({
            "inputBasis": doc.basis,
            "dim": psi.dim(),
            "labels": labels,
            "theta": res.resource.theta(),
            "cosTheta": c,
            "tau": 1.0 - c,
            "tauInf": neg_log2(c),
            "transform": real_rows(&res.transform),
            "globalPhase": res.global_phase,
            "reduced": complex_pairs(&res.reduce(psi.amplitudes())),
        }),
    ))
}

fn tau_cmd(ctx: &mut Context<'_>) -> Result<(CommandEcho, Value), CliError> {
    let (_, psi, conv) = read_state(ctx)?;
    let c = conjugate_overlap(psi.amplitudes());
    let r = StandardResource::from_cos(c);
    Ok((
        echo("tau", json!({ "convention": convention_name(conv), "tol": ctx.cli.tol })),
        json!({
            "dim": psi.dim(),
            "conjugateOverlap": c,
            "theta": r.theta(),
            "tau": 1.0 - c,
            "tauInf": neg_log2(c),
        }),
    ))
}

fn plan_json(plan: &ConversionPlan, shots: usize, seed: u64) -> Result<Value, CliError> {
    let mut stages = Vec::new();
    for stage in &plan.stages {
        let report = validate_instrument(&stage.instrument, 1e-10)?;
        stages.push(json!({
            "description": stage.description,
            "kraus": stage.instrument.kraus().iter().map(|k| real_rows(&k.real_part())).collect::<Vec<_>>(),
            "corrections": stage.corrections.iter().map(real_rows).collect::<Vec<_>>(),
            "branchResources": stage.resources.iter().map(|r| r.theta()).collect::<Vec<_>>(),
            "report": report,
        }));
    }
    let executed = plan.execute_on_input();
    let outcomes: Vec<Value> = plan
        .outcomes
        .iter()
        .zip(&executed)
        .map(|(o, b)| {
            let simulated_tau = if b.probability > 0.0 { Some(1.0 - conjugate_overlap(&b.state)) } else { None };
            json!({
                "path": o.path,
                "target": o.target,
                "probability": o.probability,
                "theta": o.resource.theta(),
                "tau": o.resource.tau(),
                "simulatedProbability": b.probability,
                "simulatedTau": simulated_tau,
            })
        })
        .collect();
    Ok(json!({
        "input": resource_json(plan.input),
        "parameters": plan.parameters,
        "stages": stages,
        "outcomes": outcomes,
        "sampled": { "shots": shots, "counts": plan.sample(shots, seed) },
    }))
}

fn convert_cmd(ctx: &mut Context<'_>, mode: &ConvertMode) -> Result<(CommandEcho, Value), CliError> {
    let seed = ctx.cli.seed;
    match mode {
        ConvertMode::Det { theta, gamma, shots } => {
            let plan = deterministic_convert(*theta, *gamma)?;
            let mut out = plan_json(&plan, *shots, seed)?;
            if let trframe::protocols::PlanParameters::Deterministic { a } = plan.parameters {
                out["A"] = json!(a);
            }
            Ok((echo("convert det", json!({ "theta": theta, "gamma": gamma, "shots": shots })), out))
        }
        ConvertMode::Ens { theta, shots } => {
            let text = ctx.read_input()?;
            let doc = parse_ensemble_document(&text)?;
            let target = doc.to_ensemble()?;
            let plan = ensemble_convert(*theta, &target)?;
            let mut out = plan_json(&plan, *shots, seed)?;
            out["target"] = serde_json::to_value(&doc).expect("documents serialize");
            Ok((echo("convert ens", json!({ "theta": theta, "shots": shots })), out))
        }
        ConvertMode::Pmax { theta, gamma, shots } => {
            let (p, plan) = max_probability(*theta, *gamma)?;
            let mut out = plan_json(&plan, *shots, seed)?;
            out["p"] = json!(p);
            Ok((echo("convert pmax", json!({ "theta": theta, "gamma": gamma, "shots": shots })), out))
        }
    }
}

fn power_cmd(theta: f64, n: u32) -> Result<(CommandEcho, Value), CliError> {
    let r = StandardResource::new(theta)?;
    if n == 0 || n > MAX_EXPANSION_COPIES {
        return Err(CliError::Validation(format!("n must be in 1..={MAX_EXPANSION_COPIES}, got {n}")));
    }
    let theta_n = tensor_power_angle(r.theta(), n);
    let expansion = binomial_expansion(r.theta(), n)?;
    let brute = if n <= MAX_BRUTE_FORCE_COPIES { Some(brute_force_power_standardize(r.theta(), n)?) } else { None };
    let sum = expansion.sum();
    Ok((
        echo("power", json!({ "theta": theta, "n": n })),
        json!({
            "thetaN": theta_n,
            "cosN": r.theta().cos().powi(n as i32),
            "tau": 1.0 - theta_n.cos(),
            "tauInf": tau_infinity_of_angle(theta_n),
            "binomial": expansion.coeffs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "binomialSum": [sum.re, sum.im],
            "bruteForceThetaN": brute,
        }),
    ))
}

fn average_cmd(ctx: &mut Context<'_>) -> Result<(CommandEcho, Value), CliError> {
    let text = ctx.read_input()?;
    let input = parse_average_input(&text)?;
    let conv = match &input {
        crate::documents::AverageInput::State(s) => ctx.convention(s.convention),
        crate::documents::AverageInput::Density(_) => ctx.convention(None),
    };
    let rho = input.to_density(ctx.cli.tol, conv)?;
    let avg = group_average(&rho);
    let again = group_average(&avg);
    let drift = (avg.matrix() - again.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let basis = match &input {
        crate::documents::AverageInput::Density(_) => "density",
        crate::documents::AverageInput::State(_) => "state",
    };
    Ok((
        echo("average", json!({ "convention": convention_name(conv), "tol": ctx.cli.tol })),
        json!({
            "inputKind": basis,
            "dim": rho.matrix().nrows(),
            "matrix": complex_rows(avg.matrix()),
            "purityBefore": rho.purity(),
            "purityAfter": avg.purity(),
            "fixedPointDefect": drift,
        }),
    ))
}
