use malpha::compact::{CompactFitResult, CompactModel};
use malpha::divergence::{self, DistributionHandle};
use malpha::estimators::{estimate_student_t, student_t_plugin_residual};
use malpha::fixtures::{
    MU_HAT_TOL, OBJECTIVE_TOL, WORKED_EXAMPLE_MEAN, WORKED_EXAMPLE_MU_HAT,
    WORKED_EXAMPLE_OBJECTIVE, WORKED_EXAMPLE_SAMPLE,
};
use malpha::quadrature::QuadConfig;
use malpha::{studentt, StudentTParams};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::args::{Cli, Command, Format};
use crate::error::{exit, CliError};
use crate::ingest::{ingest_csv, Ingested};
use crate::report::{self, num, provenance, to_csv, to_json};

/// What a successful run produced: the bytes for the output and the exit code
/// (0, or 1 when `verify-paper-example` fails its check).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub code: i32,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Self {
            output,
            code: exit::OK,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let digits = report::precision_from_env().map_err(CliError::Config)?;
    if !(cli.quad_tol > 0.0 && cli.quad_tol.is_finite()) {
        return config(format!("--quad-tol must be positive, got {}", cli.quad_tol));
    }
    if cli.format == Some(Format::Csv) && !matches!(cli.command, Command::Simulate { .. }) {
        return config(format!(
            "--format csv is only available for simulate, not {}",
            cli.command.name()
        ));
    }
    let quad = QuadConfig::with_tolerance(cli.quad_tol * 1e-2, cli.quad_tol);
    match &cli.command {
        Command::Estimate => estimate(cli, digits),
        Command::CompactFit { half_width } => compact_fit(cli, *half_width, digits),
        Command::Divergence { p, q } => divergence(cli, p, q, &quad, digits),
        Command::Loglik { mu, sigma } => loglik(cli, mu, sigma.as_deref(), &quad, digits),
        Command::Simulate { n, mu, sigma } => simulate(cli, *n, mu, sigma.as_deref(), digits),
        Command::VerifyPaperExample { half_width } => verify(cli, *half_width, digits),
    }
}

fn config<T>(msg: String) -> Result<T, CliError> {
    Err(CliError::Config(msg))
}

fn require_alpha(cli: &Cli) -> Result<f64, CliError> {
    cli.alpha
        .ok_or_else(|| CliError::Config(format!("{} needs --alpha", cli.command.name())))
}

fn require_input(cli: &Cli) -> Result<Ingested, CliError> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("{} needs --input", cli.command.name())))?;
    ingest_csv(path)
}

fn check_alpha_two(cli: &Cli) -> Result<(), CliError> {
    match cli.alpha {
        Some(a) if a != 2.0 => config(format!("{} fixes alpha = 2, got {a}", cli.command.name())),
        _ => Ok(()),
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Config(format!("{what}: {c:?} is not a finite number")))
        })
        .collect()
}

fn parse_params(alpha: f64, mu: &str, sigma: Option<&str>) -> Result<StudentTParams, CliError> {
    let mu = parse_list(mu, "--mu")?;
    let d = mu.len();
    let sigma = match sigma {
        None => DMatrix::identity(d, d),
        Some(s) => {
            let v = parse_list(s, "--sigma")?;
            if v.len() != d * d {
                return config(format!(
                    "--sigma needs {} entries for d = {d}, got {}",
                    d * d,
                    v.len()
                ));
            }
            DMatrix::from_row_slice(d, d, &v)
        }
    };
    Ok(StudentTParams::new(alpha, DVector::from_vec(mu), sigma)?)
}

fn estimate(cli: &Cli, digits: usize) -> Result<Outcome, CliError> {
    let alpha = require_alpha(cli)?;
    if alpha >= 1.0 {
        return config(format!("estimate needs alpha < 1, got {alpha}"));
    }
    let input = require_input(cli)?;
    let est = estimate_student_t(&input.batch, alpha)?;
    let residual_norm = if est.singular {
        Value::Null
    } else {
        let r = student_t_plugin_residual(&est, &input.batch)
            .map_err(|e| CliError::Numerical(format!("plug-in residual: {e}")))?;
        num(r.norm)
    };
    let v = json!({
        "alpha": num(alpha),
        "command": "estimate",
        "mu_hat": report::vector(&est.mu_hat),
        "n": est.n,
        "provenance": provenance(Some(&input.sha256), cli.seed),
        "residual_norm": residual_norm,
        "schema_version": report::SCHEMA_VERSION,
        "sigma_hat": report::matrix(&est.sigma_hat),
        "singular_flag": est.singular,
    });
    Ok(Outcome::ok(to_json(&v, digits)))
}

fn model(half_width: Option<f64>) -> Result<CompactModel, CliError> {
    Ok(match half_width {
        None => CompactModel::default(),
        Some(h) => CompactModel::with_half_width(h)?,
    })
}

fn fit_json(fit: &CompactFitResult, model: &CompactModel) -> Value {
    let candidates: Vec<Value> = fit
        .candidates
        .iter()
        .map(|c| {
            json!({
                "active_set": c.active_set,
                "hi": num(c.hi),
                "lo": num(c.lo),
                "maximizer": num(c.maximizer),
                "objective": num(c.objective),
                "unconstrained_max": num(c.unconstrained_max),
            })
        })
        .collect();
    json!({
        "candidates": candidates,
        "half_width": num(model.half_width()),
        "mu_hat": num(fit.mu_hat),
        "objective_over_N2": num(fit.objective_over_n2),
        "ties": fit.ties.iter().map(|&t| num(t)).collect::<Vec<_>>(),
    })
}

fn compact_fit(cli: &Cli, half_width: Option<f64>, digits: usize) -> Result<Outcome, CliError> {
    check_alpha_two(cli)?;
    let input = require_input(cli)?;
    if input.batch.dim() != 1 {
        return config(format!(
            "compact-fit needs one column, got {}",
            input.batch.dim()
        ));
    }
    let model = model(half_width)?;
    let fit = model.maximize(&input.batch.scalars())?;
    let mut v = fit_json(&fit, &model);
    let obj = v.as_object_mut().expect("fit_json returns an object");
    obj.insert("alpha".into(), num(2.0));
    obj.insert("command".into(), json!("compact-fit"));
    obj.insert("n".into(), json!(input.batch.len()));
    obj.insert(
        "provenance".into(),
        provenance(Some(&input.sha256), cli.seed),
    );
    obj.insert("schema_version".into(), json!(report::SCHEMA_VERSION));
    Ok(Outcome::ok(to_json(&v, digits)))
}

/// Parses `normal:0,1`, `student-t:0.5,0,1`, `bernoulli:0.3`, `discrete:0.2,0.8`.
pub fn parse_distribution(spec: &str) -> Result<DistributionHandle, CliError> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("distribution {spec:?} is not KIND:ARGS")))?;
    let args = parse_list(rest, kind)?;
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            config(format!("{kind} takes {n} arguments, got {}", args.len()))
        }
    };
    let handle = match kind.trim() {
        "normal" => {
            arity(2)?;
            DistributionHandle::normal(args[0], args[1])?
        }
        "student-t" => {
            arity(3)?;
            DistributionHandle::student_t(&StudentTParams::univariate(args[0], args[1], args[2])?)?
        }
        "bernoulli" => {
            arity(1)?;
            DistributionHandle::bernoulli(args[0])?
        }
        "discrete" => DistributionHandle::discrete(args)?,
        other => return config(format!("unknown distribution kind {other:?}")),
    };
    Ok(handle)
}

fn divergence(
    cli: &Cli,
    p: &str,
    q: &str,
    quad: &QuadConfig,
    digits: usize,
) -> Result<Outcome, CliError> {
    let ph = parse_distribution(p)?;
    let qh = parse_distribution(q)?;
    let i_alpha = match cli.alpha {
        None => Value::Null,
        Some(a) => report::extended(divergence::i_alpha(&ph, &qh, a, quad)?),
    };
    let kl = report::extended(divergence::kl(&ph, &qh, quad)?);
    let v = json!({
        "alpha": cli.alpha.map(num),
        "command": "divergence",
        "i_alpha": i_alpha,
        "kl": kl,
        "p": p,
        "provenance": provenance(None, cli.seed),
        "q": q,
        "quad_tol": num(cli.quad_tol),
        "schema_version": report::SCHEMA_VERSION,
    });
    Ok(Outcome::ok(to_json(&v, digits)))
}

fn loglik(
    cli: &Cli,
    mu: &str,
    sigma: Option<&str>,
    quad: &QuadConfig,
    digits: usize,
) -> Result<Outcome, CliError> {
    let alpha = require_alpha(cli)?;
    let params = parse_params(alpha, mu, sigma)?;
    let input = require_input(cli)?;
    let value = divergence::generalized_log_likelihood(&params, &input.batch, alpha, quad)?;
    let v = json!({
        "alpha": num(alpha),
        "command": "loglik",
        "log_likelihood": report::extended(value),
        "mu": report::vector(params.mu()),
        "n": input.batch.len(),
        "provenance": provenance(Some(&input.sha256), cli.seed),
        "schema_version": report::SCHEMA_VERSION,
        "sigma": report::matrix(params.sigma()),
    });
    Ok(Outcome::ok(to_json(&v, digits)))
}

fn simulate(
    cli: &Cli,
    n: usize,
    mu: &str,
    sigma: Option<&str>,
    digits: usize,
) -> Result<Outcome, CliError> {
    let alpha = require_alpha(cli)?;
    if n == 0 {
        return config("--n must be at least 1".into());
    }
    let params = parse_params(alpha, mu, sigma)?;
    let draws = studentt::sample(&params, n, cli.seed)?;
    let output = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => to_csv(draws.matrix(), digits),
        Format::Json => to_json(
            &json!({
                "alpha": num(alpha),
                "command": "simulate",
                "draws": report::matrix(&draws.matrix().transpose()),
                "mu": report::vector(params.mu()),
                "n": n,
                "provenance": provenance(None, cli.seed),
                "schema_version": report::SCHEMA_VERSION,
                "sigma": report::matrix(params.sigma()),
            }),
            digits,
        ),
    };
    Ok(Outcome::ok(output))
}

/// The worked-example check: estimate and objective within tolerance of the
/// reference values, and the estimate away from the sample mean.
pub fn verify_fit(fit: &CompactFitResult) -> bool {
    (fit.mu_hat - WORKED_EXAMPLE_MU_HAT).abs() <= MU_HAT_TOL
        && (fit.objective_over_n2 - WORKED_EXAMPLE_OBJECTIVE).abs() <= OBJECTIVE_TOL
        && (fit.mu_hat - WORKED_EXAMPLE_MEAN).abs() > MU_HAT_TOL
}

fn verify(cli: &Cli, half_width: Option<f64>, digits: usize) -> Result<Outcome, CliError> {
    check_alpha_two(cli)?;
    let model = model(half_width)?;
    let fit = model.maximize(&WORKED_EXAMPLE_SAMPLE)?;
    let pass = verify_fit(&fit);
    let code = if pass { exit::OK } else { exit::ASSERTION };
    let verdict = if pass { "PASS" } else { "FAIL" };
    let output = if cli.format == Some(Format::Json) {
        let mut v = fit_json(&fit, &model);
        let obj = v.as_object_mut().expect("fit_json returns an object");
        obj.insert("command".into(), json!("verify-paper-example"));
        obj.insert("pass".into(), json!(pass));
        obj.insert("provenance".into(), provenance(None, cli.seed));
        obj.insert("schema_version".into(), json!(report::SCHEMA_VERSION));
        to_json(&v, digits)
    } else {
        let mut s = format!(
            "{verdict} mu_hat = {:.4} (expected {WORKED_EXAMPLE_MU_HAT} +- {MU_HAT_TOL}), \
             objective/N2 = {:.4} (expected {WORKED_EXAMPLE_OBJECTIVE} +- {OBJECTIVE_TOL}), \
             sample mean = {WORKED_EXAMPLE_MEAN}\n",
            fit.mu_hat, fit.objective_over_n2
        );
        s.push_str(&format!(
            "{:>4} {:>9} {:>9} {:>9} {:>10} {:>10}  active\n",
            "k", "lo", "hi", "vertex", "maximizer", "objective"
        ));
        for (k, c) in fit.candidates.iter().enumerate() {
            let best = if c.maximizer == fit.mu_hat { " *" } else { "" };
            s.push_str(&format!(
                "{:>4} {:>9.4} {:>9.4} {:>9.4} {:>10.4} {:>10.4}  {:?}{best}\n",
                k + 1,
                c.lo,
                c.hi,
                c.unconstrained_max,
                c.maximizer,
                c.objective,
                c.active_set
            ));
        }
        s
    };
    Ok(Outcome { output, code })
}
