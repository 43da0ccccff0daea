//! The four experiment drivers behind the CLI subcommands. Each one reads
//! its keys from the flat config, echoes the fully resolved run, executes
//! deterministically, writes a CSV (header row, one row per stage or
//! interval, floats at 12 significant digits), and enforces the bound
//! assertions of the run, reporting the first violation with its stage and
//! magnitude.

use noregret::continuous::InterpolatedRun;
use noregret::environments::PayoffStream;
use noregret::geometry::{ConvexBody, Norm, Regularizer, RegularizerKind};
use noregret::optimize::{
    md_lazy, mdsa_lazy, spsg_lazy, value_bound_varstep_sums, value_bound_vartemp,
    variable_parameter_solve, ConvexProgram,
};
use noregret::regret::{bound_named, BoundTracker, RegretLedger};
use noregret::schedules::Schedule;
use noregret::strategies::{make_named, NamedAlgorithm, Strategy};

use crate::config::Config;
use crate::CliError;

/// 12 significant digits, locale-free.
fn sig(v: f64) -> String {
    format!("{v:.11e}")
}

fn write_csv(path: &str, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut text = String::with_capacity((rows.len() + 1) * (header.len() + 8));
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {path}: {e}")))
}

fn parse_body(cfg: &mut Config, dim: usize, default_kind: &str) -> Result<ConvexBody, CliError> {
    let kind = cfg.str_or("body.kind", default_kind);
    match kind.as_str() {
        "simplex" => Ok(ConvexBody::simplex(dim)?),
        "l2_ball" => {
            let radius = cfg.f64_or("body.radius", 1.0)?;
            Ok(ConvexBody::l2_ball(vec![0.0; dim], radius)?)
        }
        "box" => Ok(ConvexBody::bounded_box(vec![0.0; dim], vec![1.0; dim])?),
        other => Err(CliError::Config(format!(
            "body.kind `{other}` is not one of simplex, l2_ball, box"
        ))),
    }
}

fn parse_regularizer(
    cfg: &mut Config,
    default_kind: &str,
    dim: usize,
    body: ConvexBody,
) -> Result<Regularizer, CliError> {
    let kind = cfg.str_or("regularizer.kind", default_kind);
    match kind.as_str() {
        "entropy" => {
            if !matches!(body.kind(), noregret::geometry::BodyKind::Simplex) {
                return Err(CliError::Config(
                    "the entropy regularizer lives on the simplex (body.kind = simplex)".into(),
                ));
            }
            Ok(Regularizer::entropy(dim)?)
        }
        "euclidean" => Ok(Regularizer::euclidean(body, vec![0.0; dim])?),
        other => Err(CliError::Config(format!(
            "regularizer.kind `{other}` is not one of entropy, euclidean"
        ))),
    }
}

fn parse_schedule(
    cfg: &mut Config,
    kind: &str,
    regularizer: &Regularizer,
) -> Result<Schedule, CliError> {
    let schedule = match kind {
        "constant" => Schedule::constant(cfg.require_f64("schedule.eta")?)?,
        "inv_sqrt" => Schedule::inv_sqrt(cfg.require_f64("schedule.eta")?)?,
        "harmonic" => Schedule::harmonic(cfg.require_f64("schedule.eta")?)?,
        "power" => Schedule::power(
            cfg.require_f64("schedule.eta")?,
            cfg.require_f64("schedule.alpha")?,
        )?,
        "anytime" => Schedule::anytime(
            regularizer.strong_convexity(),
            regularizer.depth(),
            cfg.f64_or("env.M", 1.0)?,
        )?,
        "doubling" => Schedule::doubling(cfg.require_f64("schedule.eta")?)?,
        other => {
            return Err(CliError::Config(format!(
                "schedule.kind `{other}` is not one of constant, inv_sqrt, harmonic, power, anytime, doubling"
            )))
        }
    };
    Ok(schedule)
}

fn make_stream(
    cfg: &mut Config,
    dim: usize,
    norm: Norm,
    default_seed: u64,
) -> Result<(PayoffStream, f64), CliError> {
    let bound = cfg.f64_or("env.M", 1.0)?;
    let seed = cfg.u64_or("env.seed", default_seed)?;
    let kind = cfg.str_or("env.kind", "iid_uniform");
    let stream = match kind.as_str() {
        "iid_uniform" => PayoffStream::iid_uniform(dim, bound, norm, seed)?,
        "adversarial_best_response" | "adversarial" => {
            PayoffStream::adversarial_best_response(dim, bound, norm, seed)?
        }
        other => Err(CliError::Config(format!(
            "env.kind `{other}` is not one of iid_uniform, adversarial_best_response"
        )))?,
    };
    Ok((stream, bound))
}

// -----------------------------------------------------------------------
// run-regret
// -----------------------------------------------------------------------

pub fn run_regret(cfg: &mut Config) -> Result<(), CliError> {
    let stages = cfg.u64_or("n", 1000)?;
    let seed = cfg.u64_or("seed", 0)?;
    let out = cfg.require_str("out")?;
    let dim = cfg.usize_or("dim", 10)?;

    let name_text = cfg.str_or("strategy.name", "EW");
    let algorithm = NamedAlgorithm::parse(&name_text).ok_or_else(|| {
        CliError::Config(format!(
            "strategy.name `{name_text}` is not one of EW, EW_PRIME, SFP, VSFP, OGD_L, OMD_L"
        ))
    })?;
    let eta = cfg.require_f64("strategy.eta")?;
    let alpha = if algorithm == NamedAlgorithm::Vsfp {
        Some(cfg.require_f64("strategy.alpha")?)
    } else {
        None
    };
    let default_reg = match algorithm {
        NamedAlgorithm::OgdLazy => "euclidean",
        _ => "entropy",
    };
    let body = parse_body(cfg, dim, "simplex")?;
    let regularizer = parse_regularizer(cfg, default_reg, dim, body.clone())?;

    // An explicit schedule overrides the named wiring; the run is then a
    // plain score-and-choose strategy and the named-bound column repeats
    // the M-form bound.
    let custom_kind = cfg.opt_str("schedule.kind", "(derived from strategy.name)");
    let (mut strategy, custom) = match custom_kind {
        None => (
            make_named(algorithm, regularizer.clone(), eta, alpha)?,
            false,
        ),
        Some(kind) => {
            let schedule = parse_schedule(cfg, &kind, &regularizer)?;
            (Strategy::new(regularizer.clone(), schedule)?, true)
        }
    };
    let schedule = strategy.schedule().clone();
    let doubling = matches!(schedule, Schedule::Doubling { .. });

    let norm = regularizer.body().norm();
    let (mut stream, payoff_bound) = make_stream(cfg, dim, norm, seed)?;
    if !custom
        && matches!(algorithm, NamedAlgorithm::Sfp | NamedAlgorithm::Vsfp)
        && (payoff_bound - 1.0).abs() > 1e-12
    {
        return Err(CliError::Config(
            "the SFP/VSFP named bounds assume env.M = 1".into(),
        ));
    }
    cfg.reject_unknown()?;
    println!("{}", cfg.echo());

    let depth = regularizer.depth();
    let strong_convexity = regularizer.strong_convexity();
    let mut ledger = RegretLedger::new(dim);
    let mut tracker = BoundTracker::new(regularizer.clone(), schedule.clone());
    let comparator = regularizer.body().clone();

    let mut rows = Vec::with_capacity(stages as usize);
    for stage in 1..=stages {
        let payoff = stream.next_payoff(Some(strategy.action()))?;
        ledger.record(&payoff, strategy.action())?;
        tracker.record(&payoff)?;
        strategy.step(&payoff)?;

        let empirical = ledger.max_regret(&comparator)?;
        let thm2_exact = tracker.thm2_exact()?;
        let thm2_m = tracker.thm2_bounded(payoff_bound)?;
        let thm3 = tracker.thm3();
        let named = if custom {
            thm2_m
        } else {
            bound_named(
                algorithm,
                depth,
                strong_convexity,
                eta,
                alpha,
                payoff_bound,
                stage as f64,
            )?
        };
        if !doubling {
            for (bound, label) in [
                (thm3, "bound_thm3"),
                (thm2_exact, "bound_thm2_exact"),
                (thm2_m, "bound_thm2_M"),
                (named, "bound_named"),
            ] {
                if empirical > bound + 1e-8 {
                    return Err(CliError::Violation(format!(
                        "stage {stage}: empirical regret {empirical:.6} exceeds {label} \
                         {bound:.6} by {:.3e}",
                        empirical - bound
                    )));
                }
            }
        }
        rows.push(format!(
            "{stage},{},{},{},{},{}",
            sig(empirical),
            sig(thm2_exact),
            sig(thm2_m),
            sig(thm3),
            sig(named)
        ));
    }
    write_csv(
        &out,
        "stage,empirical_regret,bound_thm2_exact,bound_thm2_M,bound_thm3,bound_named",
        &rows,
    )?;
    println!(
        "run-regret: {stages} stages, final empirical regret {}, wrote {out}",
        sig(ledger.max_regret(&comparator)?)
    );
    Ok(())
}

// -----------------------------------------------------------------------
// continuous-check
// -----------------------------------------------------------------------

pub fn run_continuous_check(cfg: &mut Config) -> Result<(), CliError> {
    let stages = cfg.u64_or("n", 50)?;
    let seed = cfg.u64_or("seed", 0)?;
    let out = cfg.require_str("out")?;
    let dim = cfg.usize_or("dim", 3)?;

    let reg_kind = cfg.str_or("regularizer.kind", "entropy");
    let default_body = if reg_kind == "entropy" {
        "simplex"
    } else {
        "l2_ball"
    };
    let body = parse_body(cfg, dim, default_body)?;
    let regularizer = match reg_kind.as_str() {
        "entropy" => {
            if !matches!(body.kind(), noregret::geometry::BodyKind::Simplex) {
                return Err(CliError::Config(
                    "the entropy regularizer lives on the simplex".into(),
                ));
            }
            Regularizer::entropy(dim)?
        }
        "euclidean" => Regularizer::euclidean(body, vec![0.0; dim])?,
        other => {
            return Err(CliError::Config(format!(
                "regularizer.kind `{other}` is not one of entropy, euclidean"
            )))
        }
    };
    let schedule_kind = cfg.str_or("schedule.kind", "inv_sqrt");
    let schedule = parse_schedule(cfg, &schedule_kind, &regularizer)?;

    let euclidean = matches!(regularizer.kind(), RegularizerKind::Euclidean { .. });
    let nodes = cfg.usize_or("nodes", if euclidean { 256 } else { 64 })?;
    let tolerance = cfg.f64_or("tol", if euclidean { 1e-5 } else { 1e-6 })?;

    let norm = regularizer.body().norm();
    let bound = cfg.f64_or("env.M", 1.0)?;
    let env_kind = cfg.str_or("env.kind", "iid_uniform");
    if env_kind != "iid_uniform" {
        return Err(CliError::Config(
            "continuous-check interpolates oblivious streams only (env.kind = iid_uniform)".into(),
        ));
    }
    let env_seed = cfg.u64_or("env.seed", seed)?;
    cfg.reject_unknown()?;
    println!("{}", cfg.echo());

    let mut stream = PayoffStream::iid_uniform(dim, bound, norm, env_seed)?;
    let payoffs: Vec<Vec<f64>> = (0..stages)
        .map(|_| stream.next_payoff(None))
        .collect::<noregret::Result<_>>()?;
    let run = InterpolatedRun::new(&regularizer, &schedule, &payoffs)?.with_nodes(nodes)?;

    let mut rows = Vec::with_capacity(stages as usize);
    let mut worst = 0.0f64;
    let mut worst_interval = 0usize;
    for k in 1..=stages as usize {
        let gap = run.interval_gap(k)?;
        let diff = gap.abs_diff();
        if diff > worst {
            worst = diff;
            worst_interval = k;
        }
        rows.push(format!(
            "{k},{},{},{}",
            sig(gap.quadrature),
            sig(gap.closed_form),
            sig(diff)
        ));
    }
    write_csv(
        &out,
        "interval,gap_quadrature,gap_closed_form,abs_diff",
        &rows,
    )?;

    if worst >= tolerance {
        return Err(CliError::Violation(format!(
            "interval {worst_interval}: |quadrature - closed form| = {worst:.3e} exceeds \
             tolerance {tolerance:.1e}"
        )));
    }
    let certificate = run.certify_regret()?;
    if !certificate.satisfied {
        return Err(CliError::Violation(format!(
            "continuous regret {:.6} exceeds depth/eta_n = {:.6}",
            certificate.regret, certificate.bound
        )));
    }
    println!(
        "continuous-check: {stages} intervals, max |lhs-rhs| {}, regret {} <= bound {}, wrote {out}",
        sig(worst),
        sig(certificate.regret),
        sig(certificate.bound)
    );
    Ok(())
}

// -----------------------------------------------------------------------
// run-convex / run-stochastic
// -----------------------------------------------------------------------

fn parse_program(cfg: &mut Config, dim: usize) -> Result<ConvexProgram, CliError> {
    let body = parse_body(cfg, dim, "l2_ball")?;
    let default_target: Vec<f64> = (0..dim)
        .map(|i| if i % 2 == 0 { 0.3 } else { -0.2 })
        .collect();
    let target = cfg.f64_list_or("loss.target", &default_target)?;
    if target.len() != dim {
        return Err(CliError::Config(format!(
            "loss.target has {} coordinates, expected {dim}",
            target.len()
        )));
    }
    let loss_kind = cfg.str_or("loss.kind", "quadratic");
    match loss_kind.as_str() {
        "quadratic" => Ok(ConvexProgram::quadratic_distance(target, body)?),
        "linear" => Ok(ConvexProgram::linear(target, body)?),
        "abs" => {
            if !body.contains(&target) {
                return Err(CliError::Config(
                    "loss.kind = abs needs loss.target inside the body so that the \
                     minimum value is known"
                        .into(),
                ));
            }
            let oracle = noregret::environments::LossOracle::abs_distance(target, body)?;
            Ok(ConvexProgram::new(oracle, Some(0.0)))
        }
        other => Err(CliError::Config(format!(
            "loss.kind `{other}` is not one of quadratic, linear, abs"
        ))),
    }
}

pub fn run_convex(cfg: &mut Config) -> Result<(), CliError> {
    let stages = cfg.u64_or("n", 1000)?;
    let out = cfg.require_str("out")?;
    let dim = cfg.usize_or("dim", 3)?;
    let program = parse_program(cfg, dim)?;
    let regularizer = parse_regularizer(cfg, "euclidean", dim, program.oracle().body().clone())?;
    let solver = cfg.str_or("solver", "varstep");
    let lipschitz = program.oracle().lipschitz();
    let depth = regularizer.depth();
    let strong = regularizer.strong_convexity();
    let default_eta = (strong * depth).sqrt() / lipschitz;
    let eta = cfg.f64_or("step.eta", default_eta)?;
    cfg.reject_unknown()?;
    println!("{}", cfg.echo());

    let f_min = program.known_minimum().expect("test programs carry f_min");
    let run = match solver.as_str() {
        "varstep" => md_lazy(&program, &regularizer, |k| eta / (k as f64).sqrt(), stages)?,
        "vartemp" => variable_parameter_solve(&program, &regularizer, stages)?,
        other => {
            return Err(CliError::Config(format!(
                "solver `{other}` is not one of varstep, vartemp"
            )))
        }
    };

    let mut rows = Vec::with_capacity(stages as usize);
    for k in 0..stages as usize {
        let stage = k + 1;
        let gap_min = run.best_values[k] - f_min;
        let gap_avg = run.average_values[k] - f_min;
        let varstep = value_bound_varstep_sums(
            depth,
            strong,
            lipschitz,
            run.step_sums[k],
            run.step_square_sums[k],
        );
        let vartemp = value_bound_vartemp(depth, strong, lipschitz, stage as f64);
        let active = if solver == "varstep" {
            varstep
        } else {
            vartemp
        };
        if gap_min > active + 1e-10 || gap_avg > active + 1e-10 {
            return Err(CliError::Violation(format!(
                "stage {stage}: value gap (min {gap_min:.6}, avg {gap_avg:.6}) exceeds \
                 the {solver} bound {active:.6}"
            )));
        }
        rows.push(format!(
            "{stage},{},{},{},{}",
            sig(gap_min),
            sig(gap_avg),
            sig(varstep),
            sig(vartemp)
        ));
    }
    write_csv(
        &out,
        "stage,f_gap_min,f_gap_avg,bound_varstep,bound_vartemp",
        &rows,
    )?;
    println!(
        "run-convex ({solver}): {stages} stages, final gaps min {} avg {}, wrote {out}",
        sig(run.best_values[stages as usize - 1] - f_min),
        sig(run.average_values[stages as usize - 1] - f_min)
    );
    Ok(())
}

pub fn run_stochastic(cfg: &mut Config) -> Result<(), CliError> {
    let stages = cfg.u64_or("n", 1000)?;
    let seed = cfg.u64_or("seed", 0)?;
    let out = cfg.require_str("out")?;
    let dim = cfg.usize_or("dim", 3)?;
    let replications = cfg.usize_or("replications", 200)?;
    let noise_scale = cfg.f64_or("env.noise_scale", 0.5)?;
    let program = parse_program(cfg, dim)?;
    let solver = cfg.str_or("solver", "spsg");
    let regularizer = parse_regularizer(cfg, "euclidean", dim, program.oracle().body().clone())?;
    let depth = regularizer.depth();
    let strong = regularizer.strong_convexity();
    // Almost-sure gradient bound after adding coordinatewise noise.
    let noisy_lipschitz =
        noregret::environments::NoisyLossOracle::new(program.oracle().clone(), noise_scale, 0)?
            .noisy_lipschitz();
    let default_eta = (strong * depth).sqrt() / noisy_lipschitz;
    let eta = cfg.f64_or("step.eta", default_eta)?;
    cfg.reject_unknown()?;
    println!("{}", cfg.echo());

    let steps = move |k: u64| eta / (k as f64).sqrt();
    let run = match solver.as_str() {
        "spsg" => spsg_lazy(&program, noise_scale, steps, stages, replications, seed)?,
        "mdsa" => mdsa_lazy(
            &program,
            &regularizer,
            noise_scale,
            steps,
            stages,
            replications,
            seed,
        )?,
        other => {
            return Err(CliError::Config(format!(
                "solver `{other}` is not one of spsg, mdsa"
            )))
        }
    };

    let mut rows = Vec::with_capacity(stages as usize);
    let mut step_sum = 0.0;
    let mut step_sq = 0.0;
    for k in 0..stages as usize {
        let stage = (k + 1) as u64;
        let gamma = steps(stage);
        step_sum += gamma;
        step_sq += gamma * gamma;
        let varstep = value_bound_varstep_sums(depth, strong, noisy_lipschitz, step_sum, step_sq);
        let vartemp = value_bound_vartemp(depth, strong, noisy_lipschitz, stage as f64);
        let mean_min = run.mean_best_gap[k];
        let mean_avg = run.mean_average_gap[k];
        // Statistical enforcement: the Monte Carlo mean may exceed the
        // expectation bound only within three standard errors.
        if mean_min > varstep + 3.0 * run.stderr_best_gap[k]
            || mean_avg > varstep + 3.0 * run.stderr_average_gap[k]
        {
            return Err(CliError::Violation(format!(
                "stage {stage}: mean value gap (min {mean_min:.6}, avg {mean_avg:.6}) \
                 exceeds the expectation bound {varstep:.6} plus 3 standard errors"
            )));
        }
        rows.push(format!(
            "{stage},{},{},{},{}",
            sig(mean_min),
            sig(mean_avg),
            sig(varstep),
            sig(vartemp)
        ));
    }
    write_csv(
        &out,
        "stage,f_gap_min,f_gap_avg,bound_varstep,bound_vartemp",
        &rows,
    )?;
    println!(
        "run-stochastic ({solver}): {replications} replications x {stages} stages, \
         final mean gaps min {} avg {}, wrote {out}",
        sig(run.mean_best_gap[stages as usize - 1]),
        sig(run.mean_average_gap[stages as usize - 1])
    );
    Ok(())
}

// -----------------------------------------------------------------------
// list-algorithms
// -----------------------------------------------------------------------

pub fn list_algorithms(cfg: &mut Config) -> Result<(), CliError> {
    cfg.reject_unknown()?;
    println!("name       regularizer   parameter        notes");
    for algorithm in NamedAlgorithm::ALL {
        let (reg, schedule, notes) = match algorithm {
            NamedAlgorithm::Ew => ("entropy", "constant eta", "exponential weights"),
            NamedAlgorithm::EwPrime => ("entropy", "eta/sqrt(n)", "anytime exponential weights"),
            NamedAlgorithm::Sfp => ("any", "eta/n", "smooth fictitious play"),
            NamedAlgorithm::Vsfp => ("any", "eta*n^-alpha", "vanishingly smooth fictitious play"),
            NamedAlgorithm::OgdLazy => {
                ("euclidean", "constant eta", "lazy online gradient descent")
            }
            NamedAlgorithm::OmdLazy => ("any", "constant eta", "lazy online mirror descent"),
        };
        println!(
            "{:<10} {:<13} {:<16} {notes}",
            algorithm.name(),
            reg,
            schedule
        );
    }
    Ok(())
}
