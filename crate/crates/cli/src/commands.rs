use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;
use spectral_synthesis::constructions::{
    lambda_norm_check, lambda_p_search, normalized_indicator_signal, phi_tail_experiment, random_set,
    sharpness_search, subspace_pair, SearchParams, SharpnessRule, SubspaceSpec,
};
use spectral_synthesis::experiments::{
    alpha_size, csv_string, recovery_batch, sweep, tail_rows, ExperimentRow, OracleVerdict, RecoveryBatchConfig,
    RecoveryRow, SweepConfig,
};
use spectral_synthesis::fourier::{check_support, indicator_spectrum, DEFAULT_SUPPORT_TOL};
use spectral_synthesis::inequalities::{lp_norm, verify_indicator_bound, verify_support_bound, InequalityReport};
use spectral_synthesis::io::{
    load_problem, load_set, load_signal, read_json, write_atomic, write_json, Domain, GridFunctionFile, ProblemFile,
    SetFile,
};
use spectral_synthesis::recovery::{recover, InstanceSpec, RecoverOptions, RecoveryInstance};
use spectral_synthesis::rng::derive_seed;
use spectral_synthesis::{forward, inverse, FreqSet, GridShape, Signal};

use crate::{
    Cli, Command, ConstructArgs, Failure, Format, Kind, LambdaSearchArgs, PhiStatsArgs, RecoverArgs, Rule,
    SweepArgs, TransformArgs, VerifyArgs, Which,
};

type Outcome = Result<(), Failure>;

pub fn run(cli: &Cli) -> Outcome {
    if cli.explain {
        println!("{}", explain(&cli.command));
        return Ok(());
    }
    match &cli.command {
        Command::Transform(args) => transform(cli, args),
        Command::Verify(args) => verify(cli, args),
        Command::Construct(args) => construct(cli, args),
        Command::PhiStats(args) => phi_stats(cli, args),
        Command::LambdaSearch(args) => lambda_search(cli, args),
        Command::Recover(args) => recover_command(cli, args),
        Command::Sweep(args) => sweep_command(cli, args),
    }
}

fn explain(command: &Command) -> &'static str {
    match command {
        Command::Transform(_) => {
            "transform: unitary DFT on Z_N^d, F(m) = N^{-d/2} Σ_x e^{-2πi x·m/N} f(x).\n\
             A space-domain file is transformed forward, a frequency-domain file inversely."
        }
        Command::Verify(_) => {
            "verify: sup-norm bounds for f with spectrum inside S.\n\
             support:   ‖f‖_∞ ≤ sqrt(|S| / N^{2d/p}) ‖f‖_p   (Hölder on the spectrum; needs p ≥ 2)\n\
             indicator: ‖f‖_∞ ≤ N^{-d/2} ‖f‖_p ‖1̂_S‖_{p'}  (f = f * N^{-d/2} 1̂_S, then Hölder)\n\
             Reports lhs, rhs and rhs/lhs; exits 3 when the bound fails."
        }
        Command::Construct(_) => {
            "construct: extremal frequency sets.\n\
             random:    uniform |S|-subset; signal f = (N^{d/2}/|S|) F^{-1}(1_S), f(0) = 1.\n\
             subspace:  H = {x : x_j = 0 off the chosen axes}, H^⊥ its annihilator,\n\
                        |H||H^⊥| = N^d and 1̂_H = N^{K-d/2} 1_{H^⊥}; signal 1̂_H, set H.\n\
             sharpness: rejection sampling for S with ‖f‖_p ≤ 2^{1/p} while f(0) = 1,\n\
                        using Φ(S) ≤ |S|^{1/2+ε} as the certificate\n\
                        (‖f‖_p^p ≤ N^d (Φ(S)/|S|)^p + 1)."
        }
        Command::PhiStats(_) => {
            "phi-stats: Φ(S) = max over m ≠ 0 of |Σ_{s∈S} e^{-2πi m·s/N}| for uniform random S.\n\
             Compares the empirical P(Φ(S) ≥ a) with min(1, 2 N^d e^2 e^{-a^2/|S|})\n\
             plus three binomial standard deviations; exits 3 when it exceeds that."
        }
        Command::LambdaSearch(_) => {
            "lambda-search: greedy swap search with restarts for S of given size minimising\n\
             C = max over probes a of N^{-d/p} ‖Σ a_s e_s‖_p / ‖a‖_2 (a Λ(p) constant estimate),\n\
             certified on an independent probe set; then checks\n\
             ‖1̂_S‖_p ≤ C N^{d/p - d/2} |S|^{1/2}, i.e. ‖(N^{d/2}/|S|) 1̂_S‖_p ≤ C at |S| = N^{2d/p}."
        }
        Command::Recover(_) => {
            "recover: minimise ‖g‖_p over real g whose spectrum matches the observation off S.\n\
             Unknown coefficients are the free variables (conjugate-symmetric), so every iterate\n\
             is feasible. For δ-separated f with |S| = C_size N^k, p = 2d/k ≥ 2 and\n\
             ‖f‖_p < δ / (2 sqrt(C_size)), f is the unique δ-separated feasible minimiser.\n\
             With an alphabet the minimiser is snapped to the nearest feasible alphabet signal and\n\
             checked against exhaustive enumeration; exits 3 on a mismatch or ambiguity."
        }
        Command::Sweep(_) => {
            "sweep: for N in the range and |S| = ⌈N^α⌉,\n\
             decay rows:    unit-L^p signals at p = d/α have sup norm ≤ sqrt(|S|/N^{2d/p}) → 0;\n\
             endpoint rows: at the mode's exponent (critical p = 2d/α) the normalised indicator\n\
                            of a searched Λ(p) set keeps ‖f‖_p ≤ C while ‖f‖_∞ = 1."
        }
    }
}

fn config_value(cli: &Cli) -> serde_json::Value {
    json!({
        "seed": cli.seed,
        "threads": cli.threads,
        "args": cli.command,
    })
}

fn write_output(cli: &Cli, text: &str) -> Outcome {
    match &cli.output {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(Failure::from),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure { code: 1, message: e.to_string() })
        }
    }
}

fn emit_json<T: Serialize>(cli: &Cli, result: &T) -> Outcome {
    let doc = json!({ "config": config_value(cli), "result": result });
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Failure { code: 1, message: e.to_string() })?;
    text.push('\n');
    write_output(cli, &text)
}

/// Header lines carry the config and a timestamp; the body is the CSV table.
fn emit_csv<T: Serialize>(cli: &Cli, rows: &[T]) -> Outcome {
    let body = csv_string(rows)?;
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let config = serde_json::to_string(&config_value(cli)).map_err(|e| Failure { code: 1, message: e.to_string() })?;
    write_output(cli, &format!("# config: {config}\n# generated_unix: {stamp}\n{body}"))
}

fn format_for(cli: &Cli, default: Format) -> Format {
    cli.format.unwrap_or(default)
}

fn no_table(cli: &Cli, command: &str) -> Outcome {
    if cli.format == Some(Format::Csv) {
        return Err(Failure::usage(format!("--format csv: {command} has no tabular output")));
    }
    Ok(())
}

fn check_grid(field: &str, declared: GridShape, found: GridShape) -> Outcome {
    if declared != found {
        return Err(Failure {
            code: crate::EXIT_DATA,
            message: format!("{field} is on grid {found}, but --grid is {declared}"),
        });
    }
    Ok(())
}

fn transform(cli: &Cli, args: &TransformArgs) -> Outcome {
    no_table(cli, "transform")?;
    let file: GridFunctionFile = read_json(&args.input)?;
    let out = match file.domain {
        Domain::Space => GridFunctionFile::from_spectrum(&forward(&file.to_signal()?)),
        Domain::Freq => GridFunctionFile::from_signal(&inverse(&file.to_spectrum()?)),
    };
    emit_json(cli, &out)
}

fn report_row(r: &InequalityReport, name: &str) -> ExperimentRow {
    ExperimentRow {
        experiment: name.into(),
        n: r.grid.modulus(),
        d: r.grid.dim(),
        size: r.set_size,
        p: r.p,
        statistic: r.lhs,
        bound: r.rhs,
        pass: r.holds(),
    }
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Outcome {
    let set = load_set(&args.set_file)?;
    let f = load_signal(&args.signal_file)?;
    check_grid("set file", args.grid, set.shape())?;
    check_grid("signal file", args.grid, f.shape())?;
    check_support(&f, &set, DEFAULT_SUPPORT_TOL)?;
    let (report, name) = match args.which {
        Which::Support => (verify_support_bound(&f, &set, args.p)?, "support_bound"),
        Which::Indicator => (verify_indicator_bound(&f, &set, args.p)?, "indicator_bound"),
    };
    match format_for(cli, Format::Json) {
        Format::Json => emit_json(cli, &report)?,
        Format::Csv => emit_csv(cli, &[report_row(&report, name)])?,
    }
    if !report.holds() {
        return Err(Failure::assertion(format!(
            "bound violated: lhs {} > rhs {}",
            report.lhs, report.rhs
        )));
    }
    Ok(())
}

/// `(N^{d/2}/|S|) F^{-1}(1_S)`: spectrum on `S`, value 1 at the origin.
fn normalized_band_signal(set: &FreqSet) -> spectral_synthesis::Result<Signal> {
    let shape = set.shape();
    let spectrum = spectral_synthesis::Spectrum::new(shape, set.indicator().into_values())?;
    let factor = (shape.len() as f64).sqrt() / set.len() as f64;
    Ok(inverse(&spectrum).scaled(factor.into()))
}

fn resolve_size(grid: GridShape, size: Option<usize>, alpha: Option<f64>) -> Result<usize, Failure> {
    match (size, alpha) {
        (Some(s), None) => Ok(s),
        (None, Some(a)) if a > 0.0 => Ok(alpha_size(grid, a)),
        (None, Some(a)) => Err(Failure::usage(format!("--alpha must be positive, got {a}"))),
        (Some(_), Some(_)) => Err(Failure::usage("give either --size or --alpha, not both")),
        (None, None) => Err(Failure::usage("--size or --alpha is required")),
    }
}

fn construct(cli: &Cli, args: &ConstructArgs) -> Outcome {
    no_table(cli, "construct")?;
    let grid = args.grid;
    match args.kind {
        Kind::Random => {
            let size = resolve_size(grid, args.size, args.alpha)?;
            let set = random_set(grid, size, cli.seed)?;
            let f = normalized_band_signal(&set)?;
            if let Some(path) = &args.signal_out {
                write_json(path, &GridFunctionFile::from_signal(&f))?;
            }
            if let Some(path) = &args.set_out {
                write_json(path, &SetFile::from_set(&set))?;
            }
            emit_json(cli, &json!({ "set": SetFile::from_set(&set), "sup_norm": f.sup_norm() }))
        }
        Kind::Subspace => {
            if args.axes.iter().any(|&a| a == 0 || a > grid.dim()) {
                return Err(Failure::usage(format!("--axes are one-based and at most {}", grid.dim())));
            }
            let spec = SubspaceSpec::new(args.axes.iter().map(|a| a - 1).collect());
            let pair = subspace_pair(grid, &spec)?;
            let f = indicator_spectrum(&pair.subspace)?;
            if let Some(path) = &args.signal_out {
                write_json(path, &GridFunctionFile::from_signal(&f))?;
            }
            if let Some(path) = &args.set_out {
                write_json(path, &SetFile::from_set(&pair.subspace))?;
            }
            if pair.degenerate {
                eprintln!("warning: K = 0 or K = d gives the trivial subgroup pair");
            }
            emit_json(
                cli,
                &json!({
                    "subspace": SetFile::from_set(&pair.subspace),
                    "annihilator": SetFile::from_set(&pair.annihilator),
                    "degenerate": pair.degenerate,
                }),
            )
        }
        Kind::Sharpness => {
            let p = args.p.ok_or_else(|| Failure::usage("--p is required for sharpness"))?;
            let size = resolve_size(grid, args.size, args.alpha.or(Some(0.5)).filter(|_| args.size.is_none()))?;
            let rule = match args.rule {
                Rule::MeasuredNorm => SharpnessRule::MeasuredNorm,
                Rule::PhiCertified => SharpnessRule::PhiCertified,
            };
            let outcome = sharpness_search(grid, size, p, args.epsilon, rule, args.max_draws, cli.seed)?;
            if let Some(w) = &outcome.found {
                let set = FreqSet::new(grid, w.members.clone())?;
                if let Some(path) = &args.signal_out {
                    write_json(path, &GridFunctionFile::from_signal(&normalized_band_signal(&set)?))?;
                }
                if let Some(path) = &args.set_out {
                    write_json(path, &SetFile::from_set(&set))?;
                }
            }
            emit_json(cli, &outcome)?;
            if outcome.found.is_none() {
                return Err(Failure::assertion(format!("no acceptable set in {} draws", outcome.draws)));
            }
            Ok(())
        }
    }
}

fn phi_stats(cli: &Cli, args: &PhiStatsArgs) -> Outcome {
    let threshold = args.threshold.unwrap_or((args.size as f64).powf(args.exponent));
    let holds = match format_for(cli, Format::Json) {
        Format::Json => {
            let report = phi_tail_experiment(args.grid, args.size, threshold, args.trials, cli.seed)?;
            emit_json(cli, &report)?;
            report.holds
        }
        Format::Csv => {
            let rows = tail_rows(args.grid, args.size, threshold, args.trials, cli.seed)?;
            emit_csv(cli, &rows)?;
            rows.iter().all(|r| r.pass)
        }
    };
    if !holds {
        return Err(Failure::assertion("empirical tail exceeds the bound plus slack"));
    }
    Ok(())
}

fn lambda_search(cli: &Cli, args: &LambdaSearchArgs) -> Outcome {
    let size = resolve_size(args.grid, args.size, args.alpha)?;
    let mut params = SearchParams::new(args.budget, cli.seed);
    params.trials = args.trials;
    let candidate = lambda_p_search(args.grid, size, args.p, &params)?;
    let set = candidate.set();
    let check = lambda_norm_check(&set, args.p, candidate.empirical_constant)?;
    let f = normalized_indicator_signal(&set)?;
    let lp = lp_norm(&f, args.p);
    if let Some(path) = &args.set_out {
        write_json(path, &SetFile::from_set(&set))?;
    }
    match format_for(cli, Format::Json) {
        Format::Json => emit_json(
            cli,
            &json!({
                "candidate": candidate,
                "check": check,
                "normalized": { "lp_norm": lp, "sup_norm": f.sup_norm() },
            }),
        )?,
        Format::Csv => {
            let scale = (args.grid.len() as f64).sqrt() / size as f64;
            emit_csv(
                cli,
                &[ExperimentRow {
                    experiment: "endpoint_lp".into(),
                    n: args.grid.modulus(),
                    d: args.grid.dim(),
                    size,
                    p: args.p,
                    statistic: lp,
                    bound: check.bound * scale,
                    pass: check.holds,
                }],
            )?
        }
    }
    if !check.holds {
        return Err(Failure::assertion("indicator norm exceeds the certified constant"));
    }
    if let Some(cap) = args.max_constant {
        if candidate.empirical_constant > cap {
            return Err(Failure::assertion(format!(
                "certified constant {} exceeds --max-constant {cap}",
                candidate.empirical_constant
            )));
        }
    }
    Ok(())
}

fn options(args: &RecoverArgs) -> RecoverOptions {
    let base = RecoverOptions::new(args.tol, args.max_iters);
    if args.alphabet.is_empty() {
        base
    } else {
        base.with_alphabet(args.alphabet.clone())
    }
}

fn append_rows(path: &Path, rows: &[RecoveryRow]) -> Outcome {
    let existing = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(spectral_synthesis::Error::from(e).into()),
    };
    let body = csv_string(rows)?;
    let text = if existing.trim().is_empty() {
        body
    } else {
        // Drop the header of the new block.
        let rest = body.split_once('\n').map(|(_, r)| r).unwrap_or("");
        let mut joined = existing;
        if !joined.ends_with('\n') {
            joined.push('\n');
        }
        joined.push_str(rest);
        joined
    };
    write_atomic(path, text.as_bytes()).map_err(Failure::from)
}

fn recover_command(cli: &Cli, args: &RecoverArgs) -> Outcome {
    if args.tol.is_nan() || args.tol <= 0.0 {
        return Err(Failure::usage("--tol must be positive"));
    }
    if let Some(path) = &args.problem_file {
        if format_for(cli, Format::Json) == Format::Csv || args.append_csv.is_some() {
            return Err(Failure::usage("CSV rows need a known truth; use generated instances"));
        }
        let problem = load_problem(path)?;
        if problem.hidden_grew {
            eprintln!("warning: hidden set was not symmetric; using S ∪ −S");
        }
        let result = recover(&problem, &options(args))?;
        return emit_json(
            cli,
            &json!({
                "signal": GridFunctionFile::from_signal(&result.signal),
                "objective": result.objective,
                "certificate": result.certificate,
                "iterations": result.iterations,
                "converged": result.converged,
                "snapped": result.snapped,
                "p": problem.p(),
                "hidden": problem.hidden().members(),
            }),
        );
    }

    let grid = args.grid.ok_or_else(|| Failure::usage("--grid is required without --problem-file"))?;
    let hidden_size = args
        .hidden_size
        .ok_or_else(|| Failure::usage("--hidden-size is required without --problem-file"))?;
    if args.alphabet.len() < 2 {
        return Err(Failure::usage("--alphabet needs at least two values, e.g. 0,1"));
    }
    if args.instances == 0 {
        return Err(Failure::usage("--instances must be at least 1"));
    }
    let config = RecoveryBatchConfig {
        moduli: vec![grid.modulus()],
        dim: grid.dim(),
        alphabet: args.alphabet.clone(),
        hidden_min: hidden_size,
        hidden_max: hidden_size,
        instances: args.instances,
        seed: cli.seed,
        p: args.p,
        oracle: !args.no_oracle,
    };
    let rows = recovery_batch(&config, &options(args))?;

    let default = if args.instances > 1 { Format::Csv } else { Format::Json };
    match format_for(cli, default) {
        Format::Csv => emit_csv(cli, &rows)?,
        Format::Json => {
            // The first instance, regenerated for its signals.
            let spec = InstanceSpec { shape: grid, alphabet: args.alphabet.clone(), hidden_size, p: args.p };
            let instance = RecoveryInstance::generate(&spec, derive_seed(cli.seed, 0))?;
            let result = recover(&instance.problem, &options(args))?;
            emit_json(
                cli,
                &json!({
                    "rows": rows,
                    "first": {
                        "truth": instance.truth.real_parts(),
                        "recovered": result.signal.real_parts(),
                        "hidden": instance.problem.hidden().members(),
                        "threshold": result.certificate.threshold,
                        "norm_at_solution": result.certificate.norm_at_solution,
                        "c_size": instance.problem.c_size(),
                    },
                }),
            )?;
        }
    }
    if let Some(path) = &args.problem_out {
        let spec = InstanceSpec { shape: grid, alphabet: args.alphabet.clone(), hidden_size, p: args.p };
        let instance = RecoveryInstance::generate(&spec, derive_seed(cli.seed, 0))?;
        write_json(path, &ProblemFile::from_problem(&instance.problem))?;
    }
    if let Some(path) = &args.append_csv {
        append_rows(path, &rows)?;
    }
    let bad: Vec<u64> = rows
        .iter()
        .filter(|r| !r.exact_match || matches!(r.oracle, OracleVerdict::Disagree | OracleVerdict::Ambiguous))
        .map(|r| r.seed)
        .collect();
    if !bad.is_empty() {
        return Err(Failure::assertion(format!(
            "{} of {} instances not recovered exactly or not unique (seeds {bad:?})",
            bad.len(),
            rows.len()
        )));
    }
    Ok(())
}

fn sweep_command(cli: &Cli, args: &SweepArgs) -> Outcome {
    let (lo, hi) = args.grid_range;
    let mut moduli = Vec::new();
    let mut n = lo;
    while n <= hi {
        moduli.push(n);
        match n.checked_mul(2) {
            Some(next) => n = next,
            None => break,
        }
    }
    let config = SweepConfig {
        alpha: args.alpha,
        p_mode: args.p_mode.into(),
        dim: args.dim,
        moduli,
        seed: cli.seed,
        budget: args.budget,
        trials: args.trials,
    };
    let rows = sweep(&config)?;
    match format_for(cli, Format::Csv) {
        Format::Csv => emit_csv(cli, &rows)?,
        Format::Json => emit_json(cli, &rows)?,
    }
    if rows.iter().any(|r| !r.pass) {
        return Err(Failure::assertion("a sweep row failed its bound"));
    }
    Ok(())
}
