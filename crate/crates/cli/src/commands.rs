//! One function per subcommand. Each reads its parameters through the
//! [`RunConfig`] (so the header echoes exactly what was used) and returns a
//! [`Report`] plus exit code; rendering happens in the caller.

use pgst_core::{
    amplitude, classify_length, exp_fit, fidelity, find_t_min, pgst_condition_set, rho_out,
    sweep_eps, sweep_n, validate_slater, ChainSpec, Complex64, GridParams, InputState, PgstQuery,
    Readout, SlaterMatrix, SweepRow, TminResult,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::output::{Cell, Report};
use crate::{
    exit, AmplitudeArgs, ClassifyArgs, CliError, Command, FidelityArgs, GridArgs, Outcome,
    RunConfig, SweepArgs, TminArgs, ValidateArgs,
};

/// `validate` passes iff the worst discrepancy stays below this.
pub const VALIDATE_TOLERANCE: f64 = 1e-10;

const SWEEP_COLUMNS: [&str; 4] = ["t_min", "found", "min_fidelity", "margin"];

pub fn dispatch(command: &Command, cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Classify(a) => classify(a, cfg),
        Command::Tmin(a) => tmin(a, cfg),
        Command::Sweep(a) => sweep(a, cfg),
        Command::Validate(a) => validate(a, cfg),
        Command::Amplitude(a) => amplitude_cmd(a, cfg),
        Command::Fidelity(a) => fidelity_cmd(a, cfg),
    }
}

fn finish(mut report: Report, cfg: &RunConfig, code: i32) -> Outcome {
    report.config = cfg.resolved().clone();
    Outcome { report, code }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `7` or the inclusive range `1..16`.
pub fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<u64>, CliError> {
    let bad = || {
        usage(format!(
            "malformed length range `{text}` (expected N or A..B)"
        ))
    };
    let range = match text.trim().split_once("..") {
        Some((a, b)) => {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| bad())?;
            a..=b
        }
        None => {
            let n: u64 = text.trim().parse().map_err(|_| bad())?;
            n..=n
        }
    };
    if range.is_empty() {
        return Err(usage(format!("empty length range `{text}`")));
    }
    Ok(range)
}

/// Comma-separated list; an empty string is the empty list.
pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| usage(format!("invalid {what} `{s}` in list `{text}`")))
        })
        .collect()
}

fn grid_params(args: &GridArgs, cfg: &mut RunConfig) -> Result<GridParams, CliError> {
    cfg.flag("dt", args.dt);
    cfg.flag("t-max", args.t_max);
    cfg.flag("refine-tol", args.refine_tol);
    let defaults = GridParams::default();
    Ok(GridParams {
        dt: cfg.get_or("dt", defaults.dt)?,
        t_max: cfg.get("t-max")?,
        refine_tol: cfg.get_or("refine-tol", defaults.refine_tol)?,
    })
}

fn result_cells(r: &TminResult) -> Vec<Cell> {
    vec![
        Cell::Float(r.t_min),
        Cell::Bool(r.found),
        Cell::Float(r.min_fidelity),
        Cell::Float(r.margin),
    ]
}

fn classify(args: &ClassifyArgs, cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    cfg.flag("n", args.n.as_ref());
    let raw: String = cfg.require("n")?;
    let range = parse_range(&raw)?;
    let mut report = Report::new("classify", &["n", "pgst", "clauses", "witnesses"]);
    for n in range {
        let class = classify_length(n).map_err(|e| usage(e.to_string()))?;
        let names: Vec<&str> = class.clauses.iter().map(|c| c.name()).collect();
        let witnesses: Vec<String> = class.clauses.iter().map(|c| c.witness()).collect();
        report.push(vec![
            Cell::from(n),
            Cell::from(if class.is_pgst() { "yes" } else { "no" }),
            Cell::from(names.join(";")),
            Cell::from(witnesses.join(";")),
        ]);
    }
    Ok(finish(report, cfg, exit::SUCCESS))
}

fn tmin(args: &TminArgs, cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    cfg.flag("n", args.n);
    cfg.flag("m", args.m);
    cfg.flag("eps", args.eps);
    let n: usize = cfg.require("n")?;
    let m: usize = cfg.require("m")?;
    let eps: f64 = cfg.require("eps")?;
    let grid = grid_params(&args.grid, cfg)?;
    let query = PgstQuery::new(n, m, eps, &grid)?;
    cfg.note("t-max", crate::output::fmt_sig(query.t_max()));

    let result = find_t_min(&query)?;
    let mut report = Report::new(
        "tmin",
        &["n", "m", "eps", "t_min", "found", "min_fidelity", "margin"],
    );
    let mut row = vec![Cell::from(n), Cell::from(m), Cell::Float(eps)];
    row.extend(result_cells(&result));
    report.push(row);
    let (worst, value) = result
        .fidelities
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(c, v)| (c.to_string(), v))
        .expect("at least one condition");
    report.footer.push((
        "binding".into(),
        vec![
            ("condition".into(), Cell::from(worst)),
            ("fidelity".into(), Cell::Float(value)),
        ],
    ));
    if !result.found {
        report
            .notes
            .push("no crossing of 1-eps up to t-max; t_min is the best grid point".into());
    }
    let code = if result.found {
        exit::SUCCESS
    } else {
        exit::NOT_FOUND
    };
    Ok(finish(report, cfg, code))
}

fn push_sweep_rows<K: Copy + Into<Cell> + std::fmt::Display>(
    report: &mut Report,
    rows: &[SweepRow<K>],
) {
    for row in rows {
        let mut cells = vec![row.key.into()];
        match &row.result {
            Ok(r) => cells.extend(result_cells(r)),
            Err(e) => {
                cells.extend([Cell::Empty, Cell::from("error"), Cell::Empty, Cell::Empty]);
                report.notes.push(format!("{}: {e}", row.key));
            }
        }
        report.push(cells);
    }
}

fn sweep(args: &SweepArgs, cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    cfg.flag("axis", args.axis.as_ref());
    cfg.flag("n", args.n.as_ref());
    cfg.flag("m", args.m);
    cfg.flag("eps", args.eps.as_ref());
    if args.fit {
        cfg.flag("fit", Some(true));
    }
    let axis: String = cfg.get_or("axis", "n".to_string())?;
    let m: usize = cfg.require("m")?;
    let grid = grid_params(&args.grid, cfg)?;
    if grid.t_max.is_none() {
        cfg.note("t-max", "auto");
    }
    let fit: bool = cfg.get_or("fit", false)?;

    let mut report = match axis.as_str() {
        "n" => {
            let lengths: Vec<usize> = parse_list(&cfg.require::<String>("n")?, "length")?;
            let eps: f64 = cfg.require("eps")?;
            let rows = sweep_n(&lengths, m, eps, &grid);
            let mut report = Report::new("sweep", &[&["n"][..], &SWEEP_COLUMNS].concat());
            push_sweep_rows(&mut report, &rows);
            if fit {
                let points: Vec<(f64, f64)> = rows
                    .iter()
                    .filter_map(|row| match &row.result {
                        Ok(r) if r.found => Some((row.key as f64, r.t_min)),
                        _ => None,
                    })
                    .collect();
                match exp_fit(&points) {
                    Ok(f) => report.footer.push((
                        "fit".into(),
                        vec![
                            ("a".into(), Cell::Float(f.a)),
                            ("b".into(), Cell::Float(f.b)),
                            ("points".into(), Cell::from(points.len())),
                        ],
                    )),
                    Err(e) => report.notes.push(format!("fit skipped: {e}")),
                }
            }
            report
        }
        "eps" => {
            let n: usize = cfg.require("n")?;
            let tolerances: Vec<f64> = parse_list(&cfg.require::<String>("eps")?, "tolerance")?;
            if fit {
                return Err(usage("--fit applies to axis n only"));
            }
            let rows = sweep_eps(n, m, &tolerances, &grid);
            let mut report = Report::new("sweep", &[&["eps"][..], &SWEEP_COLUMNS].concat());
            push_sweep_rows(&mut report, &rows);
            report
        }
        other => return Err(usage(format!("unknown sweep axis `{other}` (n|eps)"))),
    };
    report.command = format!("sweep --axis {axis}");
    Ok(finish(report, cfg, exit::SUCCESS))
}

fn validate(args: &ValidateArgs, cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    cfg.flag("n-max", args.n_max);
    cfg.flag("r-max", args.r_max);
    cfg.flag("trials", args.trials);
    cfg.flag("seed", args.seed);
    let n_max: usize = cfg.get_or("n-max", 8)?;
    let r_max: usize = cfg.get_or("r-max", 3)?;
    let trials: usize = cfg.get_or("trials", 20)?;
    let seed: u64 = cfg.get_or("seed", 42)?;
    let window: f64 = cfg.get_or("t-window", 50.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rep = validate_slater(n_max, r_max, trials, window, &mut rng)?;

    let pass = rep.max_discrepancy < VALIDATE_TOLERANCE;
    let mut report = Report::new(
        "validate",
        &[
            "comparisons",
            "max_discrepancy",
            "worst_n",
            "worst_config",
            "worst_t",
            "pass",
        ],
    );
    let (wn, wc, wt) = match &rep.worst {
        Some((n, c, t)) => (Cell::from(*n), Cell::from(c.to_string()), Cell::Float(*t)),
        None => (Cell::Empty, Cell::Empty, Cell::Empty),
    };
    report.push(vec![
        Cell::from(rep.comparisons),
        Cell::Float(rep.max_discrepancy),
        wn,
        wc,
        wt,
        Cell::Bool(pass),
    ]);
    cfg.note("tolerance", VALIDATE_TOLERANCE);
    Ok(finish(
        report,
        cfg,
        if pass { exit::SUCCESS } else { exit::NOT_FOUND },
    ))
}

fn complex_cells(z: Complex64) -> [Cell; 3] {
    [Cell::Float(z.re), Cell::Float(z.im), Cell::Float(z.norm())]
}

fn amplitude_cmd(args: &AmplitudeArgs, cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    cfg.flag("n", args.n);
    cfg.flag("t", args.t);
    cfg.flag("from", args.from);
    cfg.flag("to", args.to);
    cfg.flag("sites", args.sites.as_ref());
    cfg.flag("m", args.m);
    let n: usize = cfg.require("n")?;
    let t: f64 = cfg.require("t")?;
    let spec = ChainSpec::new(n)?;

    let modes = ["from", "sites", "m"]
        .iter()
        .filter(|k| cfg.peek(k).is_some())
        .count();
    if modes != 1 {
        return Err(usage(
            "amplitude needs exactly one of --from/--to, --sites or --m",
        ));
    }

    let report = if cfg.peek("from").is_some() {
        let from: usize = cfg.require("from")?;
        let to: usize = cfg.get_or("to", spec.mirror(from.clamp(1, n)))?;
        let mut report = Report::new("amplitude", &["from", "to", "re", "im", "magnitude"]);
        let z = amplitude(spec, from, to, t)?;
        let mut row = vec![Cell::from(from), Cell::from(to)];
        row.extend(complex_cells(z));
        report.push(row);
        report
    } else if cfg.peek("sites").is_some() {
        let sites: Vec<usize> = parse_list(&cfg.require::<String>("sites")?, "site")?;
        if sites.is_empty() {
            return Err(usage("--sites needs at least one site"));
        }
        let z = SlaterMatrix::from_sites(spec, &sites, t)?.determinant();
        let fmt = |s: &[usize]| s.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        let mirrored: Vec<usize> = sites.iter().map(|&s| spec.mirror(s)).collect();
        let mut report = Report::new(
            "amplitude",
            &["sites", "mirror_sites", "re", "im", "magnitude"],
        );
        let mut row = vec![Cell::from(fmt(&sites)), Cell::from(fmt(&mirrored))];
        row.extend(complex_cells(z));
        report.push(row);
        report
    } else {
        let m: usize = cfg.require("m")?;
        let set = pgst_condition_set(spec, m, t)?;
        let mut report = Report::new("amplitude", &["condition", "r", "fidelity"]);
        for (config, value) in set.iter() {
            report.push(vec![
                Cell::from(config.to_string()),
                Cell::from(config.r()),
                Cell::Float(value),
            ]);
        }
        report.footer.push((
            "min".into(),
            vec![("fidelity".into(), Cell::Float(set.min()))],
        ));
        report
    };
    Ok(finish(report, cfg, exit::SUCCESS))
}

/// Parses `re,im;re,im;...` into a normalised-checked input state.
pub fn parse_input(text: &str) -> Result<InputState, CliError> {
    let amps = text
        .split(';')
        .map(|pair| {
            let (re, im) = pair.split_once(',').unwrap_or((pair, "0"));
            match (re.trim().parse::<f64>(), im.trim().parse::<f64>()) {
                (Ok(re), Ok(im)) => Ok(Complex64::new(re, im)),
                _ => Err(usage(format!(
                    "malformed amplitude `{pair}` (expected re,im)"
                ))),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    InputState::new(amps).map_err(|e| usage(e.to_string()))
}

fn fidelity_cmd(args: &FidelityArgs, cfg: &mut RunConfig) -> Result<Outcome, CliError> {
    cfg.flag("n", args.n);
    cfg.flag("m", args.m);
    cfg.flag("t", args.t);
    cfg.flag("seed", args.seed);
    cfg.flag("input", args.input.as_ref());
    let n: usize = cfg.require("n")?;
    let m: usize = cfg.require("m")?;
    let t: f64 = cfg.require("t")?;
    let input = match cfg.get_str("input") {
        Some(text) => parse_input(&text)?,
        None => {
            let seed: u64 = cfg.get_or("seed", 0)?;
            InputState::random(m, &mut ChaCha8Rng::seed_from_u64(seed))
        }
    };
    if input.m() != m {
        return Err(usage(format!(
            "input has {} qubits but --m is {m}",
            input.m()
        )));
    }
    let rho = rho_out(n, m, &input, t)?;
    let mut report = Report::new(
        "fidelity",
        &["n", "m", "t", "raw", "sector_phase", "parity_sector_phase"],
    );
    report.push(vec![
        Cell::from(n),
        Cell::from(m),
        Cell::Float(t),
        Cell::Float(fidelity(&input, &rho, Readout::Raw)?),
        Cell::Float(fidelity(&input, &rho, Readout::SectorPhase)?),
        Cell::Float(fidelity(&input, &rho, Readout::ParitySectorPhase)?),
    ]);
    Ok(finish(report, cfg, exit::SUCCESS))
}
