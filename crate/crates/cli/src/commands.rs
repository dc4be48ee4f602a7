use crate::cli::{Command, Experiment, ModeArg, OutputArgs, SampleArgs};
use crate::output::{emit, Cell, Format, Manifest, Table, SCHEMA_VERSION};
use crate::{CliError, CACHE_ENV};
use bounded_cycles::asymptotics::{verify_unit_weights, FunctionSpec};
use bounded_cycles::exact_counts::{count_constrained, tv_exact, Count, CountMode, CountTable, DEFAULT_EXACT_THRESHOLD};
use bounded_cycles::saddle::{b_t, lambda_moments, solve_saddle, AlphaRule};
use bounded_cycles::sampler::{
    encode_block, sample_batch, sample_batch_with, CycleStructure, Method, RecursiveSampler, SamplerConfig, RNG_ID,
};
use bounded_cycles::statistics::{
    bridge_covariance, clt_statistic, cycle_count_correlation, exceedance_probability, longest_cycle_report,
    mean, tilted_poisson_check, total_cycle_clt, tv_empirical, uniform_grid, variance, MomentReport, PathGrid,
    PathKind,
};
use serde_json::{Map, Value};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

/// The expanded argument list without the program name and `--out`.
pub fn reproducible_args(argv: &[OsString]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--out" {
            it.next();
        } else if !a.starts_with("--out=") {
            out.push(a);
        }
    }
    out
}

struct Run<'a> {
    command: &'static str,
    args: Vec<String>,
    output: &'a OutputArgs,
    seed: Option<u64>,
    summary: Map<String, Value>,
}

impl Run<'_> {
    fn finish(self, table: &Table) -> Result<(), CliError> {
        let body = match self.output.format {
            Format::Csv => table.to_csv(),
            Format::Json => table.to_json(),
            Format::Binary => {
                return Err(CliError::Usage("--format binary is only available for `sample`".into()))
            }
        };
        self.write(&body)
    }

    fn write(self, body: &[u8]) -> Result<(), CliError> {
        let out = self.output.out.as_deref();
        let manifest = out.map(|p| Manifest {
            schema_version: SCHEMA_VERSION,
            tool: "bounded-cycles",
            version: env!("CARGO_PKG_VERSION"),
            library_version: bounded_cycles::VERSION,
            command: self.command.to_string(),
            args: self.args,
            seed: self.seed,
            rng: self.seed.map(|_| RNG_ID),
            format: self.output.format,
            output: p.display().to_string(),
            summary: self.summary,
        });
        emit(body, out, manifest)
    }
}

fn resolve_alpha(rule: AlphaRule, n: usize) -> Result<usize, CliError> {
    let a = rule.alpha(n);
    if a == 0 {
        return Err(CliError::Usage("alpha must be at least 1".into()));
    }
    Ok(a)
}

fn cached_table(n: usize, alpha: usize) -> Result<Option<CountTable>, CliError> {
    let Some(dir) = std::env::var_os(CACHE_ENV) else {
        return Ok(None);
    };
    let mode = if n <= DEFAULT_EXACT_THRESHOLD { CountMode::Exact } else { CountMode::Logspace };
    Ok(Some(CountTable::load_or_build(Path::new(&dir), alpha.min(n.max(1)), n, mode)?))
}

fn draw(n: usize, alpha: usize, samples: usize, seed: u64, method: Method, tilt: Option<f64>, budget: u64) -> Result<Vec<CycleStructure>, CliError> {
    let mut cfg = SamplerConfig::new(n, alpha, method, seed, samples);
    cfg.tilt = tilt;
    cfg.attempt_budget = budget;
    if method == Method::Recursive {
        if let Some(table) = cached_table(n, alpha)? {
            return Ok(sample_batch_with(&RecursiveSampler::new(&table), &cfg)?);
        }
    }
    Ok(sample_batch(&cfg)?)
}

fn draw_args(s: &SampleArgs) -> Result<(usize, Vec<CycleStructure>), CliError> {
    let alpha = resolve_alpha(s.alpha, s.n)?;
    let batch = draw(s.n, alpha, s.samples, s.seed, s.method, None, bounded_cycles::sampler::DEFAULT_ATTEMPT_BUDGET)?;
    Ok((alpha, batch))
}

fn parse_function(s: &str) -> Result<FunctionSpec, CliError> {
    Ok(s.parse()?)
}

fn parse_pairs(pairs: &[String]) -> Result<Vec<(f64, f64)>, CliError> {
    pairs
        .iter()
        .map(|p| {
            let bad = || CliError::Usage(format!("bad time pair {p:?} (expected s:t)"));
            let (s, t) = p.split_once(':').ok_or_else(bad)?;
            Ok((s.trim().parse().map_err(|_| bad())?, t.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn moment_rows(table: &mut Table, r: &MomentReport) {
    let target = r.label.clone();
    for (stat, value, reference) in [
        ("mean", r.mean, r.center),
        ("variance", r.variance, r.scale * r.scale),
        ("standardized_mean", r.standardized_mean, 0.0),
        ("standardized_variance", r.standardized_variance, 1.0),
        ("ks", r.ks, 0.0),
    ] {
        table.push(vec![stat.into(), target.clone().into(), r.samples.into(), value.into(), reference.into()]);
    }
}

pub fn execute(command: Command, args: Vec<String>) -> Result<(), CliError> {
    match command {
        Command::Count { n, alpha, mode, output } => {
            if alpha == 0 {
                return Err(CliError::Usage("alpha must be at least 1".into()));
            }
            let mode = match mode {
                ModeArg::Exact => CountMode::Exact,
                ModeArg::Logspace => CountMode::Logspace,
                ModeArg::Auto if n <= DEFAULT_EXACT_THRESHOLD => CountMode::Exact,
                ModeArg::Auto => CountMode::Logspace,
            };
            let count = match cached_table(n, alpha)? {
                Some(t) if t.mode() == mode => t.count(n)?,
                _ => count_constrained(n, alpha, mode)?,
            };
            if output.out.is_none() && output.format == Format::Csv {
                return emit(format!("{count}\n").as_bytes(), None, None);
            }
            let bound = match &count {
                Count::Exact(_) => 0.0,
                Count::Approx { rel_error_bound, .. } => *rel_error_bound,
            };
            let mut table = Table::new(&["n", "alpha", "mode", "count", "ln_count", "rel_error_bound"]);
            table.push(vec![
                n.into(),
                alpha.into(),
                mode.name().into(),
                count.to_string().into(),
                count.ln().into(),
                bound.into(),
            ]);
            Run { command: "count", args, output: &output, seed: None, summary: Map::new() }.finish(&table)
        }

        Command::Saddle { n, alpha, moments, output } => {
            let sp = solve_saddle(n, alpha)?;
            let mut header = vec!["n", "alpha", "x", "ln_x", "residual", "relative_residual"];
            let mut row: Vec<Cell> = vec![
                n.into(),
                alpha.into(),
                sp.x.into(),
                sp.ln_x.into(),
                sp.residual.into(),
                sp.relative_residual().into(),
            ];
            if moments {
                let lm = lambda_moments(&sp, 3);
                header.extend(["lambda_0", "lambda_1", "lambda_2", "lambda_3"]);
                row.extend((0..=3).map(|p| Cell::from(lm.get(p))));
            }
            let mut table = Table::new(&header);
            table.push(row);
            Run { command: "saddle", args, output: &output, seed: None, summary: Map::new() }.finish(&table)
        }

        Command::Sample { n, alpha, samples, seed, method, tilt, budget, output } => {
            if alpha == 0 {
                return Err(CliError::Usage("alpha must be at least 1".into()));
            }
            let batch = draw(n, alpha, samples, seed, method, tilt, budget)?;
            let run = Run { command: "sample", args, output: &output, seed: Some(seed), summary: Map::new() };
            if output.format == Format::Binary {
                if output.out.is_none() {
                    return Err(CliError::Usage("--format binary needs --out".into()));
                }
                return run.write(&encode_block(n, alpha, &batch));
            }
            let mut table = Table::new(&["index", "record"]);
            for (i, s) in batch.iter().enumerate() {
                table.push(vec![i.into(), s.to_record().into()]);
            }
            run.finish(&table)
        }

        Command::VerifyAsymptotics { n_grid, alpha, function, nodes, output } => {
            let f = parse_function(&function)?;
            let mut table = Table::new(&[
                "n", "alpha", "ln_exact", "ln_estimate", "ln_quadrature", "rel_err", "claimed_err", "quadrature_rel_err",
            ]);
            for &n in &n_grid {
                let a = resolve_alpha(alpha, n)?;
                let row = verify_unit_weights(&f, n, a, (nodes > 0).then_some(nodes))?;
                table.push(vec![
                    n.into(),
                    row.alpha.into(),
                    row.exact.ln().into(),
                    row.estimate.ln().into(),
                    row.quadrature.map(|q| q.ln()).into(),
                    row.rel_err.into(),
                    row.claimed_err.into(),
                    row.quadrature.map(|q| q.rel_diff(row.exact)).into(),
                ]);
            }
            Run { command: "verify-asymptotics", args, output: &output, seed: None, summary: Map::new() }.finish(&table)
        }

        Command::Experiment { kind } => experiment(kind, args),

        Command::Replay { manifest, out } => replay(&manifest, out),
    }
}

fn experiment(kind: Experiment, args: Vec<String>) -> Result<(), CliError> {
    match kind {
        Experiment::PoissonTv { n_grid, alpha, b, samples, seed, output } => {
            if samples.is_some() && seed.is_none() {
                return Err(CliError::Usage("--samples needs an explicit --seed".into()));
            }
            let mut table = Table::new(&["n", "alpha", "b", "tv_exact", "tv_empirical", "samples"]);
            for &n in &n_grid {
                let a = resolve_alpha(alpha, n)?;
                let exact = tv_exact(n, a, b)?;
                let empirical = match (samples, seed) {
                    (Some(k), Some(s)) => {
                        let batch = draw(n, a, k, s, Method::Recursive, None, bounded_cycles::sampler::DEFAULT_ATTEMPT_BUDGET)?;
                        Some(tv_empirical(&batch, b)?)
                    }
                    _ => None,
                };
                table.push(vec![n.into(), a.into(), b.into(), exact.into(), empirical.into(), samples.into()]);
            }
            Run { command: "experiment poisson-tv", args, output: &output, seed, summary: Map::new() }.finish(&table)
        }

        Experiment::Clt { sampling, m, output } => {
            let (alpha, batch) = draw_args(&sampling)?;
            let n = sampling.n;
            let ms = if m.is_empty() { vec![alpha.min(n)] } else { m };
            let mut table = Table::new(&["statistic", "target", "samples", "value", "reference"]);
            let mut warnings = Vec::new();
            for &m in &ms {
                let r = clt_statistic(&batch, n, alpha, m)?;
                warnings.extend(r.warnings.iter().cloned());
                moment_rows(&mut table, &r);
            }
            for (i, &a) in ms.iter().enumerate() {
                for &b in &ms[i + 1..] {
                    let c = cycle_count_correlation(&batch, a, b);
                    table.push(vec!["correlation".into(), format!("C_{a}:C_{b}").into(), batch.len().into(), c.into(), 0.0.into()]);
                }
            }
            if alpha < n {
                moment_rows(&mut table, &total_cycle_clt(&batch, n, alpha)?);
            }
            let mut summary = Map::new();
            summary.insert("alpha".into(), alpha.into());
            summary.insert("warnings".into(), warnings.into());
            Run { command: "experiment clt", args, output: &output, seed: Some(sampling.seed), summary }.finish(&table)
        }

        Experiment::Shape { sampling, grid_points, eps, output } => {
            let (alpha, batch) = draw_args(&sampling)?;
            let grid = PathGrid::new(sampling.n, alpha, &uniform_grid(grid_points))?;
            let shape = grid.paths(&batch, PathKind::Shape)?;
            let index = grid.paths(&batch, PathKind::IndexShape)?;
            let mut table = Table::new(&["t", "b_t", "shape_mean", "shape_sd", "index_mean", "index_sd"]);
            for (g, &t) in grid.t_grid.iter().enumerate() {
                let ks: Vec<f64> = shape.iter().map(|p| p.values[g]).collect();
                let ss: Vec<f64> = index.iter().map(|p| p.values[g]).collect();
                table.push(vec![
                    t.into(),
                    grid.cutoffs[g].into(),
                    mean(&ks).into(),
                    variance(&ks).sqrt().into(),
                    mean(&ss).into(),
                    variance(&ss).sqrt().into(),
                ]);
            }
            let sups: Vec<f64> = shape.iter().map(|p| p.sup_deviation()).collect();
            let mut summary = Map::new();
            summary.insert("alpha".into(), alpha.into());
            summary.insert("eps".into(), eps.into());
            summary.insert("p_sup_exceeds_shape".into(), exceedance_probability(&shape, eps).into());
            summary.insert("p_sup_exceeds_index".into(), exceedance_probability(&index, eps).into());
            summary.insert("mean_sup_shape".into(), mean(&sups).into());
            Run { command: "experiment shape", args, output: &output, seed: Some(sampling.seed), summary }.finish(&table)
        }

        Experiment::Bridge { sampling, pairs, indices, output } => {
            let pairs = parse_pairs(&pairs)?;
            let mut times: Vec<f64> = pairs.iter().flat_map(|&(s, t)| [s, t]).collect();
            times.sort_by(f64::total_cmp);
            times.dedup();
            let (alpha, batch) = draw_args(&sampling)?;
            let grid = PathGrid::new(sampling.n, alpha, &times)?;
            let kind = if indices { PathKind::IndexFluctuation } else { PathKind::Fluctuation };
            let est = bridge_covariance(&grid.paths(&batch, kind)?, &pairs)?;
            let mut table = Table::new(&["s", "t", "cov_est", "cov_pred", "stderr"]);
            for e in &est.entries {
                table.push(vec![e.s.into(), e.t.into(), e.estimate.into(), e.predicted.into(), e.stderr.into()]);
            }
            let mut summary = Map::new();
            summary.insert("alpha".into(), alpha.into());
            summary.insert("paths".into(), est.paths.into());
            for (&t, &b) in grid.t_grid.iter().zip(&grid.cutoffs) {
                summary.insert(format!("b_t({t})"), b.into());
            }
            Run { command: "experiment bridge", args, output: &output, seed: Some(sampling.seed), summary }.finish(&table)
        }

        Experiment::Longest { sampling, k, output } => {
            let (alpha, batch) = draw_args(&sampling)?;
            let r = longest_cycle_report(&batch, k, alpha)?;
            let mut table = Table::new(&["i", "p_at_alpha", "mean_ratio", "missing"]);
            for i in 0..k {
                table.push(vec![(i + 1).into(), r.p_at_alpha[i].into(), r.mean_ratio[i].into(), r.missing[i].into()]);
            }
            let mut summary = Map::new();
            summary.insert("alpha".into(), alpha.into());
            summary.insert("p_all_at_alpha".into(), r.p_all_at_alpha.into());
            Run { command: "experiment longest", args, output: &output, seed: Some(sampling.seed), summary }.finish(&table)
        }

        Experiment::TiltCheck { n, alpha, m, output } => {
            let a = resolve_alpha(alpha, n)?;
            let rows = tilted_poisson_check(n, a, m)?;
            let mut table = Table::new(&["j", "exact", "predicted", "ratio"]);
            for r in &rows {
                table.push(vec![r.j.into(), r.exact.into(), r.predicted.into(), r.ratio.into()]);
            }
            let mut summary = Map::new();
            summary.insert("alpha".into(), a.into());
            summary.insert("mu".into(), solve_saddle(n, a)?.mu(m).into());
            summary.insert("b_1".into(), b_t(n, a, 1.0)?.into());
            Run { command: "experiment tilt-check", args, output: &output, seed: None, summary }.finish(&table)
        }
    }
}

fn replay(manifest: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(manifest)
        .map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", manifest.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad manifest {}: {e}", manifest.display())))?;
    let args: Vec<String> = value
        .get("args")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Usage("manifest has no args".into()))?
        .iter()
        .map(|v| v.as_str().map(str::to_string).ok_or_else(|| CliError::Usage("non-string manifest arg".into())))
        .collect::<Result<_, _>>()?;
    if args.first().map(String::as_str) == Some("replay") {
        return Err(CliError::Usage("manifest records a replay".into()));
    }
    let target = match out {
        Some(p) => p,
        None => PathBuf::from(
            value
                .get("output")
                .and_then(Value::as_str)
                .ok_or_else(|| CliError::Usage("manifest has no output path".into()))?,
        ),
    };
    let mut argv: Vec<OsString> = vec!["bounded-cycles".into()];
    argv.extend(args.into_iter().map(OsString::from));
    argv.push("--out".into());
    argv.push(target.into_os_string());
    super::try_run_expanded(argv)
}
