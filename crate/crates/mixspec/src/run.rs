//! The `solve`, `verify` and `sweep` commands.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use mixspec_core::experiments::{
    boundary_growth_check, classical_anchor_check, classical_limit_oracle, localization_sweep,
    operator_limits_check, oracle_crosscheck, seminorm_lemma_checks, sign_change_check,
    simplicity_dichotomy, simplicity_positivity_check, union_inequality_check, ExperimentReport,
    SweepRow, Verdict,
};
use mixspec_core::{build_grid, build_pencil, smallest_eigenpairs, MeasureAtom, SignedMeasure};

use crate::config::{
    parse_checks, parse_run_config, Check, CheckEntry, ConfigError, RunConfig, SweepAxis,
};
use crate::output::{eigen_json, eigenvectors_csv, report_json, rows_csv, write_atomic};
use crate::presets;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

pub const OUT_ENV: &str = "MIXSPEC_OUT";
const DEFAULT_OUT: &str = "mixspec-out";

/// Command-line options shared by the subcommands.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub only: Option<String>,
    pub all: bool,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Core(mixspec_core::Error),
    Io(PathBuf, std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(..) => EXIT_CONFIG,
            RunError::Core(e) if e.is_input_error() => EXIT_CONFIG,
            RunError::Core(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<mixspec_core::Error> for RunError {
    fn from(e: mixspec_core::Error) -> Self {
        RunError::Core(e)
    }
}

fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Io(path.to_path_buf(), e))?;
    Ok(parse_run_config(&text)?)
}

/// `MIXSPEC_OUT`, then `--out`, then the config's `out`, then `mixspec-out`.
pub fn out_dir(opts: &Options, config: Option<&RunConfig>) -> PathBuf {
    if let Some(env) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(env);
    }
    if let Some(o) = &opts.out {
        return o.clone();
    }
    config
        .and_then(|c| c.out.as_ref())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn write(path: PathBuf, bytes: &[u8]) -> Result<(), RunError> {
    write_atomic(&path, bytes).map_err(|e| RunError::Io(path, e))
}

fn thread_count(opts: &Options) -> usize {
    opts.threads.filter(|&t| t > 0).unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

/// Maps `f` over `items` on up to `threads` workers; results keep input order.
pub fn parallel_map<T: Sync, R: Send>(
    items: &[T],
    threads: usize,
    f: impl Fn(&T) -> R + Sync,
) -> Vec<R> {
    let workers = threads.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().unwrap_or_else(|p| p.into_inner())[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap_or_else(|p| p.into_inner())
        .into_iter()
        .map(|r| r.expect("every slot is filled"))
        .collect()
}

// ---------------------------------------------------------------------------
// solve

pub fn cmd_solve(opts: &Options) -> i32 {
    match solve(opts) {
        Ok(()) => EXIT_PASS,
        Err(e) => {
            eprintln!("mixspec solve: {e}");
            e.exit_code()
        }
    }
}

fn solve(opts: &Options) -> Result<(), RunError> {
    let path = opts
        .config
        .as_ref()
        .ok_or_else(|| ConfigError::at("", "solve needs --config"))?;
    let cfg = load_config(path)?;
    let grid_spec = cfg
        .grid
        .as_ref()
        .ok_or_else(|| ConfigError::at("/grid", "missing grid"))?;
    let measure_spec = cfg
        .measure
        .as_ref()
        .ok_or_else(|| ConfigError::at("/measure", "missing measure"))?;
    let (domain, h) = grid_spec.resolve("/grid")?;
    let measure = measure_spec.resolve("/measure")?;
    let grid = build_grid(&domain, h)?;
    let pencil = build_pencil(&grid, &measure)?;
    let result = smallest_eigenpairs(&pencil, cfg.k, cfg.tol)?;
    let out = out_dir(opts, Some(&cfg));
    write(
        out.join("eigen.json"),
        &eigen_json(&result).map_err(|e| RunError::Io(out.clone(), e))?,
    )?;
    write(
        out.join("eigenvectors.csv"),
        &eigenvectors_csv(&grid, &result).map_err(|e| RunError::Io(out.clone(), e))?,
    )?;
    for (i, l) in result.lambdas.iter().enumerate() {
        println!("lambda{} = {l}", i + 1);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// verify

pub fn run_check(check: &Check) -> mixspec_core::Result<ExperimentReport> {
    match check {
        Check::ClassicalAnchor(p) => classical_anchor_check(p),
        Check::OperatorLimits(p) => operator_limits_check(p),
        Check::OracleCrosscheck(p) => oracle_crosscheck(p),
        Check::Localization(p) => localization_sweep(p),
        Check::SimplicityPositivity(p) => simplicity_positivity_check(p),
        Check::SignChange(p) => sign_change_check(p),
        Check::UnionInequality(p) => union_inequality_check(p),
        Check::SimplicityScan(p) => simplicity_dichotomy(p),
        Check::ClassicalLimit(p) => classical_limit_oracle(p),
        Check::SeminormLemmas(p) => seminorm_lemma_checks(p),
        Check::BoundaryGrowth(p) => boundary_growth_check(p),
    }
}

/// Exit code of a finished `verify`: errors first, then failures, then
/// inconclusive checks.
pub fn combine_exit(outcomes: &[Result<Verdict, i32>]) -> i32 {
    let has = |code: i32| outcomes.contains(&Err(code));
    if has(EXIT_CONFIG) {
        EXIT_CONFIG
    } else if has(EXIT_NUMERICAL) {
        EXIT_NUMERICAL
    } else if outcomes.contains(&Ok(Verdict::Fail)) {
        EXIT_FAIL
    } else if outcomes.contains(&Ok(Verdict::Inconclusive)) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_PASS
    }
}

pub fn cmd_verify(opts: &Options) -> i32 {
    match verify(opts) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mixspec verify: {e}");
            e.exit_code()
        }
    }
}

fn select(entries: Vec<CheckEntry>, only: Option<&str>) -> Result<Vec<CheckEntry>, RunError> {
    let Some(name) = only else { return Ok(entries) };
    let picked: Vec<CheckEntry> = entries
        .into_iter()
        .filter(|e| e.name == name || e.spec.kind() == name)
        .collect();
    if picked.is_empty() {
        return Err(ConfigError::at("", format!("no check named `{name}`")).into());
    }
    Ok(picked)
}

fn verify(opts: &Options) -> Result<i32, RunError> {
    let (cfg, entries) = match &opts.config {
        Some(path) => {
            let cfg = load_config(path)?;
            let entries = parse_checks(&cfg.checks, "/checks")?;
            if entries.is_empty() {
                return Err(ConfigError::at("/checks", "no checks listed").into());
            }
            (Some(cfg), entries)
        }
        None if opts.all || opts.only.is_some() => (None, presets::check_entries()?),
        None => return Err(ConfigError::at("", "verify needs --config, --only or --all").into()),
    };
    let entries = select(entries, opts.only.as_deref())?;
    let seed = opts.seed.or(cfg.as_ref().and_then(|c| c.seed)).unwrap_or(0);
    let checks: Vec<Check> = entries
        .iter()
        .map(|e| e.spec.resolve(&e.pointer, seed, opts.seed.is_some()))
        .collect::<Result<_, _>>()?;
    let out = out_dir(opts, cfg.as_ref());

    let results = parallel_map(&checks, thread_count(opts), run_check);
    let mut outcomes = Vec::with_capacity(results.len());
    let mut summary = String::new();
    for (entry, result) in entries.iter().zip(results) {
        let line = match result {
            Ok(mut report) => {
                report.name = entry.name.clone();
                let json = report_json(&report, entry.spec.kind(), Some(seed), &entry.raw)
                    .map_err(|e| RunError::Io(out.clone(), e))?;
                write(out.join(format!("{}.json", entry.name)), &json)?;
                if !report.rows.is_empty() {
                    let csv = rows_csv(&report.rows).map_err(|e| RunError::Io(out.clone(), e))?;
                    write(out.join(format!("{}.csv", entry.name)), &csv)?;
                }
                outcomes.push(Ok(report.verdict));
                format!("{}: {}", entry.name, report.verdict.as_str())
            }
            Err(e) => {
                let err = RunError::Core(e);
                eprintln!("mixspec verify: {} ({}): {err}", entry.name, entry.pointer);
                outcomes.push(Err(err.exit_code()));
                format!("{}: error", entry.name)
            }
        };
        println!("{line}");
        summary.push_str(&line);
        summary.push('\n');
    }
    write(out.join("summary.txt"), summary.as_bytes())?;
    Ok(combine_exit(&outcomes))
}

// ---------------------------------------------------------------------------
// sweep

pub fn cmd_sweep(opts: &Options) -> i32 {
    match sweep(opts) {
        Ok(()) => EXIT_PASS,
        Err(e) => {
            eprintln!("mixspec sweep: {e}");
            e.exit_code()
        }
    }
}

fn sweep(opts: &Options) -> Result<(), RunError> {
    let path = opts
        .config
        .as_ref()
        .ok_or_else(|| ConfigError::at("", "sweep needs --config"))?;
    let cfg = load_config(path)?;
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| ConfigError::at("/sweep", "missing sweep"))?;
    if spec.values.is_empty() {
        return Err(ConfigError::at("/sweep/values", "sweep axis has no values").into());
    }
    let grid_spec = cfg
        .grid
        .as_ref()
        .ok_or_else(|| ConfigError::at("/grid", "missing grid"))?;
    let measure_spec = cfg
        .measure
        .as_ref()
        .ok_or_else(|| ConfigError::at("/measure", "missing measure"))?;
    let (domain, h) = grid_spec.resolve("/grid")?;
    let plus = measure_spec.plus_atoms("/measure")?;

    // validate every point before solving any
    let mut points: Vec<(f64, mixspec_core::Grid, SignedMeasure)> =
        Vec::with_capacity(spec.values.len());
    for (i, &v) in spec.values.iter().enumerate() {
        let at = format!("/sweep/values/{i}");
        let (grid, measure) = match spec.axis {
            SweepAxis::Eps | SweepAxis::SMinus => (
                build_grid(&domain, h)?,
                SignedMeasure::new(&plus, &[MeasureAtom::new(v, 1.0)], measure_spec.s_bar)
                    .map_err(|e| ConfigError::at(at.clone(), e))?,
            ),
            SweepAxis::H => (
                build_grid(&domain, v).map_err(|e| ConfigError::at(at.clone(), e))?,
                measure_spec.resolve("/measure")?,
            ),
        };
        points.push((v, grid, measure));
    }
    let k = cfg.k;
    let tol = cfg.tol;
    let rows = parallel_map(&points, thread_count(opts), |(v, grid, measure)| {
        let pencil = build_pencil(grid, measure)?;
        let r = smallest_eigenpairs(&pencil, k.min(grid.len()), tol)?;
        Ok::<SweepRow, mixspec_core::Error>(SweepRow::from_result(*v, &r))
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let out = out_dir(opts, Some(&cfg));
    write(
        out.join("sweep.csv"),
        &rows_csv(&rows).map_err(|e| RunError::Io(out.clone(), e))?,
    )?;
    println!(
        "{} sweep points written to {}",
        rows.len(),
        out.join("sweep.csv").display()
    );
    Ok(())
}
