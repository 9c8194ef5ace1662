//! `siegellab`: command-line harness for the library's experiments.
//!
//! Exit codes: 0 success, 1 runtime failure or failed self-test,
//! 2 invalid input, 3 refused by a resource guard.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use siegellab::acceptance::{self, Mode};
use siegellab::count;
use siegellab::equidist::{self, Observable};
use siegellab::flag::{self, GrassmannModel};
use siegellab::rootsys::{self, CartanType};
use siegellab::siegel::{self, TestFunction};
use siegellab::{lattice, Error};

use output::{Csv, Record};

#[derive(Parser, Debug)]
#[command(name = "siegellab", version, about = "Siegel transforms, rational points and counting experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Worker threads; SIEGELLAB_WORKERS takes precedence.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Flat `key = value` file; flags on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrability verdicts for a split group and maximal parabolic.
    Integrability(IntegrabilityArgs),
    /// Haar measure of the cusp region {lambda_1 < delta} on SL_2.
    Cusp(CuspArgs),
    /// Monte Carlo check of the mean value formula on SL_2.
    Meanvalue(MeanValueArgs),
    /// Rational points of bounded height.
    Enumerate(EnumerateArgs),
    /// Property checks for the approximation regions.
    Regions(RegionsArgs),
    /// Counting rational approximations over an ensemble of points.
    Count(CountArgs),
    /// Decay of expanding circle averages.
    Equidist(EquidistArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug, Serialize)]
struct IntegrabilityArgs {
    #[arg(long = "type", value_name = "A..G")]
    cartan_type: String,
    #[arg(long)]
    rank: usize,
    #[arg(long)]
    alpha: usize,
    /// Also scan the Weyl group for the character-rank condition.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = rootsys::DEFAULT_WEYL_CAP)]
    weyl_cap: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Serialize)]
struct CuspArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.5")]
    delta: Vec<f64>,
    #[arg(long, value_parser = parse_count, default_value = "1e6")]
    samples: u64,
    #[arg(long)]
    seed: u64,
    /// Write CSV to PATH, or to stdout when no path is given (the default).
    #[arg(long, num_args = 0..=1, default_missing_value = "-", value_name = "PATH")]
    csv: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Serialize)]
struct MeanValueArgs {
    /// ball:R, annulus:R0,R1, bump:S or zero.
    #[arg(long = "f", value_name = "FUNCTION")]
    f: String,
    #[arg(long, value_parser = parse_count, default_value = "1e5")]
    samples: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Serialize)]
struct EnumerateArgs {
    /// l,n
    #[arg(long)]
    model: String,
    #[arg(long)]
    max_height: f64,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
}

#[derive(Args, Debug, Serialize)]
struct RegionsArgs {
    /// Run the sandwich and partition checks.
    #[arg(long)]
    selftest: bool,
    #[arg(long, value_parser = parse_count, default_value = "1e4")]
    samples: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = flag::DEFAULT_C0)]
    c0: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Serialize)]
#[command(args_conflicts_with_subcommands = true)]
struct CountArgs {
    #[command(subcommand)]
    #[serde(skip)]
    action: Option<CountAction>,
    #[arg(long, default_value = "1,2")]
    model: String,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// A number, or `beta` for the critical exponent.
    #[arg(long, default_value = "beta")]
    tau: String,
    /// LO:HI:K with `eX` meaning exp(X); K points in geometric progression.
    #[arg(long = "T-grid", default_value = "e4:e12:9")]
    t_grid: String,
    #[arg(long, value_parser = parse_count, default_value = "200")]
    ensemble: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Write `member,lnT,N` rows to PATH, or to stdout without a path.
    #[arg(long, num_args = 0..=1, default_missing_value = "-", value_name = "PATH")]
    csv: Option<String>,
}

#[derive(Subcommand, Debug)]
enum CountAction {
    /// Fit the ensemble mean of a `count --csv` file against ln T.
    Fit {
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
    },
}

#[derive(Args, Debug, Serialize)]
struct EquidistArgs {
    /// cusp:S, ball:S or const:V.
    #[arg(long, default_value = "cusp:0.5")]
    phi: String,
    /// LO:HI:geomK (or LO:HI:K).
    #[arg(long, default_value = "4:4096:geom6")]
    y_grid: String,
    #[arg(long, default_value_t = 10)]
    bases: usize,
    #[arg(long)]
    seed: u64,
    /// Write `y,base,average,haar_mean,error` rows to PATH, or to stdout without a path.
    #[arg(long, num_args = 0..=1, default_missing_value = "-", value_name = "PATH")]
    csv: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct SelftestArgs {
    /// Smaller samples with loosened tolerances.
    #[arg(long)]
    quick: bool,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    #[arg(long)]
    json: bool,
}

/// Accepts `100000`, `1e5` or `1.5e4`, as long as the value is a whole number.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
        Ok(v as u64)
    } else {
        Err(format!("expected a non-negative whole number, got {s:?}"))
    }
}

/// `LO:HI:K` or `LO:HI:geomK`; endpoints `eX` stand for `exp(X)`.
fn parse_grid(s: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::Invalid(format!("grid must look like LO:HI:K, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let log_end = |p: &str| -> Result<f64, Error> {
        match p.strip_prefix('e') {
            Some(x) => x.parse::<f64>().map_err(|_| bad()),
            None => p.parse::<f64>().ok().filter(|v| *v > 0.0).map(f64::ln).ok_or_else(bad),
        }
    };
    let (a, b) = (log_end(parts[0])?, log_end(parts[1])?);
    let k: usize = parts[2].trim_start_matches("geom").parse().map_err(|_| bad())?;
    if !(b > a) || k < 2 {
        return Err(Error::Invalid(format!("grid needs LO < HI and at least two points, got {s:?}")));
    }
    Ok(count::exp_grid(a, b, k))
}

fn parse_tau(s: &str, model: &GrassmannModel) -> Result<f64, Error> {
    if s == "beta" {
        return Ok(model.beta_f64());
    }
    s.parse().map_err(|_| Error::Invalid(format!("tau must be a number or `beta`, got {s:?}")))
}

fn workers(cli: &Cli) -> anyhow::Result<usize> {
    if let Ok(v) = std::env::var("SIEGELLAB_WORKERS") {
        return v.parse().map_err(|_| Error::Invalid(format!("SIEGELLAB_WORKERS must be a positive integer, got {v:?}")).into());
    }
    Ok(cli.workers.unwrap_or(0))
}

fn main() -> ExitCode {
    let args = match config::merge_config(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(match e.downcast_ref::<Error>() {
                Some(err) if err.is_resource_guard() => 3,
                Some(Error::Invalid(_) | Error::OutsideChart) => 2,
                _ => 1,
            })
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    let threads = workers(cli)?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("cannot start the worker pool")?;
    let workers = rayon::current_num_threads();
    let start = Instant::now();
    let record = |name: &str, cfg: &dyn erased::Echo, seed: Option<u64>, result: serde_json::Value| Record {
        version: format!("siegellab-{}", siegellab::VERSION),
        command: name.to_string(),
        config: cfg.echo(),
        seed,
        workers,
        wall_time_s: start.elapsed().as_secs_f64(),
        result,
    };
    match &cli.command {
        Command::Integrability(a) => {
            let t: CartanType = a.cartan_type.parse()?;
            let rep = rootsys::integrability_report(t, a.rank, a.alpha, a.full.then_some(a.weyl_cap))?;
            if a.json {
                output::print_json(&record("integrability", a, None, serde_json::to_value(&rep)?))?;
            } else {
                output::print_integrability(&rep);
            }
        }
        Command::Cusp(a) => {
            let rows = lattice::cusp_probe(&a.delta, a.samples, a.seed)?;
            if a.json {
                output::print_json(&record("cusp", a, Some(a.seed), serde_json::to_value(&rows)?))?;
            } else {
                let mut csv = Csv::open(a.csv.as_deref().unwrap_or("-"), &output::config_line("cusp", a, workers))?;
                csv.row(["delta", "empirical", "predicted", "rel_err"])?;
                for r in rows {
                    csv.row(&[r.delta.to_string(), r.empirical.to_string(), r.predicted.to_string(), r.rel_err.to_string()])?;
                }
                csv.finish()?;
            }
        }
        Command::Meanvalue(a) => {
            let f = TestFunction::parse(&a.f)?;
            let r = siegel::mean_value_mc(&f, a.samples, a.seed)?;
            if a.json {
                output::print_json(&record("meanvalue", a, Some(a.seed), serde_json::to_value(r)?))?;
            } else {
                println!("estimate {:.6} ± {:.6}  predicted {:.6}  z {:.3}", r.estimate, r.stderr, r.predicted, r.z_score);
            }
        }
        Command::Enumerate(a) => {
            let model = GrassmannModel::parse(&a.model)?;
            let pts = flag::enumerate_rational_points(&model, a.max_height)?;
            if a.format == "json" {
                let rows: Vec<_> = pts.iter().map(|p| json!({"hnf_rows": p.basis, "plucker": p.plucker, "height": p.height()})).collect();
                output::print_json(&record("enumerate", a, None, json!(rows)))?;
            } else {
                let mut csv = Csv::open_with("-", &output::config_line("enumerate", a, workers), b';')?;
                csv.row(["hnf_rows", "plucker", "height"])?;
                for p in &pts {
                    let rows: Vec<String> = p.basis.iter().map(|r| join(r)).collect();
                    csv.row(&[rows.join("/"), join(&p.plucker), p.height().to_string()])?;
                }
                csv.finish()?;
            }
        }
        Command::Regions(a) => {
            if !a.selftest {
                bail!(Error::Invalid("regions currently only supports --selftest".into()));
            }
            let mut rows = vec![];
            let mut ok = true;
            for (l, n) in [(1, 2), (1, 3), (2, 4)] {
                let model = GrassmannModel::new(l, n)?;
                for ell in [8u32, 16, 32] {
                    let r = count::sandwich_check(&model, ell, a.c0, 1e4, a.samples, a.seed)?;
                    ok &= r.violations == 0;
                    rows.push(json!({"check": "sandwich", "model": model.to_string(), "l": ell, "report": r}));
                }
                if l == 1 {
                    let r = count::partition_check(&model, 1.0, 8, a.samples, a.seed)?;
                    ok &= r.violations == 0;
                    rows.push(json!({"check": "partition", "model": model.to_string(), "report": r}));
                }
            }
            if a.json {
                output::print_json(&record("regions", a, Some(a.seed), json!({"passed": ok, "checks": rows})))?;
            } else {
                for r in &rows {
                    println!("{r}");
                }
                println!("{}", if ok { "all region checks passed" } else { "region checks FAILED" });
            }
            if !ok {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Count(a) => {
            if let Some(CountAction::Fit { input }) = &a.action {
                let fit = output::fit_count_csv(input)?;
                output::print_json(&fit)?;
                return Ok(ExitCode::SUCCESS);
            }
            let seed = a.seed.ok_or_else(|| Error::Invalid("count needs --seed".into()))?;
            let model = GrassmannModel::parse(&a.model)?;
            let tau = parse_tau(&a.tau, &model)?;
            let grid = parse_grid(&a.t_grid)?;
            if a.ensemble == 0 {
                bail!(Error::Invalid("the ensemble needs at least one member".into()));
            }
            let counts = count::ensemble_counts(&model, a.c, tau, &grid, a.ensemble, seed)?;
            if let Some(path) = &a.csv {
                let mut csv = Csv::open(path, &output::config_line("count", a, workers))?;
                csv.row(["member", "lnT", "N"])?;
                for (m, row) in counts.iter().enumerate() {
                    for (t, n) in grid.iter().zip(row) {
                        csv.row(&[m.to_string(), t.ln().to_string(), n.to_string()])?;
                    }
                }
                csv.finish()?;
                if path == "-" {
                    return Ok(ExitCode::SUCCESS);
                }
            }
            let result = match count::ensemble_fit(&grid, &counts) {
                Ok(fit) => json!({"fit": fit, "kappa_oracle": count::kappa_oracle(&model, a.c)}),
                Err(_) => json!({"counts": counts, "kappa_oracle": count::kappa_oracle(&model, a.c)}),
            };
            output::print_json(&record("count", a, Some(seed), result))?;
        }
        Command::Equidist(a) => {
            let phi = Observable::parse(&a.phi)?;
            let ys = parse_grid(&a.y_grid)?;
            let bases = equidist::base_ensemble(a.bases, a.seed);
            let curve = equidist::decay_probe(&phi, &bases, &ys)?;
            match &a.csv {
                Some(path) => {
                    let mu = equidist::haar_mean(&phi);
                    let mut csv = Csv::open(path, &output::config_line("equidist", a, workers))?;
                    csv.row(["y", "base", "average", "haar_mean", "error"])?;
                    for (b, errs) in curve.errors_by_base.iter().enumerate() {
                        for (y, e) in ys.iter().zip(errs) {
                            let avg = equidist::k_orbit_average(&phi, *y, &bases[b], 0)?.value;
                            csv.row(&[y.to_string(), b.to_string(), avg.to_string(), mu.to_string(), e.to_string()])?;
                        }
                    }
                    csv.finish()?;
                }
                None => output::print_json(&record("equidist", a, Some(a.seed), serde_json::to_value(&curve)?))?,
            }
        }
        Command::Selftest(a) => {
            let mode = if a.quick { Mode::Quick } else { Mode::Full };
            let ids: Vec<u8> = if a.only.is_empty() { acceptance::CRITERIA.iter().map(|c| c.0).collect() } else { a.only.clone() };
            let reports: Vec<_> = ids.iter().map(|&id| acceptance::run_criterion(id, mode)).collect();
            let ok = reports.iter().all(|r| r.passed);
            if a.json {
                output::print_json(&record("selftest", a, None, serde_json::to_value(&reports)?))?;
            } else {
                for r in &reports {
                    println!("[{}] {:>2} {:<26} {:>7.1}s  {}", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.seconds, r.detail);
                }
                println!("{}/{} criteria passed", reports.iter().filter(|r| r.passed).count(), reports.len());
            }
            if !ok {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn join(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

mod erased {
    use serde::Serialize;

    /// Object-safe access to a serialisable argument struct.
    pub trait Echo {
        fn echo(&self) -> serde_json::Value;
    }

    impl<T: Serialize> Echo for T {
        fn echo(&self) -> serde_json::Value {
            serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
        }
    }
}
