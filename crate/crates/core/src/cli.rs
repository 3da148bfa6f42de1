//! Command implementations behind the `fdom` binary.
//!
//! Each command reads its inputs, writes its outputs into the `--output`
//! directory (atomically, via a temporary file and a rename) and finishes
//! with a `manifest.json` that [`replay`] can run again.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bootstrap::{self, StationaryBootstrapConfig};
use crate::calibration::{self, MZFit, TestReport};
use crate::error::{Error, Result};
use crate::gaussian::{self, ClassifyOptions};
use crate::murphy;
use crate::order::{self, OrderHypothesis};
use crate::series::{format_full, PairedSeries};
use crate::simulate::ScenarioSpec;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", content = "arguments", rename_all = "kebab-case")]
pub enum Command {
    /// Empirical ψ-functions per track and pairwise Murphy differences.
    Murphy(MurphyArgs),
    /// Mincer–Zarnowitz regressions with HAC Wald tests.
    Mz(MzArgs),
    /// Closed-form Gaussian dominance classification from sample moments.
    Gauss(GaussArgs),
    /// Integrated-CDF curve and subsampling convex-order tests.
    ConvexOrder(ConvexOrderArgs),
    /// Bootstrap dominance tests in both directions.
    Dominance(DominanceArgs),
    /// Gaussianity tests for forecasts, realizations and forecast errors.
    Normality(NormalityArgs),
    /// Generate a paired series from a scenario file.
    Simulate(SimulateArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MurphyArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated track names.
    #[arg(long, value_delimiter = ',', required = true)]
    pub tracks: Vec<String>,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Comma-separated θ values; defaults to the knot grid.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MzArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Tracks to regress on; all tracks when omitted.
    #[arg(long, value_delimiter = ',')]
    pub tracks: Option<Vec<String>>,
    /// Bartlett lag count; chosen automatically when omitted.
    #[arg(long)]
    pub bandwidth: Option<usize>,
    #[arg(long)]
    pub center: bool,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GaussArgs {
    /// One CSV per horizon; the file stem labels the column.
    #[arg(long, num_args = 1.., required = true)]
    pub input: Vec<PathBuf>,
    /// Tracks to compare pairwise in both directions; all when omitted.
    #[arg(long, value_delimiter = ',')]
    pub tracks: Option<Vec<String>>,
    #[arg(long)]
    pub center: bool,
    /// Relative tolerance for the equality conditions of Cases 3 and 4.
    #[arg(long, default_value_t = 1e-9)]
    pub case_tolerance: f64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ConvexOrderArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Exactly two track names, `A,B`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub tracks: Vec<String>,
    /// Comma-separated subsample sizes; 20 log-spaced sizes in [n/10, n/2] when omitted.
    #[arg(long, value_delimiter = ',')]
    pub b_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DominanceArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Exactly two track names, `A,B`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub tracks: Vec<String>,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    #[arg(long, default_value_t = bootstrap::DEFAULT_REPLICATIONS)]
    pub replications: usize,
    /// Mean block length; `n^{1/3}/1.36` when omitted.
    #[arg(long)]
    pub block_mean: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = bootstrap::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct NormalityArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub tracks: Option<Vec<String>>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Overrides the seed stored in the scenario file.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    #[serde(flatten)]
    pub command: Command,
    pub outputs: Vec<PathBuf>,
}

/// Files written and a human-readable report for stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub outputs: Vec<PathBuf>,
    pub report: String,
}

/// Writes `bytes` to a sibling temporary file, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter {
            name: "output",
            reason: format!("`{}` is not a file path", path.display()),
        })?
        .to_string_lossy()
        .into_owned();
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn file_component(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

struct Sink {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Sink {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    fn put_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.put(name, text.as_bytes())
    }

    fn put_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.put(name, &buf)
    }
}

fn read_series(path: &Path) -> Result<PairedSeries> {
    let file = fs::File::open(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    PairedSeries::read_csv(file)
}

fn two_tracks(tracks: &[String]) -> Result<(&str, &str)> {
    match tracks {
        [a, b] => Ok((a, b)),
        _ => Err(Error::InvalidParameter {
            name: "tracks",
            reason: format!("expected exactly two track names, got {}", tracks.len()),
        }),
    }
}

fn selected<'a>(series: &'a PairedSeries, tracks: &'a Option<Vec<String>>) -> Result<Vec<&'a str>> {
    match tracks {
        Some(names) => {
            for n in names {
                series.track(n)?;
            }
            Ok(names.iter().map(String::as_str).collect())
        }
        None => Ok(series.track_names()),
    }
}

/// Runs a command, writes its manifest and returns what was produced.
pub fn run(command: &Command) -> Result<RunOutcome> {
    if let Command::Replay(args) = command {
        return replay(&args.manifest);
    }
    let (output, mut sink_outcome) = match command {
        Command::Murphy(a) => (&a.output, cmd_murphy(a)?),
        Command::Mz(a) => (&a.output, cmd_mz(a)?),
        Command::Gauss(a) => (&a.output, cmd_gauss(a)?),
        Command::ConvexOrder(a) => (&a.output, cmd_convex_order(a)?),
        Command::Dominance(a) => (&a.output, cmd_dominance(a)?),
        Command::Normality(a) => (&a.output, cmd_normality(a)?),
        Command::Simulate(a) => (&a.output, cmd_simulate(a)?),
        Command::Replay(_) => unreachable!(),
    };
    let manifest = RunManifest {
        tool: "fdom".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.clone(),
        outputs: sink_outcome.outputs.clone(),
    };
    let path = output.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_atomic(&path, text.as_bytes())?;
    sink_outcome.outputs.push(path);
    Ok(sink_outcome)
}

pub fn replay(manifest: &Path) -> Result<RunOutcome> {
    let text = fs::read_to_string(manifest)?;
    let m: RunManifest = serde_json::from_str(&text)?;
    run(&m.command)
}

pub fn cmd_murphy(args: &MurphyArgs) -> Result<RunOutcome> {
    let series = read_series(&args.input)?;
    let names: Vec<&str> = args.tracks.iter().map(String::as_str).collect();
    let grid = match &args.theta_grid {
        Some(g) => g.clone(),
        None => murphy::knot_grid(&series, &names)?,
    };
    let mut sink = Sink::new(&args.output)?;
    let mut report = String::new();
    for name in &names {
        let curve = murphy::empirical_psi(&series, name, &grid, args.tau)?;
        sink.put_with(&format!("psi_{}.csv", file_component(name)), |w| curve.write_csv(w))?;
    }
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let (a, b) = (names[i], names[j]);
            let diff = murphy::murphy_difference_on(&series, a, b, &grid, args.tau)?;
            let se = murphy::difference_standard_errors(&series, a, b, &grid, args.tau)?;
            let summary = murphy::dominance_summary(&diff);
            report.push_str(&format!(
                "{a} vs {b}: {} (max violation {:.6})\n",
                if summary.dominates {
                    format!("{a} empirically dominates {b}")
                } else {
                    "no empirical dominance".to_string()
                },
                summary.max_violation
            ));
            sink.put_with(
                &format!("diff_{}_{}.csv", file_component(a), file_component(b)),
                |w| {
                    let mut wtr = csv::Writer::from_writer(w);
                    wtr.write_record(["theta", "diff", "se"])?;
                    for g in 0..grid.len() {
                        wtr.write_record([format_full(grid[g]), format_full(diff.values[g]), format_full(se[g])])?;
                    }
                    wtr.flush()?;
                    Ok(())
                },
            )?;
        }
    }
    Ok(RunOutcome {
        outputs: sink.written,
        report,
    })
}

pub fn cmd_mz(args: &MzArgs) -> Result<RunOutcome> {
    let raw = read_series(&args.input)?;
    let series = if args.center { raw.centered() } else { raw };
    let names = selected(&series, &args.tracks)?;
    let mut fits: BTreeMap<String, MZFit> = BTreeMap::new();
    let mut report = String::new();
    for name in names {
        let fit = calibration::mz_regression(&series, name, args.bandwidth)?;
        report.push_str(&format!("{name}: {}\n", fit.summary()));
        fits.insert(name.to_string(), fit);
    }
    let mut sink = Sink::new(&args.output)?;
    sink.put_json("mz.json", &fits)?;
    Ok(RunOutcome {
        outputs: sink.written,
        report,
    })
}

pub fn cmd_gauss(args: &GaussArgs) -> Result<RunOutcome> {
    let mut stats = Vec::new();
    let mut tables = BTreeMap::new();
    let mut text = String::new();
    let mut track_names: Option<Vec<String>> = args.tracks.clone();
    for path in &args.input {
        let series = read_series(path)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        let table = calibration::moment_table(&series, args.center)?;
        if track_names.is_none() {
            track_names = Some(series.track_names().iter().map(|s| s.to_string()).collect());
        }
        text.push_str(&format!("[{label}]\n{}\n", table.to_text()));
        stats.push(table.horizon_stats(label.clone()));
        tables.insert(label, table);
    }
    let names = track_names.unwrap_or_default();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let pairs = gaussian::all_directed_pairs(&refs);
    let options = ClassifyOptions {
        equality_tol: args.case_tolerance,
        numerical_check: false,
    };
    let matrix = gaussian::classify_table(&stats, &pairs, &options)?;
    let mut sink = Sink::new(&args.output)?;
    sink.put_with("verdicts.csv", |w| matrix.write_csv(w))?;
    sink.put_json("verdicts.json", &matrix)?;
    sink.put("moments.txt", text.as_bytes())?;
    sink.put_json("moments.json", &tables)?;
    let mut report = text;
    for ((a, b), row) in matrix.pairs.iter().zip(&matrix.cells) {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        report.push_str(&format!("{a}>{b}: {}\n", cells.join(" ")));
    }
    Ok(RunOutcome {
        outputs: sink.written,
        report,
    })
}

pub fn cmd_convex_order(args: &ConvexOrderArgs) -> Result<RunOutcome> {
    let series = read_series(&args.input)?;
    let (a, b) = two_tracks(&args.tracks)?;
    let curve = order::integrated_cdf_diff(&series, a, b)?;
    let grid = match &args.b_grid {
        Some(g) => g.clone(),
        None => order::default_b_grid(series.len()),
    };
    let a_small = order::subsampling_order_test(&series, a, b, OrderHypothesis::ASmaller, &grid)?;
    let b_small = order::subsampling_order_test(&series, a, b, OrderHypothesis::BSmaller, &grid)?;
    let mut sink = Sink::new(&args.output)?;
    sink.put_with("integrated_cdf.csv", |w| curve.write_csv(w))?;
    sink.put_with(
        &format!("subsample_{}_smaller.csv", file_component(a)),
        |w| a_small.write_csv(w),
    )?;
    sink.put_with(
        &format!("subsample_{}_smaller.csv", file_component(b)),
        |w| b_small.write_csv(w),
    )?;
    let report = format!(
        "min integrated-CDF diff {:.6}; statistic ({a} smaller) {:.6}; statistic ({b} smaller) {:.6}\n",
        curve.min_diff(),
        a_small.statistic_full,
        b_small.statistic_full
    );
    Ok(RunOutcome {
        outputs: sink.written,
        report,
    })
}

pub fn cmd_dominance(args: &DominanceArgs) -> Result<RunOutcome> {
    let series = read_series(&args.input)?;
    let (a, b) = two_tracks(&args.tracks)?;
    let block = args
        .block_mean
        .unwrap_or_else(|| bootstrap::default_mean_block_length(series.len()).max(1.0));
    let config = StationaryBootstrapConfig::new(block, args.replications, args.seed)?;
    let (ab, ba) = bootstrap::dominance_tests(&series, a, b, args.tau, args.theta_grid.as_deref(), &config)?;
    let summary: serde_json::Value = serde_json::json!({
        "a_dominates_b": serde_json::from_str::<serde_json::Value>(&ab.summary_json()?)?,
        "b_dominates_a": serde_json::from_str::<serde_json::Value>(&ba.summary_json()?)?,
    });
    let mut sink = Sink::new(&args.output)?;
    sink.put_json("dominance.json", &summary)?;
    sink.put_with("diff.csv", |w| ab.per_theta_diffs.write_csv(w))?;
    let report = format!(
        "H0: {a} dominates {b}: statistic {:.6}, p = {:.6}\nH0: {b} dominates {a}: statistic {:.6}, p = {:.6}\n",
        ab.statistic, ab.p_value, ba.statistic, ba.p_value
    );
    Ok(RunOutcome {
        outputs: sink.written,
        report,
    })
}

pub fn cmd_normality(args: &NormalityArgs) -> Result<RunOutcome> {
    let series = read_series(&args.input)?;
    let names = selected(&series, &args.tracks)?;
    let mut rows: Vec<(String, TestReport)> = Vec::new();
    rows.push(("y".into(), calibration::lobato_velasco(series.y())?));
    for name in &names {
        let x = series.track(name)?;
        rows.push((name.to_string(), calibration::lobato_velasco(x)?));
        let err: Vec<f64> = series.y().iter().zip(x).map(|(y, x)| y - x).collect();
        rows.push((format!("y-{name}"), calibration::lobato_velasco(&err)?));
    }
    let mut sink = Sink::new(&args.output)?;
    sink.put_with("normality.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["series", "statistic", "p_value", "n"])?;
        for (label, r) in &rows {
            wtr.write_record([label.clone(), format_full(r.statistic), format_full(r.p_value), r.n.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    })?;
    let map: BTreeMap<&str, &TestReport> = rows.iter().map(|(l, r)| (l.as_str(), r)).collect();
    sink.put_json("normality.json", &map)?;
    let width = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(6).max(6);
    let mut report = format!("{:<width$} {:>12} {:>12}\n", "series", "statistic", "p_value");
    for (label, r) in &rows {
        report.push_str(&format!("{label:<width$} {:>12.6} {:>12.6}\n", r.statistic, r.p_value));
    }
    Ok(RunOutcome {
        outputs: sink.written,
        report,
    })
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<RunOutcome> {
    let mut spec = ScenarioSpec::from_json(&fs::read_to_string(&args.scenario)?)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let series = spec.generate()?;
    let mut sink = Sink::new(&args.output)?;
    sink.put_with("series.csv", |w| series.write_csv(w))?;
    sink.put_json("scenario.json", &spec)?;
    Ok(RunOutcome {
        outputs: sink.written,
        report: format!("generated {} rows\n", series.len()),
    })
}

/// Machine-readable error line for stderr.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({ "error": err.code(), "message": err.to_string() }).to_string()
}
