//! Command-line surface. The binary only parses arguments and maps errors
//! to exit codes; everything else lives here so it can be tested in process.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classes::{is_block_upper_triangular, ChainQuery, ClassPartition, Digraph};
use crate::error::{Error, Result};
use crate::fuzz::{generate_instance, run_fuzz, write_fuzz_csv, FuzzConfig, FuzzRecord};
use crate::io::{format_matrix, read_matrix, ModelSpec, ReportBody, ReportFile, SpecFile};
use crate::models::TailReport;
use crate::pencil::{pole_order, transform_value, ClassSummary, PoleOptions, Verdict};
use crate::simulator::{
    continuous_identity_check, discrete_identity_check, fit_tail, simulate_continuous, simulate_discrete,
    survival_curve, write_sample_file, write_sidecar, write_survival_csv, DiscreteMode, IdentityCheck,
    LaplaceGuard, SampleSet, TailFit, TailWindow,
};
use crate::spectral::{self, Tolerances};

#[derive(Debug, Parser)]
#[command(name = "erlang-tails", version, about = "Tail rates and Erlang orders of Markov-modulated growth models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Regenerative,
    LongRun,
}

impl From<ModeArg> for DiscreteMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Regenerative => DiscreteMode::Regenerative,
            ModeArg::LongRun => DiscreteMode::LongRun,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every model assumption; exit 1 if any fails.
    Validate {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tail rates and orders of a model, or the pole report of an explicit pencil.
    Analyze {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a model and fit its upper tail.
    Simulate {
        spec: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        paths: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Prefix of the output files.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads, 0 for all cores. Does not change the output.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, value_enum, default_value = "regenerative")]
        mode: ModeArg,
        /// Lower and upper quantile of the tail-fit window.
        #[arg(long, num_args = 2, value_names = ["LOWER", "UPPER"])]
        window: Option<Vec<f64>>,
        #[arg(long, default_value_t = 200)]
        survival_points: usize,
    },
    /// Compare eigenvalue index and longest chain on random reducible matrices.
    RothblumFuzz {
        #[arg(long, default_value_t = 500)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        max_size: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Relative singular-value threshold for numerical ranks.
        #[arg(long)]
        tol_rank: Option<f64>,
    },
    /// Class structure of a matrix given in text form.
    Classes {
        matrix: PathBuf,
        /// Off-diagonal entries at or below this value count as zero.
        #[arg(long, default_value_t = 0.0)]
        threshold: f64,
    },
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(x: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(x)?;
    s.push('\n');
    Ok(s)
}

/// Runs one command, writing human-facing output to `out`. Returns the
/// process exit code for outcomes that are not errors.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Validate { spec, out: path } => cmd_validate(&spec, path.as_deref(), out),
        Command::Analyze { spec, out: path } => cmd_analyze(&spec, path.as_deref(), out),
        Command::Simulate { spec, paths, seed, out: prefix, workers, mode, window, survival_points } => {
            let window = match window.as_deref() {
                None => TailWindow::default(),
                Some([lower, upper]) => TailWindow::Quantiles { lower: *lower, upper: *upper },
                Some(_) => return Err(Error::Parse("--window takes two quantiles".into())),
            };
            let opts = SimulateOptions { paths, seed, workers, mode: mode.into(), window, survival_points };
            cmd_simulate(&spec, &prefix, &opts, out)
        }
        Command::RothblumFuzz { instances, seed, max_size, out: path, workers, tol_rank } => {
            let mut cfg = FuzzConfig { max_size, ..FuzzConfig::default() };
            if let Some(t) = tol_rank {
                cfg.tolerances.rank = t;
            }
            cmd_rothblum_fuzz(instances, seed, &cfg, workers, &path, out)
        }
        Command::Classes { matrix, threshold } => cmd_classes(&matrix, threshold, out),
    }
}

pub fn cmd_validate(spec_path: &Path, report_path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let spec = SpecFile::read(spec_path)?;
    let report = match &spec.model {
        ModelSpec::Continuous(m) => m.validate(),
        ModelSpec::Discrete(m) => m.validate(),
        ModelSpec::ExplicitPencil(e) => {
            let p = e.pencil()?;
            let a = p.evaluate_real(e.root)?;
            if !spectral::is_metzler(&a) {
                return Err(Error::ConditionViolated(format!("A({}) is not Metzler", e.root)));
            }
            writeln!(out, "explicit pencil of size {}: Metzler at {}", p.size(), e.root)?;
            return Ok(0);
        }
    };
    for c in &report.clauses {
        let mark = if c.passed { "pass" } else { "FAIL" };
        match &c.detail {
            Some(d) => writeln!(out, "{mark} {}: {} ({d})", c.id, c.description)?,
            None => writeln!(out, "{mark} {}: {}", c.id, c.description)?,
        }
    }
    let code = if report.valid { 0 } else { 1 };
    if let Some(p) = report_path {
        ReportFile::new(spec.digest()?, vec![], ReportBody::Validation(report)).write(p)?;
    }
    Ok(code)
}

pub fn analyze_spec(spec: &SpecFile) -> Result<ReportBody> {
    Ok(match &spec.model {
        ModelSpec::Continuous(m) => ReportBody::Tail(m.analyze()?),
        ModelSpec::Discrete(m) => ReportBody::Tail(m.analyze()?),
        ModelSpec::ExplicitPencil(e) => {
            ReportBody::Pole(pole_order(&e.pencil()?, e.root, e.weights()?, &PoleOptions::default())?)
        }
    })
}

pub fn cmd_analyze(spec_path: &Path, report_path: Option<&Path>, out: &mut dyn Write) -> Result<i32> {
    let spec = SpecFile::read(spec_path)?;
    let body = analyze_spec(&spec)?;
    let code = match &body {
        ReportBody::Pole(p) if p.verdict != Verdict::Certified => 1,
        _ => 0,
    };
    let file = ReportFile::new(spec.digest()?, vec![], body);
    match report_path {
        Some(p) => {
            file.write(p)?;
            writeln!(out, "{}", summary_line(&file.report))?;
        }
        None => emit(out, None, &file.to_json()?)?,
    }
    Ok(code)
}

fn summary_line(body: &ReportBody) -> String {
    let opt = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v}"));
    let optd = |x: Option<usize>| x.map_or("none".to_string(), |v| v.to_string());
    match body {
        ReportBody::Tail(r) => format!(
            "alpha={} d_alpha={} beta={} d_beta={}",
            opt(r.upper.alpha),
            optd(r.upper.d_alpha),
            opt(r.lower.beta),
            optd(r.lower.d_beta)
        ),
        ReportBody::Pole(p) => format!("root={} d={} verdict={:?}", p.root, p.d, p.verdict),
        ReportBody::Validation(v) => format!("valid={}", v.valid),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimulateOptions {
    pub paths: u64,
    pub seed: u64,
    pub workers: usize,
    pub mode: DiscreteMode,
    pub window: TailWindow,
    pub survival_points: usize,
}

/// What `simulate` writes next to the sample file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub n_paths: u64,
    pub seed: u64,
    pub model_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reset_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_fit: Option<TailFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_fit_error: Option<String>,
    pub analytic: TailReport,
    pub laplace: Vec<IdentityCheck>,
}

/// Points at which the empirical transform is compared with the pencil.
fn comparison_points(r: &TailReport) -> Vec<f64> {
    let mut s = Vec::new();
    if let Some(a) = r.upper.alpha {
        s.extend([0.25 * a, 0.5 * a]);
    }
    if let Some(b) = r.lower.beta {
        s.push(-0.5 * b);
    }
    s
}

pub fn simulate_spec(spec: &SpecFile, opts: &SimulateOptions) -> Result<(SampleSet, SimulationSummary)> {
    let digest = spec.digest()?;
    let (samples, analytic, laplace) = match &spec.model {
        ModelSpec::Continuous(m) => {
            let analytic = m.analyze()?;
            let samples = simulate_continuous(m, opts.paths, opts.seed, opts.workers, &digest)?;
            let pencil = m.pencil()?;
            let guard = LaplaceGuard::new(analytic.upper.alpha, analytic.lower.beta);
            let checks = comparison_points(&analytic)
                .into_iter()
                .map(|s| {
                    let pred = transform_value(&pencil, Complex64::new(s, 0.0), &m.initial_law, &m.lambda)?.re;
                    continuous_identity_check(&samples.values, s, pred, guard)
                })
                .collect::<Result<Vec<_>>>()?;
            (samples, analytic, checks)
        }
        ModelSpec::Discrete(m) => {
            let analytic = m.analyze()?;
            let samples = simulate_discrete(m, opts.paths, opts.seed, opts.workers, opts.mode, &digest)?;
            let pencil = m.pencil()?;
            let ones = vec![1.0; m.size()];
            let guard = LaplaceGuard::new(analytic.upper.alpha, analytic.lower.beta);
            let checks = comparison_points(&analytic)
                .into_iter()
                .map(|s| {
                    let g = transform_value(&pencil, Complex64::new(s, 0.0), &m.initial_law, &ones)?.re;
                    discrete_identity_check(&samples, s, g, guard)
                })
                .collect::<Result<Vec<_>>>()?;
            (samples, analytic, checks)
        }
        ModelSpec::ExplicitPencil(_) => {
            return Err(Error::SamplerRole("an explicit pencil has no process to simulate"));
        }
    };
    let (tail_fit, tail_fit_error) = match fit_tail(&samples.values, opts.window) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let summary = SimulationSummary {
        n_paths: samples.n_paths,
        seed: samples.seed,
        model_digest: digest,
        reset_fraction: samples.reset_fraction(),
        tail_fit,
        tail_fit_error,
        analytic,
        laplace,
    };
    Ok((samples, summary))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<prefix>.bin`, `<prefix>.meta.json`, `<prefix>.survival.csv`
/// and `<prefix>.summary.json`.
pub fn cmd_simulate(spec_path: &Path, prefix: &Path, opts: &SimulateOptions, out: &mut dyn Write) -> Result<i32> {
    let spec = SpecFile::read(spec_path)?;
    let (samples, summary) = simulate_spec(&spec, opts)?;
    write_sample_file(&with_suffix(prefix, ".bin"), &samples.values)?;
    write_sidecar(&with_suffix(prefix, ".meta.json"), &samples)?;
    write_survival_csv(&with_suffix(prefix, ".survival.csv"), &survival_curve(&samples.values, opts.survival_points))?;
    std::fs::write(with_suffix(prefix, ".summary.json"), to_json(&summary)?)?;
    match &summary.tail_fit {
        Some(f) => writeln!(
            out,
            "tail fit: alpha_hat={:.6} d_hat={} log_w_coefficient={:.4} window=[{}, {}]",
            f.alpha_hat, f.d_hat, f.log_w_coefficient, f.window[0], f.window[1]
        )?,
        None => writeln!(out, "tail fit: {}", summary.tail_fit_error.as_deref().unwrap_or("unavailable"))?,
    }
    writeln!(out, "{:>12} {:>16} {:>16} {:>12} {:>8}", "s", "empirical", "predicted", "stderr", "z")?;
    for c in &summary.laplace {
        writeln!(
            out,
            "{:>12.6} {:>16.10} {:>16.10} {:>12.3e} {:>8.3}",
            c.s,
            c.empirical,
            c.predicted,
            c.stderr,
            c.z_score()
        )?;
    }
    Ok(0)
}

pub fn cmd_rothblum_fuzz(
    instances: usize,
    seed: u64,
    cfg: &FuzzConfig,
    workers: usize,
    csv: &Path,
    out: &mut dyn Write,
) -> Result<i32> {
    if instances == 0 {
        return Err(Error::Parse("--instances must be at least 1".into()));
    }
    let records: Vec<FuzzRecord> = run_fuzz(instances, seed, cfg, workers)?;
    write_fuzz_csv(csv, &records)?;
    let failed: Vec<&FuzzRecord> = records.iter().filter(|r| !r.agree).collect();
    for r in &failed {
        let dump = with_suffix(csv, &format!(".instance-{}.txt", r.instance));
        let inst = generate_instance(r.seed, cfg);
        let mut text = format!(
            "# instance {} seed {} index {} chain_length {}\n",
            r.instance, r.seed, r.index, r.chain_length
        );
        if let Some(e) = &r.error {
            text.push_str(&format!("# error: {e}\n"));
        }
        text.push_str(&format_matrix(&inst.matrix));
        std::fs::write(&dump, text)?;
        writeln!(out, "disagreement in instance {} (seed {}), written to {}", r.instance, r.seed, dump.display())?;
    }
    writeln!(out, "{} of {} instances agree", records.len() - failed.len(), records.len())?;
    Ok(if failed.is_empty() { 0 } else { 1 })
}

/// Class structure of a constant matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub summary: ClassSummary,
    pub spectral_abscissa: f64,
    pub longest_chain_length: usize,
    /// 1-based vertex order that makes the matrix block upper triangular.
    pub block_permutation: Vec<usize>,
    pub block_triangular: bool,
}

pub fn class_report(a: &nalgebra::DMatrix<f64>, threshold: f64) -> Result<ClassReport> {
    let p = ClassPartition::of(&Digraph::from_matrix(a, threshold)?);
    let blocks = spectral::block_abscissae(a, &p)?;
    let zeta = blocks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = Tolerances::default().basic * zeta.abs().max(1.0);
    let basic: Vec<bool> = blocks.iter().map(|z| (z - zeta).abs() <= tol).collect();
    let chain = p.longest_chain_length(&ChainQuery::new(basic.clone()))?;
    let perm = p.block_permutation();
    Ok(ClassReport {
        block_triangular: is_block_upper_triangular(a, &p, &perm),
        summary: ClassSummary::new(&p, blocks, basic),
        spectral_abscissa: zeta,
        longest_chain_length: chain,
        block_permutation: perm.iter().map(|v| v + 1).collect(),
    })
}

pub fn cmd_classes(path: &Path, threshold: f64, out: &mut dyn Write) -> Result<i32> {
    let a = read_matrix(path)?;
    emit(out, None, &to_json(&class_report(&a, threshold)?)?)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example_matrix;

    #[test]
    fn class_report_of_the_example() {
        let r = class_report(&example_matrix(), 0.0).unwrap();
        assert_eq!(r.longest_chain_length, 2);
        assert!(r.block_triangular);
        assert_eq!(r.summary.classes[0], vec![1, 4]);
        assert!((r.spectral_abscissa - 3.0).abs() < 1e-9);
    }

    #[test]
    fn suffixes_append() {
        assert_eq!(with_suffix(Path::new("a/b"), ".bin"), PathBuf::from("a/b.bin"));
    }
}
