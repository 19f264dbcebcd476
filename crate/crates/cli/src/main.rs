use clap::{Parser, Subcommand, ValueEnum};
use gcam_pose::constraints::Variant;
use gcam_pose::dataset::{CorrespondenceFile, DatasetError};
use gcam_pose::finite_field::{verify_config, TheoremReport};
use gcam_pose::geometry::RelativePose;
use gcam_pose::pipeline::experiment::{
    run_noise_sweep, run_stability, ExperimentReport, NoiseSweepConfig, StabilityConfig,
    StabilityVariant,
};
use gcam_pose::pipeline::metrics::PoseErrors;
use gcam_pose::pipeline::ransac::{
    ransac_on, MinimalSampler, RansacConfig, RansacError, INLIER_METRIC,
};
use gcam_pose::pipeline::synthetic::{synth_scene, Motion, Pairing, SyntheticConfig};
use gcam_pose::polynomial::PrimeField;
use gcam_pose::solver::{Candidate, SolverConfig, SolverError, SolverKind};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gcam-pose",
    version,
    about = "Relative pose of cameras and camera rigs from affine and point correspondences"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic correspondence file with ground truth.
    Synth(SynthArgs),
    /// Run a minimal solver on selected correspondences.
    Solve(SolveArgs),
    /// Robust estimate over all correspondences of a file.
    Ransac(RansacArgs),
    /// Exact theorem checks and solution counts over a prime field.
    VerifyZp(VerifyArgs),
    /// Mean solver runtime on noise-free minimal samples.
    Bench(StabilityArgs),
    /// Numerical stability on noise-free data (log10 error histograms).
    Stability(StabilityArgs),
    /// RANSAC-wrapped errors against pixel noise.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PairingArg {
    Mono,
    Inter,
    Intra,
}

#[derive(Clone, Copy, ValueEnum)]
enum MotionArg {
    Forward,
    Sideways,
    Random,
}

impl From<PairingArg> for Pairing {
    fn from(p: PairingArg) -> Self {
        match p {
            PairingArg::Mono => Pairing::Mono,
            PairingArg::Inter => Pairing::Inter,
            PairingArg::Intra => Pairing::Intra,
        }
    }
}

impl From<MotionArg> for Motion {
    fn from(m: MotionArg) -> Self {
        match m {
            MotionArg::Forward => Motion::Forward,
            MotionArg::Sideways => Motion::Sideways,
            MotionArg::Random => Motion::Random,
        }
    }
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Camera pairs of the correspondences.
    #[arg(long, value_enum, default_value = "inter")]
    mode: PairingArg,
    #[arg(long, value_enum, default_value = "random")]
    motion: MotionArg,
    /// Pixel noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Side of the square used to measure affine maps (px).
    #[arg(long, default_value_t = 40.0)]
    side: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    acs: usize,
    #[arg(long, default_value_t = 0.0)]
    outlier_ratio: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    solver: SolverKind,
    /// Comma-separated correspondence indices; a seeded minimal sample when omitted.
    #[arg(long, value_delimiter = ',')]
    indices: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep roots regardless of their polynomial residual (noisy input).
    #[arg(long)]
    noisy: bool,
}

#[derive(clap::Args)]
struct RansacArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    solver: SolverKind,
    #[arg(long, default_value_t = 0.99)]
    confidence: f64,
    #[arg(long, default_value_t = 0.1)]
    threshold_deg: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5000)]
    max_iterations: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    E1,
    E1e2,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// mono, case1..case9, inter, intra, 6pt-inter, 6pt-intra or all.
    #[arg(long, default_value = "all")]
    config: String,
    #[arg(long, default_value_t = gcam_pose::finite_field::DEFAULT_PRIME)]
    prime: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Equation set used for solution counting.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Skip the Groebner-basis solution count.
    #[arg(long)]
    no_count: bool,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum NormalizationArg {
    On,
    Off,
    Both,
}

#[derive(clap::Args)]
struct StabilityArgs {
    /// Comma-separated solver names.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "2ac-mono,2ac-inter-56,2ac-inter-48,2ac-intra,6pt-inter-56,6pt-inter-48,6pt-intra"
    )]
    solvers: Vec<SolverKind>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    motion: MotionArg,
    /// Frame normalization of intra-camera systems.
    #[arg(long, value_enum, default_value = "on")]
    normalization: NormalizationArg,
    /// Writes PREFIX.csv (per-trial rows) and PREFIX.json (config, seed, summaries).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "2ac-inter-56,2ac-intra")]
    solvers: Vec<SolverKind>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2")]
    sigmas: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    motion: MotionArg,
    #[arg(long, default_value_t = 40.0)]
    side: f64,
    #[arg(long, default_value_t = 0.0)]
    outlier_ratio: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Solver(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Solver(m) | Failure::Io(m) => m,
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::NotAffine(_) => Failure::Solver(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Ransac(a) => cmd_ransac(a),
        Cmd::VerifyZp(a) => cmd_verify(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Stability(a) => cmd_stability(a),
        Cmd::Sweep(a) => cmd_sweep(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::Io(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_dataset(path: &Path) -> Result<CorrespondenceFile> {
    let s = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(CorrespondenceFile::parse(&s)?)
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let cfg = SyntheticConfig {
        pairing: a.mode.into(),
        motion: a.motion.into(),
        sigma: a.sigma,
        side: a.side,
        acs: a.acs,
        outlier_ratio: a.outlier_ratio,
        ..Default::default()
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    if cfg.nonstandard_side() {
        eprintln!(
            "warning: side {} px differs from the usual 30 or 40 px",
            cfg.side
        );
    }
    let scene = synth_scene(&cfg, a.seed).map_err(|e| Failure::Solver(e.to_string()))?;
    let json = CorrespondenceFile::from_scene(&scene).to_json();
    match a.out {
        Some(p) => write_file(&p, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct PoseOut {
    #[serde(rename = "R")]
    r: [f64; 9],
    t: [f64; 3],
}

impl PoseOut {
    fn of(p: &RelativePose) -> Self {
        Self {
            r: std::array::from_fn(|k| p.rotation[(k / 3, k % 3)]),
            t: [p.translation.x, p.translation.y, p.translation.z],
        }
    }
}

#[derive(Serialize)]
struct CandidateOut {
    pose: PoseOut,
    cayley: [f64; 3],
    residual: f64,
    score: f64,
    scale_valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    errors: Option<PoseErrors>,
}

impl CandidateOut {
    fn of(c: &Candidate, gt: Option<&RelativePose>) -> Self {
        Self {
            pose: PoseOut::of(&c.pose),
            cayley: [c.cayley.x, c.cayley.y, c.cayley.z],
            residual: c.residual,
            score: c.score,
            scale_valid: c.scale_valid,
            errors: gt.map(|g| PoseErrors::of(g, &c.pose)),
        }
    }
}

#[derive(Serialize)]
struct SolveOut {
    solver: &'static str,
    indices: Vec<usize>,
    status: &'static str,
    candidates: Vec<CandidateOut>,
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let file = read_dataset(&a.input)?;
    let rig = file.rig();
    let pcs = file.points();
    let kind = a.solver;
    let indices = match a.indices {
        Some(ix) => ix,
        None => MinimalSampler::new(kind, &pcs)
            .map_err(|e| Failure::Solver(e.to_string()))?
            .draw_seeded(a.seed),
    };
    if let Some(&bad) = indices.iter().find(|&&i| i >= pcs.len()) {
        return Err(Failure::Usage(format!(
            "index {bad} out of range ({} correspondences)",
            pcs.len()
        )));
    }
    let acs = if kind.uses_affine() {
        let all = file.affine()?;
        indices.iter().map(|&i| all[i]).collect()
    } else {
        Vec::new()
    };
    let sample: Vec<_> = indices.iter().map(|&i| pcs[i]).collect();
    let cfg = if a.noisy {
        SolverConfig::noisy()
    } else {
        SolverConfig::default()
    };
    let gt = file.ground_truth_pose();
    let (status, candidates) = match kind.solve(&rig, &acs, &sample, &cfg) {
        Ok(set) => (
            "ok",
            set.candidates
                .iter()
                .map(|c| CandidateOut::of(c, gt.as_ref()))
                .collect(),
        ),
        Err(SolverError::NoRealRoots) => ("no_real_roots", Vec::new()),
        Err(e) => return Err(Failure::Solver(e.to_string())),
    };
    print_json(&SolveOut {
        solver: kind.name(),
        indices,
        status,
        candidates,
    })
}

#[derive(Serialize)]
struct RansacOut {
    solver: &'static str,
    config: RansacConfig,
    inlier_metric: &'static str,
    pose: PoseOut,
    scale_valid: bool,
    inliers: Vec<bool>,
    inlier_count: usize,
    iterations: u64,
    best_iteration: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    errors: Option<PoseErrors>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inlier_precision: Option<f64>,
}

fn cmd_ransac(a: RansacArgs) -> Result<()> {
    let file = read_dataset(&a.input)?;
    let rig = file.rig();
    let pcs = file.points();
    let acs = if a.solver.uses_affine() {
        file.affine()?
    } else {
        Vec::new()
    };
    let cfg = RansacConfig {
        confidence: a.confidence,
        threshold_deg: a.threshold_deg,
        max_iterations: a.max_iterations,
        seed: a.seed,
    };
    let r = ransac_on(a.solver, &rig, &acs, &pcs, &SolverConfig::noisy(), &cfg).map_err(
        |e| match e {
            RansacError::InvalidConfig(m) => Failure::Usage(m),
            e => Failure::Solver(e.to_string()),
        },
    )?;
    let gt = file.ground_truth_pose();
    let inlier_precision = file.ground_truth.as_ref().map(|g| {
        let good = r
            .inliers
            .iter()
            .enumerate()
            .filter(|(k, &b)| b && !g.outliers.contains(k))
            .count();
        good as f64 / r.inlier_count.max(1) as f64
    });
    print_json(&RansacOut {
        solver: a.solver.name(),
        config: cfg,
        inlier_metric: INLIER_METRIC,
        pose: PoseOut::of(&r.best.pose),
        scale_valid: r.best.scale_valid,
        errors: gt.map(|g| PoseErrors::of(&g, &r.best.pose)),
        inlier_precision,
        inliers: r.inliers,
        inlier_count: r.inlier_count,
        iterations: r.iterations,
        best_iteration: r.best_iteration,
    })
}

const ALL_CONFIGS: [&str; 10] = [
    "mono",
    "case1",
    "case2",
    "case3",
    "case4",
    "case5",
    "inter",
    "intra",
    "6pt-inter",
    "6pt-intra",
];

#[derive(Serialize)]
struct VerifyOut {
    p: u64,
    seed: u64,
    failures: usize,
    reports: Vec<TheoremReport>,
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let field = PrimeField::new(a.prime).map_err(|e| Failure::Usage(e.to_string()))?;
    let configs: Vec<&str> = if a.config == "all" {
        ALL_CONFIGS.to_vec()
    } else {
        vec![a.config.as_str()]
    };
    let variant = a.variant.map(|v| match v {
        VariantArg::E1 => Variant::E1,
        VariantArg::E1e2 => Variant::E1E2,
    });
    let mut reports = Vec::new();
    for c in configs {
        let r = verify_config(c, field, a.trials, a.seed, variant, !a.no_count).map_err(
            |e| match e {
                gcam_pose::finite_field::FpError::UnknownConfig(_) => Failure::Usage(e.to_string()),
                e => Failure::Solver(e.to_string()),
            },
        )?;
        reports.push(r);
    }
    let out = VerifyOut {
        p: field.modulus(),
        seed: a.seed,
        failures: reports.iter().map(|r| r.failures).sum(),
        reports,
    };
    print_json(&out)?;
    if out.failures > 0 {
        return Err(Failure::Solver(format!(
            "{} theorem checks failed",
            out.failures
        )));
    }
    Ok(())
}

fn stability_report(a: &StabilityArgs) -> ExperimentReport {
    let mut variants = Vec::new();
    for &k in &a.solvers {
        if matches!(
            a.normalization,
            NormalizationArg::On | NormalizationArg::Both
        ) {
            variants.push(StabilityVariant::new(k));
        }
        if matches!(
            a.normalization,
            NormalizationArg::Off | NormalizationArg::Both
        ) {
            variants.push(StabilityVariant::unnormalized(k));
        }
    }
    run_stability(&StabilityConfig {
        variants,
        trials: a.trials,
        seed: a.seed,
        motion: a.motion.into(),
    })
}

#[derive(Serialize)]
struct Sidecar<'a> {
    experiment: &'a str,
    seed: u64,
    config: &'a serde_json::Value,
    summaries: &'a [gcam_pose::pipeline::experiment::Summary],
}

fn sidecar(r: &ExperimentReport) -> Sidecar<'_> {
    Sidecar {
        experiment: &r.experiment,
        seed: r.seed,
        config: &r.config,
        summaries: &r.summaries,
    }
}

fn write_report(r: &ExperimentReport, prefix: &Path) -> Result<()> {
    let csv_path = prefix.with_extension("csv");
    let file = std::fs::File::create(&csv_path)
        .map_err(|e| Failure::Io(format!("{}: {e}", csv_path.display())))?;
    r.write_csv(file).map_err(|e| Failure::Io(e.to_string()))?;
    let json = serde_json::to_string_pretty(&sidecar(r)).map_err(|e| Failure::Io(e.to_string()))?;
    write_file(&prefix.with_extension("json"), &(json + "\n"))
}

fn cmd_stability(a: StabilityArgs) -> Result<()> {
    let r = stability_report(&a);
    if let Some(p) = &a.out {
        write_report(&r, p)?;
    }
    print_json(&sidecar(&r))
}

#[derive(Serialize)]
struct BenchRow<'a> {
    solver: &'a str,
    trials: usize,
    failures: usize,
    mean_runtime_us: f64,
}

fn cmd_bench(a: StabilityArgs) -> Result<()> {
    let r = stability_report(&a);
    if let Some(p) = &a.out {
        write_report(&r, p)?;
    }
    let rows: Vec<BenchRow> = r
        .summaries
        .iter()
        .map(|s| BenchRow {
            solver: &s.solver,
            trials: s.trials,
            failures: s.failures,
            mean_runtime_us: s.mean_runtime_us,
        })
        .collect();
    print_json(&rows)
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    if a.sigmas.iter().any(|s| !(*s >= 0.0)) {
        return Err(Failure::Usage("noise levels must be non-negative".into()));
    }
    if !(a.side > 0.0) || !(0.0..1.0).contains(&a.outlier_ratio) {
        return Err(Failure::Usage(
            "side must be positive and outlier ratio in [0, 1)".into(),
        ));
    }
    if a.side != 30.0 && a.side != 40.0 {
        eprintln!(
            "warning: side {} px differs from the usual 30 or 40 px",
            a.side
        );
    }
    let r = run_noise_sweep(&NoiseSweepConfig {
        solvers: a.solvers,
        sigmas: a.sigmas,
        trials: a.trials,
        seed: a.seed,
        motion: a.motion.into(),
        side: a.side,
        outlier_ratio: a.outlier_ratio,
        ..Default::default()
    });
    if let Some(p) = &a.out {
        write_report(&r, p)?;
    }
    print_json(&sidecar(&r))
}
