//! Seeded experiment runners: numerical stability on noise-free data and
//! RANSAC-wrapped noise sweeps.
//!
//! Trial `k` of a run with seed `s` draws everything from ChaCha8 stream `k`
//! of seed `s`, so the same trial index sees the same rig motion in every
//! configuration (paired seeds).

use super::metrics::{
    self, chordal_error, rotation_error, translation_direction_error, translation_error,
};
use super::ransac::{ransac, MinimalSampler, RansacConfig};
use super::synthetic::{random_pose, synth_scene_with_pose, Motion, Pairing, SyntheticConfig};
use crate::geometry::RelativePose;
use crate::solver::{Candidate, SolverConfig, SolverKind};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

/// Environment variable capping the worker threads of the runners.
pub const THREADS_ENV: &str = "GCAM_POSE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Errors of one trial. Failed trials carry NaN errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub solver: String,
    pub sigma: f64,
    pub eps_r_deg: f64,
    pub eps_t: f64,
    pub eps_t_dir_deg: f64,
    pub eps_r_chordal: f64,
    pub runtime_us: f64,
    pub solved: bool,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    trial: usize,
    solver: &'a str,
    #[serde(rename = "eps_R_deg")]
    eps_r_deg: f64,
    eps_t: f64,
    eps_t_dir_deg: f64,
    #[serde(rename = "eps_R_chordal")]
    eps_r_chordal: f64,
    runtime_us: f64,
}

/// Histogram of `log10` values on fixed bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub bin_width: f64,
    pub counts: Vec<usize>,
    pub underflow: usize,
    pub overflow: usize,
}

impl Histogram {
    pub const LO: f64 = -18.0;
    pub const HI: f64 = 2.0;
    pub const WIDTH: f64 = 0.25;

    /// `log10` histogram of the positive finite values; exact zeros count
    /// as underflow.
    pub fn of_log10(values: impl IntoIterator<Item = f64>) -> Self {
        let nbins = ((Self::HI - Self::LO) / Self::WIDTH).round() as usize;
        let mut h = Histogram {
            lo: Self::LO,
            bin_width: Self::WIDTH,
            counts: vec![0; nbins],
            underflow: 0,
            overflow: 0,
        };
        for v in values.into_iter().filter(|v| v.is_finite() && *v >= 0.0) {
            if v == 0.0 {
                h.underflow += 1;
                continue;
            }
            let b = ((v.log10() - h.lo) / h.bin_width).floor();
            if b < 0.0 {
                h.underflow += 1;
            } else if b as usize >= nbins {
                h.overflow += 1;
            } else {
                h.counts[b as usize] += 1;
            }
        }
        h
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.underflow + self.overflow
    }

    /// Center (in `log10` units) of the fullest bin; the lowest such bin on
    /// ties. `None` when every value fell outside the bins.
    pub fn mode(&self) -> Option<f64> {
        let (mut best, mut count) = (None, 0);
        for (k, &c) in self.counts.iter().enumerate() {
            if c > count {
                best = Some(k);
                count = c;
            }
        }
        best.map(|k| self.lo + (k as f64 + 0.5) * self.bin_width)
    }
}

/// Medians and histograms of one (solver, sigma) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub solver: String,
    pub sigma: f64,
    pub trials: usize,
    pub failures: usize,
    pub median_eps_r_deg: f64,
    pub median_eps_t: f64,
    pub median_eps_t_dir_deg: f64,
    pub median_eps_r_chordal: f64,
    pub mean_runtime_us: f64,
    pub hist_log10_eps_r_chordal: Histogram,
    pub hist_log10_eps_t: Histogram,
}

impl Summary {
    pub fn of(solver: &str, sigma: f64, records: &[&TrialRecord]) -> Self {
        let col =
            |f: fn(&TrialRecord) -> f64| -> Vec<f64> { records.iter().map(|r| f(r)).collect() };
        let runtimes = col(|r| r.runtime_us);
        let mean_runtime_us = if runtimes.is_empty() {
            f64::NAN
        } else {
            runtimes.iter().sum::<f64>() / runtimes.len() as f64
        };
        Summary {
            solver: solver.to_string(),
            sigma,
            trials: records.len(),
            failures: records.iter().filter(|r| !r.solved).count(),
            median_eps_r_deg: metrics::median(&col(|r| r.eps_r_deg)),
            median_eps_t: metrics::median(&col(|r| r.eps_t)),
            median_eps_t_dir_deg: metrics::median(&col(|r| r.eps_t_dir_deg)),
            median_eps_r_chordal: metrics::median(&col(|r| r.eps_r_chordal)),
            mean_runtime_us,
            hist_log10_eps_r_chordal: Histogram::of_log10(col(|r| r.eps_r_chordal)),
            hist_log10_eps_t: Histogram::of_log10(col(|r| r.eps_t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<Summary>,
}

impl ExperimentReport {
    fn build(
        experiment: &str,
        seed: u64,
        config: serde_json::Value,
        records: Vec<TrialRecord>,
    ) -> Self {
        let mut groups: Vec<(String, f64)> = Vec::new();
        for r in &records {
            if !groups
                .iter()
                .any(|(s, g)| *s == r.solver && g.to_bits() == r.sigma.to_bits())
            {
                groups.push((r.solver.clone(), r.sigma));
            }
        }
        let summaries = groups
            .iter()
            .map(|(s, g)| {
                let rs: Vec<&TrialRecord> = records
                    .iter()
                    .filter(|r| r.solver == *s && r.sigma.to_bits() == g.to_bits())
                    .collect();
                Summary::of(s, *g, &rs)
            })
            .collect();
        Self {
            experiment: experiment.to_string(),
            seed,
            config,
            records,
            summaries,
        }
    }

    pub fn summary(&self, solver: &str, sigma: f64) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.solver == solver && s.sigma.to_bits() == sigma.to_bits())
    }

    /// One CSV row per trial per solver. Sweeps with several noise levels
    /// label the solver column `name@sigma`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), ReportError> {
        let mut sigmas: Vec<u64> = self.records.iter().map(|r| r.sigma.to_bits()).collect();
        sigmas.sort_unstable();
        sigmas.dedup();
        let tag = sigmas.len() > 1;
        let mut out = csv::Writer::from_writer(w);
        if self.records.is_empty() {
            out.write_record([
                "trial",
                "solver",
                "eps_R_deg",
                "eps_t",
                "eps_t_dir_deg",
                "eps_R_chordal",
                "runtime_us",
            ])?;
        }
        for r in &self.records {
            let label = if tag {
                format!("{}@{}", r.solver, r.sigma)
            } else {
                r.solver.clone()
            };
            out.serialize(CsvRow {
                trial: r.trial,
                solver: &label,
                eps_r_deg: r.eps_r_deg,
                eps_t: r.eps_t,
                eps_t_dir_deg: r.eps_t_dir_deg,
                eps_r_chordal: r.eps_r_chordal,
                runtime_us: r.runtime_us,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Pairing of the synthetic correspondences a solver consumes.
pub fn pairing_for(kind: SolverKind) -> Pairing {
    match kind {
        SolverKind::Mono2Ac => Pairing::Mono,
        SolverKind::Intra2Ac | SolverKind::SixPtIntra => Pairing::Intra,
        _ => Pairing::Inter,
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Run `f` over `0..n` on a pool of at most `GCAM_POSE_THREADS` workers,
/// keeping the output order.
pub fn par_trials<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0);
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    match b.build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        Err(_) => (0..n).map(f).collect(),
    }
}

/// Errors of the candidate nearest to the ground truth (by chordal
/// distance). Candidates without a metric scale are compared by direction.
pub fn candidate_errors(gt: &RelativePose, cands: &[Candidate]) -> Option<(f64, f64, f64, f64)> {
    cands
        .iter()
        .map(|c| pose_errors(gt, &c.pose, c.scale_valid))
        .min_by(|a, b| a.3.total_cmp(&b.3).then(a.1.total_cmp(&b.1)))
}

fn pose_errors(gt: &RelativePose, est: &RelativePose, scale_valid: bool) -> (f64, f64, f64, f64) {
    let (tg, te) = if scale_valid {
        (gt.translation, est.translation)
    } else {
        let n = |v: nalgebra::Vector3<f64>| if v.norm() > 0.0 { v.normalize() } else { v };
        (n(gt.translation), n(est.translation))
    };
    (
        rotation_error(&gt.rotation, &est.rotation),
        translation_error(&tg, &te),
        translation_direction_error(&gt.translation, &est.translation).unwrap_or(f64::NAN),
        chordal_error(&gt.rotation, &est.rotation),
    )
}

fn record(
    trial: usize,
    solver: &str,
    sigma: f64,
    errs: Option<(f64, f64, f64, f64)>,
    runtime_us: f64,
) -> TrialRecord {
    let (eps_r_deg, eps_t, eps_t_dir_deg, eps_r_chordal) =
        errs.unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN));
    TrialRecord {
        trial,
        solver: solver.to_string(),
        sigma,
        eps_r_deg,
        eps_t,
        eps_t_dir_deg,
        eps_r_chordal,
        runtime_us,
        solved: errs.is_some(),
    }
}

/// One configuration of the stability experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVariant {
    pub label: String,
    pub solver: SolverKind,
    /// Frame normalization of intra-camera systems.
    pub normalize: bool,
}

impl StabilityVariant {
    pub fn new(solver: SolverKind) -> Self {
        Self {
            label: solver.name().to_string(),
            solver,
            normalize: true,
        }
    }

    pub fn unnormalized(solver: SolverKind) -> Self {
        Self {
            label: format!("{}-unnormalized", solver.name()),
            solver,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub variants: Vec<StabilityVariant>,
    pub trials: usize,
    pub seed: u64,
    pub motion: Motion,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            variants: Vec::new(),
            trials: 10_000,
            seed: 0,
            motion: Motion::Random,
        }
    }
}

/// Noise-free trials: one random minimal sample per trial, error of the
/// candidate closest to the ground truth, and the solver runtime.
pub fn run_stability(cfg: &StabilityConfig) -> ExperimentReport {
    let mut records = Vec::new();
    for v in &cfg.variants {
        let scfg = SyntheticConfig {
            pairing: pairing_for(v.solver),
            motion: cfg.motion,
            ..Default::default()
        };
        let solver_cfg = SolverConfig {
            normalize_intra: v.normalize,
            ..Default::default()
        };
        let trial = |k: usize| {
            let mut rng = trial_rng(cfg.seed, k);
            let pose = random_pose(&scfg, &mut rng);
            let scene = synth_scene_with_pose(&scfg, &pose, &mut rng).ok()?;
            let pcs = scene.points();
            let idx = MinimalSampler::new(v.solver, &pcs).ok()?.draw(&mut rng);
            let acs: Vec<_> = idx.iter().map(|&i| scene.acs[i]).collect();
            let pts: Vec<_> = idx.iter().map(|&i| pcs[i]).collect();
            let t0 = Instant::now();
            let res = v.solver.solve(&scene.rig, &acs, &pts, &solver_cfg);
            let us = t0.elapsed().as_secs_f64() * 1e6;
            Some((
                res.ok()
                    .and_then(|set| candidate_errors(&scene.pose, &set.candidates)),
                us,
            ))
        };
        // the first solve of a configuration builds its template; keep that
        // out of the timings
        if cfg.trials > 0 {
            trial(0);
        }
        records.extend(par_trials(cfg.trials, |k| match trial(k) {
            Some((errs, us)) => record(k, &v.label, 0.0, errs, us),
            None => record(k, &v.label, 0.0, None, f64::NAN),
        }));
    }
    let config = serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null);
    ExperimentReport::build("stability", cfg.seed, config, records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweepConfig {
    pub solvers: Vec<SolverKind>,
    pub sigmas: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub motion: Motion,
    /// Side of the square measuring the affine maps (px).
    pub side: f64,
    pub outlier_ratio: f64,
    pub ransac: RansacConfig,
}

impl Default for NoiseSweepConfig {
    fn default() -> Self {
        Self {
            solvers: Vec::new(),
            sigmas: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            trials: 1000,
            seed: 0,
            motion: Motion::Random,
            side: 40.0,
            outlier_ratio: 0.0,
            ransac: RansacConfig::default(),
        }
    }
}

/// RANSAC-wrapped trials per noise level and solver; errors of the pose
/// with the most inliers.
pub fn run_noise_sweep(cfg: &NoiseSweepConfig) -> ExperimentReport {
    let mut records = Vec::new();
    for &sigma in &cfg.sigmas {
        for &kind in &cfg.solvers {
            let scfg = SyntheticConfig {
                pairing: pairing_for(kind),
                motion: cfg.motion,
                sigma,
                side: cfg.side,
                outlier_ratio: cfg.outlier_ratio,
                ..Default::default()
            };
            let solver_cfg = SolverConfig::noisy();
            records.extend(par_trials(cfg.trials, |k| {
                let mut rng = trial_rng(cfg.seed, k);
                let pose = random_pose(&scfg, &mut rng);
                let Ok(scene) = synth_scene_with_pose(&scfg, &pose, &mut rng) else {
                    return record(k, kind.name(), sigma, None, f64::NAN);
                };
                let rcfg = RansacConfig {
                    seed: rng.next_u64(),
                    ..cfg.ransac
                };
                let t0 = Instant::now();
                let res = ransac(kind, &scene.rig, &scene.acs, &solver_cfg, &rcfg);
                let us = t0.elapsed().as_secs_f64() * 1e6;
                let errs = res
                    .ok()
                    .map(|r| pose_errors(&scene.pose, &r.best.pose, r.best.scale_valid));
                record(k, kind.name(), sigma, errs, us)
            }));
        }
    }
    let config = serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null);
    ExperimentReport::build("noise_sweep", cfg.seed, config, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_mode_and_bins() {
        let h = Histogram::of_log10([1e-10, 2e-10, 3e-10, 1e-3, 0.0, f64::NAN, 1e5]);
        assert_eq!(h.total(), 6);
        assert_eq!(h.underflow, 1);
        assert_eq!(h.overflow, 1);
        let m = h.mode().unwrap();
        assert!((-10.0..-9.5).contains(&m), "{m}");
        assert_eq!(Histogram::of_log10([]).mode(), None);
    }

    #[test]
    fn empty_run_gives_empty_report() {
        let r = run_stability(&StabilityConfig {
            variants: vec![StabilityVariant::new(SolverKind::Inter56)],
            trials: 0,
            ..Default::default()
        });
        assert!(r.records.is_empty());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().trim(),
            "trial,solver,eps_R_deg,eps_t,eps_t_dir_deg,eps_R_chordal,runtime_us"
        );
    }

    #[test]
    fn medians_match_records() {
        let r = run_stability(&StabilityConfig {
            variants: vec![StabilityVariant::new(SolverKind::Mono2Ac)],
            trials: 5,
            seed: 3,
            ..Default::default()
        });
        let s = r.summary("2ac-mono", 0.0).unwrap();
        let v: Vec<f64> = r.records.iter().map(|x| x.eps_r_chordal).collect();
        assert_eq!(
            s.median_eps_r_chordal.to_bits(),
            metrics::median(&v).to_bits()
        );
        assert_eq!(s.trials, 5);
    }
}
