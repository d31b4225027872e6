//! The five pipelines behind the subcommands. Each writes its artifacts into
//! the output directory and returns a short human-readable summary.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use log::info;
use serde::Serialize;

use frontlab_core::drift::{blocking_criterion, CriterionReport, DriftTerm, Verdict};
use frontlab_core::nonlinearity::{BlockingConstants, Nonlinearity};
use frontlab_core::parallel::map_parallel;
use frontlab_core::simulator::{barrier_excess, run, write_field_csv, Classification, RunReport};
use frontlab_core::supersolution::{
    continue_to_minus_infinity, verify_supersolution, LadderStep, StationarySupersolution, VerificationReport,
};
use frontlab_core::wave::{solve_wave, DecayConstants, EnvelopeConstants, WaveProfile};

use crate::config::ExperimentConfig;

/// A numerical failure inside a named stage.
#[derive(Debug, thiserror::Error)]
#[error("stage `{stage}` failed: {message}")]
pub struct StageError {
    pub stage: &'static str,
    pub message: String,
}

fn stage<T, E: std::fmt::Display>(name: &'static str, r: Result<T, E>) -> Result<T, StageError> {
    r.map_err(|e| StageError {
        stage: name,
        message: e.to_string(),
    })
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> anyhow::Result<()> {
    let mut out = create(path)?;
    f(&mut out).with_context(|| format!("cannot write {}", path.display()))?;
    out.flush()?;
    Ok(())
}

/// Objects shared by every pipeline.
struct Setup {
    nl: Nonlinearity,
    drift: DriftTerm,
    constants: BlockingConstants,
    criterion: CriterionReport,
}

fn setup(cfg: &ExperimentConfig) -> anyhow::Result<Setup> {
    let nl = cfg.nonlinearity.build()?;
    let drift = cfg.drift.build()?;
    let constants = stage("constants", BlockingConstants::compute(&nl))?;
    let criterion = blocking_criterion(&constants, &drift, cfg.criterion.trace_constant);
    info!("criterion: rhs = {:.6e}, C(f) = {:.6e}, {:?}", criterion.rhs, criterion.c_f, criterion.verdict);
    Ok(Setup {
        nl,
        drift,
        constants,
        criterion,
    })
}

fn wave(cfg: &ExperimentConfig, nl: &Nonlinearity) -> Result<WaveProfile, StageError> {
    let w = stage("wave", solve_wave(nl, &cfg.wave))?;
    info!("wave: c = {:.8}, residual = {:.3e}", w.c(), w.residual());
    Ok(w)
}

pub struct Outcome {
    pub summary: String,
    /// A verdict the caller should turn into a non-zero exit.
    pub failure: Option<StageError>,
}

fn finish(out: &Path, summary: String, failure: Option<StageError>) -> anyhow::Result<Outcome> {
    fs::write(out.join("summary.txt"), &summary).context("cannot write summary.txt")?;
    Ok(Outcome { summary, failure })
}

#[derive(Serialize)]
struct CertifyArtifact<'a> {
    constants: &'a BlockingConstants,
    criterion: &'a CriterionReport,
}

pub fn certify(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Outcome> {
    let s = setup(cfg)?;
    write_json(&out.join("criterion.json"), &s.criterion)?;
    write_json(
        &out.join("certify.json"),
        &CertifyArtifact {
            constants: &s.constants,
            criterion: &s.criterion,
        },
    )?;
    let summary = serde_json::to_string_pretty(&s.criterion)? + "\n";
    finish(out, summary, None)
}

#[derive(Serialize)]
struct WaveArtifact<'a> {
    c: f64,
    residual: f64,
    decay: &'a DecayConstants,
    envelope_constants: Option<EnvelopeConstants>,
    points_per_wave_width: f64,
}

pub fn wave_only(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Outcome> {
    let nl = cfg.nonlinearity.build()?;
    let w = wave(cfg, &nl)?;
    write_with(&out.join("wave.csv"), |o| w.write_csv(o))?;
    let artifact = WaveArtifact {
        c: w.c(),
        residual: w.residual(),
        decay: w.decay(),
        envelope_constants: EnvelopeConstants::compute(&nl, &w).ok(),
        points_per_wave_width: cfg.run.grid.points_per_wave_width(&w),
    };
    write_json(&out.join("wave.json"), &artifact)?;
    let summary = format!(
        "wave speed c = {:.8}\nshooting residual = {:.3e}\ngrid resolves the front with {:.1} points per width\n",
        artifact.c, artifact.residual, artifact.points_per_wave_width
    );
    finish(out, summary, None)
}

#[derive(Serialize)]
struct SupersolutionArtifact {
    criterion: CriterionReport,
    a: f64,
    r_final: f64,
    delta_used: f64,
    h1_psi_distance: f64,
    tail_rate: f64,
    tail_amplitude: f64,
    ladder: Vec<LadderStep>,
    verification: VerificationReport,
}

fn build_supersolution(
    cfg: &ExperimentConfig,
    s: &Setup,
) -> Result<(StationarySupersolution, VerificationReport), StageError> {
    let a = cfg.supersolution.a.unwrap_or(s.constants.a_opt);
    let sup = stage(
        "supersolution",
        continue_to_minus_infinity(
            &s.drift,
            &s.nl,
            a,
            s.criterion.delta,
            &cfg.supersolution.bvp,
            &cfg.supersolution.continuation,
        ),
    )?;
    let report = verify_supersolution(&sup, &s.drift, &s.nl, cfg.supersolution.verify_tol);
    info!("supersolution: R = {}, verification passed = {}", sup.r_final(), report.passed);
    Ok((sup, report))
}

fn write_supersolution(
    out: &Path,
    s: &Setup,
    sup: &StationarySupersolution,
    verification: &VerificationReport,
) -> anyhow::Result<()> {
    write_with(&out.join("supersolution.csv"), |o| sup.write_csv(&s.drift, &s.nl, o))?;
    write_json(
        &out.join("supersolution.json"),
        &SupersolutionArtifact {
            criterion: s.criterion,
            a: sup.a(),
            r_final: sup.r_final(),
            delta_used: sup.delta_used,
            h1_psi_distance: sup.h1_psi_distance,
            tail_rate: sup.tail_rate,
            tail_amplitude: sup.tail_amplitude,
            ladder: sup.ladder.clone(),
            verification: verification.clone(),
        },
    )
}

fn verification_failure(v: &VerificationReport) -> Option<StageError> {
    (!v.passed).then(|| StageError {
        stage: "verify",
        message: format!(
            "supersolution check failed (residual min {:.3e} at x = {:.4}, kink slope {:.3e}, range [{:.3e}, {:.3e}], distance {:.3e} vs δ {:.3e})",
            v.residual_min, v.residual_min_at, v.kink_slope, v.interior_min, v.interior_max, v.h1_psi_distance, v.delta_used
        ),
    })
}

pub fn supersolution(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Outcome> {
    let s = setup(cfg)?;
    let (sup, verification) = build_supersolution(cfg, &s)?;
    write_supersolution(out, &s, &sup, &verification)?;
    let summary = format!(
        "criterion verdict: {:?}\nsupersolution on [{}, {:.4}], tail rate {:.6}\nverification passed: {}\n",
        s.criterion.verdict,
        sup.r_final(),
        sup.a(),
        sup.tail_rate,
        verification.passed
    );
    finish(out, summary, verification_failure(&verification))
}

#[derive(Serialize)]
struct BarrierCheck {
    verification: VerificationReport,
    /// `max_x (u(T_end, x) - w̃_∞(x))` and where it is attained.
    final_excess: f64,
    final_excess_at: f64,
}

#[derive(Serialize)]
struct RunArtifact<'a> {
    config: &'a ExperimentConfig,
    criterion: CriterionReport,
    c: f64,
    run: &'a RunReport,
    barrier: Option<&'a BarrierCheck>,
}

pub fn run_pipeline(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Outcome> {
    let s = setup(cfg)?;
    let w = wave(cfg, &s.nl)?;
    let certified = s.criterion.verdict == Verdict::BlockingCertified;
    let barrier = if certified {
        let (sup, verification) = build_supersolution(cfg, &s)?;
        write_supersolution(out, &s, &sup, &verification)?;
        Some((sup, verification))
    } else {
        None
    };
    info!("simulating {} time units with dt = {}", cfg.run.duration, cfg.run.dt);
    let result = stage("simulation", run(&s.nl, &s.drift, &w, &cfg.run))?;
    let report = &result.report;
    let grid = &cfg.run.grid;
    write_with(&out.join("front_trace.csv"), |o| result.write_front_trace_csv(o))?;
    write_with(&out.join("monitors.csv"), |o| result.write_monitors_csv(o))?;
    // Checkpoints come back in increasing order of the requested times.
    let mut requested = cfg.run.checkpoints.clone();
    requested.sort_by(f64::total_cmp);
    for (t, cp) in requested.iter().zip(&result.checkpoints) {
        write_with(&out.join(format!("field_t{t:.3}.csv")), |o| write_field_csv(cp, grid, o))?;
    }
    write_with(&out.join("field_final.csv"), |o| write_field_csv(&result.final_state, grid, o))?;

    let barrier = barrier.map(|(sup, verification)| {
        let (final_excess, final_excess_at) = barrier_excess(&result.final_state, grid, &sup);
        BarrierCheck {
            verification,
            final_excess,
            final_excess_at,
        }
    });
    write_json(
        &out.join("report.json"),
        &RunArtifact {
            config: cfg,
            criterion: s.criterion,
            c: w.c(),
            run: report,
            barrier: barrier.as_ref(),
        },
    )?;

    let mut summary = String::new();
    let _ = writeln!(summary, "classification: {:?}", report.classification);
    let _ = writeln!(summary, "criterion verdict: {:?}", s.criterion.verdict);
    let _ = writeln!(summary, "wave speed c = {:.8}, measured {:.8}", w.c(), report.measured_speed);
    if let Some(b) = report.beta_shift {
        let _ = writeln!(summary, "asymptotic shift beta = {b:.6}");
    }
    let _ = writeln!(summary, "t in [{:.4}, {:.4}], dt = {}, dx = {:.6}", report.t0, report.t_end, report.dt, report.dx);
    let _ = writeln!(
        summary,
        "max principle excess {:.3e}, monotonicity min {:.3e}",
        report.max_principle_excess, report.monotonicity_min
    );
    let _ = writeln!(summary, "envelope violations: {}", report.envelope_violations.len());
    if let Some(b) = &barrier {
        let _ = writeln!(
            summary,
            "supersolution verified: {}, final excess over it {:.3e} at x = {:.4}",
            b.verification.passed, b.final_excess, b.final_excess_at
        );
    }
    let failure = barrier.as_ref().and_then(|b| verification_failure(&b.verification));
    finish(out, summary, failure)
}

#[derive(Clone, Debug)]
struct SweepPoint {
    amplitude: f64,
    eps: f64,
    verdict_cert: String,
    verdict_sim: String,
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::BlockingCertified => "BlockingCertified",
        Verdict::Undetermined => "Undetermined",
    }
}

fn classification_name(c: Classification) -> &'static str {
    match c {
        Classification::Blocked => "Blocked",
        Classification::Propagating => "Propagating",
        Classification::Undetermined => "Undetermined",
    }
}

pub fn sweep(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<Outcome> {
    let nl = cfg.nonlinearity.build()?;
    let constants = stage("constants", BlockingConstants::compute(&nl))?;
    let w = if cfg.sweep.simulate { Some(wave(cfg, &nl)?) } else { None };
    let jobs: Vec<(f64, f64)> = cfg
        .sweep
        .amplitudes
        .iter()
        .flat_map(|&k| cfg.sweep.eps.iter().map(move |&e| (k, e)))
        .collect();
    info!("sweeping {} points", jobs.len());
    let points = map_parallel(&jobs, |&(amplitude, eps)| {
        let drift = match DriftTerm::mollified_indicator(amplitude, eps, eps * cfg.sweep.smoothing_ratio) {
            Ok(d) => d,
            Err(e) => {
                return SweepPoint {
                    amplitude,
                    eps,
                    verdict_cert: format!("invalid: {e}"),
                    verdict_sim: "skipped".into(),
                }
            }
        };
        let criterion = blocking_criterion(&constants, &drift, cfg.criterion.trace_constant);
        let verdict_sim = match &w {
            None => "skipped".to_string(),
            Some(w) => match run(&nl, &drift, w, &cfg.run) {
                Ok(r) => classification_name(r.report.classification).to_string(),
                Err(e) => {
                    log::warn!("simulation at K = {amplitude}, eps = {eps} failed: {e}");
                    "failed".to_string()
                }
            },
        };
        SweepPoint {
            amplitude,
            eps,
            verdict_cert: verdict_name(criterion.verdict).to_string(),
            verdict_sim,
        }
    });
    write_with(&out.join("phase_diagram.csv"), |o| {
        writeln!(o, "# columns: K,eps,verdict_cert,verdict_sim")?;
        for p in &points {
            writeln!(o, "{},{},{},{}", p.amplitude, p.eps, p.verdict_cert, p.verdict_sim)?;
        }
        Ok(())
    })?;
    let certified = points.iter().filter(|p| p.verdict_cert == "BlockingCertified").count();
    let blocked = points.iter().filter(|p| p.verdict_sim == "Blocked").count();
    let summary = format!(
        "{} points, {} certified, {} blocked in simulation\n",
        points.len(),
        certified,
        blocked
    );
    finish(out, summary, None)
}

/// The output directory: `--out` if given, else the configured one.
pub fn output_dir(cfg: &ExperimentConfig, out: Option<PathBuf>) -> anyhow::Result<PathBuf> {
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}
