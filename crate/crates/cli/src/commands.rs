use std::path::Path;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use lislnet_core::baselines::{HeuristicMatcher, OracleLimits};
use lislnet_core::dual::{dual_function, LaduConfig, Multipliers};
use lislnet_core::evolve::evolve_solution;
use lislnet_core::graph::{estimate_coherent_time, CoherenceSettings, ConstellationSnapshot};
use lislnet_core::methods::{run_method, Method};
use lislnet_core::orbit::KeplerPropagator;
use lislnet_core::primal::{recover, verify_feasibility};
use lislnet_core::report::{
    DatasetManifest, ManifestEntry, SolveMetrics, SubgradReport, REPORT_FORMAT_VERSION,
};
use lislnet_core::scenario::{Scenario, ScenarioConfig};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::io::{csv_writer, emit, read_snapshot, read_text, snapshot_json, to_json};
use crate::{
    CoherenceArgs, ExportArgs, MethodName, SnapshotArgs, SolveArgs, SolverArgs, SubgradArgs,
    SweepArgs, SweepAxis,
};

pub fn snapshot(a: SnapshotArgs) -> Result<()> {
    let mut scenario = Scenario::load(&a.config)?;
    if let Some(n) = a.satellites {
        scenario.config.orbital.satellites = n;
        scenario.config.validate()?;
    }
    let snap = scenario.snapshot(a.t, a.seed)?;
    emit(a.out.as_deref(), &snapshot_json(&snap)?)
}

struct SolverSettings {
    ladu: LaduConfig,
    random_seed: u64,
}

fn solver_settings(a: &SolverArgs) -> Result<SolverSettings> {
    let (mut ladu, mut random_seed) = match &a.config {
        Some(path) => {
            let cfg = ScenarioConfig::from_json(&read_text(path)?, &path.display().to_string())?;
            (cfg.solver.ladu, cfg.solver.random_seed)
        }
        None => (LaduConfig::default(), 0),
    };
    if let Some(k) = a.iterations {
        ladu.iterations = k;
    }
    if let Some(s) = a.step_size {
        ladu.step_size = s;
    }
    if let Some(b) = a.step_decay {
        ladu.step_decay = b;
    }
    if let Some(l) = a.initial_lambda {
        ladu.initial_lambda = l;
    }
    if let Some(m) = a.matching {
        ladu.matching_mode = m.into();
    }
    if let Some(s) = a.seed {
        random_seed = s;
    }
    ladu.validate()?;
    Ok(SolverSettings { ladu, random_seed })
}

fn method_for(
    name: MethodName,
    settings: &SolverSettings,
    lambda: Option<Multipliers>,
) -> Result<Method> {
    Ok(match name {
        MethodName::Mrate => Method::Mrate,
        MethodName::Grid => Method::Grid,
        MethodName::Rand => Method::Rand {
            seed: settings.random_seed,
        },
        MethodName::Sate => Method::Sate {
            matcher: HeuristicMatcher::default(),
        },
        MethodName::Ladu => Method::Ladu(settings.ladu),
        MethodName::Deepladu => Method::DeepLadu {
            lambda: lambda.context("method deepladu needs --lambda <multipliers.json>")?,
            matching_mode: settings.ladu.matching_mode,
        },
        MethodName::Oracle => Method::Oracle(OracleLimits::default()),
    })
}

fn load_multipliers(snap: &ConstellationSnapshot, path: &Path) -> Result<Multipliers> {
    Multipliers::from_json(snap, &read_text(path)?)
        .with_context(|| format!("multipliers {}", path.display()))
}

pub fn solve(a: SolveArgs) -> Result<()> {
    let start = Instant::now();
    let settings = solver_settings(&a.solver)?;
    let snap = read_snapshot(&a.snapshot)?;
    let lambda = match &a.lambda {
        Some(p) => Some(load_multipliers(&snap, p)?),
        None => None,
    };
    let method = method_for(a.method, &settings, lambda)?;
    let outcome = run_method(&snap, &method)?;
    let end_to_end_seconds = start.elapsed().as_secs_f64();

    let report = verify_feasibility(&snap, &outcome.solution);
    for v in &report.violations {
        log::warn!(
            "constraint {:?} violated at {} by {}",
            v.constraint,
            v.location,
            v.slack
        );
    }
    let evolved = if a.evolve {
        let elapsed = a.elapsed.unwrap_or(outcome.solve_seconds);
        let ev = evolve_solution(&snap, &outcome.solution, elapsed, &KeplerPropagator)?;
        Some(ev)
    } else {
        None
    };
    let solution_file = match &a.solution_out {
        Some(p) => {
            emit(Some(p), &to_json(&outcome.solution)?)?;
            Some(p.display().to_string())
        }
        None => None,
    };
    let metrics = SolveMetrics {
        format_version: REPORT_FORMAT_VERSION,
        method: method.name().to_string(),
        throughput: outcome.solution.throughput,
        solve_seconds: outcome.solve_seconds,
        end_to_end_seconds,
        dual_value: outcome.dual_value,
        feasible: report.passed(),
        ladu: outcome.ladu,
        solution_file,
        evolved,
    };
    emit(a.out.as_deref(), &to_json(&metrics)?)
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn export_dataset(a: ExportArgs) -> Result<()> {
    let scenario = Scenario::load(&a.config)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut snapshots = Vec::with_capacity(a.count);
    for (k, (seed, epoch)) in scenario
        .dataset_draws(a.count, a.seed)
        .into_iter()
        .enumerate()
    {
        let snap = scenario
            .snapshot(epoch, seed)
            .with_context(|| format!("snapshot {k} (seed {seed}, epoch {epoch} s)"))?;
        let text = snapshot_json(&snap)?;
        let file = format!("snapshot_{k:05}.json");
        emit(Some(&a.out.join(&file)), &text)?;
        snapshots.push(ManifestEntry {
            file,
            seed,
            epoch,
            satellites: snap.satellite_count(),
            links: snap.link_count(),
            flows: snap.flow_pairs().len(),
            sha256: sha256_hex(text.as_bytes()),
        });
    }
    let manifest = DatasetManifest {
        format_version: REPORT_FORMAT_VERSION,
        seed: a.seed,
        count: a.count,
        snapshots,
    };
    emit(Some(&a.out.join("manifest.json")), &to_json(&manifest)?)
}

pub fn subgrad(a: SubgradArgs) -> Result<()> {
    let snap = read_snapshot(&a.snapshot)?;
    let lambda = load_multipliers(&snap, &a.lambda)?;
    let mode = a.matching.into();
    let evaluation = dual_function(&snap, lambda.values(), mode)?;
    let recovered = recover(&snap, lambda.values(), mode)?;
    let report = SubgradReport {
        format_version: REPORT_FORMAT_VERSION,
        evaluation,
        recovered_throughput: recovered.throughput,
    };
    emit(a.out.as_deref(), &to_json(&report)?)
}

#[derive(Serialize)]
struct CoherenceRow<'a> {
    constellation: &'a str,
    tr: f64,
    coherent_time_s: f64,
}

pub fn coherence(a: CoherenceArgs) -> Result<()> {
    let scenario = Scenario::load(&a.config)?;
    ensure!(a.samples > 0, "--samples must be at least 1");
    ensure!(
        a.resolution > 0.0 && a.horizon >= a.resolution,
        "need 0 < resolution <= horizon"
    );
    let picked = scenario.sample_satellites(0.0, a.seed)?;
    let elements: Vec<_> = picked.iter().map(|&k| scenario.catalog[k]).collect();
    let cfg = &scenario.config;
    let mut out = csv_writer(a.out.as_deref())?;
    out.write_record(["constellation", "TR", "coherent_time_s"])?;
    for &tr in &a.tr {
        let settings = CoherenceSettings {
            threshold_ratio: tr,
            samples: a.samples,
            seed: a.seed,
            horizon: a.horizon,
            resolution: a.resolution,
            start_window: cfg.orbital.epoch_window,
            lcts_per_satellite: cfg.orbital.lcts_per_satellite,
            geometry: cfg.geometry,
        };
        let est = estimate_coherent_time(&elements, &KeplerPropagator, &cfg.optics, &settings)?;
        if est.saturated {
            log::warn!(
                "TR={tr}: no sample lost enough edges within {} s",
                a.horizon
            );
        }
        out.serialize(CoherenceRow {
            constellation: &cfg.orbital.constellation,
            tr,
            coherent_time_s: est.coherent_time,
        })?;
    }
    out.flush()?;
    Ok(())
}

fn axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::Lcts => "lcts",
        SweepAxis::Theta => "theta",
        SweepAxis::Jitter => "jitter",
        SweepAxis::Divergence => "divergence",
        SweepAxis::Satellites => "satellites",
    }
}

fn as_count(axis: SweepAxis, v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v.is_finite() {
        Ok(v as usize)
    } else {
        bail!(
            "{} values must be positive integers, got {v}",
            axis_name(axis)
        )
    }
}

fn apply_axis(base: &Scenario, axis: SweepAxis, v: f64) -> Result<Scenario> {
    let mut s = base.clone();
    let cfg = &mut s.config;
    match axis {
        SweepAxis::Lcts => cfg.orbital.lcts_per_satellite = as_count(axis, v)?,
        SweepAxis::Theta => cfg.geometry.for_half_angle = v.to_radians(),
        SweepAxis::Jitter => cfg.optics.jitter = v,
        SweepAxis::Divergence => {
            ensure!(v > 0.0, "divergence must be positive, got {v}");
            cfg.optics = cfg.optics.with_divergence(v);
        }
        SweepAxis::Satellites => cfg.orbital.satellites = as_count(axis, v)?,
    }
    cfg.validate()
        .with_context(|| format!("{} = {v}", axis_name(axis)))?;
    Ok(s)
}

#[derive(Serialize)]
struct SweepRow {
    axis: &'static str,
    value: f64,
    method: &'static str,
    seed: u64,
    epoch: f64,
    edges: usize,
    throughput: f64,
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let base = Scenario::load(&a.config)?;
    let settings = SolverSettings {
        ladu: base.config.solver.ladu,
        random_seed: base.config.solver.random_seed,
    };
    let methods = a
        .methods
        .iter()
        .map(|&m| {
            ensure!(
                !matches!(m, MethodName::Deepladu),
                "deepladu needs per-snapshot multipliers and cannot be swept"
            );
            method_for(m, &settings, None)
        })
        .collect::<Result<Vec<_>>>()?;
    let draws = base.dataset_draws(a.seeds, a.seed);
    let mut out = csv_writer(a.out.as_deref())?;
    out.write_record([
        "axis",
        "value",
        "method",
        "seed",
        "epoch",
        "edges",
        "throughput",
    ])?;
    for &v in &a.values {
        let scenario = apply_axis(&base, a.axis, v)?;
        for &(seed, epoch) in &draws {
            let snap = scenario.snapshot(epoch, seed)?;
            for m in &methods {
                let outcome = run_method(&snap, m)
                    .with_context(|| format!("{} at {} = {v}", m.name(), axis_name(a.axis)))?;
                out.serialize(SweepRow {
                    axis: axis_name(a.axis),
                    value: v,
                    method: m.name(),
                    seed,
                    epoch,
                    edges: snap.lct_edges().len(),
                    throughput: outcome.solution.throughput,
                })?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
