//! Subcommands. Each reads a validated [`RunConfig`], writes its artifacts
//! into the output directory and returns their paths.

use crate::config::RunConfig;
use crate::verify;
use anyhow::{bail, Context, Result};
use heis_besov::group_core::GroupPoint;
use heis_besov::heat_flow::{green_kernel, heat_kernel, heat_kernel_spectral, semigroup_apply};
use heis_besov::littlewood_paley::{BesovEvaluator, PartitionOfUnity};
use heis_besov::pam_solver::{hypothesis_check, picard_solve, HypothesisReport, IterationRecord};
use heis_besov::paraproduct::decompose;
use heis_besov::spectral::*;
use heis_besov::stochastics::{sample_noise, NoiseParams};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// CSV with a header row; numbers in shortest round-trip scientific form.
pub fn csv_bytes(header: &[&str], rows: &[Vec<f64>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:e}")))?;
    }
    Ok(w.into_inner()?)
}

fn warn(msg: Option<String>) {
    if let Some(m) = msg {
        eprintln!("warning: {m}");
    }
}

fn input_transform(cfg: &RunConfig, grid: &Arc<FrequencyGrid>) -> Result<SpectralField> {
    let f = cfg.field.load(&cfg.spatial_grid())?;
    warn(boundary_warning(&f));
    warn(resolution_warning(&f.grid, grid));
    Ok(forward_transform(&f, grid)?)
}

pub fn transform(cfg: &RunConfig, json: bool) -> Result<Vec<PathBuf>> {
    let fh = input_transform(cfg, &cfg.frequency_grid()?)?;
    let mut out = vec![write(&cfg.output, "transform.hbsf", &io::spectral_to_bytes(&fh))?];
    if json {
        out.push(write(&cfg.output, "transform.json", io::spectral_to_json(&fh)?.as_bytes())?);
    }
    Ok(out)
}

pub fn inverse(cfg: &RunConfig, input: &Path, json: bool) -> Result<Vec<PathBuf>> {
    let bytes = std::fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let fh = io::read_spectral(&bytes)?;
    let f = inverse_transform(&fh, &cfg.spatial_grid())?;
    let mut out = vec![write(&cfg.output, "inverse.hbsf", &io::spatial_to_bytes(&f))?];
    if json {
        out.push(write(&cfg.output, "inverse.json", io::spatial_to_json(&f)?.as_bytes())?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct PlancherelReport {
    spatial_l2_sq: f64,
    spectral_l2_sq: f64,
    relative_error: f64,
}

pub fn plancherel_check(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let f = cfg.field.load(&cfg.spatial_grid())?;
    let fh = forward_transform(&f, &cfg.frequency_grid()?)?;
    let (a, b) = (f.l2_norm_sq(), plancherel_norm(&fh));
    let report = PlancherelReport { spatial_l2_sq: a, spectral_l2_sq: b, relative_error: (a - b).abs() / a };
    Ok(vec![write(&cfg.output, "plancherel.json", &json_bytes(&report)?)?])
}

fn block_rows(cfg: &RunConfig, partition: &PartitionOfUnity, fh: &SpectralField) -> Result<Vec<(i32, f64, f64)>> {
    let b = &cfg.besov;
    let eval = BesovEvaluator::Spatial { target: cfg.spatial_grid(), alpha: b.alpha, beta: b.beta, weight: b.weight.clone() };
    Ok(eval.block_norms(fh, partition, b.gamma)?)
}

fn blocks_csv(rows: &[(i32, f64, f64)]) -> Result<Vec<u8>> {
    let rows: Vec<Vec<f64>> = rows.iter().map(|&(k, s, v)| vec![k as f64, s, v]).collect();
    csv_bytes(&["k", "scale", "block_norm"], &rows)
}

pub fn blocks(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let partition = cfg.partition()?;
    let fh = input_transform(cfg, partition.grid())?;
    let rows = block_rows(cfg, &partition, &fh)?;
    Ok(vec![write(&cfg.output, "blocks.csv", &blocks_csv(&rows)?)?])
}

#[derive(Serialize)]
struct BesovReport {
    gamma: f64,
    alpha: f64,
    beta: f64,
    norm: f64,
}

pub fn besov_norm(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let partition = cfg.partition()?;
    let fh = input_transform(cfg, partition.grid())?;
    let rows = block_rows(cfg, &partition, &fh)?;
    let b = &cfg.besov;
    let norm = heis_besov::littlewood_paley::lbeta(&rows.iter().map(|(_, s, v)| s * v).collect::<Vec<_>>(), b.beta);
    let report = BesovReport { gamma: b.gamma, alpha: b.alpha, beta: b.beta, norm };
    Ok(vec![
        write(&cfg.output, "besov_blocks.csv", &blocks_csv(&rows)?)?,
        write(&cfg.output, "besov.json", &json_bytes(&report)?)?,
    ])
}

fn point(n: usize, p: &[f64; 3]) -> Result<GroupPoint> {
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    x[0] = p[0];
    y[0] = p[1];
    Ok(GroupPoint::new(x, y, p[2])?)
}

pub fn heat(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let h = &cfg.heat;
    let mut rows = vec![];
    for &t in &h.times {
        for p in &h.points {
            let q = point(cfg.group.n, p)?;
            let closed = heat_kernel(t, &q, h.scale)?;
            let spectral = heat_kernel_spectral(t, &q, h.scale)?;
            rows.push(vec![t, p[0], p[1], p[2], closed, spectral, ((closed - spectral) / closed).abs()]);
        }
    }
    let table = csv_bytes(&["t", "x", "y", "z", "closed", "spectral", "relative_difference"], &rows)?;
    let f = cfg.field.load(&cfg.spatial_grid())?;
    let pt = semigroup_apply(&f, &cfg.frequency_grid()?, h.apply, h.scale)?;
    Ok(vec![
        write(&cfg.output, "heat_kernel.csv", &table)?,
        write(&cfg.output, "heat.hbsf", &io::spatial_to_bytes(&pt))?,
    ])
}

pub fn green(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let e = GroupPoint::identity(cfg.group.n);
    let mut rows = vec![];
    for &a in &cfg.green.alphas {
        for p in &cfg.green.points {
            rows.push(vec![a, p[0], p[1], p[2], green_kernel(a, &point(cfg.group.n, p)?, &e)?]);
        }
    }
    Ok(vec![write(&cfg.output, "green_kernel.csv", &csv_bytes(&["alpha", "x", "y", "z", "value"], &rows)?)?])
}

pub fn paraproduct(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let partition = cfg.partition()?;
    let sg = cfg.spatial_grid();
    let f = cfg.field.load(&sg)?;
    let g = cfg.second_field.load(&sg)?;
    let parts = decompose(&partition, &f, &g)?;
    let comps = [("low_high", &parts.low_high), ("resonant", &parts.resonant), ("high_low", &parts.high_low)];
    let mut out = vec![];
    let mut norms = vec![];
    for (name, c) in comps {
        out.push(write(&cfg.output, &format!("{name}.hbsf"), &io::spatial_to_bytes(c))?);
        norms.push(block_rows(cfg, &partition, &forward_transform(c, partition.grid())?)?);
    }
    let rows: Vec<Vec<f64>> = (0..norms[0].len())
        .map(|i| vec![norms[0][i].0 as f64, norms[0][i].1, norms[0][i].2, norms[1][i].2, norms[2][i].2])
        .collect();
    out.push(write(&cfg.output, "paraproduct.csv", &csv_bytes(&["k", "scale", "low_high", "resonant", "high_low"], &rows)?)?);
    Ok(out)
}

pub fn noise_sample(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let params = cfg.noise_params(NoiseParams::dyadic_times(cfg.noise.horizon, cfg.noise.level));
    let path = sample_noise(&params, &cfg.frequency_grid()?)?;
    let mut rows = vec![];
    let mut value = SpectralField::zeros(path.grid.clone());
    for i in 0..=path.steps() {
        let inc = if i == 0 { 0.0 } else { path.increments[i - 1].plancherel_norm().sqrt() };
        if i > 0 {
            value = value.add(&path.increments[i - 1])?;
        }
        rows.push(vec![i as f64, params.times[i], path.scalar[i], inc, value.plancherel_norm().sqrt()]);
    }
    Ok(vec![
        write(&cfg.output, "noise_path.hbnp", &path.to_bytes()?)?,
        write(&cfg.output, "noise_summary.csv", &csv_bytes(&["i", "t", "scalar", "increment_l2", "value_l2"], &rows)?)?,
    ])
}

pub fn noise_verify(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let report = verify::covariance_report(cfg, cfg.noise.replicates)?;
    Ok(vec![write(&cfg.output, "noise_verify.json", &json_bytes(&report)?)?])
}

/// Inequalities of the noise window and exponent chain that fail.
pub fn violations(report: &HypothesisReport) -> Vec<String> {
    let mut out = crate::config::admissibility_violations(report.zeta, report.alpha, report.n);
    let (z, a) = (report.zeta, report.alpha);
    let h = (report.n as f64 + 1.0) / 2.0;
    if !report.holder {
        out.push(format!("vartheta < 1 - zeta/2 fails: {} >= {}", report.vartheta, 1.0 - z / 2.0));
    }
    if !report.regularity {
        out.push(format!("gamma > (n+1)/2 - alpha fails: {} <= {}", report.gamma, h - a));
    }
    if !report.young {
        out.push(format!("2 vartheta > 1 + gamma fails: {} <= {}", 2.0 * report.vartheta, 1.0 + report.gamma));
    }
    if !report.gamma_in_unit {
        out.push(format!("0 < gamma < 1 fails: gamma = {}", report.gamma));
    }
    out
}

#[derive(Serialize)]
struct SolveLog<'a> {
    hypothesis: &'a HypothesisReport,
    noise: &'a NoiseParams,
    solver: &'a heis_besov::pam_solver::SolverConfig,
    /// `null` when `τ` is fixed in the config.
    noise_norm: f64,
    tau: f64,
    segments: &'a [(usize, usize)],
    iterations: &'a [IterationRecord],
    first_segment_contraction: Option<f64>,
    converged: bool,
}

pub fn pam_solve(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let sc = cfg.solver_config();
    let nz = &cfg.noise;
    let report = hypothesis_check(sc.exponents.vartheta, sc.exponents.gamma, nz.zeta, nz.alpha, cfg.group.n);
    if !report.feasible {
        bail!(crate::Refusal(violations(&report)));
    }
    let partition = cfg.partition()?;
    let space = Arc::new(cfg.solver.grid.clone());
    let u0 = cfg.solver.initial.load(&space)?;
    let params = cfg.noise_params(sc.times());
    let path = sample_noise(&params, partition.grid())?;
    let state = picard_solve(&u0, &path, &partition, &sc)?;

    let mut rows = vec![];
    for k in 0..=sc.steps {
        let i = k * sc.stride();
        let t = state.times[i];
        let u = state.spatial(i, &space)?;
        let besov = sc.dspace_evaluator(t, &space)?.norm(&state.fields[i], &partition, sc.exponents.kappa)?;
        rows.push(vec![i as f64, t, u.sup_norm(), u.l2_norm_sq().sqrt(), besov]);
    }
    let last = state.spatial(state.fields.len() - 1, &space)?;
    let log = SolveLog {
        hypothesis: &report,
        noise: &params,
        solver: &sc,
        noise_norm: state.noise_norm,
        tau: state.tau,
        segments: &state.segments,
        iterations: &state.records,
        first_segment_contraction: state.contraction(0),
        converged: state.converged,
    };
    Ok(vec![
        write(&cfg.output, "pam_norms.csv", &csv_bytes(&["i", "t", "sup", "l2", "besov_kappa"], &rows)?)?,
        write(&cfg.output, "pam_final.hbsf", &io::spatial_to_bytes(&last))?,
        write(&cfg.output, "pam_log.json", &json_bytes(&log)?)?,
    ])
}
