use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use yrast::basis::{enumerate_basis, free_yrast_state, two_branches};
use yrast::bohmian::{aligned_positions, integrate, track_notch, BohmianOptions, NotchTrack};
use yrast::hamiltonian::{
    converged_yrast, fidelity, fidelity_sweep, find_yrast, Backend, CutoffOptions, ModelParams,
    StateVector, SweepGrid, YrastOptions, YrastResult,
};
use yrast::meanfield::{gpe_soliton, healing_length, relax_soliton, GpeProfile, RelaxOptions};
use yrast::sampling::{
    align_samples_harmonic, histogram, histogram_range, metropolis_sample, notch_depth_histogram,
    sequential_prefix, sequential_sample, AlignedHistogram, MetropolisOptions, SampleSet,
};
use yrast::seed;
use yrast::wavefunction::{conditional, uniform_grid, ConditionalWF, ManyBodyState};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::output::{Output, Provenance};
use crate::schema::*;
use crate::state::{StateSpec, YrastInfo};

pub const DEFAULT_XI: [f64; 10] = [0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0, 2.0];

pub fn open(dir: &Path, command: &str, config: &impl Serialize, seed: u64) -> CliResult<Output> {
    Output::new(dir, Provenance::new(command, config, seed)?)
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: "stdout".into(),
        source: e,
    }
}

pub fn basis(a: &BasisArgs, w: &mut dyn Write) -> CliResult<()> {
    let b = enumerate_basis(a.n, a.k, a.kmax)?;
    writeln!(w, "size {}", b.len()).map_err(stdout_err)?;
    for s in b.states().take(a.limit.unwrap_or(usize::MAX)) {
        writeln!(w, "{s}").map_err(stdout_err)?;
    }
    Ok(())
}

pub fn branch_rows(n: usize, kmax: Option<usize>, l: f64) -> CliResult<Vec<BranchRow>> {
    let top = n.min(kmax.unwrap_or(n)) as i64;
    let ks: Vec<i64> = (0..=top).collect();
    Ok(two_branches(n, &ks, l)?
        .into_iter()
        .map(|b| BranchRow {
            k: b.k,
            elementary: b.elementary,
            yrast: b.yrast,
        })
        .collect())
}

pub fn branches(a: &BranchesArgs, out: &Output) -> CliResult<()> {
    out.csv("branches.csv", &branch_rows(a.n, a.kmax, a.l)?)?;
    Ok(())
}

#[derive(Serialize)]
struct Component {
    state: String,
    re: f64,
    im: f64,
    probability: f64,
}

#[derive(Serialize)]
struct CutoffReport {
    converged: bool,
    fidelity_change: f64,
    energy_change: f64,
    /// `(kmax, energy, fidelity)` per cutoff tried.
    history: Vec<(usize, f64, f64)>,
}

#[derive(Serialize)]
struct YrastReport {
    n: usize,
    k: i64,
    g: f64,
    l: f64,
    kmax: usize,
    dimension: usize,
    backend: BackendArg,
    energy: f64,
    residual: f64,
    iterations: usize,
    shift: f64,
    second_energy: Option<f64>,
    degenerate: bool,
    fidelity_with_free_yrast: Option<f64>,
    top_amplitudes: Vec<Component>,
    cutoff: Option<CutoffReport>,
}

fn free_fidelity(n: usize, k: i64, state: &StateVector) -> CliResult<Option<f64>> {
    if k < 0 || k as usize > n {
        return Ok(None);
    }
    let free = StateVector::basis_vector(state.basis().clone(), &free_yrast_state(n, k)?)?;
    Ok(Some(fidelity(&free, state)?))
}

pub fn yrast(a: &YrastArgs, seed_value: u64, out: &Output, w: &mut dyn Write) -> CliResult<()> {
    let opts = YrastOptions {
        tol: a.tol,
        max_iters: a.max_iters,
        seed: seed_value,
        backend: match a.backend {
            BackendArg::Power => Backend::PowerIteration,
            BackendArg::Lanczos => Backend::Lanczos,
        },
        check_degeneracy: true,
        record_history: false,
    };
    let params = ModelParams::new(a.n, a.k, a.kmax.unwrap_or(0), a.g, a.l);
    let (result, kmax, cutoff): (YrastResult, usize, Option<CutoffReport>) = match a.kmax {
        Some(kmax) => (find_yrast(&params, &opts)?, kmax, None),
        None => {
            let c = converged_yrast(
                &params,
                &CutoffOptions {
                    yrast: YrastOptions {
                        check_degeneracy: false,
                        ..opts
                    },
                    ..Default::default()
                },
            )?;
            let report = CutoffReport {
                converged: c.converged,
                fidelity_change: c.fidelity_change,
                energy_change: c.energy_change,
                history: c.history,
            };
            (c.result, c.kmax, Some(report))
        }
    };
    let report = YrastReport {
        n: a.n,
        k: a.k,
        g: a.g,
        l: a.l,
        kmax,
        dimension: result.state.len(),
        backend: a.backend,
        energy: result.energy,
        residual: result.residual,
        iterations: result.iterations,
        shift: result.shift,
        second_energy: result.second_energy,
        degenerate: result.degenerate,
        fidelity_with_free_yrast: free_fidelity(a.n, a.k, &result.state)?,
        top_amplitudes: result
            .state
            .top_components(a.top)
            .into_iter()
            .map(|(s, c)| Component {
                state: s.to_string(),
                re: c.re,
                im: c.im,
                probability: c.norm_sqr(),
            })
            .collect(),
        cutoff,
    };
    let path = out.json("yrast.json", &report)?;
    if a.amplitudes {
        let rows: Vec<AmplitudeRow> = result
            .state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(index, c)| AmplitudeRow {
                index,
                re: c.re,
                im: c.im,
            })
            .collect();
        out.csv("yrast_amplitudes.csv", &rows)?;
    }
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    w.write_all(text.as_bytes()).map_err(stdout_err)
}

#[derive(Serialize)]
struct SweepCellReport {
    n: usize,
    g: f64,
    xi: Option<f64>,
    xi_inverse: f64,
    fidelity: Option<f64>,
    energy: Option<f64>,
    kmax: Option<usize>,
    converged: Option<bool>,
    error: Option<yrast::Error>,
}

/// Writes the fidelity table; cells that failed are listed in the JSON and make
/// the command fail after everything else is written.
pub fn sweep_into(
    out: &Output,
    prefix: &str,
    ns: &[usize],
    grid: &SweepGrid,
    l: f64,
    opts: &CutoffOptions,
) -> CliResult<()> {
    let rows = fidelity_sweep(ns, grid, l, opts);
    let mut table = Vec::new();
    let mut cells = Vec::new();
    let mut first_error = None;
    for r in rows {
        let mut cell = SweepCellReport {
            n: r.n,
            g: r.g,
            xi: r.xi,
            xi_inverse: r.xi_inverse,
            fidelity: None,
            energy: None,
            kmax: None,
            converged: None,
            error: None,
        };
        match r.outcome {
            Ok(c) => {
                table.push(FidelityRow {
                    n: r.n,
                    g: r.g,
                    xi_inverse: r.xi_inverse,
                    fidelity: c.fidelity,
                });
                cell.fidelity = Some(c.fidelity);
                cell.energy = Some(c.energy);
                cell.kmax = Some(c.kmax);
                cell.converged = Some(c.converged);
            }
            Err(e) => {
                first_error.get_or_insert_with(|| e.clone());
                cell.error = Some(e);
            }
        }
        cells.push(cell);
    }
    out.csv(&format!("{prefix}.csv"), &table)?;
    out.json(
        &format!("{prefix}.json"),
        &serde_json::json!({ "cells": cells }),
    )?;
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn sweep_grid(xi: Option<&[f64]>, g_values: Option<&[f64]>) -> CliResult<SweepGrid> {
    if let Some(g) = g_values {
        return Ok(SweepGrid::Coupling(g.to_vec()));
    }
    let xi = xi.unwrap_or(&DEFAULT_XI);
    if let Some(bad) = xi.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(CliError::usage(format!(
            "healing lengths must be positive, got {bad}"
        )));
    }
    Ok(SweepGrid::InverseHealingLength(
        xi.iter().map(|x| 1.0 / x).collect(),
    ))
}

pub fn fidelity_sweep_cmd(a: &SweepArgs, out: &Output) -> CliResult<()> {
    let grid = sweep_grid(a.xi.as_deref(), a.g_values.as_deref())?;
    let opts = CutoffOptions {
        kmax_limit: a.kmax_limit,
        max_dim: a.max_dim,
        tol: a.cutoff_tol,
        ..Default::default()
    };
    sweep_into(out, "fidelity_sweep", &a.ns, &grid, a.l, &opts)
}

pub fn parse_positions(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::usage(format!("bad position `{s}`")))
        })
        .collect()
}

pub fn resolve(
    spec: &str,
    l: f64,
    seed_value: u64,
) -> CliResult<(ManyBodyState, Option<YrastInfo>)> {
    let r = spec.parse::<StateSpec>()?.resolve(l, seed_value)?;
    Ok((r.state, r.yrast))
}

pub fn profile_rows(grid: &[f64], density: &[f64], phase: &[f64]) -> Vec<ProfileRow> {
    grid.iter()
        .zip(density.iter().zip(phase))
        .map(|(&x, (&density, &phase))| ProfileRow { x, density, phase })
        .collect()
}

#[derive(Serialize)]
pub struct ConditionalReport {
    pub fixed: Vec<f64>,
    pub min_density: f64,
    /// Grid position of the density minimum.
    pub notch: f64,
    pub phase_jump: f64,
    pub yrast: Option<YrastInfo>,
}

pub fn draw_fixed(
    state: &ManyBodyState,
    l: f64,
    seed_value: u64,
    stream: u64,
) -> CliResult<Vec<f64>> {
    let mut rng = seed::rng(seed::derive(seed_value, stream));
    Ok(sequential_prefix(
        state,
        state.particle_count() - 1,
        l,
        &mut rng,
    )?)
}

pub fn conditional_report(c: &ConditionalWF, yrast: Option<YrastInfo>) -> ConditionalReport {
    ConditionalReport {
        fixed: c.fixed.clone(),
        min_density: c.min_density(),
        notch: c.grid[c.argmin()],
        phase_jump: c.phase_jump(),
        yrast,
    }
}

pub fn conditional_cmd(a: &ConditionalArgs, seed_value: u64, out: &Output) -> CliResult<()> {
    let (state, info) = resolve(&a.state, a.l, seed_value)?;
    if state.particle_count() < 2 {
        return Err(CliError::usage("a conditional needs N >= 2"));
    }
    let fixed = match a.fixed.trim() {
        "sample" => draw_fixed(&state, a.l, seed_value, 0)?,
        list => parse_positions(list)?,
    };
    let grid = uniform_grid(a.grid, a.l);
    let c = conditional(&state, &fixed, &grid, a.l)?;
    out.csv(
        "conditional.csv",
        &profile_rows(&c.grid, &c.density(), &c.phase()),
    )?;
    out.json("conditional.json", &conditional_report(&c, info))?;
    Ok(())
}

pub fn histogram_rows(h: &AlignedHistogram) -> Vec<HistogramRow> {
    h.bin_edges
        .windows(2)
        .zip(h.counts.iter().zip(&h.density))
        .map(|(e, (&count, &density))| HistogramRow {
            bin_left: e[0],
            bin_right: e[1],
            count,
            density,
        })
        .collect()
}

#[derive(Serialize)]
pub struct SampleReport<'a> {
    pub n: usize,
    pub samples: usize,
    pub skipped: usize,
    pub aligned: bool,
    pub harmonic: u32,
    pub notch_depth: f64,
    pub sampler: &'a yrast::sampling::Provenance,
    pub warnings: &'a [String],
}

pub fn draw(
    state: &ManyBodyState,
    l: f64,
    n_samples: usize,
    method: SamplerArg,
    chains: usize,
    seed_value: u64,
) -> CliResult<SampleSet> {
    Ok(match method {
        SamplerArg::Exact => sequential_sample(state, l, n_samples, seed_value)?,
        SamplerArg::Metropolis => metropolis_sample(
            state,
            l,
            &MetropolisOptions {
                chains,
                ..MetropolisOptions::new(n_samples, seed_value)
            },
        )?,
    })
}

pub fn sample_cmd(a: &SampleArgs, seed_value: u64, out: &Output) -> CliResult<()> {
    let (state, _) = resolve(&a.state, a.l, seed_value)?;
    let mut set = draw(&state, a.l, a.n_samples, a.method, a.chains, seed_value)?;
    if a.align {
        set = align_samples_harmonic(&set, a.harmonic);
    }
    let h = histogram(&set, a.bins)?;
    out.csv("sample_hist.csv", &histogram_rows(&h))?;
    if a.raw {
        let rows: Vec<SampleRow> = set
            .samples
            .iter()
            .enumerate()
            .flat_map(|(sample, c)| {
                c.positions()
                    .iter()
                    .enumerate()
                    .map(move |(particle, &x)| SampleRow {
                        sample,
                        particle,
                        x,
                    })
            })
            .collect();
        out.csv("samples.csv", &rows)?;
    }
    out.json(
        "sample.json",
        &SampleReport {
            n: set.n,
            samples: set.len(),
            skipped: set.skipped,
            aligned: a.align,
            harmonic: a.harmonic,
            notch_depth: h.notch_depth(),
            sampler: &set.provenance,
            warnings: &set.warnings,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
pub struct DepthReport {
    pub samples: usize,
    pub skipped: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Depths below their two-mode bound by more than `1e-12`.
    pub bound_violations: usize,
    pub depths: Vec<f64>,
}

pub fn notch_hist_into(
    out: &Output,
    name: &str,
    state: &ManyBodyState,
    l: f64,
    n_samples: usize,
    bins: usize,
    grid: usize,
    seed_value: u64,
) -> CliResult<DepthReport> {
    let d = notch_depth_histogram(state, l, n_samples, bins, grid, seed_value)?;
    let rows: Vec<DepthRow> = d
        .histogram
        .bin_edges
        .windows(2)
        .zip(&d.histogram.counts)
        .map(|(e, &count)| DepthRow {
            left: e[0],
            right: e[1],
            count,
        })
        .collect();
    out.csv(&format!("{name}.csv"), &rows)?;
    let report = DepthReport {
        samples: d.depths.len(),
        skipped: d.skipped,
        min: d.depths.iter().copied().fold(f64::INFINITY, f64::min),
        max: d.depths.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: d.depths.iter().sum::<f64>() / d.depths.len().max(1) as f64,
        bound_violations: d
            .depths
            .iter()
            .zip(&d.bounds)
            .filter(|(x, b)| b.is_some_and(|b| **x < b - 1e-12))
            .count(),
        depths: d.depths,
    };
    out.json(&format!("{name}.json"), &report)?;
    Ok(report)
}

pub fn notch_hist_cmd(a: &NotchHistArgs, seed_value: u64, out: &Output) -> CliResult<()> {
    let (state, _) = resolve(&a.state, a.l, seed_value)?;
    notch_hist_into(
        out,
        "notch_hist",
        &state,
        a.l,
        a.n_samples,
        a.bins,
        a.grid,
        seed_value,
    )?;
    Ok(())
}

#[derive(Serialize)]
pub struct BohmianReport {
    pub times: Vec<f64>,
    pub realizations: usize,
    pub completed: usize,
    pub node_events: u64,
    pub failures: Vec<(usize, yrast::Error)>,
    pub notch: NotchTrack,
}

/// Trajectories from exact initial draws; one aligned histogram per output time.
pub fn bohmian_into(
    out: &Output,
    prefix: &str,
    state: &ManyBodyState,
    a: &BohmianArgs,
    seed_value: u64,
) -> CliResult<BohmianReport> {
    let initial = sequential_sample(state, a.l, a.n_real, seed_value)?;
    let set = integrate(
        state,
        &initial,
        &BohmianOptions {
            dt: a.dt,
            snapshots: a.t_snapshots.clone(),
        },
    )?;
    for (i, t) in set.times.iter().enumerate() {
        let (xs, _) = aligned_positions(&set, i, a.harmonic);
        let h = histogram_range(&xs, a.bins, 0.0, a.l)?;
        out.csv(&format!("{prefix}_t{t}.csv"), &histogram_rows(&h))?;
    }
    let mut rows = Vec::new();
    for r in &set.realizations {
        for (i, &time) in set.times.iter().enumerate().take(r.positions.len()) {
            for (particle, &x) in r.positions[i].iter().enumerate() {
                rows.push(TrajectoryRow {
                    realization: r.index,
                    time,
                    particle,
                    x,
                });
            }
        }
    }
    out.csv(&format!("{prefix}_trajectories.csv"), &rows)?;
    let report = BohmianReport {
        times: set.times.clone(),
        realizations: set.realizations.len(),
        completed: set.realizations.iter().filter(|r| r.completed()).count(),
        node_events: set.realizations.iter().map(|r| r.node_events).sum(),
        failures: set
            .realizations
            .iter()
            .filter_map(|r| r.error.clone().map(|e| (r.index, e)))
            .collect(),
        notch: track_notch(&set, a.harmonic),
    };
    out.json(&format!("{prefix}.json"), &report)?;
    Ok(report)
}

pub fn bohmian_cmd(a: &BohmianArgs, seed_value: u64, out: &Output) -> CliResult<()> {
    let (state, _) = resolve(&a.state, a.l, seed_value)?;
    bohmian_into(out, "bohmian", &state, a, seed_value)?;
    Ok(())
}

#[derive(Serialize)]
pub struct GpeReport {
    pub gn: f64,
    pub k_avg: f64,
    pub l: f64,
    pub healing_length: Option<f64>,
    pub velocity: f64,
    pub mu: f64,
    pub m: Option<f64>,
    pub norm: f64,
    pub residual: f64,
    pub min_density: f64,
    pub method: &'static str,
}

pub fn gpe_profile(
    gn: f64,
    kavg: f64,
    grid: usize,
    l: f64,
    tol: f64,
    relax: bool,
) -> CliResult<GpeProfile> {
    Ok(if relax {
        relax_soliton(
            gn,
            kavg,
            l,
            &RelaxOptions {
                points: grid,
                ..Default::default()
            },
        )?
        .profile
    } else {
        gpe_soliton(gn, kavg, grid, l, tol)?
    })
}

pub fn gpe_into(out: &Output, name: &str, p: &GpeProfile, relax: bool) -> CliResult<()> {
    out.csv(
        &format!("{name}.csv"),
        &profile_rows(&p.grid, &p.density(), &p.phase()),
    )?;
    out.json(
        &format!("{name}.json"),
        &GpeReport {
            gn: p.gn,
            k_avg: p.k_avg,
            l: p.l,
            healing_length: healing_length(p.gn, 1, p.l).ok(),
            velocity: p.velocity,
            mu: p.mu,
            m: p.m,
            norm: p.norm(),
            residual: p.residual(),
            min_density: p.min_density(),
            method: if relax { "relaxation" } else { "elliptic" },
        },
    )?;
    Ok(())
}

pub fn gpe_cmd(a: &GpeArgs, out: &Output) -> CliResult<()> {
    let p = gpe_profile(a.gn, a.kavg, a.grid, a.l, a.tol, a.relax)?;
    gpe_into(out, "gpe", &p, a.relax)
}

pub fn list_artifacts(out: &Output, w: &mut dyn Write) -> CliResult<()> {
    for a in out.artifacts() {
        let path: PathBuf = a.file.into();
        writeln!(w, "{}", path.display()).map_err(stdout_err)?;
    }
    Ok(())
}
