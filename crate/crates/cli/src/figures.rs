//! Data series behind each figure. Every run ends with `<fig>_manifest.json`
//! listing the files it wrote and their columns.

use serde::Serialize;
use yrast::hamiltonian::CutoffOptions;
use yrast::sampling::{align_samples_harmonic, histogram};
use yrast::wavefunction::{conditional, uniform_grid, ConditionalWF};

use crate::args::{BohmianArgs, FigArgs, FigureName, SamplerArg};
use crate::commands::*;
use crate::error::{CliError, CliResult};
use crate::output::{Artifact, Output};
use crate::state::StateSpec;

const GRID: usize = 1024;

/// Cyclic shift of the profile that puts its density minimum at `L/2`.
pub fn centered(c: &ConditionalWF) -> (Vec<f64>, Vec<f64>) {
    let n = c.grid.len();
    let shift = (c.argmin() + n - n / 2) % n;
    let density = c.density();
    let phase = c.phase();
    let roll = |v: &[f64]| (0..n).map(|i| v[(i + shift) % n]).collect::<Vec<_>>();
    (roll(&density), roll(&phase))
}

fn fig2(a: &FigArgs, seed_value: u64, out: &Output) -> CliResult<()> {
    let n = a.n.unwrap_or(8);
    if n < 2 || n % 2 != 0 {
        return Err(CliError::usage("fig2 needs an even N >= 2"));
    }
    let g = 0.64 / n as f64;
    let spec = StateSpec::Yrast {
        n,
        k: (n / 2) as i64,
        g,
        kmax: None,
    };
    let r = spec.resolve(a.l, seed_value)?;
    let grid = uniform_grid(GRID, a.l);
    let mut reports = Vec::new();
    for draw in 0..3u64 {
        let fixed = draw_fixed(&r.state, a.l, seed_value, draw)?;
        let c = conditional(&r.state, &fixed, &grid, a.l)?;
        let (density, phase) = centered(&c);
        out.csv(
            &format!("fig2_conditional_{draw}.csv"),
            &profile_rows(&grid, &density, &phase),
        )?;
        reports.push(conditional_report(&c, r.yrast.clone()));
    }
    out.json(
        "fig2_conditionals.json",
        &serde_json::json!({ "draws": reports }),
    )?;
    let p = gpe_profile(g * n as f64, 0.5, GRID, a.l, 1e-10, false)?;
    gpe_into(out, "fig2_gpe", &p, false)
}

fn fig3(a: &FigArgs, out: &Output) -> CliResult<()> {
    out.csv(
        "fig3_branches.csv",
        &branch_rows(a.n.unwrap_or(8), None, a.l)?,
    )?;
    Ok(())
}

fn fig5(a: &FigArgs, seed_value: u64, out: &Output) -> CliResult<()> {
    let top = a.n.unwrap_or(32);
    let mut summary = Vec::new();
    let mut n = 4;
    while n <= top {
        for k in [n / 2, n / 4] {
            let state = StateSpec::Dicke { n, k }.resolve(a.l, seed_value)?.state;
            let set = draw(&state, a.l, a.samples, SamplerArg::Exact, 1, seed_value)?;
            let aligned = align_samples_harmonic(&set, 1);
            let h = histogram(&aligned, a.bins)?;
            out.csv(&format!("fig5_N{n}_K{k}.csv"), &histogram_rows(&h))?;
            summary.push(serde_json::json!({
                "N": n, "K": k, "notch_depth": h.notch_depth(), "skipped": aligned.skipped,
            }));
            let p = gpe_profile(0.0, k as f64 / n as f64, GRID, a.l, 1e-10, false)?;
            gpe_into(out, &format!("fig5_N{n}_K{k}_ideal"), &p, false)?;
        }
        n *= 2;
    }
    out.json(
        "fig5_summary.json",
        &serde_json::json!({ "panels": summary }),
    )?;
    Ok(())
}

fn fig7(a: &FigArgs, seed_value: u64, out: &Output) -> CliResult<()> {
    let n = a.n.unwrap_or(32);
    for k in [n / 2, n / 4] {
        let state = StateSpec::Dicke { n, k }.resolve(a.l, seed_value)?.state;
        notch_hist_into(
            out,
            &format!("fig7_N{n}_K{k}"),
            &state,
            a.l,
            a.samples,
            40,
            GRID,
            seed_value,
        )?;
    }
    Ok(())
}

fn fig8(a: &FigArgs, seed_value: u64, out: &Output) -> CliResult<()> {
    let n = a.n.unwrap_or(8);
    let state = StateSpec::Twin { n }.resolve(a.l, seed_value)?.state;
    let args = BohmianArgs {
        state: format!("twin:N={n}"),
        n_real: a.n_real,
        dt: 1e-3,
        t_snapshots: vec![0.1, 0.2, 0.3, 0.4],
        bins: a.bins,
        harmonic: 1,
        l: a.l,
    };
    bohmian_into(out, "fig8_bohmian", &state, &args, seed_value)?;
    Ok(())
}

fn fig9(a: &FigArgs, out: &Output) -> CliResult<()> {
    let top = a.n.unwrap_or(64);
    let ns: Vec<usize> = [8, 16, 32, 64].into_iter().filter(|&n| n <= top).collect();
    if ns.is_empty() {
        return Err(CliError::usage("fig9 needs --n >= 8"));
    }
    sweep_into(
        out,
        "fig9_fidelity",
        &ns,
        &sweep_grid(None, None)?,
        a.l,
        &CutoffOptions::default(),
    )
}

#[derive(Serialize)]
struct Manifest {
    figure: FigureName,
    artifacts: Vec<Artifact>,
}

pub fn run(a: &FigArgs, seed_value: u64, out: &Output) -> CliResult<()> {
    let result = match a.name {
        FigureName::Fig2 => fig2(a, seed_value, out),
        FigureName::Fig3 => fig3(a, out),
        FigureName::Fig5 => fig5(a, seed_value, out),
        FigureName::Fig7 => fig7(a, seed_value, out),
        FigureName::Fig8 => fig8(a, seed_value, out),
        FigureName::Fig9 => fig9(a, out),
    };
    let stem = serde_json::to_value(a.name)?;
    let stem = stem.as_str().unwrap_or("fig");
    out.json(
        &format!("{stem}_manifest.json"),
        &Manifest {
            figure: a.name,
            artifacts: out.artifacts(),
        },
    )?;
    result
}
