use std::io::Write;
use std::path::{Path, PathBuf};

use kickscope_core::experiment::{
    assemble, assemble_from, change_basis, chi_square_vs_density, fringe_analysis, kick_report,
    sample_events, screen_density, storey_bound_report, BranchState, FringeAnalysis, FringeWindow,
};
use kickscope_core::hilbert::{build_uqsd, DetectorConfig};
use kickscope_core::verify::{propagated_slits, run_verification, CheckStatus, VerifyConfig};
use kickscope_core::wavepacket::{slit_state, Slit, Wavefunction};

use crate::config::RunConfig;
use crate::output::{fmt_f64, fmt_opt, Staged};
use crate::CliError;

pub const DEFAULT_SCAN: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Branch states at the screen, in the configured basis.
fn screen_state(
    cfg: &RunConfig,
    psi1: &Wavefunction,
    psi2: &Wavefunction,
    detector: &DetectorConfig,
) -> BranchState {
    change_basis(&assemble_from(psi1, psi2, &build_uqsd(detector)), cfg.basis)
}

fn fringes(cfg: &RunConfig, screen: &BranchState) -> Result<FringeAnalysis, CliError> {
    let window = FringeWindow::centered(&cfg.geometry, &cfg.units);
    Ok(fringe_analysis(&screen_density(screen), &window)?)
}

pub fn run(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (geom, grid, units) = (&cfg.geometry, &cfg.grid, &cfg.units);
    let at_slits = change_basis(
        &assemble(geom, grid, &build_uqsd(&cfg.detector))?,
        cfg.basis,
    );
    let kicks = kick_report(&at_slits, &cfg.detector, units, geom)?;

    let (psi1, psi2) = propagated_slits(geom, grid, units)?;
    let screen = screen_state(cfg, &psi1, &psi2, &cfg.detector);
    drop((psi1, psi2));
    let total = screen_density(&screen);
    let f = fringes(cfg, &screen)?;
    let bound = storey_bound_report(f.visibility)?;

    let mut staged = Staged::new(out)?;
    staged.write("pattern.csv", |w| {
        writeln!(w, "x,rho_total,rho_branch1,rho_branch2,rho_branch3")?;
        let branches: Vec<&[_]> = screen.branches().iter().map(|b| b.amplitudes()).collect();
        for j in (0..grid.n()).step_by(cfg.stride) {
            write!(w, "{},{}", fmt_f64(grid.x(j)), fmt_f64(total.density()[j]))?;
            for b in &branches {
                write!(w, ",{}", fmt_f64(b[j].norm_sqr()))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;
    drop(screen);

    let spectra: Vec<Vec<f64>> = at_slits
        .branches()
        .iter()
        .map(|b| b.to_momentum(units.hbar).density())
        .collect();
    staged.write("momentum.csv", |w| {
        writeln!(w, "p,spec_branch1,spec_branch2,spec_branch3")?;
        for k in (0..grid.n()).step_by(cfg.momentum_stride) {
            write!(w, "{}", fmt_f64(grid.p(k, units.hbar)))?;
            for s in &spectra {
                write!(w, ",{}", fmt_f64(s[k]))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })?;

    let outcomes = cfg.basis.outcomes().map(|o| o.label()).join(",");
    let summary = [
        ("basis", cfg.basis.to_string()),
        ("branches", outcomes),
        ("c", fmt_f64(cfg.detector.overlap())),
        ("theta", fmt_f64(cfg.detector.phase())),
        ("V_theory", fmt_f64(cfg.detector.overlap())),
        ("V_measured", fmt_f64(f.visibility)),
        ("fringe_period", fmt_f64(f.fringe_period)),
        ("central_fringe_shift", fmt_f64(f.central_fringe_shift)),
        ("F_k_theory", fmt_f64(kicks.f_k_theory)),
        ("F_k_branch", fmt_f64(kicks.f_k_branch)),
        ("p0", fmt_f64(kicks.p0)),
        ("p0_measured", fmt_opt(kicks.p0_measured)),
        ("dp", fmt_f64(kicks.dp)),
        ("p_e", fmt_f64(kicks.p_e)),
        ("eq14_residual", fmt_f64(kicks.eq14_residual)),
        ("storey_lhs", fmt_f64(bound.lhs)),
        ("storey_rhs", fmt_f64(bound.rhs)),
        ("storey_satisfied", bound.satisfied.to_string()),
    ];
    staged.write("summary.txt", |w| {
        for (k, v) in &summary {
            writeln!(w, "{k}={v}")?;
        }
        Ok(())
    })?;
    for (k, v) in &summary {
        println!("{k}={v}");
    }
    staged.commit()
}

pub fn scan(cfg: &RunConfig, c_values: &[f64], out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let detectors = c_values
        .iter()
        .map(|&c| DetectorConfig::new(c, cfg.detector.phase()))
        .collect::<Result<Vec<_>, _>>()?;
    let (geom, grid, units) = (&cfg.geometry, &cfg.grid, &cfg.units);
    let slit1 = slit_state(geom, grid, Slit::One)?;
    let slit2 = slit_state(geom, grid, Slit::Two)?;
    let (psi1, psi2) = propagated_slits(geom, grid, units)?;

    let mut rows = Vec::with_capacity(detectors.len());
    for det in &detectors {
        let v = fringes(cfg, &screen_state(cfg, &psi1, &psi2, det))?.visibility;
        let at_slits = change_basis(&assemble_from(&slit1, &slit2, &build_uqsd(det)), cfg.basis);
        let k = kick_report(&at_slits, det, units, geom)?;
        log::info!("c = {}: V = {v}", det.overlap());
        rows.push([
            fmt_f64(det.overlap()),
            fmt_f64(v),
            fmt_f64(k.f_k_branch),
            fmt_opt(k.p0_measured),
            fmt_f64(k.eq14_residual),
        ]);
    }

    let mut staged = Staged::new(out)?;
    staged.write("scan.csv", |w| {
        writeln!(w, "c,V_measured,F_k_branch,p0_measured,eq14_residual")?;
        for r in &rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    })?;
    staged.commit()
}

pub fn sample(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (psi1, psi2) = propagated_slits(&cfg.geometry, &cfg.grid, &cfg.units)?;
    let screen = screen_state(cfg, &psi1, &psi2, &cfg.detector);
    drop((psi1, psi2));
    let events = sample_events(&screen, cfg.count, cfg.seed)?;
    let xs: Vec<f64> = events.iter().map(|e| e.x).collect();
    let fit = chi_square_vs_density(
        &xs,
        &screen_density(&screen),
        kickscope_core::verify::CHI_SQUARE_BINS,
    );

    let mut lines = vec![
        format!("seed={}", cfg.seed),
        format!("count={}", cfg.count),
        format!("basis={}", cfg.basis),
    ];
    for (o, p) in cfg.basis.outcomes().into_iter().zip(screen.probabilities()) {
        let k = events.iter().filter(|e| e.outcome == o).count();
        lines.push(format!("count_{}={k}", o.label()));
        lines.push(format!("probability_{}={}", o.label(), fmt_f64(p)));
    }
    lines.push(format!("chi_square={}", fmt_f64(fit.statistic)));
    lines.push(format!("chi_square_dof={}", fit.dof));
    lines.push(format!("chi_square_p={}", fmt_f64(fit.p_value)));

    let mut staged = Staged::new(out)?;
    staged.write("events.csv", |w| {
        writeln!(w, "outcome,x")?;
        for e in &events {
            writeln!(w, "{},{}", e.outcome.label(), fmt_f64(e.x))?;
        }
        Ok(())
    })?;
    staged.write("sample_summary.txt", |w| {
        for l in &lines {
            writeln!(w, "{l}")?;
        }
        Ok(())
    })?;
    for l in &lines {
        println!("{l}");
    }
    staged.commit()
}

/// Prints the check table; returns whether every check passed or was skipped.
pub fn verify(cfg: &RunConfig, tolerance_scale: f64) -> Result<bool, CliError> {
    let results = run_verification(&VerifyConfig {
        geometry: cfg.geometry,
        units: cfg.units,
        grid: cfg.grid,
        detector: cfg.detector,
        basis: cfg.basis,
        events: cfg.count,
        seed: cfg.seed,
        tolerance_scale,
    })?;
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    for r in &results {
        println!(
            "{}  {:<10} {:<width$}  {}",
            r.status, r.module, r.name, r.detail
        );
    }
    let count = |s| results.iter().filter(|r| r.status == s).count();
    let failed = count(CheckStatus::Fail);
    println!(
        "{} passed, {} failed, {} skipped",
        count(CheckStatus::Pass),
        failed,
        count(CheckStatus::Skipped)
    );
    if failed > 0 {
        eprintln!("failed checks:");
        for r in results.iter().filter(|r| r.status == CheckStatus::Fail) {
            eprintln!("  {}: {}", r.module, r.name);
        }
    }
    Ok(failed == 0)
}
