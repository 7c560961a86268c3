//! One function per subcommand. Each returns a table plus a JSON summary;
//! writing artifacts is left to the caller.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use tqrm::gfunction::{self, RootKind, RootOptions, SeriesPolicy};
use tqrm::meanfield::{self, Branch};
use tqrm::model::{self, FockTruncation, Frame, ModelParams, Sector};
use tqrm::phonon::{self, PhaseSpaceGrid, ReferenceKind, ReferenceState};
use tqrm::physparams::{self, LbConvention, PhysicalIonParams};
use tqrm::spectra;

use crate::config::Settings;
use crate::output::{col, Cell, Table, Unit};
use crate::svg::{self, Series};
use crate::CliError;

pub struct Outcome {
    pub table: Table,
    pub summary: Value,
    pub svg: Option<String>,
    /// Lines echoed to stdout.
    pub report: Vec<String>,
    /// Set when a verification check exceeded its tolerance.
    pub failure: Option<String>,
}

impl Outcome {
    fn new(table: Table, summary: Value) -> Self {
        Self { table, summary, svg: None, report: Vec::new(), failure: None }
    }
}

pub fn parse_sector(name: &str) -> Result<Sector, CliError> {
    Ok(match name {
        "full" => Sector::Full,
        "triplet" => Sector::TripletRotated,
        "singlet" => Sector::SingletRotated,
        "collective" => Sector::ResonantCollective,
        "plus" => Sector::ResonantPlus,
        "minus" => Sector::ResonantMinus,
        other => {
            return Err(CliError::Config(format!(
                "unknown sector {other:?} (full, triplet, singlet, collective, plus, minus)"
            )))
        }
    })
}

pub fn physical_params(s: &Settings) -> Result<PhysicalIonParams, CliError> {
    let d = PhysicalIonParams::strontium_example();
    let convention = match s.get("convention").unwrap_or("trap") {
        "trap" => LbConvention::TrapMode,
        "breathing" => LbConvention::BreathingMode,
        other => return Err(CliError::Config(format!("unknown convention {other:?} (trap, breathing)"))),
    };
    let p = PhysicalIonParams {
        mass_amu: s.parsed("mass", d.mass_amu)?,
        net_charge: s.parsed("charge", d.net_charge)?,
        nu: s.parsed("nu", d.nu)?,
        omega_drive: s.parsed("omega_drive", d.omega_drive)?,
        vd_slope: s.parsed("vd_slope", d.vd_slope)?,
        lb_convention: convention,
    };
    p.validate()?;
    Ok(p)
}

/// Angular frequency of one model energy unit under `--si`, else 1.
pub fn energy_scale(s: &Settings) -> Result<f64, CliError> {
    if s.flag("si")? {
        Ok(physparams::derive_trap(&physical_params(s)?)?.omega_breathing)
    } else {
        Ok(1.0)
    }
}

fn sweep_error(g: f64) -> impl Fn(tqrm::Error) -> tqrm::Error {
    move |e| tqrm::Error::Sweep { g, source: Box::new(e) }
}

fn table(s: &Settings, columns: Vec<crate::output::Column>) -> Result<Table, CliError> {
    let mut t = Table::new(columns);
    t.energy_scale = energy_scale(s)?;
    Ok(t)
}

fn plot_columns(table: &Table, x: &str, ys: &[&str]) -> Vec<Series> {
    let xi = table.column_index(x).expect("x column");
    ys.iter()
        .filter_map(|name| table.column_index(name).map(|yi| (name, yi)))
        .map(|(name, yi)| {
            let pts = (0..table.rows.len()).filter_map(|r| Some((table.value(r, xi)?, table.value(r, yi)?))).collect();
            Series::line(*name, pts)
        })
        .collect()
}

pub fn spectrum(s: &Settings) -> Result<Outcome, CliError> {
    let base = s.model_params()?;
    let tr = s.truncation()?;
    let sector = parse_sector(s.get("sector").unwrap_or("full"))?;
    let levels: usize = s.parsed("levels", 10)?;
    if levels == 0 {
        return Err(CliError::Config("levels must be at least 1".into()));
    }
    let grid = s.couplings()?;
    let rows = spectra::spectrum_sweep(&base, &grid, &tr, sector, levels)?;

    let names: Vec<String> = (0..levels).map(|k| format!("E{k}")).collect();
    let mut columns = vec![col("g", Unit::Energy, "coupling")];
    columns.extend(names.iter().map(|n| col(n.as_str(), Unit::Energy, "eigenvalue, ascending")));
    let mut table = table(s, columns)?;
    for row in &rows {
        let mut cells = vec![Cell::Num(row.g)];
        cells.extend((0..levels).map(|k| row.values.get(k).copied().into()));
        table.push(cells);
    }
    let summary = json!({ "sector": sector, "levels": levels, "points": rows.len() });
    let mut out = Outcome::new(table, summary);
    if rows.len() > 1 {
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let series = plot_columns(&out.table, "g", &names);
        out.svg = Some(svg::line_plot(&format!("{sector:?} spectrum"), "g", "E", &series));
    }
    Ok(out)
}

fn scan_window(s: &Settings) -> Result<(f64, f64), CliError> {
    let (emin, emax) = (s.parsed("emin", -1.0)?, s.parsed("emax", 3.0)?);
    if !(emin < emax) {
        return Err(CliError::Config(format!("need emin < emax (got {emin}, {emax})")));
    }
    Ok((emin, emax))
}

pub fn gfun(s: &Settings) -> Result<Outcome, CliError> {
    let p = s.model_params()?;
    let (emin, emax) = scan_window(s)?;
    let step: f64 = s.parsed("estep", gfunction::DEFAULT_SCAN_STEP)?;
    if !(step > 0.0) {
        return Err(CliError::Config("estep must be positive".into()));
    }
    // Surface ZeroCoupling / ResonantRedirect instead of an all-invalid scan.
    if let Err(e @ (tqrm::Error::ZeroCoupling | tqrm::Error::ResonantRedirect)) = gfunction::g_function(0.5 * (emin + emax), &p, &SeriesPolicy::default()) { return Err(e.into()) }
    let points = gfunction::scan(&p, emin, emax, step, &SeriesPolicy::default());
    let mut table = table(s, vec![
        col("E", Unit::Energy, "trial energy"),
        col("G", Unit::Dimensionless, "determinant G-function"),
        col("G_normalized", Unit::Dimensionless, "G divided by its column norms"),
        col("valid", Unit::Dimensionless, "1 outside pole guard bands and when the series converged"),
    ])?;
    for pt in &points {
        let (g, gn) = if pt.valid { (pt.value.into(), pt.normalized.into()) } else { (Cell::Empty, Cell::Empty) };
        table.push(vec![pt.energy.into(), g, gn, pt.valid.into()]);
    }
    let poles = gfunction::poles_in(&p, emin, emax);
    let summary = json!({
        "params": p,
        "poles": poles,
        "excluded_fraction": gfunction::excluded_fraction(&p, emin, emax, gfunction::DEFAULT_POLE_GUARD),
    });
    let mut out = Outcome::new(table, summary);
    let series = plot_columns(&out.table, "E", &["G_normalized"]);
    out.svg = Some(svg::line_plot("G-function", "E", "G (normalized)", &series));
    Ok(out)
}

pub fn roots(s: &Settings) -> Result<Outcome, CliError> {
    let p = s.model_params()?;
    let (emin, emax) = scan_window(s)?;
    let tr = s.truncation()?;
    let opts = RootOptions {
        scan_step: s.parsed("estep", gfunction::DEFAULT_SCAN_STEP)?,
        oracle: Some(tr),
        ..RootOptions::default()
    };
    let records = gfunction::find_roots(&p, emin, emax, &opts)?;
    let mut table = table(s, vec![
        col("E_root", Unit::Energy, "root of G"),
        col("residual", Unit::Dimensionless, "|normalized G| at the root"),
        col("bracket_width", Unit::Energy, "final bisection bracket"),
        col("ed_match", Unit::Energy, "distance to the nearest diagonalization level"),
        col("kind", Unit::Text, "regular root or exceptional candidate near a pole"),
    ])?;
    for r in &records {
        let kind = match r.kind {
            RootKind::Regular => "regular",
            RootKind::ExceptionalCandidate => "exceptional_candidate",
        };
        table.push(vec![
            r.energy.into(),
            r.residual_g.into(),
            r.bracket_width.into(),
            r.ed_match.into(),
            Cell::Text(kind.into()),
        ]);
    }
    let singlet: Vec<f64> = gfunction::singlet_energies(&p, 64)?.into_iter().filter(|e| (emin..=emax).contains(e)).collect();
    let summary = json!({ "params": p, "roots": records.len(), "oracle_n_max": tr.n_max, "singlet_levels": singlet });
    let mut out = Outcome::new(table, summary);
    let mut g_curve = Vec::new();
    for pt in gfunction::scan(&p, emin, emax, opts.scan_step.max(1e-3), &SeriesPolicy::default()) {
        if pt.valid {
            g_curve.push((pt.energy * out.table.energy_scale, pt.normalized));
        }
    }
    let markers = records.iter().map(|r| (r.energy * out.table.energy_scale, 0.0)).collect();
    out.svg = Some(svg::line_plot(
        "G-function roots",
        "E",
        "G (normalized)",
        &[Series::line("G", g_curve), Series::markers("roots", markers)],
    ));
    Ok(out)
}

pub fn meanfield(s: &Settings) -> Result<Outcome, CliError> {
    let base = s.model_params()?;
    let mut table = table(s, vec![
        col("g", Unit::Energy, "coupling"),
        col("alpha", Unit::Dimensionless, "minimizing displacement"),
        col("E", Unit::Energy, "mean-field ground energy"),
        col("dE_dg", Unit::Dimensionless, "first derivative of E in g"),
        col("d2E_dg2", Unit::PerOmega, "second derivative of E in g"),
    ])?;
    let summary = if s.get("gscan").is_some() {
        let grid = s.couplings()?;
        let curve = meanfield::ground_energy_curve(&base, &grid)?;
        for i in 0..curve.g.len() {
            table.push(vec![
                curve.g[i].into(),
                curve.alpha[i].into(),
                curve.energy[i].into(),
                curve.d1[i].into(),
                curve.d2[i].into(),
            ]);
        }
        json!({
            "critical_coupling": base.critical_coupling(),
            "transition_cell": curve.transition_cell,
            "max_d2_jump": curve.max_jump,
        })
    } else {
        let r = meanfield::minimize_alpha(&base)?;
        table.push(vec![base.g.into(), r.alpha_star.into(), r.energy.into(), Cell::Empty, Cell::Empty]);
        let branch = match r.branch {
            Branch::Subradiant => "subradiant",
            Branch::SuperradiantPlus => "superradiant_plus",
            Branch::SuperradiantMinus => "superradiant_minus",
            Branch::DetunedUnique => "detuned_unique",
        };
        json!({
            "critical_coupling": base.critical_coupling(),
            "branch": branch,
            "degenerate": r.degenerate,
            "superradiant_amplitude": meanfield::superradiant_amplitude(&base),
        })
    };
    let mut out = Outcome::new(table, summary);
    if out.table.rows.len() > 1 {
        let series = plot_columns(&out.table, "g", &["alpha"]);
        out.svg = Some(svg::line_plot("mean-field displacement", "g", "alpha", &series));
    }
    Ok(out)
}

struct GroundRow {
    g: f64,
    energy: f64,
    nb: f64,
    purity: f64,
    var_x: f64,
    var_p: f64,
    x_mean: f64,
    n_max_used: usize,
}

fn ground_rows(s: &Settings) -> Result<(ModelParams, Vec<GroundRow>), CliError> {
    let base = s.model_params()?;
    let tr = s.truncation()?;
    let grid = s.couplings()?;
    let rows = grid
        .par_iter()
        .map(|&g| {
            let gs = spectra::converged_ground_state(&base.with_g(g), &tr, Sector::Full).map_err(sweep_error(g))?;
            let rho = gs.density_matrix().map_err(sweep_error(g))?;
            let (var_x, var_p) = phonon::quadrature_variances(&rho);
            Ok(GroundRow {
                g,
                energy: gs.energy,
                nb: rho.mean_number(),
                purity: phonon::purity(&rho),
                var_x,
                var_p,
                x_mean: phonon::mean_position(&rho),
                n_max_used: gs.n_max_used,
            })
        })
        .collect::<tqrm::Result<Vec<_>>>()?;
    Ok((base, rows))
}

const OBSERVABLES: &[&str] = &["E", "nb", "purity", "var_x", "var_p", "x_mean", "n_max_used"];

pub fn ground(s: &Settings) -> Result<Outcome, CliError> {
    let chosen: Vec<&str> = match s.get("observable").unwrap_or("all") {
        "all" => OBSERVABLES.to_vec(),
        list => list.split(',').map(str::trim).map(|o| if o == "energy" { "E" } else { o }).collect(),
    };
    if let Some(bad) = chosen.iter().find(|o| !OBSERVABLES.contains(o)) {
        return Err(CliError::Config(format!("unknown observable {bad:?} (all, energy, {})", OBSERVABLES[1..].join(", "))));
    }
    let (base, rows) = ground_rows(s)?;
    let all = [
        col("E", Unit::Energy, "ground energy"),
        col("nb", Unit::Dimensionless, "phonon number <a†a> of the reduced state"),
        col("purity", Unit::Dimensionless, "Tr rho_b^2"),
        col("var_x", Unit::Dimensionless, "position variance, x = (a + a†)/√2"),
        col("var_p", Unit::Dimensionless, "momentum variance, p = i(a† − a)/√2"),
        col("x_mean", Unit::Dimensionless, "<x>"),
        col("n_max_used", Unit::Dimensionless, "converged phonon cutoff"),
    ];
    let picked: Vec<usize> = chosen.iter().map(|o| OBSERVABLES.iter().position(|x| x == o).unwrap()).collect();
    let mut columns = vec![col("g", Unit::Energy, "coupling")];
    columns.extend(picked.iter().map(|&i| all[i].clone()));
    let mut table = table(s, columns)?;
    for r in &rows {
        let cells: [Cell; 7] = [
            r.energy.into(),
            r.nb.into(),
            r.purity.into(),
            r.var_x.into(),
            r.var_p.into(),
            r.x_mean.into(),
            r.n_max_used.into(),
        ];
        let mut row = vec![Cell::Num(r.g)];
        row.extend(picked.iter().map(|&i| cells[i].clone()));
        table.push(row);
    }
    let summary = json!({ "params": base, "critical_coupling": base.critical_coupling(), "points": rows.len() });
    let mut out = Outcome::new(table, summary);
    if rows.len() > 1 {
        let names: Vec<&str> = chosen.iter().copied().filter(|&o| o != "n_max_used").collect();
        let series = plot_columns(&out.table, "g", &names);
        out.svg = Some(svg::line_plot("ground-state observables", "g", "value", &series));
    }
    Ok(out)
}

fn single_ground(s: &Settings) -> Result<(ModelParams, spectra::GroundState, tqrm::PhononDensityMatrix), CliError> {
    if s.get("gscan").is_some() {
        return Err(CliError::Config("this command takes a single --g, not --gscan".into()));
    }
    let p = s.model_params()?;
    let gs = spectra::converged_ground_state(&p, &s.truncation()?, Sector::Full)?;
    let rho = gs.density_matrix()?;
    Ok((p, gs, rho))
}

pub fn density(s: &Settings) -> Result<Outcome, CliError> {
    let (p, gs, rho) = single_ground(s)?;
    let xs = phonon::linspace(s.parsed("xmin", -8.0)?, s.parsed("xmax", 8.0)?, s.parsed("nx", 321)?);
    if xs.len() < 2 || !(xs[0] < xs[xs.len() - 1]) {
        return Err(CliError::Config("need xmin < xmax and nx >= 2".into()));
    }
    let rho_x = phonon::position_density(&rho, &xs);
    let mut table = table(s, vec![
        col("x", Unit::Dimensionless, "position quadrature (a + a†)/√2"),
        col("rho", Unit::Dimensionless, "position probability density <x|rho_b|x>"),
    ])?;
    for (x, r) in xs.iter().zip(&rho_x) {
        table.push(vec![(*x).into(), (*r).into()]);
    }
    let summary = json!({ "params": p, "energy": gs.energy, "n_max_used": gs.n_max_used, "mean_number": rho.mean_number() });
    let mut out = Outcome::new(table, summary);
    let series = plot_columns(&out.table, "x", &["rho"]);
    out.svg = Some(svg::line_plot("phonon position density", "x", "rho(x)", &series));
    Ok(out)
}

pub fn wigner(s: &Settings) -> Result<Outcome, CliError> {
    let (p, gs, rho) = single_ground(s)?;
    let d = PhaseSpaceGrid::default();
    let grid = PhaseSpaceGrid {
        x_min: s.parsed("xmin", d.x_min)?,
        x_max: s.parsed("xmax", d.x_max)?,
        p_min: s.parsed("pmin", d.p_min)?,
        p_max: s.parsed("pmax", d.p_max)?,
        nx: s.parsed("nx", d.nx)?,
        np: s.parsed("np", d.np)?,
    };
    grid.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let w = phonon::wigner(&rho, &grid)?;
    let (xs, ps) = (grid.xs(), grid.ps());
    let mut table = table(s, vec![
        col("x", Unit::Dimensionless, "position quadrature"),
        col("p", Unit::Dimensionless, "momentum quadrature"),
        col("W", Unit::Dimensionless, "Wigner function W(x, p)"),
    ])?;
    for (i, x) in xs.iter().enumerate() {
        for (j, pv) in ps.iter().enumerate() {
            table.push(vec![(*x).into(), (*pv).into(), w.values[(i, j)].into()]);
        }
    }
    let summary = json!({
        "params": p,
        "energy": gs.energy,
        "n_max_used": gs.n_max_used,
        "grid": grid,
        "min_W": w.min(),
        "integral": w.integral(),
    });
    let mut out = Outcome::new(table, summary);
    out.report.push(format!("min W = {:.6e}, integral = {:.6}", w.min(), w.integral()));
    out.svg = Some(svg::heatmap("Wigner function", "x", "p", &xs, &ps, |i, j| w.values[(i, j)]));
    Ok(out)
}

/// Reference state for `fidelity`; `auto` picks the mean-field prediction.
fn reference_kind(s: &Settings, p: &ModelParams) -> Result<(ReferenceKind, &'static str), CliError> {
    let alpha = match s.optional::<f64>("alpha")? {
        Some(a) => a,
        None => meanfield::minimize_alpha(p)?.alpha_star,
    };
    Ok(match s.get("reference").unwrap_or("auto") {
        "auto" if p.is_resonant() => (ReferenceKind::Mixture(alpha.abs()), "mixture"),
        "auto" => (ReferenceKind::Coherent(alpha), "coherent"),
        "vacuum" => (ReferenceKind::Vacuum, "vacuum"),
        "coherent" => (ReferenceKind::Coherent(alpha), "coherent"),
        "cat-plus" => (ReferenceKind::CatPlus(alpha), "cat-plus"),
        "cat-minus" => (ReferenceKind::CatMinus(alpha), "cat-minus"),
        "mixture" => (ReferenceKind::Mixture(alpha), "mixture"),
        other => {
            return Err(CliError::Config(format!(
                "unknown reference {other:?} (auto, vacuum, coherent, cat-plus, cat-minus, mixture)"
            )))
        }
    })
}

fn reference_alpha(kind: ReferenceKind) -> f64 {
    match kind {
        ReferenceKind::Vacuum => 0.0,
        ReferenceKind::Coherent(a) | ReferenceKind::CatPlus(a) | ReferenceKind::CatMinus(a) | ReferenceKind::Mixture(a) => a,
    }
}

pub fn fidelity(s: &Settings) -> Result<Outcome, CliError> {
    let base = s.model_params()?;
    let tr = s.truncation()?;
    let grid = s.couplings()?;
    let rows = grid
        .par_iter()
        .map(|&g| -> Result<(f64, f64, f64, f64, &'static str), CliError> {
            let p = base.with_g(g);
            let (kind, label) = reference_kind(s, &p)?;
            let gs = spectra::converged_ground_state(&p, &tr, Sector::Full).map_err(sweep_error(g))?;
            let rho = gs.density_matrix().map_err(sweep_error(g))?;
            let sigma = phonon::reference_density(&ReferenceState::new(kind, gs.n_max_used)).map_err(sweep_error(g))?;
            let f = phonon::fidelity(&rho, &sigma).map_err(sweep_error(g))?;
            Ok((g, f, phonon::purity(&rho), reference_alpha(kind), label))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = table(s, vec![
        col("g", Unit::Energy, "coupling"),
        col("fidelity", Unit::Dimensionless, "Uhlmann fidelity between rho_b and the reference"),
        col("purity", Unit::Dimensionless, "Tr rho_b^2"),
        col("alpha_ref", Unit::Dimensionless, "displacement of the reference state"),
        col("reference", Unit::Text, "reference state family"),
    ])?;
    for (g, f, pur, a, label) in &rows {
        table.push(vec![(*g).into(), (*f).into(), (*pur).into(), (*a).into(), Cell::Text(label.to_string())]);
    }
    let summary = json!({ "params": base, "points": rows.len() });
    let mut out = Outcome::new(table, summary);
    if rows.len() > 1 {
        let series = plot_columns(&out.table, "g", &["fidelity", "purity"]);
        out.svg = Some(svg::line_plot("fidelity and purity", "g", "value", &series));
    }
    Ok(out)
}

pub fn physical(s: &Settings) -> Result<Outcome, CliError> {
    let p = physical_params(s)?;
    let detuning: f64 = s.parsed("detuning", 0.0)?;
    let mut table = table(s, vec![
        col("convention", Unit::Text, "oscillator-length convention"),
        col("l0", Unit::Metre, "equilibrium separation"),
        col("omega_breathing", Unit::RadPerSecond, "breathing-mode frequency √3 ν"),
        col("l_b", Unit::Metre, "oscillator length"),
        col("g", Unit::RadPerSecond, "coupling l_b |V'_d| / 4"),
        col("g_c", Unit::RadPerSecond, "critical coupling"),
        col("ratio", Unit::Dimensionless, "g / g_c"),
    ])?;
    let mut report = Vec::new();
    for (label, conv) in [("trap", LbConvention::TrapMode), ("breathing", LbConvention::BreathingMode)] {
        let d = physparams::derive_trap(&p.with_convention(conv))?;
        table.push(vec![
            Cell::Text(label.into()),
            d.l0.into(),
            d.omega_breathing.into(),
            d.l_b.into(),
            d.g.into(),
            d.g_c.into(),
            d.ratio.into(),
        ]);
        report.push(format!(
            "{label:>9}: l0 = {:.4} um, l_b = {:.4e} m, g = 2pi x {:.4} kHz, g_c = 2pi x {:.4} kHz, g/g_c = {:.4}",
            d.l0 * 1e6,
            d.l_b,
            d.g / (2.0 * std::f64::consts::PI * 1e3),
            d.g_c / (2.0 * std::f64::consts::PI * 1e3),
            d.ratio
        ));
    }
    let normalized = physparams::model_params_from_physical(&p, detuning)?;
    let normalized_json = json!({ "params": normalized.params, "scale_rad_per_s": normalized.scale });
    report.push(serde_json::to_string(&normalized_json).expect("serializable"));
    let summary = json!({ "input": p, "detuning": detuning, "normalized": normalized_json });
    let mut out = Outcome::new(table, summary);
    out.report = report;
    Ok(out)
}

pub const REDUCTION_TOL: f64 = 1e-14;
pub const ASSEMBLY_TOL: f64 = 1e-13;
pub const COMMUTATOR_TOL: f64 = 1e-12;
pub const SPECTRUM_TOL: f64 = 1e-10;

pub fn verify(s: &Settings, what: &str) -> Result<Outcome, CliError> {
    match what {
        "appendix" => verify_appendix(s),
        "symmetry" => verify_symmetry(s),
        other => Err(CliError::Config(format!("unknown check {other:?} (appendix, symmetry)"))),
    }
}

fn check_table() -> Table {
    Table::new(vec![
        col("check", Unit::Text, "identity or symmetry"),
        col("residual", Unit::Dimensionless, "max-abs residual"),
        col("tolerance", Unit::Dimensionless, "acceptance threshold"),
        col("pass", Unit::Dimensionless, "1 when residual <= tolerance"),
    ])
}

fn finish_checks(table: Table, summary: Value) -> Outcome {
    let mut report = Vec::new();
    let mut failed = Vec::new();
    for row in &table.rows {
        if let [Cell::Text(name), Cell::Num(r), Cell::Num(tol), _] = &row[..] {
            let pass = r <= tol;
            report.push(format!("{name}: residual {r:.3e} (tol {tol:.0e}) {}", if pass { "ok" } else { "FAILED" }));
            if !pass {
                failed.push(name.clone());
            }
        }
    }
    let mut out = Outcome::new(table, summary);
    out.report = report;
    out.failure = (!failed.is_empty()).then(|| format!("checks above tolerance: {}", failed.join(", ")));
    out
}

fn verify_appendix(s: &Settings) -> Result<Outcome, CliError> {
    let g: f64 = s.parsed("g", 1.0)?;
    let tr = s.truncation()?;
    let small = FockTruncation::new(tr.n_max.min(12))?;
    let reduction = model::verify_tripartite_reduction(g, &tr)?;
    let assembly = model::verify_appendix_assembly(g, 0.1, &small)?;
    let mut table = check_table();
    for (name, r, tol) in [
        ("tripartite_reduction", reduction, REDUCTION_TOL),
        ("assembly_breathing", assembly.breathing_residual, ASSEMBLY_TOL),
        ("assembly_cm", assembly.cm_residual, ASSEMBLY_TOL),
        ("assembly_cm_symmetric", assembly.cm_symmetric_projection, ASSEMBLY_TOL),
    ] {
        table.push(vec![Cell::Text(name.into()), r.into(), tol.into(), (r <= tol).into()]);
    }
    let summary = json!({ "g": g, "n_max": tr.n_max, "assembly": assembly });
    Ok(finish_checks(table, summary))
}

fn verify_symmetry(s: &Settings) -> Result<Outcome, CliError> {
    let base = s.model_params()?;
    let tr = FockTruncation::new(s.parsed("n_max", 60)?)?;
    let draws: usize = s.parsed("draws", 0)?;
    let seed: u64 = s.parsed("seed", 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = vec![base];
    for _ in 0..draws {
        cases.push(ModelParams::new(
            rng.random_range(0.5..2.0),
            rng.random_range(0.0..1.5),
            rng.random_range(-1.0..1.0),
            rng.random_range(-2.0..2.0),
        )?);
    }
    let pi = model::parity_operator(&tr)?;
    let ex = model::exchange_operator(&tr)?;
    let (mut parity, mut swap, mut spectral) = (0.0_f64, 0.0_f64, 0.0_f64);
    for p in &cases {
        for frame in [Frame::Original, Frame::Rotated] {
            swap = swap.max(model::build_hamiltonian(p, &tr, frame)?.commutator_max_norm(ex.as_matrix()));
        }
        let resonant = ModelParams::new(p.omega, p.rabi, 0.0, p.g)?;
        let hs = model::build_sector_hamiltonian(&resonant, &tr, Sector::ResonantCollective)?;
        parity = parity.max(hs.commutator_max_norm(pi.as_matrix()));
        let mut union = Vec::new();
        for sector in [Sector::ResonantCollective, Sector::ResonantPlus, Sector::ResonantMinus] {
            union.extend(spectra::sector_spectrum(&resonant, &tr, sector)?);
        }
        union.sort_by(f64::total_cmp);
        let full = spectra::sector_spectrum(&resonant, &tr, Sector::Full)?;
        let d = union.iter().zip(&full).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        spectral = spectral.max(if union.len() == full.len() { d } else { f64::INFINITY });
    }
    let mut table = check_table();
    for (name, r, tol) in [
        ("parity_commutator", parity, COMMUTATOR_TOL),
        ("exchange_commutator", swap, COMMUTATOR_TOL),
        ("resonant_sector_union", spectral, SPECTRUM_TOL),
    ] {
        table.push(vec![Cell::Text(name.into()), r.into(), tol.into(), (r <= tol).into()]);
    }
    let summary = json!({ "cases": cases, "n_max": tr.n_max, "seed": seed });
    Ok(finish_checks(table, summary))
}
