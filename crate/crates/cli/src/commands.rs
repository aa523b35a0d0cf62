//! The experiment subcommands. Cells (tangents, configurations, frequencies)
//! run on the rayon pool and are merged back in key order.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use geocirc_core::geodesic::{geodesic_ivp, ShootOptions};
use geocirc_core::jacobi::{asymptotic_curvature, circle_profile, jacobi_ivp, riccati_residual, RiccatiQuantity};
use geocirc_core::oscillatory::{
    decay_fit, grid_nodes_required, period_integral, period_nodes_required, LatticeEigenfunction, PeriodResult,
    PhaseGrid, Window, AMPLITUDE_MODEL, DOUBLING_TOL, NODES_PER_PERIOD,
};
use geocirc_core::phase::{
    self, classify_critical, find_critical_points, Classification, CurveKind, ParamCurve, PhaseField,
};
use geocirc_core::{Error, MetricSurface};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{tangent_list, Config, PhaseSpec, TorusCurve, TorusMode};
use crate::output::{num, Output};
use crate::Failure;

pub struct Context {
    pub config: Config,
    pub out: Output,
    pub dump: bool,
}

impl Context {
    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out.dir().join(name)
    }
}

/// Maps a core error raised while computing `cell` to its exit category.
pub fn in_cell(cell: impl Into<String>) -> impl FnOnce(Error) -> Failure {
    let cell = cell.into();
    move |error| match error {
        Error::NoConvergence { .. } => Failure::NoConvergence { cell, error },
        Error::Config(msg) => Failure::Config(format!("{cell}: {msg}")),
        error => Failure::Numerical { cell, error },
    }
}

fn collect_ordered<T>(cells: Vec<Result<T, Failure>>) -> Result<Vec<T>, Failure> {
    cells.into_iter().collect()
}

pub fn curvature_k(ctx: &Context) -> Result<(), Failure> {
    let c = &ctx.config.curvature_k;
    let surface = ctx.config.checked_surface()?;
    let tangents = tangent_list(&surface, &c.tangents, c.random_tangents, ctx.config.seed)?;
    let rows = collect_ordered(
        tangents
            .par_iter()
            .enumerate()
            .map(|(i, (spec, v))| {
                let k = asymptotic_curvature(&surface, *v, c.s_max, c.richardson, c.step)
                    .map_err(in_cell(format!("tangent {i}")))?;
                Ok(vec![
                    i.to_string(),
                    num(spec.point[0]),
                    num(spec.point[1]),
                    num(spec.angle),
                    num(c.s_max),
                    num(k.value),
                    k.extrapolated.map(num).unwrap_or_default(),
                    num(k.value - k.guaranteed_upper_gap),
                ])
            })
            .collect(),
    )?;
    let tol = format!("step={};certified_gap=1/s_max", num(c.step));
    let path = ctx.out.csv(
        "curvature_k.csv",
        &["index", "x", "y", "angle", "s_max", "k", "k_richardson", "k_lower"],
        &rows,
        &tol,
    )?;
    println!(
        "{:>5}  {:>10}  {:>10}  {:>8}  {:>22}  {:>22}",
        "index", "x", "y", "angle", "k", "k_richardson"
    );
    for r in &rows {
        println!(
            "{:>5}  {:>10.6}  {:>10.6}  {:>8.5}  {:>22}  {:>22}",
            r[0], r[1], r[2], r[3], r[5], r[6]
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

pub fn circle(ctx: &Context) -> Result<(), Failure> {
    let c = &ctx.config.circle;
    if c.radii.is_empty() {
        return Err(Failure::Config("circle.radii is empty".into()));
    }
    let surface = ctx.config.checked_surface()?;
    let tangents = tangent_list(&surface, &c.tangents, c.random_tangents, ctx.config.seed)?;
    let per_tangent = collect_ordered(
        tangents
            .par_iter()
            .enumerate()
            .map(|(i, (spec, v))| {
                let mut rows = Vec::new();
                for &r in &c.radii {
                    let cell = format!("tangent {i}, r = {r}");
                    let circle = circle_profile(&surface, *v, r, c.step).map_err(in_cell(cell.clone()))?;
                    let k = asymptotic_curvature(&surface, circle.end, c.s_max, false, c.asymptotic_step)
                        .map_err(in_cell(cell))?;
                    let gap = circle.curvature - k.value;
                    rows.push(vec![
                        i.to_string(),
                        num(spec.point[0]),
                        num(spec.point[1]),
                        num(spec.angle),
                        num(r),
                        num(circle.curvature),
                        num(k.value),
                        num(gap),
                        (gap > 0.0 && gap <= 1.0 / r + 1e-4).to_string(),
                    ]);
                }
                let cell = format!("tangent {i}, Riccati");
                let circle_res = riccati_residual(&surface, *v, c.riccati_range, RiccatiQuantity::Circle, c.step)
                    .map_err(in_cell(cell.clone()))?;
                let reach = (c.s_max / 2.0).min(10.0);
                let limit_res = riccati_residual(
                    &surface,
                    *v,
                    (-reach, 0.0),
                    RiccatiQuantity::Asymptotic { s_max: c.s_max },
                    c.step,
                )
                .map_err(in_cell(cell))?;
                let riccati = vec![
                    i.to_string(),
                    num(spec.point[0]),
                    num(spec.point[1]),
                    num(spec.angle),
                    num(circle_res),
                    num(limit_res),
                ];
                Ok((rows, riccati))
            })
            .collect(),
    )?;
    let tol = format!(
        "step={};asymptotic_step={};s_max={};gap_slack=1e-4",
        num(c.step),
        num(c.asymptotic_step),
        num(c.s_max)
    );
    let (rows, riccati): (Vec<_>, Vec<_>) = per_tangent.into_iter().unzip();
    let rows: Vec<Vec<String>> = rows.into_iter().flatten().collect();
    let p1 = ctx.out.csv(
        "circle.csv",
        &[
            "index",
            "x",
            "y",
            "angle",
            "r",
            "kappa",
            "k_at_circle",
            "gap",
            "gap_within_bound",
        ],
        &rows,
        &tol,
    )?;
    let p2 = ctx.out.csv(
        "riccati.csv",
        &["index", "x", "y", "angle", "circle_residual", "asymptotic_residual"],
        &riccati,
        &tol,
    )?;
    if ctx.dump {
        let r_max = c.radii.iter().cloned().fold(0.0, f64::max);
        for (i, (_, v)) in tangents.iter().enumerate() {
            let cell = format!("tangent {i}, profile");
            let path = geodesic_ivp(&surface, *v, r_max, c.step).map_err(in_cell(cell.clone()))?;
            let sol = jacobi_ivp(&path, 0.0, 1.0).map_err(in_cell(cell))?;
            let name = format!("circle_profile_{i}.csv");
            let file = File::create(ctx.out_path(&name)).map_err(|e| Failure::Io(format!("{name}: {e}")))?;
            sol.write_csv(BufWriter::new(file))
                .map_err(|e| Failure::Io(format!("{name}: {e}")))?;
        }
    }
    println!("wrote {} and {}", p1.display(), p2.display());
    Ok(())
}

fn build_field(surface: &MetricSurface, spec: &PhaseSpec) -> Result<PhaseField, Failure> {
    let config_error = |e: Error| Failure::Config(format!("phase configuration '{}': {e}", spec.name()));
    match spec {
        PhaseSpec::Named(name) => phase::shipped(name).map_err(config_error),
        PhaseSpec::Custom(c) => {
            let base = ParamCurve::new(surface, c.curve.clone(), true, c.domain).map_err(config_error)?;
            PhaseField::deck(surface, base, c.isometry.clone(), c.window, ShootOptions::default()).map_err(config_error)
        }
    }
}

fn class_label(class: &Result<Classification, Error>) -> (String, String) {
    match class {
        Ok(Classification::NonDegenerate { margin, .. }) => ("non-degenerate".into(), num(*margin)),
        Ok(Classification::Degenerate) => ("degenerate".into(), String::new()),
        Err(Error::Precondition(_)) => ("precondition-failed".into(), String::new()),
        Err(e) => (format!("error: {e}"), String::new()),
    }
}

pub fn phase(ctx: &Context) -> Result<(), Failure> {
    let c = &ctx.config.phase;
    let needs_surface = c.configs.iter().any(|s| matches!(s, PhaseSpec::Custom(_)));
    let surface = if needs_surface {
        ctx.config.checked_surface()?
    } else {
        ctx.config.surface.build()?
    };
    let fields = c
        .configs
        .iter()
        .map(|spec| Ok((spec.name().to_string(), build_field(&surface, spec)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let searches = collect_ordered(
        fields
            .par_iter()
            .map(|(name, field)| {
                let search = find_critical_points(field, c.grid, c.newton_tol)
                    .map_err(in_cell(format!("configuration {name}")))?;
                let classes: Vec<_> = search.points.iter().map(|p| classify_critical(p, c.epsilon)).collect();
                Ok((search, classes))
            })
            .collect(),
    )?;
    let mut rows = Vec::new();
    let mut report = Vec::new();
    for ((name, _), (search, classes)) in fields.iter().zip(&searches) {
        let mut points = Vec::new();
        for (k, (p, class)) in search.points.iter().zip(classes).enumerate() {
            let (label, margin) = class_label(class);
            rows.push(vec![
                name.clone(),
                k.to_string(),
                num(p.location[0]),
                num(p.location[1]),
                num(p.phi),
                num(p.gradient_norm),
                num(p.hessian[0][0]),
                num(p.hessian[0][1]),
                num(p.hessian[1][1]),
                num(p.det),
                num(p.mixed_bound),
                p.mixed_bound_ok.to_string(),
                label.clone(),
                margin,
                search.degenerate_line.to_string(),
            ]);
            let mut entry = serde_json::to_value(p).expect("report serializes");
            entry["classification"] = json!(label);
            points.push(entry);
        }
        report.push(json!({ "config": name, "degenerate_line": search.degenerate_line, "points": points }));
    }
    let tol = format!(
        "shoot_step={};shoot_tol={};newton_tol={};epsilon={};grid={}",
        num(ShootOptions::default().step),
        num(ShootOptions::default().tol),
        num(c.newton_tol),
        num(c.epsilon),
        c.grid
    );
    let p1 = ctx.out.csv(
        "phase_critical.csv",
        &[
            "config",
            "index",
            "s",
            "t",
            "phi",
            "gradient_norm",
            "h_ss",
            "h_st",
            "h_tt",
            "det",
            "mixed_bound",
            "mixed_bound_ok",
            "classification",
            "margin",
            "degenerate_line",
        ],
        &rows,
        &tol,
    )?;
    let p2 = ctx.out.json("phase_report.json", json!({ "configs": report }), &tol)?;
    println!("wrote {} and {}", p1.display(), p2.display());

    if ctx.dump {
        for (name, field) in &fields {
            let file_name = format!("phase_heatmap_{name}.csv");
            let file = File::create(ctx.out_path(&file_name)).map_err(|e| Failure::Io(format!("{file_name}: {e}")))?;
            field
                .write_heatmap(c.heatmap, BufWriter::new(file))
                .map_err(|e| Failure::Io(format!("{file_name}: {e}")))?;
        }
    }

    let mut sweep_rows = Vec::new();
    let mut fits = Vec::new();
    for sweep in &c.sweeps {
        let field = match fields.iter().find(|(n, _)| *n == sweep.config) {
            Some((_, f)) => f.clone(),
            None => build_field(&surface, &PhaseSpec::Named(sweep.config.clone()))?,
        };
        let lambdas = sweep.lambda.values()?;
        let top = lambdas.iter().cloned().fold(0.0, f64::max);
        let cell = format!("sweep over {}", sweep.config);
        let grid = PhaseGrid::new(
            &field,
            &sweep.window_s,
            &sweep.window_t,
            grid_nodes_required(&sweep.window_s, &sweep.window_t, top),
        )
        .map_err(in_cell(cell.clone()))?;
        let results = grid
            .sweep(&lambdas)
            .into_iter()
            .zip(&lambdas)
            .map(|(r, l)| r.map_err(in_cell(format!("{cell}, lambda = {l}"))))
            .collect::<Result<Vec<_>, _>>()?;
        for r in &results {
            let mut row = vec![sweep.config.clone()];
            row.extend(result_row(r));
            sweep_rows.push(row);
        }
        fits.push(fit_json(&sweep.config, &results));
    }
    if !c.sweeps.is_empty() {
        let tol = format!(
            "doubling_tol={};nodes_per_period={}",
            num(DOUBLING_TOL),
            num(NODES_PER_PERIOD)
        );
        let mut header = vec!["config"];
        header.extend(RESULT_HEADER);
        let p1 = ctx.out.csv("phase_sweep.csv", &header, &sweep_rows, &tol)?;
        let p2 = ctx.out.json(
            "phase_sweep_fit.json",
            json!({ "amplitude_model": AMPLITUDE_MODEL, "fits": fits }),
            &tol,
        )?;
        println!("wrote {} and {}", p1.display(), p2.display());
    }
    Ok(())
}

const RESULT_HEADER: [&str; 6] = ["lambda", "re", "im", "abs", "nodes", "err"];

fn result_row(r: &PeriodResult) -> Vec<String> {
    vec![
        num(r.lambda),
        num(r.value.re),
        num(r.value.im),
        num(r.value.norm()),
        r.nodes.to_string(),
        num(r.error),
    ]
}

fn fit_json(label: &str, results: &[PeriodResult]) -> Value {
    let series: Vec<(f64, f64)> = results.iter().map(|r| (r.lambda, r.value.norm())).collect();
    match decay_fit(&series) {
        Ok(fit) => json!({ "series": label, "slope": fit.slope, "intercept": fit.intercept, "residual": fit.residual }),
        Err(e) => {
            json!({ "series": label, "slope": null, "intercept": null, "residual": null, "error": e.to_string() })
        }
    }
}

fn integer_lambda(lambda: f64) -> Result<i64, Failure> {
    if lambda.fract() != 0.0 {
        return Err(Failure::Config(format!(
            "single-mode eigenfunctions need integer lambda, got {lambda}"
        )));
    }
    Ok(lambda as i64)
}

fn torus_eigenfunction(mode: TorusMode, lambda: f64, seed: u64, index: usize) -> Result<LatticeEigenfunction, Failure> {
    let eig = match mode {
        TorusMode::X => LatticeEigenfunction::single_mode([integer_lambda(lambda)?, 0]),
        TorusMode::Y => LatticeEigenfunction::single_mode([0, integer_lambda(lambda)?]),
        TorusMode::Random => {
            let n = (lambda * lambda).round();
            if (n - lambda * lambda).abs() > 1e-9 * n.max(1.0) {
                return Err(Failure::Config(format!(
                    "lambda² must be an integer, got {}",
                    lambda * lambda
                )));
            }
            // one independent stream per frequency keeps results thread-count independent
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(index as u64);
            LatticeEigenfunction::random(n as u64, &mut rng)
        }
    };
    eig.map_err(|e| Failure::Config(format!("lambda = {lambda}: {e}")))
}

pub fn torus_curve(curve: TorusCurve) -> ParamCurve {
    let kind = match curve {
        TorusCurve::Circle => CurveKind::Circle {
            center: [0.0, 0.0],
            radius: 1.0,
        },
        TorusCurve::Line => CurveKind::Line {
            point: [0.0, 0.0],
            direction: [1.0, 0.0],
        },
    };
    ParamCurve::unit_speed(&MetricSurface::flat(), kind).expect("built-in torus curves are valid")
}

pub fn torus_decay(ctx: &Context) -> Result<(), Failure> {
    let c = &ctx.config.torus_decay;
    if c.nodes_factor == 0 {
        return Err(Failure::Config("torus_decay.nodes_factor must be at least 1".into()));
    }
    c.window.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let curve = torus_curve(c.curve);
    let lambdas = c.lambda.values()?;
    let eigs = lambdas
        .iter()
        .enumerate()
        .map(|(i, &l)| torus_eigenfunction(c.mode, l, ctx.config.seed, i))
        .collect::<Result<Vec<_>, _>>()?;
    let window: Window = c.window;
    let results = collect_ordered(
        eigs.par_iter()
            .map(|eig| {
                let cell = format!("lambda = {}", eig.lambda());
                let nodes = period_nodes_required(&curve, &window, eig.lambda()).map_err(in_cell(cell.clone()))?
                    * c.nodes_factor;
                period_integral(&curve, &window, eig, nodes).map_err(in_cell(cell))
            })
            .collect(),
    )?;
    let rows: Vec<Vec<String>> = results.iter().map(result_row).collect();
    let tol = format!(
        "doubling_tol={};nodes_per_period={};nodes_factor={}",
        num(DOUBLING_TOL),
        num(NODES_PER_PERIOD),
        c.nodes_factor
    );
    let p1 = ctx.out.csv("torus_decay.csv", &RESULT_HEADER, &rows, &tol)?;
    let fit = fit_json("torus", &results);
    let p2 = ctx.out.json("torus_decay_fit.json", fit.clone(), &tol)?;
    match fit["slope"].as_f64() {
        Some(slope) => println!("fitted slope {slope:.6} over {} frequencies", results.len()),
        None => println!("no decay fit: {}", fit["error"]),
    }
    println!("wrote {} and {}", p1.display(), p2.display());
    Ok(())
}
