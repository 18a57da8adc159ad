use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde_json::{json, Value};
use unfold_core::crystal::{
    classify_crystal, optic_axes, optic_axis, refractive_index, singular_axes, singularity_line,
    DielectricModel, OpticAxis,
};
use unfold_core::perturb::PerturbationScalars;
use unfold_core::surface::{
    crystal_surface, hermitian_section, CrystalUnfolding, GridSpec, HermitianExample,
};
use unfold_core::unfold_symmetric::{ClassificationReport, Regime, RingRegion};
use unfold_core::validation::{run_checks, Status};
use unfold_core::Complex64;

use crate::config::RunConfig;
use crate::output::{complex, vector, write_csv, write_json};
use crate::CliError;

fn config_err(e: anyhow::Error) -> CliError {
    CliError::Config(e)
}

fn axis_json(a: &OpticAxis) -> Value {
    let dp = a.diabolic_point();
    json!({
        "axis": a.signs.to_string(),
        "s": a.s0.s(),
        "lambda0": a.lambda0,
        "refractive_index": refractive_index(a.lambda0),
        "u1": dp.u1.iter().map(|z| z.re).collect::<Vec<_>>(),
        "u2": dp.u2.iter().map(|z| z.re).collect::<Vec<_>>(),
    })
}

pub fn axes(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let model = cfg.model().map_err(config_err)?;
    let axes = optic_axes(&model).map_err(|e| config_err(e.into()))?;
    for a in &axes {
        let dp = a.diabolic_point();
        let n = refractive_index(a.lambda0).map_or("n/a".to_string(), |n| format!("{n:.16e}"));
        println!(
            "{}  s = {}  lambda0 = {:.16e}  n = {}  u1 = {}  u2 = {}",
            a.signs,
            vector(&a.s0.s()),
            a.lambda0,
            n,
            vector(&dp.u1.iter().map(|z| z.re).collect::<Vec<_>>()),
            vector(&dp.u2.iter().map(|z| z.re).collect::<Vec<_>>()),
        );
    }
    if let Some(path) = out {
        let doc =
            json!({ "eta": model.eta(), "axes": axes.iter().map(axis_json).collect::<Vec<_>>() });
        write_json(path, &doc).map_err(CliError::Runtime)?;
    }
    Ok(())
}

fn report_json(r: &ClassificationReport) -> Value {
    json!({
        "D": r.d,
        "regime": r.regime.name(),
        "im_xi": r.im_xi,
        "im_eta": r.im_eta,
        "im_zeta": r.im_zeta,
    })
}

fn singular_json(
    model: &DielectricModel,
    axis: &OpticAxis,
    report: &ClassificationReport,
) -> Value {
    if report.regime != Regime::AbsorptionDominated {
        return Value::Null;
    }
    match singular_axes(model, axis) {
        Ok(sa) => json!([sa.a, sa.b]
            .iter()
            .map(|s| json!({ "s1": s.s1, "s2": s.s2, "valid": s.is_valid(), "s": s.direction.map(|d| d.s()) }))
            .collect::<Vec<_>>()),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn line_json(model: &DielectricModel, axis: &OpticAxis) -> Value {
    match singularity_line(model, axis) {
        Ok(l) => json!({ "a": l.a, "b": l.b, "rhs": l.rhs }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn classify(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let model = cfg.scaled_model().map_err(config_err)?;
    let reports = classify_crystal(&model).map_err(|e| config_err(e.into()))?;
    let mut docs = Vec::new();
    for (axis, r) in &reports {
        println!(
            "{}  D = {:.16e}  {}  Im xi = {:.16e}  Im eta = {:.16e}  Im zeta = {:.16e}",
            axis.signs,
            r.d,
            r.regime.name(),
            r.im_xi,
            r.im_eta,
            r.im_zeta
        );
        let singular = singular_json(&model, axis, r);
        if let Some(list) = singular.as_array() {
            for (tag, s) in ["a", "b"].iter().zip(list) {
                println!(
                    "    singular axis {tag}: s1 = {:.16e}  s2 = {:.16e}{}",
                    s["s1"].as_f64().unwrap_or(f64::NAN),
                    s["s2"].as_f64().unwrap_or(f64::NAN),
                    if s["valid"].as_bool() == Some(true) {
                        ""
                    } else {
                        "  (outside the unit disk)"
                    }
                );
            }
        }
        let line = line_json(&model, axis);
        if line.get("a").is_some() {
            println!(
                "    Im c = 0 line: {:.16e} s1 + {:.16e} s2 = {:.16e}",
                line["a"].as_f64().unwrap_or(f64::NAN),
                line["b"].as_f64().unwrap_or(f64::NAN),
                line["rhs"].as_f64().unwrap_or(f64::NAN)
            );
        }
        let mut doc = axis_json(axis);
        doc["classification"] = report_json(r);
        doc["singular_axes"] = singular;
        doc["singularity_line"] = line;
        docs.push(doc);
    }
    if let Some(path) = out {
        let doc = json!({ "perturbation_scale": cfg.grid.perturbation_scale, "axes": docs });
        write_json(path, &doc).map_err(CliError::Runtime)?;
    }
    Ok(())
}

fn scalars_json(ps: &PerturbationScalars) -> Value {
    json!({
        "mu": complex(ps.mu),
        "xi": complex(ps.xi),
        "eta": complex(ps.eta),
        "zeta": complex(ps.zeta),
        "epsilon_norm": ps.epsilon_norm,
    })
}

/// The surface window, rejected up front when it leaves the unit disk.
pub fn surface_grid(cfg: &RunConfig, axis: &OpticAxis) -> Result<GridSpec, CliError> {
    let center = cfg.grid.center.unwrap_or(axis.p0());
    let grid = GridSpec::new(center, cfg.grid.half_width, cfg.grid.resolution)
        .map_err(|e| config_err(e.into()))?;
    let w = grid.half_width;
    let far = (center[0].abs() + w).hypot(center[1].abs() + w);
    if far >= 1.0 {
        return Err(config_err(anyhow::anyhow!(
            "window of half-width {w} around ({}, {}) leaves the unit disk",
            center[0],
            center[1]
        )));
    }
    Ok(grid)
}

pub fn surface(cfg: &RunConfig) -> Result<(), CliError> {
    let model = cfg.scaled_model().map_err(config_err)?;
    let signs = cfg.axis().map_err(config_err)?;
    let axis = optic_axis(&model, signs).map_err(|e| config_err(e.into()))?;
    let grid = surface_grid(cfg, &axis)?;
    let path = &cfg.output.path;

    let rows = crystal_surface(&model, &axis, &grid).map_err(|e| CliError::Runtime(e.into()))?;
    let header = unfold_core::surface::SURFACE_HEADER.join(",");
    write_csv(
        path,
        &header,
        rows.iter()
            .map(|r| r.values().iter().map(|v| format!("{v:.16e}")).collect()),
    )
    .map_err(CliError::Runtime)?;

    let unfolding = CrystalUnfolding::new(&model, &axis);
    let reports = classify_crystal(&model).map_err(|e| CliError::Runtime(e.into()))?;
    let report = reports
        .iter()
        .find(|(a, _)| a.signs == signs)
        .map(|(_, r)| *r)
        .context("axis missing from classification")
        .map_err(CliError::Runtime)?;
    let cc = unfolding
        .c_coefficients()
        .map_err(|e| CliError::Runtime(e.into()))?;
    let max_plus = rows.iter().map(|r| r.abs_err_plus()).fold(0.0, f64::max);
    let max_minus = rows.iter().map(|r| r.abs_err_minus()).fold(0.0, f64::max);
    let doc = json!({
        "axis": axis_json(&axis),
        "perturbation_scale": cfg.grid.perturbation_scale,
        "grid": { "center": grid.center, "half_width": grid.half_width, "resolution": grid.resolution },
        "rows": rows.len(),
        "scalars": scalars_json(&unfolding.scalars),
        "classification": report_json(&report),
        "c_coefficients": {
            "note": "Re c = k + l.d + q0 d1^2 + q1 d2^2 + q2 d1 d2, Im c = i0 + m.d, d = (s1 - S1, s2); the sign of Im c depends on the eigenvector basis",
            "re_constant": cc.re_constant,
            "re_linear": cc.re_linear,
            "re_quadratic": cc.re_quadratic,
            "im_constant": cc.im_constant,
            "im_linear": cc.im_linear,
            "abs_im_linear": cc.im_linear.map(f64::abs),
        },
        "singular_axes": singular_json(&model, &axis, &report),
        "singularity_line": line_json(&model, &axis),
        "max_abs_err": { "plus": max_plus, "minus": max_minus },
    });
    let sidecar = path.with_extension("json");
    write_json(&sidecar, &doc).map_err(CliError::Runtime)?;
    println!(
        "wrote {} rows to {} (max abs error {:.3e} / {:.3e}) and {}",
        rows.len(),
        path.display(),
        max_plus,
        max_minus,
        sidecar.display()
    );
    Ok(())
}

fn region_name(r: RingRegion) -> &'static str {
    match r {
        RingRegion::Inside => "inside",
        RingRegion::Outside => "outside",
        RingRegion::OnRing => "on-ring",
    }
}

pub const SECTION_HEADER: [&str; 21] = [
    "a",
    "b",
    "x",
    "y",
    "z",
    "p1",
    "p2",
    "p3",
    "re_lambda_plus",
    "re_lambda_minus",
    "im_lambda_plus",
    "im_lambda_minus",
    "re_c",
    "im_c",
    "exact_re_plus",
    "exact_re_minus",
    "exact_im_plus",
    "exact_im_minus",
    "abs_err_plus",
    "abs_err_minus",
    "region",
];

pub fn unfold_hermitian(cfg: &RunConfig) -> Result<(), CliError> {
    let h = &cfg.hermitian;
    let example = HermitianExample::new(cfg.grid.perturbation_scale);
    let (ring, rows) = hermitian_section(&example, h.half_width_radii, h.resolution)
        .map_err(|e| CliError::Runtime(e.into()))?;
    let f = |v: f64| format!("{v:.16e}");
    write_csv(
        &h.path,
        &SECTION_HEADER.join(","),
        rows.iter().map(|r| {
            let mut cells: Vec<String> = [r.a, r.b]
                .into_iter()
                .chain(r.xyz)
                .chain(r.p.iter().copied())
                .map(f)
                .collect();
            let z = |a: Complex64, b: Complex64| [a.re, b.re, a.im, b.im].map(f);
            cells.extend(z(r.lambda_plus, r.lambda_minus));
            cells.extend([f(r.re_c), f(r.im_c)]);
            cells.extend(z(r.exact_plus, r.exact_minus));
            cells.extend([f(r.abs_err_plus()), f(r.abs_err_minus())]);
            cells.push(region_name(r.region).to_string());
            cells
        }),
    )
    .map_err(CliError::Runtime)?;

    let cd = example
        .coupling()
        .map_err(|e| CliError::Runtime(e.into()))?;
    let ps = example.scalars().map_err(|e| CliError::Runtime(e.into()))?;
    let samples = ring.sample(64);
    let images = ring
        .to_parameters(&cd, &example.dp, &samples)
        .map_err(|e| CliError::Runtime(e.into()))?;
    let count = |r: RingRegion| rows.iter().filter(|row| row.region == r).count();
    let doc = json!({
        "perturbation_scale": cfg.grid.perturbation_scale,
        "scalars": scalars_json(&ps),
        "ring": {
            "center": ring.center,
            "radius": ring.radius,
            "plane_normal": ring.plane_normal,
            "frame_points": samples,
            "parameter_points": images.iter().map(|s| s.particular.clone()).collect::<Vec<_>>(),
        },
        "section": {
            "half_width_radii": h.half_width_radii,
            "resolution": h.resolution,
            "inside": count(RingRegion::Inside),
            "outside": count(RingRegion::Outside),
            "on_ring": count(RingRegion::OnRing),
        },
        "max_abs_err": {
            "plus": rows.iter().map(|r| r.abs_err_plus()).fold(0.0, f64::max),
            "minus": rows.iter().map(|r| r.abs_err_minus()).fold(0.0, f64::max),
        },
    });
    let sidecar = h.path.with_extension("json");
    write_json(&sidecar, &doc).map_err(CliError::Runtime)?;
    println!(
        "ring radius {:.6e}; wrote {} rows to {} and {}",
        ring.radius,
        rows.len(),
        h.path.display(),
        sidecar.display()
    );
    Ok(())
}

pub fn validate(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let model = cfg.scaled_model().map_err(config_err)?;
    let signs = cfg.axis().map_err(config_err)?;
    let axis = optic_axis(&model, signs).map_err(|e| config_err(e.into()))?;
    let outcomes = run_checks(
        &model,
        &axis,
        cfg.grid.perturbation_scale,
        &cfg.thresholds(),
    )
    .map_err(|e| CliError::Runtime(e.into()))?;
    for o in &outcomes {
        println!("{} {}: {}", o.status.label(), o.name, o.detail);
    }
    if let Some(path) = out {
        let doc = json!(outcomes
            .iter()
            .map(|o| json!({ "name": o.name, "status": o.status.label(), "detail": o.detail }))
            .collect::<Vec<_>>());
        write_json(path, &doc).map_err(CliError::Runtime)?;
    }
    let failed = outcomes.iter().filter(|o| o.status == Status::Fail).count();
    if failed > 0 {
        return Err(CliError::Validation(failed));
    }
    Ok(())
}

/// Default output path of a subcommand that writes a CSV.
pub fn csv_target(cfg: &mut RunConfig, hermitian: bool) -> &mut PathBuf {
    if hermitian {
        &mut cfg.hermitian.path
    } else {
        &mut cfg.output.path
    }
}

pub fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            bail!("output directory {} does not exist", dir.display());
        }
    }
    Ok(())
}
