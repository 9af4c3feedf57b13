use std::f64::consts::PI;

use serde_json::json;
use surface_heights::collar_heights::{
    asymptotic_sweep, collar_height, collar_report, direct_collar_height, half_collar_height, insertion_gap,
    zero_mode_height, HalfRoute, LeadingTerm, ReportRoutes, Route, SweepOptions,
};
use surface_heights::geometry::mesh_io::{format_mesh, read_mesh};
use surface_heights::geometry::meshgen::{annulus, pants, PantsSpec};
use surface_heights::geometry::SubcollarKind;
use surface_heights::spectral_zeta::{
    flat_cylinder_height, flat_cylinder_zeta_prime, interval_height, one_d_polyakov, scaled_height, Height,
    HeightOptions,
};
use surface_heights::uniformization::{
    cylinder_polyakov_terms, flattening_factor, height_inequality_check, polyakov_alvarez_shift, round_trip,
    uniformity, uniformize, MapOptions, UniformMap, UniformType,
};
use surface_heights::verify::Suite;
use surface_heights::{CollarCylinder, FlatCylinder, HalfCollar, MetricSurface, Profile, WeightedInterval};

use crate::config::{config_error, Settings};
use crate::record::{Failure, Record};

type Run = Result<(), Failure>;

pub fn run(command: &str, s: &Settings, r: &mut Record) -> Run {
    match command {
        "det" => det(s, r),
        "collar" => collar(s, r),
        "sweep" => sweep(s, r),
        "insertion" => insertion(s, r),
        "uniformize" => uniformize_mesh(s, r),
        "polyakov" => polyakov(s, r),
        "verify" => verify(s, r),
        _ => unreachable!("unknown command {command}"),
    }
}

fn height_options(s: &Settings) -> Result<HeightOptions, Failure> {
    let mut o = HeightOptions::default();
    let m = &mut o.mellin;
    m.t_min = s.positive("t_min", Some(m.t_min))?;
    m.split = s.positive("split", Some(m.split))?;
    m.per_decade = s.count("per_decade", m.per_decade)?;
    m.fit_decades = s.positive("fit_decades", Some(m.fit_decades))?;
    m.budget = s.positive("budget", Some(m.budget))?;
    m.c3_tolerance = s.positive("c3_tolerance", Some(m.c3_tolerance))?;
    m.tail_factor = s.positive("tail_factor", Some(m.tail_factor))?;
    if m.t_min >= m.split {
        return Err(config_error("t_min", "must be below the split time").into());
    }
    let g = &mut o.grid;
    g.resolution = s.positive("resolution", Some(g.resolution))?;
    g.levels = s.count("levels", g.levels)?;
    g.min_intervals = s.count("min_intervals", g.min_intervals)?;
    g.max_intervals = s.count("max_intervals", g.max_intervals)?;
    if g.min_intervals > g.max_intervals {
        return Err(config_error("min_intervals", "exceeds max_intervals").into());
    }
    if s.raw("trace_budget").is_some() {
        o.trace_budget = Some(s.positive("trace_budget", None)?);
    }
    Ok(o)
}

/// `zero`, `neg_log_sin`, or a constant.
fn profile(s: &Settings, key: &str) -> Result<(Profile, String), Failure> {
    let raw = s.raw(key).unwrap_or("zero");
    let p = match raw {
        "zero" | "0" => Profile::zero(),
        "neg_log_sin" => Profile::neg_log_sin(),
        other => match other.parse::<f64>() {
            Ok(c) if c.is_finite() => Profile::constant(c),
            _ => return Err(config_error(key, format!("expected zero, neg_log_sin or a number, got {raw:?}")).into()),
        },
    };
    Ok((p, raw.to_string()))
}

fn route(s: &Settings, default: Route) -> Result<Route, Failure> {
    match s.raw("route") {
        None => Ok(default),
        Some(v) => Route::parse(v).ok_or_else(|| config_error("route", format!("expected direct or conformal, got {v:?}")).into()),
    }
}

/// Collar geometry; the defaults are the moderate collar `C^{0.5,[1, π−1]}`.
fn collar_geometry(s: &Settings) -> Result<(f64, f64, f64), Failure> {
    let l = s.positive("l", Some(0.5))?;
    let a = s.positive("a", Some(1.0))?;
    let b = s.positive("b", Some(PI - 1.0))?;
    if !(a < b && b < PI) {
        return Err(config_error("b", format!("need 0 < a < b < π, got a = {a}, b = {b}")).into());
    }
    Ok((l, a, b))
}

fn height_json(h: &Height<f64>) -> serde_json::Value {
    json!({
        "value": h.value,
        "error": h.error,
        "zeta_at_zero": h.zeta_at_zero,
        "log_det": h.log_det(),
        "split": h.split,
    })
}

fn det(s: &Settings, r: &mut Record) -> Run {
    let geometry = match (s.flag("interval", false)?, s.raw("geometry")) {
        (true, Some(g)) if g != "interval" => {
            return Err(config_error("geometry", format!("conflicts with `interval = true` ({g:?})")).into())
        }
        (true, _) | (false, None) => "interval".to_string(),
        (false, Some(g)) => g.to_string(),
    };
    let opts = height_options(s)?;
    let tolerance = s.positive("tolerance", Some(1e-6))?;
    let (h, reference, what) = match geometry.as_str() {
        "interval" => {
            let (a, b) = match s.raw("length") {
                Some(_) => {
                    if s.raw("a").is_some() || s.raw("b").is_some() {
                        return Err(config_error("length", "give either length or a and b").into());
                    }
                    (0.0, s.positive("length", None)?)
                }
                None => (s.finite("a", Some(0.0))?, s.finite("b", Some(1.0))?),
            };
            if !(a < b) {
                return Err(config_error("b", format!("need a < b, got a = {a}, b = {b}")).into());
            }
            let (phi, label) = profile(s, "phi")?;
            let interval = WeightedInterval::new(a, b, phi)?;
            let h = if label == "neg_log_sin" {
                // the collar zero mode is Q_φ for this weight
                if !(a > 0.0 && b < PI) {
                    return Err(config_error("a", "neg_log_sin needs 0 < a < b < π").into());
                }
                zero_mode_height(&CollarCylinder::new(1.0, a, b)?, &opts)?
            } else {
                interval_height(&interval, &opts)?
            };
            (h, one_d_polyakov(&interval)?, "1-D Polyakov closed form")
        }
        "flat_cylinder" => {
            let l = s.positive("l", Some(1.0))?;
            let a = s.finite("a", Some(0.0))?;
            let b = s.finite("b", Some(1.0))?;
            if !(a < b) {
                return Err(config_error("b", format!("need a < b, got a = {a}, b = {b}")).into());
            }
            let h = flat_cylinder_height(&FlatCylinder::new(l, a, b)?, &opts.mellin)?;
            (h, flat_cylinder_zeta_prime(l, b - a)?, "flat cylinder closed form")
        }
        "collar" => {
            let (l, a, b) = collar_geometry(s)?;
            let c = CollarCylinder::new(l, a, b)?;
            let h = collar_height(&c, route(s, Route::Direct)?, &opts)?;
            (h, collar_height(&c, Route::Conformal, &opts)?.value, "conformal route")
        }
        "half_collar" => {
            let (l, a, b) = collar_geometry(s)?;
            let half = HalfCollar::new(l, a, b)?;
            let route = match s.raw("route") {
                None | Some("spectral") => HalfRoute::Spectral,
                Some(_) => HalfRoute::Identity(route(s, Route::Direct)?),
            };
            let h = half_collar_height(&half, route, &opts)?;
            let reference = half_collar_height(&half, HalfRoute::Identity(Route::Conformal), &opts)?.value;
            (h, reference, "heights identity with the conformal route")
        }
        other => {
            return Err(config_error(
                "geometry",
                format!("expected interval, flat_cylinder, collar or half_collar, got {other:?}"),
            )
            .into())
        }
    };
    let gap = (h.value - reference).abs();
    println!("Z'(0) = {:.12} ± {:.1e}", h.value, h.error);
    println!("reference ({what}) = {reference:.12}, gap {gap:.2e}");
    let out = json!({
        "geometry": geometry,
        "height": height_json(&h),
        "reference": reference,
        "reference_kind": what,
        "gap": gap,
    });
    r.result("det", &out)?;
    r.write_json("det.json", &out)?;
    r.invariant(
        "reference agreement",
        gap <= tolerance,
        format!("gap {gap:.3e} exceeds tolerance {tolerance:.1e}"),
    );
    Ok(())
}

fn collar(s: &Settings, r: &mut Record) -> Run {
    let (l, a, b) = collar_geometry(s)?;
    let opts = height_options(s)?;
    let routes = ReportRoutes {
        direct: s.flag("direct", true)?,
        half_spectral: s.flag("half_spectral", false)?,
    };
    let tolerance = s.positive("tolerance", Some(1e-5))?;
    let report = collar_report(&CollarCylinder::new(l, a, b)?, routes, &opts)?;
    let defect = report.identity_defect();
    println!("h(C) conformal = {:.12}", report.h_conformal.value);
    if let Some(d) = report.h_direct {
        println!("h(C) direct    = {:.12} ± {:.1e}", d.value, d.error);
    }
    println!("h(C_III)       = {:.12}", report.h_half_spectral.unwrap_or(report.h_half).value);
    println!("Z'(0)          = {:.12}", report.z_prime);
    r.result("collar", &report)?;
    r.result("identity_defect", defect)?;
    r.write_json("collar.json", &json!({ "report": report, "identity_defect": defect }))?;
    if routes.half_spectral {
        println!("|2h(C_III) - h(C) + Z'(0)| = {defect:.2e}");
        r.invariant(
            "heights identity",
            defect < tolerance,
            format!("defect {defect:.3e} exceeds {tolerance:.1e}"),
        );
    }
    Ok(())
}

fn sweep(s: &Settings, r: &mut Record) -> Run {
    let kind_raw = s.raw("kind").unwrap_or("SC_I");
    let kind = SubcollarKind::parse(kind_raw)
        .ok_or_else(|| config_error("kind", format!("expected SC_I, SC_II or SC_III, got {kind_raw:?}")))?;
    let grid = s.range("l", "0.02:0.1:5")?;
    if let Some(bad) = grid.iter().find(|&&l| l >= PI / 8.0) {
        return Err(config_error("l", format!("values must lie in (0, π/8), got {bad}")).into());
    }
    let stated = LeadingTerm::stated(kind);
    let leading = LeadingTerm {
        pi2_coeff: s.finite("pi2_coeff", Some(stated.pi2_coeff))?,
        include_log: s.flag("include_log", stated.include_log)?,
    };
    let opts = SweepOptions {
        route: route(s, Route::Conformal)?,
        leading: Some(leading),
        height: height_options(s)?,
    };
    let table = asymptotic_sweep(kind, &grid, &opts)?;
    let mut csv_bytes = Vec::new();
    table.write_csv(&mut csv_bytes)?;
    r.write("sweep.csv", &csv_bytes)?;
    r.result("summary", &table.summary)?;
    r.result("rows", &table.rows)?;
    r.write_json("sweep.json", &json!({ "summary": table.summary, "rows": table.rows }))?;
    print!("{}", String::from_utf8_lossy(&csv_bytes).replace("\r\n", "\n"));
    println!("residual spread {:.6}", table.summary.spread);
    if s.raw("max_spread").is_some() {
        let max = s.positive("max_spread", None)?;
        r.invariant(
            "residual spread",
            table.summary.spread < max,
            format!("spread {:.4} exceeds {max}", table.summary.spread),
        );
    }
    Ok(())
}

fn insertion(s: &Settings, r: &mut Record) -> Run {
    let l = s.positive("l", Some(0.1))?;
    let a = s.positive("a", Some(l))?;
    let b = s.positive("b", Some(PI - l))?;
    let a1 = s.positive("a_inner", Some(2.0 * l))?;
    let b1 = s.positive("b_inner", Some(PI - 2.0 * l))?;
    if !(a < a1 && a1 <= b1 && b1 < b && b < PI) {
        return Err(config_error("a_inner", "need 0 < a < a_inner ≤ b_inner < b < π").into());
    }
    let g = insertion_gap(l, (a, b), (a1, b1), route(s, Route::Conformal)?, &height_options(s)?)?;
    println!("h(M) - sum h(pieces) = {:.12} ± {:.1e}", g.gap, g.error);
    r.result("insertion", &g)?;
    r.write_json("insertion.json", &g)?;
    Ok(())
}

fn input_mesh(s: &Settings) -> Result<MetricSurface, Failure> {
    let spec = |s: &Settings| -> Result<PantsSpec, Failure> {
        let mut spec = PantsSpec::with_vertex_target(s.count("vertices", 2000)?);
        spec.hole_radius = s.positive("hole_radius", Some(spec.hole_radius))?;
        spec.hole_offset = s.positive("hole_offset", Some(spec.hole_offset))?;
        Ok(spec)
    };
    match s.raw("mesh").unwrap_or("pants") {
        "pants" => Ok(pants(spec(s)?)?),
        "annulus" => {
            let inner = s.positive("inner_radius", Some(0.4))?;
            if inner >= 1.0 {
                return Err(config_error("inner_radius", "must be below 1").into());
            }
            Ok(annulus(inner, s.count("n_theta", 64)?, s.count("n_radial", 16)?)?)
        }
        path => read_mesh(path).map_err(|e| config_error("mesh", e.to_string()).into()),
    }
}

fn map_options(s: &Settings) -> Result<MapOptions, Failure> {
    let mut o = MapOptions::default();
    o.newton.tolerance = s.positive("tolerance", Some(o.newton.tolerance))?;
    o.newton.max_iterations = s.count("max_iterations", o.newton.max_iterations)?;
    o.uniformity_tolerance = s.positive("uniformity_tolerance", Some(o.uniformity_tolerance))?;
    Ok(o)
}

fn map_summary(m: &UniformMap<f64>) -> serde_json::Value {
    let res = &m.result;
    json!({
        "residual": res.residual,
        "gradient_max": res.gradient_max,
        "iterations": res.iterations,
        "functional_value": res.functional_value,
        "constraint_violation": res.constraint_violation,
        "rescale": res.rescale,
        "area": m.metric.area(),
        "uniformity": uniformity(&m.metric),
    })
}

fn uniformize_mesh(s: &Settings, r: &mut Record) -> Run {
    let mesh = input_mesh(s)?;
    let kind = match s.raw("type").unwrap_or("I") {
        "I" | "i" | "1" => UniformType::ConstantCurvature,
        "II" | "ii" | "2" => UniformType::FlatBoundary,
        other => return Err(config_error("type", format!("expected I or II, got {other:?}")).into()),
    };
    let area = s.positive("area", Some(mesh.area()))?;
    let opts = map_options(s)?;
    r.result(
        "input",
        json!({
            "vertices": mesh.vertex_count(),
            "triangles": mesh.triangles().len(),
            "euler_characteristic": mesh.euler_characteristic(),
            "boundary_components": mesh.boundary_component_count(),
            "area": mesh.area(),
            "uniformity": uniformity(&mesh),
        }),
    )?;
    let map = uniformize(&mesh, kind, area, &opts)?;
    let summary = map_summary(&map);
    r.result("uniform", &summary)?;
    r.write("uniform.mesh", format_mesh(&map.metric).as_bytes())?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(["vertex", "x", "y", "z", "factor"])?;
    for (i, (p, f)) in mesh.vertices().iter().zip(&map.factor).enumerate() {
        w.write_record([
            i.to_string(),
            format!("{:.17e}", p[0]),
            format!("{:.17e}", p[1]),
            format!("{:.17e}", p[2]),
            format!("{:.17e}", f),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.into_error()))?;
    r.write("factor.csv", &bytes)?;

    let violation = kind.violation(&uniformity(&map.metric));
    println!(
        "type {}: {} Newton iterations, residual {:.2e}, uniformity violation {:.2e}",
        kind.label(),
        map.result.iterations,
        map.result.residual,
        violation
    );
    let mut out = json!({ "type": kind.label(), "uniform": summary, "violation": violation });
    r.invariant(
        "uniformity",
        violation <= opts.uniformity_tolerance,
        format!("violation {violation:.3e} exceeds {:.1e}", opts.uniformity_tolerance),
    );
    if s.flag("round_trip", false)? {
        let sigma = match kind {
            UniformType::FlatBoundary => map.metric.clone(),
            UniformType::ConstantCurvature => uniformize(&mesh, UniformType::FlatBoundary, area, &opts)?.metric,
        };
        let rt = round_trip(&sigma, area, &opts)?;
        println!("round trip discrepancy {:.2e}", rt.discrepancy);
        r.result("round_trip", rt)?;
        out["round_trip"] = serde_json::to_value(rt)?;
        r.invariant(
            "round trip",
            rt.discrepancy < 1e-3,
            format!("discrepancy {:.3e}", rt.discrepancy),
        );
    }
    r.write_json("uniformize.json", &out)?;
    Ok(())
}

fn polyakov(s: &Settings, r: &mut Record) -> Run {
    match s.raw("geometry").unwrap_or("cylinder") {
        "cylinder" => polyakov_cylinder(s, r),
        "mesh" => height_inequality(s, r),
        other => Err(config_error("geometry", format!("expected cylinder or mesh, got {other:?}")).into()),
    }
}

fn polyakov_cylinder(s: &Settings, r: &mut Record) -> Run {
    let (l, a, b) = collar_geometry(s)?;
    let psi_raw = s.raw("psi").unwrap_or("neg_log_sin").to_string();
    let (psi, _) = if s.raw("psi").is_none() {
        (Profile::neg_log_sin(), String::new())
    } else {
        profile(s, "psi")?
    };
    let flat = FlatCylinder::new(l, a, b)?;
    let h0 = flat_cylinder_zeta_prime(l, b - a)?;
    let terms = cylinder_polyakov_terms(&flat.with_factor(psi)?)?;
    let h = polyakov_alvarez_shift(&terms, h0);
    println!("h(flat) = {h0:.12}, shift = {:.12}, h = {h:.12}", terms.shift());
    let mut out = json!({ "psi": psi_raw, "terms": terms, "h_flat": h0, "shift": terms.shift(), "h": h });
    if let Ok(c) = psi_raw.parse::<f64>() {
        // constant factor: the scaling law with χ = 0
        let expected = scaled_height(h0, 0.0, c.exp());
        let gap = (h - expected).abs();
        out["scaling_law_gap"] = json!(gap);
        r.invariant("scaling law", gap < 1e-12, format!("gap {gap:.3e}"));
    } else if psi_raw == "neg_log_sin" && s.flag("direct", false)? {
        let tolerance = s.positive("tolerance", Some(1e-4))?;
        let direct = direct_collar_height(&CollarCylinder::new(l, a, b)?, &height_options(s)?)?;
        let gap = (direct.value - h).abs();
        println!("direct mode sum = {:.12} ± {:.1e}, gap {gap:.2e}", direct.value, direct.error);
        out["direct"] = height_json(&direct);
        out["direct_gap"] = json!(gap);
        r.invariant(
            "Polyakov-Alvarez cross-route",
            gap < tolerance,
            format!("gap {gap:.3e} exceeds {tolerance:.1e}"),
        );
    }
    r.result("polyakov", &out)?;
    r.write_json("polyakov.json", &out)?;
    Ok(())
}

fn height_inequality(s: &Settings, r: &mut Record) -> Run {
    let mut spec = PantsSpec::with_vertex_target(s.count("vertices", 2000)?);
    spec.hole_radius = s.positive("hole_radius", Some(spec.hole_radius))?;
    spec.hole_offset = s.positive("hole_offset", Some(spec.hole_offset))?;
    let tolerance = s.positive("tolerance", Some(1e-6))?;
    let mesh: MetricSurface = pants(spec)?;
    let chi = mesh.euler_characteristic() as f64;
    // area 2π|χ| makes K = −1
    let tau = uniformize(&mesh, UniformType::ConstantCurvature, 2.0 * PI * chi.abs(), &MapOptions::default())?.metric;
    let psi = flattening_factor(&tau, tolerance)?;
    let hi = height_inequality_check(&tau, &psi, tolerance)?;
    println!(
        "h(e^(2psi) tau) - h(tau) = {:.12}, chi/2 = {}, slack {:.3e}",
        hi.shift, hi.bound, hi.slack
    );
    r.result("height_inequality", hi)?;
    r.write_json("polyakov.json", &hi)?;
    r.invariant("height inequality", hi.slack >= -1e-8, format!("slack {:.3e}", hi.slack));
    let normal_gap = (hi.normal - hi.two_pi_chi).abs();
    r.invariant(
        "normal derivative total",
        normal_gap < 1e-9,
        format!("|int dn psi - 2 pi chi| = {normal_gap:.3e}"),
    );
    r.invariant(
        "Jensen",
        hi.jensen_lhs <= hi.jensen_rhs + 1e-12,
        format!("{} > {}", hi.jensen_lhs, hi.jensen_rhs),
    );
    Ok(())
}

fn verify(s: &Settings, r: &mut Record) -> Run {
    let selection = s.raw("suite").unwrap_or("all");
    let suites = Suite::parse_selection(selection).ok_or_else(|| {
        let labels: Vec<&str> = Suite::ALL.iter().map(|s| s.label()).collect();
        config_error("suite", format!("expected all or one of {}, got {selection:?}", labels.join(", ")))
    })?;
    let seed: u64 = s.get("seed", 20261019)?;
    let cases: Option<usize> = s.parse("cases")?;
    if cases == Some(0) {
        return Err(config_error("cases", "must be at least 1").into());
    }
    let mut reports = Vec::new();
    for suite in suites {
        let report = suite.run(seed, cases.unwrap_or_else(|| suite.default_cases()))?;
        println!(
            "{:<28} {} ({} checks, worst ratio {:.3})",
            report.suite,
            if report.passed() { "ok" } else { "FAILED" },
            report.checks,
            report.worst_ratio
        );
        r.result(&report.suite, &report)?;
        r.invariant(
            &report.suite,
            report.passed(),
            format!("{} failing checks", report.failures.len()),
        );
        reports.push(report);
    }
    r.write_json("verify.json", &reports)?;
    Ok(())
}
