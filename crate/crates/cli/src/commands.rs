use anyhow::{bail, Context};
use conflat::calculus::{laplace_fd, FdScheme};
use conflat::clifford::{MultiVector, VectorN};
use conflat::kernels_euclid::cauchy_g;
use conflat::kernels_periodic::{cyl_cauchy, torus_literal_convergence, ConvergenceStatus};
use conflat::kernels_pin::{proj_green, KernelForm};
use conflat::lattice::{moebius_sgn, BundleCharacter, CoeffVector, Lattice, ManifoldSpec, SignVariant};
use conflat::quadrature::{order_of_zero, pv_jump_probe, Hypersurface};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{Form, OrderConfig, RunConfig};
use crate::kernels::{check_kernel, evaluate};

/// Bytes to write plus whether every assertion held.
pub struct Output {
    pub bytes: Vec<u8>,
    pub passed: bool,
}

impl Output {
    pub fn json<T: Serialize>(value: &T, passed: bool) -> anyhow::Result<Self> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(Output { bytes, passed })
    }
}

fn coeff_headers(n: usize) -> Vec<String> {
    (0..1usize << n).map(|b| format!("c{b}")).collect()
}

fn push_coords(row: &mut Vec<String>, v: &[f64]) {
    row.extend(v.iter().map(|c| c.to_string()));
}

fn prepare(cfg: &RunConfig) -> anyhow::Result<ManifoldSpec> {
    let m = cfg.manifold_spec()?;
    check_kernel(&m, cfg.kernel)?;
    Ok(m)
}

pub fn eval(cfg: &RunConfig, radius: usize, form: Form) -> anyhow::Result<Output> {
    let m = prepare(cfg)?;
    let (x, y) = cfg.eval_points(&m)?;
    let k = evaluate(cfg, &m, &x, &y, radius, form)?;
    let record = json!({
        "version": conflat::VERSION,
        "command": "eval",
        "config": cfg,
        "x": x.0,
        "y": y.0,
        "value": k.value.coeffs(),
        "tail_bound": k.tail_bound,
        "R": k.trunc_radius,
        "warning": k.warning,
    });
    Output::json(&record, true)
}

pub fn table(cfg: &RunConfig, radius: usize, form: Form) -> anyhow::Result<Output> {
    let m = prepare(cfg)?;
    let pairs = cfg.sample_pairs(&m);
    let rows: Vec<Vec<String>> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (x, y))| {
            let k = evaluate(cfg, &m, x, y, radius, form)?;
            let mut row = vec![i.to_string()];
            push_coords(&mut row, &x.0);
            push_coords(&mut row, &y.0);
            push_coords(&mut row, k.value.coeffs());
            row.push(k.tail_bound.to_string());
            Ok(row)
        })
        .collect::<anyhow::Result<_>>()?;
    let n = m.n;
    let mut header = vec!["index".to_string()];
    header.extend((0..n).map(|j| format!("x{j}")));
    header.extend((0..n).map(|j| format!("y{j}")));
    header.extend(coeff_headers(n));
    header.push("tail_bound".into());
    write_csv(&header, &rows, true)
}

fn write_csv(header: &[String], rows: &[Vec<String>], passed: bool) -> anyhow::Result<Output> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    Ok(Output { bytes: w.into_inner().context("flushing csv")?, passed })
}

/// Least-squares slope of `log y` against `log x` over the positive entries.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn converge(cfg: &RunConfig, radii: &[usize], form: Form) -> anyhow::Result<Output> {
    let m = prepare(cfg)?;
    if radii.len() < 2 {
        bail!("converge needs at least two radii");
    }
    let (x, y) = cfg.eval_points(&m)?;
    let evals = radii
        .par_iter()
        .map(|&r| evaluate(cfg, &m, &x, &y, r, form))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut diffs = vec![f64::NAN];
    for w in evals.windows(2) {
        diffs.push((&w[1].value - &w[0].value).norm());
    }
    let rs: Vec<f64> = radii.iter().map(|&r| r as f64).collect();
    let rate = log_slope(&rs[1..], &diffs[1..]);
    let status = if cfg.kernel == crate::config::KernelName::TorusCauchy && form == Form::PaperLiteral {
        let b = cfg.second_point(&y)?;
        let report = torus_literal_convergence(m.lattice()?, &m.bundle, &y, &b, &x, radii)?;
        match report.status {
            ConvergenceStatus::Converging => "converging",
            ConvergenceStatus::NonCauchy => "non_cauchy",
        }
    } else if rate < -0.3 {
        "converging"
    } else {
        "non_cauchy"
    };
    let n = m.n;
    let mut header = vec!["R".to_string()];
    header.extend(coeff_headers(n));
    header.extend(["tail_bound", "successive_diff", "rate_exponent", "status"].map(String::from));
    let rows: Vec<Vec<String>> = evals
        .iter()
        .zip(&diffs)
        .map(|(k, d)| {
            let mut row = vec![k.trunc_radius.to_string()];
            push_coords(&mut row, k.value.coeffs());
            row.push(k.tail_bound.to_string());
            row.push(if d.is_nan() { String::new() } else { d.to_string() });
            row.push(rate.to_string());
            row.push(status.to_string());
            row
        })
        .collect();
    write_csv(&header, &rows, true)
}

#[derive(Serialize)]
struct OrderRecord<'a> {
    version: &'a str,
    command: &'a str,
    config: &'a OrderConfig,
    order: Option<i64>,
    raw: Option<f64>,
    min_abs_on_contour: Option<f64>,
    halved_order: Option<i64>,
    error: Option<String>,
}

pub fn order(cfg: &OrderConfig) -> anyhow::Result<Output> {
    cfg.map.validate()?;
    if cfg.delta.is_nan() || cfg.delta <= 0.0 {
        bail!("delta must be positive");
    }
    let n = cfg.map.dim();
    let grid = if cfg.grid.is_empty() { default_grid(n) } else { cfg.grid.clone() };
    let c = cfg.map.center();
    let g = |x: &VectorN| cfg.map.apply(x);
    let first = order_of_zero(g, &c, cfg.delta, &grid);
    let halved = order_of_zero(g, &c, 0.5 * cfg.delta, &grid);
    let mut rec = OrderRecord {
        version: conflat::VERSION,
        command: "order",
        config: cfg,
        order: None,
        raw: None,
        min_abs_on_contour: None,
        halved_order: halved.as_ref().ok().map(|r| r.order),
        error: None,
    };
    let passed = match &first {
        Ok(r) => {
            rec.order = Some(r.order);
            rec.raw = Some(r.raw);
            rec.min_abs_on_contour = Some(r.min_abs_on_contour);
            rec.halved_order == Some(r.order)
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            false
        }
    };
    Output::json(&rec, passed)
}

pub fn default_grid(n: usize) -> Vec<usize> {
    match n {
        2 => vec![256],
        3 => vec![24, 48],
        _ => vec![10, 20],
    }
}

/// Report-only probes: literal-form residuals, the Plemelj jump on a sphere
/// and a witness that the all-even sign is not a character.
pub fn probe() -> anyhow::Result<serde_json::Value> {
    let scheme = FdScheme::default();

    // literal projective Green kernel: Laplace residual and ratio to the
    // orbit form
    let lat = Lattice::standard(3, 1)?;
    let proj = ManifoldSpec::projective(lat.clone(), 2, BundleCharacter::trivial())?;
    let y = VectorN(vec![0.1, 0.6, 0.8]);
    let samples = [vec![0.3, 0.9, 0.5], vec![-0.2, 0.4, 1.1], vec![0.45, 1.3, 0.7]];
    let literal_rows: Vec<_> = samples
        .iter()
        .map(|s| {
            let x = VectorN(s.clone());
            let lit = |z: &VectorN| proj_green(&proj, z, &y, 30, KernelForm::PaperLiteral).map(|k| k.value);
            let orbit = |z: &VectorN| proj_green(&proj, z, &y, 30, KernelForm::Orbit).map(|k| k.value);
            let residual = laplace_fd(|z: &VectorN| lit(z).unwrap_or_else(|_| MultiVector::zero(3)), &x, &scheme).norm();
            let orbit_residual =
                laplace_fd(|z: &VectorN| orbit(z).unwrap_or_else(|_| MultiVector::zero(3)), &x, &scheme).norm();
            json!({"x": s, "literal_laplace_residual": residual, "orbit_laplace_residual": orbit_residual})
        })
        .collect();

    let torus = Lattice::standard(2, 2)?;
    let a = VectorN(vec![0.1, 0.2]);
    let b = VectorN(vec![-0.3, 0.15]);
    let xt = VectorN(vec![0.35, -0.25]);
    let torus_report = torus_literal_convergence(&torus, &BundleCharacter::trivial(), &a, &b, &xt, &[4, 8, 16, 32, 64])?;

    // Plemelj jump for the Euclidean and the cylinder kernel
    let sphere = Hypersurface::sphere(VectorN(vec![0.0, 0.0, 0.0]), 0.4, &[48, 96])?;
    let one = |_: &VectorN| MultiVector::scalar(3, 1.0);
    let node = 24 * 96 + 7;
    let euclid = pv_jump_probe(|x: &VectorN, y: &VectorN| Ok(cauchy_g(x, y)?.to_multivector()), &sphere, one, node, &[0.15, 0.1, 0.07])?;
    let cyl_lat = &lat;
    let chi = BundleCharacter::trivial();
    let cylinder = pv_jump_probe(
        |x: &VectorN, y: &VectorN| Ok(cyl_cauchy(cyl_lat, &chi, x, y, 20)?.value),
        &sphere,
        one,
        node,
        &[0.1, 0.05, 0.02],
    )?;

    // AllEven sign: sgn(m + m') != sgn(m) sgn(m') for some pair
    let small: Vec<CoeffVector> = (-1..=1i64).flat_map(|i| (-1..=1i64).map(move |j| CoeffVector(vec![i, j]))).collect();
    let witness = small.iter().flat_map(|a| small.iter().map(move |b| (a, b))).find_map(|(m1, m2)| {
        let lhs = moebius_sgn(&m1.add(m2), SignVariant::AllEven);
        let rhs = moebius_sgn(m1, SignVariant::AllEven) * moebius_sgn(m2, SignVariant::AllEven);
        (lhs != rhs).then(|| json!({"m": m1.0, "m_prime": m2.0, "sgn_sum": lhs, "product": rhs}))
    });

    Ok(json!({
        "literal_projective_green": literal_rows,
        "literal_torus": torus_report,
        "jump_euclidean": euclid,
        "jump_cylinder": cylinder,
        "all_even_witness": witness,
    }))
}
