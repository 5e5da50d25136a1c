use anyhow::bail;
use clap::ValueEnum;
use conflat::calculus::{dirac_fd, laplace_fd, FdScheme, Side};
use conflat::clifford::{MultiVector, VectorN};
use conflat::conformal::{pull_back_monogenic, MoebiusMap};
use conflat::kernels_euclid::{cauchy_g, green_h};
use conflat::kernels_periodic::cyl_cauchy;
use conflat::kernels_pin::{descent_check, moebius_green, KernelForm};
use conflat::lattice::{BundleCharacter, Lattice, ManifoldSpec, SignVariant};
use conflat::quadrature::{cauchy_integral, doubling_check, order_of_zero, Hypersurface};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Clifford,
    Euclid,
    Conformal,
    Periodic,
    Descent,
    Quadrature,
    Order,
    Probes,
    All,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `value <= tolerance`, or `value >= tolerance` for lower bounds.
    pub lower_bound: bool,
    pub passed: bool,
}

fn at_most(suite: Suite, name: impl Into<String>, value: f64, tolerance: f64) -> Check {
    Check { suite, name: name.into(), value, tolerance, lower_bound: false, passed: value <= tolerance }
}

fn random_mv(rng: &mut ChaCha8Rng, n: usize) -> MultiVector {
    MultiVector::from_coeffs(n, (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect()).expect("length 2^n")
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> VectorN {
    VectorN((0..n).map(|_| rng.gen_range(-scale..scale)).collect())
}

fn clifford(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let s = Suite::Clifford;
    let mut out = Vec::new();
    for n in 1..=5 {
        let (mut assoc, mut anti, mut square) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..1000 {
            let (a, b, c) = (random_mv(rng, n), random_mv(rng, n), random_mv(rng, n));
            assoc = assoc.max((&(&a * &b) * &c).max_abs_diff(&(&a * &(&b * &c))));
            let (x, y) = (random_vec(rng, n, 1.0), random_vec(rng, n, 1.0));
            let (xm, ym) = (x.to_multivector(), y.to_multivector());
            let sym = &(&xm * &ym) + &(&ym * &xm);
            anti = anti.max(sym.max_abs_diff(&MultiVector::scalar(n, -2.0 * x.dot(&y))));
            square = square.max((&xm * &xm).max_abs_diff(&MultiVector::scalar(n, -x.norm_sq())));
        }
        out.push(at_most(s, format!("associativity n={n}"), assoc, 1e-12));
        out.push(at_most(s, format!("anticommutation n={n}"), anti, 1e-12));
        out.push(at_most(s, format!("vector square n={n}"), square, 1e-12));
    }
    out
}

/// A point at distance at least `min_sep` from `y`.
fn separated(rng: &mut ChaCha8Rng, y: &VectorN, min_sep: f64) -> VectorN {
    loop {
        let x = random_vec(rng, y.dim(), 2.0);
        if (&x - y).norm() >= min_sep {
            return x;
        }
    }
}

fn euclid(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let s = Suite::Euclid;
    let scheme = FdScheme::default();
    let mut out = Vec::new();
    for n in 3..=5 {
        let (mut dl, mut dr, mut lap) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..100 {
            let y = random_vec(rng, n, 1.0);
            let x = separated(rng, &y, 0.5);
            let g = |z: &VectorN| cauchy_g(z, &y).expect("separated").to_multivector();
            let h = |z: &VectorN| MultiVector::scalar(n, green_h(z, &y).expect("separated"));
            dl = dl.max(dirac_fd(g, &x, &scheme, Side::Left).norm());
            dr = dr.max(dirac_fd(g, &x, &scheme, Side::Right).norm());
            lap = lap.max(laplace_fd(h, &x, &scheme).norm());
        }
        out.push(at_most(s, format!("left Dirac residual of G n={n}"), dl, 1e-6));
        out.push(at_most(s, format!("right Dirac residual of G n={n}"), dr, 1e-6));
        out.push(at_most(s, format!("Laplace residual of H n={n}"), lap, 1e-6));
    }
    out
}

fn conformal(rng: &mut ChaCha8Rng) -> anyhow::Result<Vec<Check>> {
    let s = Suite::Conformal;
    let scheme = FdScheme::default();
    let n = 3;
    let src = VectorN(vec![0.0, 0.0, 4.0]);
    let f = |z: &VectorN| cauchy_g(z, &src).expect("off source").to_multivector();
    let maps = [
        ("translation", MoebiusMap::translation(&VectorN(vec![0.3, -0.2, 0.1]))),
        ("dilation", MoebiusMap::dilation(n, 1.7)?),
    ];
    let mut out = Vec::new();
    for (name, psi) in &maps {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let x = random_vec(rng, n, 0.8);
            let pulled = |z: &VectorN| pull_back_monogenic(psi, f, z, 1.0).expect("regular point");
            worst = worst.max(dirac_fd(pulled, &x, &scheme, Side::Left).norm());
        }
        out.push(at_most(s, format!("pull-back under {name}"), worst, 1e-6));
    }
    Ok(out)
}

fn periodic(rng: &mut ChaCha8Rng) -> anyhow::Result<Vec<Check>> {
    let s = Suite::Periodic;
    let mut out = Vec::new();
    for (k, l) in [(1usize, 0usize), (1, 1), (2, 0), (2, 1)] {
        let lat = Lattice::standard(4, k)?;
        let chi = BundleCharacter::with_split(l);
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let y = random_vec(rng, 4, 0.4);
            let x = separated(rng, &y, 0.3);
            let r = 20;
            let k0 = cyl_cauchy(&lat, &chi, &x, &y, r)?;
            let shifted = &x + &VectorN::basis(4, 0);
            let k1 = cyl_cauchy(&lat, &chi, &shifted, &y, r)?;
            let sign = if l >= 1 { -1.0 } else { 1.0 };
            let dev = (&k1.value - &k0.value.scale(sign)).norm();
            worst = worst.max(dev - 2.0 * k0.tail_bound.max(k1.tail_bound));
        }
        out.push(at_most(s, format!("equivariance excess n=4 k={k} l={l}"), worst, 0.0));
    }
    Ok(out)
}

fn descent(rng: &mut ChaCha8Rng) -> anyhow::Result<Vec<Check>> {
    let s = Suite::Descent;
    let lat = Lattice::standard(5, 1)?;
    let m = ManifoldSpec::moebius_strip(lat, SignVariant::SumParity, BundleCharacter::trivial())?;
    let samples: Vec<(VectorN, VectorN)> = (0..4)
        .map(|_| {
            let y = random_vec(rng, 5, 0.5);
            (separated(rng, &y, 0.3), y)
        })
        .collect();
    let rep = descent_check(&m, |x, y| moebius_green(&m, x, y, 20, KernelForm::Orbit), &samples)?;
    let excess = rep.entries.iter().map(|e| e.deviation - e.allowance).fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![at_most(s, "Moebius descent excess n=5 k=1", excess, 1e-13)])
}

fn quadrature() -> anyhow::Result<Vec<Check>> {
    let s = Suite::Quadrature;
    let kernel = |x: &VectorN, y: &VectorN| Ok(cauchy_g(x, y)?.to_multivector());
    let one = |_: &VectorN| MultiVector::scalar(3, 1.0);
    let sphere = Hypersurface::sphere(VectorN(vec![0.0, 1.0, 0.0]), 0.5, &[16, 32])?;
    let y = VectorN(vec![0.1, 1.1, 0.0]);
    let inside = cauchy_integral(kernel, &sphere, one, &y)?.value;
    let outside = cauchy_integral(kernel, &sphere, one, &VectorN(vec![2.0, 0.0, 0.0]))?.value;
    let both = Hypersurface::union(vec![sphere.clone(), sphere.reflected(&[1])?])?;
    let image = |x: &VectorN, y: &VectorN| Ok(&kernel(x, y)? + &kernel(x, &VectorN(vec![y[0], -y[1], y[2]]))?);
    let doubled = doubling_check(image, &both, one, &y, &[1])?.value;
    Ok(vec![
        at_most(s, "Cauchy formula f = 1 inside", inside.max_abs_diff(&MultiVector::scalar(3, 1.0)), 1e-6),
        at_most(s, "Cauchy formula f = 1 outside", outside.norm(), 1e-6),
        at_most(s, "doubling", doubled.max_abs_diff(&MultiVector::scalar(3, 2.0)), 2e-3),
    ])
}

fn order() -> anyhow::Result<Vec<Check>> {
    let s = Suite::Order;
    let c = VectorN(vec![0.1, -0.2]);
    let mut out = Vec::new();
    for degree in 0..=2i32 {
        let g = |x: &VectorN| {
            let (re, im) = (x[0] - c[0], x[1] - c[1]);
            let (r, t) = ((re * re + im * im).sqrt(), im.atan2(re));
            let v = VectorN(vec![r.powi(degree) * (t * degree as f64).cos(), r.powi(degree) * (t * degree as f64).sin()]);
            if degree == 0 {
                &v + &VectorN(vec![1.0, 0.0])
            } else {
                v
            }
        };
        let r = order_of_zero(g, &c, 0.3, &[256])?;
        out.push(at_most(s, format!("order of z^{degree}"), (r.order - degree as i64).abs() as f64, 0.0));
    }
    Ok(out)
}

pub fn run(suite: Suite, seed: u64) -> anyhow::Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = match suite {
        Suite::Clifford => clifford(&mut rng),
        Suite::Euclid => euclid(&mut rng),
        Suite::Conformal => conformal(&mut rng)?,
        Suite::Periodic => periodic(&mut rng)?,
        Suite::Descent => descent(&mut rng)?,
        Suite::Quadrature => quadrature()?,
        Suite::Order => order()?,
        Suite::Probes => Vec::new(),
        Suite::All => {
            let mut all = Vec::new();
            for s in [
                Suite::Clifford,
                Suite::Euclid,
                Suite::Conformal,
                Suite::Periodic,
                Suite::Descent,
                Suite::Quadrature,
                Suite::Order,
            ] {
                all.extend(run(s, seed)?);
            }
            all
        }
    };
    if checks.is_empty() && suite != Suite::Probes {
        bail!("suite {suite:?} produced no checks");
    }
    Ok(checks)
}
