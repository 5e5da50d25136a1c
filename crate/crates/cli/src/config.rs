use std::path::Path;

use anyhow::{bail, Context};
use clap::ValueEnum;
use conflat::clifford::VectorN;
use conflat::kernels_periodic::TorusForm;
use conflat::kernels_pin::KernelForm;
use conflat::lattice::{ManifoldConfig, ManifoldKind, ManifoldSpec};
use conflat::quadrature::SurfaceDescriptor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    CylCauchy,
    CylCauchyReg,
    CylGreen,
    CylGreenReg,
    TorusCauchy,
    ProjCauchy,
    ProjGreen,
    RealprojCauchy,
    MoebiusGreen,
    KleinGreen,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    #[default]
    Orbit,
    #[serde(alias = "paper-literal")]
    PaperLiteral,
}

impl Form {
    pub fn kernel_form(self) -> KernelForm {
        match self {
            Form::Orbit => KernelForm::Orbit,
            Form::PaperLiteral => KernelForm::PaperLiteral,
        }
    }

    pub fn torus_form(self) -> TorusForm {
        match self {
            Form::Orbit => TorusForm::CoupledSubtracted,
            Form::PaperLiteral => TorusForm::PaperLiteral,
        }
    }
}

/// A map `R^n -> R^n` with an isolated zero, for `order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// `z -> (z - c)^degree + offset` in the plane; negative degrees use the
    /// conjugate.
    ComplexPower {
        center: Vec<f64>,
        degree: i32,
        #[serde(default)]
        offset: Vec<f64>,
    },
    /// `x -> A (x - c) + offset`.
    Affine {
        matrix: Vec<Vec<f64>>,
        center: Vec<f64>,
        #[serde(default)]
        offset: Vec<f64>,
    },
}

impl MapSpec {
    pub fn dim(&self) -> usize {
        match self {
            MapSpec::ComplexPower { .. } => 2,
            MapSpec::Affine { center, .. } => center.len(),
        }
    }

    pub fn center(&self) -> VectorN {
        match self {
            MapSpec::ComplexPower { center, .. } | MapSpec::Affine { center, .. } => VectorN(center.clone()),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let n = self.dim();
        match self {
            MapSpec::ComplexPower { center, offset, .. } => {
                if center.len() != 2 || !(offset.is_empty() || offset.len() == 2) {
                    bail!("complex_power needs a 2-d center and offset");
                }
            }
            MapSpec::Affine { matrix, offset, .. } => {
                if n < 2 || matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                    bail!("affine map needs an n x n matrix with n >= 2");
                }
                if !(offset.is_empty() || offset.len() == n) {
                    bail!("affine offset has the wrong length");
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &VectorN) -> VectorN {
        let c = self.center();
        let u = x - &c;
        let (mut out, offset) = match self {
            MapSpec::ComplexPower { degree, offset, .. } => {
                let (re, im) = (u[0], u[1]);
                let (r, t) = ((re * re + im * im).sqrt(), im.atan2(re));
                let d = *degree;
                let rd = r.powi(d.abs());
                let phase = t * d as f64;
                (vec![rd * phase.cos(), rd * phase.sin()], offset)
            }
            MapSpec::Affine { matrix, offset, .. } => {
                let v = matrix.iter().map(|row| row.iter().zip(&u.0).map(|(a, b)| a * b).sum()).collect();
                (v, offset)
            }
        };
        for (o, d) in out.iter_mut().zip(offset) {
            *o += d;
        }
        VectorN(out)
    }
}

fn default_radius() -> usize {
    20
}

fn default_points() -> usize {
    16
}

fn default_delta() -> f64 {
    0.25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: ManifoldConfig,
    pub kernel: KernelName,
    #[serde(default)]
    pub form: Form,
    #[serde(rename = "R", default = "default_radius")]
    pub radius: usize,
    /// Truncation radii for `converge`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radii: Vec<usize>,
    /// Evaluation point; drawn from `seed` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    /// Source point; drawn from `seed` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    /// Second singular point of the torus kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

/// Config for the `order` subcommand, which needs no manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderConfig {
    pub map: MapSpec,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

impl RunConfig {
    pub fn manifold_spec(&self) -> anyhow::Result<ManifoldSpec> {
        ManifoldSpec::try_from(&self.manifold).context("invalid manifold")
    }

    fn point(v: &Option<Vec<f64>>, n: usize, what: &str) -> anyhow::Result<Option<VectorN>> {
        match v {
            None => Ok(None),
            Some(p) if p.len() == n => Ok(Some(VectorN(p.clone()))),
            Some(p) => bail!("{what} has {} components, expected {n}", p.len()),
        }
    }

    /// `(x, y)` from the config, or drawn from `seed` when absent.
    pub fn eval_points(&self, m: &ManifoldSpec) -> anyhow::Result<(VectorN, VectorN)> {
        let fixed_x = Self::point(&self.x, m.n, "x")?;
        let fixed_y = Self::point(&self.y, m.n, "y")?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (rx, ry) = sample_pair(m, &mut rng);
        Ok((fixed_x.unwrap_or(rx), fixed_y.unwrap_or(ry)))
    }

    pub fn second_point(&self, y: &VectorN) -> anyhow::Result<VectorN> {
        match Self::point(&self.b, y.dim(), "b")? {
            Some(b) => Ok(b),
            None => {
                let mut b = y.clone();
                b.0[0] += 0.37;
                if b.dim() > 1 {
                    b.0[1] -= 0.21;
                }
                Ok(b)
            }
        }
    }

    /// `points` seeded sample pairs, generated sequentially so that the set
    /// does not depend on the thread count.
    pub fn sample_pairs(&self, m: &ManifoldSpec) -> Vec<(VectorN, VectorN)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.points).map(|_| sample_pair(m, &mut rng)).collect()
    }
}

/// A pair in the fundamental region: lattice directions in `[-½, ½)`,
/// reflected axes in `[0.3, 1.3]`, the rest in `[-1, 1]`, with `|x - y| ≥ 0.3`.
pub fn sample_pair(m: &ManifoldSpec, rng: &mut ChaCha8Rng) -> (VectorN, VectorN) {
    loop {
        let x = sample_point(m, rng);
        let y = sample_point(m, rng);
        if (&x - &y).norm() >= 0.3 {
            return (x, y);
        }
    }
}

fn sample_point(m: &ManifoldSpec, rng: &mut ChaCha8Rng) -> VectorN {
    let n = m.n;
    let k = m.lattice.as_ref().map_or(0, |l| l.rank());
    let reflected = match m.kind {
        ManifoldKind::MoebiusStrip | ManifoldKind::KleinBottle => Vec::new(),
        _ => m.reflection_axes(),
    };
    let mut coords = vec![0.0; n];
    let mut t = vec![0.0; k];
    for (j, c) in coords.iter_mut().enumerate() {
        if reflected.contains(&j) {
            *c = rng.gen_range(0.3..1.3);
        } else if j >= k {
            *c = rng.gen_range(-1.0..1.0);
        }
    }
    for tj in t.iter_mut() {
        *tj = rng.gen_range(-0.5..0.5);
    }
    if let Some(l) = &m.lattice {
        for (tj, v) in t.iter().zip(l.basis()) {
            for (c, vi) in coords.iter_mut().zip(&v.0) {
                *c += tj * vi;
            }
        }
    }
    VectorN(coords)
}
