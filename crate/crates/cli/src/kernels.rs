use anyhow::{bail, Context};
use conflat::clifford::VectorN;
use conflat::kernels_periodic::{
    cyl_cauchy, cyl_cauchy_reg, cyl_green, cyl_green_reg, torus_cauchy_two_point, KernelEval,
};
use conflat::kernels_pin::{klein_green, moebius_green, proj_cauchy, proj_green, realproj_cauchy};
use conflat::lattice::{ManifoldKind, ManifoldSpec};

use crate::config::{Form, KernelName, RunConfig};

fn expect_kind(m: &ManifoldSpec, kernel: KernelName, allowed: &[ManifoldKind]) -> anyhow::Result<()> {
    if !allowed.contains(&m.kind) {
        bail!("kernel {kernel:?} is not defined on a {:?} manifold", m.kind);
    }
    Ok(())
}

/// Checks that `kernel` makes sense on `m` before any evaluation.
pub fn check_kernel(m: &ManifoldSpec, kernel: KernelName) -> anyhow::Result<()> {
    use KernelName::*;
    use ManifoldKind::*;
    match kernel {
        CylCauchy | CylCauchyReg | CylGreen | CylGreenReg => expect_kind(m, kernel, &[Cylinder, Torus]),
        TorusCauchy => expect_kind(m, kernel, &[Torus]),
        ProjCauchy | ProjGreen => expect_kind(m, kernel, &[Projective]),
        RealprojCauchy => expect_kind(m, kernel, &[RealProjective]),
        MoebiusGreen => expect_kind(m, kernel, &[MoebiusStrip]),
        KleinGreen => expect_kind(m, kernel, &[KleinBottle]),
    }
}

/// One kernel evaluation `K(x, y)` truncated at `radius`.
pub fn evaluate(
    cfg: &RunConfig,
    m: &ManifoldSpec,
    x: &VectorN,
    y: &VectorN,
    radius: usize,
    form: Form,
) -> anyhow::Result<KernelEval> {
    let lattice = || m.lattice().context("manifold has no lattice");
    let chi = &m.bundle;
    let eval = match cfg.kernel {
        KernelName::CylCauchy => cyl_cauchy(lattice()?, chi, x, y, radius)?,
        KernelName::CylCauchyReg => cyl_cauchy_reg(lattice()?, chi, x, y, radius)?,
        KernelName::CylGreen => cyl_green(lattice()?, chi, x, y, radius)?,
        KernelName::CylGreenReg => cyl_green_reg(lattice()?, chi, x, y, radius)?,
        KernelName::TorusCauchy => {
            let b = cfg.second_point(y)?;
            torus_cauchy_two_point(lattice()?, chi, y, &b, x, radius, form.torus_form())?
        }
        KernelName::ProjCauchy => proj_cauchy(m, x, y, radius, form.kernel_form())?,
        KernelName::ProjGreen => proj_green(m, x, y, radius, form.kernel_form())?,
        KernelName::RealprojCauchy => {
            let p = m.p.context("real projective space needs p")?;
            let value = realproj_cauchy(p, x, y, form.kernel_form())?;
            KernelEval { value, trunc_radius: 0, tail_bound: 0.0, warning: None }
        }
        KernelName::MoebiusGreen => moebius_green(m, x, y, radius, form.kernel_form())?,
        KernelName::KleinGreen => klein_green(m, x, y, radius, form.kernel_form())?,
    };
    Ok(eval)
}
