//! Measurement of one irrep register in a Haar-random basis.

use crate::dist::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::group::{Group, SubgroupDesc};
use crate::repr::{IrrepName, Projector};
use crate::rng::trial_rng;

use super::haar_unitary;

/// `P_b(v) = |π_H(ρ) v|² / rk π_H(ρ)` over the columns `v` of a Haar
/// unitary drawn from `seed`. Field `v` is the column index.
pub fn random_basis_distribution(
    group: &Group,
    h: &SubgroupDesc,
    name: &IrrepName,
    seed: u64,
) -> Result<OutcomeDistribution> {
    let proj = Projector::new(group, h, name)?;
    if proj.rank == 0 {
        return Err(Error::InvalidParameter(format!(
            "{name} is never observed for {h}: the projection is zero"
        )));
    }
    let d = proj.matrix.nrows();
    let u = haar_unitary(d, &mut trial_rng(seed, 0));
    let pu = &proj.matrix * &u;
    let mut out = OutcomeDistribution::new(["v"])
        .with_meta("spec", group.spec())
        .with_meta("subgroup", h)
        .with_meta("irrep", name.to_string())
        .with_meta("basis", format!("random({seed})"))
        .with_meta("rank", proj.rank);
    for v in 0..d {
        let w: f64 = pu.column(v).iter().map(|z| z.norm_sqr()).sum();
        out.add(vec![v.into()], w / proj.rank as f64);
    }
    Ok(out)
}
