//! Classical simulation of quantum Fourier sampling for hidden subgroup
//! problems over the affine groups `A_p` and the q-hedral groups
//! `Z_q ⋉ Z_p`.

pub mod acceptance;
pub mod arith;
pub mod dist;
pub mod error;
pub mod expsums;
pub mod extension;
pub mod group;
pub mod oracle;
pub mod repr;
pub mod reconstruct;
pub mod rng;
pub mod roots;
pub mod sampling;
pub mod shift;

pub use dist::{Label, OutcomeDistribution};
pub use error::{Error, Result};
pub use group::{Group, GroupConfig, GroupElement, GroupKind, GroupSpec, SubgroupDesc};
pub use oracle::{make_subgroup_oracle, HiddenOracle, Symbol};
pub use repr::IrrepName;
