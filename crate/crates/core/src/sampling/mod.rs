//! Fourier sampling of coset states: exact outcome distributions for the
//! weak and strong standard methods and for the specialised measurements
//! used by the reconstruction algorithms.

pub mod abelian;
pub mod info;
pub mod random;
pub mod row;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dist::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, SubgroupDesc};
use crate::oracle::HiddenOracle;
use crate::repr::{dimension, evaluate, irreps, CMatrix, IrrepName, DENSE_CAP};
use crate::rng::trial_rng;

pub use abelian::{abelian_sample_distribution, forgetful_distribution};
pub use info::{
    cos_sq, effective_coefficient, info_measurement_distribution, info_measurement_formula,
    info_state_vector_distribution, povm_kraus, STATE_VECTOR_CAP,
};
pub use random::random_basis_distribution;
pub use row::{
    candidate_window, closest_ell, coset_interval_fraction, row_fourier_bruteforce,
    row_fourier_distribution, row_fourier_maximal_closed_form, RowFourierSampler,
};

/// Groups up to this order have their hidden subgroup recovered by the
/// simulator from the oracle's level sets; above it the oracle must declare it.
pub const SIMULATOR_ENUMERATION_LIMIT: u64 = 1 << 18;

/// Uniform superposition over the left coset `cH`.
#[derive(Debug, Clone)]
pub struct CosetState {
    pub c: GroupElement,
    pub h: SubgroupDesc,
    pub support: Vec<GroupElement>,
}

impl CosetState {
    pub fn new(group: &Group, h: &SubgroupDesc, c: &GroupElement) -> Result<Self> {
        group.check(c)?;
        let support = group
            .enumerate_subgroup(h)?
            .iter()
            .map(|x| group.mul(c, x))
            .collect();
        Ok(CosetState {
            c: *c,
            h: *h,
            support,
        })
    }

    pub fn amplitude(&self) -> f64 {
        1.0 / (self.support.len() as f64).sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.support.len() as f64 * self.amplitude().powi(2)
    }
}

/// `φ̂(ρ) = sqrt(d_ρ/|G|) Σ_g φ(g) ρ(g)` for a coset state.
pub fn fourier_transform(group: &Group, state: &CosetState, name: &IrrepName) -> Result<CMatrix> {
    let d = dimension(group, name);
    if d > DENSE_CAP {
        return Err(Error::CapExceeded {
            size: d as u64,
            cap: DENSE_CAP as u64,
        });
    }
    let scale = Complex64::new(
        (d as f64 / group.order() as f64).sqrt() * state.amplitude(),
        0.0,
    );
    let mut acc = CMatrix::zeros(d, d);
    for x in &state.support {
        evaluate(group, name, x)?.add_into(&mut acc, scale);
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementBasis {
    Adapted,
    Random { seed: u64 },
}

impl MeasurementBasis {
    pub fn id(&self) -> String {
        match self {
            MeasurementBasis::Adapted => "adapted".into(),
            MeasurementBasis::Random { seed } => format!("random({seed})"),
        }
    }

    /// Change-of-basis unitary for the irrep at position `index` in
    /// [`irreps`]; `None` for the adapted basis.
    pub fn unitary(&self, d: usize, index: usize) -> Option<CMatrix> {
        match self {
            MeasurementBasis::Adapted => None,
            MeasurementBasis::Random { seed } => {
                Some(haar_unitary(d, &mut trial_rng(*seed, index as u64)))
            }
        }
    }
}

/// Haar-random unitary: QR of a complex Gaussian matrix, with the diagonal
/// of R made real positive.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let z = DMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn fields() -> [&'static str; 3] {
    ["irrep", "row", "col"]
}

fn add_entries(
    out: &mut OutcomeDistribution,
    name: &IrrepName,
    m: &CMatrix,
    u: Option<&CMatrix>,
    weight: f64,
) {
    let rotated;
    let m = match u {
        Some(u) => {
            rotated = u.adjoint() * m * u;
            &rotated
        }
        None => m,
    };
    let label = name.to_string();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let pr = m[(i, j)].norm_sqr() * weight;
            if pr > 1e-300 {
                out.add(vec![label.clone().into(), i.into(), j.into()], pr);
            }
        }
    }
}

fn strong_into(
    group: &Group,
    h: &SubgroupDesc,
    c: &GroupElement,
    unitaries: &[Option<CMatrix>],
    weight: f64,
    out: &mut OutcomeDistribution,
) -> Result<()> {
    let state = CosetState::new(group, h, c)?;
    for (idx, name) in irreps(group).iter().enumerate() {
        let m = fourier_transform(group, &state, name)?;
        add_entries(out, name, &m, unitaries[idx].as_ref(), weight);
    }
    Ok(())
}

fn basis_unitaries(group: &Group, basis: &MeasurementBasis) -> Vec<Option<CMatrix>> {
    irreps(group)
        .iter()
        .enumerate()
        .map(|(i, n)| basis.unitary(dimension(group, n), i))
        .collect()
}

/// Strong standard method on the single coset state `cH`:
/// `P(ρ, i, j) = |(B† φ̂_c(ρ) B)_{ij}|²`.
pub fn strong_sample_distribution(
    group: &Group,
    h: &SubgroupDesc,
    c: &GroupElement,
    basis: &MeasurementBasis,
) -> Result<OutcomeDistribution> {
    let mut out = OutcomeDistribution::new(fields())
        .with_meta("spec", group.spec())
        .with_meta("subgroup", h)
        .with_meta("basis", basis.id())
        .with_meta("coset", c)
        .with_meta("averaged", false);
    strong_into(group, h, c, &basis_unitaries(group, basis), 1.0, &mut out)?;
    out.clean(0.0);
    Ok(out)
}

/// The uniform mixture of [`strong_sample_distribution`] over all cosets.
pub fn coset_averaged_distribution(
    group: &Group,
    h: &SubgroupDesc,
    basis: &MeasurementBasis,
) -> Result<OutcomeDistribution> {
    let reps = group.coset_representatives(h)?;
    let unitaries = basis_unitaries(group, basis);
    let mut out = OutcomeDistribution::new(fields())
        .with_meta("spec", group.spec())
        .with_meta("subgroup", h)
        .with_meta("basis", basis.id())
        .with_meta("averaged", true);
    let w = 1.0 / reps.len() as f64;
    for c in &reps {
        strong_into(group, h, c, &unitaries, w, &mut out)?;
    }
    out.clean(0.0);
    Ok(out)
}

/// The subgroup an oracle hides, as seen by the simulator.
///
/// Small groups: the level set of the identity is enumerated without
/// charging queries and identified. Large groups: the oracle's declared
/// subgroup is used.
pub fn resolve_hidden(group: &Group, oracle: &HiddenOracle<GroupElement>) -> Result<SubgroupDesc> {
    if group.order() <= SIMULATOR_ENUMERATION_LIMIT {
        let base = oracle.evaluate_uncounted(&GroupElement::IDENTITY);
        let level: Vec<GroupElement> = group
            .elements()
            .filter(|x| oracle.evaluate_uncounted(x) == base)
            .collect();
        return group.identify_subgroup(&level);
    }
    oracle.truth().map(|h| group.canonical(&h)).ok_or_else(|| {
        Error::HiddenUnavailable(format!(
            "group of order {} is too large to enumerate and the oracle declares no subgroup",
            group.order()
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::make_subgroup_oracle;
    use crate::repr::observe_rep_distribution;
    use std::sync::Arc;

    #[test]
    fn haar_is_unitary_and_reproducible() {
        let b = MeasurementBasis::Random { seed: 4 };
        let u = b.unitary(20, 3).unwrap();
        let err = crate::repr::max_abs(&(u.adjoint() * &u - CMatrix::identity(20, 20)));
        assert!(err < 1e-9);
        assert_eq!(u, b.unitary(20, 3).unwrap());
        assert_ne!(u, b.unitary(20, 4).unwrap());
        assert!(MeasurementBasis::Adapted.unitary(5, 0).is_none());
    }

    #[test]
    fn coset_state_and_transform() {
        let g = Group::affine(7).unwrap();
        let h = SubgroupDesc::Conjugate { a: 2, b: 1 };
        let s = CosetState::new(&g, &h, &GroupElement::new(3, 5)).unwrap();
        assert!((s.norm_sq() - 1.0).abs() < 1e-15);
        assert_eq!(s.support.len(), 3);
        // Plancherel: Σ_ρ ‖φ̂(ρ)‖² = 1
        let total: f64 = irreps(&g)
            .iter()
            .map(|n| fourier_transform(&g, &s, n).unwrap().iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strong_examples() {
        let g = Group::affine(7).unwrap();
        let d = strong_sample_distribution(&g, &SubgroupDesc::Full, &GroupElement::IDENTITY, &MeasurementBasis::Adapted)
            .unwrap();
        assert!((d.get(&["sigma_0".into(), 0usize.into(), 0usize.into()]) - 1.0).abs() < 1e-12);
        let gamma = g.spec().gamma;
        let h = SubgroupDesc::Conjugate { a: gamma, b: 0 };
        let d = strong_sample_distribution(&g, &h, &GroupElement::IDENTITY, &MeasurementBasis::Adapted).unwrap();
        let rho = d.marginal(&[0]).get(&["rho".into()]);
        assert!((rho - 6.0 / 7.0).abs() < 1e-12);
        // rank one: every (row, col) of ρ carries the same mass
        for i in 0..6usize {
            for j in 0..6usize {
                let pr = d.get(&["rho".into(), i.into(), j.into()]);
                assert!((pr - 6.0 / 7.0 / 36.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn averaged_marginal_is_weak_distribution() {
        for (p, q) in [(7u64, 6u64), (7, 3), (13, 4)] {
            let g = Group::qhedral(p, q).unwrap();
            let a = g.spec().a;
            for h in [
                SubgroupDesc::Trivial,
                SubgroupDesc::Normal { q: 1 },
                SubgroupDesc::Conjugate { a, b: 2 },
            ] {
                for basis in [MeasurementBasis::Adapted, MeasurementBasis::Random { seed: 1 }] {
                    let d = coset_averaged_distribution(&g, &h, &basis).unwrap();
                    assert!((d.total() - 1.0).abs() < 1e-9);
                    let weak = observe_rep_distribution(&g, &h).unwrap();
                    assert!(d.marginal(&[0]).max_abs_diff(&weak).unwrap() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn trivial_subgroup_average_is_plancherel_per_entry() {
        let g = Group::affine(7).unwrap();
        let d = coset_averaged_distribution(&g, &SubgroupDesc::Trivial, &MeasurementBasis::Adapted).unwrap();
        // brute force over the 42 singleton cosets
        let mut brute = OutcomeDistribution::new(fields());
        for c in g.elements() {
            let s = strong_sample_distribution(&g, &SubgroupDesc::Trivial, &c, &MeasurementBasis::Adapted).unwrap();
            brute.accumulate(&s, 1.0 / 42.0).unwrap();
        }
        assert!(d.max_abs_diff(&brute).unwrap() < 1e-12);
        // ρ(c) is monomial, so each entry of ρ has mass d/|G| · 1/d = 1/42
        assert!((d.get(&["rho".into(), 0usize.into(), 0usize.into()]) - 1.0 / 42.0).abs() < 1e-12);
    }

    #[test]
    fn raw_adapted_measurement_hides_the_shift() {
        // every entry of ρ(c)π has modulus 1/|H| on its support, so the
        // (row, col) statistics carry no information about b; the row
        // Fourier and block measurements are what separate conjugates
        let g = Group::affine(7).unwrap();
        let h1 = SubgroupDesc::Conjugate { a: 2, b: 1 };
        let h3 = SubgroupDesc::Conjugate { a: 2, b: 3 };
        let d1 = coset_averaged_distribution(&g, &h1, &MeasurementBasis::Adapted).unwrap();
        let d3 = coset_averaged_distribution(&g, &h3, &MeasurementBasis::Adapted).unwrap();
        assert!(d1.total_variation(&d3).unwrap() < 1e-12);
        let i1 = info_measurement_formula(&g, 2, 1).unwrap();
        let i3 = info_measurement_formula(&g, 2, 3).unwrap();
        assert!(i1.total_variation(&i3).unwrap() > 0.25);
        let r1 = row_fourier_distribution(&g, &h1).unwrap();
        let r3 = row_fourier_distribution(&g, &h3).unwrap();
        assert!(r1.total_variation(&r3).unwrap() > 0.1);
    }

    #[test]
    fn resolve_from_level_sets() {
        let g = Arc::new(Group::affine(23).unwrap());
        let h = SubgroupDesc::Conjugate { a: g.element_of_order(11).unwrap(), b: 5 };
        let f = make_subgroup_oracle(g.clone(), h);
        assert_eq!(resolve_hidden(&g, &f).unwrap(), h);
        assert_eq!(f.queries(), 0);
        let big = Arc::new(Group::affine(10007).unwrap());
        let anon = HiddenOracle::new(|_: &GroupElement| crate::oracle::Symbol::Atom(0));
        assert!(matches!(resolve_hidden(&big, &anon), Err(Error::HiddenUnavailable(_))));
    }
}
