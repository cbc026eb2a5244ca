//! Reconstruction algorithms: the hidden conjugate solver for `A_p`, the
//! q-hedral HSP solver, normal-core recovery by weak sampling, and the
//! likelihood-based reconstructions with order finding.

mod hcp;
mod info;

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::arith::{gcd, pow_mod};
use crate::dist::Outcome;
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, GroupKind, SubgroupDesc};
use crate::oracle::{HiddenOracle, Symbol};
use crate::repr::{dimension, irreps, projector_rank, IrrepName};
use crate::rng::trial_rng;
use crate::sampling::resolve_hidden;

pub use hcp::{solve_hcp_affine, HcpOptions};
pub use info::{
    default_sample_count, determine_subgroup_order, info_reconstruct_subgroup, log_likelihoods,
    ml_reconstruct_conjugate,
};

pub type GroupOracle = HiddenOracle<GroupElement>;

/// Outcome of a reconstruction run.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionResult {
    /// Best candidate found; `None` if no candidate was ever produced.
    pub subgroup: Option<SubgroupDesc>,
    pub verified: bool,
    pub trials: usize,
    pub queries: u64,
    /// Observed outcomes, one per trial; `["sigma"]` when a one-dimensional
    /// irrep was observed.
    pub transcript: Vec<Outcome>,
    /// `(b, score)` for the candidates that were scored, best first.
    pub candidates: Vec<(u64, f64)>,
}

impl ReconstructionResult {
    fn empty() -> Self {
        ReconstructionResult {
            subgroup: None,
            verified: false,
            trials: 0,
            queries: 0,
            transcript: Vec::new(),
            candidates: Vec::new(),
        }
    }

    fn absorb(&mut self, other: &ReconstructionResult) {
        self.trials += other.trials;
        self.transcript.extend(other.transcript.iter().cloned());
    }
}

/// Derived seed for a sub-step, so that each stage draws from its own streams.
pub(crate) fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Monte Carlo check that `f`'s level sets are the left cosets of `cand`.
///
/// `f` must be constant on `2⌈log₂ p⌉` random pairs `(g, gh)`, `h ∈ cand`,
/// inside each of `min(index, 32)` random cosets, and must separate 32
/// random pairs drawn from distinct cosets.
pub fn verify_subgroup<R: Rng + ?Sized>(
    group: &Group,
    oracle: &GroupOracle,
    cand: &SubgroupDesc,
    rng: &mut R,
) -> bool {
    if group.validate_subgroup(cand).is_err() {
        return false;
    }
    let index = group.order() / group.subgroup_order(cand);
    let per_coset = 2 * (64 - (group.p() - 1).leading_zeros() as u64).max(1);
    for _ in 0..index.min(32) {
        let g = group.random_element(rng);
        let base = oracle.query(&g);
        for _ in 0..per_coset {
            let h = group.random_subgroup_element(cand, rng);
            if oracle.query(&group.mul(&g, &h)) != base {
                return false;
            }
        }
    }
    if index > 1 {
        for _ in 0..32 {
            let g1 = group.random_element(rng);
            let mut g2 = group.random_element(rng);
            while group.coset_label(cand, &g1) == group.coset_label(cand, &g2) {
                g2 = group.random_element(rng);
            }
            if oracle.query(&g1) == oracle.query(&g2) {
                return false;
            }
        }
    }
    true
}

/// Probability of each irrep under weak sampling of the hidden subgroup.
fn weak_weights(group: &Group, h: &SubgroupDesc) -> Result<Vec<(IrrepName, f64)>> {
    let go = group.order() as f64;
    let ho = group.subgroup_order(h) as f64;
    irreps(group)
        .into_iter()
        .map(|n| {
            let r = projector_rank(group, h, &n)? as f64;
            Ok((n, dimension(group, &n) as f64 * ho * r / go))
        })
        .collect()
}

/// Number of weak samples used for the normal core.
pub fn core_sample_count(group: &Group) -> usize {
    let bits = 64 - (group.order() - 1).leading_zeros() as usize;
    4 * bits + 8
}

/// Intersection of the kernels of the irreps observed by weak Fourier
/// sampling, which is the normal core of the hidden subgroup once enough
/// samples are taken.
pub fn reconstruct_normal_core(
    group: &Group,
    oracle: &GroupOracle,
    seed: u64,
) -> Result<SubgroupDesc> {
    let hidden = resolve_hidden(group, oracle)?;
    let weights = weak_weights(group, &hidden)?;
    let mut core_q = group.q();
    let mut trivial = false;
    for t in 0..core_sample_count(group) {
        oracle.charge(1);
        let mut rng = trial_rng(seed, t as u64);
        let mut u = rng.random::<f64>();
        let mut pick = weights.last().expect("irreps").0;
        for (name, w) in &weights {
            if u < *w {
                pick = *name;
                break;
            }
            u -= w;
        }
        match pick {
            IrrepName::Sigma(l) => core_q = gcd(core_q, l),
            _ => trivial = true,
        }
    }
    Ok(if trivial {
        SubgroupDesc::Trivial
    } else {
        group.canonical(&SubgroupDesc::Normal { q: core_q })
    })
}

/// The same subgroup viewed inside `A_p`.
fn embed_desc(group: &Group, h: &SubgroupDesc) -> SubgroupDesc {
    match *h {
        SubgroupDesc::Full => SubgroupDesc::Normal { q: group.q() },
        other => other,
    }
}

/// Lift an oracle on `Z_q ⋉ Z_p` to `A_p`:
/// `f'(x, y) = (f(γ^{-r} x, γ^{-r} y), x^q)` with `r = log_γ x mod (p-1)/q`.
///
/// The first component evaluates `f` on the part of `(x, y)` inside `N_q`
/// after removing the transversal element `(γ^r, 0)`; the second tells the
/// cosets of `N_q` apart. Each `f'` query costs one `f` query.
pub fn extend_qhedral_oracle(
    group: &Arc<Group>,
    oracle: &GroupOracle,
) -> Result<(Arc<Group>, GroupOracle)> {
    let spec = *group.spec();
    let affine = Arc::new(Group::new(spec.affine_hull())?);
    let p = spec.p;
    let q = spec.q;
    let step = (p - 1) / q;
    let gamma_inv = crate::arith::inv_mod(spec.gamma, p);
    let inner = oracle.clone();
    let aff = affine.clone();
    let hook = oracle.clone();
    let mut lifted = HiddenOracle::new(move |g: &GroupElement| {
        let r = aff.log(g.a) % step;
        let t = pow_mod(gamma_inv, r, p);
        let n = GroupElement::new(crate::arith::mul_mod(t, g.a, p), crate::arith::mul_mod(t, g.b, p));
        Symbol::Tuple(vec![inner.evaluate_uncounted(&n), Symbol::Atom(pow_mod(g.a, q, p))])
    })
    .with_charge_hook(move |n| hook.charge(n));
    if let Some(t) = oracle.truth() {
        lifted = lifted.with_truth(embed_desc(group, &t));
    }
    Ok((affine, lifted))
}

/// `f'(g) = (f(g), g_a^e)`: hides `H ∩ N_e`.
pub(crate) fn restrict_to_order(group: &Group, oracle: &GroupOracle, e: u64) -> GroupOracle {
    let p = group.p();
    let inner = oracle.clone();
    let hook = oracle.clone();
    let mut out = HiddenOracle::new(move |g: &GroupElement| {
        Symbol::Tuple(vec![inner.evaluate_uncounted(g), Symbol::Atom(pow_mod(g.a, e, p))])
    })
    .with_charge_hook(move |n| hook.charge(n));
    if let Some(t) = oracle.truth() {
        if let Ok(elems) = group.enumerate_subgroup(&t) {
            let kept: Vec<GroupElement> =
                elems.into_iter().filter(|x| pow_mod(x.a, e, p) == 1).collect();
            if let Ok(h) = group.identify_subgroup(&kept) {
                out = out.with_truth(h);
            }
        }
    }
    out
}

/// Embed into `A_p` when the group is q-hedral.
pub(crate) fn to_affine(group: &Arc<Group>, oracle: &GroupOracle) -> Result<(Arc<Group>, GroupOracle)> {
    if group.kind() == GroupKind::Affine {
        Ok((group.clone(), oracle.clone()))
    } else {
        extend_qhedral_oracle(group, oracle)
    }
}

/// Full reconstruction in `Z_q ⋉ Z_p` for prime `q`: normal core by weak
/// sampling, otherwise the hidden conjugate solver on the lift to `A_p`,
/// otherwise the trivial subgroup.
pub fn solve_hsp_qhedral(
    group: &Arc<Group>,
    oracle: &GroupOracle,
    seed: u64,
    max_trials: usize,
) -> Result<ReconstructionResult> {
    let start = oracle.queries();
    let mut out = ReconstructionResult::empty();
    let core = reconstruct_normal_core(group, oracle, sub_seed(seed, 1))?;
    out.trials += core_sample_count(group);
    let mut vrng = trial_rng(sub_seed(seed, 2), 0);
    if core != SubgroupDesc::Trivial && verify_subgroup(group, oracle, &core, &mut vrng) {
        out.subgroup = Some(core);
        out.verified = true;
        out.queries = oracle.queries() - start;
        return Ok(out);
    }
    let (affine, lifted) = to_affine(group, oracle)?;
    let a = group.spec().a;
    let hcp = solve_hcp_affine(
        &affine,
        &lifted,
        a,
        sub_seed(seed, 3),
        &HcpOptions {
            max_trials,
            ..HcpOptions::default()
        },
    )?;
    out.absorb(&hcp);
    out.candidates = hcp.candidates.clone();
    if hcp.verified {
        if let Some(SubgroupDesc::Conjugate { a, b }) = hcp.subgroup {
            let cand = group.canonical(&SubgroupDesc::Conjugate { a, b });
            if verify_subgroup(group, oracle, &cand, &mut vrng) {
                out.subgroup = Some(cand);
                out.verified = true;
                out.queries = oracle.queries() - start;
                return Ok(out);
            }
        }
    }
    out.subgroup = Some(SubgroupDesc::Trivial);
    out.verified = verify_subgroup(group, oracle, &SubgroupDesc::Trivial, &mut vrng);
    out.queries = oracle.queries() - start;
    Ok(out)
}

pub(crate) fn require_affine(group: &Group) -> Result<()> {
    if group.kind() == GroupKind::Affine {
        Ok(())
    } else {
        Err(Error::NotAffine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::make_subgroup_oracle;
    use std::collections::{BTreeMap, BTreeSet};

    fn partition(group: &Group, f: &GroupOracle) -> BTreeSet<BTreeSet<GroupElement>> {
        let mut by: BTreeMap<Symbol, BTreeSet<GroupElement>> = BTreeMap::new();
        for x in group.elements() {
            by.entry(f.evaluate_uncounted(&x)).or_default().insert(x);
        }
        by.into_values().collect()
    }

    #[test]
    fn verification_accepts_truth_and_rejects_neighbours() {
        let g = Arc::new(Group::affine(103).unwrap());
        let a = g.element_of_order(17).unwrap();
        let f = make_subgroup_oracle(g.clone(), SubgroupDesc::Conjugate { a, b: 40 });
        let mut rng = trial_rng(1, 0);
        assert!(verify_subgroup(&g, &f, &SubgroupDesc::Conjugate { a, b: 40 }, &mut rng));
        assert!(!verify_subgroup(&g, &f, &SubgroupDesc::Conjugate { a, b: 41 }, &mut rng));
        assert!(!verify_subgroup(&g, &f, &SubgroupDesc::Full, &mut rng));
        assert!(!verify_subgroup(&g, &f, &SubgroupDesc::Normal { q: 17 }, &mut rng));
        assert!(f.queries() > 0);
    }

    #[test]
    fn normal_core_examples() {
        let g = Arc::new(Group::qhedral(23, 11).unwrap());
        let a = g.spec().a;
        for (h, want) in [
            (SubgroupDesc::Normal { q: 1 }, SubgroupDesc::Normal { q: 1 }),
            (SubgroupDesc::Full, SubgroupDesc::Full),
            (SubgroupDesc::Conjugate { a, b: 5 }, SubgroupDesc::Trivial),
            (SubgroupDesc::Trivial, SubgroupDesc::Trivial),
        ] {
            let f = make_subgroup_oracle(g.clone(), h);
            assert_eq!(reconstruct_normal_core(&g, &f, 3).unwrap(), want, "{h}");
        }
        let g = Arc::new(Group::affine(29).unwrap());
        for q in [1u64, 2, 4, 7, 14] {
            let f = make_subgroup_oracle(g.clone(), SubgroupDesc::Normal { q });
            assert_eq!(reconstruct_normal_core(&g, &f, 9).unwrap(), SubgroupDesc::Normal { q });
        }
    }

    #[test]
    fn core_is_conjugation_invariant() {
        let g = Arc::new(Group::affine(13).unwrap());
        for seed in 0..5 {
            let a = g.element_of_order(4).unwrap();
            let f = make_subgroup_oracle(g.clone(), SubgroupDesc::Conjugate { a, b: seed });
            let core = reconstruct_normal_core(&g, &f, seed).unwrap();
            for c in [GroupElement::new(g.spec().gamma, 0), GroupElement::new(1, 1)] {
                assert_eq!(g.conjugate_subgroup(&core, &c), core);
            }
        }
    }

    #[test]
    fn lifted_oracle_hides_embedded_subgroup() {
        let g = Arc::new(Group::qhedral(23, 11).unwrap());
        let a = g.spec().a;
        for h in [
            SubgroupDesc::Trivial,
            SubgroupDesc::Conjugate { a, b: 7 },
            SubgroupDesc::Normal { q: 1 },
            SubgroupDesc::Full,
        ] {
            let f = make_subgroup_oracle(g.clone(), h);
            let (aff, lifted) = extend_qhedral_oracle(&g, &f).unwrap();
            let want = make_subgroup_oracle(aff.clone(), embed_desc(&g, &h));
            assert_eq!(partition(&aff, &lifted), partition(&aff, &want), "{h}");
            lifted.query(&GroupElement::new(5, 1));
            assert_eq!(f.queries(), 1);
        }
    }

    #[test]
    fn second_component_separates_normal_cosets() {
        let g = Arc::new(Group::qhedral(23, 11).unwrap());
        let f = make_subgroup_oracle(g.clone(), SubgroupDesc::Full);
        let (aff, lifted) = extend_qhedral_oracle(&g, &f).unwrap();
        for x in 1..23u64 {
            for y in 1..23u64 {
                let same = pow_mod(x, 11, 23) == pow_mod(y, 11, 23);
                let fx = lifted.evaluate_uncounted(&GroupElement::new(x, 3));
                let fy = lifted.evaluate_uncounted(&GroupElement::new(y, 3));
                assert_eq!(fx == fy, same);
            }
        }
        assert_eq!(aff.order(), 23 * 22);
    }

    #[test]
    fn qhedral_solver_examples() {
        let g = Arc::new(Group::qhedral(23, 11).unwrap());
        let a = g.spec().a;
        for h in [
            SubgroupDesc::Normal { q: 1 },
            SubgroupDesc::Conjugate { a, b: 5 },
            SubgroupDesc::Trivial,
            SubgroupDesc::Full,
        ] {
            let f = make_subgroup_oracle(g.clone(), h);
            let r = solve_hsp_qhedral(&g, &f, 7, 200).unwrap();
            assert!(r.verified, "{h}");
            assert_eq!(r.subgroup, Some(h));
            assert_eq!(r.queries, f.queries());
        }
    }

    #[test]
    fn restriction_truth() {
        let g = Group::affine(29).unwrap();
        let a = g.element_of_order(14).unwrap();
        let f = make_subgroup_oracle(Arc::new(Group::affine(29).unwrap()), SubgroupDesc::Conjugate { a, b: 3 });
        let r = restrict_to_order(&g, &f, 4);
        let want = SubgroupDesc::Conjugate { a: g.element_of_order(2).unwrap(), b: 3 };
        assert_eq!(r.truth(), Some(want));
        assert_eq!(resolve_hidden(&g, &r).unwrap(), want);
    }
}
