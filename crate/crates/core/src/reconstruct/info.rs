//! Maximum-likelihood reconstruction from the block / POVM / Hadamard
//! measurement, and the order-finding loop built on top of it.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use super::{
    reconstruct_normal_core, require_affine, restrict_to_order, sub_seed, to_affine,
    verify_subgroup, weak_weights, GroupOracle, ReconstructionResult,
};
use crate::arith::{factorize, mul_mod};
use crate::dist::Label;
use crate::error::Result;
use crate::group::{Group, SubgroupDesc};
use crate::repr::IrrepName;
use crate::rng::trial_rng;
use crate::sampling::{effective_coefficient, info_measurement_distribution, resolve_hidden};

/// Samples used per likelihood run: `12⌈log₂ p⌉ + 24`.
pub fn default_sample_count(p: u64) -> usize {
    let bits = 64 - (p - 1).leading_zeros() as usize;
    12 * bits + 24
}

/// `log L(b) = Σ log P_b(bit | m)` for every `b ∈ Z_p`, from counts of
/// `(m, bit)` with `P_b(0 | m) = cos²(π m b/p)`.
pub fn log_likelihoods(p: u64, counts: &BTreeMap<(u64, u64), u64>) -> Vec<f64> {
    (0..p)
        .map(|b| {
            counts
                .iter()
                .map(|(&(m, bit), &n)| {
                    let c = (PI * mul_mod(m, b, p) as f64 / p as f64).cos().powi(2);
                    let pr = if bit == 0 { c } else { 1.0 - c };
                    // exact zeros from rounding near the nodes
                    let pr = if pr < 1e-15 { 0.0 } else { pr };
                    n as f64 * pr.ln()
                })
                .sum()
        })
        .collect()
}

fn as_u64(l: &Label) -> u64 {
    match l {
        Label::Int(v) => *v as u64,
        Label::Text(_) => 0,
    }
}

/// Recover `b` for hidden `H_a^b` by maximum likelihood over all `p`
/// shifts. Every maximiser is verified, in ascending order of `b`.
pub fn ml_reconstruct_conjugate(
    group: &Group,
    oracle: &GroupOracle,
    a: u64,
    samples: usize,
    seed: u64,
) -> Result<ReconstructionResult> {
    require_affine(group)?;
    let p = group.p();
    let start = oracle.queries();
    let mut out = ReconstructionResult::empty();
    let hidden = resolve_hidden(group, oracle)?;
    let p_rho: f64 = weak_weights(group, &hidden)?
        .iter()
        .filter(|(n, _)| !matches!(n, IrrepName::Sigma(_)))
        .map(|(_, w)| w)
        .sum();
    let dist = if p_rho > 0.0 {
        Some(info_measurement_distribution(group, a, &hidden)?)
    } else {
        None
    };
    let sampler = dist.as_ref().map(|d| d.sampler());
    let mut counts: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for t in 0..samples {
        oracle.charge(1);
        out.trials += 1;
        let mut rng = trial_rng(seed, t as u64);
        match &sampler {
            Some(s) if rng.random::<f64>() < p_rho => {
                let o = s.sample(&mut rng);
                let (k, u, bit) = (as_u64(&o[0]), as_u64(&o[1]), as_u64(&o[2]));
                *counts.entry((effective_coefficient(group, a, k, u), bit)).or_insert(0) += 1;
                out.transcript.push(o.clone());
            }
            _ => out.transcript.push(vec!["sigma".into()]),
        }
    }
    if counts.is_empty() {
        out.queries = oracle.queries() - start;
        return Ok(out);
    }
    let ll = log_likelihoods(p, &counts);
    let best = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * (1.0 + best.abs());
    let tied: Vec<u64> = (0..p)
        .filter(|&b| ll[b as usize] == best || ll[b as usize] >= best - tol)
        .collect();
    let mut ranked: Vec<(u64, f64)> = (0..p).map(|b| (b, ll[b as usize])).collect();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    out.candidates = ranked.into_iter().take(16).collect();
    let mut vrng = trial_rng(sub_seed(seed, 23), 0);
    for &b in &tied {
        let cand = SubgroupDesc::Conjugate { a, b };
        if verify_subgroup(group, oracle, &cand, &mut vrng) {
            out.subgroup = Some(group.canonical(&cand));
            out.verified = true;
            break;
        }
    }
    if out.subgroup.is_none() {
        out.subgroup = Some(group.canonical(&SubgroupDesc::Conjugate { a, b: tied[0] }));
    }
    out.queries = oracle.queries() - start;
    Ok(out)
}

/// Order of a non-normal hidden subgroup, one prime power at a time: for
/// `p_i^α | q`, hide `H ∩ N_{p_i^α}` and test whether it is a conjugate of
/// full order `p_i^α`. Stops at the first failure for each prime.
pub fn determine_subgroup_order(
    group: &Arc<Group>,
    oracle: &GroupOracle,
    seed: u64,
    samples: usize,
) -> Result<u64> {
    let (affine, lifted) = to_affine(group, oracle)?;
    let mut order = 1;
    for (i, (prime, e)) in factorize(group.q()).into_iter().enumerate() {
        let mut pa = 1;
        for alpha in 1..=e {
            let next = pa * prime;
            let restricted = restrict_to_order(&affine, &lifted, next);
            let a = affine.element_of_order(next)?;
            let tag = 100 + 16 * i as u64 + alpha as u64;
            let r = ml_reconstruct_conjugate(&affine, &restricted, a, samples, sub_seed(seed, tag))?;
            if !r.verified {
                break;
            }
            pa = next;
        }
        order *= pa;
    }
    Ok(order)
}

/// Reconstruction with the likelihood measurement: normal core first,
/// otherwise the order, then the shift.
pub fn info_reconstruct_subgroup(
    group: &Arc<Group>,
    oracle: &GroupOracle,
    seed: u64,
) -> Result<ReconstructionResult> {
    let start = oracle.queries();
    let samples = default_sample_count(group.p());
    let mut vrng = trial_rng(sub_seed(seed, 2), 0);
    let core = reconstruct_normal_core(group, oracle, sub_seed(seed, 1))?;
    if core != SubgroupDesc::Trivial && verify_subgroup(group, oracle, &core, &mut vrng) {
        let mut out = ReconstructionResult::empty();
        out.subgroup = Some(core);
        out.verified = true;
        out.trials = super::core_sample_count(group);
        out.queries = oracle.queries() - start;
        return Ok(out);
    }
    let n = determine_subgroup_order(group, oracle, sub_seed(seed, 4), samples)?;
    if n == 1 {
        let mut out = ReconstructionResult::empty();
        out.subgroup = Some(SubgroupDesc::Trivial);
        out.verified = verify_subgroup(group, oracle, &SubgroupDesc::Trivial, &mut vrng);
        out.queries = oracle.queries() - start;
        return Ok(out);
    }
    let (affine, lifted) = to_affine(group, oracle)?;
    let a = affine.element_of_order(n)?;
    let mut out = ml_reconstruct_conjugate(&affine, &lifted, a, samples, sub_seed(seed, 5))?;
    if let Some(SubgroupDesc::Conjugate { a, b }) = out.subgroup {
        let cand = group.canonical(&SubgroupDesc::Conjugate { a, b });
        out.verified = verify_subgroup(group, oracle, &cand, &mut vrng);
        out.subgroup = Some(cand);
    }
    out.queries = oracle.queries() - start;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::make_subgroup_oracle;

    #[test]
    fn likelihood_is_symmetric_in_b() {
        let mut counts = BTreeMap::new();
        counts.insert((3, 0), 4);
        counts.insert((10, 1), 2);
        let ll = log_likelihoods(29, &counts);
        for b in 1..29usize {
            assert!((ll[b] - ll[29 - b]).abs() < 1e-9);
        }
    }

    #[test]
    fn ml_recovers_order_two_shift() {
        let g = Arc::new(Group::affine(103).unwrap());
        let a = g.element_of_order(2).unwrap();
        let f = make_subgroup_oracle(g.clone(), SubgroupDesc::Conjugate { a, b: 40 });
        let r = ml_reconstruct_conjugate(&g, &f, a, 300, 1).unwrap();
        assert!(r.verified);
        assert_eq!(r.subgroup, Some(SubgroupDesc::Conjugate { a, b: 40 }));
    }

    #[test]
    fn order_finding_and_full_reconstruction() {
        let g = Arc::new(Group::affine(29).unwrap());
        for (r, b) in [(1u64, 0u64), (2, 5), (4, 11), (7, 3), (14, 20), (28, 9)] {
            let h = if r == 1 {
                SubgroupDesc::Trivial
            } else {
                SubgroupDesc::Conjugate { a: g.element_of_order(r).unwrap(), b }
            };
            let f = make_subgroup_oracle(g.clone(), h);
            let n = determine_subgroup_order(&g, &f, 4, default_sample_count(29)).unwrap();
            assert_eq!(n, r, "{h}");
            let res = info_reconstruct_subgroup(&g, &f, 4).unwrap();
            assert!(res.verified, "{h}");
            assert_eq!(res.subgroup, Some(h));
        }
    }

    #[test]
    fn qhedral_info_reconstruction() {
        let g = Arc::new(Group::qhedral(23, 11).unwrap());
        let a = g.spec().a;
        for h in [
            SubgroupDesc::Conjugate { a, b: 6 },
            SubgroupDesc::Trivial,
            SubgroupDesc::Normal { q: 1 },
        ] {
            let f = make_subgroup_oracle(g.clone(), h);
            let res = info_reconstruct_subgroup(&g, &f, 2).unwrap();
            assert!(res.verified, "{h}");
            assert_eq!(res.subgroup, Some(h));
        }
    }
}
