//! Hidden conjugate solver for `A_p`: row-Fourier samples, window voting on
//! the shift, and classical verification of the leading candidate.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;

use super::{require_affine, sub_seed, verify_subgroup, GroupOracle, ReconstructionResult};
use crate::error::Result;
use crate::group::{Group, SubgroupDesc};
use crate::rng::trial_rng;
use crate::sampling::{candidate_window, resolve_hidden, RowFourierSampler};

#[derive(Debug, Clone)]
pub struct HcpOptions {
    pub max_trials: usize,
    /// Neighbours on each side of the window centre that receive a vote.
    pub window: u64,
    /// Votes a candidate needs before it is verified.
    pub min_votes: u32,
    /// Trials simulated per parallel batch. Results do not depend on it.
    pub chunk: usize,
}

impl Default for HcpOptions {
    fn default() -> Self {
        HcpOptions {
            max_trials: 200,
            window: 1,
            min_votes: 2,
            chunk: 16,
        }
    }
}

fn leader(votes: &BTreeMap<u64, u32>, tested: &BTreeSet<u64>, min_votes: u32) -> Option<u64> {
    votes
        .iter()
        .filter(|(b, v)| **v >= min_votes && !tested.contains(b))
        .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)))
        .map(|(b, _)| *b)
}

/// Find `b` with hidden subgroup `H_a^b`, given `a`.
///
/// Each trial prepares one coset state (one query) and yields an
/// observation. Every shift near `p ℓ/(p-1)` gets a vote; after each trial
/// the best untested candidate with enough votes is verified. When the
/// budget runs out the best candidate is returned unverified.
pub fn solve_hcp_affine(
    group: &Arc<Group>,
    oracle: &GroupOracle,
    a: u64,
    seed: u64,
    opts: &HcpOptions,
) -> Result<ReconstructionResult> {
    require_affine(group)?;
    group.validate_subgroup(&SubgroupDesc::Conjugate { a, b: 0 })?;
    let start = oracle.queries();
    let p = group.p();
    let sampler = RowFourierSampler::new(group.clone(), resolve_hidden(group, oracle)?)?;
    let mut votes: BTreeMap<u64, u32> = BTreeMap::new();
    let mut tested = BTreeSet::new();
    let mut out = ReconstructionResult::empty();
    let chunk = opts.chunk.max(1);
    let mut t0 = 0;
    'outer: while t0 < opts.max_trials {
        let t1 = (t0 + chunk).min(opts.max_trials);
        let batch: Vec<Option<(u64, u64)>> = (t0..t1)
            .into_par_iter()
            .map(|t| sampler.sample(&mut trial_rng(seed, t as u64)))
            .collect();
        for obs in batch {
            oracle.charge(1);
            out.trials += 1;
            match obs {
                Some((class, ell)) => {
                    out.transcript.push(vec![class.into(), ell.into()]);
                    for b in candidate_window(p, ell, opts.window) {
                        *votes.entry(b).or_insert(0) += 1;
                    }
                }
                None => out.transcript.push(vec!["sigma".into()]),
            }
            if let Some(b) = leader(&votes, &tested, opts.min_votes) {
                tested.insert(b);
                let cand = SubgroupDesc::Conjugate { a, b };
                let mut vrng = trial_rng(sub_seed(seed, 17), tested.len() as u64);
                if verify_subgroup(group, oracle, &cand, &mut vrng) {
                    out.subgroup = Some(group.canonical(&cand));
                    out.verified = true;
                    break 'outer;
                }
            }
        }
        t0 = t1;
    }
    let mut ranked: Vec<(u64, u32)> = votes.into_iter().collect();
    ranked.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    if out.subgroup.is_none() {
        out.subgroup = ranked
            .first()
            .map(|(b, _)| group.canonical(&SubgroupDesc::Conjugate { a, b: *b }));
    }
    out.candidates = ranked
        .into_iter()
        .take(16)
        .map(|(b, v)| (b, v as f64))
        .collect();
    out.queries = oracle.queries() - start;
    Ok(out)
}
