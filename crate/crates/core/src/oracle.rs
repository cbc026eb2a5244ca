//! Hidden-subgroup oracles with query accounting.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::group::{Group, GroupElement, SubgroupDesc};

/// An opaque oracle output. Tuples let derived oracles combine outputs
/// without hashing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Symbol {
    Atom(u64),
    Tuple(Vec<Symbol>),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Atom(x) => write!(f, "{x}"),
            Symbol::Tuple(items) => {
                write!(f, "(")?;
                for (i, s) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{s}")?;
                }
                write!(f, ")")
            }
        }
    }
}

type EvalFn<E> = dyn Fn(&E) -> Symbol + Send + Sync;
type ChargeFn = dyn Fn(u64) + Send + Sync;

/// A function on `E` that is constant on the left cosets of a hidden
/// subgroup and distinct across them.
///
/// Clones share the query counter. A derived oracle (one built on top of
/// another) installs a charge hook so that its queries are also billed to
/// the oracle underneath.
pub struct HiddenOracle<E> {
    eval: Arc<EvalFn<E>>,
    queries: Arc<AtomicU64>,
    on_charge: Option<Arc<ChargeFn>>,
    truth: Option<SubgroupDesc>,
}

impl<E> Clone for HiddenOracle<E> {
    fn clone(&self) -> Self {
        HiddenOracle {
            eval: self.eval.clone(),
            queries: self.queries.clone(),
            on_charge: self.on_charge.clone(),
            truth: self.truth,
        }
    }
}

impl<E> fmt::Debug for HiddenOracle<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HiddenOracle")
            .field("queries", &self.queries())
            .field("truth", &self.truth)
            .finish()
    }
}

impl<E> HiddenOracle<E> {
    pub fn new(eval: impl Fn(&E) -> Symbol + Send + Sync + 'static) -> Self {
        HiddenOracle {
            eval: Arc::new(eval),
            queries: Arc::new(AtomicU64::new(0)),
            on_charge: None,
            truth: None,
        }
    }

    /// Declare the hidden subgroup, for harness validation only.
    pub fn with_truth(mut self, truth: SubgroupDesc) -> Self {
        self.truth = Some(truth);
        self
    }

    /// Bill every charge on this oracle to `hook` as well.
    pub fn with_charge_hook(mut self, hook: impl Fn(u64) + Send + Sync + 'static) -> Self {
        self.on_charge = Some(Arc::new(hook));
        self
    }

    pub fn truth(&self) -> Option<SubgroupDesc> {
        self.truth
    }

    /// One counted query.
    pub fn query(&self, x: &E) -> Symbol {
        self.charge(1);
        (self.eval)(x)
    }

    /// Record `n` queries without evaluating, e.g. for one coset-state
    /// preparation in a simulated quantum run.
    pub fn charge(&self, n: u64) {
        self.queries.fetch_add(n, Ordering::Relaxed);
        if let Some(hook) = &self.on_charge {
            hook(n);
        }
    }

    /// Evaluate without touching the counter. Used by the simulator to
    /// inspect level sets; solvers must go through [`HiddenOracle::query`].
    pub fn evaluate_uncounted(&self, x: &E) -> Symbol {
        (self.eval)(x)
    }

    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub fn reset_queries(&self) {
        self.queries.store(0, Ordering::Relaxed);
    }
}

/// Encode a group element as a single integer `a p + b`.
pub fn encode_element(g: &GroupElement, p: u64) -> u64 {
    g.a * p + g.b
}

/// Oracle whose symbol on `g` is the canonical label of the coset `gH`.
pub fn make_subgroup_oracle(group: Arc<Group>, h: SubgroupDesc) -> HiddenOracle<GroupElement> {
    let p = group.p();
    HiddenOracle::new(move |g: &GroupElement| Symbol::Atom(encode_element(&group.coset_label(&h, g), p)))
        .with_truth(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn partition<E: Clone + Ord>(
        elems: &[E],
        f: impl Fn(&E) -> Symbol,
    ) -> BTreeSet<BTreeSet<E>> {
        let mut by: BTreeMap<Symbol, BTreeSet<E>> = BTreeMap::new();
        for x in elems {
            by.entry(f(x)).or_default().insert(x.clone());
        }
        by.into_values().collect()
    }

    #[test]
    fn level_sets_are_left_cosets() {
        for (p, q) in [(7u64, 6u64), (7, 3), (13, 4)] {
            let g = Arc::new(Group::qhedral(p, q).unwrap());
            let all: Vec<_> = g.elements().collect();
            let mut subs = vec![SubgroupDesc::Trivial, SubgroupDesc::Full];
            for r in crate::arith::divisors(q) {
                subs.push(SubgroupDesc::Normal { q: r });
                if r > 1 {
                    subs.push(SubgroupDesc::Conjugate {
                        a: g.element_of_order(r).unwrap(),
                        b: 3,
                    });
                }
            }
            for h in subs {
                let oracle = make_subgroup_oracle(g.clone(), h);
                let elems = g.enumerate_subgroup(&h).unwrap();
                let cosets: BTreeSet<BTreeSet<GroupElement>> = all
                    .iter()
                    .map(|x| elems.iter().map(|k| g.mul(x, k)).collect())
                    .collect();
                assert_eq!(partition(&all, |x| oracle.evaluate_uncounted(x)), cosets, "{h}");
                assert_eq!(oracle.queries(), 0);
            }
        }
    }

    #[test]
    fn examples_and_counting() {
        let g = Arc::new(Group::affine(7).unwrap());
        let f = make_subgroup_oracle(g.clone(), SubgroupDesc::Conjugate { a: 2, b: 1 });
        let e = GroupElement::new;
        assert_eq!(f.query(&e(1, 0)), f.query(&e(2, 6)));
        assert_ne!(f.query(&e(1, 0)), f.query(&e(1, 1)));
        assert_eq!(f.queries(), 4);
        let all: Vec<_> = g.elements().collect();
        let triv = make_subgroup_oracle(g.clone(), SubgroupDesc::Trivial);
        let syms: BTreeSet<_> = all.iter().map(|x| triv.evaluate_uncounted(x)).collect();
        assert_eq!(syms.len(), 42);
        let full = make_subgroup_oracle(g, SubgroupDesc::Full);
        let syms: BTreeSet<_> = all.iter().map(|x| full.evaluate_uncounted(x)).collect();
        assert_eq!(syms.len(), 1);
    }

    #[test]
    fn charge_hook_propagates_and_clones_share() {
        let inner: HiddenOracle<u64> = HiddenOracle::new(|x| Symbol::Atom(*x % 3));
        let hook = inner.clone();
        let outer: HiddenOracle<u64> =
            HiddenOracle::new(|x| Symbol::Atom(*x)).with_charge_hook(move |n| hook.charge(5 * n));
        outer.query(&1);
        outer.charge(2);
        assert_eq!(outer.queries(), 3);
        assert_eq!(inner.queries(), 15);
        let copy = inner.clone();
        copy.query(&4);
        assert_eq!(inner.queries(), 16);
    }

    #[test]
    fn concurrent_queries_are_not_lost() {
        use rayon::prelude::*;
        let f: HiddenOracle<u64> = HiddenOracle::new(|x| Symbol::Atom(*x));
        (0..10_000u64).into_par_iter().for_each(|x| {
            f.query(&x);
        });
        assert_eq!(f.queries(), 10_000);
    }
}
