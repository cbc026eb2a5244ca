//! Hidden shifts of functions that are constant on multiplicative cosets.
//!
//! `f` is constant exactly on the cosets `xM` of the index-`r` subgroup
//! `M ⊂ Z_p^*`, so its stabilizer in `A_p` is `H_a = {(m, 0) : m ∈ M}` and
//! the stabilizer of `f_s = f(· - s)` is the conjugate `H_a^s`. Sampling
//! `α f_s` on a random set `R` gives an oracle on `A_p` hiding `H_a^s`.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::arith::{inv_mod, mul_mod, pow_mod, sub_mod};
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, SubgroupDesc};
use crate::oracle::{HiddenOracle, Symbol};
use crate::reconstruct::{solve_hcp_affine, sub_seed, HcpOptions};
use crate::rng::trial_rng;

/// `f(x) = σ(log_γ x mod r)` on `Z_p^*` for a seeded permutation `σ` of
/// `0..r`, and `f(0) = r`.
#[derive(Debug, Clone)]
pub struct CosetFunction {
    group: Arc<Group>,
    r: u64,
    symbols: Vec<u64>,
}

impl CosetFunction {
    pub fn p(&self) -> u64 {
        self.group.p()
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn eval(&self, x: u64) -> u64 {
        let x = x % self.p();
        if x == 0 {
            self.r
        } else {
            self.symbols[(self.group.log(x) % self.r) as usize]
        }
    }

    /// Generator `γ^r` of `M`, of order `(p-1)/r`.
    pub fn stabilizer_generator(&self) -> u64 {
        pow_mod(self.group.spec().gamma, self.r, self.p())
    }

    /// `M` as a sorted list.
    pub fn subgroup(&self) -> Vec<u64> {
        let p = self.p();
        let g = self.stabilizer_generator();
        let mut out: Vec<u64> = (0..(p - 1) / self.r).map(|t| pow_mod(g, t, p)).collect();
        out.sort_unstable();
        out
    }
}

pub fn make_coset_function(p: u64, r: u64, seed: u64) -> Result<CosetFunction> {
    let group = Arc::new(Group::affine(p)?);
    if r <= 1 || (p - 1) % r != 0 {
        return Err(Error::InvalidParameter(format!(
            "index r={r} must exceed 1 and divide p-1={}",
            p - 1
        )));
    }
    let mut symbols: Vec<u64> = (0..r).collect();
    symbols.shuffle(&mut trial_rng(seed, 0));
    Ok(CosetFunction { group, r, symbols })
}

/// `(α f)(x) = f(α^{-1} x)` for `α = (a, b)`, i.e. `f(a^{-1}(x - b))`.
pub fn act(f: &CosetFunction, alpha: &GroupElement, x: u64) -> u64 {
    let p = f.p();
    f.eval(mul_mod(inv_mod(alpha.a, p), sub_mod(x % p, alpha.b, p), p))
}

/// A shifted coset function `f_s(x) = f(x - s)` behind a counting oracle.
#[derive(Debug, Clone)]
pub struct ShiftInstance {
    pub f: CosetFunction,
    s: u64,
    pub oracle: HiddenOracle<u64>,
}

impl ShiftInstance {
    pub fn new(f: CosetFunction, s: u64) -> Self {
        let p = f.p();
        let s = s % p;
        let inner = f.clone();
        let oracle = HiddenOracle::new(move |x: &u64| Symbol::Atom(inner.eval(sub_mod(*x % p, s, p))));
        ShiftInstance { f, s, oracle }
    }

    /// The hidden shift, for harness checks only.
    pub fn truth(&self) -> u64 {
        self.s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleSet {
    pub points: Vec<u64>,
    pub seed: u64,
}

impl SampleSet {
    /// `⌈5 log₂ p⌉`.
    pub fn default_size(p: u64) -> usize {
        (5.0 * (p as f64).log2()).ceil() as usize
    }

    /// Uniform draws from `Z_p`, with replacement.
    pub fn draw(p: u64, m: usize, seed: u64) -> Self {
        let mut rng = trial_rng(seed, 0);
        SampleSet {
            points: (0..m).map(|_| rng.random_range(0..p)).collect(),
            seed,
        }
    }
}

/// `F(α) = ((α f_s)(x_1), …, (α f_s)(x_m))`. One query costs `m` queries
/// to `f_s`. The declared subgroup is `H_{γ^r}^s`.
pub fn sampled_symmetry_oracle(inst: &ShiftInstance, set: &SampleSet) -> HiddenOracle<GroupElement> {
    let p = inst.f.p();
    let fs = inst.oracle.clone();
    let hook = inst.oracle.clone();
    let points = set.points.clone();
    let m = points.len() as u64;
    HiddenOracle::new(move |alpha: &GroupElement| {
        let ainv = inv_mod(alpha.a, p);
        Symbol::Tuple(
            points
                .iter()
                .map(|&x| fs.evaluate_uncounted(&mul_mod(ainv, sub_mod(x, alpha.b, p), p)))
                .collect(),
        )
    })
    .with_charge_hook(move |n| hook.charge(n * m))
    .with_truth(SubgroupDesc::Conjugate {
        a: inst.f.stabilizer_generator(),
        b: inst.s,
    })
}

/// Exact `Pr_x[(α f)(x) = (β f)(x)]` over uniform `x ∈ Z_p`.
pub fn collision_probability(alpha: &GroupElement, beta: &GroupElement, f: &CosetFunction) -> f64 {
    let p = f.p();
    let hits = (0..p).filter(|&x| act(f, alpha, x) == act(f, beta, x)).count();
    hits as f64 / p as f64
}

/// All `α ∈ A_p` with `α f = f`, by exhaustive scan.
pub fn isotropy(f: &CosetFunction) -> Vec<GroupElement> {
    let p = f.p();
    f.group
        .elements()
        .filter(|alpha| (0..p).all(|x| act(f, alpha, x) == f.eval(x)))
        .collect()
}

/// Whether the level sets of `F` on `A_p` are exactly the left cosets of
/// `H_a^s`: `F` is constant on cosets by construction, so this counts the
/// distinct values on one representative per coset.
pub fn sample_set_is_good(inst: &ShiftInstance, set: &SampleSet) -> Result<bool> {
    let g = inst.f.group();
    let h = SubgroupDesc::Conjugate {
        a: inst.f.stabilizer_generator(),
        b: inst.s,
    };
    let oracle = sampled_symmetry_oracle(inst, set);
    let reps = g.coset_representatives(&h)?;
    let values: std::collections::BTreeSet<Symbol> =
        reps.iter().map(|c| oracle.evaluate_uncounted(c)).collect();
    Ok(values.len() == reps.len())
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftResult {
    pub recovered: Option<u64>,
    pub verified: bool,
    /// Sample sets drawn.
    pub attempts: usize,
    pub trials: usize,
    /// Queries to `f_s`.
    pub queries: u64,
}

/// Probe points checked against `f(· - s)` before a shift is accepted.
pub const SHIFT_PROBES: usize = 64;

/// Draw `R`, solve the hidden conjugate problem for `a = γ^r` on the
/// sampled oracle, and check the shift on probe points. A failed check
/// redraws `R`, up to three draws in total.
pub fn solve_hidden_shift(inst: &ShiftInstance, seed: u64, max_trials: usize) -> Result<ShiftResult> {
    let p = inst.f.p();
    let start = inst.oracle.queries();
    let a = inst.f.stabilizer_generator();
    let mut out = ShiftResult {
        recovered: None,
        verified: false,
        attempts: 0,
        trials: 0,
        queries: 0,
    };
    for attempt in 0..3u64 {
        out.attempts += 1;
        let set = SampleSet::draw(p, SampleSet::default_size(p), sub_seed(seed, 40 + attempt));
        let oracle = sampled_symmetry_oracle(inst, &set);
        let res = match solve_hcp_affine(
            inst.f.group(),
            &oracle,
            a,
            sub_seed(seed, 50 + attempt),
            &HcpOptions {
                max_trials,
                ..HcpOptions::default()
            },
        ) {
            Ok(r) => r,
            // a bad sample set can make the level sets fail to be cosets
            Err(Error::PromiseViolation(_)) => continue,
            Err(e) => return Err(e),
        };
        out.trials += res.trials;
        let Some(SubgroupDesc::Conjugate { b, .. }) = res.subgroup else {
            continue;
        };
        if !res.verified {
            out.recovered = Some(b);
            continue;
        }
        let mut rng = trial_rng(sub_seed(seed, 60 + attempt), 0);
        let ok = (0..SHIFT_PROBES).all(|_| {
            let x = rng.random_range(0..p);
            inst.oracle.query(&x) == Symbol::Atom(inst.f.eval(sub_mod(x, b, p)))
        });
        out.recovered = Some(b);
        if ok {
            out.verified = true;
            break;
        }
    }
    out.queries = inst.oracle.queries() - start;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p13_r3_subgroup_and_symmetry() {
        let f = make_coset_function(13, 3, 1).unwrap();
        assert_eq!(f.subgroup(), vec![1, 5, 8, 12]);
        let m: Vec<u64> = f.subgroup();
        for x in 1..13u64 {
            for y in 1..13u64 {
                let same = f.eval(mul_mod(y, x, 13)) == f.eval(x);
                assert_eq!(same, m.contains(&y), "x={x} y={y}");
            }
        }
        assert!((1..13).all(|x| f.eval(x) != f.eval(0)));
        assert!(make_coset_function(13, 5, 1).is_err());
        assert!(make_coset_function(13, 1, 1).is_err());
    }

    #[test]
    fn injective_when_index_is_maximal() {
        let f = make_coset_function(23, 22, 4).unwrap();
        let vals: std::collections::BTreeSet<u64> = (0..23).map(|x| f.eval(x)).collect();
        assert_eq!(vals.len(), 23);
    }

    #[test]
    fn isotropy_is_h_a() {
        for (p, r) in [(13u64, 3u64), (23, 2), (103, 6)] {
            let f = make_coset_function(p, r, 7).unwrap();
            let mut got = isotropy(&f);
            got.sort();
            let h = SubgroupDesc::Conjugate { a: f.stabilizer_generator(), b: 0 };
            let mut want = f.group().enumerate_subgroup(&h).unwrap();
            want.sort();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn shift_is_translation_action() {
        let f = make_coset_function(29, 4, 2).unwrap();
        for s in 0..29u64 {
            let inst = ShiftInstance::new(f.clone(), s);
            for x in 0..29u64 {
                let t = GroupElement::new(1, s);
                assert_eq!(inst.oracle.evaluate_uncounted(&x), Symbol::Atom(act(&f, &t, x)));
            }
        }
    }

    #[test]
    fn identity_gives_samples() {
        let f = make_coset_function(103, 6, 0).unwrap();
        let inst = ShiftInstance::new(f, 9);
        let set = SampleSet::draw(103, 34, 5);
        let o = sampled_symmetry_oracle(&inst, &set);
        let want = Symbol::Tuple(set.points.iter().map(|x| inst.oracle.evaluate_uncounted(x)).collect());
        assert_eq!(o.query(&GroupElement::IDENTITY), want);
        assert_eq!(inst.oracle.queries(), 34);
    }

    #[test]
    fn collision_bounds() {
        let f = make_coset_function(103, 6, 3).unwrap();
        let a = GroupElement::new(5, 7);
        assert_eq!(collision_probability(&a, &a, &f), 1.0);
        // pure dilation by a non-member: only x = 0 collides
        let z = (2..103).find(|z| !f.subgroup().contains(z)).unwrap();
        let d = GroupElement::new(z, 0);
        assert!((collision_probability(&GroupElement::IDENTITY, &d, &f) - 1.0 / 103.0).abs() < 1e-12);
    }

    #[test]
    fn sample_sets_are_usually_good() {
        let f = make_coset_function(103, 6, 11).unwrap();
        assert_eq!(SampleSet::default_size(103), 34);
        let good = (0..100u64)
            .filter(|&seed| {
                let inst = ShiftInstance::new(f.clone(), seed % 103);
                sample_set_is_good(&inst, &SampleSet::draw(103, 34, seed)).unwrap()
            })
            .count();
        assert!(good >= 99, "{good}");
    }

    #[test]
    fn solves_small_instances() {
        let f = make_coset_function(103, 6, 1).unwrap();
        for s in [0u64, 77] {
            let inst = ShiftInstance::new(f.clone(), s);
            let r = solve_hidden_shift(&inst, 3, 200).unwrap();
            assert!(r.verified);
            assert_eq!(r.recovered, Some(s));
            assert_eq!(r.queries, inst.oracle.queries());
        }
    }
}
