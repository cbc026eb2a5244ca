//! Hidden subgroups in an extension `G` of a small normal subgroup `K` by a
//! group `H` with a known solver.
//!
//! Elements of table-backed groups are indices `0..n`. The quotient `H` is
//! indexed by the transversal: element `i` of `H` is the coset `t(i) K`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, pow_mod};
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};
use crate::oracle::{HiddenOracle, Symbol};
use crate::reconstruct::{solve_hsp_qhedral, verify_subgroup};
use crate::rng::trial_rng;
use crate::sampling::abelian_sample_distribution;

/// Largest table-backed group.
pub const TABLE_CAP: usize = 100_000;

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Checks closure, identity and inverses; associativity is checked
    /// exhaustively up to 200 elements.
    pub fn from_table(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 || n > TABLE_CAP || table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(format!(
                "multiplication table must be square with 1..={TABLE_CAP} rows"
            )));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(Error::InvalidParameter("table entry out of range".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::InvalidParameter("no identity element".into()))?;
        let mut inverse = vec![0; n];
        for (x, inv) in inverse.iter_mut().enumerate() {
            *inv = (0..n)
                .find(|&y| table[x][y] == identity)
                .ok_or_else(|| Error::InvalidParameter(format!("{} has no inverse", labels[x])))?;
        }
        if n <= 200 {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        if table[table[x][y]][z] != table[x][table[y][z]] {
                            return Err(Error::InvalidParameter("table is not associative".into()));
                        }
                    }
                }
            }
        }
        Ok(FiniteGroup {
            labels,
            table,
            identity,
            inverse,
        })
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        let labels = (0..n).map(|x| x.to_string()).collect();
        let table = (0..n).map(|x| (0..n).map(|y| (x + y) % n).collect()).collect();
        Self::from_table(labels, table)
    }

    /// `Q_8 = {±1, ±i, ±j, ±k}`, indexed `sign * 4 + unit`.
    pub fn quaternion() -> Result<Self> {
        // unit products: (sign, unit) for 1, i, j, k
        const UNIT: [[(usize, usize); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        let names = ["1", "i", "j", "k"];
        let labels = (0..8)
            .map(|x| format!("{}{}", if x / 4 == 0 { "" } else { "-" }, names[x % 4]))
            .collect();
        let table = (0..8)
            .map(|x| {
                (0..8)
                    .map(|y| {
                        let (s, u) = UNIT[x % 4][y % 4];
                        ((x / 4 + y / 4 + s) % 2) * 4 + u
                    })
                    .collect()
            })
            .collect();
        Self::from_table(labels, table)
    }

    /// `A × B`, indexed `a * |B| + b`.
    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Result<Self> {
        let nb = b.order();
        let n = a.order() * nb;
        let labels = (0..n)
            .map(|x| format!("({},{})", a.label(x / nb), b.label(x % nb)))
            .collect();
        let table = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb))
                    .collect()
            })
            .collect();
        Self::from_table(labels, table)
    }

    /// `Z_q ⋉ Z_p` with `(u, y)` indexed `u * p + y` and
    /// `(u1, y1)(u2, y2) = (u1 + u2, y1 + a^{u1} y2)`.
    pub fn semidirect(p: u64, q: u64, a: u64) -> Result<Self> {
        if pow_mod(a, q, p) != 1 {
            return Err(Error::WrongOrder {
                p,
                a,
                expected: q,
                actual: crate::arith::multiplicative_order(a, p),
            });
        }
        let (pu, qu) = (p as usize, q as usize);
        let n = pu * qu;
        let labels = (0..n).map(|x| format!("({},{})", x / pu, x % pu)).collect();
        let table = (0..n)
            .map(|x| {
                let (u1, y1) = ((x / pu) as u64, (x % pu) as u64);
                (0..n)
                    .map(|y| {
                        let (u2, y2) = ((y / pu) as u64, (y % pu) as u64);
                        let b = (y1 + pow_mod(a, u1, p) * y2) % p;
                        (((u1 + u2) % q) * p + b) as usize
                    })
                    .collect()
            })
            .collect();
        Self::from_table(labels, table)
    }

    /// Subgroup generated by `gens`, sorted.
    pub fn generate(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = BTreeSet::from([self.identity]);
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// A small generating set of the subgroup `elems`, built by adding an
    /// element whenever it enlarges the generated subgroup.
    pub fn incremental_generators(&self, elems: &[usize]) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span: BTreeSet<usize> = BTreeSet::from([self.identity]);
        for &x in elems {
            if !span.contains(&x) {
                gens.push(x);
                span = self.generate(&gens).into_iter().collect();
            }
        }
        gens
    }

    pub fn is_subgroup(&self, elems: &[usize]) -> bool {
        let set: BTreeSet<usize> = elems.iter().copied().collect();
        set.contains(&self.identity)
            && set.iter().all(|&x| set.iter().all(|&y| set.contains(&self.mul(x, y))))
    }

    /// Minimal element of the left coset `x L`.
    pub fn coset_label(&self, sub: &[usize], x: usize) -> usize {
        sub.iter().map(|&h| self.mul(x, h)).min().expect("nonempty subgroup")
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.order())
    }
}

/// Oracle on a table-backed group hiding `sub`: the minimal element of
/// each left coset.
pub fn make_finite_subgroup_oracle(group: Arc<FiniteGroup>, sub: Vec<usize>) -> Result<HiddenOracle<usize>> {
    if !group.is_subgroup(&sub) {
        return Err(Error::InvalidSubgroup("elements are not closed under multiplication".into()));
    }
    Ok(HiddenOracle::new(move |x: &usize| Symbol::Atom(group.coset_label(&sub, *x) as u64)))
}

/// `G` with a normal subgroup `K` and a transversal indexing `H = G/K`.
#[derive(Debug, Clone)]
pub struct ExtensionGroup {
    pub g: Arc<FiniteGroup>,
    pub k: Vec<usize>,
    pub h: Arc<FiniteGroup>,
    pub transversal: Vec<usize>,
    quotient: Vec<usize>,
    /// When set, `H` is `Z_{d_0} × …` with row-major indices.
    pub h_dims: Option<Vec<usize>>,
}

fn flat_add(dims: &[usize], x: usize, y: usize) -> usize {
    let mut out = 0;
    let mut stride = 1;
    for &n in dims.iter().rev() {
        let (a, b) = ((x / stride) % n, (y / stride) % n);
        out += ((a + b) % n) * stride;
        stride *= n;
    }
    out
}

impl ExtensionGroup {
    pub fn new(
        g: Arc<FiniteGroup>,
        k: Vec<usize>,
        transversal: Vec<usize>,
        h_dims: Option<Vec<usize>>,
    ) -> Result<Self> {
        let mut k = k;
        k.sort_unstable();
        k.dedup();
        if !g.is_subgroup(&k) {
            return Err(Error::InvalidSubgroup("K is not a subgroup".into()));
        }
        let kset: BTreeSet<usize> = k.iter().copied().collect();
        for x in 0..g.order() {
            if k.iter().any(|&y| !kset.contains(&g.mul(g.mul(x, y), g.inv(x)))) {
                return Err(Error::InvalidSubgroup(format!(
                    "K is not normal: conjugation by {} leaves it",
                    g.label(x)
                )));
            }
        }
        if transversal.len() * k.len() != g.order() {
            return Err(Error::InvalidParameter(format!(
                "transversal has {} elements, expected |G|/|K| = {}",
                transversal.len(),
                g.order() / k.len()
            )));
        }
        let mut quotient = vec![usize::MAX; g.order()];
        for (i, &t) in transversal.iter().enumerate() {
            for &y in &k {
                let x = g.mul(t, y);
                if quotient[x] != usize::MAX {
                    return Err(Error::InvalidParameter(
                        "transversal hits a coset of K twice".into(),
                    ));
                }
                quotient[x] = i;
            }
        }
        let n = transversal.len();
        let labels = transversal.iter().map(|&t| format!("{}K", g.label(t))).collect();
        let table: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).map(|j| quotient[g.mul(transversal[i], transversal[j])]).collect())
            .collect();
        if let Some(dims) = &h_dims {
            if dims.iter().product::<usize>() != n
                || (0..n).any(|i| (0..n).any(|j| table[i][j] != flat_add(dims, i, j)))
            {
                return Err(Error::InvalidParameter(
                    "transversal order does not match the abelian quotient".into(),
                ));
            }
        }
        let h = Arc::new(FiniteGroup::from_table(labels, table)?);
        Ok(ExtensionGroup {
            g,
            k,
            h,
            transversal,
            quotient,
            h_dims,
        })
    }

    pub fn quotient(&self, x: usize) -> usize {
        self.quotient[x]
    }

    /// `Q_8 × Z_15` as an extension of `K = Q_8 × {0}` by `Z_15`.
    pub fn quaternion_times_z15() -> Result<Self> {
        let g = Arc::new(FiniteGroup::direct_product(
            &FiniteGroup::quaternion()?,
            &FiniteGroup::cyclic(15)?,
        )?);
        let k = (0..8).map(|x| x * 15).collect();
        Self::new(g, k, (0..15).collect(), Some(vec![15]))
    }

    /// `Z_3 ⋉ Z_7` as an extension of `K = Z_7` by `Z_3`.
    pub fn z3_by_z7() -> Result<Self> {
        let g = Arc::new(FiniteGroup::semidirect(7, 3, 2)?);
        Self::new(g, (0..7).collect(), vec![0, 7, 14], Some(vec![3]))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: ExtensionFile = serde_json::from_str(&text)?;
        file.build()
    }
}

/// On-disk form of an [`ExtensionGroup`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionFile {
    pub elements: Vec<String>,
    pub mult_table: Vec<Vec<usize>>,
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    pub transversal: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_dims: Option<Vec<usize>>,
}

impl ExtensionFile {
    pub fn build(self) -> Result<ExtensionGroup> {
        let g = Arc::new(FiniteGroup::from_table(self.elements, self.mult_table)?);
        ExtensionGroup::new(g, self.k, self.transversal, self.h_dims)
    }

    pub fn from_group(ext: &ExtensionGroup) -> Self {
        ExtensionFile {
            elements: (0..ext.g.order()).map(|x| ext.g.label(x).to_string()).collect(),
            mult_table: (0..ext.g.order())
                .map(|x| (0..ext.g.order()).map(|y| ext.g.mul(x, y)).collect())
                .collect(),
            k: ext.k.clone(),
            transversal: ext.transversal.clone(),
            h_dims: ext.h_dims.clone(),
        }
    }
}

/// `f'(h) = {f(g) : g ∈ t(h) K}` as a sorted tuple. Each query costs `|K|`
/// queries to `f`.
pub fn multiset_oracle(oracle: &HiddenOracle<usize>, ext: &ExtensionGroup) -> HiddenOracle<usize> {
    let f = oracle.clone();
    let hook = oracle.clone();
    let g = ext.g.clone();
    let k = ext.k.clone();
    let t = ext.transversal.clone();
    let kn = k.len() as u64;
    HiddenOracle::new(move |h: &usize| {
        let mut vals: Vec<Symbol> = k.iter().map(|&y| f.evaluate_uncounted(&g.mul(t[*h], y))).collect();
        vals.sort();
        Symbol::Tuple(vals)
    })
    .with_charge_hook(move |n| hook.charge(n * kn))
}

/// A hidden subgroup solver for `H`: returns generators (as `H` indices).
pub trait HspSolver {
    fn solve(&self, h: &FiniteGroup, oracle: &HiddenOracle<usize>, seed: u64) -> Result<Vec<usize>>;
}

/// Fourier sampling on `Z_{d_0} × …` with the annihilator of the observed
/// characters computed by enumeration.
#[derive(Debug, Clone)]
pub struct AbelianHspSolver {
    pub dims: Vec<usize>,
    /// Sample batches before giving up.
    pub max_batches: usize,
}

impl AbelianHspSolver {
    pub fn new(dims: Vec<usize>) -> Self {
        AbelianHspSolver {
            dims,
            max_batches: 4,
        }
    }

    fn coords(&self, mut x: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &n) in out.iter_mut().zip(&self.dims).rev() {
            *slot = x % n;
            x /= n;
        }
        out
    }

    fn annihilates(&self, chi: &[usize], x: &[usize], lcm: usize) -> bool {
        let s: usize = chi
            .iter()
            .zip(x)
            .zip(&self.dims)
            .map(|((c, xi), n)| (c * xi % n) * (lcm / n))
            .sum();
        s % lcm == 0
    }
}

impl HspSolver for AbelianHspSolver {
    fn solve(&self, h: &FiniteGroup, oracle: &HiddenOracle<usize>, seed: u64) -> Result<Vec<usize>> {
        let n: usize = self.dims.iter().product();
        if n != h.order() || n > 1_000_000 {
            return Err(Error::InvalidParameter(format!(
                "abelian solver needs |H| = {} ≤ 10^6, got {}",
                n,
                h.order()
            )));
        }
        let base = oracle.evaluate_uncounted(&0);
        let level: Vec<Vec<usize>> = (0..n)
            .filter(|x| oracle.evaluate_uncounted(x) == base)
            .map(|x| self.coords(x))
            .collect();
        let dist = abelian_sample_distribution(&self.dims, &level)?;
        let sampler = dist.sampler();
        let lcm = self.dims.iter().fold(1, |acc, &d| acc / gcd(acc as u64, d as u64) as usize * d);
        let bits = (usize::BITS - n.leading_zeros()) as usize;
        let batch = 4 * bits + 8;
        let mut chars: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut rng = trial_rng(seed, 0);
        for _ in 0..self.max_batches {
            for _ in 0..batch {
                oracle.charge(1);
                let o = sampler.sample(&mut rng);
                chars.insert(
                    o.iter()
                        .map(|l| match l {
                            crate::dist::Label::Int(v) => *v as usize,
                            crate::dist::Label::Text(_) => 0,
                        })
                        .collect(),
                );
            }
            let cand: Vec<usize> = (0..n)
                .filter(|&x| {
                    let xc = self.coords(x);
                    chars.iter().all(|c| self.annihilates(c, &xc, lcm))
                })
                .collect();
            let gens = h.incremental_generators(&cand);
            let f0 = oracle.query(&0);
            if gens.iter().all(|g| oracle.query(g) == f0) {
                return Ok(gens);
            }
        }
        Err(Error::TrialsExhausted(self.max_batches * batch))
    }
}

/// `Z_q ⋉ Z_p` solver: `H` index `i` is the `i`-th element of
/// [`Group::elements`].
pub struct QhedralHspSolver {
    pub group: Arc<Group>,
    pub max_trials: usize,
}

impl QhedralHspSolver {
    pub fn elements(&self) -> Vec<GroupElement> {
        self.group.elements().collect()
    }
}

impl HspSolver for QhedralHspSolver {
    fn solve(&self, h: &FiniteGroup, oracle: &HiddenOracle<usize>, seed: u64) -> Result<Vec<usize>> {
        let elems = self.elements();
        if elems.len() != h.order() {
            return Err(Error::InvalidParameter("H does not match the q-hedral group".into()));
        }
        let pos: Arc<HashMap<GroupElement, usize>> =
            Arc::new(elems.iter().enumerate().map(|(i, g)| (*g, i)).collect());
        let inner = oracle.clone();
        let hook = oracle.clone();
        let lookup = pos.clone();
        let lifted = HiddenOracle::new(move |g: &GroupElement| inner.evaluate_uncounted(&lookup[g]))
            .with_charge_hook(move |n| hook.charge(n));
        let res = solve_hsp_qhedral(&self.group, &lifted, seed, self.max_trials)?;
        let sub = res
            .subgroup
            .filter(|_| res.verified)
            .ok_or(Error::TrialsExhausted(res.trials))?;
        let members: Vec<usize> = self
            .group
            .enumerate_subgroup(&sub)?
            .iter()
            .map(|g| pos[g])
            .collect();
        let mut sorted = members;
        sorted.sort_unstable();
        Ok(h.incremental_generators(&sorted))
    }
}

/// Generators of `L ∩ K`, of `L K / K`, and lifts of the latter into `L`.
#[derive(Debug, Clone, Serialize)]
pub struct SubgroupTriple {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub eta: BTreeMap<usize, usize>,
    pub queries: u64,
    /// Queries made by the solver for `H`, each costing `|K|` queries to `f`.
    pub h_solver_queries: u64,
}

impl SubgroupTriple {
    /// The subgroup generated by `S ∪ η(T)`.
    pub fn subgroup(&self, ext: &ExtensionGroup) -> Vec<usize> {
        let mut gens = self.s.clone();
        gens.extend(self.eta.values().copied());
        ext.g.generate(&gens)
    }
}

/// Reconstruct the hidden subgroup `L` of `G` from `L ∩ K` (by querying all
/// of `K`) and `L K / K` (by the solver for `H` on the multiset oracle).
pub fn solve_extension_hsp(
    oracle: &HiddenOracle<usize>,
    ext: &ExtensionGroup,
    solver: &dyn HspSolver,
    seed: u64,
) -> Result<SubgroupTriple> {
    let start = oracle.queries();
    let g = &ext.g;
    let base = oracle.query(&g.identity());
    let in_k: Vec<usize> = ext
        .k
        .iter()
        .copied()
        .filter(|&y| y == g.identity() || oracle.query(&y) == base)
        .collect();
    let s = g.incremental_generators(&in_k);
    let fprime = multiset_oracle(oracle, ext);
    let t = solver.solve(&ext.h, &fprime, seed)?;
    let h_solver_queries = fprime.queries();
    let mut eta = BTreeMap::new();
    for &h in &t {
        let lift = ext
            .k
            .iter()
            .map(|&y| g.mul(ext.transversal[h], y))
            .find(|x| oracle.query(x) == base)
            .ok_or_else(|| {
                Error::PromiseViolation(format!("no element of L over {} in H", ext.h.label(h)))
            })?;
        eta.insert(h, lift);
    }
    Ok(SubgroupTriple {
        s,
        t,
        eta,
        queries: oracle.queries() - start,
        h_solver_queries,
    })
}

/// `Z_3 ⋉ Z_7` element `(u, y)` as the q-hedral group element `(2^u, y)`.
pub fn z3_by_z7_to_qhedral(x: usize) -> GroupElement {
    GroupElement::new(pow_mod(2, (x / 7) as u64, 7), (x % 7) as u64)
}

/// Cross-check a recovered subgroup of `Z_3 ⋉ Z_7` with the q-hedral
/// solver on the same hidden subgroup.
pub fn cross_check_z3_by_z7(sub: &[usize], seed: u64) -> Result<bool> {
    let group = Arc::new(Group::new(crate::group::GroupSpec::qhedral_with(7, 2)?)?);
    let elems: Vec<GroupElement> = sub.iter().map(|&x| z3_by_z7_to_qhedral(x)).collect();
    let desc = group.identify_subgroup(&elems)?;
    let oracle = crate::oracle::make_subgroup_oracle(group.clone(), desc);
    let res = solve_hsp_qhedral(&group, &oracle, seed, 200)?;
    let mut rng = trial_rng(seed, 1);
    Ok(res.verified
        && res.subgroup.map(|h| group.same_subgroup(&h, &desc)).unwrap_or(false)
        && verify_subgroup(&group, &oracle, &desc, &mut rng))
}
