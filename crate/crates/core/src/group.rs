//! The affine groups `A_p = Z_p^* ⋉ Z_p` and the q-hedral groups `Z_q ⋉ Z_p`.
//!
//! Both families are realised as subgroups of `A_p`: an element is a pair
//! `(a, b)` acting on `Z_p` by `x ↦ a x + b`, and the q-hedral group is the
//! normal subgroup whose multiplicative parts lie in the order-q subgroup
//! generated by `spec.a`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{
    add_mod, inv_mod, is_prime, mul_mod, multiplicative_order, pow_mod, primitive_root, sub_mod,
    DiscreteLog,
};
use crate::error::{Error, Result};
use crate::roots::RootTable;

/// Largest subgroup or transversal that is ever materialised as a list.
pub const ENUMERATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub p: u64,
    pub q: u64,
    pub gamma: u64,
    pub a: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    Affine,
    QHedral,
}

impl GroupSpec {
    pub fn new(p: u64, q: u64, gamma: u64, a: u64) -> Result<Self> {
        let spec = GroupSpec { p, q, gamma, a };
        spec.validate()?;
        Ok(spec)
    }

    /// `A_p` with the smallest primitive root as generator.
    pub fn affine(p: u64) -> Result<Self> {
        let gamma = primitive_root(p)?;
        Self::new(p, p - 1, gamma, gamma)
    }

    /// `Z_q ⋉ Z_p` with `a = gamma^((p-1)/q)`.
    pub fn qhedral(p: u64, q: u64) -> Result<Self> {
        let gamma = primitive_root(p)?;
        if q == 0 || (p - 1) % q != 0 {
            return Err(Error::OrderDoesNotDivide { p, q });
        }
        Self::new(p, q, gamma, pow_mod(gamma, (p - 1) / q, p))
    }

    /// The q-hedral group with a caller-chosen element `a` of order q.
    pub fn qhedral_with(p: u64, a: u64) -> Result<Self> {
        let gamma = primitive_root(p)?;
        if a % p == 0 {
            return Err(Error::InvalidParameter(format!("a = {a} is zero mod {p}")));
        }
        Self::new(p, multiplicative_order(a, p), gamma, a % p)
    }

    pub fn validate(&self) -> Result<()> {
        let GroupSpec { p, q, gamma, a } = *self;
        if !is_prime(p) || p < 3 {
            return Err(Error::NotPrime(p));
        }
        if q == 0 || (p - 1) % q != 0 {
            return Err(Error::OrderDoesNotDivide { p, q });
        }
        if gamma % p == 0 || multiplicative_order(gamma, p) != p - 1 {
            return Err(Error::NotGenerator { p, gamma });
        }
        if a % p == 0 {
            return Err(Error::WrongOrder {
                p,
                a,
                expected: q,
                actual: 0,
            });
        }
        let actual = multiplicative_order(a, p);
        if actual != q {
            return Err(Error::WrongOrder {
                p,
                a,
                expected: q,
                actual,
            });
        }
        Ok(())
    }

    pub fn kind(&self) -> GroupKind {
        if self.q == self.p - 1 {
            GroupKind::Affine
        } else {
            GroupKind::QHedral
        }
    }

    pub fn order(&self) -> u64 {
        self.q * self.p
    }

    /// The affine group over the same prime and generator.
    pub fn affine_hull(&self) -> GroupSpec {
        GroupSpec {
            p: self.p,
            q: self.p - 1,
            gamma: self.gamma,
            a: self.gamma,
        }
    }
}

/// A pair `(a, b)` with `a ∈ Z_p^*`, `b ∈ Z_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement {
    pub a: u64,
    pub b: u64,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { a: 1, b: 0 };

    pub fn new(a: u64, b: u64) -> Self {
        GroupElement { a, b }
    }

    /// Image of `x` under the affine map `x ↦ a x + b`.
    pub fn act(&self, x: u64, p: u64) -> u64 {
        add_mod(mul_mod(self.a, x, p), self.b, p)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// Symbolic description of a subgroup of `Z_q ⋉ Z_p`.
///
/// Every subgroup of these groups is one of the listed kinds: `Normal { q: r }`
/// is `N_r = {(x, y) : x^r = 1}` of order `r p`, and `Conjugate { a, b }` is
/// `H_a^b = {(a^t, (1 - a^t) b)}`, the stabiliser of `b` inside `⟨(a, 0)⟩`'s
/// conjugate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubgroupDesc {
    Trivial,
    Full,
    Normal { q: u64 },
    Conjugate { a: u64, b: u64 },
}

impl fmt::Display for SubgroupDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupDesc::Trivial => write!(f, "trivial"),
            SubgroupDesc::Full => write!(f, "full"),
            SubgroupDesc::Normal { q } => write!(f, "N_{q}"),
            SubgroupDesc::Conjugate { a, b } => write!(f, "H_{a}^{b}"),
        }
    }
}

/// Group context: the spec plus the tables needed to compute in it.
pub struct Group {
    spec: GroupSpec,
    dlog: DiscreteLog,
    /// `log_gamma(a) = step * w` with `step = (p-1)/q` and `gcd(w, q) = 1`.
    step: u64,
    w_inv: u64,
    a_pows: OnceLock<Vec<u64>>,
    omega_p: OnceLock<RootTable>,
    omega_pm1: OnceLock<RootTable>,
    omega_q: OnceLock<RootTable>,
    min_reps: Mutex<HashMap<u64, Arc<Vec<u64>>>>,
}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Group").field("spec", &self.spec).finish()
    }
}

impl Group {
    pub fn new(spec: GroupSpec) -> Result<Self> {
        spec.validate()?;
        let dlog = DiscreteLog::new(spec.gamma, spec.p);
        let step = (spec.p - 1) / spec.q;
        let log_a = dlog.log(spec.a)?;
        let w = (log_a / step) % spec.q;
        let w_inv = if spec.q == 1 {
            0
        } else {
            inverse_mod_composite(w, spec.q)
        };
        Ok(Group {
            spec,
            dlog,
            step,
            w_inv,
            a_pows: OnceLock::new(),
            omega_p: OnceLock::new(),
            omega_pm1: OnceLock::new(),
            omega_q: OnceLock::new(),
            min_reps: Mutex::new(HashMap::new()),
        })
    }

    pub fn affine(p: u64) -> Result<Self> {
        Self::new(GroupSpec::affine(p)?)
    }

    pub fn qhedral(p: u64, q: u64) -> Result<Self> {
        Self::new(GroupSpec::qhedral(p, q)?)
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn p(&self) -> u64 {
        self.spec.p
    }

    pub fn q(&self) -> u64 {
        self.spec.q
    }

    pub fn kind(&self) -> GroupKind {
        self.spec.kind()
    }

    pub fn order(&self) -> u64 {
        self.spec.order()
    }

    pub fn dlog(&self) -> &DiscreteLog {
        &self.dlog
    }

    /// `log_gamma(x)`.
    pub fn log(&self, x: u64) -> u64 {
        self.dlog.log(x).expect("gamma generates Z_p^*")
    }

    /// Exponent `u ∈ Z_q` with `x = a^u`, for `x` in the multiplicative part.
    pub fn exponent_of(&self, x: u64) -> Result<u64> {
        let lg = self.dlog.log(x)?;
        if lg % self.step != 0 {
            return Err(Error::NotInSubgroup {
                x,
                base: self.spec.a,
                p: self.spec.p,
            });
        }
        Ok(mul_mod(lg / self.step, self.w_inv, self.spec.q.max(1)))
    }

    /// `a^s` for `0 <= s < q`.
    pub fn a_pow(&self, s: u64) -> u64 {
        self.a_pows
            .get_or_init(|| {
                let mut out = Vec::with_capacity(self.spec.q as usize);
                let mut x = 1;
                for _ in 0..self.spec.q {
                    out.push(x);
                    x = mul_mod(x, self.spec.a, self.spec.p);
                }
                out
            })[(s % self.spec.q) as usize]
    }

    pub fn omega_p(&self) -> &RootTable {
        self.omega_p.get_or_init(|| RootTable::new(self.spec.p))
    }

    pub fn omega_pm1(&self) -> &RootTable {
        self.omega_pm1.get_or_init(|| RootTable::new(self.spec.p - 1))
    }

    pub fn omega_q(&self) -> &RootTable {
        self.omega_q.get_or_init(|| RootTable::new(self.spec.q))
    }

    /// An element of `Z_p^*` of order `r` (which must divide p - 1).
    pub fn element_of_order(&self, r: u64) -> Result<u64> {
        let p = self.spec.p;
        if r == 0 || (p - 1) % r != 0 {
            return Err(Error::OrderDoesNotDivide { p, q: r });
        }
        Ok(pow_mod(self.spec.gamma, (p - 1) / r, p))
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        let p = self.spec.p;
        g.a % p != 0 && g.a < p && g.b < p && pow_mod(g.a, self.spec.q, p) == 1
    }

    pub fn check(&self, g: &GroupElement) -> Result<()> {
        if self.contains(g) {
            Ok(())
        } else {
            Err(Error::NotInGroup { a: g.a, b: g.b })
        }
    }

    pub fn multiply(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul(x, y))
    }

    /// Unchecked product `(a1 a2, b1 + a1 b2)`.
    #[inline]
    pub fn mul(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let p = self.spec.p;
        GroupElement {
            a: mul_mod(x.a, y.a, p),
            b: add_mod(x.b, mul_mod(x.a, y.b, p), p),
        }
    }

    #[inline]
    pub fn inverse(&self, x: &GroupElement) -> GroupElement {
        let p = self.spec.p;
        let ai = inv_mod(x.a, p);
        GroupElement {
            a: ai,
            b: sub_mod(0, mul_mod(ai, x.b, p), p),
        }
    }

    /// All `q p` elements, ordered by exponent of `a` and then by `b`.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        let p = self.spec.p;
        (0..self.spec.q).flat_map(move |u| {
            let x = self.a_pow(u);
            (0..p).map(move |y| GroupElement::new(x, y))
        })
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        let u = rng.random_range(0..self.spec.q);
        GroupElement::new(self.a_pow(u), rng.random_range(0..self.spec.p))
    }

    /// Minimal element of each coset of the order-`r` subgroup of `Z_p^*`,
    /// indexed by `log_gamma(x) mod (p-1)/r`.
    pub fn min_coset_reps(&self, r: u64) -> Arc<Vec<u64>> {
        let mut cache = self.min_reps.lock().expect("cache poisoned");
        cache
            .entry(r)
            .or_insert_with(|| {
                let p = self.spec.p;
                let classes = (p - 1) / r;
                let mut reps = vec![0u64; classes as usize];
                let mut left = classes;
                for x in 1..p {
                    let c = (self.log(x) % classes) as usize;
                    if reps[c] == 0 {
                        reps[c] = x;
                        left -= 1;
                        if left == 0 {
                            break;
                        }
                    }
                }
                Arc::new(reps)
            })
            .clone()
    }

    /// Minimal element of `x ⟨c⟩` where `⟨c⟩ ⊆ Z_p^*` has order `r`.
    pub fn min_rep(&self, x: u64, r: u64) -> u64 {
        let reps = self.min_coset_reps(r);
        let classes = (self.spec.p - 1) / r;
        reps[(self.log(x) % classes) as usize]
    }

    /// Check that `h` names a subgroup of this group.
    pub fn validate_subgroup(&self, h: &SubgroupDesc) -> Result<()> {
        match *h {
            SubgroupDesc::Trivial | SubgroupDesc::Full => Ok(()),
            SubgroupDesc::Normal { q } => {
                if q == 0 || self.spec.q % q != 0 {
                    Err(Error::InvalidSubgroup(format!(
                        "N_{q}: {q} does not divide {}",
                        self.spec.q
                    )))
                } else {
                    Ok(())
                }
            }
            SubgroupDesc::Conjugate { a, b } => {
                let p = self.spec.p;
                if a % p == 0 || a >= p || b >= p {
                    return Err(Error::InvalidSubgroup(format!("H_{a}^{b}: out of range")));
                }
                if pow_mod(a, self.spec.q, p) != 1 {
                    return Err(Error::InvalidSubgroup(format!(
                        "H_{a}^{b}: {a} is not in the multiplicative part"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn subgroup_order(&self, h: &SubgroupDesc) -> u64 {
        match *h {
            SubgroupDesc::Trivial => 1,
            SubgroupDesc::Full => self.order(),
            SubgroupDesc::Normal { q } => q * self.spec.p,
            SubgroupDesc::Conjugate { a, .. } => multiplicative_order(a, self.spec.p),
        }
    }

    /// Multiplicative order of the subgroup's projection to `Z_p^*`.
    pub fn subgroup_mult_order(&self, h: &SubgroupDesc) -> u64 {
        match *h {
            SubgroupDesc::Trivial => 1,
            SubgroupDesc::Full => self.spec.q,
            SubgroupDesc::Normal { q } => q,
            SubgroupDesc::Conjugate { a, .. } => multiplicative_order(a, self.spec.p),
        }
    }

    /// Canonical form: `N_q` becomes `Full`, `N_1` stays, `H_1^b` becomes
    /// `Trivial`, and conjugates use the canonical generator of `⟨a⟩`.
    pub fn canonical(&self, h: &SubgroupDesc) -> SubgroupDesc {
        match *h {
            SubgroupDesc::Normal { q } if q == self.spec.q => SubgroupDesc::Full,
            SubgroupDesc::Conjugate { a, b } => {
                let r = multiplicative_order(a, self.spec.p);
                if r == 1 {
                    SubgroupDesc::Trivial
                } else {
                    SubgroupDesc::Conjugate {
                        a: self.element_of_order(r).expect("r divides p-1"),
                        b: b % self.spec.p,
                    }
                }
            }
            other => other,
        }
    }

    pub fn same_subgroup(&self, x: &SubgroupDesc, y: &SubgroupDesc) -> bool {
        self.canonical(x) == self.canonical(y)
    }

    pub fn subgroup_contains(&self, h: &SubgroupDesc, g: &GroupElement) -> bool {
        let p = self.spec.p;
        match *h {
            SubgroupDesc::Trivial => *g == GroupElement::IDENTITY,
            SubgroupDesc::Full => self.contains(g),
            SubgroupDesc::Normal { q } => self.contains(g) && pow_mod(g.a, q, p) == 1,
            SubgroupDesc::Conjugate { a, b } => {
                let r = multiplicative_order(a, p);
                pow_mod(g.a, r, p) == 1
                    && g.b < p
                    && g.b == mul_mod(sub_mod(1, g.a, p), b, p)
            }
        }
    }

    /// `g H g^{-1}`.
    pub fn conjugate_subgroup(&self, h: &SubgroupDesc, g: &GroupElement) -> SubgroupDesc {
        match *h {
            SubgroupDesc::Conjugate { a, b } => SubgroupDesc::Conjugate {
                a,
                b: g.act(b, self.spec.p),
            },
            other => other,
        }
    }

    /// Elements of `H`, duplicate-free.
    pub fn enumerate_subgroup(&self, h: &SubgroupDesc) -> Result<Vec<GroupElement>> {
        self.validate_subgroup(h)?;
        let size = self.subgroup_order(h);
        if size > ENUMERATION_CAP {
            return Err(Error::CapExceeded {
                size,
                cap: ENUMERATION_CAP,
            });
        }
        let p = self.spec.p;
        Ok(match *h {
            SubgroupDesc::Trivial => vec![GroupElement::IDENTITY],
            SubgroupDesc::Full => self.elements().collect(),
            SubgroupDesc::Normal { q } => {
                let c = self.element_of_order(q)?;
                let mut out = Vec::with_capacity(size as usize);
                let mut x = 1;
                for _ in 0..q {
                    out.extend((0..p).map(|y| GroupElement::new(x, y)));
                    x = mul_mod(x, c, p);
                }
                out
            }
            SubgroupDesc::Conjugate { a, b } => {
                let mut out = Vec::with_capacity(size as usize);
                let mut x = 1;
                for _ in 0..size {
                    out.push(GroupElement::new(x, mul_mod(sub_mod(1, x, p), b, p)));
                    x = mul_mod(x, a, p);
                }
                out
            }
        })
    }

    /// A uniformly random element of `H`.
    pub fn random_subgroup_element<R: Rng + ?Sized>(
        &self,
        h: &SubgroupDesc,
        rng: &mut R,
    ) -> GroupElement {
        let p = self.spec.p;
        match *h {
            SubgroupDesc::Trivial => GroupElement::IDENTITY,
            SubgroupDesc::Full => self.random_element(rng),
            SubgroupDesc::Normal { q } => {
                let c = self.element_of_order(q).expect("validated");
                GroupElement::new(pow_mod(c, rng.random_range(0..q), p), rng.random_range(0..p))
            }
            SubgroupDesc::Conjugate { a, b } => {
                let r = multiplicative_order(a, p);
                let x = pow_mod(a, rng.random_range(0..r), p);
                GroupElement::new(x, mul_mod(sub_mod(1, x, p), b, p))
            }
        }
    }

    /// Canonical label of the left coset `gH`: its minimal element under
    /// lexicographic `(a, b)` order.
    pub fn coset_label(&self, h: &SubgroupDesc, g: &GroupElement) -> GroupElement {
        let p = self.spec.p;
        match *h {
            SubgroupDesc::Trivial => *g,
            SubgroupDesc::Full => GroupElement::IDENTITY,
            SubgroupDesc::Normal { q } => GroupElement::new(self.min_rep(g.a, q), 0),
            SubgroupDesc::Conjugate { a, b } => {
                let r = multiplicative_order(a, p);
                // every element of gH sends b to g(b)
                let image = g.act(b, p);
                let m = self.min_rep(g.a, r);
                GroupElement::new(m, sub_mod(image, mul_mod(m, b, p), p))
            }
        }
    }

    /// One representative (the canonical label) per left coset of `H`.
    pub fn coset_representatives(&self, h: &SubgroupDesc) -> Result<Vec<GroupElement>> {
        self.validate_subgroup(h)?;
        let count = self.order() / self.subgroup_order(h);
        if count > ENUMERATION_CAP {
            return Err(Error::CapExceeded {
                size: count,
                cap: ENUMERATION_CAP,
            });
        }
        let p = self.spec.p;
        let mult_reps = |r: u64| -> Vec<u64> {
            // minimal representatives of ⟨a⟩ / ⟨order-r subgroup⟩
            let reps = self.min_coset_reps(r);
            let classes = (p - 1) / r;
            (0..classes)
                .step_by(self.step as usize)
                .map(|c| reps[c as usize])
                .collect()
        };
        let mut out: Vec<GroupElement> = match *h {
            SubgroupDesc::Trivial => self.elements().collect(),
            SubgroupDesc::Full => vec![GroupElement::IDENTITY],
            SubgroupDesc::Normal { q } => mult_reps(q)
                .into_iter()
                .map(|m| GroupElement::new(m, 0))
                .collect(),
            SubgroupDesc::Conjugate { a, b } => {
                let r = multiplicative_order(a, p);
                let mut out = Vec::with_capacity(count as usize);
                for m in mult_reps(r) {
                    let shift = mul_mod(m, b, p);
                    out.extend((0..p).map(|c| GroupElement::new(m, sub_mod(c, shift, p))));
                }
                out
            }
        };
        out.sort_unstable();
        Ok(out)
    }

    /// Recognise a subgroup from its element list.
    pub fn identify_subgroup(&self, elements: &[GroupElement]) -> Result<SubgroupDesc> {
        let p = self.spec.p;
        let set: BTreeSet<GroupElement> = elements.iter().copied().collect();
        let n = set.len() as u64;
        let violation = |why: &str| Err(Error::PromiseViolation(why.to_string()));
        if !set.contains(&GroupElement::IDENTITY) {
            return violation("level set of the identity does not contain it");
        }
        let candidate = if n == 1 {
            SubgroupDesc::Trivial
        } else if n % p == 0 {
            let r = n / p;
            if self.spec.q % r != 0 {
                return violation("level set size is not a subgroup order");
            }
            if r == self.spec.q {
                SubgroupDesc::Full
            } else {
                SubgroupDesc::Normal { q: r }
            }
        } else {
            let Some(gen) = set
                .iter()
                .find(|g| g.a != 1 && multiplicative_order(g.a, p) == n)
            else {
                return violation("level set is not a subgroup");
            };
            let b = mul_mod(gen.b, inv_mod(sub_mod(1, gen.a, p), p), p);
            SubgroupDesc::Conjugate { a: gen.a, b }
        };
        if self.validate_subgroup(&candidate).is_err() || self.subgroup_order(&candidate) != n {
            return violation("level set is not a subgroup");
        }
        let listed: BTreeSet<GroupElement> =
            self.enumerate_subgroup(&candidate)?.into_iter().collect();
        if listed != set {
            return violation("level set is not a subgroup");
        }
        Ok(self.canonical(&candidate))
    }
}

/// Inverse of `w` modulo a (possibly composite) `m`, for `gcd(w, m) = 1`.
fn inverse_mod_composite(w: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (w as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quotient = old_r / r;
        (old_r, r) = (r, old_r - quotient * r);
        (old_s, s) = (s, old_s - quotient * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as u64
}

/// A group spec together with an optional subgroup, in the flat JSON layout
/// `{"p":7,"q":3,"gamma":3,"a":2,"subgroup":{"kind":"conjugate","a":2,"b":1}}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupConfig {
    #[serde(flatten)]
    pub spec: GroupSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<SubgroupDesc>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(v: Vec<GroupElement>) -> BTreeSet<GroupElement> {
        v.into_iter().collect()
    }

    fn e(a: u64, b: u64) -> GroupElement {
        GroupElement::new(a, b)
    }

    #[test]
    fn spec_validation() {
        assert!(GroupSpec::new(7, 3, 3, 2).is_ok());
        assert!(matches!(GroupSpec::new(9, 3, 2, 4), Err(Error::NotPrime(9))));
        assert!(matches!(
            GroupSpec::new(7, 4, 3, 2),
            Err(Error::OrderDoesNotDivide { .. })
        ));
        assert!(matches!(
            GroupSpec::new(7, 3, 2, 2),
            Err(Error::NotGenerator { .. })
        ));
        assert!(matches!(
            GroupSpec::new(7, 3, 3, 6),
            Err(Error::WrongOrder { actual: 2, .. })
        ));
        let s = GroupSpec::qhedral(23, 11).unwrap();
        assert_eq!((s.gamma, s.a, s.order()), (5, 2, 253));
        assert_eq!(GroupSpec::affine(7).unwrap().kind(), GroupKind::Affine);
        assert_eq!(s.kind(), GroupKind::QHedral);
    }

    #[test]
    fn multiply_examples() {
        let g = Group::affine(7).unwrap();
        assert_eq!(g.multiply(&e(1, 0), &e(5, 3)).unwrap(), e(5, 3));
        assert_eq!(g.multiply(&e(2, 3), &e(4, 5)).unwrap(), e(1, 6));
        let x = e(3, 1);
        assert_eq!(g.multiply(&x, &g.inverse(&x)).unwrap(), GroupElement::IDENTITY);
        let qh = Group::qhedral(7, 3).unwrap();
        assert!(matches!(
            qh.multiply(&e(3, 0), &e(1, 1)),
            Err(Error::NotInGroup { a: 3, b: 0 })
        ));
    }

    #[test]
    fn group_axioms_exhaustive_small() {
        for (p, q) in [(7u64, 6u64), (7, 3), (11, 5), (13, 4)] {
            let g = Group::qhedral(p, q).unwrap();
            let all: Vec<_> = g.elements().collect();
            assert_eq!(all.len() as u64, g.order());
            for x in &all {
                assert_eq!(g.mul(x, &GroupElement::IDENTITY), *x);
                assert_eq!(g.mul(&GroupElement::IDENTITY, x), *x);
                assert_eq!(g.mul(x, &g.inverse(x)), GroupElement::IDENTITY);
                for y in &all {
                    assert!(g.contains(&g.mul(x, y)));
                }
            }
            for x in all.iter().step_by(3) {
                for y in all.iter().step_by(2) {
                    for z in all.iter().step_by(5) {
                        assert_eq!(g.mul(&g.mul(x, y), z), g.mul(x, &g.mul(y, z)));
                    }
                }
            }
        }
    }

    #[test]
    fn enumerate_examples() {
        let g = Group::affine(7).unwrap();
        assert_eq!(
            g.enumerate_subgroup(&SubgroupDesc::Trivial).unwrap(),
            vec![GroupElement::IDENTITY]
        );
        assert_eq!(
            set(g.enumerate_subgroup(&SubgroupDesc::Conjugate { a: 2, b: 1 }).unwrap()),
            set(vec![e(1, 0), e(2, 6), e(4, 4)])
        );
        let n3 = g.enumerate_subgroup(&SubgroupDesc::Normal { q: 3 }).unwrap();
        assert_eq!(n3.len(), 21);
        assert!(n3.iter().all(|x| [1, 2, 4].contains(&x.a)));
        assert_eq!(set(n3).len(), 21);
    }

    #[test]
    fn enumeration_cap() {
        let g = Group::affine(10007).unwrap();
        assert!(matches!(
            g.enumerate_subgroup(&SubgroupDesc::Full),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            g.coset_representatives(&SubgroupDesc::Trivial),
            Err(Error::CapExceeded { .. })
        ));
    }

    fn all_subgroups(g: &Group) -> Vec<SubgroupDesc> {
        let p = g.p();
        let mut out = vec![SubgroupDesc::Trivial, SubgroupDesc::Full];
        for r in crate::arith::divisors(g.q()) {
            out.push(SubgroupDesc::Normal { q: r });
            if r > 1 {
                let a = g.element_of_order(r).unwrap();
                for b in 0..p {
                    out.push(SubgroupDesc::Conjugate { a, b });
                }
            }
        }
        out
    }

    #[test]
    fn subgroups_closed_and_conjugation_matches() {
        for (p, q) in [(7u64, 6u64), (7, 3), (13, 12), (13, 4)] {
            let g = Group::qhedral(p, q).unwrap();
            for h in all_subgroups(&g) {
                let elems = g.enumerate_subgroup(&h).unwrap();
                let s = set(elems.clone());
                assert_eq!(s.len() as u64, g.subgroup_order(&h), "{h}");
                for x in &elems {
                    assert!(s.contains(&g.inverse(x)));
                    assert!(g.subgroup_contains(&h, x));
                    for y in &elems {
                        assert!(s.contains(&g.mul(x, y)), "{h} not closed");
                    }
                }
                if let SubgroupDesc::Conjugate { a, b } = h {
                    // H_a^b = (1,b) H_a (1,-b)
                    let base = g.enumerate_subgroup(&SubgroupDesc::Conjugate { a, b: 0 }).unwrap();
                    let t = e(1, b);
                    let ti = g.inverse(&t);
                    let conj: BTreeSet<_> =
                        base.iter().map(|x| g.mul(&g.mul(&t, x), &ti)).collect();
                    assert_eq!(conj, s);
                }
                assert_eq!(g.identify_subgroup(&elems).unwrap(), g.canonical(&h));
            }
        }
    }

    #[test]
    fn coset_labels_partition_left_cosets() {
        for (p, q) in [(7u64, 6u64), (7, 3), (11, 10)] {
            let g = Group::qhedral(p, q).unwrap();
            let all: Vec<_> = g.elements().collect();
            for h in all_subgroups(&g) {
                let elems = g.enumerate_subgroup(&h).unwrap();
                let reps = g.coset_representatives(&h).unwrap();
                assert_eq!(reps.len() as u64, g.order() / g.subgroup_order(&h));
                for x in &all {
                    let label = g.coset_label(&h, x);
                    // label is the minimum of xH
                    let coset: BTreeSet<_> = elems.iter().map(|k| g.mul(x, k)).collect();
                    assert_eq!(label, *coset.iter().next().unwrap(), "{h} at {x}");
                    assert!(reps.binary_search(&label).is_ok());
                }
            }
        }
        let g = Group::affine(7).unwrap();
        let h = SubgroupDesc::Conjugate { a: 2, b: 0 };
        assert_eq!(g.coset_representatives(&h).unwrap().len(), 14);
        assert_eq!(
            g.coset_representatives(&SubgroupDesc::Full).unwrap(),
            vec![GroupElement::IDENTITY]
        );
    }

    #[test]
    fn identify_rejects_non_subgroups() {
        let g = Group::affine(7).unwrap();
        assert!(g.identify_subgroup(&[e(1, 0), e(2, 1)]).is_err());
        assert!(g.identify_subgroup(&[e(2, 1)]).is_err());
    }

    #[test]
    fn exponent_roundtrip_and_random_members() {
        let g = Group::qhedral(103, 17).unwrap();
        for u in 0..17 {
            assert_eq!(g.exponent_of(g.a_pow(u)).unwrap(), u);
        }
        assert!(g.exponent_of(g.spec().gamma).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = SubgroupDesc::Conjugate {
            a: g.element_of_order(17).unwrap(),
            b: 40,
        };
        for _ in 0..50 {
            assert!(g.contains(&g.random_element(&mut rng)));
            assert!(g.subgroup_contains(&h, &g.random_subgroup_element(&h, &mut rng)));
        }
    }

    #[test]
    fn config_json_layout() {
        let cfg = GroupConfig {
            spec: GroupSpec::new(7, 3, 3, 2).unwrap(),
            subgroup: Some(SubgroupDesc::Conjugate { a: 2, b: 1 }),
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(
            text,
            r#"{"p":7,"q":3,"gamma":3,"a":2,"subgroup":{"kind":"conjugate","a":2,"b":1}}"#
        );
        let back: GroupConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
