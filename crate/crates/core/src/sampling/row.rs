//! Row measurement followed by a Fourier transform over `Z_{p-1}` on the
//! column register, for hidden conjugates `H_a^b` of `A_p`.
//!
//! With `ρ(a, b)` carrying `ω_p^{bj}` at `(j, aj)`, the nonzero entries of a
//! row of `φ̂_c(ρ) ∝ ρ(c) π_H(ρ)` sit on one coset `K = j⟨a⟩` with
//! amplitudes proportional to `ω_p^{-bk}`, whatever `c` is. Measuring the row
//! therefore reveals only `K`, and the column register is left in
//! `Σ_{k∈K} ω_p^{-bk} |k⟩`. Transforming that with
//! `F_{k,ℓ} = ω_{p-1}^{ℓk}/sqrt(p-1)` gives
//! `P(ℓ | K) = |Σ_{k∈K} e^{2iθk}|² / (|K| (p-1))`, `θ = π(b/p - ℓ/(p-1))`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::arith::mul_mod;
use crate::dist::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::group::{Group, GroupKind, SubgroupDesc};
use crate::repr::{observe_rep_distribution, CMatrix, IrrepName, Projector};

fn require_affine(group: &Group) -> Result<()> {
    if group.kind() == GroupKind::Affine {
        Ok(())
    } else {
        Err(Error::NotAffine)
    }
}

/// `(order of the multiplicative part, b)` for the subgroups with a
/// nonzero `ρ` component; `None` for normal subgroups.
fn conjugate_params(group: &Group, h: &SubgroupDesc) -> Option<(u64, u64)> {
    match group.canonical(h) {
        SubgroupDesc::Trivial => Some((1, 0)),
        SubgroupDesc::Conjugate { a, b } => Some((crate::arith::multiplicative_order(a, group.p()), b)),
        _ => None,
    }
}

/// The coset `k ⟨element of order r⟩`.
fn class_elements(group: &Group, k: u64, r: u64) -> Vec<u64> {
    let p = group.p();
    let c = group.element_of_order(r).expect("r divides p-1");
    let mut out = Vec::with_capacity(r as usize);
    let mut x = k;
    for _ in 0..r {
        out.push(x);
        x = mul_mod(x, c, p);
    }
    out
}

fn sorted_classes(group: &Group, r: u64) -> Vec<u64> {
    let mut v = group.min_coset_reps(r).to_vec();
    v.sort_unstable();
    v
}

/// `P(ℓ | K)` for every `ℓ`, by direct summation.
fn class_probs_direct(p: u64, b: u64, class: &[u64]) -> Vec<f64> {
    let n = p - 1;
    (0..n)
        .map(|ell| {
            let s: Complex64 = class
                .iter()
                .map(|&k| {
                    let x = mul_mod(b, k, p) as f64 / p as f64 - mul_mod(ell, k, n) as f64 / n as f64;
                    Complex64::from_polar(1.0, TAU * x)
                })
                .sum();
            s.norm_sqr() / (class.len() as f64 * n as f64)
        })
        .collect()
}

/// Exact distribution over `(class, ℓ)` conditioned on observing `ρ` and
/// averaged over cosets. `class` is the least element of the coset `K`
/// holding the observed row's support.
pub fn row_fourier_distribution(group: &Group, h: &SubgroupDesc) -> Result<OutcomeDistribution> {
    require_affine(group)?;
    group.validate_subgroup(h)?;
    let (r, b) = conjugate_params(group, h).ok_or_else(|| {
        Error::InvalidParameter(format!("{h} is normal: ρ is never observed"))
    })?;
    let p = group.p();
    let classes = sorted_classes(group, r);
    let w = 1.0 / classes.len() as f64;
    let mut out = OutcomeDistribution::new(["class", "ell"])
        .with_meta("spec", group.spec())
        .with_meta("subgroup", h)
        .with_meta("basis", "adapted")
        .with_meta("averaged", true);
    for &k in &classes {
        let probs = class_probs_direct(p, b, &class_elements(group, k, r));
        for (ell, pr) in probs.into_iter().enumerate() {
            out.add(vec![k.into(), ell.into()], w * pr);
        }
    }
    Ok(out)
}

/// `sin²((p-1)θ) / ((p-1)² sin²θ)` for the maximal subgroup, indexed by `ℓ`.
pub fn row_fourier_maximal_closed_form(p: u64, b: u64) -> Vec<f64> {
    let n = p - 1;
    let modulus = (p * n) as i128;
    (0..n)
        .map(|ell| {
            // θ = π x / (p (p-1)) with x = b(p-1) - ℓp
            let x = (b as i128 * n as i128 - ell as i128 * p as i128).rem_euclid(modulus);
            if x == 0 {
                return 1.0;
            }
            let theta = PI * x as f64 / modulus as f64;
            let num = (PI * (x % p as i128) as f64 / p as f64).sin();
            (num * num) / ((n * n) as f64 * theta.sin().powi(2))
        })
        .collect()
}

/// The same distribution as [`row_fourier_distribution`], computed by
/// building `φ̂_c(ρ)` for every coset and multiplying by the dense transform.
pub fn row_fourier_bruteforce(group: &Group, h: &SubgroupDesc) -> Result<OutcomeDistribution> {
    require_affine(group)?;
    let (r, _) = conjugate_params(group, h).ok_or_else(|| {
        Error::InvalidParameter(format!("{h} is normal: ρ is never observed"))
    })?;
    let p = group.p();
    let n = (p - 1) as usize;
    let w = group.omega_pm1();
    let f = CMatrix::from_fn(n, n, |row, ell| {
        w.pow(mul_mod(ell as u64, row as u64 + 1, p - 1)) / (n as f64).sqrt()
    });
    let pi = Projector::new(group, h, &IrrepName::Rho)?;
    let wmat = &pi.matrix * &f;
    let reps = group.coset_representatives(h)?;
    let mut acc: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for c in &reps {
        let m = crate::repr::evaluate(group, &IrrepName::Rho, c)?;
        let v = m.left_apply(&pi.matrix);
        let x = m.left_apply(&wmat);
        for i in 0..n {
            let Some(col) = (0..n).find(|&j| v[(i, j)].norm() > 1e-9) else {
                continue;
            };
            let row = acc.entry(group.min_rep(col as u64 + 1, r)).or_insert_with(|| vec![0.0; n]);
            for (ell, slot) in row.iter_mut().enumerate() {
                *slot += x[(i, ell)].norm_sqr();
            }
        }
    }
    let mut out = OutcomeDistribution::new(["class", "ell"]);
    for (class, row) in acc {
        for (ell, pr) in row.into_iter().enumerate() {
            out.add(vec![class.into(), ell.into()], pr);
        }
    }
    out.normalize();
    Ok(out)
}

/// Fraction of the coset `k⟨a⟩` lying strictly inside `(p/6, 5p/6)`.
pub fn coset_interval_fraction(group: &Group, a: u64, k: u64) -> Result<f64> {
    let p = group.p();
    if k % p == 0 || a % p == 0 {
        return Err(Error::InvalidParameter("a and k must be nonzero mod p".into()));
    }
    let r = crate::arith::multiplicative_order(a, p);
    let mut x = k % p;
    let mut inside = 0u64;
    for _ in 0..r {
        if 6 * x > p && 6 * x < 5 * p {
            inside += 1;
        }
        x = mul_mod(x, a, p);
    }
    Ok(inside as f64 / r as f64)
}

/// The frequency minimising `|θ|` for shift `b` (smaller `ℓ` on ties).
pub fn closest_ell(p: u64, b: u64) -> u64 {
    let n = p - 1;
    let modulus = (p * n) as i128;
    let mut best = (i128::MAX, 0u64);
    for ell in 0..n {
        let x = (b as i128 * n as i128 - ell as i128 * p as i128).rem_euclid(modulus);
        let d = x.min(modulus - x);
        if d < best.0 {
            best = (d, ell);
        }
    }
    best.1
}

/// Shifts `b` whose `θ` is near zero for the observed `ℓ`: the nearest
/// integer to `p ℓ/(p-1)` and its `width` neighbours on either side.
pub fn candidate_window(p: u64, ell: u64, width: u64) -> Vec<u64> {
    let n = p - 1;
    let center = ((2 * p as u128 * ell as u128 + n as u128) / (2 * n as u128)) as u64 % p;
    let mut out: Vec<u64> = (0..=2 * width)
        .map(|i| (center + p + i - width) % p)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Draws `(class, ℓ)` outcomes of the row measurement for a fixed hidden
/// subgroup, with per-class spectra computed by FFT and cached.
pub struct RowFourierSampler {
    group: Arc<Group>,
    hidden: SubgroupDesc,
    p_rho: f64,
    order: u64,
    b: u64,
    classes: Vec<u64>,
    fft: Arc<dyn Fft<f64>>,
    cache: Mutex<HashMap<u64, Arc<Vec<f64>>>>,
}

impl RowFourierSampler {
    pub fn new(group: Arc<Group>, hidden: SubgroupDesc) -> Result<Self> {
        require_affine(&group)?;
        group.validate_subgroup(&hidden)?;
        let hidden = group.canonical(&hidden);
        let weak = observe_rep_distribution(&group, &hidden)?;
        let p_rho = weak.get(&["rho".into()]);
        let (order, b) = conjugate_params(&group, &hidden).unwrap_or((1, 0));
        let classes = if p_rho > 0.0 {
            sorted_classes(&group, order)
        } else {
            Vec::new()
        };
        let fft = FftPlanner::new().plan_fft_inverse((group.p() - 1) as usize);
        Ok(RowFourierSampler {
            group,
            hidden,
            p_rho,
            order,
            b,
            classes,
            fft,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn hidden(&self) -> SubgroupDesc {
        self.hidden
    }

    pub fn p_rho(&self) -> f64 {
        self.p_rho
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// `P(ℓ | K)` as computed by FFT.
    pub fn class_spectrum(&self, class: u64) -> Vec<f64> {
        let p = self.group.p();
        let n = (p - 1) as usize;
        let w = self.group.omega_p();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let elems = class_elements(&self.group, class, self.order);
        for &k in &elems {
            buf[(k % (p - 1)) as usize] += w.pow_neg(mul_mod(self.b, k, p));
        }
        self.fft.process(&mut buf);
        let norm = 1.0 / (elems.len() as f64 * n as f64);
        buf.iter().map(|z| z.norm_sqr() * norm).collect()
    }

    fn cumulative(&self, class: u64) -> Arc<Vec<f64>> {
        if let Some(c) = self.cache.lock().expect("cache poisoned").get(&class) {
            return c.clone();
        }
        let mut acc = 0.0;
        let cum: Vec<f64> = self
            .class_spectrum(class)
            .into_iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        let cum = Arc::new(cum);
        self.cache
            .lock()
            .expect("cache poisoned")
            .insert(class, cum.clone());
        cum
    }

    /// One run of the measurement: `None` when a one-dimensional irrep is
    /// observed instead of `ρ`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<(u64, u64)> {
        if self.classes.is_empty() || rng.random::<f64>() >= self.p_rho {
            return None;
        }
        let class = self.classes[rng.random_range(0..self.classes.len())];
        let cum = self.cumulative(class);
        let u = rng.random::<f64>() * cum.last().copied().unwrap_or(1.0);
        let ell = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        Some((class, ell as u64))
    }
}
