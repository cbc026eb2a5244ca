//! Exponential sums over `Z_p`, distance utilities, and the projection
//! concentration experiment.
//!
//! Multiplicative characters are `ψ_t(γ^z) = ω_{p-1}^{tz}` with `t = 0` the
//! trivial character.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{mul_mod, primitive_root};
use crate::dist::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::group::Group;
use crate::rng::trial_rng;
use crate::sampling::info_measurement_formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CharacterPair {
    pub p: u64,
    /// Additive index: `χ_s(z) = ω_p^{sz}`.
    pub s: u64,
    /// Multiplicative index with respect to `gamma`.
    pub t: u64,
    pub gamma: u64,
}

impl CharacterPair {
    pub fn new(p: u64, s: u64, t: u64) -> Result<Self> {
        if !crate::arith::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(CharacterPair {
            p,
            s: s % p,
            t: t % (p - 1),
            gamma: primitive_root(p)?,
        })
    }
}

fn omega(k: u64, n: u64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (k % n) as f64 / n as f64)
}

/// `Σ_{z ∈ Z_p^*} χ_s(z) ψ_t(z)`, summed along `z = γ^e`.
pub fn gauss_sum(pair: &CharacterPair) -> Complex64 {
    let p = pair.p;
    let mut z = 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for e in 0..p - 1 {
        acc += omega(mul_mod(pair.s, z, p), p) * omega(mul_mod(pair.t, e, p - 1), p - 1);
        z = mul_mod(z, pair.gamma, p);
    }
    acc
}

/// Value the sum takes when a character is trivial, `None` when both are
/// nontrivial (then `|G| = √p`).
pub fn degenerate_value(p: u64, s: u64, t: u64) -> Option<f64> {
    match (s % p == 0, t % (p - 1) == 0) {
        (true, true) => Some((p - 1) as f64),
        (true, false) => Some(0.0),
        (false, true) => Some(-1.0),
        (false, false) => None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GaussRow {
    pub s: u64,
    pub t: u64,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// `√p` or the degenerate value.
    pub expected: f64,
    pub error: f64,
}

/// Every `(s, t)` pair for `p`.
pub fn gauss_sum_table(p: u64) -> Result<Vec<GaussRow>> {
    let gamma = CharacterPair::new(p, 0, 0)?.gamma;
    let rows: Vec<GaussRow> = (0..p)
        .into_par_iter()
        .flat_map_iter(|s| {
            (0..p - 1).map(move |t| {
                let g = gauss_sum(&CharacterPair { p, s, t, gamma });
                let (expected, error) = match degenerate_value(p, s, t) {
                    Some(v) => (v, (g - Complex64::new(v, 0.0)).norm()),
                    None => ((p as f64).sqrt(), (g.norm() - (p as f64).sqrt()).abs()),
                };
                GaussRow {
                    s,
                    t,
                    re: g.re,
                    im: g.im,
                    modulus: g.norm(),
                    expected,
                    error,
                }
            })
        })
        .collect();
    Ok(rows)
}

/// `Σ_{z=0}^{q-1} χ_t(a^z)` term by term.
pub fn incomplete_gauss_sum(t: u64, a: u64, p: u64) -> Complex64 {
    let q = crate::arith::multiplicative_order(a, p);
    let mut x = 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..q {
        acc += omega(mul_mod(t, x, p), p);
        x = mul_mod(x, a, p);
    }
    acc
}

/// The same sum through complete Gauss sums: the indicator of `⟨a⟩` is
/// the average of the `(p-1)/q` multiplicative characters trivial on it,
/// so the sum is `(q/(p-1)) Σ_i G(t, q i)`.
pub fn incomplete_gauss_sum_dual(t: u64, a: u64, p: u64) -> Result<Complex64> {
    let q = crate::arith::multiplicative_order(a, p);
    let m = (p - 1) / q;
    let gamma = primitive_root(p)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..m {
        acc += gauss_sum(&CharacterPair { p, s: t % p, t: q * i, gamma });
    }
    Ok(acc / m as f64)
}

/// Which bound applies to the incomplete sum for subgroup order `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SumRegime {
    /// `q ≥ p^{2/3}`: `O(p^{1/2})`.
    Large,
    /// `p^{1/2} ≤ q ≤ p^{2/3}`: `O(p^{1/4} q^{3/8})`.
    Middle,
    /// `p^{1/3} ≤ q ≤ p^{1/2}`: `O(p^{1/8} q^{5/8})`.
    Small,
    /// No bound.
    Unbounded,
}

impl SumRegime {
    pub fn of(p: u64, q: u64) -> Self {
        let (pf, qf) = (p as f64, q as f64);
        if qf >= pf.powf(2.0 / 3.0) {
            SumRegime::Large
        } else if qf >= pf.sqrt() {
            SumRegime::Middle
        } else if qf >= pf.cbrt() {
            SumRegime::Small
        } else {
            SumRegime::Unbounded
        }
    }

    /// The bound without its constant, or `None` below `p^{1/3}`.
    pub fn scale(&self, p: u64, q: u64) -> Option<f64> {
        let (pf, qf) = (p as f64, q as f64);
        match self {
            SumRegime::Large => Some(pf.sqrt()),
            SumRegime::Middle => Some(pf.powf(0.25) * qf.powf(0.375)),
            SumRegime::Small => Some(pf.powf(0.125) * qf.powf(0.625)),
            SumRegime::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IncompleteScan {
    pub p: u64,
    pub q: u64,
    pub regime: SumRegime,
    pub max_modulus: f64,
    pub argmax_t: u64,
    /// `max |S| / scale`, if the regime has a bound.
    pub fitted_constant: Option<f64>,
}

/// `max_{t ≠ 0} |Σ_z χ_t(a^z)|` for `a` of order `q`. The sum only depends
/// on the coset `t⟨a⟩`, so one `t` per coset is evaluated.
pub fn incomplete_sum_scan(p: u64, q: u64) -> Result<IncompleteScan> {
    let group = Group::qhedral(p, q)?;
    let a = group.spec().a;
    let reps = group.min_coset_reps(q);
    let (max_modulus, argmax_t) = reps
        .par_iter()
        .map(|&t| (incomplete_gauss_sum(t, a, p).norm(), t))
        .reduce(|| (0.0, 0), |x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x });
    let regime = SumRegime::of(p, q);
    Ok(IncompleteScan {
        p,
        q,
        regime,
        max_modulus,
        argmax_t,
        fitted_constant: regime.scale(p, q).map(|s| max_modulus / s),
    })
}

pub fn total_variation(d1: &OutcomeDistribution, d2: &OutcomeDistribution) -> Result<f64> {
    d1.total_variation(d2)
}

/// `Σ_x |d(x) - 1/n|` over an outcome space of size `n`.
pub fn l1_to_uniform(d: &OutcomeDistribution, n: usize) -> f64 {
    let u = 1.0 / n as f64;
    let seen: f64 = d.iter().map(|(_, p)| (p - u).abs()).sum();
    seen + (n - d.len()) as f64 * u
}

/// `Σ_{m ∈ Z_p^*} (cos(2π m b/p) - cos(2π m b'/p))²`, equal to `p` when
/// `b, b' ≠ 0` and `b' ≢ ±b`.
pub fn cosine_gap_sum(p: u64, b: u64, b2: u64) -> f64 {
    (1..p)
        .map(|m| {
            let x = (TAU * mul_mod(m, b, p) as f64 / p as f64).cos();
            let y = (TAU * mul_mod(m, b2, p) as f64 / p as f64).cos();
            (x - y).powi(2)
        })
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationRow {
    pub b: u64,
    pub b2: u64,
    pub tv: f64,
    /// `(1/(4(p-1))) Σ_m (cos - cos)²`.
    pub lower: f64,
    /// `p / (4(p-1))`.
    pub claimed: f64,
}

/// TV between the block / POVM / Hadamard distributions for `b` and `b'`
/// with blocks from `a`, next to the cosine lower bound.
pub fn info_separation(group: &Group, a: u64, b: u64, b2: u64) -> Result<SeparationRow> {
    let p = group.p();
    let d1 = info_measurement_formula(group, a, b)?;
    let d2 = info_measurement_formula(group, a, b2)?;
    Ok(SeparationRow {
        b,
        b2,
        tv: d1.total_variation(&d2)?,
        lower: cosine_gap_sum(p, b, b2) / (4.0 * (p - 1) as f64),
        claimed: p as f64 / (4.0 * (p - 1) as f64),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationRow {
    pub rank: usize,
    pub dim: usize,
    pub vectors: usize,
    pub delta: f64,
    pub tail: f64,
    /// `4 exp(-r δ²/48)`.
    pub bound: f64,
    pub sigma: f64,
    pub pass: bool,
}

/// Tail frequency of `| |πv|² - r/d | > δ r/d` for Haar-random unit
/// vectors `v ∈ C^d` and a rank-`r` projection, against `4 e^{-rδ²/48}`.
/// By unitary invariance `π` projects onto the first `r` coordinates.
pub fn concentration_experiment(
    rank: usize,
    dim: usize,
    vectors: usize,
    deltas: &[f64],
    seed: u64,
) -> Result<Vec<ConcentrationRow>> {
    if rank == 0 || rank > dim || vectors == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < rank ≤ dim and at least one vector (rank {rank}, dim {dim})"
        )));
    }
    let mean = rank as f64 / dim as f64;
    let weights: Vec<f64> = (0..vectors)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let mut head = 0.0;
            let mut total = 0.0;
            for j in 0..dim {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let w = re * re + im * im;
                total += w;
                if j < rank {
                    head += w;
                }
            }
            head / total
        })
        .collect();
    Ok(deltas
        .iter()
        .map(|&delta| {
            let hits = weights
                .iter()
                .filter(|&&w| (w - mean).abs() > delta * mean)
                .count();
            let tail = hits as f64 / vectors as f64;
            let bound = 4.0 * (-(rank as f64) * delta * delta / 48.0).exp();
            let pb = bound.min(1.0);
            let sigma = (pb * (1.0 - pb) / vectors as f64).sqrt();
            ConcentrationRow {
                rank,
                dim,
                vectors,
                delta,
                tail,
                bound,
                sigma,
                pass: tail <= bound + 3.0 * sigma,
            }
        })
        .collect())
}
