//! The block / POVM / Hadamard measurement on `ρ` for hidden conjugates of
//! `H_a` in `A_p`.
//!
//! After the row is measured, the column register holds a state supported
//! on one block `k⟨a⟩`. In block coordinates `k a^s` the POVM
//! `E_u = (P_u + P_{u+1})/2` keeps two neighbouring positions, and a
//! Hadamard on `(e_u, e_{u+1})` yields a bit with
//! `P(0) = cos²(π m b / p)`, `m = k a^u (a - 1)`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::arith::{multiplicative_order, mul_mod, sub_mod};
use crate::dist::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::group::{Group, GroupKind, SubgroupDesc};
use crate::repr::{block_structure, dimension, evaluate, CMatrix, IrrepName};

/// Largest group on which [`info_state_vector_distribution`] runs.
pub const STATE_VECTOR_CAP: u64 = 5000;

fn fields() -> [&'static str; 3] {
    ["block", "u", "bit"]
}

/// `cos²(π x / p)` with `x` reduced mod `p`.
pub fn cos_sq(x: u64, p: u64) -> f64 {
    (PI * (x % p) as f64 / p as f64).cos().powi(2)
}

/// Coefficient `m = k a^u (a - 1) mod p`.
pub fn effective_coefficient(group: &Group, a: u64, k: u64, u: u64) -> u64 {
    let p = group.p();
    mul_mod(
        mul_mod(k, crate::arith::pow_mod(a, u, p), p),
        sub_mod(a, 1, p),
        p,
    )
}

fn check(group: &Group, a: u64) -> Result<u64> {
    if group.kind() != GroupKind::Affine {
        return Err(Error::NotAffine);
    }
    let p = group.p();
    if a % p == 0 || a % p == 1 {
        return Err(Error::InvalidParameter(format!(
            "block generator {a} must have order at least 2"
        )));
    }
    Ok(multiplicative_order(a, p))
}

/// Closed form for hidden `H_a^b`: `P(k, u, 0) = cos²(π m b/p)/(p-1)`.
pub fn info_measurement_formula(group: &Group, a: u64, b: u64) -> Result<OutcomeDistribution> {
    let q = check(group, a)?;
    let p = group.p();
    let bs = block_structure(group, a)?;
    let mut out = OutcomeDistribution::new(fields())
        .with_meta("spec", group.spec())
        .with_meta("subgroup", SubgroupDesc::Conjugate { a, b })
        .with_meta("route", "formula");
    let w = 1.0 / (p - 1) as f64;
    for &k in &bs.labels {
        for u in 0..q {
            let m = effective_coefficient(group, a, k, u);
            let c = cos_sq(mul_mod(m, b, p), p);
            out.add(vec![k.into(), u.into(), 0u64.into()], w * c);
            out.add(vec![k.into(), u.into(), 1u64.into()], w * (1.0 - c));
        }
    }
    Ok(out)
}

/// The measurement with blocks defined by `a`, for a hidden subgroup that
/// is trivial or a conjugate `H_c^b` with `⟨c⟩ ⊆ ⟨a⟩`.
pub fn info_measurement_distribution(
    group: &Group,
    a: u64,
    hidden: &SubgroupDesc,
) -> Result<OutcomeDistribution> {
    let q = check(group, a)?;
    let p = group.p();
    group.validate_subgroup(hidden)?;
    let (r, b) = match group.canonical(hidden) {
        SubgroupDesc::Trivial => (1, 0),
        SubgroupDesc::Conjugate { a: c, b } => {
            let r = multiplicative_order(c, p);
            if q % r != 0 {
                return Err(Error::InvalidParameter(format!(
                    "hidden order {r} does not divide the block size {q}"
                )));
            }
            (r, b)
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "{other} is normal: ρ is never observed"
            )))
        }
    };
    let bs = block_structure(group, a)?;
    let c = group.element_of_order(r)?;
    let wp = group.omega_p();
    let mut out = OutcomeDistribution::new(fields())
        .with_meta("spec", group.spec())
        .with_meta("subgroup", hidden)
        .with_meta("route", "general");
    let class_weight = r as f64 / (p - 1) as f64;
    let amp_scale = 1.0 / (r as f64).sqrt();
    let mut reps = group.min_coset_reps(r).to_vec();
    reps.sort_unstable();
    for j0 in reps {
        // row support j0⟨c⟩ with amplitudes ω^{-bk}
        let mut amp = std::collections::BTreeMap::new();
        let mut blk = 0;
        let mut k = j0;
        for _ in 0..r {
            let (bl, s) = bs.coords[(k - 1) as usize];
            blk = bl;
            amp.insert(s as u64, wp.pow_neg(mul_mod(b, k, p)) * amp_scale);
            k = mul_mod(k, c, p);
        }
        let label = bs.labels[blk];
        let mut us = BTreeSet::new();
        for &s in amp.keys() {
            us.insert(s);
            us.insert((s + q - 1) % q);
        }
        let zero = Complex64::new(0.0, 0.0);
        for u in us {
            let x = amp.get(&u).copied().unwrap_or(zero);
            let y = amp.get(&((u + 1) % q)).copied().unwrap_or(zero);
            out.add(
                vec![label.into(), u.into(), 0u64.into()],
                class_weight * (x + y).norm_sqr() / 4.0,
            );
            out.add(
                vec![label.into(), u.into(), 1u64.into()],
                class_weight * (x - y).norm_sqr() / 4.0,
            );
        }
    }
    out.clean(1e-300);
    Ok(out)
}

/// Kraus operators `M_u = diag(sqrt(E_u))` of the neighbouring-pair POVM,
/// as their diagonals.
pub fn povm_kraus(q: usize) -> Vec<Vec<f64>> {
    (0..q)
        .map(|u| {
            let mut e = vec![0.0; q];
            e[u] += 0.5;
            e[(u + 1) % q] += 0.5;
            e.into_iter().map(f64::sqrt).collect()
        })
        .collect()
}

/// The same measurement simulated on explicit state vectors: every coset's
/// `φ̂_c(ρ)` is built from the group, its columns are put in block order,
/// and each row goes through the Kraus operators and the Hadamard.
pub fn info_state_vector_distribution(
    group: &Group,
    a: u64,
    hidden: &SubgroupDesc,
) -> Result<OutcomeDistribution> {
    let q = check(group, a)? as usize;
    if group.order() > STATE_VECTOR_CAP {
        return Err(Error::CapExceeded {
            size: group.order(),
            cap: STATE_VECTOR_CAP,
        });
    }
    let bs = block_structure(group, a)?;
    let d = dimension(group, &IrrepName::Rho);
    let elems = group.enumerate_subgroup(hidden)?;
    let reps = group.coset_representatives(hidden)?;
    let kraus = povm_kraus(q);
    let scale = (d as f64 / (group.order() as f64 * elems.len() as f64)).sqrt();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = OutcomeDistribution::new(fields())
        .with_meta("spec", group.spec())
        .with_meta("subgroup", hidden)
        .with_meta("route", "state_vector");
    for c in &reps {
        let mut phi = CMatrix::zeros(d, d);
        for x in &elems {
            evaluate(group, &IrrepName::Rho, &group.mul(c, x))?.add_into(&mut phi, scale.into());
        }
        // column permutation into block order
        let mut blocked = CMatrix::zeros(d, d);
        for j in 0..d {
            let to = bs.permuted_index(j);
            blocked.set_column(to, &phi.column(j));
        }
        for i in 0..d {
            let row = blocked.row(i);
            let weight: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            if weight < 1e-14 {
                continue;
            }
            let blk = (0..bs.labels.len())
                .max_by(|&x, &y| {
                    let nx: f64 = (0..q).map(|s| row[x * q + s].norm_sqr()).sum();
                    let ny: f64 = (0..q).map(|s| row[y * q + s].norm_sqr()).sum();
                    nx.total_cmp(&ny)
                })
                .expect("at least one block");
            let psi: Vec<Complex64> = (0..q)
                .map(|s| row[blk * q + s] / weight.sqrt())
                .collect();
            for (u, m) in kraus.iter().enumerate() {
                let post: Vec<Complex64> = psi.iter().zip(m).map(|(z, k)| z * *k).collect();
                let (x, y) = (post[u], post[(u + 1) % q]);
                let bit0 = (x + y) * h;
                let bit1 = (x - y) * h;
                let label = bs.labels[blk];
                out.add(vec![label.into(), u.into(), 0u64.into()], weight * bit0.norm_sqr());
                out.add(vec![label.into(), u.into(), 1u64.into()], weight * bit1.norm_sqr());
            }
        }
    }
    out.normalize();
    out.clean(1e-300);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn povm_is_complete() {
        for q in [2usize, 3, 6, 11] {
            let ks = povm_kraus(q);
            for s in 0..q {
                let total: f64 = ks.iter().map(|m| m[s] * m[s]).sum();
                assert!((total - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_shift_gives_deterministic_bit() {
        let g = Group::affine(23).unwrap();
        let a = g.element_of_order(11).unwrap();
        let d = info_measurement_formula(&g, a, 0).unwrap();
        assert!((d.marginal(&[2]).get(&[0u64.into()]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn formula_matches_state_vector_and_general() {
        for (p, r) in [(7u64, 3u64), (7, 2), (7, 6), (13, 4), (23, 11), (29, 7), (29, 2)] {
            let g = Group::affine(p).unwrap();
            let a = g.element_of_order(r).unwrap();
            for b in [0, 1, 3, p - 1] {
                let h = SubgroupDesc::Conjugate { a, b };
                let f = info_measurement_formula(&g, a, b).unwrap();
                let gen = info_measurement_distribution(&g, a, &h).unwrap();
                let sv = info_state_vector_distribution(&g, a, &h).unwrap();
                assert!(f.max_abs_diff(&gen).unwrap() < 1e-12, "p={p} r={r} b={b}");
                assert!(f.max_abs_diff(&sv).unwrap() < 1e-9, "p={p} r={r} b={b}");
            }
        }
    }

    #[test]
    fn smaller_hidden_subgroups_agree_with_state_vector() {
        let g = Group::affine(29).unwrap();
        let a = g.element_of_order(28).unwrap();
        for h in [
            SubgroupDesc::Trivial,
            SubgroupDesc::Conjugate { a: g.element_of_order(4).unwrap(), b: 5 },
            SubgroupDesc::Conjugate { a: g.element_of_order(14).unwrap(), b: 11 },
        ] {
            let gen = info_measurement_distribution(&g, a, &h).unwrap();
            let sv = info_state_vector_distribution(&g, a, &h).unwrap();
            assert!(gen.max_abs_diff(&sv).unwrap() < 1e-9, "{h}");
            assert!((gen.total() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn worked_example_p7() {
        let g = Group::affine(7).unwrap();
        let d = info_measurement_formula(&g, 2, 1).unwrap();
        // k = 1, u = 0: m = 1, P(0) = cos²(π/7) / 6
        let want = (PI / 7.0).cos().powi(2) / 6.0;
        assert!((d.get(&[1u64.into(), 0u64.into(), 0u64.into()]) - want).abs() < 1e-12);
        let marg = d.marginal(&[0]);
        assert!((marg.get(&[1u64.into()]) - 0.5).abs() < 1e-12);
        assert!((marg.get(&[3u64.into()]) - 0.5).abs() < 1e-12);
        let u = d.marginal(&[1]);
        for x in 0..3u64 {
            assert!((u.get(&[x.into()]) - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coefficient_is_uniform_over_units() {
        let g = Group::affine(103).unwrap();
        for r in [2u64, 3, 17, 51, 102] {
            let a = g.element_of_order(r).unwrap();
            let bs = block_structure(&g, a).unwrap();
            let mut seen = BTreeSet::new();
            for &k in &bs.labels {
                for u in 0..r {
                    seen.insert(effective_coefficient(&g, a, k, u));
                }
            }
            assert_eq!(seen.len(), 102);
            assert!(!seen.contains(&0));
        }
    }
}
