//! Character measurements on abelian groups `Z_{n_1} × … × Z_{n_k}`, and the
//! forgetful view of `Z_q ⋉ Z_p` as the abelian group `Z_q × Z_p`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dist::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::group::{Group, SubgroupDesc};

/// `Σ_x f(x) ω^{⟨χ, x⟩}` for every character `χ`, in place, row-major.
pub fn dft_nd(dims: &[usize], data: &mut [Complex64]) {
    let total: usize = dims.iter().product();
    assert_eq!(data.len(), total);
    let mut planner = FftPlanner::new();
    let mut stride = total;
    for &n in dims {
        stride /= n;
        if n == 1 {
            continue;
        }
        let fft = planner.plan_fft_inverse(n);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let block = n * stride;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[outer + i * stride + inner];
                }
                fft.process(&mut line);
                for (i, v) in line.iter().enumerate() {
                    data[outer + i * stride + inner] = *v;
                }
            }
        }
    }
}

fn flat_index(dims: &[usize], x: &[usize]) -> usize {
    dims.iter().zip(x).fold(0, |acc, (&n, &xi)| acc * n + xi % n)
}

fn unflatten(dims: &[usize], mut idx: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &n) in out.iter_mut().zip(dims).rev() {
        *slot = idx % n;
        idx /= n;
    }
    out
}

fn field_names(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("k{i}")).collect()
}

fn accumulate_coset(
    dims: &[usize],
    coset: &[Vec<usize>],
    weight: f64,
    out: &mut OutcomeDistribution,
) {
    let total: usize = dims.iter().product();
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    for x in coset {
        data[flat_index(dims, x)] += 1.0;
    }
    dft_nd(dims, &mut data);
    let norm = weight / (total as f64 * coset.len() as f64);
    for (idx, z) in data.iter().enumerate() {
        let pr = z.norm_sqr() * norm;
        if pr > 1e-24 {
            out.add(unflatten(dims, idx).into_iter().map(Into::into).collect(), pr);
        }
    }
}

/// Character distribution of the uniform state on `coset` in
/// `Z_{dims[0]} × …`: `P(χ) = |Σ_{x} χ(x)|² / (|A| |coset|)`.
pub fn abelian_sample_distribution(
    dims: &[usize],
    coset: &[Vec<usize>],
) -> Result<OutcomeDistribution> {
    if dims.is_empty() || dims.iter().any(|&n| n == 0) || coset.is_empty() {
        return Err(Error::InvalidParameter("empty abelian group or coset".into()));
    }
    if coset.iter().any(|x| x.len() != dims.len()) {
        return Err(Error::InvalidParameter("coordinate count mismatch".into()));
    }
    let mut out = OutcomeDistribution::new(field_names(dims.len())).with_meta("dims", dims);
    accumulate_coset(dims, coset, 1.0, &mut out);
    Ok(out)
}

/// Coset-averaged character distribution after forgetting the group law:
/// `(a^u, y) ↦ (u, y) ∈ Z_q × Z_p`. Fields `(k, ell)` with `k ∈ Z_q` and
/// `ell ∈ Z_p`.
pub fn forgetful_distribution(group: &Group, h: &SubgroupDesc) -> Result<OutcomeDistribution> {
    let dims = [group.q() as usize, group.p() as usize];
    let elems = group.enumerate_subgroup(h)?;
    let reps = group.coset_representatives(h)?;
    let mut out = OutcomeDistribution::new(field_names(2))
        .with_meta("spec", group.spec())
        .with_meta("subgroup", h)
        .with_meta("averaged", true);
    let w = 1.0 / reps.len() as f64;
    for c in &reps {
        let coset: Vec<Vec<usize>> = elems
            .iter()
            .map(|x| {
                let g = group.mul(c, x);
                let u = group.exponent_of(g.a).expect("element of the group");
                vec![u as usize, g.b as usize]
            })
            .collect();
        accumulate_coset(&dims, &coset, w, &mut out);
    }
    let mut renamed = OutcomeDistribution::new(["k", "ell"]);
    for (o, p) in out.iter() {
        renamed.add(o.clone(), p);
    }
    for (k, v) in out.metadata() {
        renamed.set_meta(k, v);
    }
    Ok(renamed)
}
