//! Irreducible representations in the adapted basis and the projections
//! `π_H(ρ) = (1/|H|) Σ_{h∈H} ρ(h)`.
//!
//! Every irrep of these groups is monomial: one unit-modulus entry per row
//! and column. Evaluations are therefore kept as [`Monomial`] and only
//! expanded to dense matrices on request.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, mul_mod};
use crate::dist::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, GroupKind, SubgroupDesc};

/// Largest dimension for which dense matrices are built.
pub const DENSE_CAP: usize = 4096;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrrepName {
    /// One-dimensional `σ_t(a^u, b) = ω_q^{t u}`.
    Sigma(u64),
    /// The `(p-1)`-dimensional irrep of `A_p`, indexed by `Z_p^*`.
    Rho,
    /// The q-dimensional irrep `ρ_k` of `Z_q ⋉ Z_p`.
    RhoK(u64),
}

impl fmt::Display for IrrepName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepName::Sigma(t) => write!(f, "sigma_{t}"),
            IrrepName::Rho => write!(f, "rho"),
            IrrepName::RhoK(k) => write!(f, "rho_{k}"),
        }
    }
}

/// A monomial matrix: row `i` has the single entry `phases[i]` in column `cols[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub cols: Vec<usize>,
    pub phases: Vec<Complex64>,
}

impl Monomial {
    pub fn identity(d: usize) -> Self {
        Monomial {
            cols: (0..d).collect(),
            phases: vec![Complex64::new(1.0, 0.0); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let cols = self.cols.iter().map(|&c| other.cols[c]).collect();
        let phases = self
            .phases
            .iter()
            .zip(&self.cols)
            .map(|(ph, &c)| ph * other.phases[c])
            .collect();
        Monomial { cols, phases }
    }

    pub fn trace(&self) -> Complex64 {
        self.cols
            .iter()
            .enumerate()
            .filter(|(i, c)| i == *c)
            .map(|(i, _)| self.phases[i])
            .sum()
    }

    pub fn to_dense(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (i, (&c, ph)) in self.cols.iter().zip(&self.phases).enumerate() {
            m[(i, c)] = *ph;
        }
        m
    }

    /// Add `scale * self` into `acc`.
    pub fn add_into(&self, acc: &mut CMatrix, scale: Complex64) {
        for (i, (&c, ph)) in self.cols.iter().zip(&self.phases).enumerate() {
            acc[(i, c)] += scale * ph;
        }
    }

    /// `self * m` for a dense `m`: row `i` of the result is `phases[i]` times row `cols[i]` of `m`.
    pub fn left_apply(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim(), m.ncols());
        for (i, (&c, ph)) in self.cols.iter().zip(&self.phases).enumerate() {
            for j in 0..m.ncols() {
                out[(i, j)] = ph * m[(c, j)];
            }
        }
        out
    }
}

/// All irreps of the group, in a fixed order: the characters first, then
/// the high-dimensional ones.
pub fn irreps(group: &Group) -> Vec<IrrepName> {
    let mut out: Vec<IrrepName> = (0..group.q()).map(IrrepName::Sigma).collect();
    match group.kind() {
        GroupKind::Affine => out.push(IrrepName::Rho),
        GroupKind::QHedral => {
            let mut reps = group.min_coset_reps(group.q()).to_vec();
            reps.sort_unstable();
            out.extend(reps.into_iter().map(IrrepName::RhoK));
        }
    }
    out
}

pub fn dimension(group: &Group, name: &IrrepName) -> usize {
    match name {
        IrrepName::Sigma(_) => 1,
        IrrepName::Rho => (group.p() - 1) as usize,
        IrrepName::RhoK(_) => group.q() as usize,
    }
}

fn check_name(group: &Group, name: &IrrepName) -> Result<()> {
    match *name {
        IrrepName::Sigma(t) if t >= group.q() => Err(Error::InvalidParameter(format!(
            "sigma index {t} out of range for q = {}",
            group.q()
        ))),
        IrrepName::Rho if group.kind() != GroupKind::Affine => Err(Error::NotAffine),
        IrrepName::RhoK(k) if k % group.p() == 0 => Err(Error::InvalidParameter(
            "rho_k requires k nonzero mod p".into(),
        )),
        _ => Ok(()),
    }
}

/// Monomial form of `name(g)`.
pub fn evaluate(group: &Group, name: &IrrepName, g: &GroupElement) -> Result<Monomial> {
    check_name(group, name)?;
    group.check(g)?;
    let p = group.p();
    Ok(match *name {
        IrrepName::Sigma(t) => {
            let u = group.exponent_of(g.a)?;
            Monomial {
                cols: vec![0],
                phases: vec![group.omega_q().pow(mul_mod(t, u, group.q()))],
            }
        }
        IrrepName::Rho => {
            // entry ω_p^{bj} at (j, aj), j = 1..p-1 stored at index j-1
            let w = group.omega_p();
            let d = (p - 1) as usize;
            let mut cols = Vec::with_capacity(d);
            let mut phases = Vec::with_capacity(d);
            for j in 1..p {
                cols.push((mul_mod(g.a, j, p) - 1) as usize);
                phases.push(w.pow(mul_mod(g.b, j, p)));
            }
            Monomial { cols, phases }
        }
        IrrepName::RhoK(k) => {
            // entry ω_p^{k a^s b} at (s, s+u)
            let q = group.q();
            let u = group.exponent_of(g.a)?;
            let w = group.omega_p();
            let kb = mul_mod(k % p, g.b, p);
            let mut cols = Vec::with_capacity(q as usize);
            let mut phases = Vec::with_capacity(q as usize);
            for s in 0..q {
                cols.push(((s + u) % q) as usize);
                phases.push(w.pow(mul_mod(kb, group.a_pow(s), p)));
            }
            Monomial { cols, phases }
        }
    })
}

/// Dense `ρ(g)` for the affine group.
pub fn rho_affine(group: &Group, g: &GroupElement) -> Result<CMatrix> {
    if group.kind() != GroupKind::Affine {
        return Err(Error::NotAffine);
    }
    dense(group, &IrrepName::Rho, g)
}

/// Dense `ρ_k(g)`.
pub fn rho_qhedral(group: &Group, g: &GroupElement, k: u64) -> Result<CMatrix> {
    dense(group, &IrrepName::RhoK(k), g)
}

pub fn dense(group: &Group, name: &IrrepName, g: &GroupElement) -> Result<CMatrix> {
    let d = dimension(group, name);
    if d > DENSE_CAP {
        return Err(Error::CapExceeded {
            size: d as u64,
            cap: DENSE_CAP as u64,
        });
    }
    Ok(evaluate(group, name, g)?.to_dense())
}

pub fn character(group: &Group, name: &IrrepName, g: &GroupElement) -> Result<Complex64> {
    Ok(evaluate(group, name, g)?.trace())
}

/// Whether the one-dimensional `σ_t` is trivial on every element of `H`.
fn sigma_trivial_on(group: &Group, t: u64, h: &SubgroupDesc) -> bool {
    let q = group.q();
    let r = group.subgroup_mult_order(h);
    // multiplicative parts of H are a^{u} with u a multiple of q/r
    mul_mod(t, q / r, q) == 0
}

/// `rk π_H(name)` from the closed forms.
pub fn projector_rank(group: &Group, h: &SubgroupDesc, name: &IrrepName) -> Result<usize> {
    check_name(group, name)?;
    group.validate_subgroup(h)?;
    let d = dimension(group, name);
    Ok(match (name, h) {
        (IrrepName::Sigma(t), _) => usize::from(sigma_trivial_on(group, *t, h)),
        (_, SubgroupDesc::Trivial) => d,
        (_, SubgroupDesc::Full | SubgroupDesc::Normal { .. }) => 0,
        (_, SubgroupDesc::Conjugate { .. }) => d / group.subgroup_order(h) as usize,
    })
}

/// `π_H(ρ)` as a dense matrix with its rank.
#[derive(Debug, Clone)]
pub struct Projector {
    pub name: IrrepName,
    pub matrix: CMatrix,
    pub rank: usize,
}

impl Projector {
    pub fn new(group: &Group, h: &SubgroupDesc, name: &IrrepName) -> Result<Self> {
        let d = dimension(group, name);
        if d > DENSE_CAP {
            return Err(Error::CapExceeded {
                size: d as u64,
                cap: DENSE_CAP as u64,
            });
        }
        let elems = group.enumerate_subgroup(h)?;
        let mut m = CMatrix::zeros(d, d);
        let scale = Complex64::new(1.0 / elems.len() as f64, 0.0);
        for x in &elems {
            evaluate(group, name, x)?.add_into(&mut m, scale);
        }
        let rank = m.trace().re.round() as usize;
        Ok(Projector {
            name: *name,
            matrix: m,
            rank,
        })
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `‖Π² - Π‖_max` and `‖Π† - Π‖_max`.
    pub fn defects(&self) -> (f64, f64) {
        let sq = &self.matrix * &self.matrix - &self.matrix;
        let herm = self.matrix.adjoint() - &self.matrix;
        (max_abs(&sq), max_abs(&herm))
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Row-sparse `π_H(ρ)`, accumulated from monomials without a dense matrix.
pub fn sparse_projector(
    group: &Group,
    h: &SubgroupDesc,
    name: &IrrepName,
) -> Result<Vec<Vec<(usize, Complex64)>>> {
    let d = dimension(group, name);
    let elems = group.enumerate_subgroup(h)?;
    let scale = 1.0 / elems.len() as f64;
    let mut rows: Vec<std::collections::BTreeMap<usize, Complex64>> = vec![Default::default(); d];
    for x in &elems {
        let m = evaluate(group, name, x)?;
        for (i, (&c, ph)) in m.cols.iter().zip(&m.phases).enumerate() {
            *rows[i].entry(c).or_default() += ph * scale;
        }
    }
    Ok(rows
        .into_iter()
        .map(|r| r.into_iter().filter(|(_, z)| z.norm() > 1e-12).collect())
        .collect())
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Weak-sampling distribution `P(ρ) = d_ρ |H| rk π_H(ρ) / |G|`.
pub fn observe_rep_distribution(group: &Group, h: &SubgroupDesc) -> Result<OutcomeDistribution> {
    let g_order = group.order() as f64;
    let h_order = group.subgroup_order(h) as f64;
    let mut out = OutcomeDistribution::new(["irrep"])
        .with_meta("spec", group.spec())
        .with_meta("subgroup", h);
    for name in irreps(group) {
        let rank = projector_rank(group, h, &name)?;
        if rank > 0 {
            let d = dimension(group, &name) as f64;
            out.add(vec![name.to_string().into()], d * h_order * rank as f64 / g_order);
        }
    }
    Ok(out)
}

/// Kernel of an irrep, as a subgroup.
pub fn kernel(group: &Group, name: &IrrepName) -> SubgroupDesc {
    match *name {
        IrrepName::Sigma(t) => group.canonical(&SubgroupDesc::Normal {
            q: gcd(t, group.q()),
        }),
        _ => SubgroupDesc::Trivial,
    }
}

/// Relabelling of `ρ`'s index set `Z_p^*` into blocks `(k, s)` with `j = k a^s`.
#[derive(Debug, Clone)]
pub struct BlockStructure {
    pub a: u64,
    pub q: u64,
    /// Block labels (minimal coset representatives), sorted.
    pub labels: Vec<u64>,
    /// `(block index, s)` for index `j - 1`.
    pub coords: Vec<(usize, usize)>,
}

impl BlockStructure {
    /// Position in the block-ordered basis of `ρ`'s index `j - 1`.
    pub fn permuted_index(&self, idx: usize) -> usize {
        let (blk, s) = self.coords[idx];
        blk * self.q as usize + s
    }
}

pub fn block_structure(group: &Group, a: u64) -> Result<BlockStructure> {
    if group.kind() != GroupKind::Affine {
        return Err(Error::NotAffine);
    }
    let p = group.p();
    if a % p == 0 {
        return Err(Error::InvalidParameter("block generator must be nonzero".into()));
    }
    let q = crate::arith::multiplicative_order(a, p);
    let mut labels = group.min_coset_reps(q).to_vec();
    labels.sort_unstable();
    let mut coords = vec![(usize::MAX, 0usize); (p - 1) as usize];
    for (blk, &k) in labels.iter().enumerate() {
        let mut j = k;
        for s in 0..q as usize {
            coords[(j - 1) as usize] = (blk, s);
            j = mul_mod(j, a, p);
        }
    }
    Ok(BlockStructure {
        a,
        q,
        labels,
        coords,
    })
}

/// Matrix as CSV rows `(row, col, re, im)`.
pub fn write_matrix_csv<W: Write>(m: &CMatrix, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["row", "col", "re", "im"])?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.write_record(&[
                i.to_string(),
                j.to_string(),
                format!("{:.17e}", z.re),
                format!("{:.17e}", z.im),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &CMatrix, b: &CMatrix) -> f64 {
        max_abs(&(a - b))
    }

    fn omega(n: u64, k: u64) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)
    }

    #[test]
    fn rho_affine_examples() {
        let g = Group::affine(7).unwrap();
        let id = rho_affine(&g, &GroupElement::IDENTITY).unwrap();
        assert!(close(&id, &CMatrix::identity(6, 6)) < 1e-15);
        let t = rho_affine(&g, &GroupElement::new(1, 1)).unwrap();
        let diag = CMatrix::from_fn(6, 6, |i, j| if i == j { omega(7, i as u64 + 1) } else { 0.0.into() });
        assert!(close(&t, &diag) < 1e-12);
        let perm = rho_affine(&g, &GroupElement::new(3, 0)).unwrap();
        for j in 1..7u64 {
            let col = (3 * j % 7 - 1) as usize;
            assert_eq!(perm[((j - 1) as usize, col)], Complex64::new(1.0, 0.0));
        }
        assert!((perm.iter().map(|z| z.norm()).sum::<f64>() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rho_qhedral_examples() {
        let g = Group::qhedral(7, 3).unwrap();
        assert_eq!(g.spec().a, 2);
        let id = rho_qhedral(&g, &GroupElement::IDENTITY, 1).unwrap();
        assert!(close(&id, &CMatrix::identity(3, 3)) < 1e-15);
        let t = rho_qhedral(&g, &GroupElement::new(1, 1), 1).unwrap();
        let want = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            omega(7, 1),
            omega(7, 2),
            omega(7, 4),
        ]));
        assert!(close(&t, &want) < 1e-12);
        assert!(rho_qhedral(&g, &GroupElement::IDENTITY, 7).is_err());
        // ρ_{2k} = S ρ_k S^{-1} with S the cyclic shift
        let shift = CMatrix::from_fn(3, 3, |i, j| if j == (i + 1) % 3 { 1.0.into() } else { 0.0.into() });
        for x in g.elements() {
            let a = rho_qhedral(&g, &x, 3).unwrap();
            let b = rho_qhedral(&g, &x, 6).unwrap();
            assert!(close(&b, &(&shift * &a * shift.transpose())) < 1e-12);
        }
    }

    #[test]
    fn homomorphism_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (p, q) in [(7u64, 6u64), (13, 4), (23, 11), (29, 28)] {
            let g = Group::qhedral(p, q).unwrap();
            for name in irreps(&g) {
                for _ in 0..100 {
                    let (x, y) = (g.random_element(&mut rng), g.random_element(&mut rng));
                    let mx = evaluate(&g, &name, &x).unwrap();
                    let my = evaluate(&g, &name, &y).unwrap();
                    let mxy = evaluate(&g, &name, &g.mul(&x, &y)).unwrap();
                    let prod = mx.mul(&my);
                    assert_eq!(prod.cols, mxy.cols);
                    for (u, v) in prod.phases.iter().zip(&mxy.phases) {
                        assert!((u - v).norm() < 1e-9);
                        assert!((u.norm() - 1.0).abs() < 1e-12);
                    }
                }
                let mut seen = vec![false; dimension(&g, &name)];
                for c in evaluate(&g, &name, &g.random_element(&mut rng)).unwrap().cols {
                    seen[c] = true;
                }
                assert!(seen.iter().all(|s| *s), "one nonzero per column");
            }
        }
    }

    #[test]
    fn plancherel_and_characters() {
        for (p, q) in [(7u64, 6u64), (7, 3), (23, 11), (29, 4)] {
            let g = Group::qhedral(p, q).unwrap();
            let s: usize = irreps(&g).iter().map(|n| dimension(&g, n).pow(2)).sum();
            assert_eq!(s as u64, g.order());
            // column orthogonality of characters at the identity
            let mut norm = 0.0;
            for name in irreps(&g) {
                let chi = character(&g, &name, &GroupElement::new(1, 1)).unwrap();
                norm += chi.norm_sqr();
            }
            // |C_G((1,1))| = p
            assert!((norm - p as f64).abs() < 1e-9, "{p},{q}: {norm}");
        }
        let g = Group::affine(11).unwrap();
        let chi = |x: GroupElement| character(&g, &IrrepName::Rho, &x).unwrap();
        assert!((chi(GroupElement::IDENTITY).re - 10.0).abs() < 1e-12);
        assert!((chi(GroupElement::new(1, 4)) + 1.0).norm() < 1e-12);
        assert!(chi(GroupElement::new(3, 4)).norm() < 1e-12);
    }

    fn all_subgroups(g: &Group) -> Vec<SubgroupDesc> {
        let mut out = vec![SubgroupDesc::Trivial, SubgroupDesc::Full];
        for r in crate::arith::divisors(g.q()) {
            out.push(SubgroupDesc::Normal { q: r });
            if r > 1 {
                let a = g.element_of_order(r).unwrap();
                for b in [0, 1, g.p() - 1] {
                    out.push(SubgroupDesc::Conjugate { a, b });
                }
            }
        }
        out
    }

    #[test]
    fn projectors_match_closed_forms() {
        for (p, q) in [(7u64, 6u64), (7, 3), (13, 12), (13, 4), (23, 11)] {
            let g = Group::qhedral(p, q).unwrap();
            for h in all_subgroups(&g) {
                for name in irreps(&g) {
                    let pr = Projector::new(&g, &h, &name).unwrap();
                    let (idem, herm) = pr.defects();
                    assert!(idem < 1e-9 && herm < 1e-9);
                    assert!((pr.trace().re - pr.rank as f64).abs() < 1e-9);
                    assert!((pr.frobenius_sq() - pr.rank as f64).abs() < 1e-9);
                    assert_eq!(pr.rank, projector_rank(&g, &h, &name).unwrap(), "{h} {name}");
                }
            }
        }
    }

    #[test]
    fn projector_examples() {
        let g = Group::affine(7).unwrap();
        let gamma = g.spec().gamma;
        for b in 0..7u64 {
            let pr = Projector::new(&g, &SubgroupDesc::Conjugate { a: gamma, b }, &IrrepName::Rho).unwrap();
            assert_eq!(pr.rank, 1);
            for j in 1..7u64 {
                for k in 1..7u64 {
                    let want = omega(7, (b * (j + 7 - k)) % 7) / 6.0;
                    assert!((pr.matrix[((j - 1) as usize, (k - 1) as usize)] - want).norm() < 1e-12);
                }
            }
        }
        let pr = Projector::new(&g, &SubgroupDesc::Conjugate { a: 2, b: 0 }, &IrrepName::Rho).unwrap();
        assert_eq!(pr.rank, 2);
        let pr = Projector::new(&g, &SubgroupDesc::Trivial, &IrrepName::Rho).unwrap();
        assert_eq!(pr.rank, 6);
        let sp = sparse_projector(&g, &SubgroupDesc::Conjugate { a: 2, b: 3 }, &IrrepName::Rho).unwrap();
        assert!(sp.iter().all(|row| row.len() == 3));
    }

    #[test]
    fn observation_distribution_examples() {
        let g = Group::affine(7).unwrap();
        let d = observe_rep_distribution(&g, &SubgroupDesc::Trivial).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-12);
        assert!((d.get(&["rho".into()]) - 36.0 / 42.0).abs() < 1e-12);
        assert!((d.get(&["sigma_3".into()]) - 1.0 / 42.0).abs() < 1e-12);
        let d = observe_rep_distribution(&g, &SubgroupDesc::Conjugate { a: 2, b: 1 }).unwrap();
        assert!((d.get(&["rho".into()]) - 6.0 / 7.0).abs() < 1e-12);
        let sig: f64 = (0..6).map(|t| d.get(&[format!("sigma_{t}").into()])).sum();
        assert!((sig - 1.0 / 7.0).abs() < 1e-12);
        let d = observe_rep_distribution(&g, &SubgroupDesc::Full).unwrap();
        assert_eq!(d.get(&["sigma_0".into()]), 1.0);
    }

    #[test]
    fn observation_matches_brute_force_transform() {
        for (p, q) in [(7u64, 6u64), (7, 3), (13, 4)] {
            let g = Group::qhedral(p, q).unwrap();
            for h in all_subgroups(&g) {
                let d = observe_rep_distribution(&g, &h).unwrap();
                assert!((d.total() - 1.0).abs() < 1e-12);
                let elems = g.enumerate_subgroup(&h).unwrap();
                for c in g.coset_representatives(&h).unwrap() {
                    for name in irreps(&g) {
                        let dim = dimension(&g, &name);
                        let mut acc = CMatrix::zeros(dim, dim);
                        for x in &elems {
                            evaluate(&g, &name, &g.mul(&c, x)).unwrap().add_into(&mut acc, 1.0.into());
                        }
                        let norm: f64 = acc.iter().map(|z| z.norm_sqr()).sum::<f64>() * dim as f64
                            / (g.order() as f64 * elems.len() as f64);
                        assert!((norm - d.get(&[name.to_string().into()])).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn block_structure_examples() {
        let g = Group::affine(7).unwrap();
        let bs = block_structure(&g, 2).unwrap();
        assert_eq!(bs.labels, vec![1, 3]);
        assert_eq!(bs.coords[0], (0, 0));
        assert_eq!(bs.coords[1], (0, 1));
        assert_eq!(bs.coords[3], (0, 2));
        assert_eq!(bs.coords[2], (1, 0));
        assert_eq!(bs.coords[5], (1, 1));
        assert_eq!(bs.coords[4], (1, 2));
        let full = block_structure(&g, g.spec().gamma).unwrap();
        assert_eq!(full.labels, vec![1]);
    }

    #[test]
    fn restriction_to_normal_subgroup_is_block_diagonal() {
        for (p, q) in [(7u64, 3u64), (13, 4), (23, 11), (31, 5)] {
            let aff = Group::affine(p).unwrap();
            let qh = Group::qhedral(p, q).unwrap();
            let a = qh.spec().a;
            let bs = block_structure(&aff, a).unwrap();
            let d = (p - 1) as usize;
            for x in qh.elements() {
                let m = evaluate(&aff, &IrrepName::Rho, &x).unwrap();
                let mut perm = CMatrix::zeros(d, d);
                for i in 0..d {
                    perm[(bs.permuted_index(i), bs.permuted_index(m.cols[i]))] = m.phases[i];
                }
                let mut want = CMatrix::zeros(d, d);
                for (blk, &k) in bs.labels.iter().enumerate() {
                    let r = rho_qhedral(&qh, &x, k).unwrap();
                    let o = blk * q as usize;
                    want.view_mut((o, o), (q as usize, q as usize)).copy_from(&r);
                }
                assert!(close(&perm, &want) < 1e-12);
            }
        }
    }

    #[test]
    fn kernels() {
        let g = Group::qhedral(13, 12).unwrap();
        assert_eq!(kernel(&g, &IrrepName::Sigma(0)), SubgroupDesc::Full);
        assert_eq!(kernel(&g, &IrrepName::Sigma(8)), SubgroupDesc::Normal { q: 4 });
        assert_eq!(kernel(&g, &IrrepName::Rho), SubgroupDesc::Trivial);
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        write_matrix_csv(&CMatrix::identity(2, 2), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("row,col,re,im\n0,0,1."));
    }
}
