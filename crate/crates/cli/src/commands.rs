use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use hsplab::acceptance::{run_all, run_criterion};
use hsplab::arith::{is_prime, multiplicative_order, primitive_root};
use hsplab::expsums::{gauss_sum_table, incomplete_sum_scan, info_separation, l1_to_uniform};
use hsplab::extension::{
    cross_check_z3_by_z7, make_finite_subgroup_oracle, solve_extension_hsp, AbelianHspSolver,
    ExtensionGroup,
};
use hsplab::reconstruct::{
    info_reconstruct_subgroup, solve_hcp_affine, solve_hsp_qhedral, HcpOptions,
    ReconstructionResult,
};
use hsplab::repr::observe_rep_distribution;
use hsplab::rng::trial_rng;
use hsplab::sampling::{
    coset_averaged_distribution, forgetful_distribution, info_measurement_distribution,
    random_basis_distribution, row_fourier_distribution, MeasurementBasis,
};
use hsplab::shift::{make_coset_function, solve_hidden_shift, ShiftInstance};
use hsplab::{make_subgroup_oracle, Error, Group, GroupSpec, IrrepName, SubgroupDesc};
use serde_json::Value;

use crate::artifact::{Artifact, RunConfig};
use crate::{Basis, BuiltinExtension, DistKind, Failure, GroupArgs, HiddenArgs, InfoMode};

type Out = Result<(RunConfig, Artifact), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn check_prime(p: u64) -> Result<(), Failure> {
    if p < 3 || !is_prime(p) {
        return Err(usage(format!("p = {p} must be an odd prime")));
    }
    Ok(())
}

fn check_q(p: u64, q: u64) -> Result<(), Failure> {
    if q == 0 || (p - 1) % q != 0 {
        return Err(Error::OrderDoesNotDivide { p, q }.into());
    }
    Ok(())
}

/// `a` of order `q` in `Z_p^*`, from the flag or the default generator.
fn element_a(p: u64, q: u64, a: Option<u64>) -> Result<u64, Failure> {
    check_prime(p)?;
    check_q(p, q)?;
    let gamma = primitive_root(p)?;
    match a {
        None => Ok(hsplab::arith::pow_mod(gamma, (p - 1) / q, p)),
        Some(a) => {
            let a = a % p;
            if a == 0 {
                return Err(usage(format!("a must be nonzero mod {p}")));
            }
            let actual = multiplicative_order(a, p);
            if actual != q {
                return Err(Error::WrongOrder {
                    p,
                    a,
                    expected: q,
                    actual,
                }
                .into());
            }
            Ok(a)
        }
    }
}

fn qhedral(cfg: &mut RunConfig, g: &GroupArgs) -> Result<Arc<Group>, Failure> {
    let a = element_a(g.p, g.q, g.a)?;
    let spec = GroupSpec::new(g.p, g.q, primitive_root(g.p)?, a)?;
    fill(cfg, g, a);
    Ok(Arc::new(Group::new(spec)?))
}

/// `A_p` together with the element `a` of order `q`.
fn affine(cfg: &mut RunConfig, g: &GroupArgs) -> Result<(Arc<Group>, u64), Failure> {
    let a = element_a(g.p, g.q, g.a)?;
    fill(cfg, g, a);
    Ok((Arc::new(Group::affine(g.p)?), a))
}

fn fill(cfg: &mut RunConfig, g: &GroupArgs, a: u64) {
    cfg.p = Some(g.p);
    cfg.q = Some(g.q);
    cfg.a = Some(a);
}

fn check_shift(p: u64, b: u64) -> Result<(), Failure> {
    if b >= p {
        return Err(usage(format!("b = {b} must lie in [0, {p})")));
    }
    Ok(())
}

fn hidden(cfg: &mut RunConfig, group: &Group, a: u64, h: &HiddenArgs) -> Result<SubgroupDesc, Failure> {
    let desc = match h.subgroup.as_deref() {
        None => {
            check_shift(group.p(), h.b)?;
            cfg.b = Some(h.b);
            SubgroupDesc::Conjugate { a, b: h.b }
        }
        Some("trivial") => SubgroupDesc::Trivial,
        Some("full") => SubgroupDesc::Full,
        Some(s) => match s.strip_prefix("normal:").map(str::parse::<u64>) {
            Some(Ok(q)) => SubgroupDesc::Normal { q },
            _ => {
                return Err(usage(format!(
                    "--subgroup must be trivial, full or normal:Q, got {s:?}"
                )))
            }
        },
    };
    group.validate_subgroup(&desc)?;
    cfg.set("subgroup", desc);
    Ok(desc)
}

fn put_reconstruction(art: &mut Artifact, group: &Group, truth: &SubgroupDesc, res: &ReconstructionResult) {
    let correct = res.subgroup.map(|x| group.same_subgroup(&x, truth)).unwrap_or(false);
    art.put("hidden", truth.to_string());
    art.put("subgroup", res.subgroup);
    art.put("recovered_name", res.subgroup.map(|x| x.to_string()));
    art.put("verified", res.verified);
    art.put("correct", correct);
    art.put("trials", res.trials);
    art.put("queries", res.queries);
    art.put("candidates", res.candidates.iter().take(10).collect::<Vec<_>>());
    for (i, o) in res.transcript.iter().enumerate() {
        let text: Vec<String> = o.iter().map(|l| l.to_string()).collect();
        art.push(vec![Value::from(i), Value::from(text.join(" "))]);
    }
    art.ok = res.verified;
}

pub fn dist(
    mut cfg: RunConfig,
    g: &GroupArgs,
    h: &HiddenArgs,
    kind: DistKind,
    basis: Basis,
    seed: Option<u64>,
) -> Out {
    let group = qhedral(&mut cfg, g)?;
    let a = group.spec().a;
    let desc = hidden(&mut cfg, &group, a, h)?;
    let basis = match (basis, seed) {
        (Basis::Adapted, _) => MeasurementBasis::Adapted,
        (Basis::Random, Some(seed)) => MeasurementBasis::Random { seed },
        (Basis::Random, None) => return Err(usage("--basis random needs --seed")),
    };
    cfg.seed = seed;
    cfg.set("kind", format!("{kind:?}").to_lowercase());
    cfg.set("basis", basis.id());
    let d = match kind {
        DistKind::Weak => observe_rep_distribution(&group, &desc)?,
        DistKind::Strong => coset_averaged_distribution(&group, &desc, &basis)?,
        DistKind::Row => row_fourier_distribution(&group, &desc)?,
        DistKind::Abelian => forgetful_distribution(&group, &desc)?,
        DistKind::Info => info_measurement_distribution(&group, a, &desc)?,
    };
    Ok((cfg, Artifact::from_distribution(&d)))
}

pub fn hcp(mut cfg: RunConfig, g: &GroupArgs, b: u64, seed: u64, trials: usize) -> Out {
    let (group, a) = affine(&mut cfg, g)?;
    check_shift(g.p, b)?;
    cfg.b = Some(b);
    cfg.seed = Some(seed);
    cfg.trials = Some(trials);
    let truth = SubgroupDesc::Conjugate { a, b };
    let oracle = make_subgroup_oracle(group.clone(), truth);
    let opts = HcpOptions {
        max_trials: trials,
        ..HcpOptions::default()
    };
    let res = solve_hcp_affine(&group, &oracle, a, seed, &opts)?;
    let mut art = Artifact::new(["trial", "outcome"]);
    let recovered = match res.subgroup {
        Some(SubgroupDesc::Conjugate { b, .. }) => Some(b),
        _ => None,
    };
    art.put("recovered", recovered);
    put_reconstruction(&mut art, &group, &truth, &res);
    Ok((cfg, art))
}

pub fn hsp(mut cfg: RunConfig, g: &GroupArgs, h: &HiddenArgs, seed: u64, trials: usize) -> Out {
    let group = qhedral(&mut cfg, g)?;
    let desc = hidden(&mut cfg, &group, group.spec().a, h)?;
    cfg.seed = Some(seed);
    cfg.trials = Some(trials);
    let oracle = make_subgroup_oracle(group.clone(), desc);
    let res = solve_hsp_qhedral(&group, &oracle, seed, trials)?;
    let mut art = Artifact::new(["trial", "outcome"]);
    put_reconstruction(&mut art, &group, &desc, &res);
    Ok((cfg, art))
}

pub fn info(mut cfg: RunConfig, g: &GroupArgs, h: &HiddenArgs, mode: InfoMode, seed: Option<u64>) -> Out {
    let (group, a) = affine(&mut cfg, g)?;
    cfg.set("mode", format!("{mode:?}").to_lowercase());
    match mode {
        InfoMode::Reconstruct => {
            let seed = seed.ok_or_else(|| usage("--mode reconstruct needs --seed"))?;
            cfg.seed = Some(seed);
            let desc = hidden(&mut cfg, &group, a, h)?;
            let oracle = make_subgroup_oracle(group.clone(), desc);
            let res = info_reconstruct_subgroup(&group, &oracle, seed)?;
            let mut art = Artifact::new(["trial", "outcome"]);
            put_reconstruction(&mut art, &group, &desc, &res);
            Ok((cfg, art))
        }
        InfoMode::Separation => {
            if h.subgroup.is_some() {
                return Err(usage("--mode separation compares conjugates; drop --subgroup"));
            }
            check_shift(g.p, h.b)?;
            cfg.b = Some(h.b);
            cfg.seed = seed;
            let p = g.p;
            let mut art = Artifact::new(["b", "b2", "tv", "lower", "claimed"]);
            let mut min_tv = f64::INFINITY;
            let mut min_tv_generic = f64::INFINITY;
            let mut below = 0;
            for b2 in 0..p {
                let row = info_separation(&group, a, h.b, b2)?;
                if b2 != h.b {
                    min_tv = min_tv.min(row.tv);
                    if (h.b + b2) % p != 0 {
                        min_tv_generic = min_tv_generic.min(row.tv);
                    }
                    if row.tv < row.claimed {
                        below += 1;
                    }
                }
                art.push(vec![
                    Value::from(row.b),
                    Value::from(row.b2),
                    Value::from(row.tv),
                    Value::from(row.lower),
                    Value::from(row.claimed),
                ]);
            }
            art.put("min_tv", min_tv);
            art.put("min_tv_excluding_negation", min_tv_generic);
            art.put("pairs_below_claimed", below);
            Ok((cfg, art))
        }
    }
}

pub fn random_basis(mut cfg: RunConfig, g: &GroupArgs, b: u64, b2: u64, seed: u64, bases: usize) -> Out {
    let (group, a) = affine(&mut cfg, g)?;
    check_shift(g.p, b)?;
    check_shift(g.p, b2)?;
    if bases == 0 {
        return Err(usage("--bases must be positive"));
    }
    cfg.b = Some(b);
    cfg.seed = Some(seed);
    cfg.set("b2", b2);
    cfg.set("bases", bases);
    let h1 = SubgroupDesc::Conjugate { a, b };
    let h2 = SubgroupDesc::Conjugate { a, b: b2 };
    let d = (g.p - 1) as usize;
    let rank = d / g.q as usize;
    let delta = 8.0 * ((d as f64).ln() / rank as f64).sqrt();
    let mut art = Artifact::new(["basis", "basis_seed", "l1_to_uniform", "scaled_max_deviation", "l1_pair"]);
    let mut within = 0;
    for i in 0..bases {
        let s = seed.wrapping_add(i as u64);
        let p1 = random_basis_distribution(&group, &h1, &IrrepName::Rho, s)?;
        let p2 = random_basis_distribution(&group, &h2, &IrrepName::Rho, s)?;
        let l1 = l1_to_uniform(&p1, d);
        let maxdev = p1
            .iter()
            .map(|(_, pr)| (pr - 1.0 / d as f64).abs() * d as f64)
            .fold(0.0, f64::max);
        if l1 <= delta {
            within += 1;
        }
        art.push(vec![
            Value::from(i),
            Value::from(s),
            Value::from(l1),
            Value::from(maxdev),
            Value::from(p1.l1(&p2)?),
        ]);
    }
    art.put("dimension", d);
    art.put("rank", rank);
    art.put("delta", delta);
    art.put("bases_within_delta", within);
    art.put("adapted_tv", info_separation(&group, a, b, b2)?.tv);
    Ok((cfg, art))
}

pub fn abelian_fail(mut cfg: RunConfig, g: &GroupArgs, b: u64) -> Out {
    let group = qhedral(&mut cfg, g)?;
    check_shift(g.p, b)?;
    cfg.b = Some(b);
    let a = group.spec().a;
    let d = forgetful_distribution(&group, &SubgroupDesc::Conjugate { a, b })?;
    let other = forgetful_distribution(
        &group,
        &SubgroupDesc::Conjugate {
            a,
            b: (b + 1) % g.p,
        },
    )?;
    let mut art = Artifact::from_distribution(&d);
    art.put("max_abs_diff_vs_next_shift", d.max_abs_diff(&other)?);
    Ok((cfg, art))
}

pub fn shift(
    mut cfg: RunConfig,
    p: u64,
    r: u64,
    s: u64,
    seed: u64,
    function_seed: Option<u64>,
    trials: usize,
) -> Out {
    check_prime(p)?;
    check_q(p, r)?;
    check_shift(p, s)?;
    let fseed = function_seed.unwrap_or(seed);
    cfg.p = Some(p);
    cfg.r = Some(r);
    cfg.s = Some(s);
    cfg.seed = Some(seed);
    cfg.trials = Some(trials);
    cfg.set("function_seed", fseed);
    let f = make_coset_function(p, r, fseed)?;
    let inst = ShiftInstance::new(f, s);
    let res = solve_hidden_shift(&inst, seed, trials)?;
    let mut art = Artifact::new(Vec::<String>::new());
    art.put("recovered", res.recovered);
    art.put("verified", res.verified);
    art.put("correct", res.recovered == Some(s));
    art.put("attempts", res.attempts);
    art.put("trials", res.trials);
    art.put("queries", res.queries);
    art.ok = res.verified;
    Ok((cfg, art))
}

pub fn extension(
    mut cfg: RunConfig,
    builtin: BuiltinExtension,
    file: Option<PathBuf>,
    generators: &[String],
    seed: u64,
) -> Out {
    let ext = match &file {
        Some(path) => {
            cfg.set("file", path);
            ExtensionGroup::load_json(path)?
        }
        None => {
            cfg.set("group", format!("{builtin:?}").to_lowercase());
            match builtin {
                BuiltinExtension::Q8z15 => ExtensionGroup::quaternion_times_z15()?,
                BuiltinExtension::Z3z7 => ExtensionGroup::z3_by_z7()?,
            }
        }
    };
    cfg.seed = Some(seed);
    let dims = ext
        .h_dims
        .clone()
        .ok_or_else(|| usage("the quotient needs abelian h_dims for the solver"))?;
    let g = &ext.g;
    let gens: Vec<usize> = if generators.is_empty() {
        vec![g.random_element(&mut trial_rng(seed, 0))]
    } else {
        generators
            .iter()
            .map(|l| g.index_of(l).ok_or_else(|| usage(format!("unknown element label {l:?}"))))
            .collect::<Result<_, _>>()?
    };
    let gen_labels: Vec<&str> = gens.iter().map(|&x| g.label(x)).collect();
    cfg.set("generators", &gen_labels);
    let truth = g.generate(&gens);
    let oracle = make_finite_subgroup_oracle(g.clone(), truth.clone())?;
    let t = solve_extension_hsp(&oracle, &ext, &AbelianHspSolver::new(dims), seed)?;
    let found = t.subgroup(&ext);
    let k = ext.k.len() as u64;
    let bound = k * (1 + t.t.len() as u64 + t.h_solver_queries);
    let labels = |xs: &[usize]| xs.iter().map(|&x| g.label(x).to_string()).collect::<Vec<_>>();
    let mut art = Artifact::new(["element", "label"]);
    art.put("order", g.order());
    art.put("k_order", ext.k.len());
    art.put("hidden_order", truth.len());
    art.put("recovered_order", found.len());
    art.put("correct", found == truth);
    art.put("s", labels(&t.s));
    art.put("t", labels(&t.t));
    let eta: BTreeMap<String, String> = t
        .eta
        .iter()
        .map(|(&x, &y)| (g.label(x).to_string(), g.label(y).to_string()))
        .collect();
    art.put("eta", eta);
    art.put("queries", t.queries);
    art.put("h_solver_queries", t.h_solver_queries);
    art.put("query_bound", bound);
    let mut ok = found == truth && t.queries <= bound;
    if file.is_none() && builtin == BuiltinExtension::Z3z7 {
        let agrees = cross_check_z3_by_z7(&found, seed)?;
        art.put("qhedral_cross_check", agrees);
        ok &= agrees;
    }
    for &x in &found {
        art.push(vec![Value::from(x), Value::from(g.label(x))]);
    }
    art.ok = ok;
    Ok((cfg, art))
}

pub fn gauss(mut cfg: RunConfig, p: u64, q: Option<u64>) -> Out {
    check_prime(p)?;
    cfg.p = Some(p);
    cfg.q = q;
    let rows = gauss_sum_table(p)?;
    let mut art = Artifact::new(["s", "t", "re", "im", "modulus", "expected", "error"]);
    let mut worst: f64 = 0.0;
    for r in &rows {
        worst = worst.max(r.error);
        art.push(vec![
            Value::from(r.s),
            Value::from(r.t),
            Value::from(r.re),
            Value::from(r.im),
            Value::from(r.modulus),
            Value::from(r.expected),
            Value::from(r.error),
        ]);
    }
    art.put("sqrt_p", (p as f64).sqrt());
    art.put("max_error", worst);
    if let Some(q) = q {
        check_q(p, q)?;
        art.put("incomplete", incomplete_sum_scan(p, q)?);
    }
    Ok((cfg, art))
}

pub fn acceptance(mut cfg: RunConfig, seed: u64, only: &[u32]) -> Out {
    cfg.seed = Some(seed);
    if !only.is_empty() {
        cfg.set("only", only);
    }
    let reports = if only.is_empty() {
        run_all(seed)
    } else {
        only.iter().map(|&id| run_criterion(id, seed)).collect()
    };
    let mut art = Artifact::new(["id", "name", "pass", "check", "limit_secs", "detail"]);
    let mut passed = 0;
    for r in &reports {
        eprintln!("{r}");
        if r.pass {
            passed += 1;
        }
        art.push(vec![
            Value::from(r.id),
            Value::from(r.name.clone()),
            Value::from(r.pass),
            Value::from(r.check),
            Value::from(r.limit_secs),
            Value::from(r.detail.clone()),
        ]);
    }
    eprintln!("{passed}/{} criteria passed", reports.len());
    art.put("passed", passed);
    art.put("total", reports.len());
    art.ok = passed == reports.len();
    Ok((cfg, art))
}
