use hsplab::extension::{
    cross_check_z3_by_z7, make_finite_subgroup_oracle, solve_extension_hsp, AbelianHspSolver,
    ExtensionFile, ExtensionGroup,
};

#[test]
fn every_cyclic_subgroup_of_q8_times_z15() {
    let ext = ExtensionGroup::quaternion_times_z15().unwrap();
    let solver = AbelianHspSolver::new(ext.h_dims.clone().unwrap());
    let k = ext.k.len() as u64;
    for x in 0..ext.g.order() {
        let hidden = ext.g.generate(&[x]);
        let f = make_finite_subgroup_oracle(ext.g.clone(), hidden.clone()).unwrap();
        let t = solve_extension_hsp(&f, &ext, &solver, x as u64).unwrap();
        assert_eq!(t.subgroup(&ext), hidden, "generator {}", ext.g.label(x));
        assert!(t.queries <= k * (1 + t.t.len() as u64 + t.h_solver_queries));
    }
}

#[test]
fn z3_by_z7_agrees_with_the_qhedral_solver() {
    let ext = ExtensionGroup::z3_by_z7().unwrap();
    let solver = AbelianHspSolver::new(ext.h_dims.clone().unwrap());
    for x in 0..ext.g.order() {
        let hidden = ext.g.generate(&[x]);
        let f = make_finite_subgroup_oracle(ext.g.clone(), hidden.clone()).unwrap();
        let t = solve_extension_hsp(&f, &ext, &solver, 3).unwrap();
        let found = t.subgroup(&ext);
        assert_eq!(found, hidden);
        assert!(cross_check_z3_by_z7(&found, 4).unwrap());
    }
}

#[test]
fn json_round_trip() {
    let ext = ExtensionGroup::quaternion_times_z15().unwrap();
    let text = serde_json::to_string(&ExtensionFile::from_group(&ext)).unwrap();
    let path = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("q8z15.json");
    std::fs::write(&path, text).unwrap();
    let back = ExtensionGroup::load_json(&path).unwrap();
    assert_eq!(back.g.order(), 120);
    assert_eq!(back.k, ext.k);
    assert_eq!(back.h_dims, ext.h_dims);
}
