use loewner_carpet::io::format::{read_graph, read_ledger, GraphFile, LedgerFile};
use loewner_carpet::io::{cmd_build, RunManifest};
use loewner_carpet::rational::{Rational, RationalRepr};
use loewner_carpet::substitution::{apply_rule, Rule};
use loewner_carpet::build_seed;
use num_bigint::BigInt;
use proptest::prelude::*;

proptest! {
    #[test]
    fn rationals_survive_their_text_form(num in any::<i128>(), den in 1u128..) {
        let r = Rational::new(BigInt::from(num), BigInt::from(den));
        let repr = RationalRepr::from(&r);
        let text = serde_json::to_string(&repr).unwrap();
        let back: RationalRepr = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(Rational::try_from(&back).unwrap(), r);
    }
}

#[test]
fn files_reload_to_the_built_levels() {
    let dir = tempfile::tempdir().unwrap();
    let rules = [Rule::S(16), Rule::C(1)];
    let manifest = cmd_build(&rules, None, dir.path(), 0).unwrap();
    assert_eq!(RunManifest::load_verified(dir.path()).unwrap(), manifest);

    let first = apply_rule(&build_seed(), rules[0]).unwrap();
    let second = apply_rule(&first.graph, rules[1]).unwrap();
    let g1 = read_graph(&dir.path().join("level_1.graph.json")).unwrap();
    let g2 = read_graph(&dir.path().join("level_2.graph.json")).unwrap();
    assert_eq!(GraphFile::from(&g1).edges, GraphFile::from(&first.graph).edges);
    assert_eq!(g2.vertices(), second.graph.vertices());
    assert_eq!(g2.provenance.parent_file_hash.as_deref(), manifest.files.get("level_1.graph.json").map(String::as_str));
    let l2 = read_ledger(&dir.path().join("level_2.ledger.json")).unwrap();
    assert_eq!(LedgerFile::from(&l2), LedgerFile::from(&second.ledger));
}

#[test]
fn identical_plans_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_build(&[Rule::WS(2)], None, a.path(), 1).unwrap();
    cmd_build(&[Rule::WS(2)], None, b.path(), 1).unwrap();
    for name in RunManifest::read(a.path()).unwrap().files.keys().chain([&"manifest.json".to_string()]) {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}
