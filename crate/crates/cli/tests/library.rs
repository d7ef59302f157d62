use sdr_cli::config::{AlgorithmKind, InitMode, RunConfig};
use sdr_cli::exec::{bound_names, execute};
use sdr_cli::sweep::parse_seeds;

#[test]
fn seed_ranges() {
    assert_eq!(parse_seeds("0..1000"), Ok(0..1000));
    assert_eq!(parse_seeds("3..=5"), Ok(3..6));
    assert_eq!(parse_seeds("7..7"), Ok(7..7));
    assert_eq!(parse_seeds("9..2"), Ok(9..9));
    assert!(parse_seeds("12").is_err());
    assert!(parse_seeds("a..b").is_err());
    assert!(parse_seeds("0..=18446744073709551615").is_err());
}

#[test]
fn reports_carry_exactly_the_declared_bounds() {
    for alg in ["unison", "alliance", "unison_sdr", "alliance_sdr"] {
        for init in ["gamma_init", "random"] {
            let cfg = RunConfig::parse(&format!(
                "algorithm = \"{alg}\"\ninit = \"{init}\"\nafter_normal = 5\n[graph]\nkind = \"star\"\nn = 5\n"
            ))
            .unwrap();
            let r = execute(&cfg, 2, false).unwrap().report;
            let names: Vec<&str> = r.bounds.iter().map(|b| b.name).collect();
            assert_eq!(names, bound_names(cfg.algorithm, cfg.init), "{alg} {init}");
        }
    }
}

#[test]
fn alliance_keys_are_rejected_for_unison() {
    let cfg = RunConfig::parse("algorithm = \"unison\"\npreset = \"dominating_set\"\n[graph]\nkind = \"path\"\nn = 3\n").unwrap();
    assert!(cfg.prepare(0).is_err());
    let cfg = RunConfig::parse("algorithm = \"alliance\"\nK = 9\n[graph]\nkind = \"path\"\nn = 3\n").unwrap();
    assert!(cfg.prepare(0).is_err());
    let cfg = RunConfig::parse("algorithm = \"unison\"\nmutation = \"weak_rule_c\"\n[graph]\nkind = \"path\"\nn = 3\n").unwrap();
    assert!(cfg.prepare(0).is_err());
    assert_eq!(cfg.algorithm, AlgorithmKind::Unison);
    assert_eq!(cfg.init, InitMode::GammaInit);
}

#[test]
fn graph_spec_needs_exactly_one_source() {
    let cfg = RunConfig::parse("algorithm = \"unison\"\n[graph]\nkind = \"path\"\n").unwrap();
    assert!(cfg.prepare(0).is_err());
    let cfg = RunConfig::parse("algorithm = \"unison\"\n[graph]\nkind = \"path\"\nn = 3\nfile = \"x\"\n").unwrap();
    assert!(cfg.prepare(0).is_err());
}

/// Bare unison from a start with an out-of-sync edge: no process moves more
/// than 3D times.
#[test]
fn bare_unison_random_starts_respect_3d() {
    for seed in 0..200 {
        let cfg = RunConfig::parse(
            "algorithm = \"unison\"\ninit = \"random\"\ndaemon = \"central_random\"\nafter_normal = 5\n[graph]\nkind = \"random_connected\"\nn = 7\n",
        )
        .unwrap();
        let r = execute(&cfg, seed, false).unwrap().report;
        assert!(r.problems.is_empty(), "seed {seed}: {:?}", r.problems);
    }
}
