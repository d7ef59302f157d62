mod common;

use proptest::prelude::*;
use sdr_core::analysis::{
    analyze, check_branch, compute_roots, BranchIssue, enumerate_branches, segment_language_ok, AnalysisOptions, Check,
};
use sdr_core::engine::{run, Daemon, DaemonKind, Limits, RuleId};
use sdr_core::graph::{Graph, GraphKind};
use sdr_core::sdr::{ComposedState, Sdr, SdrMutation, SdrState, Status, RULE_C, RULE_R, RULE_RB, RULE_RF};
use sdr_core::unison::{Clock, Unison};

fn s(st: Status, d: u64, c: u32) -> ComposedState<Clock> {
    ComposedState {
        sdr: SdrState { st, d },
        inner: Clock(c),
    }
}

#[test]
fn root_examples() {
    let g = Graph::generate(GraphKind::Star, 4, 0).unwrap();
    let u = Unison::new(5, 4).unwrap();
    let r = compute_roots(&u, &g, &u.gamma_init(&g));
    assert!(r.alive.is_empty() && r.dead.is_empty());
    let mut c = u.gamma_init(&g);
    c[2] = s(Status::RB, 0, 0);
    assert_eq!(compute_roots(&u, &g, &c).alive, vec![2]);
    let c = vec![s(Status::RF, 1, 0), s(Status::RF, 2, 0), s(Status::C, 0, 0), s(Status::RB, 5, 0)];
    assert!(compute_roots(&u, &g, &c).dead.contains(&0));
}

#[test]
fn branch_examples() {
    let g = Graph::generate(GraphKind::Path, 3, 0).unwrap();
    let u = Unison::new(4, 3).unwrap();
    assert!(enumerate_branches(&u, &g, &u.gamma_init(&g)).branches.is_empty());
    // RB, RF, RB along increasing d violates the RB*RF* pattern. The
    // parent relation never links RF to an RB child, so enumeration splits
    // it; the pattern check itself must reject the chain.
    let c = vec![s(Status::RB, 0, 0), s(Status::RF, 1, 0), s(Status::RB, 2, 0)];
    assert_eq!(check_branch(&c, &[0, 1, 2]), Some(BranchIssue::StatusPattern));
    assert_eq!(enumerate_branches(&u, &g, &c).branches, vec![vec![0, 1], vec![2]]);
    let c = vec![s(Status::RB, 0, 0), s(Status::RB, 2, 0), s(Status::RB, 1, 0)];
    assert_eq!(check_branch(&c, &[0, 1, 2]), Some(BranchIssue::DistanceOrder));
}

#[test]
fn mid_reset_branches_are_well_formed() {
    for g in common::family(8, 6) {
        let alg = Sdr::new(Unison::for_graph(&g));
        for seed in 0..20 {
            let init = alg.inner().random_config(&g, &mut common::rng(seed));
            let t = run(&alg, &g, init, &mut Daemon::new(DaemonKind::CentralRandom, seed), Limits { max_steps: 400, max_rounds: usize::MAX }).unwrap();
            for c in &t.configs {
                let b = enumerate_branches(alg.inner(), &g, c);
                assert!(b.violations.is_empty(), "{:?}", b.violations);
                assert!(b.branches.iter().all(|br| br.len() <= g.n()));
                for br in &b.branches {
                    assert!(br.windows(2).all(|w| c[w[0]].sdr.d < c[w[1]].sdr.d));
                }
            }
        }
    }
}

#[test]
fn normal_start_is_one_segment() {
    let g = Graph::generate(GraphKind::Ring, 6, 0).unwrap();
    let alg = Sdr::new(Unison::for_graph(&g));
    let t = run(&alg, &g, alg.inner().gamma_init(&g), &mut Daemon::new(DaemonKind::SubsetRandom(0.5), 0), Limits { max_steps: 200, max_rounds: usize::MAX }).unwrap();
    let rep = analyze(&alg, &g, &t, &[], AnalysisOptions::all());
    assert_eq!(rep.segments, 1);
    assert_eq!(rep.first_normal, Some(0));
    assert_eq!(rep.ladder_rounds, [Some(0); 4]);
    assert!(rep.violations.is_empty());
}

#[test]
fn weakened_rule_c_is_reported() {
    let mut hits = 0;
    for g in common::family(6, 0) {
        let alg = Sdr::with_mutation(Unison::for_graph(&g), SdrMutation::WeakRuleC);
        for seed in 0..10 {
            let init = alg.inner().random_config(&g, &mut common::rng(seed));
            let t = run(&alg, &g, init, &mut Daemon::new(DaemonKind::CentralRandom, seed), Limits { max_steps: 300, max_rounds: usize::MAX }).unwrap();
            let rep = analyze(&alg, &g, &t, &[], AnalysisOptions::all());
            hits += rep.violations.iter().filter(|v| v.check == Check::SegmentLanguage).count();
        }
    }
    assert!(hits > 0);
}

/// Every word of (C|ε)(RB|R|ε)(RF|ε), listed by hand.
fn language() -> Vec<Vec<RuleId>> {
    let mut out = Vec::new();
    for a in [None, Some(RULE_C)] {
        for b in [None, Some(RULE_RB), Some(RULE_R)] {
            for c in [None, Some(RULE_RF)] {
                out.push([a, b, c].into_iter().flatten().collect());
            }
        }
    }
    out
}

proptest! {
    #[test]
    fn segment_language_matches_enumeration(word in prop::collection::vec(0u16..4, 0..5)) {
        let word: Vec<RuleId> = word.into_iter().map(RuleId).collect();
        prop_assert_eq!(segment_language_ok(&word), language().contains(&word));
    }
}
