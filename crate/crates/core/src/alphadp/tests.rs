use super::*;
use crate::rational::{int, ratio};

#[test]
fn stable_counts() {
    let expected = [1usize, 2, 7, 112];
    let classes = StableClasses::enumerate(3).unwrap();
    for (j, &n) in expected.iter().enumerate() {
        assert_eq!(classes.count(j as u32), n);
        assert_eq!(stable_count_formula(j as u32), n as u128);
    }
    assert_eq!(stable_count_formula(4), 246_792);
    assert_eq!(stable_count_formula(5), 2_505_258_478_767_772);
    assert!(StableClasses::enumerate(5).is_err());
}

#[test]
fn height_one_classes() {
    let classes = StableClasses::enumerate(1).unwrap();
    let keys: Vec<String> = classes.classes(1).into_iter().map(|c| c.key).collect();
    assert_eq!(keys, vec!["[FUU]", "[UUU]"]);
    let empty = Configuration::empty(1).unwrap();
    assert_eq!(classes.classify(&empty), Some(1));
    // A zero at height one has negated value 1: its subtree is complete.
    let zero: Configuration = "0??".parse().unwrap();
    assert_eq!(classes.classify(&zero), Some(0));
    // A one is not the minority's sibling set: its siblings get queried.
    let one: Configuration = "1??".parse().unwrap();
    assert!(!classes.is_stable(&one));
    let r = classes.resolve(&one).unwrap();
    assert!(r.branches.iter().all(|b| b.outcome == Outcome::Determined));
    let det: Configuration = "00?".parse().unwrap();
    let r = classes.resolve(&det).unwrap();
    assert_eq!(r.branches.len(), 1);
    assert_eq!(r.branches[0].outcome, Outcome::Determined);
}

#[test]
fn two_zero_children_determine_the_root() {
    let classes = StableClasses::enumerate(2).unwrap();
    let c: Configuration = "010 100 ???".parse().unwrap();
    let r = classes.resolve(&c).unwrap();
    assert_eq!(r.branches, vec![Branch { outcome: Outcome::Determined, multiplicity: 1 }]);
}

#[test]
fn resolve_rejects_inconsistent() {
    let classes = StableClasses::enumerate(1).unwrap();
    let c: Configuration = "11?".parse().unwrap();
    assert_eq!(classes.resolve(&c), Err(Error::Inconsistent));
}

#[test]
fn resolve_preserves_completion_counts() {
    let classes = StableClasses::enumerate(2).unwrap();
    let c: Configuration = "1?? ??? ???".parse().unwrap();
    let r = classes.resolve(&c).unwrap();
    let total: u128 = r
        .branches
        .iter()
        .map(|b| {
            let per = match b.outcome {
                Outcome::Stable(s) => classes.class(2, s as usize).completions,
                Outcome::Determined => 1,
            };
            b.multiplicity as u128 * per
        })
        .sum();
    assert_eq!(total, r.completions);
}

#[test]
fn alpha_small_heights() {
    assert_eq!(alpha(1).unwrap().alpha, int(2));
    assert_eq!(alpha(2).unwrap().alpha, ratio(24, 7));
    let r3 = alpha(3).unwrap();
    assert_eq!(r3.alpha, ratio(12231, 2203));
    assert_eq!(r3.n_k, 112);
    assert!(alpha(0).is_err());
}

#[test]
fn k1_at_zero_reads_everything() {
    let dp = AlphaDp::build(1).unwrap();
    let sol = dp.dp_optimize(&int(0)).unwrap();
    let root = sol.root();
    assert_eq!(root.p_q, int(2));
    assert_eq!(root.rho, int(1));
}

#[test]
fn k2_anchor_values() {
    let dp = AlphaDp::build(2).unwrap();
    assert_eq!(dp.dp_optimize(&ratio(24, 7)).unwrap().max_rho(), int(0));
    assert_eq!(dp.dp_optimize(&int(3)).unwrap().max_rho(), ratio(2, 27));
}

#[test]
fn stored_rho_matches_statistics() {
    let dp = AlphaDp::build(2).unwrap();
    let alpha = ratio(3, 2);
    let sol = dp.dp_optimize(&alpha).unwrap();
    for c in 0..sol.len() {
        let e = sol.entry(c);
        assert_eq!(e.rho, &e.p_q / int(4) - &alpha * &e.p_m);
        assert!(e.p_m >= int(0) && e.p_m <= int(1));
        assert!(e.p_q >= int(0) && e.p_q <= int(4));
    }
}

#[test]
fn transitions_conserve_sensitive_mass() {
    use super::classes::{Resolver, Stats};
    use super::dp::class_actions;
    let k = 3;
    let classes = StableClasses::enumerate(k).unwrap();
    let mut r = Resolver::new(&classes);
    let all: u128 = (1u128 << 27) - 1;
    let mut stats = vec![Stats::default(); r.layout.total];
    let (sens, cnt): (Vec<u128>, Vec<u128>) = (0..classes.count(k))
        .map(|c| {
            r.layout.analyze(&classes.levels[k as usize].reps[c], all, None, &mut stats);
            let s = stats[r.layout.root()];
            (s.sens[0], s.cnt[0])
        })
        .unzip();
    for c in 0..classes.count(k) {
        for a in class_actions(&classes, &mut r, c) {
            let read = a.dq + a.succ.iter().map(|&(s, m)| m as u128 * sens[s as usize]).sum::<u128>();
            let kept: u128 = a.succ.iter().map(|&(s, m)| m as u128 * cnt[s as usize]).sum();
            assert!(read <= sens[c], "{} leaf {}", classes.key(k, c), a.leaf);
            assert!(kept <= cnt[c]);
        }
    }
}

#[test]
fn max_rho_changes_sign_at_alpha_k() {
    let eps = ratio(1, 1000);
    for k in 1..=3 {
        let dp = AlphaDp::build(k).unwrap();
        let a = dp.alpha().unwrap().alpha;
        assert!(dp.dp_optimize(&(&a - &eps)).unwrap().max_rho() > int(0));
        assert!(dp.dp_optimize(&a).unwrap().max_rho().is_zero());
        assert!(dp.dp_optimize(&(&a + &eps)).unwrap().max_rho() < int(0));
    }
}

#[test]
fn c_prime_is_optimal_between_three_and_alpha_2() {
    use crate::oracles::{build_c_prime, rho_exhaustive};
    let dp = AlphaDp::build(2).unwrap();
    let c = build_c_prime();
    for a in [int(0), int(1), int(2), int(3), ratio(13, 4), ratio(10, 3), ratio(24, 7), int(4)] {
        let tree = rho_exhaustive(&c, 2, &a).unwrap().rho;
        let best = dp.dp_optimize(&a).unwrap().max_rho();
        assert!(tree <= best);
        if a >= int(3) && a <= ratio(24, 7) {
            assert_eq!(tree, best, "alpha = {a}");
        }
    }
}

#[test]
fn raw_configurations_partition_into_stable_classes() {
    let classes = StableClasses::enumerate(2).unwrap();
    let mut members = vec![0u128; classes.count(2)];
    for code in 0..3usize.pow(9) {
        let mut c = code;
        let leaves: Vec<Option<bool>> = (0..9)
            .map(|_| {
                let v = [None, Some(false), Some(true)][c % 3];
                c /= 3;
                v
            })
            .collect();
        let cfg = Configuration::new(2, leaves).unwrap();
        if classes.resolve(&cfg).is_err() || !classes.is_stable(&cfg) {
            continue;
        }
        members[classes.classify(&cfg).expect("stable configurations have a class")] += 1;
    }
    let expected: Vec<u128> = classes.classes(2).iter().map(|c| c.members).collect();
    assert_eq!(members, expected);
}
