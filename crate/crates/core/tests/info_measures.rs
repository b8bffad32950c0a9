use abelian_gmi::info::{
    coset_mi_channel, coset_mi_channel_chain, coset_mi_source, per_coset_mi, source_mi,
    symmetric_mi,
};
use abelian_gmi::{ChannelSpec, GroupSpec, SourceJoint, ThetaVector};
use abelian_gmi_testkit as tk;
use proptest::prelude::*;

const GROUPS: [&str; 6] = ["2", "4", "8", "9", "2,4", "4,3"];

fn setup(g: usize, seed: u64) -> (GroupSpec, tk::Ab, tk::Rng) {
    let spec: GroupSpec = GROUPS[g].parse().unwrap();
    let ab = tk::Ab::new(spec.rings().iter().map(|x| (x.p, x.r)).collect());
    (spec, ab, tk::rng(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn channel_terms_match_reference(g in 0..GROUPS.len(), ny in 2usize..6, seed in any::<u64>()) {
        let (spec, ab, mut rng) = setup(g, seed);
        let w = tk::random_channel(ab.order(), ny, &mut rng);
        let c = ChannelSpec::new(spec.clone(), w.clone()).unwrap();
        prop_assert!((symmetric_mi(&c) - tk::channel_term(&ab, &w, &vec![0; spec.q_index().len()])).abs() < 1e-10);
        for theta in ThetaVector::all(&spec) {
            let direct = coset_mi_channel(&c, &theta).unwrap();
            let chain = coset_mi_channel_chain(&c, &theta).unwrap();
            let reference = tk::channel_term(&ab, &w, theta.values());
            prop_assert!((direct - chain).abs() < 1e-10, "{theta}: {direct} vs {chain}");
            prop_assert!((direct - reference).abs() < 1e-10, "{theta}: {direct} vs {reference}");
            let mut ours = per_coset_mi(&c, &theta).unwrap();
            let mut theirs = tk::per_coset_terms(&ab, &w, theta.values());
            ours.sort_by(f64::total_cmp);
            theirs.sort_by(f64::total_cmp);
            prop_assert_eq!(ours.len(), theirs.len());
            for (a, b) in ours.iter().zip(&theirs) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn channel_terms_are_monotone(g in 0..GROUPS.len(), seed in any::<u64>()) {
        let (spec, ab, mut rng) = setup(g, seed);
        let c = ChannelSpec::new(spec.clone(), tk::random_channel(ab.order(), 3, &mut rng)).unwrap();
        let all = ThetaVector::all(&spec);
        let vals: Vec<f64> = all.iter().map(|t| coset_mi_channel(&c, t).unwrap()).collect();
        for (s, vs) in all.iter().zip(&vals) {
            for (t, vt) in all.iter().zip(&vals) {
                if s.le(t) {
                    prop_assert!(*vt <= *vs + 1e-10, "{s} <= {t}: {vs} < {vt}");
                }
            }
        }
        prop_assert!(vals.last().unwrap().abs() < 1e-12);
    }

    #[test]
    fn source_terms_match_reference_and_obey_data_processing(
        g in 0..GROUPS.len(), nx in 2usize..5, seed in any::<u64>()
    ) {
        let (spec, ab, mut rng) = setup(g, seed);
        let joint = tk::random_source_joint(nx, ab.order(), &mut rng);
        let j = SourceJoint::new(spec.clone(), joint.clone(), None, None).unwrap();
        let total = source_mi(&j);
        prop_assert!((total - tk::mi(&joint)).abs() < 1e-10);
        let all = ThetaVector::all(&spec);
        let vals: Vec<f64> = all.iter().map(|t| coset_mi_source(&j, t).unwrap()).collect();
        for ((t, v), reference) in all.iter().zip(&vals).zip(all.iter().map(|t| tk::source_term(&ab, &joint, t.values()))) {
            prop_assert!((v - reference).abs() < 1e-10, "{t}");
            prop_assert!(*v <= total + 1e-10);
        }
        for (s, vs) in all.iter().zip(&vals) {
            for (t, vt) in all.iter().zip(&vals) {
                if s.le(t) {
                    prop_assert!(*vs <= *vt + 1e-10);
                }
            }
        }
        prop_assert!((vals.last().unwrap() - total).abs() < 1e-10);
        prop_assert!(vals[0].abs() < 1e-12);
    }

    #[test]
    fn additive_channels_have_equal_coset_terms(g in 0..GROUPS.len(), seed in any::<u64>()) {
        let (spec, ab, mut rng) = setup(g, seed);
        let noise = tk::random_distribution(ab.order(), &mut rng);
        let c = ChannelSpec::additive(spec.clone(), &noise).unwrap();
        let reference = tk::additive_channel(&ab, &noise);
        for (row, expect) in c.matrix().iter().zip(&reference) {
            for (a, b) in row.iter().zip(expect) {
                prop_assert!((a - b).abs() < 1e-15);
            }
        }
        for theta in ThetaVector::all(&spec) {
            let per = per_coset_mi(&c, &theta).unwrap();
            for v in &per {
                prop_assert!((v - per[0]).abs() < 1e-10, "{theta}: {per:?}");
            }
            prop_assert!((per[0] - coset_mi_channel(&c, &theta).unwrap()).abs() < 1e-10);
        }
    }
}

#[test]
fn malformed_inputs_are_rejected() {
    let spec: GroupSpec = "2".parse().unwrap();
    assert!(ChannelSpec::new(spec.clone(), vec![vec![0.5, 0.5]]).is_err());
    assert!(ChannelSpec::new(spec.clone(), vec![vec![0.5, 0.6], vec![1.0, 0.0]]).is_err());
    assert!(ChannelSpec::new(spec.clone(), vec![vec![-0.1, 1.1], vec![1.0, 0.0]]).is_err());
    assert!(SourceJoint::new(
        spec.clone(),
        vec![vec![0.4, 0.1], vec![0.1, 0.4]],
        None,
        None
    )
    .is_ok());
    assert!(SourceJoint::new(
        spec.clone(),
        vec![vec![0.6, 0.1], vec![0.1, 0.2]],
        None,
        None
    )
    .is_err());
    let d = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    assert!(SourceJoint::new(
        spec.clone(),
        vec![vec![0.4, 0.1], vec![0.1, 0.4]],
        Some(d.clone()),
        Some(0.1)
    )
    .is_err());
    assert!(SourceJoint::new(
        spec,
        vec![vec![0.4, 0.1], vec![0.1, 0.4]],
        Some(d),
        Some(0.2)
    )
    .is_ok());
}
