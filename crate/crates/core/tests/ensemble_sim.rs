use std::collections::{BTreeMap, BTreeSet};

use abelian_gmi::ensemble::{
    apply_hom, brute_theta, count_t_theta, mc_channel_error, sample_hom, solve_congruence, t_bound,
    theta_of_pair, verify_ensemble, JSpec, VerifyOptions,
};
use abelian_gmi::rate::enumerate_theta;
use abelian_gmi::{ChannelSpec, GroupSpec, ThetaVector};
use abelian_gmi_testkit as tk;
use num_bigint::BigUint;

fn j(g: &str, k: &[u32]) -> JSpec {
    JSpec::new(g.parse().unwrap(), k.to_vec()).unwrap()
}

/// `(p, r)` of each component of `G^n`.
fn comps(spec: &GroupSpec, n: usize) -> Vec<(u64, u32)> {
    (0..n)
        .flat_map(|_| spec.rings().iter().map(|g| (g.p, g.r)))
        .collect()
}

#[test]
fn sampled_images_respect_generator_orders() {
    for (g, k, n) in [
        ("2,4", vec![1, 1], 2),
        ("4,3", vec![1, 1, 1], 2),
        ("8,9", vec![0, 1, 0, 1, 1], 1),
    ] {
        let zj = j(g, &k);
        let cs = comps(zj.group(), n);
        let mut freq: BTreeMap<(usize, usize, u64), u32> = BTreeMap::new();
        let trials = 1000;
        for seed in 0..trials {
            let h = sample_hom(&zj, n, seed).unwrap();
            for (l, &(q, s)) in zj.generators().iter().enumerate() {
                for (c, &(p, r)) in cs.iter().enumerate() {
                    let x = h.images()[l][c];
                    let m = p.pow(r);
                    // q^s · g = 0 in Z_{p^r}
                    assert_eq!(x as u128 * q.pow(s) as u128 % m as u128, 0, "{g}");
                    *freq.entry((l, c, x)).or_insert(0) += 1;
                }
            }
        }
        // every admissible image appears with its uniform share
        for (l, &(q, s)) in zj.generators().iter().enumerate() {
            for (c, &(p, r)) in cs.iter().enumerate() {
                let m = p.pow(r);
                let admissible: Vec<u64> = (0..m)
                    .filter(|&x| (x as u128 * q.pow(s) as u128).is_multiple_of(m as u128))
                    .collect();
                let expect = trials as f64 / admissible.len() as f64;
                let sd = (expect * (1.0 - 1.0 / admissible.len() as f64)).sqrt();
                for x in admissible {
                    let got = *freq.get(&(l, c, x)).unwrap_or(&0) as f64;
                    assert!(
                        (got - expect).abs() <= 5.0 * sd + 1e-9,
                        "{g} gen {l} comp {c} value {x}: {got} vs {expect}"
                    );
                }
            }
        }
    }
}

#[test]
fn encoder_is_a_homomorphism() {
    for (g, k, n) in [
        ("2,4", vec![1, 1], 2),
        ("4,3", vec![2, 1, 1], 3),
        ("9", vec![1, 1], 2),
    ] {
        let zj = j(g, &k);
        let moduli: Vec<u64> = comps(zj.group(), n)
            .iter()
            .map(|&(p, r)| p.pow(r))
            .collect();
        let el: Vec<Vec<u64>> = zj.elements().unwrap().collect();
        for seed in 0..20 {
            let h = sample_hom(&zj, n, seed).unwrap();
            for a in el.iter().step_by(3) {
                for b in el.iter().step_by(5) {
                    let s = zj.add(a, b);
                    let lhs = apply_hom(&zj, &h, &s).unwrap();
                    let (fa, fb) = (
                        apply_hom(&zj, &h, a).unwrap(),
                        apply_hom(&zj, &h, b).unwrap(),
                    );
                    let rhs: Vec<u64> = fa
                        .iter()
                        .zip(&fb)
                        .zip(&moduli)
                        .map(|((x, y), m)| (x + y) % m)
                        .collect();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
}

/// `θ` of a pair from depths, written independently of the library.
fn reference_theta(zj: &JSpec, a: &[u64], b: &[u64]) -> Vec<u32> {
    let d = zj.sub(b, a);
    zj.group()
        .q_index()
        .iter()
        .map(|&(p, r)| {
            zj.generators()
                .iter()
                .zip(&d)
                .filter(|((q, _), _)| *q == p)
                .map(|(&(q, s), &x)| r.saturating_sub(s) + tk::depth(x, q, s))
                .min()
                .unwrap_or(r)
                .min(r)
        })
        .collect()
}

#[test]
fn pair_thetas_census_and_bound() {
    for (g, k) in [
        ("8", vec![0, 0, 1]),
        ("8", vec![1, 1, 0]),
        ("2,4", vec![1, 1]),
        ("4,3", vec![1, 1, 1]),
        ("9", vec![2, 0]),
        ("2,2,4", vec![0, 2]),
    ] {
        let zj = j(g, &k);
        let spec = zj.group();
        let el: Vec<Vec<u64>> = zj.elements().unwrap().collect();
        for a in &el {
            let mut census: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
            for b in &el {
                let t = theta_of_pair(&zj, a, b).unwrap();
                assert_eq!(
                    t.values(),
                    reference_theta(&zj, a, b).as_slice(),
                    "{g} {a:?} {b:?}"
                );
                *census.entry(t.values().to_vec()).or_insert(0) += 1;
            }
            for theta in ThetaVector::all(spec) {
                let count = count_t_theta(&zj, a, &theta).unwrap();
                assert_eq!(count, *census.get(theta.values()).unwrap_or(&0));
                assert!(
                    BigUint::from(count) <= t_bound(&zj, &theta).unwrap(),
                    "{g} {theta}"
                );
            }
        }
        let ours = brute_theta(&zj).unwrap();
        let formula: BTreeSet<ThetaVector> = enumerate_theta(spec, zj.support())
            .unwrap()
            .into_iter()
            .collect();
        assert_eq!(ours, formula, "{g} {k:?}");
        let ab = tk::Ab::new(spec.rings().iter().map(|x| (x.p, x.r)).collect());
        let flags: Vec<bool> = k.iter().map(|&c| c > 0).collect();
        let reference: BTreeSet<Vec<u32>> = ours.iter().map(|t| t.values().to_vec()).collect();
        assert_eq!(reference, tk::theta_set(&ab, &flags));
    }
}

#[test]
fn congruence_solutions_match_brute_force() {
    for (p, r) in [
        (2u64, 1u32),
        (2, 2),
        (2, 3),
        (2, 4),
        (3, 1),
        (3, 2),
        (3, 3),
        (5, 1),
        (5, 2),
        (7, 1),
    ] {
        let m = p.pow(r);
        for s in 1..=r {
            for a in 1..p.pow(s) {
                for b in 0..m {
                    assert_eq!(
                        solve_congruence(p, r, s, a, b).unwrap(),
                        tk::brute_congruence(a, b, m),
                        "{p}^{r} s={s} {a}x={b}"
                    );
                }
            }
        }
    }
}

#[test]
fn lemma_suite_passes_on_small_configurations() {
    for (g, k, n) in [
        ("4", vec![0, 1], 2),
        ("2,4", vec![1, 1], 1),
        ("6", vec![1, 1], 2),
        ("8", vec![1, 0, 1], 1),
    ] {
        let zj = j(g, &k);
        for check in verify_ensemble(&zj, n, &VerifyOptions::default()).unwrap() {
            assert!(
                check.passed(),
                "{g} {k:?} n={n}: {} {:?}",
                check.lemma,
                check.detail
            );
            assert!(check.cases > 0);
        }
    }
}

fn identity(g: &str) -> ChannelSpec {
    let spec: GroupSpec = g.parse().unwrap();
    let n = spec.order() as usize;
    let m = (0..n)
        .map(|x| (0..n).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
        .collect();
    ChannelSpec::new(spec, m).unwrap()
}

/// `|got − p| ≤ z·σ` for a binomial rate.
fn within(got: f64, p: f64, trials: u64, z: f64) -> bool {
    (got - p).abs() <= z * (p * (1.0 - p) / trials as f64).sqrt() + 1e-12
}

#[test]
fn noiseless_errors_come_only_from_collisions() {
    // J = Z_2 into Z_4^4: the images collide only when all four are zero
    let zj = j("4", &[1, 0]);
    let trials = 4000;
    let r = mc_channel_error(&zj, 4, &identity("4"), trials, 5).unwrap();
    let p = 0.5f64.powi(4) * 0.5;
    assert!(
        within(r.error_rate, p, trials, 3.0),
        "{} vs {p}",
        r.error_rate
    );

    // J = Z_3 into Z_9^2: the code is either injective or all-zero
    let zj = j("9", &[1, 0]);
    let r = mc_channel_error(&zj, 2, &identity("9"), trials, 6).unwrap();
    let p = 1.0 / 9.0 * (2.0 / 3.0);
    assert!(
        within(r.error_rate, p, trials, 3.0),
        "{} vs {p}",
        r.error_rate
    );
}

#[test]
fn useless_channel_errs_at_chance() {
    let spec: GroupSpec = "4".parse().unwrap();
    let c = ChannelSpec::new(spec, vec![vec![0.25; 4]; 4]).unwrap();
    let zj = j("4", &[0, 2]);
    let trials = 2000;
    let r = mc_channel_error(&zj, 2, &c, trials, 9).unwrap();
    assert!(
        within(r.error_rate, 1.0 - 1.0 / 16.0, trials, 3.0),
        "{}",
        r.error_rate
    );
}

#[test]
fn more_messages_mean_more_errors() {
    let spec: GroupSpec = "4".parse().unwrap();
    let c = ChannelSpec::additive(spec, &[0.9, 0.05, 0.0, 0.05]).unwrap();
    let rates: Vec<f64> = [vec![0, 3], vec![0, 2], vec![0, 1]]
        .iter()
        .map(|k| {
            mc_channel_error(&j("4", k), 4, &c, 2000, 13)
                .unwrap()
                .error_rate
        })
        .collect();
    assert!(rates[0] > rates[1] && rates[1] > rates[2], "{rates:?}");
}

#[test]
fn decoder_rejects_oversized_work() {
    let zj = j("8", &[0, 0, 3]);
    assert!(mc_channel_error(&zj, 6, &identity("8"), 10, 0).is_err());
}
