//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use abelian_gmi::ensemble::{verify_ensemble, JSpec, PairwiseRequest, VerifyOptions};
use abelian_gmi::info::{coset_mi_channel, per_coset_mi};
use abelian_gmi::rate::{enumerate_theta, omega};
use abelian_gmi::{
    icc, isc, ChannelSpec, Exact, GroupSpec, SolverOptions, SourceJoint, Support, ThetaVector,
    WeightVector,
};
use abelian_gmi_testkit as tk;
use num_rational::BigRational;
use rand::Rng;

type Terms = BTreeMap<Vec<u32>, f64>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let pass = out.pass && took <= limit;
    println!(
        "{} {id}. {name}: {} [{:.2}s, limit {}s]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn ab_of(spec: &GroupSpec) -> tk::Ab {
    tk::Ab::new(spec.rings().iter().map(|x| (x.p, x.r)).collect())
}

fn random_channel(spec: &GroupSpec, rng: &mut tk::Rng) -> (Vec<Vec<f64>>, ChannelSpec) {
    let ny = rng.random_range(2..=5);
    let w = tk::random_channel(spec.order() as usize, ny, rng);
    (w.clone(), ChannelSpec::new(spec.clone(), w).unwrap())
}

fn random_source(spec: &GroupSpec, rng: &mut tk::Rng) -> (Vec<Vec<f64>>, SourceJoint) {
    let nx = rng.random_range(2..=4);
    let joint = tk::random_source_joint(nx, spec.order() as usize, rng);
    (
        joint.clone(),
        SourceJoint::new(spec.clone(), joint, None, None).unwrap(),
    )
}

/// Largest deviation of solver output from a formula on the reference terms,
/// over `count` channel and `count` source instances.
fn formula_gap(
    g: &str,
    count: usize,
    seed: u64,
    channel_formula: impl Fn(&Terms) -> f64,
    source_formula: impl Fn(&Terms) -> f64,
    mut on_channel_terms: impl FnMut(&Terms),
) -> f64 {
    let spec: GroupSpec = g.parse().unwrap();
    let ab = ab_of(&spec);
    let mut rng = tk::rng(seed);
    let opts = SolverOptions::default();
    let mut worst = 0f64;
    for _ in 0..count {
        let (w, c) = random_channel(&spec, &mut rng);
        let terms = tk::channel_terms(&ab, &w);
        on_channel_terms(&terms);
        let got = icc::<f64>(&c, &opts).unwrap().value_bits();
        worst = worst.max((got - channel_formula(&terms)).abs());

        let (joint, j) = random_source(&spec, &mut rng);
        let terms = tk::source_terms(&ab, &joint);
        let got = isc::<f64>(&j, &opts).unwrap().value_bits();
        worst = worst.max((got - source_formula(&terms)).abs());
    }
    worst
}

fn field_reduction() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut worst = 0f64;
    for g in ["2", "3", "5"] {
        worst = worst.max(formula_gap(
            g,
            50,
            1,
            |t| t[&vec![0]],
            |t| t[&vec![1]],
            |_| {},
        ));
    }
    Outcome {
        pass: worst <= TOL,
        detail: format!("Z_2, Z_3, Z_5 x 50 channels + 50 sources, max |rate - I| = {worst:.2e} (tol {TOL:.0e})"),
    }
}

fn single_ring_closed_forms() -> Outcome {
    const TOL: f64 = 1e-8;
    let mut worst = 0f64;
    for (g, r) in [("4", 2), ("8", 3), ("9", 2)] {
        worst = worst.max(formula_gap(
            g,
            50,
            2,
            |t| tk::zpr_channel_formula(r, t),
            |t| tk::zpr_source_formula(r, t),
            |_| {},
        ));
    }
    Outcome {
        pass: worst <= TOL,
        detail: format!(
            "Z_4, Z_8, Z_9 x 50 channels + 50 sources, max gap {worst:.2e} (tol {TOL:.0e})"
        ),
    }
}

fn z2_z4_golden() -> Outcome {
    const TOL: f64 = 1e-8;
    const CHAIN_TOL: f64 = 1e-10;
    let mut chain_breaks = 0;
    let worst = formula_gap(
        "2,4",
        50,
        3,
        tk::z2z4_channel_formula,
        tk::z2z4_source_formula,
        |t| {
            let ok = t[&vec![1, 1]] <= t[&vec![0, 1]] + CHAIN_TOL
                && t[&vec![0, 1]] <= t[&vec![0, 0]] + CHAIN_TOL;
            chain_breaks += usize::from(!ok);
        },
    );
    Outcome {
        pass: worst <= TOL && chain_breaks == 0,
        detail: format!(
            "50 channels + 50 sources, max gap {worst:.2e} (tol {TOL:.0e}), dominance chain broken on {chain_breaks} (tol {CHAIN_TOL:.0e})"
        ),
    }
}

fn exact_theta_tables() -> Outcome {
    let z8: GroupSpec = "8".parse().unwrap();
    let support = Support::from_pairs(&z8, &[(2, 2), (2, 3)]).unwrap();
    let got: Vec<Vec<u32>> = enumerate_theta(&z8, support)
        .unwrap()
        .iter()
        .map(|t| t.values().to_vec())
        .collect();
    let mut ok = got == vec![vec![0], vec![1], vec![2], vec![3]];

    let z43: GroupSpec = "4,3".parse().unwrap();
    let mut got: Vec<Vec<u32>> = enumerate_theta(&z43, Support::full(&z43))
        .unwrap()
        .iter()
        .map(|t| t.values().to_vec())
        .collect();
    got.sort_by_key(|t| (t[1], t[0]));
    ok &= got
        == vec![
            vec![0, 0],
            vec![1, 0],
            vec![2, 0],
            vec![0, 1],
            vec![1, 1],
            vec![2, 1],
        ];

    let mut rng = tk::rng(4);
    let mut mismatches = 0;
    let q = |n: i64| BigRational::from_integer(n.into());
    for _ in 0..10 {
        let (a, b) = (rng.random_range(1..=50i64), rng.random_range(1..=50i64));
        let w22 = BigRational::new(a.into(), (a + b).into());
        let w23 = BigRational::new(b.into(), (a + b).into());
        let w = WeightVector::new(&z8, vec![q(0), w22.clone(), w23.clone()]).unwrap();
        let den = q(2) * &w22 + q(3) * &w23;
        let want = [q(0), &w23 / &den, (&w22 + q(2) * &w23) / &den, q(1)];
        for (t, expect) in want.iter().enumerate() {
            let theta = ThetaVector::new(&z8, vec![t as u32]).unwrap();
            let got: Exact = omega(&z8, &w, &theta).unwrap();
            mismatches += usize::from(&got != expect);
        }
    }
    Outcome {
        pass: ok && mismatches == 0,
        detail: format!(
            "Theta sets for Z_8 and Z_4+Z_3 {}, {mismatches} of 40 exact omega values differ",
            if ok { "match" } else { "differ" }
        ),
    }
}

/// Count vectors over `𝒮(G)` with `1 < |J| ≤ cap`.
fn j_counts(spec: &GroupSpec, cap: u64) -> Vec<Vec<u32>> {
    let mut out = vec![(vec![], 1u64)];
    for &(q, s) in spec.s_index() {
        let unit = q.pow(s);
        out = out
            .into_iter()
            .flat_map(|(k, size)| {
                let mut next = Vec::new();
                let (mut c, mut sz) = (0u32, size);
                while sz <= cap {
                    let mut kk = k.clone();
                    kk.push(c);
                    next.push((kk, sz));
                    c += 1;
                    sz *= unit;
                }
                next
            })
            .collect();
    }
    out.into_iter()
        .filter(|(_, size)| *size > 1)
        .map(|(k, _)| k)
        .collect()
}

fn ensemble_suite() -> Outcome {
    const CAP: u64 = 64;
    let mut configs = 0;
    let mut cases = 0u64;
    let mut failures = Vec::new();
    for order in 2..=CAP {
        for rings in tk::abelian_groups_of_order(order) {
            let spec = GroupSpec::from_prime_powers(&rings).unwrap();
            let mut n = 1;
            while order.pow(n as u32) <= CAP {
                for k in j_counts(&spec, CAP) {
                    let j = JSpec::new(spec.clone(), k.clone()).unwrap();
                    let opts = VerifyOptions {
                        tables: 4,
                        seed: configs,
                        pairwise: PairwiseRequest::Exact,
                    };
                    configs += 1;
                    for check in verify_ensemble(&j, n, &opts).unwrap() {
                        cases += check.cases;
                        if !check.passed() {
                            failures.push(format!(
                                "{} k={k:?} n={n}: {}",
                                spec.canonical_form(),
                                check.lemma
                            ));
                        }
                    }
                }
                n += 1;
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{configs} configurations, {cases} cases, {} violations{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!(" (first: {f})"))
                .unwrap_or_default()
        ),
    }
}

fn grid_oracle() -> Outcome {
    const GAP: f64 = 2e-3;
    const SLACK: f64 = 1e-9;
    let mut worst_gap = 0f64;
    let mut worst_deficit = f64::NEG_INFINITY;
    let mut rng = tk::rng(6);
    for g in ["8", "2,4"] {
        let spec: GroupSpec = g.parse().unwrap();
        let ab = ab_of(&spec);
        for _ in 0..10 {
            let (w, c) = random_channel(&spec, &mut rng);
            let terms = tk::channel_terms(&ab, &w);
            let (grid, _) = tk::grid_optimum(&ab, &terms, false, 200);
            let got = icc::<f64>(&c, &SolverOptions::default())
                .unwrap()
                .value_bits();
            worst_gap = worst_gap.max((got - grid).abs());
            worst_deficit = worst_deficit.max(grid - got);
        }
    }
    Outcome {
        pass: worst_gap <= GAP && worst_deficit <= SLACK,
        detail: format!(
            "10 Z_8 + 10 Z_2+Z_4 channels at step 1/200, max gap {worst_gap:.2e} (tol {GAP:.0e}), max shortfall below grid {worst_deficit:.2e} (tol {SLACK:.0e})"
        ),
    }
}

fn monotone_and_coset_equal() -> Outcome {
    const TOL: f64 = 1e-10;
    let mut rng = tk::rng(7);
    let (mut mono, mut coset) = (0, 0);
    for g in ["4", "8"] {
        let spec: GroupSpec = g.parse().unwrap();
        let all = ThetaVector::all(&spec);
        for _ in 0..100 {
            let noise = tk::random_distribution(spec.order() as usize, &mut rng);
            let c = ChannelSpec::additive(spec.clone(), &noise).unwrap();
            let vals: Vec<f64> = all
                .iter()
                .map(|t| coset_mi_channel(&c, t).unwrap())
                .collect();
            for (s, vs) in all.iter().zip(&vals) {
                for (t, vt) in all.iter().zip(&vals) {
                    mono += usize::from(s.le(t) && *vt > vs + TOL);
                }
            }
            for t in &all {
                let per = per_coset_mi(&c, t).unwrap();
                coset += per.iter().filter(|v| (*v - per[0]).abs() > TOL).count();
            }
        }
    }
    Outcome {
        pass: mono == 0 && coset == 0,
        detail: format!("100 additive channels each on Z_4, Z_8: {mono} monotonicity and {coset} coset-equality violations (tol {TOL:.0e})"),
    }
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_agmi");
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../problems");
    let dir = std::env::temp_dir().join(format!("agmi-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("theta.csv");
    let csv = csv.to_str().unwrap();
    let runs: Vec<Vec<String>> = [
        vec!["group-info", "4,3,9,9"],
        vec![
            "capacity",
            "@z2_z4_channel.json",
            "--closed-form",
            "--grid-check",
            "0.05",
            "--csv",
            csv,
        ],
        vec!["capacity", "@z4_identity.json", "--exact"],
        vec!["rd", "@z4_source.json", "--nats"],
        vec![
            "theta-table",
            "8",
            "--support",
            "(2,2),(2,3)",
            "--weights",
            "0,0.4,0.6",
        ],
        vec!["verify-ensemble", "4", "--k", "0,1", "--n", "2"],
        vec!["verify-ensemble", "2,4", "--k", "1,1", "--sampled", "2000"],
        vec![
            "simulate",
            "@z4_merged_pair.json",
            "--k",
            "1,0",
            "--n",
            "3",
            "--trials",
            "300",
        ],
    ]
    .iter()
    .map(|args| {
        args.iter()
            .map(|a| {
                a.strip_prefix('@')
                    .map_or(a.to_string(), |f| format!("{root}/{f}"))
            })
            .collect()
    })
    .collect();
    let mut differing = Vec::new();
    let mut failed = Vec::new();
    for args in &runs {
        for json in [false, true] {
            let mut outputs = Vec::new();
            for _ in 0..2 {
                let mut cmd = Command::new(bin);
                cmd.args(["--seed", "17"]).args(args);
                if json {
                    cmd.arg("--json");
                }
                let out = cmd.output().unwrap();
                if !out.status.success() {
                    failed.push(args[0].clone());
                }
                let side = if args.iter().any(|a| a == csv) {
                    std::fs::read(csv).unwrap()
                } else {
                    vec![]
                };
                outputs.push((out.stdout, side));
            }
            if outputs[0] != outputs[1] {
                differing.push(format!("{}{}", args[0], if json { " --json" } else { "" }));
            }
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Outcome {
        pass: differing.is_empty() && failed.is_empty(),
        detail: format!(
            "{} invocations run twice: {} differ {:?}, {} failed {:?}",
            runs.len() * 2,
            differing.len(),
            differing,
            failed.len(),
            failed
        ),
    }
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        report(1, "field-case reduction", s(5), field_reduction),
        report(
            2,
            "single-ring closed forms",
            s(30),
            single_ring_closed_forms,
        ),
        report(3, "Z_2+Z_4 golden formulas", s(30), z2_z4_golden),
        report(4, "exact Theta/omega tables", s(5), exact_theta_tables),
        report(5, "ensemble lemma suite", s(60), ensemble_suite),
        report(6, "grid-oracle consistency", s(120), grid_oracle),
        report(
            7,
            "monotonicity and coset equality",
            s(30),
            monotone_and_coset_equal,
        ),
        report(8, "CLI determinism", s(60), cli_determinism),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
