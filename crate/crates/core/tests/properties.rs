//! Property-based checks of structural invariants.

use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::Rng;

use coalgp::genealogy::{build_interval_grid, coalescent_factor, extract_coalescent_data, parse_newick, CoalescentData, IntervalEnd};
use coalgp::gp::{KernelKind, LatentField, PointKind};
use coalgp::likelihood::{log_coalescent_likelihood, ne_from_f};
use coalgp::mcmc::{rj_log_acceptance_down, rj_log_acceptance_up, Draw};
use coalgp::rng::{stream, Component};
use coalgp::simulate::{simulate_time_transform, Schedule};
use coalgp::summary::{envelope, mrw, sre, summarize_draws, variation};
use coalgp::trajectory::Builtin;

fn sampled_data() -> impl Strategy<Value = CoalescentData> {
    (
        proptest::collection::vec((0.01f64..0.6, 1usize..4), 0..5),
        1usize..5,
        any::<u64>(),
    )
        .prop_map(|(later, first, seed)| {
            let mut times = vec![0.0];
            let mut counts = vec![first.max(if later.is_empty() { 2 } else { 1 })];
            let mut t = 0.0;
            for (gap, c) in later {
                t += gap;
                times.push(t);
                counts.push(c);
            }
            let schedule = Schedule::new(times.clone(), counts.clone()).unwrap();
            let mut rng = stream(seed, Component::Oracle, 0);
            let coal = simulate_time_transform(&schedule, &Builtin::Constant { value: 0.7 }, &mut rng).unwrap();
            CoalescentData::new(coal, times, counts).unwrap()
        })
}

/// Active lineages just before `t`, counted from the raw data.
fn lineages_at(d: &CoalescentData, t: f64) -> u64 {
    let sampled: usize = d
        .samp_times()
        .iter()
        .zip(d.samp_counts())
        .filter(|(s, _)| **s < t)
        .map(|(_, c)| *c)
        .sum();
    let merged = d.coalescent_events().iter().filter(|&&c| c < t).count();
    (sampled - merged) as u64
}

fn newick_tree() -> impl Strategy<Value = String> {
    (2usize..12, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = stream(seed, Component::Oracle, 1);
        let mut parts: Vec<String> = (0..n).map(|i| format!("T{i}")).collect();
        while parts.len() > 1 {
            let i = rng.random_range(0..parts.len());
            let a = parts.swap_remove(i);
            let j = rng.random_range(0..parts.len());
            let b = parts.swap_remove(j);
            let la = 0.01 + rng.random::<f64>();
            let lb = 0.01 + rng.random::<f64>();
            parts.push(format!("({a}:{la},{b}:{lb})"));
        }
        format!("{};", parts[0])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn interval_grid_partitions_the_genealogy(d in sampled_data()) {
        let grid = build_interval_grid(&d);
        let ivs = grid.intervals();
        prop_assert_eq!(ivs[0].start, 0.0);
        prop_assert_eq!(ivs.last().unwrap().end, d.tmrca());
        let total: f64 = ivs.iter().map(|iv| iv.len()).sum();
        prop_assert!((total - d.tmrca()).abs() <= 1e-12 * d.tmrca().max(1.0));
        for w in ivs.windows(2) {
            prop_assert_eq!(w[0].end, w[1].start);
        }
        let mut closes = 0;
        for iv in ivs {
            prop_assert!(iv.len() >= 0.0);
            prop_assert_eq!(iv.factor, coalescent_factor(iv.lineages).unwrap());
            prop_assert_eq!(iv.factor == 0, iv.lineages == 1);
            if iv.len() > 0.0 {
                prop_assert_eq!(iv.lineages, lineages_at(&d, 0.5 * (iv.start + iv.end)));
            }
            match iv.ends_with {
                IntervalEnd::Coalescence => {
                    closes += 1;
                    prop_assert!(d.coalescent_events().contains(&iv.end));
                    prop_assert!(iv.lineages >= 2);
                }
                IntervalEnd::Sampling => prop_assert!(d.samp_times().contains(&iv.end)),
            }
        }
        prop_assert_eq!(closes, d.num_tips() - 1);
        prop_assert_eq!(ivs.last().unwrap().lineages, 2);
        prop_assert_eq!(lineages_at(&d, d.tmrca() + 1.0), 1);
        if d.is_isochronous() {
            prop_assert_eq!(ivs.len(), d.num_tips() - 1);
        }
    }

    #[test]
    fn population_size_exceeds_the_floor(f in -60.0f64..60.0, lambda in 1e-3f64..1e3) {
        let ne = ne_from_f(f, lambda);
        prop_assert!(ne.is_finite());
        prop_assert!(ne >= 1.0 / lambda);
        if f < 30.0 {
            prop_assert!(ne > 1.0 / lambda);
        }
    }

    #[test]
    fn add_and_remove_are_exact_inverses(
        len in 1e-3f64..10.0,
        lambda in 1e-3f64..100.0,
        factor in 1u64..5000,
        m in 0usize..50,
        f in -20.0f64..20.0,
    ) {
        let up = rj_log_acceptance_up(len, lambda, factor as f64, m, f);
        let down = rj_log_acceptance_down(len, lambda, factor as f64, m + 1, f);
        prop_assert!((up + down).abs() < 1e-12);
    }

    #[test]
    fn field_stays_sorted_under_insertions(times in proptest::collection::vec(0.0f64..10.0, 1..40)) {
        let mut field = LatentField::observed(&[], Vec::new()).unwrap();
        for &t in &times {
            match field.search(t) {
                Ok(_) => prop_assert!(field.insert(t, 0.0, PointKind::Latent).is_err()),
                Err(_) => {
                    let idx = field.insert(t, t, PointKind::Latent).unwrap();
                    prop_assert_eq!(field.get(idx).0, t);
                }
            }
        }
        prop_assert!(field.times().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(field.times().iter().zip(field.values()).all(|(t, f)| t == f));
    }

    #[test]
    fn time_rescaling_shifts_the_log_likelihood(d in sampled_data(), a in 0.1f64..10.0, n0 in 0.2f64..5.0, r in -2.0f64..2.0) {
        let scaled = CoalescentData::new(
            d.coal_times().iter().map(|t| a * t).collect(),
            d.samp_times().iter().map(|t| a * t).collect(),
            d.samp_counts().to_vec(),
        ).unwrap();
        let base = log_coalescent_likelihood(&d, &Builtin::ExpGrowth { n0, rate: r }).unwrap();
        let res = log_coalescent_likelihood(&scaled, &Builtin::ExpGrowth { n0: a * n0, rate: r / a }).unwrap();
        let want = base - (d.num_tips() - 1) as f64 * a.ln();
        prop_assert!((res - want).abs() < 1e-9 * want.abs().max(1.0), "{} vs {}", res, want);
    }

    #[test]
    fn newick_round_trip(text in newick_tree()) {
        let g = parse_newick(&text).unwrap();
        let n = g.num_tips();
        prop_assert_eq!(g.internal_nodes().count(), n - 1);
        for node in g.internal_nodes() {
            for &c in &node.children {
                prop_assert!(node.height > g.nodes()[c].height);
            }
        }
        prop_assert!(g.tips().any(|t| t.height == 0.0));
        let again = parse_newick(&g.to_newick()).unwrap();
        let heights = |g: &coalgp::genealogy::Genealogy| {
            let mut h: Vec<(String, f64)> = g.tips().map(|t| (t.label.clone().unwrap(), t.height)).collect();
            h.sort_by(|a, b| a.0.cmp(&b.0));
            let mut inner: Vec<f64> = g.internal_nodes().map(|x| x.height).collect();
            inner.sort_by(f64::total_cmp);
            (h, inner)
        };
        let (ta, ia) = heights(&g);
        let (tb, ib) = heights(&again);
        prop_assert_eq!(ta.len(), tb.len());
        for (x, y) in ta.iter().zip(&tb) {
            prop_assert_eq!(&x.0, &y.0);
            prop_assert!((x.1 - y.1).abs() < 1e-12);
        }
        for (x, y) in ia.iter().zip(&ib) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let data = extract_coalescent_data(&g).unwrap();
        prop_assert_eq!(data.num_tips(), n);
        prop_assert_eq!(data.samp_counts().iter().sum::<usize>(), n);
    }

    #[test]
    fn metrics_match_a_direct_computation(
        rows in proptest::collection::vec((0.1f64..10.0, 0.0f64..3.0, 0.0f64..3.0, 0.1f64..10.0), 2..60),
    ) {
        let est: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let lo: Vec<f64> = rows.iter().map(|r| r.0 - r.1).collect();
        let hi: Vec<f64> = rows.iter().map(|r| r.0 + r.2).collect();
        let truth: Vec<f64> = rows.iter().map(|r| r.3).collect();
        let k = rows.len();
        let (mut s, mut w, mut c, mut v) = (0.0, 0.0, 0usize, 0.0);
        for i in 0..k {
            s += (est[i] - truth[i]).abs() / truth[i];
            w += (hi[i] - lo[i]) / truth[i];
            if lo[i] <= truth[i] && truth[i] <= hi[i] {
                c += 1;
            }
            if i > 0 {
                v += (est[i] - est[i - 1]).abs();
            }
        }
        let got = (sre(&est, &truth).unwrap(), mrw(&lo, &hi, &truth).unwrap(), envelope(&lo, &hi, &truth).unwrap(), variation(&est).unwrap());
        prop_assert!((got.0 - s).abs() < 1e-12 * s.max(1.0));
        prop_assert!((got.1 - w / k as f64).abs() < 1e-12 * w.max(1.0));
        prop_assert_eq!(got.2, c as f64 / k as f64);
        prop_assert!((got.3 - v).abs() < 1e-12 * v.max(1.0));
        prop_assert!(got.0 >= 0.0 && got.1 >= 0.0 && got.3 >= 0.0);
        prop_assert!((0.0..=1.0).contains(&got.2));
    }

    #[test]
    fn summary_bands_are_ordered(seed in any::<u64>(), ndraws in 1usize..30) {
        let mut rng = stream(seed, Component::Oracle, 2);
        let coal = [0.4, 1.0];
        let draws: Vec<Draw> = (0..ndraws)
            .map(|i| {
                let mut times = vec![0.2, 0.4, 0.7, 1.0];
                times.retain(|_| rng.random::<bool>());
                times.extend(coal);
                times.sort_by(f64::total_cmp);
                times.dedup();
                let theta = 0.1 + 5.0 * rng.random::<f64>();
                Draw {
                    iteration: i + 1,
                    theta,
                    log_theta: theta.ln(),
                    lambda: *[0.5, 2.0, 7.0].choose(&mut rng).unwrap(),
                    latent_count: times.len() - 2,
                    log_posterior: 0.0,
                    f: times.iter().map(|_| rng.random_range(-3.0..3.0)).collect(),
                    times,
                }
            })
            .collect();
        let grid: Vec<f64> = (0..25).map(|i| 0.05 * i as f64).collect();
        let s = summarize_draws(&draws, KernelKind::brownian(), 1.0, &grid, seed).unwrap();
        prop_assert_eq!(s.draws, ndraws);
        for i in 0..grid.len() {
            prop_assert!(s.lo95[i] > 0.0);
            prop_assert!(s.lo95[i] <= s.median[i] && s.median[i] <= s.hi95[i]);
            prop_assert_eq!(s.extrapolated[i], grid[i] > 1.0);
        }
    }
}
