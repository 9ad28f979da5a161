//! Independent checks of the derived centers and of rule evaluation.

use soilfuzz::hrb::{self, HrbOptions, PiSource, PresetKind};
use soilfuzz::rules::{classify, rule_dof, score_rulebase, Aggregator};

/// Two points on one linear edge: solve for the edge's feet. Returns the
/// centers `(lower, upper)` where the membership of the upper descriptor is
/// zero and one.
fn solve_edge((x1, t1): (f64, f64), (x2, t2): (f64, f64)) -> (f64, f64) {
    let width = (x1 - x2) / (t1 - t2);
    let lower = x1 - t1 * width;
    (lower, lower + width)
}

/// One point on a rising edge with a known upper center.
fn solve_lower(x: f64, t: f64, upper: f64) -> f64 {
    (x - t * upper) / (1.0 - t)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 0.05
}

#[test]
fn centers_follow_from_published_memberships() {
    let vars = hrb::variables();
    let c = |v: &str, label: &str| {
        let var = vars.get(v).unwrap();
        var.centers()[var.index_of(label).unwrap()]
    };

    // p425: VH at 80 is 0.2, at 76 it is 0.04
    let (h, vh) = solve_edge((80.0, 0.2), (76.0, 0.04));
    assert!(close(h, c("p425", "H")) && close(vh, c("p425", "VH")), "{h} {vh}");
    // p425 = 30 sits exactly on LM
    assert_eq!(c("p425", "LM"), 30.0);

    // p075: VVVH at 92 is 0.7333, at 78 it is 0.2667
    let (vvh, vvvh) = solve_edge((92.0, 0.7333), (78.0, 0.2667));
    assert!(close(vvh, c("p075", "VVH")) && close(vvvh, c("p075", "VVVH")), "{vvh} {vvvh}");
    // single-degree rows pin MH and VH
    assert_eq!(c("p075", "MH"), 30.0);
    assert_eq!(c("p075", "VH"), 40.0);
    // uniform low ladder k*d: 7 -> VL 0.4 on the VVL..VL edge => d + 0.4 d = 7
    let d = 7.0 / 1.4;
    assert!(close(d, c("p075", "VVL")) && close(2.0 * d, c("p075", "VL")));
    // and 11 -> L 0.2 on the VL..L edge
    assert!(close(2.0 * d + 0.2 * d, 11.0));

    // ll: LM at 25 is 0.5, at 23 it is 0.3
    let (l, lm) = solve_edge((25.0, 0.5), (23.0, 0.3));
    assert!(close(l, c("ll", "L")) && close(lm, c("ll", "LM")), "{l} {lm}");
    // M at 32 is 0.2, at 34 it is 0.4
    let (lm2, m) = solve_edge((32.0, 0.2), (34.0, 0.4));
    assert!(close(lm2, c("ll", "LM")) && close(m, c("ll", "M")), "{lm2} {m}");
    // L at 19 is 0.9 with L = 20 known
    let vl = solve_lower(19.0, 0.9, l);
    assert!(close(vl, c("ll", "VL")), "{vl}");
    // H at 65 is 0.6667: only the MH/H pair is constrained
    let (mh, hh) = (c("ll", "MH"), c("ll", "H"));
    assert!(close((65.0 - mh) / (hh - mh), 0.6667));

    // pi evaluated at the plastic limit: 10 -> LM 1, 25 -> M 1, 21 -> M 0.7333
    assert_eq!(c("pi", "LM"), 10.0);
    assert_eq!(c("pi", "M"), 25.0);
    let (lm, m) = solve_edge((21.0, 0.7333), (16.0, 0.4));
    assert!(close(lm, 10.0) && close(m, 25.0), "{lm} {m}");

    // p2mm: H at 38 is 0.96 under the 12.5-wide ladder
    let (h, vh) = solve_edge((38.0, 0.04), (37.5, 0.0));
    assert!(close(h, c("p2mm", "H")) && close(vh, c("p2mm", "VH")), "{h} {vh}");
}

/// Hand evaluation: max membership over each antecedent's set, then mean.
fn hand_mean(matches: &[f64]) -> f64 {
    matches.iter().sum::<f64>() / matches.len() as f64
}

#[test]
fn r11_on_sample_three() {
    let fx = &hrb::paper_fixtures()[2];
    let m = hrb::fuzzify_sample(&fx.sample, PiSource::Pi);
    let rb = hrb::preset(PresetKind::Paper);
    // p075 {VH, VVH, VVVH}: max(0, 0.2667, 0.7333); ll {MH..VVH}: max(0.3333, 0.6667); pi=40 on MH: 1
    let expected = hand_mean(&[22.0 / 30.0, 10.0 / 15.0, 1.0]);
    let got = rule_dof(rb.rule("R11").unwrap(), &m, Aggregator::Mean).unwrap();
    assert!((got - expected).abs() < 1e-12);
    assert!((got - 0.8).abs() < 1e-12);
}

#[test]
fn brute_force_winners_for_paper_preset() {
    // every DOF is recomputed by hand from the membership vectors
    let rb = hrb::preset(PresetKind::Paper);
    let expected = [("A-2-6", 0.3556), ("A-4", 0.6333), ("A-7", 0.8), ("A-3", 0.72), ("A-6", 0.7556), ("A-2-4", 0.7667)];
    for (fx, (class, score)) in hrb::paper_fixtures().iter().zip(expected) {
        let m = hrb::fuzzify_sample(&fx.sample, PiSource::Pi);
        let mut best: Vec<(String, f64)> = Vec::new();
        for rule in rb.rules() {
            let matches: Vec<f64> = rule
                .antecedents
                .iter()
                .map(|a| {
                    let mv = m.get(&a.variable).unwrap();
                    a.labels.iter().map(|l| mv.get(l).unwrap()).fold(0.0, f64::max)
                })
                .collect();
            best.push((rule.consequent.clone(), hand_mean(&matches)));
        }
        let top = best.iter().map(|b| b.1).fold(0.0, f64::max);
        // first class in class order reaching the top score
        let winner = rb
            .class_order()
            .iter()
            .find(|c| best.iter().any(|(bc, s)| bc == *c && (s - top).abs() < 1e-12))
            .unwrap();
        assert_eq!(winner, class, "sample {}", fx.number);
        assert!((top - score).abs() < 1e-4, "sample {}: {top}", fx.number);

        let rep = classify(&rb, &m, Aggregator::Mean).unwrap();
        assert_eq!(&rep.winner, winner);
        assert!((rep.winner_score() - top).abs() < 1e-12);
    }
}

#[test]
fn min_and_product_zero_out_sample_one() {
    let rb = hrb::preset(PresetKind::Paper);
    let m = hrb::fuzzify_sample(&hrb::paper_fixtures()[0].sample, PiSource::Pi);
    for agg in [Aggregator::Minimum, Aggregator::Product] {
        let rep = classify(&rb, &m, agg).unwrap();
        assert!(rep.scores.iter().all(|s| s.score == 0.0), "{agg}");
        assert_eq!(rep.winner, "A-1-a");
        assert!(rep.tie);
    }
}

#[test]
fn paper_preset_training_accuracy() {
    let rb = hrb::preset(PresetKind::Paper);
    let labeled: Vec<_> = hrb::paper_fixtures()
        .iter()
        .map(|fx| (hrb::fuzzify_sample(&fx.sample, PiSource::Pi), fx.expected.rule_class().to_string()))
        .collect();
    let acc = score_rulebase(&rb, &labeled, Aggregator::Mean).unwrap();
    assert!((acc - 5.0 / 6.0).abs() < 1e-12);
}

#[test]
fn classify_hrb_matches_the_generic_engine() {
    for kind in [PresetKind::Paper, PresetKind::Calibrated] {
        let rb = hrb::preset(kind);
        for fx in hrb::paper_fixtures() {
            let rep = hrb::classify_hrb(&fx.sample, &rb, HrbOptions::default()).unwrap();
            let generic = classify(&rb, &hrb::fuzzify_sample(&fx.sample, PiSource::Pi), Aggregator::Mean).unwrap();
            assert_eq!(rep.report, generic);
            assert_eq!(rep.subgroup.unwrap().rule_class(), generic.winner);
        }
    }
}
