use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use soilfuzz::hrb::{self, HrbOptions, PiSource, PresetKind};
use soilfuzz::round4;

const HEADER: &str = "id,p2mm,p425,p075,ll,pl";

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn soilfuzz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_soilfuzz"))
        .args(args)
        .env_remove("SOILFUZZ_PRESET_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = soilfuzz(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fixtures_csv() -> String {
    data("fixtures.csv").display().to_string()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn fixture_csv_matches_library_fixtures() {
    let text = fs::read_to_string(data("fixtures.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    let fixtures = hrb::paper_fixtures();
    assert_eq!(rows.len(), fixtures.len());
    for (row, fx) in rows.iter().zip(&fixtures) {
        let cells: Vec<&str> = row.split(',').collect();
        let s = &fx.sample;
        let nums: Vec<f64> = cells[1..6].iter().map(|c| c.parse().unwrap()).collect();
        assert_eq!(nums, [s.p2mm(), s.p425(), s.p075(), s.ll(), s.pl()]);
        assert_eq!(cells[6], fx.expected.as_str());
    }
}

#[test]
fn classify_paper_preset() {
    let out = ok(&["classify", &fixtures_csv()]);
    assert_eq!(column(&out, "winner"), ["A-2-6", "A-4", "A-7-6", "A-3", "A-6", "A-2-4"]);
    assert_eq!(column(&out, "score"), ["0.3556", "0.6333", "0.8000", "0.7200", "0.7556", "0.7667"]);
    assert_eq!(column(&out, "tie"), ["true", "false", "false", "false", "false", "false"]);
    assert_eq!(column(&out, "tied")[0], "A-2-6;A-2-7");
    assert_eq!(column(&out, "a7_ll")[2], "65");
    assert_eq!(column(&out, "a7_pi")[2], "40");
    assert_eq!(column(&out, "subgrade_rating")[3], "excellent to good");
}

#[test]
fn classify_crisp() {
    let out = ok(&["classify", "--crisp", &fixtures_csv()]);
    assert_eq!(column(&out, "winner"), ["A-2-6", "A-4", "A-7-6", "A-2-4", "A-6", "A-1-a"]);
    assert!(column(&out, "score").iter().all(String::is_empty));
}

#[test]
fn cli_winners_equal_library_winners() {
    let fixtures = hrb::paper_fixtures();
    for preset in ["paper", "calibrated"] {
        let kind: PresetKind = preset.parse().unwrap();
        let rb = hrb::preset(kind);
        for agg in ["min", "product", "mean"] {
            for src in ["pi", "pl"] {
                let out = ok(&["classify", "--preset", preset, "--agg", agg, "--pi-source", src, &fixtures_csv()]);
                let opts = HrbOptions { aggregator: agg.parse().unwrap(), pi_source: src.parse().unwrap() };
                let scores = column(&out, "score");
                for (i, (fx, winner)) in fixtures.iter().zip(column(&out, "winner")).enumerate() {
                    let rep = hrb::classify_hrb(&fx.sample, &rb, opts).unwrap();
                    assert_eq!(winner, rep.class, "{preset} {agg} {src} sample {}", fx.number);
                    assert_eq!(scores[i], format!("{:.4}", round4(rep.report.winner_score())));
                }
            }
        }
    }
}

#[test]
fn memberships_reproduce_published_tables() {
    let fixtures = hrb::paper_fixtures();
    for (idx, var) in [hrb::P2MM, hrb::P425, hrb::P075, hrb::LL, hrb::PI].into_iter().enumerate() {
        // the plasticity-index table is evaluated at the plastic limit
        let src = if var == hrb::PI { "pl" } else { "pi" };
        let out = ok(&["memberships", "--variable", var, "--pi-source", src, &fixtures_csv()]);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some(format!("# {var}").as_str()));
        let labels: Vec<String> = hrb::variables().get(var).unwrap().labels().map(str::to_string).collect();
        assert_eq!(lines.next().unwrap(), format!("id,{}", labels.join(",")));
        for (line, fx) in lines.zip(&fixtures) {
            let expected: Vec<String> = fx.memberships[idx].1.iter().map(|d| format!("{d:.4}")).collect();
            assert_eq!(line, format!("{},{}", fx.number, expected.join(",")), "{var}");
        }
    }
}

#[test]
fn memberships_all_variables_in_blocks() {
    let out = ok(&["memberships", &fixtures_csv()]);
    let blocks: Vec<&str> = out.split("\n\n").collect();
    assert_eq!(blocks.len(), 5);
    assert!(blocks[2].starts_with("# p075\nid,VVVL,"));
    assert!(blocks.iter().all(|b| b.trim_end().lines().count() == 8));
}

#[test]
fn membership_at_a_center_is_a_single_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "c.csv", &format!("{HEADER}\nc,100,90,25,40,15\n"));
    let out = ok(&["memberships", "--variable", "p075", &path]);
    assert_eq!(out.lines().nth(2).unwrap(), "c,0.0000,0.0000,0.0000,0.0000,0.0000,1.0000,0.0000,0.0000,0.0000,0.0000,0.0000");
}

#[test]
fn header_only_input_gives_an_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "empty.csv", &format!("{HEADER}\n"));
    let csv = ok(&["classify", &path]);
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("id,method,winner,"));
    assert_eq!(ok(&["classify", "--format", "json", &path]), "[]\n");
}

#[test]
fn row_errors_exit_four_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "bad.csv", &format!("{HEADER}\na,100,90,10,30,20\nb,50,60,10,30,20\nc,100,90,x,30,20\n"));
    let out = soilfuzz(&["classify", &path]);
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3 (id b): sieve monotonicity"), "{err}");
    assert!(err.contains("line 4 (id c): p075"), "{err}");

    let out = soilfuzz(&["classify", "--skip-bad-rows", &path]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(column(&stdout, "id"), ["a"]);
    assert!(String::from_utf8(out.stderr).unwrap().contains("warning: skipped line 3"));
}

#[test]
fn missing_pi_is_computed() {
    let dir = tempfile::tempdir().unwrap();
    let with = write(&dir, "with.csv", &format!("{HEADER},pi\n4,100,76,7,19,16,3\n"));
    let without = write(&dir, "without.csv", &format!("{HEADER},pi\n4,100,76,7,19,16,\n"));
    assert_eq!(ok(&["classify", "--format", "json", &with]), ok(&["classify", "--format", "json", &without]));
}

#[test]
fn exit_codes_per_error_family() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(soilfuzz(&["classify", "--agg", "median", &fixtures_csv()]).status.code(), Some(1));
    assert_eq!(soilfuzz(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(soilfuzz(&["--help"]).status.code(), Some(0));
    assert_eq!(soilfuzz(&["--version"]).status.code(), Some(0));

    let missing = dir.path().join("nope.csv").display().to_string();
    assert_eq!(soilfuzz(&["classify", &missing]).status.code(), Some(2));

    let rules = write(&dir, "bad.frules", "RULE R1: p2mm IS {VL} AND p2mm IS {Q} => A\nRULE R1: ll IS {} => A\n");
    let out = soilfuzz(&["classify", "--rules", &rules, &fixtures_csv()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("bad.frules:1:"), "{err}");
    assert!(err.contains("bad.frules:2:"), "{err}");

    let vars = write(&dir, "bad.vars", "p2mm 0..100 A=0 B=0\n");
    assert_eq!(soilfuzz(&["classify", "--vars", &vars, &fixtures_csv()]).status.code(), Some(3));

    let cols = write(&dir, "cols.csv", "id,p2mm,p425\n1,2,3\n");
    let out = soilfuzz(&["classify", &cols]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().contains("missing column `p075`"));
}

#[test]
fn rules_command_prints_canonical_form() {
    let out = ok(&["rules", "--preset", "calibrated"]);
    assert_eq!(out, soilfuzz::dsl::serialize(&hrb::preset(PresetKind::Calibrated)));
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "r.frules", &out);
    assert_eq!(ok(&["rules", "--rules", &path]), out);
    let json: serde_json::Value = serde_json::from_str(&ok(&["rules", "--format", "json"])).unwrap();
    assert_eq!(json["rules"].as_array().unwrap().len(), 11);
}

#[test]
fn preset_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    // a one-rule base that always says A-4
    write(&dir, "hrb-paper.frules", "RULE R1: p2mm IS {VL, L, M, H, VH} => A-4\n");
    let out = Command::new(env!("CARGO_BIN_EXE_soilfuzz"))
        .args(["classify", &fixtures_csv()])
        .env("SOILFUZZ_PRESET_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(column(&stdout, "winner").iter().all(|w| w == "A-4"));
    // the calibrated preset is not in the directory and stays built in
    let out = Command::new(env!("CARGO_BIN_EXE_soilfuzz"))
        .args(["classify", "--preset", "calibrated", &fixtures_csv()])
        .env("SOILFUZZ_PRESET_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(column(&String::from_utf8(out.stdout).unwrap(), "winner")[5], "A-1-a");
}

#[test]
fn induce_reaches_training_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("induced.frules");
    let out = soilfuzz(&["induce", "--seed", "2024", "--iters", "2000", &fixtures_csv(), "-o", out_path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&out_path).unwrap();
    let acc: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("# training accuracy "))
        .and_then(|l| l.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(acc >= 0.8333, "{acc}");

    // the written base classifies the fixtures as well as reported
    let classified = ok(&["classify", "--rules", out_path.to_str().unwrap(), &fixtures_csv()]);
    let expected = ["A-2-6", "A-4", "A-7-6", "A-3", "A-6", "A-1-a"];
    let hits = column(&classified, "winner").iter().zip(expected).filter(|(w, e)| w == e).count();
    assert_eq!(round4(hits as f64 / 6.0), acc);
}

#[test]
fn induce_zero_iterations_reports_initial_base() {
    let out: serde_json::Value =
        serde_json::from_str(&ok(&["induce", "--seed", "7", "--iters", "0", "--format", "json", &fixtures_csv()])).unwrap();
    assert_eq!(out["accuracy"], out["initial_accuracy"]);
    assert_eq!(out["accepted"], 0);
    assert!(out["rules"].as_str().unwrap().starts_with("CLASSES A-2-6, A-4, A-7, A-3, A-6, A-1-a\n"));
}

#[test]
fn induce_requires_class_column_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(&dir, "u.csv", &format!("{HEADER}\n1,100,100,30,32,21\n"));
    let out = soilfuzz(&["induce", "--seed", "1", &path]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().contains("missing column `class`"));
    assert_eq!(soilfuzz(&["induce", &fixtures_csv()]).status.code(), Some(1));
}

#[test]
fn output_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    // enough rows for the parallel path to interleave
    let mut text = format!("{HEADER}\n");
    for i in 0..500 {
        let p2 = 40.0 + (i % 60) as f64;
        let p4 = p2 * 0.8;
        text.push_str(&format!("s{i},{p2},{p4},{},{},{}\n", p4 * 0.5, 20 + i % 50, 10 + i % 15));
    }
    let path = write(&dir, "many.csv", &text);
    for args in [
        vec!["classify", "--format", "json", &path],
        vec!["classify", &path],
        vec!["memberships", "--format", "json", &path],
        vec!["induce", "--seed", "3", "--iters", "50", &fixtures_csv()],
    ] {
        let a = soilfuzz(&args).stdout;
        assert!(!a.is_empty());
        assert_eq!(a, soilfuzz(&args).stdout, "{args:?}");
    }
    let ids = column(&ok(&["classify", &path]), "id");
    assert_eq!(ids, (0..500).map(|i| format!("s{i}")).collect::<Vec<_>>());
}

#[test]
fn json_key_order_follows_the_report() {
    let out = ok(&["classify", "--format", "json", &fixtures_csv()]);
    let keys = ["\"id\"", "\"method\"", "\"winner\"", "\"subgrade_rating\"", "\"score\"", "\"tie\"", "\"tied\"", "\"scores\"", "\"a7\""];
    let first = &out[..out.find("\"a7\"").unwrap() + 4];
    let pos: Vec<usize> = keys.iter().map(|k| first.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[2]["a7"]["ll"], 65.0);
    assert_eq!(v[2]["winner"], "A-7-6");
}

#[test]
fn pi_source_changes_only_the_pi_input() {
    let fx = &hrb::paper_fixtures()[4];
    let m = hrb::fuzzify_sample(&fx.sample, PiSource::Pl);
    let out = ok(&["memberships", "--variable", "pi", "--pi-source", "pl", "--format", "json", &fixtures_csv()]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v[0]["rows"][4]["input"], 10.0);
    assert_eq!(v[0]["rows"][4]["degrees"][2].as_f64().unwrap(), m.get("pi").unwrap().get("LM").unwrap());
}
