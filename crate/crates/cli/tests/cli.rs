//! End-to-end runs of the installed binary: every exit code path, plus the
//! determinism contract (same seeds, same bytes).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bellows_core::flex::bricard_octahedron;
use bellows_core::geometry::{normalize_sphere, Configuration, QuadricPoint, Space};
use bellows_core::gram::GramMatrix;
use bellows_core::polyhedra::{octahedron, tetrahedron_boundary, EdgeLengths};
use bellows_core::rng::{campaign_rng, standard_normal};
use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bellows"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Fresh per-test scratch directory under the target-adjacent temp root.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bellows-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).expect("scratch dir");
    dir
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).expect("fixture write");
}

fn write_value(path: &Path, value: &Value) {
    write(path, &serde_json::to_string(value).expect("serialize"));
}

fn write_fixture<T: serde::Serialize>(path: &Path, value: &T) {
    write(path, &serde_json::to_string(value).expect("serialize"));
}

fn clustered_sphere(m: usize, scale: f64, seed: u64) -> Configuration {
    let mut rng = campaign_rng(seed);
    let points: Vec<QuadricPoint> = (0..m)
        .map(|_| {
            let coords: Vec<f64> = std::iter::once(1.0)
                .chain((0..3).map(|_| scale * standard_normal(&mut rng)))
                .collect();
            normalize_sphere(&coords).expect("on quadric")
        })
        .collect();
    Configuration::new(points).expect("configuration")
}

// ---------------------------------------------------------------- collapse

#[test]
fn collapse_full_simplex_reaches_a_point() {
    let dir = scratch("collapse-ok");
    let input = dir.join("in.json");
    let gram = GramMatrix::uniform_logmag(5, -3.0);
    write_value(
        &input,
        &json!({
            "m": 5,
            "maximal": [[1, 2, 3, 4, 5]],
            "gram": serde_json::to_value(&gram).unwrap(),
            "r": 1,
        }),
    );
    let out_path = dir.join("cert.json");
    let out = run(&[
        "collapse",
        "--input",
        input.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let cert: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(cert["schema"], "bellows/1");
    assert_eq!(cert["residual_dim"], 0);
    assert_eq!(cert["replay_ok"], true);
    assert_eq!(cert["manifest"]["command"], "collapse");
    // A full simplex on five vertices collapses below dimension 1 in pairs:
    // 2^5 - 1 = 31 nonempty simplices, 5 vertices kept, 26 removed = 13 pairs
    // plus the 13 unscheduled facets... the step count is just checked sane.
    assert!(cert["step_count"].as_u64().unwrap() > 0);
}

#[test]
fn collapse_hypothesis_violation_exits_two_with_witness() {
    let dir = scratch("collapse-hyp");
    let input = dir.join("in.json");
    let gram = GramMatrix::uniform_logmag(3, -3.0);
    write_value(
        &input,
        &json!({
            "m": 3,
            "maximal": [[1, 2], [1, 3], [2, 3]],
            "gram": serde_json::to_value(&gram).unwrap(),
            "r": 1,
        }),
    );
    let out = run(&["collapse", "--input", input.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    assert!(
        stderr_text(&out).contains("share their largest facet"),
        "witness missing: {}",
        stderr_text(&out)
    );
}

#[test]
fn collapse_malformed_json_exits_one() {
    let dir = scratch("collapse-bad");
    let input = dir.join("in.json");
    write(&input, "{\"m\": 5, \"maximal\": [[1,2,");
    let out = run(&["collapse", "--input", input.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn collapse_missing_file_exits_one() {
    let out = run(&["collapse", "--input", "/nonexistent/nope.json"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn collapse_needs_a_threshold_from_somewhere() {
    let dir = scratch("collapse-nor");
    let input = dir.join("in.json");
    let gram = GramMatrix::uniform_logmag(3, -3.0);
    write_value(
        &input,
        &json!({
            "m": 3,
            "maximal": [[1, 2, 3]],
            "gram": serde_json::to_value(&gram).unwrap(),
        }),
    );
    let out = run(&["collapse", "--input", input.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    let out = run(&["collapse", "--input", input.to_str().unwrap(), "--r", "1"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
}

// ---------------------------------------------------------------- kappa

#[test]
fn kappa_accepts_randgram_output_directly() {
    let dir = scratch("kappa");
    let gram_path = dir.join("g.json");
    let out = run(&[
        "randgram",
        "--m",
        "6",
        "--rank",
        "3",
        "--seed",
        "5",
        "--out",
        gram_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let out = run(&["kappa", "--input", gram_path.to_str().unwrap(), "--r", "2"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["m"], 6);
    assert_eq!(report["gap_ok"], true);
    let log2_kappa = report["log2_kappa"].as_f64().unwrap();
    assert!(log2_kappa < 0.0 && log2_kappa > -2.0 * 36.0 * 3.0);
}

#[test]
fn kappa_accepts_a_bare_gram_file() {
    let dir = scratch("kappa-bare");
    let gram_path = dir.join("g.json");
    write_fixture(&gram_path, &GramMatrix::uniform_logmag(4, -20.0));
    let out = run(&["kappa", "--input", gram_path.to_str().unwrap(), "--r", "1"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    // Every pair sits far below the first feasible gap: all six edges close.
    assert_eq!(report["edge_count"], 6);
}

// ---------------------------------------------------------------- thm51

#[test]
fn thm51_small_campaign_passes_and_writes_manifested_csv() {
    let dir = scratch("thm51");
    let csv_path = dir.join("results.csv");
    let out = run(&[
        "thm51",
        "--m",
        "8",
        "--rank",
        "3",
        "--r",
        "2",
        "--trials",
        "10",
        "--seed",
        "3",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.lines().skip(1).all(|line| line.contains(",pass,")));
    let manifest_path = dir.join("results.csv.manifest.json");
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["command"], "thm51");
    assert_eq!(manifest["seed"], 3);
}

#[test]
fn thm51_rank_above_twice_r_is_a_usage_error() {
    let out = run(&["thm51", "--m", "8", "--rank", "5", "--r", "2", "--trials", "1"]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr_text(&out).contains("2r"));
}

#[test]
fn thm51_zero_trials_pass_vacuously() {
    let out = run(&["thm51", "--trials", "0"]);
    assert_eq!(exit_code(&out), 0);
    let csv = String::from_utf8_lossy(&out.stdout);
    assert_eq!(csv.lines().count(), 1, "header only: {csv}");
}

#[test]
fn thm51_reruns_are_byte_identical() {
    let dir = scratch("thm51-det");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "thm51",
            "--m",
            "8",
            "--rank",
            "3",
            "--trials",
            "6",
            "--seed",
            "41",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let ma = fs::read(dir.join("a.csv.manifest.json")).unwrap();
    let mb = fs::read(dir.join("b.csv.manifest.json")).unwrap();
    assert_eq!(ma, mb);
}

// ---------------------------------------------------------------- volumes

#[test]
fn simplex_volume_on_a_small_spherical_tuple() {
    let dir = scratch("simplex-vol");
    let config_path = dir.join("c.json");
    write_fixture(&config_path, &clustered_sphere(4, 0.05, 9));
    let out = run(&["simplex-volume", "--config", config_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["space"], "sphere");
    assert_eq!(report["n"], 3);
    let v = report["volume"]["value"].as_f64().unwrap();
    assert!(v.is_finite() && v.abs() < 1.0);
    assert_eq!(report["volume"]["tolerance_met"], true);
}

#[test]
fn simplex_volume_monte_carlo_runs() {
    let dir = scratch("simplex-mc");
    let config_path = dir.join("c.json");
    write_fixture(&config_path, &clustered_sphere(4, 0.05, 9));
    let out = run(&[
        "simplex-volume",
        "--config",
        config_path.to_str().unwrap(),
        "--method",
        "monte-carlo",
        "--samples",
        "20000",
        "--seed",
        "4",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
}

#[test]
fn simplex_volume_rejects_an_inadmissible_tuple() {
    let dir = scratch("simplex-omega");
    let config_path = dir.join("c.json");
    // Two points more than a quarter circle apart violate the admissibility
    // cone; the kernel refuses rather than integrating a divergent phase.
    let far = normalize_sphere(&[-0.3, 1.0, 0.0, 0.0]).unwrap();
    let mut points = clustered_sphere(3, 0.01, 2).points().to_vec();
    points.push(far);
    write_fixture(&config_path, &Configuration::new(points).unwrap());
    let out = run(&["simplex-volume", "--config", config_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr_text(&out));
}

#[test]
fn simplex_volume_bad_json_exits_one() {
    let dir = scratch("simplex-bad");
    let config_path = dir.join("c.json");
    write(&config_path, "[not json");
    let out = run(&["simplex-volume", "--config", config_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn poly_volume_runs_both_pipelines_on_the_tetrahedron() {
    let dir = scratch("poly-vol");
    let poly_path = dir.join("p.json");
    let config_path = dir.join("c.json");
    write_fixture(&poly_path, &tetrahedron_boundary());
    write_fixture(&config_path, &clustered_sphere(4, 0.002, 17));
    let chain = run(&[
        "poly-volume",
        "--poly",
        poly_path.to_str().unwrap(),
        "--config",
        config_path.to_str().unwrap(),
        "--pipeline",
        "chain",
    ]);
    assert_eq!(exit_code(&chain), 0, "stderr: {}", stderr_text(&chain));
    let chain_report: Value = serde_json::from_slice(&chain.stdout).unwrap();
    let v = chain_report["volume"]["value"].as_f64().unwrap();

    let collapse = run(&[
        "poly-volume",
        "--poly",
        poly_path.to_str().unwrap(),
        "--config",
        config_path.to_str().unwrap(),
        "--pipeline",
        "collapse",
    ]);
    assert_eq!(exit_code(&collapse), 0, "stderr: {}", stderr_text(&collapse));
    let collapse_report: Value = serde_json::from_slice(&collapse.stdout).unwrap();
    let phi = collapse_report["phi"]["re"].as_f64().unwrap();
    assert!(
        (v - phi).abs() <= 1e-6 * v.abs().max(1e-300),
        "chain {v} vs collapse {phi}"
    );
}

#[test]
fn poly_volume_far_vertex_breaks_the_chart_and_exits_two() {
    let dir = scratch("poly-far");
    let poly_path = dir.join("p.json");
    let config_path = dir.join("c.json");
    write_fixture(&poly_path, &tetrahedron_boundary());
    let mut points = clustered_sphere(3, 0.0005, 23).points().to_vec();
    points.push(normalize_sphere(&[0.17, 0.0, 0.0, 1.0]).unwrap());
    write_fixture(&config_path, &Configuration::new(points).unwrap());
    let out = run(&[
        "poly-volume",
        "--poly",
        poly_path.to_str().unwrap(),
        "--config",
        config_path.to_str().unwrap(),
        "--pipeline",
        "collapse",
    ]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr_text(&out));
    assert!(stderr_text(&out).contains("not close"), "{}", stderr_text(&out));
}

#[test]
fn poly_volume_wide_spherical_polyhedron_exits_two() {
    let dir = scratch("poly-wide");
    let poly_path = dir.join("p.json");
    let config_path = dir.join("c.json");
    write_fixture(&poly_path, &tetrahedron_boundary());
    let points = vec![
        normalize_sphere(&[1.0, 0.0, 0.0, 0.0]).unwrap(),
        normalize_sphere(&[0.0, 1.0, 0.0, 0.0]).unwrap(),
        normalize_sphere(&[1.0, 0.05, 0.0, 0.0]).unwrap(),
        normalize_sphere(&[1.0, 0.0, 0.05, 0.0]).unwrap(),
    ];
    write_fixture(&config_path, &Configuration::new(points).unwrap());
    let out = run(&[
        "poly-volume",
        "--poly",
        poly_path.to_str().unwrap(),
        "--config",
        config_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_text(&out).contains("diameter"), "{}", stderr_text(&out));
}

// ---------------------------------------------------------------- flexions

#[test]
fn flex_bundle_feeds_bellows_verification() {
    let dir = scratch("flex-ok");
    let (poly, lengths, start) = bricard_octahedron(Space::Sphere, 0.05, 0.3, 11).unwrap();
    let poly_path = dir.join("p.json");
    let lengths_path = dir.join("l.json");
    let config_path = dir.join("c.json");
    write_fixture(&poly_path, &poly);
    write_fixture(&lengths_path, &lengths);
    write_fixture(&config_path, &start);
    let bundle_path = dir.join("bundle.json");
    let csv_path = dir.join("trace.csv");
    let out = run(&[
        "flex",
        "--poly",
        poly_path.to_str().unwrap(),
        "--lengths",
        lengths_path.to_str().unwrap(),
        "--config",
        config_path.to_str().unwrap(),
        "--steps",
        "12",
        "--h",
        "2e-3",
        "--out",
        bundle_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("t,residual,volume,dihedral\n"));
    assert_eq!(csv.lines().count(), 14);

    let verify = run(&["bellows", "--trace", bundle_path.to_str().unwrap()]);
    assert_eq!(exit_code(&verify), 0, "stderr: {}", stderr_text(&verify));
    let report: Value = serde_json::from_slice(&verify.stdout).unwrap();
    assert_eq!(report["report"]["passed"], true);
    assert_eq!(report["space"], "sphere");
}

#[test]
fn flex_on_a_rigid_configuration_exits_two() {
    let dir = scratch("flex-rigid");
    let poly = octahedron();
    let config = clustered_sphere(6, 0.25, 31);
    let lengths = EdgeLengths::measured(&poly, &config).unwrap();
    let poly_path = dir.join("p.json");
    let lengths_path = dir.join("l.json");
    let config_path = dir.join("c.json");
    write_fixture(&poly_path, &poly);
    write_fixture(&lengths_path, &lengths);
    write_fixture(&config_path, &config);
    let out = run(&[
        "flex",
        "--poly",
        poly_path.to_str().unwrap(),
        "--lengths",
        lengths_path.to_str().unwrap(),
        "--config",
        config_path.to_str().unwrap(),
        "--steps",
        "3",
    ]);
    assert_eq!(exit_code(&out), 2, "stderr: {}", stderr_text(&out));
    assert!(stderr_text(&out).contains("flex direction"), "{}", stderr_text(&out));
}

#[test]
fn bellows_construct_defaults_pass_and_print_the_caveat() {
    let dir = scratch("bellows-ok");
    let report_path = dir.join("report.json");
    let out = run(&[
        "bellows",
        "--steps",
        "10",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let report: Value = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["report"]["passed"], true);
    assert!(report["report"]["caveat"]
        .as_str()
        .unwrap()
        .contains("2^(-252)"));
    assert!(report["report"]["dihedral_spread"].as_f64().unwrap() > 0.1);
    assert!(report["report"]["volume_spread"].as_f64().unwrap() < 1e-6);
}

#[test]
fn bellows_hyperbolic_construction_passes() {
    let out = run(&["bellows", "--space", "hyperbolic", "--steps", "10"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
}

#[test]
fn bellows_zero_steps_is_not_a_flexion() {
    let out = run(&["bellows", "--steps", "0"]);
    assert_eq!(exit_code(&out), 3, "stderr: {}", stderr_text(&out));
    assert!(stderr_text(&out).contains("not a flexion"));
}

#[test]
fn bellows_corrupted_trace_fails_verification() {
    let dir = scratch("bellows-corrupt");
    let bundle_path = dir.join("bundle.json");
    let out = run(&[
        "bellows",
        "--steps",
        "6",
        "--trace-out",
        bundle_path.to_str().unwrap(),
        "--out",
        dir.join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr_text(&out));
    let mut bundle: Value =
        serde_json::from_str(&fs::read_to_string(&bundle_path).unwrap()).unwrap();
    bundle["trace"]["samples"][3]["volume"] = json!(1.0e-3);
    write_value(&bundle_path, &bundle);
    let verify = run(&["bellows", "--trace", bundle_path.to_str().unwrap()]);
    assert_eq!(exit_code(&verify), 2, "stderr: {}", stderr_text(&verify));
    assert!(stderr_text(&verify).contains("volume spread"));
}

#[test]
fn bellows_reruns_are_byte_identical() {
    let dir = scratch("bellows-det");
    for tag in ["a", "b"] {
        let out = run(&[
            "bellows",
            "--steps",
            "8",
            "--seed",
            "11",
            "--out",
            dir.join(format!("{tag}.json")).to_str().unwrap(),
            "--trace-out",
            dir.join(format!("{tag}-bundle.json")).to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0);
    }
    assert_eq!(
        fs::read(dir.join("a.json")).unwrap(),
        fs::read(dir.join("b.json")).unwrap()
    );
    assert_eq!(
        fs::read(dir.join("a-bundle.json")).unwrap(),
        fs::read(dir.join("b-bundle.json")).unwrap()
    );
}

// ---------------------------------------------------------------- randgram

#[test]
fn randgram_output_parses_as_a_gram_matrix() {
    let dir = scratch("randgram");
    let path = dir.join("g.json");
    let out = run(&[
        "randgram",
        "--m",
        "7",
        "--rank",
        "2",
        "--seed",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let value: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let gram: GramMatrix = serde_json::from_value(value["gram"].clone()).unwrap();
    assert_eq!(gram.m(), 7);
    assert_eq!(gram.numerical_rank(), Some(2));
}

#[test]
fn randgram_rank_above_m_is_a_usage_error() {
    let out = run(&["randgram", "--m", "3", "--rank", "5"]);
    assert_eq!(exit_code(&out), 1);
}

// ---------------------------------------------------------------- clap paths

#[test]
fn help_and_version_exit_zero() {
    for args in [&["--help"][..], &["--version"][..], &["flex", "--help"][..]] {
        let out = run(args);
        assert_eq!(exit_code(&out), 0, "args {args:?}");
    }
}

#[test]
fn unknown_subcommand_and_missing_args_exit_one() {
    for args in [&["frobnicate"][..], &[][..], &["flex"][..]] {
        let out = run(args);
        assert_eq!(exit_code(&out), 1, "args {args:?}");
    }
}
