use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command, Stdio};

use league_stats::cli::{run, EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use serde_json::Value;

struct Output {
    code: i32,
    stdout: Vec<u8>,
    stderr: String,
}

fn call(args: &[&str], stdin: &[u8]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("league-stats").chain(args.iter().copied());
    let code = run(argv, &mut &stdin[..], &mut out, &mut err);
    Output {
        code,
        stdout: out,
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(o: &Output) -> Value {
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    serde_json::from_slice(&o.stdout).unwrap()
}

fn simulated(extra: &[&str]) -> Vec<u8> {
    let mut args = vec!["simulate", "--seed", "42"];
    args.extend_from_slice(extra);
    let o = call(&args, b"");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    o.stdout
}

#[test]
fn describe_emits_versioned_json() {
    let data = simulated(&["--teams", "6", "--n-seasons", "2", "--home", "1"]);
    let v = json(&call(&["describe"], &data));
    assert_eq!(v["schema"], 1);
    assert_eq!(v["metadata"]["command"], "describe");
    assert_eq!(v["metadata"]["input"]["sha256"].as_str().unwrap().len(), 64);
    let stats = &v["results"]["match_statistics"];
    assert_eq!(stats["n_matches"], 60);
    for k in [
        "mean_total",
        "mean_home",
        "mean_away",
        "home_advantage",
        "p_home_win",
        "p_draw",
    ] {
        assert!(stats[k].is_number(), "{k}");
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let data = simulated(&["--teams", "8", "--n-seasons", "3", "--fitness-sd", "2"]);
    let a = call(&["report"], &data);
    let b = call(&["report"], &data);
    assert_eq!(a.code, EXIT_OK, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    // floats are written with 17 significant digits
    let text = String::from_utf8(a.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let h = v["results"]["describe"]["match_statistics"]["mean_total"]
        .as_f64()
        .unwrap();
    assert!(text.contains(&format!("{h:.16e}")));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = call(&["describe", "--no-such-flag"], b"");
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("Usage"), "{}", o.stderr);
    assert_eq!(call(&[], b"").code, EXIT_USAGE);
    assert_eq!(call(&["predict", "--home-adv", "sometimes"], b"").code, EXIT_USAGE);
    assert_eq!(call(&["--help"], b"").code, EXIT_OK);
}

#[test]
fn invalid_data_exits_with_two() {
    let o = call(
        &["describe"],
        b"season,match_day,home,away,goals_home,goals_away\n1,1,A,B,3,x\n",
    );
    assert_eq!(o.code, EXIT_DATA);
    assert!(o.stderr.contains("line 2"), "{}", o.stderr);
    assert_eq!(call(&["describe"], b"").code, EXIT_DATA);
    assert_eq!(
        call(&["describe", "--input", "/nonexistent/league.csv"], b"").code,
        EXIT_DATA
    );
}

#[test]
fn numerical_failure_exits_with_three() {
    // every match drawn: all season goal differences are zero
    let mut csv = String::new();
    for (d, (h, a)) in [("A", "B"), ("C", "D"), ("B", "A"), ("D", "C")].iter().enumerate() {
        csv.push_str(&format!("1,{},{h},{a},20,20\n", d / 2 + 1));
    }
    let o = call(&["structure"], csv.as_bytes());
    assert_eq!(o.code, EXIT_NUMERICAL, "{}", o.stderr);
    assert!(o.stderr.contains("degenerate"), "{}", o.stderr);
}

#[test]
fn season_filter_selects_a_range() {
    let data = simulated(&["--teams", "4", "--n-seasons", "5", "--first-season", "2001"]);
    let v = json(&call(&["describe", "--seasons", "2002..2003"], &data));
    assert_eq!(v["results"]["match_statistics"]["n_matches"], 24);
    assert_eq!(call(&["describe", "--seasons", "1990..1991"], &data).code, EXIT_DATA);
}

#[test]
fn out_directory_receives_report_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("league.csv");
    std::fs::write(&input, simulated(&["--fitness-sd", "2", "--home", "1.5"])).unwrap();
    let out = dir.path().join("out");
    let o = call(
        &[
            "report",
            "--input",
            input.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--neutralize",
        ],
        b"",
    );
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    for f in v["plot_data"].as_array().unwrap() {
        let path = out.join(f.as_str().unwrap());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().count() > 1, "{}", path.display());
    }
    for section in ["describe", "fitness", "variance", "predict", "structure"] {
        assert!(v["results"][section].is_object(), "{section}");
    }
    assert_eq!(v["results"]["structure"]["exact_slopes"]["difference"], "1");
    assert_eq!(v["results"]["fitness"]["matchday_autocorrelation"]["neutralized"], true);
}

#[test]
fn csv_format_prints_tables() {
    let data = simulated(&["--teams", "4", "--n-seasons", "2"]);
    let o = call(
        &[
            "predict",
            "--format",
            "csv",
            "--home-adv",
            "constant:1.5",
            "--draw-rule",
            "force",
        ],
        &data,
    );
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(
        text.starts_with("# prediction_by_matchday\nt,n,error_variance,"),
        "{text}"
    );
}

#[test]
fn simulate_pipeline_recovers_fitness_variance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let data = simulated(&["--fitness-sd", "3.6", "--redraw", "per-season", "--out", d]);
    assert_eq!(std::fs::read(dir.path().join("league.csv")).unwrap(), data);
    let truth: Value = serde_json::from_slice(&std::fs::read(dir.path().join("ground_truth.json")).unwrap()).unwrap();
    assert!(truth["rng_algorithm"].as_str().unwrap().contains("ChaCha8"));

    // realized fitness variance per season, then the finite-league intercept
    // s2 (n/(n-1))^2 - s2 n/((n-1)(n-2)) for n = 18
    let mut seasons: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for f in truth["fitness"].as_array().unwrap() {
        seasons
            .entry(f["season"].as_str().unwrap().to_string())
            .or_default()
            .push(f["fitness"].as_f64().unwrap());
    }
    let s2 = seasons
        .values()
        .map(|v| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
        })
        .sum::<f64>()
        / seasons.len() as f64;
    let n: f64 = 18.0;
    let expected = s2 * (n / (n - 1.0)).powi(2) - s2 * n / ((n - 1.0) * (n - 2.0));

    let v = json(&call(&["variance"], &data));
    let diff = &v["results"]["decompositions"][0];
    assert_eq!(diff["quantity"], "delta_g");
    let sigma2 = diff["sigma2"].as_f64().unwrap();
    assert!((sigma2 / expected - 1.0).abs() < 0.15, "sigma2 {sigma2} vs {expected}");
    assert!(
        (sigma2 / 3.6f64.powi(2) - 1.0).abs() < 0.15,
        "sigma2 {sigma2} vs configured"
    );
}

#[test]
fn binary_reads_stdin_and_sets_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_league-stats");
    let sim = Command::new(exe)
        .args(["simulate", "--teams", "4", "--seed", "1"])
        .output()
        .unwrap();
    assert!(sim.status.success());
    let mut child = Command::new(exe)
        .args(["describe", "--input", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&sim.stdout).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"]["match_statistics"]["n_matches"], 120);

    let bad = Command::new(exe).arg("--bogus").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}
