use std::path::Path;
use std::process::{Command, Output};

fn topoloc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topoloc"))
        .args(args)
        .current_dir(dir)
        .env_remove("TOPOLOC_WORKERS")
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn default_sweep_writes_101_rows_with_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = topoloc(&["sweep", "--out", "res"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("res/sweep.csv"));
    assert_eq!(header, ["g", "E_prime", "E_dprime", "eps_m", "E_w", "config_hash", "tool_version"]);
    assert_eq!(rows.len(), 101);
    let hash = &rows[0][5];
    assert_eq!(hash.len(), 64);
    assert!(rows.iter().all(|r| &r[5] == hash));
    let (e1, e2, eps, ew) = (
        column(&header, &rows, "E_prime"),
        column(&header, &rows, "E_dprime"),
        column(&header, &rows, "eps_m"),
        column(&header, &rows, "E_w"),
    );
    for i in 0..rows.len() {
        assert!(e1[i] >= ew[i] - 1e-9, "row {i}");
        assert!((e1[i] - e2[i]).abs() <= eps[i] + 1e-12, "row {i}");
    }
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/sweep.json")).unwrap()).unwrap();
    assert_eq!(meta["metadata"]["config_hash"], hash.as_str());
    assert_eq!(meta["metadata"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn identical_configs_give_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[grid]\ng_min = 0.0\ng_max = 1.0\nstep = 0.25\n";
    std::fs::write(dir.path().join("c.toml"), cfg).unwrap();
    for (out, workers) in [("a", "1"), ("b", "1")] {
        let status = Command::new(env!("CARGO_BIN_EXE_topoloc"))
            .args(["sweep", "-c", "c.toml", "--bounds", "rle,e_prime,e_dprime", "--out", out])
            .current_dir(dir.path())
            .env("TOPOLOC_WORKERS", workers)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(dir.path().join("a/sweep.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/sweep.csv")).unwrap();
    assert_eq!(a, b);
    let (header, rows) = read_csv(&dir.path().join("a/sweep.csv"));
    assert_eq!(rows.len(), 5);
    assert_eq!(header[..5], ["g", "E_RL", "E_prime", "E_dprime", "eps_m"]);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "modle = \"kitaev\"\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["sweep", "-c", "bad.toml"],
        vec!["sweep", "--loop", "qq"],
        vec!["sweep", "--step", "0"],
        vec!["sweep", "--model", "color", "--dims", "3x2", "--loop", "xhr", "--bounds", "e_witness"],
        vec!["sweep", "--bounds", "e_nonsense"],
        vec!["scaling", "--sizes", "2x2,3x2", "--synthetic", "0.4,0.6"],
        vec!["dynamics", "--markovian-s", "3"],
        vec!["sweep", "--no-such-flag"],
    ];
    for args in cases {
        let out = topoloc(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = Command::new(env!("CARGO_BIN_EXE_topoloc"))
        .args(["sweep", "--g", "0"])
        .current_dir(dir.path())
        .env("TOPOLOC_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synthetic_scaling_recovers_the_planted_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let out = topoloc(&["scaling", "--sizes", "2x2,3x2,4x2,3x3", "--synthetic", "0.4,0.6", "--out", "s"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s/scaling.json")).unwrap()).unwrap();
    let fit = &doc["fit"];
    assert!((fit["exponent"].as_f64().unwrap() - 0.6).abs() < 1e-9);
    assert!((fit["amplitude"].as_f64().unwrap() - 0.4).abs() < 1e-9);
    let (header, rows) = read_csv(&dir.path().join("s/scaling.csv"));
    assert_eq!(column(&header, &rows, "N"), [8.0, 12.0, 16.0, 18.0]);
}

#[test]
fn dynamics_tables_and_collapse_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = topoloc(
        &["dynamics", "--g", "0.1", "--s", "3", "--markovian-s", "1", "--t-end", "4", "--out", "d", "--no-positivity-check"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("d/trajectory_s1_g0.1.csv"));
    assert_eq!(header[..6], ["t", "trace", "purity", "E_dprime", "E_w", "gamma_t"]);
    assert_eq!(rows.len(), 41);
    let e = column(&header, &rows, "E_dprime");
    assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-9), "Markovian E'' decays monotonically");
    let gamma = column(&header, &rows, "gamma_t");
    assert!(gamma.iter().all(|&g| g >= 0.0));

    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("d/ect.json")).unwrap()).unwrap();
    let sweep = &doc["collapse"][0];
    assert_eq!(sweep["s"], 3.0);
    let point = &sweep["result"]["points"][0];
    assert!(point["tau_nm"].as_f64().unwrap() > 0.0);
    assert!(point["tau_m"].as_f64().unwrap() > 0.0, "{doc}");
    assert_eq!(doc["runs"].as_array().unwrap().len(), 2);
}

#[test]
fn validate_passes_and_reports_injected_faults() {
    let dir = tempfile::tempdir().unwrap();
    let out = topoloc(&["validate", "--json", "report.json"], dir.path());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(!text.contains("FAIL"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(report.as_array().unwrap().len() >= 7);

    let out = topoloc(&["validate", "--inject-witness-fault"], dir.path());
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1));
    assert!(text.contains("witness_construction") && text.contains("condition (b)"), "{text}");
}

#[test]
fn larger_lattice_gap_between_lower_bounds_grows() {
    let dir = tempfile::tempdir().unwrap();
    let out = topoloc(&["sweep", "--dims", "3x3", "--bounds", "e_dprime,e_witness", "--g", "0,0.2,0.4,0.6,0.8,1", "--out", "r"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("r/sweep.csv"));
    let (e2, ew) = (column(&header, &rows, "E_dprime"), column(&header, &rows, "E_w"));
    // The absolute gap opens through the ordered phase; past the transition
    // both bounds decay, but E^w falls proportionally faster.
    let gap: Vec<f64> = e2.iter().zip(&ew).map(|(a, b)| a - b).collect();
    assert!(gap[..3].windows(2).all(|w| w[1] > w[0]), "{gap:?}");
    let relative: Vec<f64> = gap.iter().zip(&e2).map(|(d, e)| d / e).collect();
    assert!(relative.windows(2).all(|w| w[1] > w[0]), "{relative:?}");
}

#[test]
fn non_markovian_dynamics_oscillates_after_the_trough() {
    let dir = tempfile::tempdir().unwrap();
    let out = topoloc(&["dynamics", "--g", "0.8", "--s", "3", "--t-end", "10", "--out", "d", "--no-positivity-check"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("d/trajectory_s3_g0.8.csv"));
    let e = column(&header, &rows, "E_dprime");
    let trough = (1..e.len()).find(|&i| e[i] > e[i - 1] + 1e-6).expect("a trough") - 1;
    let rise = e[trough..].iter().fold(0.0f64, |m, v| m.max(v - e[trough]));
    assert!(rise > 1e-2, "rise after trough {rise}");
    assert!(column(&header, &rows, "gamma_t").iter().any(|&g| g < 0.0));
}
