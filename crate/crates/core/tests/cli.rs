use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_emitter-bell");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn bell_test_threshold_rows() {
    let out = stdout(&["bell-test", "--v-grid", "0.5, 1/sqrt(2), 1.0"]);
    assert!(out.starts_with("v,statistic,lower_margin,violated\n"));
    let rows = rows(&out);
    let stats: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    let violated: Vec<&str> = rows.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(violated, ["false", "false", "true"]);
    for (got, want) in stats.iter().zip([-0.29289, 0.0, 0.41421]) {
        assert!((got - want).abs() < 5e-6, "{got} vs {want}");
    }
}

#[test]
fn g2_scan_extremes() {
    let out = stdout(&["g2-scan", "--delta-phi", "0,pi", "--e0", "1.5"]);
    let rows = rows(&out);
    let g2: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(g2[0], 1.5f64.powi(4));
    assert!(g2[1].abs() < 1e-15);
}

#[test]
fn g2_scan_from_detector_angles() {
    // kd = 2 pi, xi2 = pi/6 gives a phase difference of pi
    let out = stdout(&["g2-scan", "--kd", "2pi", "--xi2", "0,pi/6", "--eta", "0.5"]);
    let rows = rows(&out);
    let dphi: f64 = rows[1][0].parse().unwrap();
    assert!((dphi - std::f64::consts::PI).abs() < 1e-14);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.25);
}

#[test]
fn path_check_report() {
    let out = stdout(&["path-check"]);
    assert_eq!(out.lines().count(), 1);
    let fields: Vec<(&str, &str)> = out.trim().split(' ').map(|f| f.split_once('=').unwrap()).collect();
    let dev: f64 = fields[0].1.parse().unwrap();
    assert!(dev < 1e-12);
    assert_eq!(fields[1], ("grid_points", "10000"));
    assert_eq!(fields[2], ("schmidt_rank", "2"));
}

#[test]
fn mc_bell_is_deterministic_and_matches_library() {
    let args = ["mc-bell", "--visibility", "0.9", "--seeds", "3,4", "--trials", "20000"];
    let a = stdout(&args);
    let b = stdout(&args);
    assert_eq!(a, b);
    assert!(a.starts_with("seed,trials,statistic_hat,std_error,sigma_violation\n"));

    use emitter_bell::bell::bell_angle_settings;
    use emitter_bell::correlations::{Efficiency, Visibility};
    use emitter_bell::montecarlo::{estimate_ch, McConfig};
    let settings = bell_angle_settings(Visibility::new(0.9).unwrap(), Efficiency::ONE);
    let est = estimate_ch(&McConfig::new(3, 20_000, settings).unwrap()).unwrap();
    let first = &rows(&a)[0];
    assert_eq!(first[0], "3");
    assert_eq!(first[1], "20000");
    // 17 significant digits round-trip exactly
    assert_eq!(first[2].parse::<f64>().unwrap(), est.statistic_hat);
    assert_eq!(first[3].parse::<f64>().unwrap(), est.std_error);
    assert_eq!(first[4].parse::<f64>().unwrap(), est.sigma_violation());
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("bell.csv");
    std::fs::write(
        &cfg,
        format!("# bell scan\nv_grid = 0.2, 0.9\neta = 0.3\noutput = {}\n", out.display()),
    )
    .unwrap();

    let status = run(&["bell-test", "--config", cfg.to_str().unwrap()]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let from_file = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows(&from_file).len(), 2);

    let status = run(&["bell-test", "--config", cfg.to_str().unwrap(), "--v-grid", "1"]);
    assert!(status.status.success());
    let overridden = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows(&overridden).len(), 1);
    assert!(!overridden.contains('\r'));
}

#[test]
fn byte_identical_output_files() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str| {
        let path = dir.path().join(name);
        let out = run(&["g2-scan", "--points", "33", "--visibility", "0.7", "--output", path.to_str().unwrap()]);
        assert!(out.status.success());
        std::fs::read(path).unwrap()
    };
    assert_eq!(write("a.csv"), write("b.csv"));
}

#[test]
fn numeric_fields_round_trip() {
    let out = stdout(&["g2-scan", "--points", "50", "--visibility", "0.37", "--eta", "0.8"]);
    for (i, r) in rows(&out).iter().enumerate() {
        let dphi: f64 = r[0].parse().unwrap();
        assert_eq!(dphi, std::f64::consts::TAU * i as f64 / 50.0);
        let g2: f64 = r[1].parse().unwrap();
        assert_eq!(g2, 0.5 * (1.0 + 0.37 * dphi.cos()));
    }
}

#[test]
fn error_statuses_and_diagnostics() {
    let unknown = run(&["teleport"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(unknown.stdout.is_empty());
    assert!(!unknown.stderr.is_empty());

    let invalid = run(&["bell-test", "--visibility", "1.2"]);
    assert_eq!(invalid.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&invalid.stderr).contains("visibility"));

    let dir = tempfile::tempdir().unwrap();
    let bad_cfg = dir.path().join("bad.cfg");
    std::fs::write(&bad_cfg, "kd 20\n").unwrap();
    assert_eq!(run(&["g2-scan", "--config", bad_cfg.to_str().unwrap()]).status.code(), Some(3));

    let missing_dir = dir.path().join("no/such/dir/out.csv");
    assert!(!Path::new(&missing_dir).exists());
    let unwritable = run(&["bell-test", "--output", missing_dir.to_str().unwrap()]);
    assert_eq!(unwritable.status.code(), Some(4));
}
