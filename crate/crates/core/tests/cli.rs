use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibersqueeze"))
        .args(args)
        .env("FIBERSQUEEZE_OUTPUT_ROOT", root)
        .output()
        .expect("binary runs")
}

fn small_config(dir: &Path, extra: &str) -> String {
    let p = dir.join("small.toml");
    let text = format!(
        "name = \"small\"\n[grid]\nn_points = 128\ntime_window_ps = 0.6\n[fiber]\nlength_m = 0.01\n\
         [input]\nenergies_pJ = [20.0]\ndelay_ps = 0.0\n[solver]\nscheme = \"fixed\"\nfixed_steps = 20\n\
         [quantum]\nbin_width_nm = 10.0\n[output]\ndirectory = \"small\"\n{extra}"
    );
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn shipped_configs_validate() {
    let root = tempfile::tempdir().unwrap();
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let out = cli(&["validate", p.to_str().unwrap()], root.path());
        assert_eq!(out.status.code(), Some(0), "{p:?}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn validation_failures_exit_one_and_list_everything() {
    let root = tempfile::tempdir().unwrap();
    let cfg = small_config(root.path(), "");
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("n_points = 128", "n_points = 100")
        + "[measurement]\nefficiency = 1.2\n";
    std::fs::write(&cfg, text).unwrap();
    let out = cli(&["validate", &cfg], root.path());
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("power of two") && stdout.contains("efficiency must lie in (0,1]"));

    let out = cli(&["run", &cfg], root.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!root.path().join("small").exists());

    std::fs::write(&cfg, "[grid]\nn_points = \"lots\"\n").unwrap();
    let out = cli(&["validate", &cfg], root.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn run_and_sweep_write_under_the_output_root() {
    let root = tempfile::tempdir().unwrap();
    let cfg = small_config(root.path(), "");
    let out = cli(&["run", &cfg], root.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(root.path().join("small/summary.json").exists());
    assert!(root.path().join("small/correlation_20pJ.svg").exists());

    let out = cli(&["sweep", "--edges", "790,800,810", "--kind", "low-pass", "--config", &cfg], root.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(root.path().join("small_sweep/squeeze_low_pass_20pJ.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn runtime_failure_exits_two_with_error_report() {
    let root = tempfile::tempdir().unwrap();
    let cfg = small_config(root.path(), "");
    let text = std::fs::read_to_string(&cfg)
        .unwrap()
        .replace("energies_pJ = [20.0]", "energies_pJ = [2000.0]")
        .replace("length_m = 0.01", "length_m = 0.3")
        .replace("n_points = 128\ntime_window_ps = 0.6", "n_points = 64\ntime_window_ps = 0.3")
        .replace("[quantum]\nbin_width_nm = 10.0", "[quantum]\nenabled = false\n[measurement]\nsweeps = []\ncorrelation_map = false");
    std::fs::write(&cfg, text).unwrap();
    let out = cli(&["run", &cfg], root.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(root.path().join("small/error.json")).unwrap();
    assert!(report.contains("\"module\": \"propagate\""));
}

#[test]
fn selftest_and_fault_injection() {
    let root = tempfile::tempdir().unwrap();
    let out = cli(&["selftest"], root.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).matches("PASS").count(), 4);
    let out = cli(&["selftest", "--inject", "flip-dispersion"], root.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL soliton_invariance"));
    let out = cli(&["selftest", "--inject", "conjugate-nu"], root.path());
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL symplectic"));
    assert_eq!(cli(&["selftest", "--inject", "typo"], root.path()).status.code(), Some(1));
}
