use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"
model = "modbkc"
N = 8
J1 = 0.5
J2 = 1.0
Delta1 = 1.5
Delta2 = 2.1
omega = 0.0
"#;

fn bkc(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bkc"));
    c.args(args).env_remove("BKC_THREADS");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run_ok(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> toml::Table {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = bkc(&args, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    std::fs::read_to_string(out.join("manifest.toml")).unwrap().parse().unwrap()
}

fn listed(manifest: &toml::Table) -> BTreeSet<String> {
    manifest["output"].as_array().unwrap().iter().map(|o| o["path"].as_str().unwrap().to_owned()).collect()
}

fn on_disk(root: &Path) -> BTreeSet<String> {
    let mut found = BTreeSet::new();
    for panel in std::fs::read_dir(root).unwrap() {
        let panel = panel.unwrap();
        if !panel.file_type().unwrap().is_dir() {
            continue;
        }
        for f in std::fs::read_dir(panel.path()).unwrap() {
            let f = f.unwrap();
            found.insert(format!("{}/{}", panel.file_name().to_string_lossy(), f.file_name().to_string_lossy()));
        }
    }
    found
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect::<Vec<_>>();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect::<Vec<_>>()).collect::<Vec<_>>();
    for r in &rows {
        assert_eq!(r.len(), header.len(), "{}", path.display());
    }
    (header, rows)
}

fn config_exit(body: &str, cmd: &str) -> (i32, String) {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", body);
    let out = dir.path().join("out");
    let o = bkc(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stderr).into_owned())
}

#[test]
fn config_errors_exit_with_two() {
    let (code, err) = config_exit(&format!("{SMALL}\nbogus = 1\n"), "spectrum");
    assert_eq!(code, 2);
    assert!(err.contains("bogus"), "{err}");

    let (code, err) = config_exit(&SMALL.replace("N = 8", ""), "spectrum");
    assert_eq!(code, 2);
    assert!(err.contains('N'), "{err}");

    let (code, _) = config_exit("N = [", "spectrum");
    assert_eq!(code, 2);

    let (code, _) = config_exit(SMALL, "disorder");
    assert_eq!(code, 2, "disorder without a strength");

    let dir = TempDir::new().unwrap();
    let o = bkc(&["spectrum", "--config", dir.path().join("missing.toml").to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_thread_settings_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let out = dir.path().join("out");
    let args = ["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert_eq!(bkc(&args, &[("BKC_THREADS", "zero")]).status.code(), Some(2));
    let mut with_flag = args.to_vec();
    with_flag.extend(["--threads", "0"]);
    assert_eq!(bkc(&with_flag, &[]).status.code(), Some(2));
}

#[test]
fn thread_count_comes_from_flag_then_env() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let out = dir.path().join("out");
    let args = ["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let manifest = || -> toml::Table { std::fs::read_to_string(out.join("manifest.toml")).unwrap().parse().unwrap() };

    assert!(bkc(&args, &[("BKC_THREADS", "3")]).status.success());
    assert_eq!(manifest()["threads"].as_integer(), Some(3));

    let mut with_flag = args.to_vec();
    with_flag.extend(["--threads", "2"]);
    assert!(bkc(&with_flag, &[("BKC_THREADS", "3")]).status.success());
    assert_eq!(manifest()["threads"].as_integer(), Some(2));
}

#[test]
fn spectrum_tables_and_manifest() {
    let dir = TempDir::new().unwrap();
    let body = format!("{SMALL}bc = \"both\"\n");
    let cfg = write_config(dir.path(), "c.toml", &body);
    let out = dir.path().join("out");
    let m = run_ok("spectrum", &cfg, &out, &["--plots"]);

    assert_eq!(listed(&m), on_disk(&out));
    assert_eq!(listed(&m), ["main/obc.csv", "main/pbc.csv", "main/spectrum.svg"].map(String::from).into());
    assert_eq!(m["command"].as_str(), Some("spectrum"));

    let (header, rows) = read_csv(&out.join("main/obc.csv"));
    assert_eq!(header, ["index", "re_E", "im_E"]);
    assert_eq!(rows.len(), 4 * 8);
    for r in &rows {
        // 17 significant digits in scientific notation.
        let mantissa = r[1].split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 18, "{}", r[1]);
        r[1].parse::<f64>().unwrap();
    }
    let svg = std::fs::read_to_string(out.join("main/spectrum.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn no_plots_without_flag() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", SMALL);
    let out = dir.path().join("out");
    let m = run_ok("profiles", &cfg, &out, &[]);
    let files = listed(&m);
    assert!(files.iter().all(|f| f.ends_with(".csv")), "{files:?}");
    assert_eq!(files, on_disk(&out));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let body = format!("{SMALL}\n[disorder]\nW = 0.2\nrealizations = 3\n");
    let cfg = write_config(dir.path(), "c.toml", &body);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let ma = run_ok("disorder", &cfg, &a, &["--seed", "7", "--threads", "1"]);
    let mb = run_ok("disorder", &cfg, &b, &["--seed", "7", "--threads", "2"]);
    assert_eq!(listed(&ma), listed(&mb));
    for f in listed(&ma) {
        assert_eq!(std::fs::read(a.join(&f)).unwrap(), std::fs::read(b.join(&f)).unwrap(), "{f}");
    }
    assert_eq!(ma["seed"].as_integer(), Some(7));

    let c = dir.path().join("c");
    run_ok("disorder", &cfg, &c, &["--seed", "8"]);
    let f = "main/realizations.csv";
    assert_ne!(std::fs::read(a.join(f)).unwrap(), std::fs::read(c.join(f)).unwrap());
}

#[test]
fn disorder_tables() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        "{SMALL}sweep = {{ param = \"W\", min = 0.0, max = 0.2, step = 0.1 }}\n\n[disorder]\nW = 0.1\nrealizations = 2\n"
    );
    let cfg = write_config(dir.path(), "c.toml", &body);
    let out = dir.path().join("out");
    let m = run_ok("disorder", &cfg, &out, &[]);
    assert_eq!(listed(&m), on_disk(&out));

    let (header, rows) = read_csv(&out.join("main/aggregate_zero_gap.csv"));
    assert_eq!(header, ["W", "mean", "std", "n"]);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[3] == "2"));
    let (_, rows) = read_csv(&out.join("main/realizations.csv"));
    assert_eq!(rows.len(), 3 * 2);
}

#[test]
fn phase_scan_tables() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        "{SMALL}bc = \"obc\"\naxes = [{{ param = \"J1\", min = 0.0, max = 2.0, step = 1.0 }}, {{ param = \"J2\", min = 0.5, max = 1.5, step = 0.5 }}]\n"
    );
    let cfg = write_config(dir.path(), "c.toml", &body);
    let out = dir.path().join("out");
    let m = run_ok("phase-scan", &cfg, &out, &["--plots"]);
    assert_eq!(listed(&m), on_disk(&out));

    let (header, rows) = read_csv(&out.join("main/scan.csv"));
    assert_eq!(&header[..3], ["J1", "J2", "abs_E_min"]);
    assert!(header.contains(&"w_plus".to_owned()) && header.contains(&"status".to_owned()));
    assert_eq!(rows.len(), 3 * 3);
}

#[test]
fn panels_filter_by_command() {
    let dir = TempDir::new().unwrap();
    let body = r#"
model = "bkc"
N = 6
J0 = 0.5
Delta0 = 1.0
omega = 0.0
bc = "obc"

[[panel]]
name = "s"
command = "spectrum"

[[panel]]
name = "p"
command = "profiles"
"#;
    let cfg = write_config(dir.path(), "c.toml", body);
    let out = dir.path().join("out");
    let m = run_ok("profiles", &cfg, &out, &[]);
    assert!(listed(&m).iter().all(|f| f.starts_with("p/")));
    assert!(!out.join("s").exists());
}
