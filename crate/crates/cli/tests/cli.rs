use std::path::Path;
use std::process::{Command, Output};

fn nimsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nimsa")).args(args).output().expect("spawn nimsa")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn selftest_passes_and_detects_faults() {
    let ok = nimsa(&["selftest", "--samples", "3", "--security-level", "test"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert_eq!(stdout.matches("PASS").count(), 6, "{stdout}");

    let broken = nimsa(&["selftest", "--samples", "3", "--security-level", "test", "--inject", "corrupt-order"]);
    assert_eq!(broken.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&broken.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("bilinearity") && l.contains("FAIL")), "{stdout}");

    let mismatch = nimsa(&["selftest", "--samples", "3", "--security-level", "test", "--inject", "master-mismatch"]);
    assert_eq!(mismatch.status.code(), Some(1));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"scheme": "nimsa", "trials": 0}"#).unwrap();
    let out =
        nimsa(&["auth-bench", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("a.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    std::fs::write(&cfg, r#"{"unknown_key": 1}"#).unwrap();
    let out = nimsa(&["latency-bench", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = nimsa(&["auth-bench", "--delay-sweep", "100:10:5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = nimsa(&["latency-bench", "--links", "config"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn auth_bench_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let args = ["auth-bench", "--trials", "3", "--loss", "0,10", "--delay-sweep", "20:40:20", "--seed", "9"];
        let o = nimsa(&[&args[..], &["--out", out.to_str().unwrap()]].concat());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        read(&out)
    };
    let a = run("a.csv");
    assert_eq!(a.lines().next(), Some("scheme,loss_pct,one_way_delay_ms,trial,auth_latency_ms"));
    // 2 schemes x 2 losses x 2 delays x 3 trials
    assert_eq!(a.lines().count(), 1 + 24);
    assert_eq!(a, run("b.csv"));
}

#[test]
fn handover_latency_and_throughput_write_headers() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();

    let o = nimsa(&["handover-bench", "--trials", "2", "--loss", "0", "--out", &p("h.csv")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let h = read(Path::new(&p("h.csv")));
    assert_eq!(h.lines().next(), Some("scheme,mode,loss_pct,trial,handover_latency_ms"));
    for mode in ["transmission", "notification", "mobike"] {
        assert_eq!(h.lines().filter(|l| l.contains(mode)).count(), 2, "{h}");
    }

    let o = nimsa(&["latency-bench", "--duration", "5", "--out", &p("l.csv")]);
    assert!(o.status.success());
    let l = read(Path::new(&p("l.csv")));
    assert_eq!(l.lines().next(), Some("scheme,probe_seq,owd_ms"));
    assert!(l.lines().count() > 1);

    let args = ["throughput-bench", "--duration", "3", "--offered", "2mbps", "--with-control"];
    let o = nimsa(&[&args[..], &["--out", &p("t.csv"), "--summary-out", &p("s.csv")]].concat());
    assert!(o.status.success());
    let t = read(Path::new(&p("t.csv")));
    assert_eq!(t.lines().next(), Some("scheme,time_s,goodput_mbps"));
    assert_eq!(t.lines().count(), 1 + 3 * 3);
    let s = read(Path::new(&p("s.csv")));
    assert_eq!(s.lines().next(), Some("scheme,offered_mbps,mean_goodput_mbps,efficiency"));
    assert_eq!(s.lines().count(), 4);
}
