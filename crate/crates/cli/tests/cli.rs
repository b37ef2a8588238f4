use std::process::Command;

fn cellfree() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cellfree"));
    for (key, _) in std::env::vars() {
        if key.starts_with("CELLFREE_") {
            cmd.env_remove(key);
        }
    }
    cmd
}

#[test]
fn small_run_writes_all_tables() {
    let dir = tempfile::tempdir().unwrap();
    let status = cellfree()
        .args([
            "--trials",
            "1",
            "--snr",
            "-5,5",
            "--strategy",
            "llsf,llr-m",
            "--n-stat",
            "50",
            "--dump-code",
        ])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let read = |name: &str| std::fs::read_to_string(dir.path().join(name)).unwrap();
    assert!(read("ber.csv").starts_with("snr_db,strategy,ber,trials,bits\n-5,llsf,"));
    assert_eq!(read("ber.csv").lines().count(), 5);
    assert_eq!(read("ber_iterations.csv").lines().count(), 1 + 4 * 3);
    assert!(read("se_cdf.csv").starts_with("snr_db,strategy,se,cdf\n"));
    assert!(read("cardinality.csv").starts_with("snr_db,strategy,mean_aps,trials\n"));
    assert!(read("accounting.csv").starts_with("snr_db,strategy,scheme,K,L,N,m,fronthaul,flops\n"));
    assert!(read("code.alist").starts_with("256 128\n"));
    let summary: serde_json::Value = serde_json::from_str(&read("summary.json")).unwrap();
    assert_eq!(summary["results"].as_array().unwrap().len(), 4);
}

#[test]
fn config_file_and_emit_filter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "trials = 1\nsnr_db = \"0:5:5\"\nstrategies = \"all-aps\"\nn_stat = 20\nK = 4\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = cellfree()
        .arg("--config")
        .arg(&cfg)
        .args(["--emit", "cardinality"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let card = std::fs::read_to_string(out.join("cardinality.csv")).unwrap();
    assert_eq!(
        card,
        "snr_db,strategy,mean_aps,trials\n0,all-aps,16,1\n5,all-aps,16,1\n"
    );
    assert!(!out.join("ber.csv").exists());
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["--strategy", "nearest"],
        vec!["--profile", "huge"],
        vec!["--trials", "0"],
        vec!["--snr", "1:0:5"],
    ] {
        let output = cellfree()
            .args(&args)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert!(!output.status.success(), "{args:?} should fail");
        assert!(!output.stderr.is_empty());
    }
}
