use std::path::PathBuf;
use std::process::{Command, Output};

fn nambu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nambu"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nambu-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn identities_exit_codes() {
    let ok = nambu(&["identities", "--trials", "10"]);
    assert_eq!(code(&ok), 0, "{}", stdout(&ok));
    assert!(!stdout(&ok).contains("FAIL"));
    let fault = nambu(&["identities", "--trials", "10", "--inject-fault", "sign-flip"]);
    assert_eq!(code(&fault), 1);
    assert!(stdout(&fault).contains("FAIL"));
    assert_eq!(code(&nambu(&["identities", "--trials", "0"])), 2);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&nambu(&["frobnicate"])), 2);
    assert_eq!(code(&nambu(&["verify", "--seed", "1"])), 2);
    assert_eq!(code(&nambu(&["verify", "--theorem", "no_such_statement", "--dry-run"])), 2);
    assert_eq!(code(&nambu(&["verify", "--k", "8:4", "--dry-run"])), 2);
    assert_eq!(code(&nambu(&["--help"])), 0);
}

#[test]
fn brackets_small_run() {
    let o = nambu(&["brackets", "--trials", "1", "--max-freq", "1"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("brackets: 1 trials"));
}

#[test]
fn quantize_dumps() {
    let o = nambu(&["quantize", "--symbol", "one", "--k", "3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,col,re,im"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let want = if f[0] == f[1] { 1.0 } else { 0.0 };
        assert!((f[2].parse::<f64>().unwrap() - want).abs() < 1e-8, "{line}");
        assert!(f[3].parse::<f64>().unwrap().abs() < 1e-8, "{line}");
    }

    // one wrapped diagonal for a monomial at k = 4
    let o = nambu(&["quantize", "--symbol", "exp1", "--k", "4"]);
    let support: Vec<(i32, i32)> = stdout(&o)
        .lines()
        .skip(1)
        .filter_map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let mag = f[2].parse::<f64>().unwrap().hypot(f[3].parse().unwrap());
            (mag > 1e-12).then(|| (f[0].parse().unwrap(), f[1].parse().unwrap()))
        })
        .collect();
    assert_eq!(support.len(), 4);
    let shift = (support[0].0 - support[0].1).rem_euclid(4);
    assert!(support.iter().all(|(a, b)| (a - b).rem_euclid(4) == shift));

    assert_eq!(code(&nambu(&["quantize", "--symbol", "cos9", "--k", "3"])), 2);
    assert_eq!(code(&nambu(&["quantize", "--symbol", "one", "--k", "0"])), 2);

    let dir = scratch("dump");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("t.bin");
    let o = nambu(&[
        "quantize", "--symbol", "cos1*cos2", "--geometry", "t4", "--r", "2", "--k", "2", "--format", "binary",
        "--output", file.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    // header plus 16 entries of two f32
    assert_eq!(std::fs::metadata(&file).unwrap().len(), 8 + 16 * 8);
}

#[test]
fn verify_writes_seven_rows_per_tuple() {
    let dir = scratch("verify");
    let out = dir.to_str().unwrap();
    let args = [
        "verify", "--geometry", "t2", "--theorem", "bt_commutator", "--k", "8:32:4", "--seeds", "1,2", "--output", out,
    ];
    let o = nambu(&args);
    // 0 or 1 depending on the fitted rates; both are well-formed runs
    assert!(matches!(code(&o), 0 | 1), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.join("verify.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("theorem_id,geometry,r,seed,k,residual"));
    assert_eq!(lines.len(), 1 + 2 * 7);
    assert!(dir.join("bt_commutator.svg").exists());
    assert!(dir.join("config.toml").exists());
    assert!(stdout(&o).contains("of 2 series pass"));

    // a second run reproduces the file byte for byte
    let again = scratch("verify-again");
    let mut args2 = args;
    args2[10] = again.to_str().unwrap();
    nambu(&args2);
    assert_eq!(std::fs::read(dir.join("verify.csv")).unwrap(), std::fs::read(again.join("verify.csv")).unwrap());

    // the report recomputes the same verdicts from the CSV alone
    std::fs::remove_file(dir.join("bt_commutator.svg")).unwrap();
    let rep = nambu(&["report", "--input", out]);
    assert_eq!(code(&rep), code(&o));
    assert_eq!(stdout(&rep).lines().count(), 2);
    assert!(dir.join("bt_commutator.svg").exists());
}

#[test]
fn dry_run_prints_the_plan() {
    let o = nambu(&["verify", "--theorem", "hyp_fourfn,directsum", "--seeds", "1", "--dry-run"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    // three structures plus the direct sum
    assert!(text.starts_with("4 series"), "{text}");
}

#[test]
fn config_file_and_overrides() {
    let dir = scratch("config");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "theorems = [\"bt_product\"]\ngeometry = \"t2\"\nks = [4, 6, 8, 10, 12]\nseeds = [5]\noutput = {:?}\n",
            dir.join("out")
        ),
    )
    .unwrap();
    let o = nambu(&["verify", "--config", cfg.to_str().unwrap(), "--seeds", "5,6", "--dry-run"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("2 series"), "{}", stdout(&o));
    std::fs::write(&cfg, "bogus_key = 1\n").unwrap();
    assert_eq!(code(&nambu(&["verify", "--config", cfg.to_str().unwrap(), "--dry-run"])), 2);
}
