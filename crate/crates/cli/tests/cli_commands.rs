use std::path::Path;
use std::process::{Command, Output};

fn gda(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gda"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap()
}

#[test]
fn check_alt_scsc_is_tight() {
    let dir = tempfile::tempdir().unwrap();
    let o = gda(
        &[
            "check",
            "--theorem",
            "alt_scsc",
            "--a",
            "1",
            "--b",
            "10",
            "--c",
            "1",
            "--eta",
            "0.05",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let summary = out.lines().find(|l| l.starts_with("summary")).unwrap();
    assert_eq!(field(summary, "result"), "pass");
    assert_eq!(field(summary, "slack").parse::<f64>().unwrap(), 0.0);
    assert!((field(summary, "rho").parse::<f64>().unwrap() - 0.95).abs() < 1e-12);
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Regime errors surface verbatim with status 2.
    let o = gda(
        &[
            "check",
            "--theorem",
            "sim_scsc",
            "--a",
            "0",
            "--b",
            "10",
            "--c",
            "2",
            "--eta",
            "0.01",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("regime"));
    // The prescribed step is used when --eta is absent.
    let o = gda(
        &[
            "check",
            "--theorem",
            "sim_nosc",
            "--a",
            "0",
            "--b",
            "10",
            "--c",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("eta=5.0000000000000001e-3"));
    let o = gda(&["check", "--a", "1", "--b", "10", "--c", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spectrum_of_identity_game() {
    let dir = tempfile::tempdir().unwrap();
    for (algo, eta) in [("sim_gda", 0.3), ("alt_gda", 1.7), ("eg", 0.25)] {
        let eta_s = eta.to_string();
        let o = gda(
            &[
                "spectrum", "--a", "1", "--c", "1", "--algo", algo, "--eta", &eta_s,
            ],
            dir.path(),
        );
        assert!(o.status.success());
        let out = stdout(&o);
        let summary = out.lines().find(|l| l.starts_with("summary")).unwrap();
        let rho: f64 = field(summary, "rho").parse().unwrap();
        let expect = if algo == "eg" {
            1.0 - eta + eta * eta
        } else {
            (1.0f64 - eta).abs()
        };
        assert!((rho - expect).abs() < 1e-12, "{algo}: {rho} vs {expect}");
    }
}

#[test]
fn run_with_zero_steps_is_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = gda(
        &[
            "run", "--a", "1", "--b", "10", "--c", "1", "--eta", "0.05", "--steps", "0", "--init",
            "3,-4",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let out = stdout(&o);
    let rows = data_lines(&out);
    assert_eq!(rows.len(), 2, "{out}");
    assert_eq!(rows[0], "iter,delta,x,y");
    let delta: f64 = rows[1].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(delta, 25.0);
}

#[test]
fn outputs_carry_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let o = gda(
        &[
            "tune", "--a", "1", "--b", "10", "--c", "1", "--seed", "9", "--out", "res",
        ],
        dir.path(),
    );
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("res/tune.csv")).unwrap();
    let header: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert!(header[0].starts_with("# gda "));
    assert_eq!(
        header[1],
        "# command: gda tune --a 1 --b 10 --c 1 --seed 9 --out res"
    );
    assert_eq!(header[2], "# seed: 9");
    let rows = data_lines(&text);
    assert_eq!(rows[0], "algo,eta_star,beta_star,rho");
    assert_eq!(rows.len(), 7);
    assert!(rows
        .iter()
        .any(|r| r.starts_with("nm,") && !r.contains("none")));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# scalar game\na = 1\nb = 10\nc = 1\neta = 0.05\nsteps = 3\n",
    )
    .unwrap();
    let o = gda(&["run", "--config", "run.cfg"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data_lines(&stdout(&o)).len(), 5);
    let o = gda(&["run", "--config", "run.cfg", "--steps", "1"], dir.path());
    assert_eq!(data_lines(&stdout(&o)).len(), 3);

    std::fs::write(dir.path().join("bad.cfg"), "a = 1\n\nsteps = many\n").unwrap();
    let o = gda(&["run", "--config", "bad.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn game_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = gda_core::games::gen_scsc(3, 5, 0.2).unwrap();
    std::fs::write(dir.path().join("g.txt"), g.to_text()).unwrap();
    let from_file = gda(
        &["spectrum", "--game-file", "g.txt", "--eta", "0.1"],
        dir.path(),
    );
    let generated = gda(
        &[
            "spectrum",
            "--generator",
            "scsc",
            "--dim",
            "3",
            "--seed",
            "5",
            "--coupling-std",
            "0.2",
            "--eta",
            "0.1",
        ],
        dir.path(),
    );
    assert!(from_file.status.success() && generated.status.success());
    assert_eq!(
        data_lines(&stdout(&from_file)),
        data_lines(&stdout(&generated))
    );
}

#[test]
fn fig1_contract() {
    let dir = tempfile::tempdir().unwrap();
    assert!(gda(&["fig1", "--out", "f"], dir.path()).status.success());
    let read = |name: &str| -> Vec<f64> {
        let text = std::fs::read_to_string(dir.path().join("f").join(name)).unwrap();
        data_lines(&text)[1..]
            .iter()
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect()
    };
    for (name, steps) in [("sim", 100), ("alt", 20)] {
        for game in ["bilinear", "scsc", "nosc"] {
            assert_eq!(read(&format!("{name}_{game}.csv")).len(), steps + 1);
        }
    }
    let sim_bilinear = read("sim_bilinear.csv");
    assert!(sim_bilinear[100] > sim_bilinear[0]);
    assert!(read("alt_scsc.csv")[20] < read("sim_scsc.csv")[100]);
}

#[test]
fn fig2_contract() {
    let dir = tempfile::tempdir().unwrap();
    assert!(gda(&["fig2", "--out", "f"], dir.path()).status.success());
    let circles = std::fs::read_to_string(dir.path().join("f/circles.csv")).unwrap();
    let radius = |algo: &str| -> f64 {
        let row = data_lines(&circles)
            .into_iter()
            .find(|l| l.starts_with(algo))
            .unwrap();
        row.split(',').nth(2).unwrap().parse().unwrap()
    };
    assert!(radius("alt_gda") < radius("sim_gda"));
    let eig = std::fs::read_to_string(dir.path().join("f/eigenvalues.csv")).unwrap();
    let rows = data_lines(&eig);
    assert_eq!(rows.len(), 1 + 2 * 100 * 2);
    // Smallest step size: every eigenvalue sits next to 1.
    for row in rows[1..]
        .iter()
        .filter(|r| r.contains(",1.0000000000000000e-3,"))
    {
        let v: Vec<f64> = row
            .split(',')
            .skip(2)
            .take(2)
            .map(|x| x.parse().unwrap())
            .collect();
        assert!((v[0] - 1.0).abs() < 2e-3 && v[1].abs() < 2e-3, "{row}");
    }
}

#[test]
fn fig3_right_small() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "fig3-right",
        "--dim",
        "6",
        "--n-values",
        "4,40,400",
        "--seeds",
        "2",
        "--out",
        "f",
    ];
    let o = gda(&args, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("f/scaling.csv")).unwrap();
    assert!(text.contains("# extension: ogda_alt"));
    let rows = data_lines(&text);
    assert_eq!(
        rows[0],
        "kappa,algo,rho,inv_neg_log_rho,eta_star,beta_star,seed,n_param"
    );
    assert_eq!(rows.len(), 1 + 3 * 2 * 6);
    for r in &rows[1..] {
        let rho: f64 = r.split(',').nth(2).unwrap().parse().unwrap();
        assert!(rho < 1.0, "{r}");
    }
    let o = gda(&["fig3-right", "--n-values", "2", "--out", "g"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fig3_left_small() {
    let dir = tempfile::tempdir().unwrap();
    let o = gda(
        &["fig3-left", "--dim", "8", "--seed", "3", "--out", "f"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("f/summary.csv")).unwrap();
    let rows = data_lines(&summary);
    assert_eq!(rows.len(), 7);
    assert!(rows
        .iter()
        .any(|r| r.starts_with("ogda_alt,") && r.ends_with(",true")));
    for algo in ["sim_gda", "alt_gda", "eg", "ogda_sim", "nm", "ogda_alt"] {
        assert!(dir.path().join(format!("f/{algo}.csv")).exists());
    }
    let reference = std::fs::read_to_string(dir.path().join("f/reference.csv")).unwrap();
    let factors: Vec<f64> = data_lines(&reference)[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(factors[0], 1.0);
    assert!(factors.windows(2).all(|w| w[1] < w[0]));
}
