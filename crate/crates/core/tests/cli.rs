//! End-to-end tests of the binary: exit codes, config-file precedence,
//! environment seed, and lossless CSV round-trips.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modcop"))
}

#[test]
fn bad_generator_spec_exits_1_and_names_the_parameter() {
    let out = bin()
        .args(["sample", "--gen", "beta:0,1", "--dim", "2", "--n", "5", "--seed", "1", "--out", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("alpha"), "diagnostic should name the parameter: {stderr}");
}

#[test]
fn unknown_subcommand_exits_1() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_path_exits_2() {
    let out = bin()
        .args(["sample", "--gen", "uniform", "--dim", "2", "--n", "5", "--seed", "1"])
        .args(["--out", "/nonexistent-dir/file.csv"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn injected_bug_exits_3_and_names_the_check() {
    let out = bin()
        .args(["verify", "--check", "density-integral", "--inject-bug", "--n", "1000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("FAIL density-integral"), "{stdout}");
}

#[test]
fn probe_budget_exhaustion_exits_3() {
    // threshold parses to +inf, which no finite witness can exceed
    let out = bin()
        .args(["probe", "--interval", "0.45,0.55", "--threshold", "1e400"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sample_reruns_are_byte_identical_and_csv_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let status = bin()
            .args(["sample", "--gen", "uniform", "--dim", "3", "--n", "10", "--seed", "1"])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let bytes_a = std::fs::read(&a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&b).unwrap());

    let text = String::from_utf8(bytes_a).unwrap();
    assert!(!text.contains('\r'), "LF line endings only");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u1,u2,u3"));
    let mut rows = 0;
    for line in lines {
        for cell in line.split(',') {
            let x: f64 = cell.parse().unwrap();
            // losslessness: re-serializing the parsed value reproduces the cell
            assert_eq!(format!("{x:.16e}"), cell);
            assert!((0.0..1.0).contains(&x));
        }
        rows += 1;
    }
    assert_eq!(rows, 10);
}

#[test]
fn density_grid_rejects_non_bivariate() {
    let out = bin()
        .args(["density-grid", "--gen", "uniform", "--dim", "3", "--out", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn density_grid_piecewise_has_n_distinct_off_breakpoint_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    // resolution 20 puts lattice sums off the breakpoints of piecewise:10
    let status = bin()
        .args(["density-grid", "--gen", "piecewise:10", "--resolution", "20"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut values: Vec<String> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect();
    values.sort();
    values.dedup();
    assert_eq!(values.len(), 10, "distinct densities: {values:?}");
}

#[test]
fn generator_plot_triangular_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tri.csv");
    let status = bin()
        .args(["generator-plot", "--gen", "triangular", "--resolution", "16"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    for line in text.lines().skip(1) {
        let (x, fx) = line.split_once(',').unwrap();
        let x: f64 = x.parse().unwrap();
        let fx: f64 = fx.parse().unwrap();
        assert_eq!(fx, 2.0 * x);
    }
}

#[test]
fn config_file_supplies_defaults_but_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            "# sample defaults\ngen = uniform\ndim = 2\nn = 4\nseed = 5\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();

    // everything from the config file
    let status = bin().arg("sample").arg("--config").arg(&cfg).status().unwrap();
    assert!(status.success());
    let from_cfg = std::fs::read_to_string(&out).unwrap();
    assert_eq!(from_cfg.lines().count(), 5); // header + 4 rows

    // the --n flag overrides the config value
    let status = bin()
        .args(["sample", "--n", "7"])
        .arg("--config")
        .arg(&cfg)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 8);
}

#[test]
fn env_var_sets_default_seed_only() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    let base = ["sample", "--gen", "uniform", "--dim", "2", "--n", "6"];

    // MODCOP_SEED supplies the seed when no flag is given...
    for out in [&a, &b] {
        let status = bin()
            .args(base)
            .arg("--out")
            .arg(out)
            .env("MODCOP_SEED", "123")
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // ...but an explicit --seed beats it
    let status = bin()
        .args(base)
        .args(["--seed", "124"])
        .arg("--out")
        .arg(&c)
        .env("MODCOP_SEED", "123")
        .status()
        .unwrap();
    assert!(status.success());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn rho_report_shows_closed_form() {
    let out = bin()
        .args(["rho", "--gen", "beta:0.5,0.5", "--n", "2000", "--seed", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("closed-form rho: -0.250000"), "{stdout}");
}
