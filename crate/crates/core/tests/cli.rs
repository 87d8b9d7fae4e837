use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lacm::suite::BENCH_HEADER;
use tempfile::TempDir;

fn lacm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lacm")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--out", s(dir)];
    args.extend_from_slice(extra);
    let out = lacm(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

fn metrics_line(cs: &Path, gt: &Path, image: &Path) -> (f64, f64) {
    let out = lacm(&["metrics", "--cs", s(cs), "--gt", s(gt), "--image", s(image)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("dsc,pp"));
    let vals: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    (vals[0], vals[1])
}

#[test]
fn synth_writes_reproducible_scene() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    synth(a.path(), &["--looks", "4", "--seed", "9", "--size", "64"]);
    synth(b.path(), &["--looks", "4", "--seed", "9", "--size", "64"]);
    for name in ["observed.pgm", "clean.pgm", "truth.pgm", "manifest.txt"] {
        let x = fs::read(a.path().join(name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    assert!(fs::read(a.path().join("observed.pgm")).unwrap().starts_with(b"P5\n64 64\n255\n"));
    let manifest = fs::read_to_string(a.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("looks = 4") && manifest.contains("seed = 9"));

    let c = TempDir::new().unwrap();
    synth(c.path(), &["--looks", "4", "--seed", "10", "--size", "64"]);
    assert_ne!(
        fs::read(a.path().join("observed.pgm")).unwrap(),
        fs::read(c.path().join("observed.pgm")).unwrap()
    );
}

#[test]
fn synth_rejects_zero_looks() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&lacm(&["synth", "--looks", "0", "--out", s(dir.path())])), 1);
    assert_eq!(code(&lacm(&["synth", "--amplitude", "1.5", "--out", s(dir.path())])), 1);
}

#[test]
fn segment_then_score() {
    let dir = TempDir::new().unwrap();
    let scene = dir.path().join("scene");
    synth(&scene, &[]);
    let observed = scene.join("observed.pgm");
    for solver in ["levelset", "sb", "fp1", "fp2"] {
        let out_dir = dir.path().join(solver);
        let out = lacm(&["segment", "--input", s(&observed), "--out", s(&out_dir), "--solver", solver]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        for name in ["mask.pgm", "phi.pgm", "phi.txt", "overlay.ppm", "report.txt"] {
            assert!(out_dir.join(name).is_file(), "{solver}: {name}");
        }
        let report = fs::read_to_string(out_dir.join("report.txt")).unwrap();
        assert!(report.starts_with(&format!("solver={solver} iterations=")), "{report}");
        let (d, pp) = metrics_line(&out_dir.join("mask.pgm"), &scene.join("truth.pgm"), &observed);
        assert!(d >= 0.95, "{solver}: dsc {d}");
        assert!(pp > 0.0 && pp <= 1.0, "{solver}: pp {pp}");
    }
}

#[test]
fn segment_guards_fixed_point_step() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), &["--size", "32"]);
    let input = dir.path().join("observed.pgm");
    let out = lacm(&[
        "segment", "--input", s(&input), "--out", s(&dir.path().join("o")), "--solver", "fp1", "--lambda", "1",
        "--alpha", "2",
    ]);
    assert_eq!(code(&out), 1);
    assert!(!dir.path().join("o").exists());
}

#[test]
fn segment_zero_iterations_gives_initial_mask() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), &["--size", "40"]);
    let input = dir.path().join("observed.pgm");
    let out_dir = dir.path().join("o");
    let out = lacm(&[
        "segment", "--input", s(&input), "--out", s(&out_dir), "--solver", "levelset", "--max-iter", "0",
        "--init-rect", "5,6,10,12",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mask = lacm::pnm::read_gray(&out_dir.join("mask.pgm")).unwrap().to_mask();
    assert_eq!(mask.count(), 120);
    assert!(mask.get(5, 6) && mask.get(14, 17) && !mask.get(4, 6) && !mask.get(5, 18));
    assert!(fs::read_to_string(out_dir.join("report.txt")).unwrap().contains("iterations=0"));
}

#[test]
fn segment_config_file_and_flags() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), &["--size", "48"]);
    let input = dir.path().join("observed.pgm");
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# short run\nmax_iter = 3\nvol = 0\n").unwrap();
    let out_dir = dir.path().join("o");
    let run = |extra: &[&str]| {
        let mut args = vec!["segment", "--input", s(&input), "--out", s(&out_dir), "--config", s(&conf)];
        args.extend_from_slice(extra);
        lacm(&args)
    };
    assert_eq!(code(&run(&[])), 0);
    assert!(fs::read_to_string(out_dir.join("report.txt")).unwrap().contains("iterations=3"));
    assert_eq!(code(&run(&["--max-iter", "2"])), 0);
    assert!(fs::read_to_string(out_dir.join("report.txt")).unwrap().contains("iterations=2"));
    fs::write(&conf, "no_such_knob = 1\n").unwrap();
    assert_eq!(code(&run(&[])), 1);
}

#[test]
fn io_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.pgm");
    let out = lacm(&["segment", "--input", s(&missing), "--out", s(&dir.path().join("o"))]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());

    let garbage = dir.path().join("garbage.pgm");
    fs::write(&garbage, b"P5\nnot an image").unwrap();
    let out = lacm(&["segment", "--input", s(&garbage), "--out", s(&dir.path().join("o"))]);
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&lacm(&[])), 1);
    assert_eq!(code(&lacm(&["segment"])), 1);
    assert_eq!(code(&lacm(&["bench", "--solvers", "nope"])), 1);
    assert_eq!(code(&lacm(&["--help"])), 0);
}

#[test]
fn metrics_on_identical_and_disjoint_masks() {
    let dir = TempDir::new().unwrap();
    synth(dir.path(), &["--size", "50"]);
    let truth = dir.path().join("truth.pgm");
    let observed = dir.path().join("observed.pgm");
    let (d, _) = metrics_line(&truth, &truth, &observed);
    assert_eq!(d, 1.0);

    let inverted = lacm::pnm::read_gray(&truth).unwrap().to_mask().invert();
    let inv_path = dir.path().join("inverted.pgm");
    lacm::pnm::write_pgm(&inv_path, &lacm::pnm::GrayImage::from_mask(&inverted)).unwrap();
    let (d, pp_inv) = metrics_line(&inv_path, &truth, &observed);
    assert_eq!(d, 0.0);
    let (_, pp) = metrics_line(&truth, &truth, &observed);
    assert!((pp - pp_inv).abs() < 1e-12);

    let out = lacm(&["metrics", "--cs", s(&truth), "--gt", s(&truth), "--image", s(&observed), "--raw-pp"]);
    assert_eq!(code(&out), 0);

    let small = TempDir::new().unwrap();
    synth(small.path(), &["--size", "20"]);
    let out = lacm(&["metrics", "--cs", s(&truth), "--gt", s(&truth), "--image", s(&small.path().join("observed.pgm"))]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bench_subset_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("bench.csv");
    let out = lacm(&["bench", "--solvers", "fp1,fp2", "--out", s(&csv)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.trim_end(), fs::read_to_string(&csv).unwrap().trim_end());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], BENCH_HEADER);
    assert_eq!(lines.len(), 1 + 2 * 2);
    for row in &lines[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), BENCH_HEADER.split(',').count());
        assert!(cols[0] == "fp1" || cols[0] == "fp2");
        assert!(cols[5].parse::<f64>().unwrap() >= 0.9, "{row}");
    }
}

#[test]
fn bench_default_covers_all_solvers() {
    let out = lacm(&["bench"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let dsc: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
        assert!(dsc >= 0.9, "{row}");
    }
}
