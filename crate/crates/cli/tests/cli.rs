use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polarfog::{load_image, save_image16, GrayImage64};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_polarfog"));
    c.env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn polarfog")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn scene(rows: usize, cols: usize, seed: usize) -> GrayImage64 {
    GrayImage64::from_fn(rows, cols, |r, c| {
        let step = if c * 2 >= cols { 0.7 } else { 0.25 };
        step + 0.05 * (((r * 31 + c * 17 + seed * 7) % 13) as f64 / 13.0)
    })
    .unwrap()
}

fn write(dir: &Path, name: &str, img: &GrayImage64) -> PathBuf {
    let path = dir.join(name);
    save_image16(img, &path).unwrap();
    path
}

const FAST: [&str; 8] = ["--layers", "12", "--outputs", "7", "--pad-t", "2", "--pad-s", "4"];

#[test]
fn dehaze_keeps_dims_and_saves_stack() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.png", &scene(40, 36, 0));
    let out = dir.path().join("out.png");
    let stack = dir.path().join("stack");
    let mut args = vec!["dehaze", p(&input), "-o", p(&out), "--save-stack", p(&stack)];
    args.extend(FAST);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let img = load_image::<f64>(&out, true).unwrap();
    assert_eq!(img.dims(), (40, 36));
    let layers = std::fs::read_dir(&stack).unwrap().filter(|e| {
        e.as_ref().unwrap().file_name().to_string_lossy().starts_with("layer_")
    });
    assert_eq!(layers.count(), 7);
    let meta = std::fs::read_to_string(stack.join("meta.txt")).unwrap();
    assert!(meta.contains("layers=7") && meta.contains("rows=40") && meta.contains("cols=36"));
}

#[test]
fn dehaze_default_sequence_length() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.pgm", &scene(48, 48, 1));
    let stack = dir.path().join("stack");
    let out = dir.path().join("out.png");
    let o = run(&["dehaze", p(&input), "-o", p(&out), "--save-stack", p(&stack)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = std::fs::read_to_string(stack.join("meta.txt")).unwrap();
    assert!(meta.contains("layers=51"), "{meta}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.png", &scene(32, 32, 2));
    let mut outs = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}.png"));
        let mut args = vec!["dehaze", p(&input), "-o", p(&out)];
        args.extend(FAST);
        let o = bin().args(&args).env("POLARFOG_THREADS", threads).output().unwrap();
        assert!(o.status.success());
        outs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn metrics_identity_pair() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.png", &scene(24, 24, 3));
    let o = run(&["metrics", "--original", p(&a), "--restored", p(&a)]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "file,e,rbar,sigma,sd,ag,n_o,n_r,n_s,threshold");
    let f: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(f[1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(f[2].parse::<f64>().unwrap(), 1.0);
    assert_eq!(f[3].parse::<f64>().unwrap(), 0.0);
    assert_eq!(f[9], "0.05");
}

#[test]
fn metrics_directories_continue_past_failures() {
    let dir = tempfile::tempdir().unwrap();
    let (orig, rest) = (dir.path().join("o"), dir.path().join("r"));
    std::fs::create_dir_all(&orig).unwrap();
    std::fs::create_dir_all(&rest).unwrap();
    for (i, n) in ["x.png", "y.png", "z.png"].iter().enumerate() {
        write(&orig, n, &scene(16, 16, i));
        if *n != "y.png" {
            write(&rest, n, &scene(16, 16, i + 5));
        }
    }
    let o = run(&["metrics", "--original", p(&orig), "--restored", p(&rest)]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8(o.stdout).unwrap();
    let files: Vec<&str> = stdout.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(files, ["x.png", "z.png"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("y.png"));
}

#[test]
fn config_file_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.png", &scene(32, 32, 4));
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# small run\nlayers = 12\noutputs = 9\npad_t = 2\npad_s = 4\n").unwrap();
    let stack = dir.path().join("stack");
    let out = dir.path().join("o.png");
    let o = run(&[
        "dehaze", p(&input), "-o", p(&out), "--config", p(&cfg), "--outputs", "5", "--save-stack", p(&stack),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta = std::fs::read_to_string(stack.join("meta.txt")).unwrap();
    assert!(meta.contains("layers=5"), "{meta}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.png", &scene(16, 16, 0));
    let out = dir.path().join("o.png");
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "\nlayers = abc\n").unwrap();
    let o = run(&["dehaze", p(&input), "-o", p(&out), "--config", p(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"), "{}", String::from_utf8_lossy(&o.stderr));

    std::fs::write(&cfg, "wavelength = 500\n").unwrap();
    assert_eq!(run(&["dehaze", p(&input), "-o", p(&out), "--config", p(&cfg)]).status.code(), Some(2));
    let missing = dir.path().join("none.conf");
    assert_eq!(run(&["dehaze", p(&input), "-o", p(&out), "--config", p(&missing)]).status.code(), Some(2));
    assert_eq!(run(&["dehaze", p(&input), "-o", p(&out), "--frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["dehaze", p(&input), "-o", p(&out), "--smooth-window", "4"]).status.code(), Some(2));
    let empty = dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    assert_eq!(run(&["dehaze", p(&empty), "-o", p(&out)]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unreadable_input_exits_1_and_others_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.png", &scene(32, 32, 0));
    let bad = dir.path().join("bad.png");
    std::fs::write(&bad, b"not an image").unwrap();
    let out = dir.path().join("out");
    let mut args = vec!["dehaze", p(&good), p(&bad), "-o", p(&out)];
    args.extend(FAST);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(1));
    assert!(out.join("good.png").exists());
    assert!(!out.join("bad.png").exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.png"));
}

#[test]
fn synth_and_histmatch() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "clear.png", &scene(20, 30, 0));
    let hazy = dir.path().join("hazy.png");
    let air = dir.path().join("air.png");
    let o = run(&[
        "synth", p(&input), "-o", p(&hazy), "--beta", "0.5", "--ainf", "0.9", "--depth-scale", "2", "--airlight", p(&air),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let h = load_image::<f64>(&hazy, true).unwrap();
    let a = load_image::<f64>(&air, true).unwrap();
    assert_eq!(a[(0, 0)], 0.0);
    assert!((a[(0, 29)] - 0.9 * (1.0 - (-1.0f64).exp())).abs() < 1e-4);
    assert_eq!(h.dims(), (20, 30));

    let matched = dir.path().join("m.png");
    let o = run(&["histmatch", "--ref", p(&input), p(&hazy), "-o", p(&matched)]);
    assert!(o.status.success());
    assert_eq!(load_image::<f64>(&matched, true).unwrap().dims(), (20, 30));

    assert_eq!(run(&["synth", p(&input), "-o", p(&hazy), "--beta", "-1", "--ainf", "0.9"]).status.code(), Some(2));
}

#[test]
fn demosaic_writes_every_plane() {
    let dir = tempfile::tempdir().unwrap();
    let raw = write(dir.path(), "cap.png", &scene(16, 20, 0));
    let out = dir.path().join("out");
    let o = run(&["demosaic", p(&raw), "-o", p(&out)]);
    assert!(o.status.success());
    for plane in ["i0", "i45", "i90", "i135", "s0", "s1", "s2", "dolp", "aolp"] {
        let img = load_image::<f64>(out.join(format!("cap_{plane}.png")), true).unwrap();
        assert_eq!(img.dims(), (8, 10), "{plane}");
    }
    assert!(std::fs::read_to_string(out.join("cap_ranges.txt")).unwrap().contains("s0=0,2"));
    let odd = write(dir.path(), "odd.png", &scene(15, 20, 0));
    assert_eq!(run(&["demosaic", p(&odd), "-o", p(&out)]).status.code(), Some(1));
}

#[test]
fn pipeline_over_scene_directory() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("scenes");
    std::fs::create_dir_all(&data).unwrap();
    for i in 0..3 {
        write(&data, &format!("scene{i:02}.png"), &scene(64, 64, i));
    }
    let angles = data.join("scene99");
    std::fs::create_dir_all(&angles).unwrap();
    for (deg, k) in [("0", 0), ("45", 1), ("90", 2), ("135", 3)] {
        write(&angles, &format!("{deg}.png"), &scene(32, 32, k));
    }
    let out = dir.path().join("out");
    let mut args = vec!["pipeline", p(&data), "-o", p(&out)];
    args.extend(FAST);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), csv);
    let names: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(
        names,
        ["scene00/s0", "scene00/dolp", "scene01/s0", "scene01/dolp", "scene02/s0", "scene02/dolp", "scene99/s0", "scene99/dolp"]
    );
    for s in ["scene00", "scene99"] {
        for f in ["s0", "s1", "dolp", "aolp", "s0_dehazed", "s0_matched", "dolp_matched"] {
            assert!(out.join(s).join(format!("{f}.png")).exists(), "{s}/{f}");
        }
    }
}
