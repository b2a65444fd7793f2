use std::fs;
use std::path::Path;

use wcpd::cli::{run, EXIT_IO, EXIT_OK, EXIT_STEPSIZE, EXIT_UNKNOWN, EXIT_USAGE};
use wcpd::image::{encode_pgm, parse_pgm, phantom, PgmFormat};
use wcpd::trace::{parse_key_values, parse_trace_csv, TRACE_HEADER};

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = run(
        std::iter::once("wcpd").chain(args.iter().copied()),
        &mut o,
        &mut e,
    );
    (
        code,
        String::from_utf8(o).unwrap(),
        String::from_utf8(e).unwrap(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn example3_trace_has_one_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let (code, stdout, _) = call(&[
        "solve",
        "example3",
        "--iters",
        "2001",
        "--seed",
        "42",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("iterations=2001"));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(TRACE_HEADER));
    let rows = parse_trace_csv(&text).unwrap();
    assert_eq!(rows.len(), 2002);
    assert_eq!(rows.last().unwrap().dist, Some(0.0));
    let meta =
        parse_key_values(&fs::read_to_string(dir.path().join("trace.csv.meta")).unwrap()).unwrap();
    assert_eq!(meta["experiment"], "example3");
    assert_eq!(meta["seed"], "42");
    assert_eq!(meta["regime"], "dual-first");
}

#[test]
fn example4_inside_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    assert_eq!(
        call(&[
            "solve",
            "example4",
            "--start",
            "inside",
            "--seed",
            "7",
            "--out",
            s(&out)
        ])
        .0,
        EXIT_OK
    );
    let rows = parse_trace_csv(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(rows.last().unwrap().dist.unwrap() <= 1e-6);
}

#[test]
fn multi_start_writes_indexed_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let (code, stdout, _) = call(&[
        "solve",
        "example1",
        "--seed",
        "3",
        "--iters",
        "50",
        "--starts",
        "3",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(stdout.lines().count(), 3);
    for i in 0..3 {
        assert!(dir.path().join(format!("run.{i}.csv")).exists());
        assert!(dir.path().join(format!("run.{i}.csv.meta")).exists());
    }
    let a = fs::read_to_string(dir.path().join("run.0.csv")).unwrap();
    let b = fs::read_to_string(dir.path().join("run.1.csv")).unwrap();
    assert_ne!(a, b, "starts are independent");
}

#[test]
fn stepsize_violation_exits_2() {
    let (code, _, err) = call(&[
        "solve", "l1wc", "--n", "300", "--m", "200", "--sigma", "0.6", "--seed", "1",
    ]);
    assert_eq!(code, EXIT_STEPSIZE);
    assert!(err.contains("sigma*rho"), "{err}");
    assert_eq!(
        call(&["solve", "example3", "--seed", "1", "--tau", "2"]).0,
        EXIT_STEPSIZE
    );
}

#[test]
fn usage_errors() {
    assert_eq!(call(&[]).0, EXIT_USAGE);
    assert_eq!(
        call(&["solve", "example3", "--iters", "many"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        call(&["solve", "l1"]).0,
        EXIT_USAGE,
        "randomized data needs a seed"
    );
    assert_eq!(
        call(&["solve", "example4", "--seed", "1", "--start", "warm"]).0,
        EXIT_USAGE
    );
    let (code, out, _) = call(&["--version"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("wcpd"));
}

#[test]
fn unknown_experiment_lists_names() {
    let (code, _, err) = call(&["solve", "example9", "--seed", "1"]);
    assert_eq!(code, EXIT_UNKNOWN);
    for name in ["example1", "example4-variant", "l1wc"] {
        assert!(err.contains(name));
    }
    assert_eq!(call(&["sharpness", "example9"]).0, EXIT_UNKNOWN);
}

#[test]
fn config_file_fills_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# defaults\nseed = 5\niters = 10\nsigma = 5\n").unwrap();
    // the file's sigma is invalid, the flag wins
    let (code, stdout, _) = call(&["solve", "example3", "--config", s(&cfg), "--sigma", "0.75"]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("iterations=10"));
    assert_eq!(
        call(&["solve", "example3", "--config", s(&cfg)]).0,
        EXIT_STEPSIZE
    );
    fs::write(&cfg, "seed=5\ncolour=blue\n").unwrap();
    assert_eq!(
        call(&["solve", "example3", "--config", s(&cfg)]).0,
        EXIT_USAGE
    );
}

#[test]
fn sharpness_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid.csv");
    let (code, stdout, _) = call(&[
        "sharpness",
        "example2",
        "--mu",
        "1",
        "--half",
        "1",
        "--step",
        "0.05",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    let min: f64 = stdout
        .split("min=")
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(min < 0.0);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("x,y,value\n"));
    assert_eq!(text.lines().count(), 1 + 41 * 41);

    let (_, stdout, _) = call(&["sharpness", "example3", "--mu", "1", "--step", "0.05"]);
    let min: f64 = stdout
        .split("min=")
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(min >= -1e-12);

    let (_, stdout, _) = call(&[
        "sharpness",
        "example4-variant",
        "--mu",
        "1",
        "--step",
        "0.05",
    ]);
    let min: f64 = stdout
        .split("min=")
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(min < 0.0);
}

fn psnr_pair(line: &str) -> (f64, f64) {
    let field = |k: &str| -> f64 {
        line.split(k)
            .nth(1)
            .unwrap()
            .split(' ')
            .next()
            .unwrap()
            .trim()
            .parse()
            .unwrap()
    };
    (field("psnr_noisy="), field("psnr_out="))
}

#[test]
fn tv_improves_phantom() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("phantom.pgm");
    let output = dir.path().join("out.pgm");
    assert_eq!(call(&["image", "phantom", s(&input)]).0, EXIT_OK);
    let (code, stdout, _) = call(&[
        "image",
        "tv",
        "--model",
        "wc2",
        "--lambda",
        "8",
        "--noise",
        "0.1",
        "--seed",
        "1",
        "--iters",
        "300",
        s(&input),
        s(&output),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.starts_with("model=wc2"));
    let (noisy, out) = psnr_pair(&stdout);
    assert!(out > noisy, "{stdout}");
    let restored = parse_pgm(&fs::read(&output).unwrap()).unwrap();
    assert_eq!((restored.width, restored.height), (64, 64));
}

#[test]
fn deblur_weakly_convex_improves_phantom() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("phantom.pgm");
    fs::write(
        &input,
        encode_pgm(&phantom(32).unwrap().to_gray(255), PgmFormat::Binary),
    )
    .unwrap();
    let output = dir.path().join("out.pgm");
    let (code, stdout, _) = call(&[
        "image",
        "deblur",
        "--model",
        "wc",
        "--std",
        "4",
        "--eps",
        "0.01",
        "--seed",
        "1",
        s(&input),
        s(&output),
    ]);
    assert_eq!(code, EXIT_OK);
    let (noisy, out) = psnr_pair(&stdout);
    assert!(out > noisy, "{stdout}");
}

#[test]
fn image_commands_need_seed() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("p.pgm");
    call(&["image", "phantom", "--size", "8", s(&input)]);
    let out = dir.path().join("o.pgm");
    assert_eq!(call(&["image", "tv", s(&input), s(&out)]).0, EXIT_USAGE);
}

#[test]
fn malformed_pgm_reports_offset() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pgm");
    fs::write(&bad, b"P2\n2 2\n255\n0 1 x 3\n").unwrap();
    let out = dir.path().join("o.pgm");
    let (code, _, err) = call(&["image", "tv", "--seed", "1", s(&bad), s(&out)]);
    assert_eq!(code, EXIT_IO);
    assert!(err.contains("byte 15"), "{err}");
}

#[test]
fn p5_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pgm");
    let b = dir.path().join("b.pgm");
    let c = dir.path().join("c.pgm");
    call(&["image", "phantom", "--size", "20", s(&a)]);
    assert_eq!(call(&["image", "convert", s(&a), s(&b)]).0, EXIT_OK);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(
        call(&["image", "convert", "--format", "ascii", s(&a), s(&c)]).0,
        EXIT_OK
    );
    assert_eq!(
        parse_pgm(&fs::read(&c).unwrap()).unwrap(),
        parse_pgm(&fs::read(&a).unwrap()).unwrap()
    );
}

#[test]
fn shipped_phantom_matches_generator() {
    let shipped = fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/data/phantom64.pgm")).unwrap();
    assert_eq!(
        shipped,
        encode_pgm(&phantom(64).unwrap().to_gray(255), PgmFormat::Binary)
    );
}
