use std::fs;
use std::path::Path;

use pnc::cli::{execute, parse_args};
use pnc::montecarlo::CSV_HEADER;

struct Run {
    code: u8,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let argv = std::iter::once("pnc").chain(args.iter().copied());
    let inv = match parse_args(argv) {
        Ok(inv) => inv,
        Err(e) => {
            return Run {
                code: e.exit_code() as u8,
                stdout: String::new(),
                stderr: e.to_string(),
            }
        }
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = execute(inv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write_map(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn validate_map_reports_latin_squares() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_map(
        dir.path(),
        "xor.txt",
        "4\n0 1 2 3\n1 0 3 2\n2 3 0 1\n3 2 1 0\n",
    );
    let r = run(&["validate-map", &good]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout.trim(), "valid Latin square (M = 4)");

    let bad = write_map(
        dir.path(),
        "bad.txt",
        "4\n0 1 2 3\n1 0 3 2\n2 3 0 1\n3 2 0 1\n",
    );
    let r = run(&["validate-map", &bad]);
    assert_eq!(r.code, 1);
    assert!(
        r.stderr.starts_with("invalid map: column 2"),
        "{}",
        r.stderr
    );

    let garbage = write_map(dir.path(), "garbage.txt", "4\n0 1\n");
    assert_eq!(run(&["validate-map", &garbage]).code, 1);
}

#[test]
fn sweep_writes_one_row_per_point() {
    let r = run(&["sweep", "--snr", "10", "--trials", "1000", "--seed", "1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(
        &fields[..8],
        ["none", "1", "1", "1", "qpsk", "ncs", "10", "1000"]
    );
    let errors: u64 = fields[8].parse().unwrap();
    let ser: f64 = fields[9].parse().unwrap();
    assert!((ser - errors as f64 / 1000.0).abs() < 1e-9);
    assert!(r.stderr.starts_with('#'));
}

#[test]
fn reruns_are_byte_identical() {
    let args = [
        "sweep", "--scheme", "jas", "--na", "2", "--nb", "3", "--nr", "2", "--snr", "0:5:10",
        "--trials", "20000", "--seed", "5",
    ];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout.lines().count(), 4);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bc.csv");
    let args = ["bc", "--snr", "5:5:15", "--trials", "5000", "--seed", "3"];
    let to_stdout = run(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let to_file = run(&with_out);
    assert_eq!(to_file.code, 0);
    assert!(to_file.stdout.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap(), to_stdout.stdout);
    assert!(to_stdout.stdout.lines().skip(1).all(|l| l.contains(",bc,")));
}

#[test]
fn map_file_order_must_match_modulation() {
    let dir = tempfile::tempdir().unwrap();
    let bpsk = write_map(dir.path(), "m2.txt", "2\n0 1\n1 0\n");
    let r = run(&[
        "sweep",
        "--mod",
        "qpsk",
        "--map-file",
        &bpsk,
        "--trials",
        "100",
    ]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("order 2"), "{}", r.stderr);

    let ok = run(&[
        "sweep",
        "--mod",
        "bpsk",
        "--map-file",
        &bpsk,
        "--snr",
        "5",
        "--trials",
        "100",
    ]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(run(&["sweep", "--scheme", "tas9"]).code, 2);
    assert_eq!(run(&["sweep", "--snr", "10:5:0"]).code, 2);
    assert_eq!(run(&["sweep", "--na", "0"]).code, 2);
    assert_eq!(
        run(&["sweep", "--phase", "e2e", "--metric", "pair"]).code,
        2
    );
    assert_eq!(run(&["sweep", "--phase", "bc"]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
}

#[test]
fn geometry_lists_singular_states_then_grid() {
    let r = run(&["geometry", "--re", "-1:1", "--im", "-1:1", "--steps", "3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let singular = r
        .stdout
        .lines()
        .filter(|l| l.starts_with("# singular,"))
        .count();
    assert!(singular > 0);
    let grid: Vec<&str> = r
        .stdout
        .lines()
        .skip_while(|l| l.starts_with('#'))
        .collect();
    assert_eq!(grid[0], "re_gamma,im_gamma,d_min");
    assert_eq!(grid.len(), 1 + 9);
    // At γ = 0 user A is invisible, so pairs differing only in s_A merge.
    let centre: Vec<f64> = grid[5].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(centre, [0.0, 0.0, 0.0]);
}

#[test]
fn help_lists_every_flag() {
    let r = run(&["sweep", "--help"]);
    assert_eq!(r.code, 0);
    for flag in [
        "--scheme",
        "--na",
        "--nb",
        "--nr",
        "--mod",
        "--snr",
        "--seed",
        "--trials",
        "--target-errors",
        "--metric",
        "--workers",
        "--map-file",
        "--out",
    ] {
        assert!(r.stderr.contains(flag), "missing {flag}");
    }
}
