use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use traj_manifold::read_csv;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_traj-manifold")).args(args).env("TRAJ_MANIFOLD_THREADS", "2").output().unwrap()
}

fn gen_to(path: &Path, args: &[&str]) {
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = bin(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn run_to(input: &Path, out: &Path, args: &[&str]) -> Output {
    let mut full = vec!["run", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()];
    full.extend_from_slice(args);
    bin(&full)
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn gen_swissroll_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("roll.csv");
    gen_to(&path, &["--family", "swissroll", "--T", "6", "--m", "100"]);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 601);
    assert!(text.starts_with("traj,t,"));
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    gen_to(&a, &["--family", "interleaved", "--m", "100", "--seed", "7", "--noise", "0.05"]);
    gen_to(&b, &["--family", "interleaved", "--m", "100", "--seed", "7", "--noise", "0.05"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = dir.path().join("c.csv");
    gen_to(&c, &["--family", "interleaved", "--m", "100", "--seed", "8", "--noise", "0.05"]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn gen_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fan.cfg");
    fs::write(&cfg, "family = fan\nT = 3\nm = 20\nD = 5\nnoise = 0.1\nseed = 4\n").unwrap();
    let path = dir.path().join("fan.csv");
    gen_to(&path, &["--config", cfg.to_str().unwrap()]);
    let ds = read_csv(fs::File::open(&path).unwrap()).unwrap();
    assert_eq!((ds.len(), ds.dim(), ds.trajectory_count()), (60, 5, 3));
}

#[test]
fn gen_then_isomap_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("roll.csv");
    gen_to(&input, &["--family", "swissroll", "--T", "3", "--m", "40"]);
    let out = run_to(&input, &dir.path().join("out"), &["--method", "isomap"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("method = isomap"));
}

#[test]
fn pca_output_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("fan.csv");
    gen_to(&input, &["--family", "fan", "--T", "6", "--m", "30", "--D", "5", "--noise", "0.01"]);
    let out_dir = dir.path().join("out");
    let out = run_to(&input, &out_dir, &["--method", "pca", "--dims", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let emb = rows(&out_dir.join("embedding.csv"));
    assert_eq!(emb[0], ["point", "traj", "t", "y1", "y2", "y3"]);
    assert_eq!(emb.len(), 181);
    assert!(emb[1..].iter().all(|r| r.len() == 6));
    let rv = rows(&out_dir.join("residual_variance.csv"));
    assert_eq!(rv.len() - 1, 5);
    assert!(!out_dir.join("chosen_k_hist.csv").exists());
}

#[test]
fn zero_threshold_matches_isomap_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("roll.csv");
    gen_to(&input, &["--family", "swissroll", "--T", "4", "--m", "50", "--noise", "0.02", "--seed", "3"]);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run_to(&input, &a, &["--method", "entropy-isomap", "--k", "8", "--entropy", "0.0"]).status.success());
    assert!(run_to(&input, &b, &["--method", "isomap", "--k", "8"]).status.success());
    assert_eq!(fs::read(a.join("embedding.csv")).unwrap(), fs::read(b.join("embedding.csv")).unwrap());
}

#[test]
fn interleaved_mixing_matches_graph_dump() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pair.csv");
    gen_to(&input, &["--family", "interleaved", "--m", "80", "--seed", "7", "--noise", "0.01"]);
    let out_dir = dir.path().join("out");
    let out = run_to(&input, &out_dir, &["--method", "entropy-isomap", "--dump-graph"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("cap_fraction = ")));

    let labels = read_csv(fs::File::open(&input).unwrap()).unwrap().trajectory_labels().to_vec();
    let mut recount = [[0usize; 2]; 2];
    for r in &rows(&out_dir.join("graph_neighbors.csv"))[1..] {
        let (p, nb): (usize, usize) = (r[0].parse().unwrap(), r[2].parse().unwrap());
        recount[labels[p]][labels[nb]] += 1;
    }
    let mixing = rows(&out_dir.join("mixing.csv"));
    let mut reported = [[0usize; 2]; 2];
    for (t, r) in mixing[1..].iter().enumerate() {
        for (u, v) in r[1..].iter().enumerate() {
            reported[t][u] = v.parse().unwrap();
        }
    }
    assert_eq!(reported, recount);
    assert!(recount[0][1] + recount[1][0] > 0);
}

#[test]
fn manifest_rerun_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("roll.csv");
    gen_to(&input, &["--family", "swissroll", "--T", "3", "--m", "50", "--seed", "1", "--noise", "0.03"]);
    let first = dir.path().join("first");
    assert!(run_to(&input, &first, &["--method", "entropy-isomap", "--k", "6", "--max-extra", "20"]).status.success());
    let again = dir.path().join("again");
    let manifest = first.join("run_manifest.txt");
    let out = bin(&["run", "--from-manifest", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for entry in fs::read_dir(&first).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(first.join(&name)).unwrap(), fs::read(again.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    assert_eq!(bin(&["run", "--bogus"]).status.code(), Some(2));

    let missing = dir.path().join("missing.csv");
    assert_eq!(run_to(&missing, &out_dir, &[]).status.code(), Some(3));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "traj,t,f0\na,0,1.0\na,1,NaN\n").unwrap();
    let out = run_to(&bad, &out_dir, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(String::from_utf8_lossy(&out.stderr).lines().count(), 1);

    let input = dir.path().join("roll.csv");
    gen_to(&input, &["--family", "swissroll", "--T", "2", "--m", "10"]);
    assert_eq!(run_to(&input, &out_dir, &["--method", "isomap", "--k", "0"]).status.code(), Some(2));
    assert_eq!(run_to(&input, &out_dir, &["--method", "pca", "--skip", "2"]).status.code(), Some(2));

    let dup = dir.path().join("dup.csv");
    fs::write(&dup, "traj,t,f0,f1\na,0,1.0,2.0\na,1,1.0,2.0\nb,0,1.0,2.0\n").unwrap();
    assert_eq!(run_to(&dup, &out_dir, &["--method", "mds", "--dims", "1"]).status.code(), Some(4));

    assert_eq!(bin(&["gen", "--family", "interleaved", "--T", "3"]).status.code(), Some(2));
}

#[test]
fn help_documents_exit_codes() {
    let out = bin(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("TRAJ_MANIFOLD_THREADS"));
    for code in ["0", "2", "3", "4"] {
        assert!(text.contains(code));
    }
}
