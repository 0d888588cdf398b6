use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use greedyprune::greedy::{greedy_prune, PruneConfig};
use greedyprune::io::{checksum_hex, read_selection, read_token_file, write_token_file, SelectionRecord};
use greedyprune::saliency::compute_saliency;
use greedyprune::TokenMatrix;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_greedyprune"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn greedyprune")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[track_caller]
fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
}

#[track_caller]
fn exit_code(args: &[&str]) -> i32 {
    let out = run(args);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error"), "no error message for {args:?}: {stderr}");
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// 576 planted tokens: 64 clusters of 9 in 256 dimensions.
fn planted_file(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("planted.tokd");
    ok(&["gen", "--clusters", "64", "--per-cluster", "9", "--dim", "256", "--seed", "3", "--out", s(&path)]);
    path
}

#[test]
fn flops_goldens() {
    let base = ["flops", "--layers", "32", "--prune-layer", "1", "--text-len", "64", "--visual", "576"];
    let llama = ["--hidden", "4096", "--ffn", "11008"];
    let ratio = ok(&[&base[..], &["--pruned", "64"], &llama[..]].concat());
    assert_eq!(ratio, "0.230345\n");
    let tokens = ok(&[&base[..], &["--target", "0.230345"], &llama[..]].concat());
    assert_eq!(tokens, "64\n");
    let full = ok(&[&base[..], &["--pruned", "576"], &llama[..]].concat());
    assert_eq!(full, "1.000000\n");
}

#[test]
fn flops_unreachable_target_is_an_algorithm_error() {
    let code = exit_code(&[
        "flops",
        "--layers",
        "32",
        "--prune-layer",
        "8",
        "--text-len",
        "64",
        "--visual",
        "576",
        "--target",
        "0.01",
        "--hidden",
        "4096",
        "--ffn",
        "11008",
    ]);
    assert_eq!(code, 4);
}

#[test]
fn gen_writes_tokens_and_sidecar() {
    let dir = TempDir::new().unwrap();
    let path = planted_file(&dir);
    let (tokens, query) = read_token_file(&path).unwrap();
    assert_eq!((tokens.n(), tokens.dim()), (576, 256));
    assert_eq!(query.unwrap().len(), 256);
    assert!(dir.path().join("planted.tokd.planted.json").exists());
}

#[test]
fn prune_matches_the_library() {
    let dir = TempDir::new().unwrap();
    let path = planted_file(&dir);
    let record = SelectionRecord::from_toml(&ok(&["prune", "-i", s(&path), "-m", "64", "--no-timing"])).unwrap();

    let (tokens, query) = read_token_file(&path).unwrap();
    let weights = compute_saliency(&tokens, &query.unwrap()).unwrap();
    let (sel, _) = greedy_prune(&tokens, &weights, &PruneConfig::new(64, 0.9)).unwrap();
    let want: Vec<u64> = sel.sorted_indices().iter().map(|&i| i as u64).collect();

    assert_eq!(record.method, "greedy");
    assert_eq!(record.budget, 64);
    assert_eq!(record.tau, Some(0.9));
    assert_eq!(record.indices, want);
    assert_eq!(record.feasibility_violation_count, 0);
    assert_eq!(record.runtime_microseconds, 0);
    assert_eq!(record.input_checksum, checksum_hex(&std::fs::read(&path).unwrap()));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let path = planted_file(&dir);
    for method in ["greedy", "topk", "maxmin", "random"] {
        let args = ["prune", "-i", s(&path), "-m", "32", "--method", method, "--seed", "9", "--no-timing"];
        assert_eq!(ok(&args), ok(&args), "{method}");
    }
    let args = ["compare", "-i", s(&path), "-m", "64", "--no-timing", "--format", "tsv"];
    assert_eq!(ok(&args), ok(&args));

    let again = dir.path().join("again.tokd");
    ok(&["gen", "--clusters", "64", "--per-cluster", "9", "--dim", "256", "--seed", "3", "--out", s(&again)]);
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn budget_above_n_keeps_everything() {
    let dir = TempDir::new().unwrap();
    let path = planted_file(&dir);
    for method in ["greedy", "topk"] {
        let text = ok(&["prune", "-i", s(&path), "-m", "600", "--method", method, "--no-timing"]);
        assert_eq!(SelectionRecord::from_toml(&text).unwrap().indices.len(), 576, "{method}");
    }
}

#[test]
fn prune_writes_a_record_file() {
    let dir = TempDir::new().unwrap();
    let path = planted_file(&dir);
    let out = dir.path().join("sel.toml");
    assert_eq!(ok(&["prune", "-i", s(&path), "-m", "16", "--method", "topk", "-o", s(&out)]), "");
    let record = read_selection(&out).unwrap();
    assert_eq!(record.method, "topk");
    assert_eq!(record.tau, None);
    assert_eq!(record.indices.len(), 16);
}

#[test]
fn compare_reports_every_method_in_order() {
    let dir = TempDir::new().unwrap();
    let path = planted_file(&dir);
    let text = ok(&[
        "compare",
        "-i",
        s(&path),
        "-m",
        "64",
        "--methods",
        "greedy,topk,grid",
        "--grid",
        "24x24",
        "--no-timing",
        "--format",
        "tsv",
    ]);
    let lines: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(lines.len(), 4);
    let recall = lines[0].iter().position(|&h| h == "recall").unwrap();
    let methods: Vec<&str> = lines[1..].iter().map(|r| r[0]).collect();
    assert_eq!(methods, ["greedy", "topk", "grid"]);
    // One planted token per cluster; greedy finds all of them.
    assert_eq!(lines[1][recall].parse::<f64>().unwrap(), 1.0);
    assert!(lines[2][recall].parse::<f64>().unwrap() < 1.0);
}

#[test]
fn sweep_lists_each_threshold() {
    let dir = TempDir::new().unwrap();
    let path = planted_file(&dir);
    let text = ok(&["sweep-tau", "-i", s(&path), "-m", "64", "--taus=-0.5,0,0.9,1", "--format", "tsv"]);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    let taus: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(taus, [-0.5, 0.0, 0.9, 1.0]);
    // Cross-cluster cosines are 0, so at -0.5 every pair conflicts and only
    // the first pivot survives.
    assert_eq!(rows[0][2], "1");
    assert_eq!(rows[1][2], "64");
}

#[test]
fn saliency_file_overrides_the_query() {
    let dir = TempDir::new().unwrap();
    let tokens = TokenMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.01], [0.5, 0.5]]).unwrap();
    let path = dir.path().join("small.tokd");
    write_token_file(&path, &tokens, None).unwrap();
    assert_eq!(exit_code(&["prune", "-i", s(&path), "-m", "2"]), 2);

    let weights = dir.path().join("w.txt");
    std::fs::write(&weights, "0.9 0.1\n0.8 0.3\n").unwrap();
    let record = SelectionRecord::from_toml(&ok(&[
        "prune",
        "-i",
        s(&path),
        "--saliency-file",
        s(&weights),
        "-m",
        "2",
        "--no-backfill",
        "--no-timing",
    ]))
    .unwrap();
    // Token 2 duplicates token 0 and is eliminated; token 3 is next.
    assert_eq!(record.indices, [0, 3]);

    std::fs::write(&weights, "0.9 0.1 0.8").unwrap();
    assert_eq!(exit_code(&["prune", "-i", s(&path), "--saliency-file", s(&weights), "-m", "2"]), 2);
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let path = planted_file(&dir);
    let p = s(&path);
    assert_eq!(exit_code(&["prune", "-i", p, "-m", "8", "--method", "grid"]), 2);
    assert_eq!(exit_code(&["prune", "-i", p, "-m", "8", "--method", "grid", "--grid", "10x10"]), 2);
    assert_eq!(exit_code(&["prune", "-i", p, "-m", "8", "--method", "grid", "--grid", "24by24"]), 2);
    assert_eq!(exit_code(&["prune", "-i", p, "-m", "0"]), 2);
    assert_eq!(exit_code(&["prune", "-i", p]), 2);
    assert_eq!(exit_code(&["frobnicate"]), 2);
}

#[test]
fn io_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.tokd");
    assert_eq!(exit_code(&["prune", "-i", s(&missing), "-m", "8"]), 3);

    let garbage = dir.path().join("garbage.tokd");
    std::fs::write(&garbage, b"not a token file at all").unwrap();
    assert_eq!(exit_code(&["prune", "-i", s(&garbage), "-m", "8"]), 3);

    let path = planted_file(&dir);
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 4);
    std::fs::write(&garbage, bytes).unwrap();
    assert_eq!(exit_code(&["prune", "-i", s(&garbage), "-m", "8"]), 3);
}

#[test]
fn oversized_exact_instance_exits_4() {
    let dir = TempDir::new().unwrap();
    let path = planted_file(&dir);
    assert_eq!(exit_code(&["prune", "-i", s(&path), "-m", "8", "--method", "exact", "--exact-cap", "10"]), 4);
}

#[test]
fn exact_agrees_with_greedy_on_a_small_planted_instance() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("tiny.tokd");
    ok(&["gen", "--clusters", "4", "--per-cluster", "3", "--dim", "16", "--seed", "1", "--out", s(&path)]);
    let run = |m: &str| {
        SelectionRecord::from_toml(&ok(&["prune", "-i", s(&path), "-m", "4", "--method", m, "--no-timing"])).unwrap()
    };
    let (greedy, exact) = (run("greedy"), run("exact"));
    assert_eq!(greedy.indices, exact.indices);
    assert_eq!(greedy.objective, exact.objective);
}

#[test]
fn viz_draws_the_grid() {
    let dir = TempDir::new().unwrap();
    let path = planted_file(&dir);
    let sel = dir.path().join("sel.toml");
    ok(&["prune", "-i", s(&path), "-m", "64", "-o", s(&sel)]);
    let stem = dir.path().join("map");
    ok(&["viz", "-s", s(&sel), "-i", s(&path), "--grid", "24x24", "-o", s(&stem), "--cell-px", "2"]);

    let pgm = std::fs::read(dir.path().join("map.pgm")).unwrap();
    let header = b"P5\n48 48\n255\n";
    assert_eq!(&pgm[..header.len()], header);
    let pixels = &pgm[header.len()..];
    assert_eq!(pixels.len(), 48 * 48);
    assert_eq!(pixels.iter().filter(|&&p| p == 240).count(), 64 * 4);

    let svg = std::fs::read_to_string(dir.path().join("map.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));

    assert_eq!(exit_code(&["viz", "-s", s(&sel), "-i", s(&path), "--grid", "20x20", "-o", s(&stem)]), 2);

    let other = dir.path().join("other.tokd");
    ok(&["gen", "--clusters", "64", "--per-cluster", "9", "--dim", "256", "--seed", "4", "--out", s(&other)]);
    assert_eq!(exit_code(&["viz", "-s", s(&sel), "-i", s(&other), "--grid", "24x24", "-o", s(&stem)]), 2);
}
