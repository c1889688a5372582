use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use forumsim::corpus::Corpus;
use forumsim::embed::{embed_matrix, user_centroids, Dims, EmbeddingMode};
use forumsim::simcore::{cosine_matrix, WeightedPosts};
use forumsim::textprep::{build_dictionary, PrepOptions};
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forumsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn eight_user_forum(dir: &Path) -> PathBuf {
    let cfg = dir.join("forum.toml");
    fs::write(
        &cfg,
        "n_users = 8\nn_communities = 2\nposts_per_user = [6, 12]\ntopic_weight = 0.2\nseed = 11\n",
    )
    .unwrap();
    let corpus = dir.join("forum.jsonl");
    ok(&["synth", "forum", "-c", s(&cfg), "-o", s(&corpus)]);
    corpus
}

#[test]
fn ingest_sample_thread() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("norm.jsonl");
    let table = ok(&["ingest", "-i", s(&fixture("sample_thread.jsonl")), "-o", s(&out)]);
    assert!(table.starts_with("posts: 4\nthreads: 1\nusers: 4\n"));
    let row = table.lines().find(|l| l.starts_with("posts per thread")).unwrap();
    assert_eq!(row.split_whitespace().last(), Some("4"));
    let again = dir.path().join("again.jsonl");
    ok(&["ingest", "-i", s(&out), "-o", s(&again)]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn ingest_empty_file() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let table = ok(&["ingest", "-i", s(&empty), "-o", s(&dir.path().join("o.jsonl"))]);
    assert!(table.starts_with("posts: 0\nthreads: 0\nusers: 0\n"));
    assert!(table.lines().skip(4).all(|l| l.split_whitespace().rev().take(5).all(|v| v == "0")));
}

#[test]
fn ingest_malformed_line() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(
        &bad,
        "{\"type\":\"thread\",\"thread_id\":\"t1\",\"title\":\"x\"}\n{\"type\":\"post\",\"post_id\":\n",
    )
    .unwrap();
    let out = run(&["ingest", "-i", s(&bad), "-o", s(&dir.path().join("o.jsonl"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn unknown_thread_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(
        &bad,
        "{\"type\":\"post\",\"post_id\":\"p1\",\"thread_id\":\"t9\",\"user_id\":\"u\",\"body\":\"b\"}\n",
    )
    .unwrap();
    let out = run(&["stats", "-i", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t9"));
}

#[test]
fn csv_input() {
    let dir = TempDir::new().unwrap();
    let posts = dir.path().join("posts.csv");
    let threads = dir.path().join("threads.csv");
    fs::write(&threads, "thread_id,title\nt1,hello world\n").unwrap();
    fs::write(&posts, "post_id,thread_id,user_id,body\np1,t1,a,\"first, post\"\np2,t1,b,second\n").unwrap();
    let table = ok(&["stats", "-i", s(&posts), "--threads", s(&threads)]);
    assert!(table.starts_with("posts: 2\nthreads: 1\nusers: 2\n"));
    let out = run(&["stats", "-i", s(&posts)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["pipeline"]).status.code(), Some(1));
    assert_eq!(
        run(&["pipeline", "-i", "x", "-o", "y", "--lambda", "0.1", "--lambda-quantile", "0.5"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["embed", "-m", "x", "-o", "y", "--dims", "many"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn pipeline_artifacts_and_report() {
    let dir = TempDir::new().unwrap();
    let corpus = eight_user_forum(dir.path());
    let out = dir.path().join("out");
    ok(&["pipeline", "-i", s(&corpus), "-o", s(&out), "-k", "2", "--baseline"]);
    for name in [
        "embedding.csv",
        "embedding.spectrum.csv",
        "centroids.csv",
        "user_distances.csv",
        "dendrogram.json",
        "dendrogram.nwk",
        "mst.dot",
        "mst_edges.csv",
        "labels.csv",
        "report.toml",
        "baseline_distances.csv",
        "baseline_dendrogram.json",
        "baseline_dendrogram.nwk",
        "baseline_labels.csv",
    ] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let report = fs::read_to_string(out.join("report.toml")).unwrap();
    assert!(report.contains("lambda_source = \"quantile\""));
    assert!(report.contains("lambda_quantile = 0.75"));
    assert!(report.contains("users = 8"));
    let lambda: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("lambda = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(lambda > 0.0 && lambda < 1.0);
    let edges = fs::read_to_string(out.join("mst_edges.csv")).unwrap();
    assert_eq!(edges.lines().count(), 1 + 7);
    let given = dir.path().join("given");
    ok(&["pipeline", "-i", s(&corpus), "-o", s(&given), "--lambda", "0.2"]);
    let report = fs::read_to_string(given.join("report.toml")).unwrap();
    assert!(report.contains("lambda = 0.2\n") && report.contains("lambda_source = \"given\""));
    assert!(!report.contains("lambda_quantile"));
}

#[test]
fn lambda_zero_is_the_author_free_measure() {
    let dir = TempDir::new().unwrap();
    let path = eight_user_forum(dir.path());
    let out = dir.path().join("out");
    ok(&["pipeline", "-i", s(&path), "-o", s(&out), "--lambda", "0"]);
    let written = fs::read_to_string(out.join("user_distances.csv")).unwrap();

    let corpus = Corpus::from_jsonl(fs::File::open(&path).unwrap()).unwrap();
    let vocab = build_dictionary(&corpus, &PrepOptions::default());
    let posts = WeightedPosts::<f64>::from_corpus(&corpus, &vocab).unwrap();
    let refs: Vec<_> = posts.posts.iter().map(|p| &p.weights).collect();
    let mut d = cosine_matrix(&refs).map(|c| (1.0 - c).max(0.0));
    d.fill_diagonal(0.0);
    let e = embed_matrix(posts.doc_ids(), &d, Dims::Auto, EmbeddingMode::PaperLiteral).unwrap();
    let g = user_centroids(&e, &corpus).unwrap();
    let mut expected = Vec::new();
    forumsim::io::write_matrix_csv(&mut expected, &g.user_ids, &g.distances).unwrap();
    assert_eq!(written, String::from_utf8(expected).unwrap());
}

#[test]
fn filtered_pipeline_excludes_users() {
    let dir = TempDir::new().unwrap();
    let corpus = eight_user_forum(dir.path());
    let out = dir.path().join("out");
    ok(&["pipeline", "-i", s(&corpus), "-o", s(&out), "--min-posts", "9"]);
    let report = fs::read_to_string(out.join("report.toml")).unwrap();
    let users: usize = report.lines().find_map(|l| l.strip_prefix("users = ")).unwrap().parse().unwrap();
    let excluded: usize = report
        .lines()
        .find_map(|l| l.strip_prefix("excluded_users = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(users < 8);
    assert_eq!(users + excluded, 8);
    let out = run(&["pipeline", "-i", s(&corpus), "-o", s(&out), "--min-posts", "1000"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn staged_commands_match_pipeline() {
    let dir = TempDir::new().unwrap();
    let corpus = eight_user_forum(dir.path());
    let d = dir.path();
    ok(&["pipeline", "-i", s(&corpus), "-o", s(&d.join("p"))]);
    ok(&["similarity", "-i", s(&corpus), "-o", s(&d.join("m.csv"))]);
    ok(&["embed", "-m", s(&d.join("m.csv")), "-o", s(&d.join("e.csv"))]);
    ok(&["users", "-i", s(&corpus), "-e", s(&d.join("e.csv")), "-d", s(&d.join("u.csv"))]);
    ok(&["cluster", "-d", s(&d.join("u.csv")), "--newick", s(&d.join("t.nwk"))]);
    ok(&["mst", "-d", s(&d.join("u.csv")), "--dot", s(&d.join("t.dot"))]);
    for (a, b) in [
        ("p/embedding.csv", "e.csv"),
        ("p/embedding.spectrum.csv", "e.spectrum.csv"),
        ("p/user_distances.csv", "u.csv"),
        ("p/dendrogram.nwk", "t.nwk"),
        ("p/mst.dot", "t.dot"),
    ] {
        assert_eq!(fs::read(d.join(a)).unwrap(), fs::read(d.join(b)).unwrap(), "{a} vs {b}");
    }
    ok(&["users", "-i", s(&corpus), "--average", "-d", s(&d.join("avg.csv"))]);
    let avg = fs::read_to_string(d.join("avg.csv")).unwrap();
    assert_eq!(avg.lines().count(), 9);
}

#[test]
fn cluster_and_mst_on_hand_matrix() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("d.csv");
    fs::write(&m, "id,1,2,3\n1,0,1,2\n2,1,0,3\n3,2,3,0\n").unwrap();
    assert_eq!(ok(&["cluster", "-d", s(&m)]), "(3:3,(1:1,2:1):2);\n");
    assert_eq!(ok(&["cluster", "-d", s(&m), "--linkage", "single"]), "(3:2,(1:1,2:1):1);\n");
    let labels = dir.path().join("l.csv");
    ok(&["cluster", "-d", s(&m), "-k", "2", "--labels", s(&labels)]);
    assert_eq!(fs::read_to_string(&labels).unwrap(), "id,cluster\n1,0\n2,0\n3,2\n");
    let dot = ok(&["mst", "-d", s(&m)]);
    assert!(dot.contains("\"1\" -- \"2\" [weight=1.000000];"));
    assert!(dot.contains("\"1\" -- \"3\" [weight=2.000000];"));
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "id,1,2\n1,0,1\n2,5,0\n").unwrap();
    assert_eq!(run(&["cluster", "-d", s(&bad)]).status.code(), Some(1));
}

#[test]
fn scatter_plots() {
    let dir = TempDir::new().unwrap();
    let corpus = eight_user_forum(dir.path());
    let out = dir.path().join("out");
    ok(&["pipeline", "-i", s(&corpus), "-o", s(&out), "--dims", "3"]);
    let svg = dir.path().join("s.svg");
    let (emb, cents) = (out.join("embedding.csv"), out.join("centroids.csv"));
    let args = [
        "scatter",
        "-e",
        s(&emb),
        "--centroids",
        s(&cents),
        "-i",
        s(&corpus),
        "-o",
        s(&svg),
    ];
    ok(&args);
    let first = fs::read_to_string(&svg).unwrap();
    assert!(first.contains(">PC1</text>") && first.contains(">PC2</text>"));
    assert_eq!(first.matches(r#"r="9""#).count(), 8);
    ok(&args);
    assert_eq!(first, fs::read_to_string(&svg).unwrap());

    let mut axes = args.to_vec();
    axes.extend(["--axes", "2,3"]);
    ok(&axes);
    assert!(fs::read_to_string(&svg).unwrap().contains(">PC3</text>"));
    let mut bad = args.to_vec();
    bad.extend(["--axes", "1,4"]);
    assert_eq!(run(&bad).status.code(), Some(1));
}

#[test]
fn scatter_single_post() {
    let dir = TempDir::new().unwrap();
    let e = dir.path().join("e.csv");
    fs::write(&e, "post_id,coord_1,coord_2\np1,0.5,-0.5\n").unwrap();
    let svg = dir.path().join("s.svg");
    ok(&["scatter", "-e", s(&e), "-o", s(&svg)]);
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    assert_eq!(text.matches("<circle").count(), 1);
}

#[test]
fn synth_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    for name in ["a", "b"] {
        ok(&["synth", "forum", "--sparse", "--seed", "3", "-o", s(&d.join(format!("{name}.jsonl"))), "--labels", s(&d.join(format!("{name}.csv")))]);
        ok(&["synth", "gaussian", "-o", s(&d.join(format!("{name}.pts"))), "--lambda", "0.5", "--matrix", s(&d.join(format!("{name}.m")))]);
    }
    for ext in ["jsonl", "csv", "pts", "m"] {
        assert_eq!(fs::read(d.join(format!("a.{ext}"))).unwrap(), fs::read(d.join(format!("b.{ext}"))).unwrap());
    }
    let pts = fs::read_to_string(d.join("a.pts")).unwrap();
    assert_eq!(pts.lines().count(), 401);
    let cfg = ok(&["synth", "gaussian", "--print-config"]);
    assert!(cfg.contains("points_per_group = 100"));
    let bad = d.join("bad.toml");
    fs::write(&bad, "n_users = 4\nunknown_key = 1\n").unwrap();
    assert_eq!(run(&["synth", "forum", "-c", s(&bad), "-o", s(&d.join("x"))]).status.code(), Some(1));
}
