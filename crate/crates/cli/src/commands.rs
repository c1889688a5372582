use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use forumsim::corpus::Corpus;
use forumsim::embed::{
    average_pairwise_user_distance, embed_matrix, user_centroids, Embedding, EmbeddingMode,
};
use forumsim::netstruct::{agglomerate, baseline_user_similarity, minimum_spanning_tree, Linkage};
use forumsim::simcore::{
    select_lambda, similarity_matrix, DissimilarityMatrix, WeightedPosts, DEFAULT_LAMBDA_QUANTILE,
};
use forumsim::synthgen::{
    generate_forum, generate_gaussian_groups, generate_sparse_forum, planted_labels,
    GaussianGroupsConfig, SyntheticForumConfig,
};
use forumsim::textprep::{build_dictionary, write_token_dump, PrepOptions, StopwordList};
use forumsim::{io, Matrix};
use serde::Serialize;

use crate::args::*;
use crate::error::{io_error, stage, CliError, CliResult};
use crate::svg;

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| io_error(path, e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> forumsim::Result<()>) -> CliResult<()> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(|e| io_error(path, e))?;
    w.flush().map_err(|e| io_error(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn print(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::invalid(format!("stdout: {e}")))
}

pub fn load_corpus(input: &InputArgs) -> CliResult<Corpus> {
    let format = input.format.unwrap_or_else(|| {
        match input.input.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => FormatArg::Csv,
            _ => FormatArg::Jsonl,
        }
    });
    let what = input.input.display().to_string();
    let loaded = match format {
        FormatArg::Jsonl => Corpus::from_jsonl(open(&input.input)?),
        FormatArg::Csv => {
            let threads = input
                .threads
                .as_ref()
                .ok_or_else(|| CliError::invalid("CSV input needs --threads"))?;
            Corpus::from_csv(open(&input.input)?, open(threads)?)
        }
    };
    stage(&format!("corpus {what}"), loaded)
}

pub fn prep_options(prep: &PrepArgs) -> CliResult<PrepOptions> {
    let stopwords = match &prep.stopwords {
        Some(p) => stage("stopwords", StopwordList::from_file(p))?,
        None => StopwordList::english(),
    };
    Ok(PrepOptions {
        stopwords,
        stem: !prep.no_stem,
        strip_html: !prep.keep_html,
        append_title: true,
    })
}

fn subset(corpus: &Corpus, args: &SubsetArgs) -> CliResult<Corpus> {
    if args.min_posts == 0 && args.max_posts.is_none() {
        return Ok(corpus.clone());
    }
    stage("corpus", corpus.filter_users_by_post_count(args.min_posts, args.max_posts))
}

/// How the author constant was obtained.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaReport {
    pub posts: usize,
    pub users: usize,
    pub lambda: f64,
    pub lambda_source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_quantile: Option<f64>,
    /// Post pairs with nonzero similarity, the population the quantile is
    /// taken over.
    pub positive_pairs: usize,
}

pub struct PostAnalysis {
    /// Full corpus; the dictionary and thread counts come from all of it.
    pub corpus: Corpus,
    /// Users retained by the post-count filter.
    pub subset: Corpus,
    pub matrix: DissimilarityMatrix<f64>,
    pub report: LambdaReport,
}

pub fn analyse_posts(
    input: &InputArgs,
    prep: &PrepArgs,
    filter: &SubsetArgs,
    lambda: &LambdaArgs,
) -> CliResult<PostAnalysis> {
    let corpus = load_corpus(input)?;
    let options = prep_options(prep)?;
    let subset = subset(&corpus, filter)?;
    if subset.is_empty() {
        return Err(CliError::invalid("no posts to analyse"));
    }
    let vocab = build_dictionary(&corpus, &options);
    let posts = stage(
        "simcore",
        WeightedPosts::<f64>::select(&corpus, &vocab, subset.posts().iter().map(|p| p.post_id.as_str())),
    )?;
    let sims = similarity_matrix(&posts);
    let n = sims.nrows();
    let positive_pairs = (0..n)
        .map(|i| (i + 1..n).filter(|&j| sims[(i, j)] > 0.0).count())
        .sum();
    let (value, source, quantile) = match lambda.lambda {
        Some(l) => (l, "given", None),
        None => {
            let q = lambda.lambda_quantile.unwrap_or(DEFAULT_LAMBDA_QUANTILE);
            (stage("lambda", select_lambda(&sims, q))?, "quantile", Some(q))
        }
    };
    let matrix = stage(
        "simcore",
        DissimilarityMatrix::from_similarities(&sims, posts.doc_ids(), posts.authors.clone(), posts.author_of(), value),
    )?;
    let report = LambdaReport {
        posts: n,
        users: posts.authors.len(),
        lambda: value,
        lambda_source: source,
        lambda_quantile: quantile,
        positive_pairs,
    };
    Ok(PostAnalysis {
        corpus,
        subset,
        matrix,
        report,
    })
}

fn to_toml<T: Serialize>(value: &T) -> CliResult<String> {
    toml::to_string(value).map_err(|e| CliError::Internal(format!("report: {e}")))
}

pub fn cmd_ingest(args: &IngestArgs, out: &mut dyn Write) -> CliResult<()> {
    let corpus = load_corpus(&args.input)?;
    write_file(&args.output, |w| corpus.write_jsonl(w))?;
    let table = corpus.stats().table();
    if let Some(p) = &args.stats {
        write_text(p, &table)?;
    }
    print(out, &table)
}

pub fn cmd_stats(args: &StatsArgs, out: &mut dyn Write) -> CliResult<()> {
    let corpus = load_corpus(&args.input)?;
    if let Some(p) = &args.tokens {
        let options = prep_options(&args.prep)?;
        write_file(p, |w| write_token_dump(&corpus, &options, w))?;
    }
    let stats = corpus.stats();
    if args.json {
        let mut s = serde_json::to_string_pretty(&stats).map_err(|e| CliError::Internal(e.to_string()))?;
        s.push('\n');
        print(out, &s)
    } else {
        print(out, &stats.table())
    }
}

pub fn cmd_similarity(args: &SimilarityArgs, out: &mut dyn Write) -> CliResult<()> {
    let a = analyse_posts(&args.input, &args.prep, &args.subset, &args.lambda)?;
    write_file(&args.output, |w| io::write_matrix_csv(w, &a.matrix.doc_ids, &a.matrix.values))?;
    let report = to_toml(&a.report)?;
    if let Some(p) = &args.report {
        write_text(p, &report)?;
    }
    print(out, &report)
}

fn spectrum_path(output: &Path) -> PathBuf {
    output.with_extension("spectrum.csv")
}

pub fn cmd_embed(args: &EmbedArgs) -> CliResult<()> {
    let (ids, m) = stage("matrix", io::read_matrix_csv::<f64, _>(open(&args.matrix)?))?;
    let e = stage(
        "embed",
        embed_matrix(ids, &m, args.embed.dims, args.embed.mode.into()),
    )?;
    write_file(&args.output, |w| io::write_embedding_csv(w, &e))?;
    write_file(&spectrum_path(&args.output), |w| io::write_spectrum_csv(w, &e.singular_values))
}

fn read_embedding(path: &Path) -> CliResult<Embedding<f64>> {
    let (doc_ids, coords) = stage("embedding", io::read_rows_csv::<f64, _>(open(path)?))?;
    Ok(Embedding {
        doc_ids,
        coords,
        singular_values: Vec::new(),
        mode: EmbeddingMode::default(),
        left_factor: None,
        negative_mass: 0.0,
    })
}

pub fn cmd_users(args: &UsersArgs) -> CliResult<()> {
    if args.average {
        if args.centroids.is_some() {
            return Err(CliError::invalid("--centroids needs an embedding"));
        }
        let zero = LambdaArgs {
            lambda: Some(0.0),
            lambda_quantile: None,
        };
        let a = analyse_posts(&args.input, &args.prep, &args.subset, &zero)?;
        let (ids, d) = stage("users", average_pairwise_user_distance(&a.matrix))?;
        return write_file(&args.distances, |w| io::write_matrix_csv(w, &ids, &d));
    }
    let corpus = load_corpus(&args.input)?;
    let path = args.embedding.as_ref().expect("clap requires --embedding");
    let e = read_embedding(path)?;
    let g = stage("users", user_centroids(&e, &corpus))?;
    write_file(&args.distances, |w| io::write_matrix_csv(w, &g.user_ids, &g.distances))?;
    if let Some(p) = &args.centroids {
        write_file(p, |w| io::write_centroids_csv(w, &g))?;
    }
    Ok(())
}

fn read_distances(path: &Path) -> CliResult<(Vec<String>, Matrix<f64>)> {
    stage("distances", io::read_matrix_csv::<f64, _>(open(path)?))
}

pub fn cmd_cluster(args: &ClusterArgs, out: &mut dyn Write) -> CliResult<()> {
    let (ids, d) = read_distances(&args.distances)?;
    let tree = stage("cluster", agglomerate(&d, &ids, args.linkage.into()))?;
    if let Some(k) = args.k {
        let labels = stage("cluster", tree.cut(k))?;
        if let Some(p) = &args.labels {
            write_file(p, |w| io::write_labels_csv(w, &ids, &labels))?;
        }
    }
    if let Some(p) = &args.json {
        write_text(p, &tree.to_json())?;
    }
    match &args.newick {
        Some(p) => write_text(p, &format!("{}\n", tree.to_newick())),
        None if args.json.is_none() && args.labels.is_none() => print(out, &format!("{}\n", tree.to_newick())),
        None => Ok(()),
    }
}

pub fn cmd_mst(args: &MstArgs, out: &mut dyn Write) -> CliResult<()> {
    let (ids, d) = read_distances(&args.distances)?;
    let tree = stage("mst", minimum_spanning_tree(&d, &ids))?;
    if let Some(p) = &args.edges {
        write_file(p, |w| io::write_edges_csv(w, &tree))?;
    }
    match &args.dot {
        Some(p) => write_text(p, &tree.to_dot()),
        None => print(out, &tree.to_dot()),
    }
}

pub fn cmd_scatter(args: &ScatterArgs) -> CliResult<()> {
    let (ids, coords) = stage("embedding", io::read_rows_csv::<f64, _>(open(&args.embedding)?))?;
    let corpus = match &args.input {
        Some(p) => Some(load_corpus(&InputArgs {
            input: p.clone(),
            format: args.format,
            threads: args.threads.clone(),
        })?),
        None => None,
    };
    let k = coords.ncols();
    let (ax, ay) = args.axes;
    for a in [ax, ay] {
        if a == 0 || a > k {
            return Err(CliError::invalid(format!(
                "axis {a} out of range: the embedding has {k} coordinates"
            )));
        }
    }
    let user_group = |user: &str| corpus.as_ref().and_then(|c| c.user_position(user));
    let points = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let author = corpus.as_ref().and_then(|c| c.post(id)).map(|p| p.user_id.as_str());
            svg::Point {
                x: coords[(i, ax - 1)],
                y: coords[(i, ay - 1)],
                group: author.and_then(user_group),
                title: match author {
                    Some(u) => format!("{id} ({u})"),
                    None => id.clone(),
                },
            }
        })
        .collect();
    let mut centroids = Vec::new();
    if let Some(p) = &args.centroids {
        let (users, c) = stage("centroids", io::read_rows_csv::<f64, _>(open(p)?))?;
        if c.ncols() < ax.max(ay) {
            return Err(CliError::invalid(format!(
                "centroids have {} coordinates, axes need {}",
                c.ncols(),
                ax.max(ay)
            )));
        }
        for (i, u) in users.iter().enumerate() {
            centroids.push(svg::Point {
                x: c[(i, ax - 1)],
                y: c[(i, ay - 1)],
                group: user_group(u).or(Some(i)),
                title: u.clone(),
            });
        }
    }
    let plot = svg::Scatter {
        x_label: format!("PC{ax}"),
        y_label: format!("PC{ay}"),
        points,
        centroids,
    };
    write_text(&args.output, &svg::render(&plot))
}

#[derive(Serialize)]
struct PipelineReport<'a> {
    #[serde(flatten)]
    lambda: &'a LambdaReport,
    embedding_mode: EmbeddingMode,
    dims: usize,
    negative_mass: f64,
    linkage: Linkage,
    excluded_users: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
}

/// Runs every stage and writes the artifacts into `args.out_dir`:
/// `embedding.csv`, `embedding.spectrum.csv`, `centroids.csv`,
/// `user_distances.csv`, `dendrogram.json`, `dendrogram.nwk`, `mst.dot`,
/// `mst_edges.csv` and `report.toml`; `labels.csv` with `--k`, and the
/// `baseline_*` counterparts with `--baseline`.
pub fn cmd_pipeline(args: &PipelineArgs) -> CliResult<()> {
    let a = analyse_posts(&args.input, &args.prep, &args.subset, &args.lambda)?;
    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;

    let mode: EmbeddingMode = args.embed.mode.into();
    let e = stage(
        "embed",
        embed_matrix(a.matrix.doc_ids.clone(), &a.matrix.values, args.embed.dims, mode),
    )?;
    let g = stage("users", user_centroids(&e, &a.subset))?;
    let linkage: Linkage = args.linkage.into();
    let tree = stage("cluster", agglomerate(&g.distances, &g.user_ids, linkage))?;
    let mst = stage("mst", minimum_spanning_tree(&g.distances, &g.user_ids))?;
    let labels = args.k.map(|k| stage("cluster", tree.cut(k))).transpose()?;

    write_file(&dir.join("embedding.csv"), |w| io::write_embedding_csv(w, &e))?;
    write_file(&dir.join("embedding.spectrum.csv"), |w| {
        io::write_spectrum_csv(w, &e.singular_values)
    })?;
    write_file(&dir.join("centroids.csv"), |w| io::write_centroids_csv(w, &g))?;
    write_file(&dir.join("user_distances.csv"), |w| {
        io::write_matrix_csv(w, &g.user_ids, &g.distances)
    })?;
    write_text(&dir.join("dendrogram.json"), &tree.to_json())?;
    write_text(&dir.join("dendrogram.nwk"), &format!("{}\n", tree.to_newick()))?;
    write_text(&dir.join("mst.dot"), &mst.to_dot())?;
    write_file(&dir.join("mst_edges.csv"), |w| io::write_edges_csv(w, &mst))?;
    if let Some(l) = &labels {
        write_file(&dir.join("labels.csv"), |w| io::write_labels_csv(w, &g.user_ids, l))?;
    }

    if args.baseline {
        let options = prep_options(&args.prep)?;
        let (ids, d) = stage("baseline", baseline_user_similarity::<f64>(&a.subset, &options))?;
        let btree = stage("baseline", agglomerate(&d, &ids, linkage))?;
        write_file(&dir.join("baseline_distances.csv"), |w| io::write_matrix_csv(w, &ids, &d))?;
        write_text(&dir.join("baseline_dendrogram.json"), &btree.to_json())?;
        write_text(&dir.join("baseline_dendrogram.nwk"), &format!("{}\n", btree.to_newick()))?;
        if let Some(k) = args.k {
            let bl = stage("baseline", btree.cut(k))?;
            write_file(&dir.join("baseline_labels.csv"), |w| io::write_labels_csv(w, &ids, &bl))?;
        }
    }

    let report = PipelineReport {
        lambda: &a.report,
        embedding_mode: mode,
        dims: e.dims(),
        negative_mass: e.negative_mass,
        linkage,
        excluded_users: a.corpus.n_users() - g.user_ids.len(),
        k: args.k,
    };
    write_text(&dir.join("report.toml"), &to_toml(&report)?)
}

fn read_config<T: serde::de::DeserializeOwned + Default>(path: Option<&PathBuf>) -> CliResult<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_error(p, e))?;
            toml::from_str(&text).map_err(|e| io_error(p, e))
        }
    }
}

pub fn cmd_synth(cmd: &SynthCommand, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        SynthCommand::Forum(args) => {
            let mut cfg: SyntheticForumConfig = read_config(args.config.as_ref())?;
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            if args.print_config {
                return print(out, &to_toml(&cfg)?);
            }
            let corpus = if args.sparse {
                stage("synth", generate_sparse_forum(&cfg))?
            } else {
                stage("synth", generate_forum(&cfg))?
            };
            let output = args.output.as_ref().expect("clap requires --output");
            write_file(output, |w| corpus.write_jsonl(w))?;
            if let Some(p) = &args.labels {
                let ids: Vec<String> = corpus.users().iter().map(|u| u.user_id.clone()).collect();
                write_file(p, |w| io::write_labels_csv(w, &ids, &planted_labels(&cfg, &corpus)))?;
            }
            Ok(())
        }
        SynthCommand::Gaussian(args) => {
            let mut cfg: GaussianGroupsConfig = read_config(args.config.as_ref())?;
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            if args.print_config {
                return print(out, &to_toml(&cfg)?);
            }
            let groups = stage("synth", generate_gaussian_groups(&cfg))?;
            let output = args.output.as_ref().expect("clap requires --output");
            write_file(output, |w| io::write_points_csv(w, &groups))?;
            if let (Some(lambda), Some(p)) = (args.lambda, &args.matrix) {
                let m = stage("synth", groups.dissimilarity(lambda))?;
                write_file(p, |w| io::write_matrix_csv(w, &m.doc_ids, &m.values))?;
            }
            Ok(())
        }
    }
}
