//! Post-to-post similarity.
//!
//! Each post `D` is represented by its title-appended term vector `D*`.
//! Term `j` is weighted by the thread-aware tf-idf
//!
//! ```text
//! w(D, j) = tf(D*, j) * log2(N * tf(T(D), j) / df(j))
//! ```
//!
//! where `T(D)` is the concatenation of all posts of `D`'s thread: the
//! document frequency is divided by the term's count inside the thread, so
//! words the thread keeps repeating gain weight even when they are common
//! across the forum. Posts are compared by the cosine of these weights, and
//! pairs by the same author get the additive constant `lambda`:
//!
//! ```text
//! sim(D1, D2)  = cosine(D1*, D2*) + lambda * [author(D1) == author(D2)]
//! dist(D1, D2) = max(0, 1 - sim(D1, D2))
//! ```
//!
//! A post with no terms has zero norm; its cosine with anything is 0.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::quantile::nearest_rank_index;
use crate::textprep::{Dictionary, TermVector, ThreadVector, Vocabulary};
use crate::{Error, Result, Scalar};

/// Plain tf-idf: `tf * log2(n / df)`.
pub fn tfidf<T: Scalar>(tf: u32, df: u32, n: u32) -> Result<T> {
    if df == 0 || df > n {
        return Err(Error::InvalidArgument(format!(
            "document frequency {df} outside 1..={n}"
        )));
    }
    if tf == 0 {
        return Ok(T::zero());
    }
    let ratio = T::from_count(n as usize) / T::from_count(df as usize);
    Ok(T::from_count(tf as usize) * ratio.log2())
}

/// Thread-aware tf-idf: `tf * log2(n * thread_tf / df)`, i.e. plain tf-idf
/// with `df` replaced by `df / thread_tf`.
pub fn thread_tfidf<T: Scalar>(tf: u32, df: u32, thread_tf: u32, n: u32) -> Result<T> {
    if df == 0 || df > n {
        return Err(Error::InvalidArgument(format!(
            "document frequency {df} outside 1..={n}"
        )));
    }
    if tf == 0 {
        return Ok(T::zero());
    }
    if thread_tf < tf {
        return Err(Error::Inconsistent(format!(
            "thread frequency {thread_tf} below post frequency {tf}"
        )));
    }
    let ratio = T::from_count(n as usize) * T::from_count(thread_tf as usize)
        / T::from_count(df as usize);
    Ok(T::from_count(tf as usize) * ratio.log2())
}

/// Sparse non-negative weights sorted by term index, with a cached norm.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T> {
    pub doc_id: String,
    pub weights: Vec<(u32, T)>,
    pub norm: T,
}

impl<T: Scalar> WeightVector<T> {
    /// Builds a vector from already computed weights; zero weights are
    /// dropped so that an empty vector is exactly a zero-norm one.
    pub fn new(doc_id: impl Into<String>, mut weights: Vec<(u32, T)>) -> Self {
        weights.retain(|&(_, w)| w != T::zero());
        weights.sort_by_key(|&(j, _)| j);
        let norm = weights
            .iter()
            .fold(T::zero(), |acc, &(_, w)| acc + w * w)
            .sqrt();
        Self {
            doc_id: doc_id.into(),
            weights,
            norm,
        }
    }

    /// Plain tf-idf weights of a term vector.
    pub fn plain(post: &TermVector, dict: &Dictionary) -> Result<Self> {
        let weights = post
            .counts
            .iter()
            .map(|&(j, tf)| {
                let df = *dict.df.get(j as usize).ok_or_else(|| unknown_term(j))?;
                Ok((j, tfidf(tf, df, dict.n_documents)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(post.doc_id.clone(), weights))
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn unknown_term(j: u32) -> Error {
    Error::Inconsistent(format!("term index {j} not in dictionary"))
}

/// Thread-aware weights of a post; `thread` must be the post's own thread.
pub fn weight_vector<T: Scalar>(
    post: &TermVector,
    thread: &ThreadVector,
    dict: &Dictionary,
) -> Result<WeightVector<T>> {
    let weights = post
        .counts
        .iter()
        .map(|&(j, tf)| {
            let df = *dict.df.get(j as usize).ok_or_else(|| unknown_term(j))?;
            let thread_tf = thread.get(j);
            Ok((j, thread_tfidf(tf, df, thread_tf, dict.n_documents)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeightVector::new(post.doc_id.clone(), weights))
}

/// Normalized dot product, accumulated in ascending term order; 0 when
/// either vector has zero norm.
pub fn cosine<T: Scalar>(a: &WeightVector<T>, b: &WeightVector<T>) -> T {
    if a.norm == T::zero() || b.norm == T::zero() {
        return T::zero();
    }
    let (mut i, mut j) = (0, 0);
    let mut dot = T::zero();
    while i < a.weights.len() && j < b.weights.len() {
        let (ta, wa) = a.weights[i];
        let (tb, wb) = b.weights[j];
        match ta.cmp(&tb) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += wa * wb;
                i += 1;
                j += 1;
            }
        }
    }
    dot / (a.norm * b.norm)
}

/// A weighted post together with its author's index.
#[derive(Debug, Clone, PartialEq)]
pub struct PostVector<T> {
    pub weights: WeightVector<T>,
    pub author: usize,
}

pub fn post_similarity<T: Scalar>(a: &PostVector<T>, b: &PostVector<T>, lambda: T) -> T {
    let c = cosine(&a.weights, &b.weights);
    if a.author == b.author {
        c + lambda
    } else {
        c
    }
}

/// `max(0, 1 - sim)` for two posts.
///
/// Evaluated as `max(0, max(0, 1 - cosine) - lambda)` for same-author pairs
/// so that the author term changes those entries by exactly `lambda` before
/// clamping and leaves every other entry bit-identical.
pub fn post_distance<T: Scalar>(a: &PostVector<T>, b: &PostVector<T>, lambda: T) -> T {
    distance_from_cosine(cosine(&a.weights, &b.weights), a.author == b.author, lambda)
}

fn distance_from_cosine<T: Scalar>(cos: T, same_author: bool, lambda: T) -> T {
    let base = (T::one() - cos).max(T::zero());
    if same_author {
        (base - lambda).max(T::zero())
    } else {
        base
    }
}

/// The posts under analysis, weighted, with their authors.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPosts<T> {
    /// Sorted distinct author IDs.
    pub authors: Vec<String>,
    pub posts: Vec<PostVector<T>>,
}

impl<T: Scalar> WeightedPosts<T> {
    /// All posts of the corpus, in corpus order.
    pub fn from_corpus(corpus: &Corpus, vocab: &Vocabulary) -> Result<Self> {
        Self::select(corpus, vocab, corpus.posts().iter().map(|p| p.post_id.as_str()))
    }

    /// The given posts, weighted against the full vocabulary. This allows
    /// analysing a subset of users while document frequencies and thread
    /// counts still come from the whole forum.
    pub fn select<'a>(
        corpus: &Corpus,
        vocab: &Vocabulary,
        post_ids: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let mut chosen = Vec::new();
        for id in post_ids {
            let i = corpus
                .post_position(id)
                .ok_or_else(|| Error::InvalidInput(format!("unknown post `{id}`")))?;
            chosen.push(i);
        }
        let mut authors: Vec<String> = chosen
            .iter()
            .map(|&i| corpus.posts()[i].user_id.clone())
            .collect();
        authors.sort();
        authors.dedup();

        let posts = chosen
            .par_iter()
            .map(|&i| {
                let post = &corpus.posts()[i];
                let thread = vocab
                    .thread_vector(corpus, &post.thread_id)
                    .ok_or_else(|| Error::Inconsistent(format!("no thread vector for `{}`", post.thread_id)))?;
                let weights = weight_vector(&vocab.posts[i], thread, &vocab.dictionary)?;
                let author = authors
                    .binary_search(&post.user_id)
                    .expect("author collected");
                Ok(PostVector { weights, author })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { authors, posts })
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn doc_ids(&self) -> Vec<String> {
        self.posts.iter().map(|p| p.weights.doc_id.clone()).collect()
    }

    pub fn author_of(&self) -> Vec<usize> {
        self.posts.iter().map(|p| p.author).collect()
    }
}

/// Symmetric all-pairs cosine matrix of weight vectors (no author term).
/// Rows are computed in parallel; every entry is evaluated once with a
/// fixed summation order and mirrored, so the result does not depend on
/// scheduling.
pub fn cosine_matrix<T: Scalar>(vectors: &[&WeightVector<T>]) -> DMatrix<T> {
    let n = vectors.len();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| cosine(vectors[i], vectors[j])).collect())
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Cosine similarities of the posts without the author term.
pub fn similarity_matrix<T: Scalar>(posts: &WeightedPosts<T>) -> DMatrix<T> {
    let refs: Vec<&WeightVector<T>> = posts.posts.iter().map(|p| &p.weights).collect();
    cosine_matrix(&refs)
}

/// Post-by-post distances with the author constant folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix<T: Scalar> {
    pub doc_ids: Vec<String>,
    pub values: DMatrix<T>,
    /// Index into `authors` for every post.
    pub author_of: Vec<usize>,
    pub authors: Vec<String>,
    pub lambda: T,
}

impl<T: Scalar> DissimilarityMatrix<T> {
    /// Converts a symmetric similarity matrix (without author term) into
    /// distances for the given `lambda`. The diagonal is zero.
    pub fn from_similarities(
        similarities: &DMatrix<T>,
        doc_ids: Vec<String>,
        authors: Vec<String>,
        author_of: Vec<usize>,
        lambda: T,
    ) -> Result<Self> {
        let n = doc_ids.len();
        if similarities.shape() != (n, n) || author_of.len() != n {
            return Err(Error::InvalidInput(format!(
                "similarity matrix {:?} does not match {n} posts",
                similarities.shape()
            )));
        }
        if author_of.iter().any(|&a| a >= authors.len()) {
            return Err(Error::InvalidInput("author index out of range".into()));
        }
        if lambda.partial_cmp(&T::zero()).is_none_or(|o| o.is_lt()) {
            return Err(Error::InvalidArgument("lambda must be non-negative".into()));
        }
        let values = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                T::zero()
            } else {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                distance_from_cosine(similarities[(a, b)], author_of[a] == author_of[b], lambda)
            }
        });
        Ok(Self {
            doc_ids,
            values,
            author_of,
            authors,
            lambda,
        })
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[(i, j)]
    }
}

/// All-pairs distance matrix of the posts for the given `lambda`.
pub fn build_dissimilarity_matrix<T: Scalar>(
    posts: &WeightedPosts<T>,
    lambda: T,
) -> Result<DissimilarityMatrix<T>> {
    DissimilarityMatrix::from_similarities(
        &similarity_matrix(posts),
        posts.doc_ids(),
        posts.authors.clone(),
        posts.author_of(),
        lambda,
    )
}

/// Nearest-rank `quantile` of the strictly positive off-diagonal entries of
/// a lambda-free similarity matrix (upper triangle only).
pub fn select_lambda<T: Scalar>(similarities: &DMatrix<T>, quantile: f64) -> Result<T> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quantile {quantile} outside (0, 1)"
        )));
    }
    if !similarities.is_square() {
        return Err(Error::InvalidInput("similarity matrix is not square".into()));
    }
    let n = similarities.nrows();
    let mut positive: Vec<T> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| similarities[(i, j)])
        .filter(|&v| v > T::zero())
        .collect();
    if positive.is_empty() {
        return Err(Error::NoNonzeroSimilarities);
    }
    let k = nearest_rank_index(positive.len(), quantile);
    let (_, v, _) = positive.select_nth_unstable_by(k, |a, b| a.partial_cmp(b).expect("finite"));
    Ok(*v)
}

pub const DEFAULT_LAMBDA_QUANTILE: f64 = 0.75;
