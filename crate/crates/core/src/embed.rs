//! Principal coordinates of posts and user geometry.
//!
//! Two embeddings of a post dissimilarity matrix `M` are offered:
//!
//! * [`EmbeddingMode::PaperLiteral`] takes the singular value decomposition
//!   `M = U S V^T` of `M` itself and places post `i` at row `i` of `V S`
//!   (the columns of `S V^T`). Because `M` is symmetric the decomposition
//!   is computed from its eigendecomposition `M = Q L Q^T`: `V = Q`,
//!   `S = |L|` and `U = Q sign(L)`.
//! * [`EmbeddingMode::ClassicalPcoa`] double-centres the squared
//!   dissimilarities, `B = -1/2 J (M o M) J`, and uses the eigenvectors of
//!   `B` scaled by the square roots of its positive eigenvalues. For a
//!   Euclidean distance matrix this recovers the original configuration up
//!   to a rigid motion.
//!
//! Every eigenvector's sign is fixed so that its largest-magnitude entry is
//! positive.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::linalg::{check_symmetric, sorted_symmetric_eigen};
use crate::simcore::DissimilarityMatrix;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingMode {
    #[default]
    PaperLiteral,
    ClassicalPcoa,
}

/// Number of coordinates to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dims {
    /// Smallest `k` whose leading spectrum holds at least 90% of the total.
    #[default]
    Auto,
    Fixed(usize),
    /// Every coordinate the spectrum supports.
    Full,
}

pub const AUTO_DIMS_MASS: f64 = 0.9;

/// SVD of a symmetric matrix, factors sorted by singular value.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricSvd<T: Scalar> {
    pub u: DMatrix<T>,
    pub singular_values: Vec<T>,
    pub v: DMatrix<T>,
}

impl<T: Scalar> SymmetricSvd<T> {
    pub fn reconstruct(&self) -> DMatrix<T> {
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.singular_values.clone()));
        &self.u * s * self.v.transpose()
    }
}

pub fn symmetric_svd<T: Scalar>(m: &DMatrix<T>) -> Result<SymmetricSvd<T>> {
    check_symmetric(m, "matrix")?;
    let (eigenvalues, v) = sorted_symmetric_eigen(m, |x| x.abs())?;
    let mut u = v.clone();
    for (j, &l) in eigenvalues.iter().enumerate() {
        if l < T::zero() {
            u.column_mut(j).neg_mut();
        }
    }
    Ok(SymmetricSvd {
        u,
        singular_values: eigenvalues.iter().map(|l| l.abs()).collect(),
        v,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T: Scalar> {
    pub doc_ids: Vec<String>,
    /// One row per post, one column per coordinate.
    pub coords: DMatrix<T>,
    /// Full spectrum, non-increasing: singular values of `M` in paper-literal
    /// mode, positive eigenvalues of the centred matrix in classical mode.
    pub singular_values: Vec<T>,
    pub mode: EmbeddingMode,
    /// Paper-literal only: the first `k` left singular vectors. Rows of `M`
    /// multiplied by this map to coordinates.
    pub left_factor: Option<DMatrix<T>>,
    /// Classical only: share of the spectrum's absolute mass carried by
    /// negative eigenvalues, which the embedding cannot represent.
    pub negative_mass: T,
}

impl<T: Scalar> Embedding<T> {
    pub fn dims(&self) -> usize {
        self.coords.ncols()
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }
}

fn choose_dims<T: Scalar>(dims: Dims, spectrum: &[T], n: usize, full: usize) -> Result<usize> {
    match dims {
        Dims::Fixed(k) if k > n || (k == 0 && n > 0) => Err(Error::InvalidArgument(format!(
            "requested {k} dimensions for {n} posts"
        ))),
        Dims::Fixed(k) => Ok(k),
        Dims::Full => Ok(full.max(n.min(1))),
        Dims::Auto => {
            let total = spectrum.iter().fold(T::zero(), |a, &s| a + s);
            if total <= T::zero() {
                return Ok(n.min(1));
            }
            let target = total * T::lit(AUTO_DIMS_MASS);
            let mut acc = T::zero();
            for (i, &s) in spectrum.iter().enumerate() {
                acc += s;
                if acc >= target {
                    return Ok(i + 1);
                }
            }
            Ok(spectrum.len())
        }
    }
}

pub fn principal_coordinates<T: Scalar>(
    m: &DissimilarityMatrix<T>,
    dims: Dims,
    mode: EmbeddingMode,
) -> Result<Embedding<T>> {
    embed_matrix(m.doc_ids.clone(), &m.values, dims, mode)
}

/// Embeds any symmetric dissimilarity matrix whose rows are labelled by
/// `doc_ids`.
pub fn embed_matrix<T: Scalar>(
    doc_ids: Vec<String>,
    m: &DMatrix<T>,
    dims: Dims,
    mode: EmbeddingMode,
) -> Result<Embedding<T>> {
    check_symmetric(m, "dissimilarity matrix")?;
    let n = m.nrows();
    if doc_ids.len() != n {
        return Err(Error::InvalidInput(format!(
            "{} labels for a {n}x{n} matrix",
            doc_ids.len()
        )));
    }
    match mode {
        EmbeddingMode::PaperLiteral => {
            let svd = symmetric_svd(m)?;
            let k = choose_dims(dims, &svd.singular_values, n, n)?;
            let coords = DMatrix::from_fn(n, k, |i, j| svd.v[(i, j)] * svd.singular_values[j]);
            Ok(Embedding {
                doc_ids,
                coords,
                left_factor: Some(svd.u.columns(0, k).clone_owned()),
                singular_values: svd.singular_values,
                mode,
                negative_mass: T::zero(),
            })
        }
        EmbeddingMode::ClassicalPcoa => {
            let b = double_centre(m);
            let (values, vectors) = sorted_symmetric_eigen(&b, |x| x)?;
            let abs_total = values.iter().fold(T::zero(), |a, &l| a + l.abs());
            let largest = values.iter().fold(T::zero(), |a, &l| a.max(l.abs()));
            let cutoff = largest * T::from_count(n) * T::default_epsilon();
            let positive: Vec<T> = values.iter().copied().take_while(|&l| l > cutoff).collect();
            let negative = values
                .iter()
                .filter(|&&l| l < T::zero())
                .fold(T::zero(), |a, &l| a + l.abs());
            let k = choose_dims(dims, &positive, n, positive.len())?;
            let coords = DMatrix::from_fn(n, k, |i, j| match positive.get(j) {
                Some(&l) => vectors[(i, j)] * l.sqrt(),
                None => T::zero(),
            });
            Ok(Embedding {
                doc_ids,
                coords,
                singular_values: positive,
                mode,
                left_factor: None,
                negative_mass: if abs_total > T::zero() {
                    negative / abs_total
                } else {
                    T::zero()
                },
            })
        }
    }
}

/// `-1/2 J (M o M) J` with `J = I - 11^T/n`.
fn double_centre<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    let a = m.map(|d| -(d * d) * T::lit(0.5));
    let nf = T::from_count(n);
    let row_means: Vec<T> = (0..n).map(|i| a.row(i).sum() / nf).collect();
    let col_means: Vec<T> = (0..n).map(|j| a.column(j).sum() / nf).collect();
    let grand = row_means.iter().fold(T::zero(), |s, &v| s + v) / nf;
    DMatrix::from_fn(n, n, |i, j| a[(i, j)] - row_means[i] - col_means[j] + grand)
}

/// Coordinates of additional posts in a paper-literal embedding, given
/// their dissimilarities to the embedded posts (one row per new post,
/// columns in `e.doc_ids` order). An embedded post's own row of `M` maps
/// back onto its stored coordinates.
pub fn project_new_posts<T: Scalar>(e: &Embedding<T>, new_rows: &DMatrix<T>) -> Result<DMatrix<T>> {
    let Some(left) = e.left_factor.as_ref() else {
        return Err(Error::InvalidArgument(
            "out-of-sample projection needs a paper-literal embedding".into(),
        ));
    };
    if new_rows.ncols() != e.len() {
        return Err(Error::InvalidInput(format!(
            "new rows have {} columns, embedding has {} posts",
            new_rows.ncols(),
            e.len()
        )));
    }
    Ok(new_rows * left)
}

/// Users located at the centroid of their posts' coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct UserGeometry<T: Scalar> {
    /// Sorted user IDs.
    pub user_ids: Vec<String>,
    /// One row per user.
    pub centroids: DMatrix<T>,
    pub distances: DMatrix<T>,
    /// Users of the corpus that have no post in the embedding.
    pub excluded: Vec<String>,
}

pub fn user_centroids<T: Scalar>(e: &Embedding<T>, corpus: &Corpus) -> Result<UserGeometry<T>> {
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, id) in e.doc_ids.iter().enumerate() {
        let post = corpus
            .post(id)
            .ok_or_else(|| Error::InvalidInput(format!("embedded post `{id}` not in corpus")))?;
        members.entry(post.user_id.as_str()).or_default().push(i);
    }
    let k = e.dims();
    let mut centroids = DMatrix::zeros(members.len(), k);
    for (u, rows) in members.values().enumerate() {
        for c in 0..k {
            let sum = rows.iter().fold(T::zero(), |s, &r| s + e.coords[(r, c)]);
            centroids[(u, c)] = sum / T::from_count(rows.len());
        }
    }
    let user_ids: Vec<String> = members.keys().map(|s| s.to_string()).collect();
    let excluded = corpus
        .users()
        .iter()
        .filter(|u| !members.contains_key(u.user_id.as_str()))
        .map(|u| u.user_id.clone())
        .collect();
    let distances = user_distance_matrix(&centroids);
    Ok(UserGeometry {
        user_ids,
        centroids,
        distances,
        excluded,
    })
}

/// Euclidean distances between the rows of `centroids`.
pub fn user_distance_matrix<T: Scalar>(centroids: &DMatrix<T>) -> DMatrix<T> {
    let n = centroids.nrows();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = (centroids.row(i) - centroids.row(j)).norm();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Mean post distance over all cross-author pairs, for every pair of
/// authors; zero diagonal. Requires a matrix built without author term.
pub fn average_pairwise_user_distance<T: Scalar>(
    m: &DissimilarityMatrix<T>,
) -> Result<(Vec<String>, DMatrix<T>)> {
    if m.lambda != T::zero() {
        return Err(Error::InvalidArgument(
            "average pairwise user distance needs a matrix built with lambda = 0".into(),
        ));
    }
    let mut docs: Vec<Vec<usize>> = vec![Vec::new(); m.authors.len()];
    for (i, &a) in m.author_of.iter().enumerate() {
        docs[a].push(i);
    }
    let present: Vec<usize> = (0..docs.len()).filter(|&a| !docs[a].is_empty()).collect();
    let n = present.len();
    let mut d = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in x + 1..n {
            let (da, db) = (&docs[present[x]], &docs[present[y]]);
            let mut sum = T::zero();
            for &i in da {
                for &j in db {
                    sum += m.values[(i, j)];
                }
            }
            let v = sum / T::from_count(da.len() * db.len());
            d[(x, y)] = v;
            d[(y, x)] = v;
        }
    }
    let ids = present.iter().map(|&a| m.authors[a].clone()).collect();
    Ok((ids, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PostRecord;
    use approx::assert_relative_eq;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn zero_matrix_embeds_at_origin() {
        let m = DMatrix::<f64>::zeros(4, 4);
        for mode in [EmbeddingMode::PaperLiteral, EmbeddingMode::ClassicalPcoa] {
            let e = embed_matrix(labels(4), &m, Dims::Auto, mode).unwrap();
            assert!(e.coords.iter().all(|&c| c == 0.0));
            assert!(e.dims() >= 1);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(embed_matrix(labels(2), &m, Dims::Auto, EmbeddingMode::PaperLiteral).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(embed_matrix(labels(2), &m, Dims::Fixed(3), EmbeddingMode::PaperLiteral).is_err());
        assert!(embed_matrix(labels(3), &m, Dims::Auto, EmbeddingMode::PaperLiteral).is_err());
    }

    fn line_matrix() -> DMatrix<f64> {
        let x: [f64; 4] = [0.0, 1.0, 3.0, 7.0];
        DMatrix::from_fn(4, 4, |i, j| (x[i] - x[j]).abs())
    }

    #[test]
    fn paper_literal_reconstructs_at_full_rank() {
        let m = line_matrix();
        let e = embed_matrix(labels(4), &m, Dims::Full, EmbeddingMode::PaperLiteral).unwrap();
        let u = e.left_factor.as_ref().unwrap();
        let r = u * e.coords.transpose();
        assert!((r - &m).norm() / m.norm() < 1e-12);
        assert!(e.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(e.singular_values.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn projecting_own_rows_reproduces_coordinates() {
        let m = line_matrix();
        let e = embed_matrix(labels(4), &m, Dims::Fixed(2), EmbeddingMode::PaperLiteral).unwrap();
        let p = project_new_posts(&e, &m).unwrap();
        assert!((p - &e.coords).amax() < 1e-10);
        // a duplicate of post 2
        let dup = m.rows(2, 1).clone_owned();
        let q = project_new_posts(&e, &dup).unwrap();
        assert!((q.row(0) - e.coords.row(2)).amax() < 1e-12);
        assert!(project_new_posts(&e, &DMatrix::zeros(1, 3)).is_err());
        let c = embed_matrix(labels(4), &m, Dims::Fixed(2), EmbeddingMode::ClassicalPcoa).unwrap();
        assert!(project_new_posts(&c, &m).is_err());
    }

    #[test]
    fn equidistant_new_post_lands_equidistant() {
        // posts 0 and 1 are mirror images under swapping; post 2 is the axis
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 0.8, 0.5, 0.8, 0.0, 0.5, 0.5, 0.5, 0.0]);
        let e = embed_matrix(labels(3), &m, Dims::Full, EmbeddingMode::PaperLiteral).unwrap();
        let new = DMatrix::from_row_slice(1, 3, &[0.3, 0.3, 0.9]);
        let p = project_new_posts(&e, &new).unwrap();
        let d0 = (p.row(0) - e.coords.row(0)).norm();
        let d1 = (p.row(0) - e.coords.row(1)).norm();
        assert_relative_eq!(d0, d1, epsilon = 1e-12);
    }

    #[test]
    fn classical_recovers_line_distances() {
        let m = line_matrix();
        let e = embed_matrix(labels(4), &m, Dims::Full, EmbeddingMode::ClassicalPcoa).unwrap();
        assert_eq!(e.dims(), 1);
        for i in 0..4 {
            for j in 0..4 {
                let d = (e.coords.row(i) - e.coords.row(j)).norm();
                assert_relative_eq!(d, m[(i, j)], epsilon = 1e-10);
            }
        }
        assert!(e.negative_mass < 1e-12);
    }

    #[test]
    fn auto_dims_rule() {
        assert_eq!(choose_dims(Dims::Auto, &[5.0, 3.0, 1.0, 1.0], 4, 4).unwrap(), 3);
        assert_eq!(choose_dims(Dims::Auto, &[9.0, 1.0], 2, 2).unwrap(), 1);
        assert_eq!(choose_dims(Dims::Auto, &[0.0, 0.0], 2, 2).unwrap(), 1);
        assert_eq!(choose_dims::<f64>(Dims::Auto, &[], 0, 0).unwrap(), 0);
    }

    fn user_corpus() -> Corpus {
        let posts = [("a", "u1"), ("b", "u1"), ("c", "u2")];
        Corpus::from_records(
            [("t".to_string(), String::new())],
            posts.iter().map(|(p, u)| PostRecord {
                post_id: p.to_string(),
                thread_id: "t".into(),
                user_id: u.to_string(),
                body: String::new(),
            })
            .chain([PostRecord {
                post_id: "z".into(),
                thread_id: "t".into(),
                user_id: "u3".into(),
                body: String::new(),
            }]),
        )
        .unwrap()
    }

    fn fixed_embedding(ids: &[&str], coords: &[f64], k: usize) -> Embedding<f64> {
        Embedding {
            doc_ids: ids.iter().map(|s| s.to_string()).collect(),
            coords: DMatrix::from_row_slice(ids.len(), k, coords),
            singular_values: vec![],
            mode: EmbeddingMode::ClassicalPcoa,
            left_factor: None,
            negative_mass: 0.0,
        }
    }

    #[test]
    fn centroids_are_means() {
        let e = fixed_embedding(&["a", "b", "c"], &[0.0, 0.0, 2.0, 2.0, 5.0, -1.0], 2);
        let g = user_centroids(&e, &user_corpus()).unwrap();
        assert_eq!(g.user_ids, ["u1", "u2"]);
        assert_eq!(g.centroids.row(0).iter().copied().collect::<Vec<_>>(), [1.0, 1.0]);
        assert_eq!(g.centroids.row(1).iter().copied().collect::<Vec<_>>(), [5.0, -1.0]);
        assert_eq!(g.excluded, ["u3"]);
        assert_relative_eq!(g.distances[(0, 1)], (16.0f64 + 4.0).sqrt());

        let bad = fixed_embedding(&["nope"], &[0.0], 1);
        assert!(user_centroids(&bad, &user_corpus()).is_err());
    }

    #[test]
    fn user_distance_examples() {
        let d = user_distance_matrix(&DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 3.0, 4.0]));
        assert_eq!(d[(0, 1)], 5.0);
        let d = user_distance_matrix(&DMatrix::from_row_slice(2, 1, &[2.5, 2.5]));
        assert_eq!(d[(0, 1)], 0.0);
        let d = user_distance_matrix(&DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 3.0]));
        assert_eq!(d, DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 3.0, 1.0, 0.0, 2.0, 3.0, 2.0, 0.0]));
    }

    fn dissim(values: &[f64], authors: &[usize], lambda: f64) -> DissimilarityMatrix<f64> {
        let n = authors.len();
        DissimilarityMatrix {
            doc_ids: labels(n),
            values: DMatrix::from_row_slice(n, n, values),
            author_of: authors.to_vec(),
            authors: (0..=*authors.iter().max().unwrap()).map(|a| format!("A{a}")).collect(),
            lambda,
        }
    }

    #[test]
    fn average_pairwise_examples() {
        let m = dissim(&[0.0, 0.1, 0.4, 0.1, 0.0, 0.6, 0.4, 0.6, 0.0], &[0, 0, 1], 0.0);
        let (ids, d) = average_pairwise_user_distance(&m).unwrap();
        assert_eq!(ids, ["A0", "A1"]);
        assert_relative_eq!(d[(0, 1)], 0.5, epsilon = 1e-15);
        assert_eq!(d[(0, 0)], 0.0);

        let m = dissim(&[0.0, 0.7, 0.7, 0.0], &[0, 1], 0.0);
        assert_eq!(average_pairwise_user_distance(&m).unwrap().1[(0, 1)], 0.7);

        let m = dissim(&[0.0, 0.7, 0.7, 0.0], &[0, 1], 0.05);
        assert!(average_pairwise_user_distance(&m).is_err());
    }
}
