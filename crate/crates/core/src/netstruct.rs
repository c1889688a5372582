//! Network structure from a user distance matrix: agglomerative clustering
//! (complete and single linkage), dendrogram cuts, the minimum spanning
//! tree, and the text-only baseline distance.
//!
//! Cluster IDs follow the usual convention: leaves are `0..n`, the cluster
//! formed by merge `s` is `n + s`. Ties between equal linkage distances go
//! to the lexicographically smallest `(a, b)` ID pair; ties between equal
//! edge weights in Kruskal go to the smallest `(i, j)` index pair. Matrix
//! indices follow the sorted ID order of the rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::linalg::check_symmetric;
use crate::simcore::{cosine, WeightVector};
use crate::textprep::{count_documents, preprocess, PrepOptions};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    #[default]
    Complete,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge<T> {
    /// Smaller of the two merged cluster IDs.
    pub a: usize,
    pub b: usize,
    pub height: T,
    /// Leaves in the merged cluster.
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram<T> {
    pub leaf_ids: Vec<String>,
    pub merges: Vec<Merge<T>>,
}

fn check_distances<T: Scalar>(d: &DMatrix<T>, ids: &[String]) -> Result<()> {
    check_symmetric(d, "distance matrix")?;
    if ids.len() != d.nrows() {
        return Err(Error::InvalidInput(format!(
            "{} labels for a {n}x{n} distance matrix",
            ids.len(),
            n = d.nrows()
        )));
    }
    if d.iter().any(|&v| v < T::zero()) {
        return Err(Error::InvalidInput("distance matrix has negative entries".into()));
    }
    if (0..d.nrows()).any(|i| d[(i, i)] != T::zero()) {
        return Err(Error::InvalidInput("distance matrix has a nonzero diagonal".into()));
    }
    Ok(())
}

/// Agglomerative clustering with Lance-Williams updates of a working copy
/// of the distance matrix.
pub fn agglomerate<T: Scalar>(
    d: &DMatrix<T>,
    ids: &[String],
    linkage: Linkage,
) -> Result<Dendrogram<T>> {
    check_distances(d, ids)?;
    let n = d.nrows();
    let mut work = d.clone();
    let mut cluster: Vec<Option<usize>> = (0..n).map(Some).collect();
    let mut size = vec![1usize; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(T, usize, usize, usize, usize)> = None;
        for p in 0..n {
            let Some(cp) = cluster[p] else { continue };
            for q in p + 1..n {
                let Some(cq) = cluster[q] else { continue };
                let h = work[(p, q)];
                let (a, b) = (cp.min(cq), cp.max(cq));
                let better = match best {
                    None => true,
                    Some((bh, ba, bb, _, _)) => h < bh || (h == bh && (a, b) < (ba, bb)),
                };
                if better {
                    best = Some((h, a, b, p, q));
                }
            }
        }
        let (height, a, b, p, q) = best.expect("two active clusters");
        for r in 0..n {
            if r == p || r == q || cluster[r].is_none() {
                continue;
            }
            let (x, y) = (work[(p, r)], work[(q, r)]);
            let v = match linkage {
                Linkage::Complete => x.max(y),
                Linkage::Single => x.min(y),
            };
            work[(p, r)] = v;
            work[(r, p)] = v;
        }
        size[p] += size[q];
        cluster[p] = Some(n + step);
        cluster[q] = None;
        merges.push(Merge {
            a,
            b,
            height,
            size: size[p],
        });
    }

    Ok(Dendrogram {
        leaf_ids: ids.to_vec(),
        merges,
    })
}

impl<T: Scalar> Dendrogram<T> {
    pub fn n_leaves(&self) -> usize {
        self.leaf_ids.len()
    }

    /// Cluster label of every leaf after undoing the last `k - 1` merges.
    /// A cluster is labelled by the index of its smallest member.
    pub fn cut(&self, k: usize) -> Result<Vec<usize>> {
        let n = self.n_leaves();
        if k < 1 || k > n {
            return Err(Error::InvalidArgument(format!(
                "cannot cut {n} leaves into {k} clusters"
            )));
        }
        let mut uf = UnionFind::<usize>::new(n);
        // any leaf of each cluster ID
        let mut rep: Vec<usize> = (0..n).collect();
        for m in &self.merges[..n - k] {
            uf.union(rep[m.a], rep[m.b]);
            rep.push(rep[m.a]);
        }
        let mut smallest: BTreeMap<usize, usize> = BTreeMap::new();
        for leaf in 0..n {
            smallest.entry(uf.find(leaf)).or_insert(leaf);
        }
        Ok((0..n).map(|leaf| smallest[&uf.find(leaf)]).collect())
    }

    /// Newick text; branch lengths are height differences.
    pub fn to_newick(&self) -> String {
        let n = self.n_leaves();
        if n == 0 {
            return ";".into();
        }
        let root = if self.merges.is_empty() { 0 } else { n + self.merges.len() - 1 };
        let mut out = String::new();
        self.write_newick(root, &mut out);
        out.push(';');
        out
    }

    fn height_of(&self, id: usize) -> T {
        let n = self.n_leaves();
        if id < n {
            T::zero()
        } else {
            self.merges[id - n].height
        }
    }

    fn write_newick(&self, id: usize, out: &mut String) {
        let n = self.n_leaves();
        if id < n {
            out.push_str(&newick_label(&self.leaf_ids[id]));
            return;
        }
        let m = self.merges[id - n];
        out.push('(');
        for (i, child) in [m.a, m.b].into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.write_newick(child, out);
            let len = (m.height - self.height_of(child)).as_f64();
            let _ = write!(out, ":{len}");
        }
        out.push(')');
    }

    pub fn to_json(&self) -> String {
        let doc = DendrogramJson {
            merges: self
                .merges
                .iter()
                .map(|m| (m.a, m.b, m.height.as_f64()))
                .collect(),
            leaves: self.leaf_ids.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DendrogramJson = serde_json::from_str(text).map_err(|e| Error::Malformed {
            line: e.line(),
            message: e.to_string(),
        })?;
        let n = doc.leaves.len();
        let mut size: Vec<usize> = vec![1; n];
        let mut merges = Vec::with_capacity(doc.merges.len());
        for (s, &(a, b, h)) in doc.merges.iter().enumerate() {
            if a >= n + s || b >= n + s {
                return Err(Error::InvalidInput(format!("merge {s} references a future cluster")));
            }
            let sz = size[a] + size[b];
            size.push(sz);
            merges.push(Merge {
                a,
                b,
                height: T::lit(h),
                size: sz,
            });
        }
        Ok(Self {
            leaf_ids: doc.leaves,
            merges,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct DendrogramJson {
    merges: Vec<(usize, usize, f64)>,
    leaves: Vec<String>,
}

fn newick_label(s: &str) -> String {
    if s.chars().any(|c| " ()[]':;,\t\n".contains(c)) {
        format!("'{}'", s.replace('\'', "''"))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree<T> {
    pub node_ids: Vec<String>,
    /// `(i, j, weight)` with `i < j`, in the order Kruskal accepted them.
    pub edges: Vec<(usize, usize, T)>,
    pub total_weight: T,
}

/// Kruskal over all `n(n-1)/2` pairs of the complete graph.
pub fn minimum_spanning_tree<T: Scalar>(d: &DMatrix<T>, ids: &[String]) -> Result<SpanningTree<T>> {
    check_distances(d, ids)?;
    let n = d.nrows();
    let mut candidates: Vec<(T, usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (d[(i, j)], i, j))
        .collect();
    candidates.sort_by(|x, y| {
        x.0.partial_cmp(&y.0)
            .expect("finite")
            .then((x.1, x.2).cmp(&(y.1, y.2)))
    });
    let mut uf = UnionFind::<usize>::new(n);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut total = T::zero();
    for (w, i, j) in candidates {
        if uf.union(i, j) {
            edges.push((i, j, w));
            total += w;
            if edges.len() + 1 == n {
                break;
            }
        }
    }
    Ok(SpanningTree {
        node_ids: ids.to_vec(),
        edges,
        total_weight: total,
    })
}

impl<T: Scalar> SpanningTree<T> {
    /// Undirected DOT graph, weights with 6 decimals.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph mst {\n");
        for id in &self.node_ids {
            let _ = writeln!(s, "  {};", dot_id(id));
        }
        for &(i, j, w) in &self.edges {
            let _ = writeln!(
                s,
                "  {} -- {} [weight={:.6}];",
                dot_id(&self.node_ids[i]),
                dot_id(&self.node_ids[j]),
                w.as_f64()
            );
        }
        s.push_str("}\n");
        s
    }
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Text-only user distances: each user's posts are concatenated into one
/// document (thread titles not appended), weighted by plain tf-idf with the
/// users as the document collection, and compared by `1 - cosine`.
pub fn baseline_user_similarity<T: Scalar>(
    corpus: &Corpus,
    options: &PrepOptions,
) -> Result<(Vec<String>, DMatrix<T>)> {
    let options = PrepOptions {
        append_title: false,
        ..options.clone()
    };
    let docs: Vec<(String, Vec<String>)> = corpus
        .users()
        .iter()
        .map(|u| {
            let tokens = u
                .post_ids
                .iter()
                .flat_map(|pid| {
                    let p = corpus.post(pid).expect("authored post exists");
                    preprocess(&p.body, "", &options)
                })
                .collect();
            (u.user_id.clone(), tokens)
        })
        .collect();
    let refs: Vec<(&str, &[String])> = docs.iter().map(|(id, t)| (id.as_str(), t.as_slice())).collect();
    let (dict, vectors) = count_documents(&refs);
    let weights = vectors
        .iter()
        .map(|v| WeightVector::<T>::plain(v, &dict))
        .collect::<Result<Vec<_>>>()?;
    let n = weights.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = (T::one() - cosine(&weights[i], &weights[j])).max(T::zero());
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok((docs.into_iter().map(|(id, _)| id).collect(), d))
}
