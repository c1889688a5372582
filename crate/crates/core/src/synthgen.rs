//! Synthetic inputs: Gaussian point groups for studying the author constant,
//! and planted-community forums for end-to-end checks.
//!
//! All randomness comes from xoshiro256** seeded through SplitMix64
//! (`rand_xoshiro::Xoshiro256StarStar::seed_from_u64`). Derived draws are
//! spelled out so another implementation can reproduce them from the same
//! `u64` stream:
//!
//! * uniform in `[0, 1)`: `(x >> 11) * 2^-53`
//! * integer in `lo..=hi`: `lo + x % (hi - lo + 1)`
//! * standard normal: Box-Muller on `u1 = 1 - uniform`, `u2 = uniform`,
//!   returning `sqrt(-2 ln u1) cos(2 pi u2)` then `... sin(2 pi u2)` from
//!   the same pair.

use std::collections::HashSet;

use nalgebra::DMatrix;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, PostRecord};
use crate::simcore::DissimilarityMatrix;
use crate::{Error, Result};

pub struct Prng {
    inner: Xoshiro256StarStar,
    spare_normal: Option<f64>,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.range(0, n - 1)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaussianGroupsConfig {
    pub n_groups: usize,
    pub points_per_group: usize,
    pub means: Vec<[f64; 2]>,
    /// Shared covariance of every group.
    pub covariance: [[f64; 2]; 2],
    pub seed: u64,
}

impl Default for GaussianGroupsConfig {
    /// Four groups of 100 points, covariance `diag(3, 3)`, means at
    /// `(1, 1)`, `(1, -1)`, `(-1, 1)`, `(-1, -1)`.
    fn default() -> Self {
        Self {
            n_groups: 4,
            points_per_group: 100,
            means: vec![[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]],
            covariance: [[3.0, 0.0], [0.0, 3.0]],
            seed: 20130401,
        }
    }
}

impl GaussianGroupsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.means.len() != self.n_groups {
            return bad("n_groups must equal the number of means");
        }
        let [[a, b], [c, d]] = self.covariance;
        if b != c || a <= 0.0 || a * d - b * c <= 0.0 {
            return bad("covariance must be symmetric positive definite");
        }
        for (i, m) in self.means.iter().enumerate() {
            if self.means[..i].contains(m) {
                return bad("group means must be distinct");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianGroups {
    pub points: Vec<[f64; 2]>,
    /// Group index of every point; points are stored group by group.
    pub labels: Vec<usize>,
}

pub fn generate_gaussian_groups(config: &GaussianGroupsConfig) -> Result<GaussianGroups> {
    config.validate()?;
    let [[a, b], [_, d]] = config.covariance;
    let l11 = a.sqrt();
    let l21 = b / l11;
    let l22 = (d - l21 * l21).sqrt();
    let mut rng = Prng::new(config.seed);
    let mut points = Vec::with_capacity(config.n_groups * config.points_per_group);
    let mut labels = Vec::with_capacity(points.capacity());
    for (g, mean) in config.means.iter().enumerate() {
        for _ in 0..config.points_per_group {
            let z1 = rng.normal();
            let z2 = rng.normal();
            points.push([mean[0] + l11 * z1, mean[1] + l21 * z1 + l22 * z2]);
            labels.push(g);
        }
    }
    Ok(GaussianGroups { points, labels })
}

impl GaussianGroups {
    pub fn ids(&self) -> Vec<String> {
        (0..self.points.len()).map(|i| format!("pt{i:04}")).collect()
    }

    pub fn distances(&self) -> DMatrix<f64> {
        let n = self.points.len();
        DMatrix::from_fn(n, n, |i, j| {
            let (p, q) = (self.points[i], self.points[j]);
            ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
        })
    }

    /// Point similarities `1 - d / max d`, with groups playing the role of
    /// authors: within-group pairs get `+lambda` exactly as same-author
    /// posts do, then `dist = max(0, 1 - sim)`.
    pub fn dissimilarity(&self, lambda: f64) -> Result<DissimilarityMatrix<f64>> {
        let d = self.distances();
        let max = d.max();
        let sim = if max > 0.0 { d.map(|v| 1.0 - v / max) } else { d.map(|_| 1.0) };
        let groups = self.labels.iter().copied().max().map_or(0, |g| g + 1);
        DissimilarityMatrix::from_similarities(
            &sim,
            self.ids(),
            (0..groups).map(|g| format!("group{g}")).collect(),
            self.labels.clone(),
            lambda,
        )
    }
}

/// Planted-community forum generator settings.
///
/// Each community owns a disjoint block of `vocabulary_size / n_communities`
/// topic terms (`c<community>w<index>`); a shared background vocabulary of
/// `background_size` terms (`bg<index>`) is common to everyone. Body tokens
/// come from the author's topic with probability `topic_weight` and from the
/// background otherwise, uniformly within either block. Titles come from the
/// topic of the community that started the thread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticForumConfig {
    pub n_users: usize,
    pub n_communities: usize,
    pub vocabulary_size: usize,
    pub background_size: usize,
    pub topic_weight: f64,
    pub posts_per_user: [usize; 2],
    pub thread_length: [usize; 2],
    pub body_length: [usize; 2],
    pub title_length: [usize; 2],
    /// Chance that a reply slot goes to a user outside the thread's
    /// community.
    pub cross_community_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticForumConfig {
    fn default() -> Self {
        Self {
            n_users: 30,
            n_communities: 3,
            vocabulary_size: 90,
            background_size: 2000,
            topic_weight: 0.3,
            posts_per_user: [40, 60],
            thread_length: [2, 6],
            body_length: [5, 40],
            title_length: [2, 4],
            cross_community_rate: 0.1,
            seed: 7,
        }
    }
}

impl SyntheticForumConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        for (name, [lo, hi]) in [
            ("posts_per_user", self.posts_per_user),
            ("thread_length", self.thread_length),
            ("body_length", self.body_length),
            ("title_length", self.title_length),
        ] {
            if lo > hi {
                return bad(format!("{name} range {lo}..={hi} is empty"));
            }
        }
        if self.thread_length[0] == 0 {
            return bad("thread_length must be at least 1".into());
        }
        for (name, p) in [
            ("topic_weight", self.topic_weight),
            ("cross_community_rate", self.cross_community_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} is not a probability"));
            }
        }
        if self.n_users == 0 || self.n_communities == 0 {
            return bad("need at least one user and one community".into());
        }
        if self.vocabulary_size < 2 * self.n_communities {
            return bad(format!(
                "vocabulary of {} terms is too small for {} distinct topics",
                self.vocabulary_size, self.n_communities
            ));
        }
        if self.background_size == 0 && self.topic_weight < 1.0 {
            return bad("background vocabulary is empty".into());
        }
        Ok(())
    }

    pub fn community_of(&self, user: usize) -> usize {
        user % self.n_communities
    }

    fn topic_terms(&self) -> usize {
        self.vocabulary_size / self.n_communities
    }
}

pub fn user_id(i: usize) -> String {
    format!("u{i:03}")
}

/// Planted community of every user of a generated forum, keyed like
/// [`Corpus::users`] (sorted by user ID).
pub fn planted_labels(config: &SyntheticForumConfig, corpus: &Corpus) -> Vec<usize> {
    corpus
        .users()
        .iter()
        .map(|u| {
            let i: usize = u.user_id[1..].parse().expect("generated user id");
            config.community_of(i)
        })
        .collect()
}

struct Slot {
    user: usize,
    community: usize,
}

/// Forum with users assigned to communities round-robin.
pub fn generate_forum(config: &SyntheticForumConfig) -> Result<Corpus> {
    generate(config, false)
}

/// Like [`generate_forum`], but no body token is shared between two posts
/// of the same thread: thread-mates are linked only through the title.
pub fn generate_sparse_forum(config: &SyntheticForumConfig) -> Result<Corpus> {
    generate(config, true)
}

fn generate(config: &SyntheticForumConfig, sparse: bool) -> Result<Corpus> {
    config.validate()?;
    let mut rng = Prng::new(config.seed);
    let [pmin, pmax] = config.posts_per_user;
    let mut quota: Vec<usize> = (0..config.n_users).map(|_| rng.range(pmin, pmax)).collect();

    let mut threads = Vec::new();
    let mut posts = Vec::new();
    let mut next_post = 0usize;
    loop {
        let open: Vec<usize> = (0..config.n_users).filter(|&u| quota[u] > 0).collect();
        if open.is_empty() {
            break;
        }
        let starter = open[rng.below(open.len())];
        let community = config.community_of(starter);
        let length = rng.range(config.thread_length[0], config.thread_length[1]);
        let mut slots = vec![Slot {
            user: starter,
            community,
        }];
        quota[starter] -= 1;
        for _ in 1..length {
            let foreign = rng.chance(config.cross_community_rate);
            let pick = |want_foreign: bool| -> Vec<usize> {
                (0..config.n_users)
                    .filter(|&u| quota[u] > 0 && (config.community_of(u) != community) == want_foreign)
                    .collect()
            };
            let mut pool = pick(foreign);
            if pool.is_empty() {
                pool = pick(!foreign);
            }
            if pool.is_empty() {
                break;
            }
            let user = pool[rng.below(pool.len())];
            quota[user] -= 1;
            slots.push(Slot {
                user,
                community: config.community_of(user),
            });
        }

        let thread_id = format!("t{:04}", threads.len());
        let title_len = rng.range(config.title_length[0], config.title_length[1]);
        let title: Vec<String> = (0..title_len).map(|_| topic_term(config, &mut rng, community)).collect();
        threads.push((thread_id.clone(), title.join(" ")));

        let mut used: HashSet<String> = HashSet::new();
        for slot in slots {
            let body_len = rng.range(config.body_length[0], config.body_length[1]);
            let mut body: Vec<String> = Vec::with_capacity(body_len);
            for _ in 0..body_len {
                let mut tries = 0;
                let token = loop {
                    let t = body_token(config, &mut rng, slot.community);
                    if !sparse || !used.contains(&t) {
                        break t;
                    }
                    tries += 1;
                    if tries > 1000 {
                        return Err(Error::InvalidArgument(
                            "vocabulary too small to keep thread bodies disjoint".into(),
                        ));
                    }
                };
                body.push(token);
            }
            used.extend(body.iter().cloned());
            posts.push(PostRecord {
                post_id: format!("p{next_post:05}"),
                thread_id: thread_id.clone(),
                user_id: user_id(slot.user),
                body: body.join(" "),
            });
            next_post += 1;
        }
    }
    Corpus::from_records(threads, posts)
}

fn topic_term(config: &SyntheticForumConfig, rng: &mut Prng, community: usize) -> String {
    format!("c{community}w{}", rng.below(config.topic_terms()))
}

fn body_token(config: &SyntheticForumConfig, rng: &mut Prng, community: usize) -> String {
    if config.background_size == 0 || rng.chance(config.topic_weight) {
        topic_term(config, rng, community)
    } else {
        format!("bg{}", rng.below(config.background_size))
    }
}
