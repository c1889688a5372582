//! Forum data: posts, threads and users with referential links.
//!
//! A [`Corpus`] is immutable once built. Posts, threads and users are stored
//! sorted by their (opaque, string) IDs so iteration order is deterministic;
//! each thread additionally keeps its posts in their original order.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::quantile::FiveNumber;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub post_id: String,
    pub thread_id: String,
    pub user_id: String,
    pub body: String,
    /// Zero-based ordinal within the thread.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thread {
    pub thread_id: String,
    pub title: String,
    /// Member posts in thread order.
    pub post_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct User {
    pub user_id: String,
    /// Authored posts, sorted by ID.
    pub post_ids: Vec<String>,
}

/// One input record as it appears in the JSONL interchange format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Record {
    Post {
        post_id: String,
        thread_id: String,
        user_id: String,
        body: String,
    },
    Thread {
        thread_id: String,
        #[serde(default)]
        title: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Jsonl,
    Csv,
}

/// Raw post as read from input, before positions are assigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostRecord {
    pub post_id: String,
    pub thread_id: String,
    pub user_id: String,
    pub body: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    posts: Vec<Post>,
    threads: Vec<Thread>,
    users: Vec<User>,
    post_index: HashMap<String, usize>,
    thread_index: HashMap<String, usize>,
    user_index: HashMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus from thread `(id, title)` pairs and posts given in
    /// input order; a post's position is its rank among the posts of its
    /// thread in that order. Threads without posts are dropped.
    pub fn from_records(
        threads: impl IntoIterator<Item = (String, String)>,
        posts: impl IntoIterator<Item = PostRecord>,
    ) -> Result<Self> {
        let mut titles: BTreeMap<String, String> = BTreeMap::new();
        for (id, title) in threads {
            if titles.contains_key(&id) {
                return Err(Error::DuplicateThread(id));
            }
            titles.insert(id, title);
        }

        let mut members: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut authored: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut by_id: BTreeMap<String, Post> = BTreeMap::new();
        for rec in posts {
            if by_id.contains_key(&rec.post_id) {
                return Err(Error::DuplicatePost(rec.post_id));
            }
            if !titles.contains_key(&rec.thread_id) {
                return Err(Error::UnknownThread {
                    post: rec.post_id,
                    thread: rec.thread_id,
                });
            }
            let thread_posts = members.entry(rec.thread_id.clone()).or_default();
            let position = thread_posts.len();
            thread_posts.push(rec.post_id.clone());
            authored
                .entry(rec.user_id.clone())
                .or_default()
                .push(rec.post_id.clone());
            by_id.insert(
                rec.post_id.clone(),
                Post {
                    post_id: rec.post_id,
                    thread_id: rec.thread_id,
                    user_id: rec.user_id,
                    body: rec.body,
                    position,
                },
            );
        }

        let posts: Vec<Post> = by_id.into_values().collect();
        let threads: Vec<Thread> = titles
            .into_iter()
            .filter_map(|(thread_id, title)| {
                let post_ids = members.remove(&thread_id)?;
                Some(Thread {
                    thread_id,
                    title,
                    post_ids,
                })
            })
            .collect();
        let users: Vec<User> = authored
            .into_iter()
            .map(|(user_id, mut post_ids)| {
                post_ids.sort();
                User { user_id, post_ids }
            })
            .collect();

        let post_index = index_of(posts.iter().map(|p| &p.post_id));
        let thread_index = index_of(threads.iter().map(|t| &t.thread_id));
        let user_index = index_of(users.iter().map(|u| &u.user_id));
        Ok(Self {
            posts,
            threads,
            users,
            post_index,
            thread_index,
            user_index,
        })
    }

    /// Reads the JSONL interchange format. Blank lines are ignored; thread
    /// records may appear anywhere.
    pub fn from_jsonl<R: Read>(reader: R) -> Result<Self> {
        let reader = std::io::BufReader::new(reader);
        let mut threads = Vec::new();
        let mut posts = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(&line).map_err(|e| Error::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?;
            match record {
                Record::Thread { thread_id, title } => {
                    threads.push((thread_id, title.unwrap_or_default()))
                }
                Record::Post {
                    post_id,
                    thread_id,
                    user_id,
                    body,
                } => posts.push(PostRecord {
                    post_id,
                    thread_id,
                    user_id,
                    body,
                }),
            }
        }
        Self::from_records(threads, posts)
    }

    /// Reads `posts.csv` (post_id,thread_id,user_id,body) and `threads.csv`
    /// (thread_id,title), both with a header row.
    pub fn from_csv<P: Read, T: Read>(posts: P, threads: T) -> Result<Self> {
        #[derive(Deserialize)]
        struct ThreadRow {
            thread_id: String,
            #[serde(default)]
            title: Option<String>,
        }
        #[derive(Deserialize)]
        struct PostRow {
            post_id: String,
            thread_id: String,
            user_id: String,
            body: String,
        }

        fn rows<R: Read, D: serde::de::DeserializeOwned>(r: R) -> Result<Vec<D>> {
            let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
            let mut out = Vec::new();
            for row in reader.deserialize() {
                let row: D = row.map_err(|e| Error::Malformed {
                    line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                    message: e.to_string(),
                })?;
                out.push(row);
            }
            Ok(out)
        }

        let threads: Vec<ThreadRow> = rows(threads)?;
        let posts: Vec<PostRow> = rows(posts)?;
        Self::from_records(
            threads
                .into_iter()
                .map(|t| (t.thread_id, t.title.unwrap_or_default())),
            posts.into_iter().map(|p| PostRecord {
                post_id: p.post_id,
                thread_id: p.thread_id,
                user_id: p.user_id,
                body: p.body,
            }),
        )
    }

    /// Writes JSONL: all thread records first, then posts thread by thread
    /// in position order, so that reading the output back reproduces this
    /// corpus exactly.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for t in &self.threads {
            let rec = Record::Thread {
                thread_id: t.thread_id.clone(),
                title: Some(t.title.clone()),
            };
            serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        for t in &self.threads {
            for pid in &t.post_ids {
                let p = self.post(pid).expect("thread member exists");
                let rec = Record::Post {
                    post_id: p.post_id.clone(),
                    thread_id: p.thread_id.clone(),
                    user_id: p.user_id.clone(),
                    body: p.body.clone(),
                };
                serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    pub fn write_csv<P: Write, T: Write>(&self, posts: P, threads: T) -> Result<()> {
        let mut tw = csv::Writer::from_writer(threads);
        tw.write_record(["thread_id", "title"])?;
        for t in &self.threads {
            tw.write_record([&t.thread_id, &t.title])?;
        }
        tw.flush()?;
        let mut pw = csv::Writer::from_writer(posts);
        pw.write_record(["post_id", "thread_id", "user_id", "body"])?;
        for t in &self.threads {
            for pid in &t.post_ids {
                let p = self.post(pid).expect("thread member exists");
                pw.write_record([&p.post_id, &p.thread_id, &p.user_id, &p.body])?;
            }
        }
        pw.flush()?;
        Ok(())
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn threads(&self) -> &[Thread] {
        &self.threads
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn post(&self, id: &str) -> Option<&Post> {
        self.post_index.get(id).map(|&i| &self.posts[i])
    }

    pub fn thread(&self, id: &str) -> Option<&Thread> {
        self.thread_index.get(id).map(|&i| &self.threads[i])
    }

    pub fn user(&self, id: &str) -> Option<&User> {
        self.user_index.get(id).map(|&i| &self.users[i])
    }

    pub fn post_position(&self, id: &str) -> Option<usize> {
        self.post_index.get(id).copied()
    }

    pub fn thread_position(&self, id: &str) -> Option<usize> {
        self.thread_index.get(id).copied()
    }

    pub fn user_position(&self, id: &str) -> Option<usize> {
        self.user_index.get(id).copied()
    }

    pub fn n_posts(&self) -> usize {
        self.posts.len()
    }

    pub fn n_threads(&self) -> usize {
        self.threads.len()
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    /// Keeps exactly the posts of users whose post count in `self` lies in
    /// `min..=max` (`None` means unbounded). Threads left without posts are
    /// dropped; surviving posts keep their relative thread order.
    pub fn filter_users_by_post_count(&self, min: usize, max: Option<usize>) -> Result<Self> {
        let max = max.unwrap_or(usize::MAX);
        if min > max {
            return Err(Error::InvalidArgument(format!(
                "minimum post count {min} exceeds maximum {max}"
            )));
        }
        let keep = |user_id: &str| {
            let n = self.user(user_id).map_or(0, |u| u.post_ids.len());
            (min..=max).contains(&n)
        };
        let threads = self
            .threads
            .iter()
            .map(|t| (t.thread_id.clone(), t.title.clone()));
        let posts = self
            .threads
            .iter()
            .flat_map(|t| t.post_ids.iter())
            .map(|pid| self.post(pid).expect("thread member exists"))
            .filter(|p| keep(&p.user_id))
            .map(|p| PostRecord {
                post_id: p.post_id.clone(),
                thread_id: p.thread_id.clone(),
                user_id: p.user_id.clone(),
                body: p.body.clone(),
            })
            .collect::<Vec<_>>();
        Self::from_records(threads, posts)
    }

    pub fn stats(&self) -> CorpusStats {
        compute_stats(self)
    }
}

fn index_of<'a>(ids: impl Iterator<Item = &'a String>) -> HashMap<String, usize> {
    ids.enumerate().map(|(i, id)| (id.clone(), i)).collect()
}

/// Size and shape summary of a corpus. Word counts are taken on the raw,
/// whitespace-split bodies and include stopwords and markup.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_posts: usize,
    pub n_threads: usize,
    pub n_users: usize,
    pub post_word_count_quantiles: FiveNumber,
    pub posts_per_user_quantiles: FiveNumber,
    pub posts_per_thread_quantiles: FiveNumber,
}

pub fn compute_stats(corpus: &Corpus) -> CorpusStats {
    CorpusStats {
        n_posts: corpus.n_posts(),
        n_threads: corpus.n_threads(),
        n_users: corpus.n_users(),
        post_word_count_quantiles: FiveNumber::of(
            corpus
                .posts
                .iter()
                .map(|p| p.body.split_whitespace().count())
                .collect(),
        ),
        posts_per_user_quantiles: FiveNumber::of(
            corpus.users.iter().map(|u| u.post_ids.len()).collect(),
        ),
        posts_per_thread_quantiles: FiveNumber::of(
            corpus.threads.iter().map(|t| t.post_ids.len()).collect(),
        ),
    }
}

impl CorpusStats {
    /// Plain-text table with one row per distribution.
    pub fn table(&self) -> String {
        let mut s = format!(
            "posts: {}\nthreads: {}\nusers: {}\n{:<18}{:>8}{:>8}{:>8}{:>8}{:>8}\n",
            self.n_posts, self.n_threads, self.n_users, "", "min", "Q1", "median", "Q3", "max"
        );
        for (name, q) in [
            ("words per post", &self.post_word_count_quantiles),
            ("posts per user", &self.posts_per_user_quantiles),
            ("posts per thread", &self.posts_per_thread_quantiles),
        ] {
            s.push_str(&format!("{name:<18}"));
            for v in q.as_array() {
                s.push_str(&format!("{v:>8}"));
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post(id: &str, thread: &str, user: &str, body: &str) -> PostRecord {
        PostRecord {
            post_id: id.into(),
            thread_id: thread.into(),
            user_id: user.into(),
            body: body.into(),
        }
    }

    #[test]
    fn single_thread_four_users() {
        let jsonl = r#"{"type":"thread","thread_id":"t","title":"Madriva 2007 3D desktop"}
{"type":"post","post_id":"1","thread_id":"t","user_id":"a","body":"x"}
{"type":"post","post_id":"2","thread_id":"t","user_id":"b","body":"y"}
{"type":"post","post_id":"3","thread_id":"t","user_id":"c","body":"z"}
{"type":"post","post_id":"4","thread_id":"t","user_id":"d","body":"w"}
"#;
        let c = Corpus::from_jsonl(jsonl.as_bytes()).unwrap();
        assert_eq!((c.n_posts(), c.n_threads(), c.n_users()), (4, 1, 4));
        assert_eq!(c.thread("t").unwrap().post_ids, ["1", "2", "3", "4"]);
        assert_eq!(c.post("3").unwrap().position, 2);
    }

    #[test]
    fn thread_records_may_follow_posts() {
        let jsonl = r#"{"type":"post","post_id":"p","thread_id":"t","user_id":"u","body":"b"}
{"type":"thread","thread_id":"t"}
"#;
        let c = Corpus::from_jsonl(jsonl.as_bytes()).unwrap();
        assert_eq!(c.thread("t").unwrap().title, "");
    }

    #[test]
    fn empty_stream() {
        let c = Corpus::from_jsonl(&b""[..]).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.stats(), CorpusStats::default());
    }

    #[test]
    fn unknown_thread_is_named() {
        let err = Corpus::from_records(vec![], vec![post("p", "ghost", "u", "")]).unwrap_err();
        assert!(err.to_string().contains("ghost"), "{err}");
    }

    #[test]
    fn duplicate_post_is_named() {
        let err = Corpus::from_records(
            vec![("t".into(), String::new())],
            vec![post("p", "t", "u", ""), post("p", "t", "v", "")],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DuplicatePost(ref id) if id == "p"));
    }

    #[test]
    fn malformed_line_number() {
        let jsonl = "{\"type\":\"thread\",\"thread_id\":\"t\",\"title\":\"\"}\n\nnot json\n";
        match Corpus::from_jsonl(jsonl.as_bytes()).unwrap_err() {
            Error::Malformed { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        let missing_body = r#"{"type":"post","post_id":"p","thread_id":"t","user_id":"u"}"#;
        assert!(matches!(
            Corpus::from_jsonl(missing_body.as_bytes()),
            Err(Error::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn csv_input() {
        let posts = "post_id,thread_id,user_id,body\np1,t1,u1,\"hello, \"\"world\"\"\"\np2,t1,u2,bye\n";
        let threads = "thread_id,title\nt1,greetings\n";
        let c = Corpus::from_csv(posts.as_bytes(), threads.as_bytes()).unwrap();
        assert_eq!(c.post("p1").unwrap().body, "hello, \"world\"");
        let mut p = Vec::new();
        let mut t = Vec::new();
        c.write_csv(&mut p, &mut t).unwrap();
        assert_eq!(Corpus::from_csv(&p[..], &t[..]).unwrap(), c);
    }

    fn banded() -> Corpus {
        let mut posts = Vec::new();
        for (user, n) in [("a", 5), ("b", 200), ("c", 205), ("d", 210), ("e", 500)] {
            for i in 0..n {
                posts.push(post(&format!("{user}{i}"), &format!("t{}", i % 7), user, "w"));
            }
        }
        posts.push(post("solo", "lonely", "a", "w"));
        let threads = (0..7)
            .map(|i| (format!("t{i}"), String::new()))
            .chain([("lonely".to_string(), String::new())]);
        Corpus::from_records(threads, posts).unwrap()
    }

    #[test]
    fn filter_inclusive_bounds() {
        let c = banded();
        let f = c.filter_users_by_post_count(200, Some(210)).unwrap();
        let users: Vec<_> = f.users().iter().map(|u| u.user_id.as_str()).collect();
        // b has 200, c 205, d 210: all inclusive; a has 6 and e 500.
        assert_eq!(users, ["b", "c", "d"]);
        assert!(f.thread("lonely").is_none());
        assert_eq!(f.n_posts(), 615);

        let g = c.filter_users_by_post_count(201, Some(210)).unwrap();
        assert_eq!(g.n_users(), 2);
    }

    #[test]
    fn filter_identity_and_idempotence() {
        let c = banded();
        assert_eq!(c.filter_users_by_post_count(0, None).unwrap(), c);
        let once = c.filter_users_by_post_count(200, Some(210)).unwrap();
        let twice = once.filter_users_by_post_count(200, Some(210)).unwrap();
        assert_eq!(once, twice);
        assert!(c.filter_users_by_post_count(5, Some(4)).is_err());
    }

    #[test]
    fn stats_examples() {
        let c = Corpus::from_records(
            vec![("t".into(), String::new())],
            vec![post("p", "t", "u", "hello world")],
        )
        .unwrap();
        assert_eq!(c.stats().post_word_count_quantiles.as_array(), [2; 5]);

        let bodies = ["a", "a b", "a b c", "a b c d", "a b c d e"];
        let c = Corpus::from_records(
            vec![("t".into(), String::new())],
            bodies
                .iter()
                .enumerate()
                .map(|(i, b)| post(&i.to_string(), "t", "u", b)),
        )
        .unwrap();
        let s = c.stats();
        assert_eq!(s.post_word_count_quantiles.median, 3);
        assert_eq!(s.posts_per_thread_quantiles.max, 5);
        assert!(s.table().contains("words per post"));
    }
}
