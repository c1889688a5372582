//! Text preprocessing and term counting.
//!
//! `preprocess` turns a post body and its thread title into stemmed tokens;
//! `build_dictionary` runs it over a whole corpus and produces the term
//! dictionary with document frequencies, one [`TermVector`] per post and one
//! [`ThreadVector`] per thread.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::Corpus;
use crate::stem::stem;
use crate::Result;

const ENGLISH_STOPWORDS: &str = include_str!("stopwords_en.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList(HashSet<String>);

impl StopwordList {
    /// The bundled English list (318 words).
    pub fn english() -> Self {
        Self::parse(ENGLISH_STOPWORDS)
    }

    /// One word per line; blank lines and lines starting with `#` ignored.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn empty() -> Self {
        Self(HashSet::new())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct PrepOptions {
    pub stopwords: StopwordList,
    pub stem: bool,
    pub strip_html: bool,
    /// Append the thread title to every post before tokenizing.
    pub append_title: bool,
}

impl Default for PrepOptions {
    fn default() -> Self {
        Self {
            stopwords: StopwordList::english(),
            stem: true,
            strip_html: true,
            append_title: true,
        }
    }
}

/// Tokens of a post with its thread title appended: markup removed,
/// lowercased, split on non-alphanumeric characters, stopwords dropped,
/// stemmed. Title tokens follow body tokens.
pub fn preprocess(body: &str, title: &str, options: &PrepOptions) -> Vec<String> {
    let mut text = String::with_capacity(body.len() + title.len() + 1);
    text.push_str(body);
    if options.append_title && !title.is_empty() {
        text.push('\n');
        text.push_str(title);
    }
    let text = if options.strip_html {
        strip_html(&text)
    } else {
        text
    };
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !options.stopwords.contains(t))
        .map(|t| if options.stem { stem(t) } else { t.to_string() })
        .collect()
}

/// Removes tags, comments and the contents of `script`/`style` elements,
/// then decodes character entities. Each removed tag becomes a space so
/// that words on either side stay separate. An unterminated `<` is kept as
/// text.
pub fn strip_html(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    let mut rest = input;
    while let Some(lt) = rest.find('<') {
        out.push_str(&rest[..lt]);
        let tail = &rest[lt..];
        if let Some(body) = tail.strip_prefix("<!--") {
            match body.find("-->") {
                Some(end) => {
                    out.push(' ');
                    rest = &body[end + 3..];
                }
                None => rest = "",
            }
            continue;
        }
        let Some(gt) = tail.find('>') else {
            out.push_str(tail);
            rest = "";
            break;
        };
        let tag = tail[1..gt].trim_start().to_ascii_lowercase();
        rest = &tail[gt + 1..];
        out.push(' ');
        for raw in ["script", "style"] {
            let opens = tag.starts_with(raw)
                && tag[raw.len()..]
                    .chars()
                    .next()
                    .is_none_or(|c| c.is_whitespace() || c == '/');
            if opens && !tag.ends_with('/') {
                let close = format!("</{raw}");
                let lower = rest.to_ascii_lowercase();
                rest = match lower.find(&close) {
                    Some(i) => match rest[i..].find('>') {
                        Some(g) => &rest[i + g + 1..],
                        None => "",
                    },
                    None => "",
                };
            }
        }
    }
    out.push_str(rest);
    decode_entities(&out)
}

fn decode_entities(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    let mut rest = input;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let decoded = tail[1..]
            .find(';')
            .filter(|&semi| semi <= 10)
            .and_then(|semi| entity(&tail[1..1 + semi]).map(|c| (c, semi + 2)));
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &tail[len..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn entity(name: &str) -> Option<char> {
    if let Some(num) = name.strip_prefix('#') {
        let code = match num.strip_prefix(['x', 'X']) {
            Some(hex) => u32::from_str_radix(hex, 16).ok()?,
            None => num.parse().ok()?,
        };
        return char::from_u32(code);
    }
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        "ndash" => '\u{2013}',
        "mdash" => '\u{2014}',
        "hellip" => '\u{2026}',
        "copy" => '\u{a9}',
        "reg" => '\u{ae}',
        _ => return None,
    })
}

/// Global vocabulary: sorted unique terms, their document frequencies and
/// the number of documents counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictionary {
    pub terms: Vec<String>,
    pub df: Vec<u32>,
    pub n_documents: u32,
}

impl Dictionary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.terms
            .binary_search_by(|t| t.as_str().cmp(term))
            .ok()
            .map(|i| i as u32)
    }
}

/// Sparse term counts of one post, sorted by term index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermVector {
    pub doc_id: String,
    pub counts: Vec<(u32, u32)>,
}

impl TermVector {
    pub fn get(&self, term: u32) -> u32 {
        lookup(&self.counts, term)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Term counts of a whole thread: the sum of its posts' vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThreadVector {
    pub thread_id: String,
    pub counts: Vec<(u32, u32)>,
}

impl ThreadVector {
    pub fn get(&self, term: u32) -> u32 {
        lookup(&self.counts, term)
    }
}

fn lookup(counts: &[(u32, u32)], term: u32) -> u32 {
    counts
        .binary_search_by_key(&term, |&(t, _)| t)
        .map_or(0, |i| counts[i].1)
}

/// Dictionary plus term vectors, aligned with the corpus: `posts[i]`
/// belongs to `corpus.posts()[i]` and `threads[i]` to `corpus.threads()[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub dictionary: Dictionary,
    pub posts: Vec<TermVector>,
    pub threads: Vec<ThreadVector>,
}

impl Vocabulary {
    pub fn post_vector(&self, corpus: &Corpus, post_id: &str) -> Option<&TermVector> {
        corpus.post_position(post_id).map(|i| &self.posts[i])
    }

    pub fn thread_vector(&self, corpus: &Corpus, thread_id: &str) -> Option<&ThreadVector> {
        corpus.thread_position(thread_id).map(|i| &self.threads[i])
    }
}

/// Tokenizes every post (title appended per `options`) and counts terms.
/// Posts with no tokens keep an empty vector and still count towards the
/// document total.
pub fn build_dictionary(corpus: &Corpus, options: &PrepOptions) -> Vocabulary {
    let tokens: Vec<Vec<String>> = corpus
        .posts()
        .par_iter()
        .map(|p| {
            let title = corpus.thread(&p.thread_id).map_or("", |t| t.title.as_str());
            preprocess(&p.body, title, options)
        })
        .collect();
    let docs: Vec<(&str, &[String])> = corpus
        .posts()
        .iter()
        .zip(&tokens)
        .map(|(p, t)| (p.post_id.as_str(), t.as_slice()))
        .collect();
    let (dictionary, posts) = count_documents(&docs);

    let threads = corpus
        .threads()
        .iter()
        .map(|t| {
            let mut sum: BTreeMap<u32, u32> = BTreeMap::new();
            for pid in &t.post_ids {
                let i = corpus.post_position(pid).expect("thread member exists");
                for &(term, c) in &posts[i].counts {
                    *sum.entry(term).or_default() += c;
                }
            }
            ThreadVector {
                thread_id: t.thread_id.clone(),
                counts: sum.into_iter().collect(),
            }
        })
        .collect();

    Vocabulary {
        dictionary,
        posts,
        threads,
    }
}

/// Dictionary and term vectors for arbitrary `(id, tokens)` documents.
pub fn count_documents(docs: &[(&str, &[String])]) -> (Dictionary, Vec<TermVector>) {
    let terms: Vec<String> = docs
        .iter()
        .flat_map(|(_, toks)| toks.iter())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .cloned()
        .collect();
    let dictionary_index = |t: &str| {
        terms
            .binary_search_by(|x| x.as_str().cmp(t))
            .expect("term collected") as u32
    };
    let mut df = vec![0u32; terms.len()];
    let vectors: Vec<TermVector> = docs
        .iter()
        .map(|(id, toks)| {
            let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
            for t in toks.iter() {
                *counts.entry(dictionary_index(t)).or_default() += 1;
            }
            for &term in counts.keys() {
                df[term as usize] += 1;
            }
            TermVector {
                doc_id: id.to_string(),
                counts: counts.into_iter().collect(),
            }
        })
        .collect();
    let dictionary = Dictionary {
        terms,
        df,
        n_documents: docs.len() as u32,
    };
    (dictionary, vectors)
}

/// Debug dump: `post_id<TAB>space-joined tokens`, one line per post.
pub fn write_token_dump<W: Write>(corpus: &Corpus, options: &PrepOptions, mut w: W) -> Result<()> {
    for p in corpus.posts() {
        let title = corpus.thread(&p.thread_id).map_or("", |t| t.title.as_str());
        writeln!(w, "{}\t{}", p.post_id, preprocess(&p.body, title, options).join(" "))?;
    }
    Ok(())
}
