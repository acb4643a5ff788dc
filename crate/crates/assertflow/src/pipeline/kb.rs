//! Local knowledge base with BM25 passage retrieval.
//!
//! Documents are split into passages of at most [`PASSAGE_WORDS`] words.
//! Queries and passages are tokenized by lowercasing and splitting on
//! whitespace. Scoring uses BM25 with `k1 = 1.2`, `b = 0.75`; score ties
//! are broken by `(doc_id, passage index)` so retrieval order is total.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const PASSAGE_WORDS: usize = 200;
const K1: f64 = 1.2;
const B: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passage {
    pub doc_id: String,
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Default)]
pub struct KnowledgeBase {
    passages: Vec<Passage>,
    /// Token frequency per passage, parallel to `passages`.
    term_freqs: Vec<HashMap<String, u32>>,
    doc_freq: HashMap<String, u32>,
    avg_len: f64,
}

impl KnowledgeBase {
    /// Load every `*.txt` file under `dir` as one document (doc_id = file
    /// stem), in lexicographic order.
    pub fn load(dir: &Path) -> io::Result<KnowledgeBase> {
        let mut files: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "txt"))
            .collect();
        files.sort();
        let mut docs = Vec::new();
        for path in files {
            let doc_id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            docs.push((doc_id, fs::read_to_string(&path)?));
        }
        Ok(KnowledgeBase::from_documents(docs))
    }

    pub fn from_documents(docs: Vec<(String, String)>) -> KnowledgeBase {
        let mut kb = KnowledgeBase::default();
        for (doc_id, text) in docs {
            let words: Vec<&str> = text.split_whitespace().collect();
            for (index, chunk) in words.chunks(PASSAGE_WORDS).enumerate() {
                let passage_text = chunk.join(" ");
                let tf = term_frequencies(&passage_text);
                for term in tf.keys() {
                    *kb.doc_freq.entry(term.clone()).or_default() += 1;
                }
                kb.term_freqs.push(tf);
                kb.passages.push(Passage {
                    doc_id: doc_id.clone(),
                    index,
                    text: passage_text,
                });
            }
        }
        let total: usize = kb.term_freqs.iter().map(|tf| tf.values().sum::<u32>() as usize).sum();
        kb.avg_len = if kb.passages.is_empty() {
            0.0
        } else {
            total as f64 / kb.passages.len() as f64
        };
        kb
    }

    pub fn len(&self) -> usize {
        self.passages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.passages.is_empty()
    }

    /// Top `top_k` passages by BM25 score; zero-scoring passages are never
    /// returned.
    pub fn retrieve(&self, query: &str, top_k: usize) -> Vec<&Passage> {
        let n = self.passages.len() as f64;
        let query_terms: Vec<String> = tokenize(query);
        let mut scored: Vec<(f64, usize)> = Vec::new();
        for (idx, tf) in self.term_freqs.iter().enumerate() {
            let len: u32 = tf.values().sum();
            let mut score = 0.0;
            for term in &query_terms {
                let Some(&f) = tf.get(term) else { continue };
                let df = f64::from(self.doc_freq[term]);
                let idf = ((n - df + 0.5) / (df + 0.5) + 1.0).ln();
                let f = f64::from(f);
                let norm = f64::from(len) / self.avg_len;
                score += idf * (f * (K1 + 1.0)) / (f + K1 * (1.0 - B + B * norm));
            }
            if score > 0.0 {
                scored.push((score, idx));
            }
        }
        scored.sort_by(|(sa, ia), (sb, ib)| {
            sb.partial_cmp(sa).unwrap_or(std::cmp::Ordering::Equal).then_with(|| {
                let a = &self.passages[*ia];
                let b = &self.passages[*ib];
                (&a.doc_id, a.index).cmp(&(&b.doc_id, b.index))
            })
        });
        scored
            .into_iter()
            .take(top_k)
            .map(|(_, idx)| &self.passages[idx])
            .collect()
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(|w| w.to_lowercase()).collect()
}

fn term_frequencies(text: &str) -> HashMap<String, u32> {
    let mut tf = HashMap::new();
    for token in tokenize(text) {
        *tf.entry(token).or_default() += 1;
    }
    tf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kb() -> KnowledgeBase {
        KnowledgeBase::from_documents(vec![
            (
                "implication".into(),
                "overlapping implication |-> evaluates the consequent in the same cycle \
                 while |=> moves one cycle later"
                    .into(),
            ),
            (
                "stability".into(),
                "$stable checks that a signal kept its sampled value across one clock".into(),
            ),
            (
                "width".into(),
                "$bits returns the declared bit width of a signal expression".into(),
            ),
        ])
    }

    #[test]
    fn retrieves_relevant_passage_first() {
        let kb = kb();
        let hits = kb.retrieve("bit width $bits", 2);
        assert_eq!(hits[0].doc_id, "width");
    }

    #[test]
    fn zero_score_passages_are_dropped() {
        let kb = kb();
        let hits = kb.retrieve("zzz_not_present", 4);
        assert!(hits.is_empty());
    }

    #[test]
    fn passages_split_at_word_limit() {
        let long = (0..450).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let kb = KnowledgeBase::from_documents(vec![("long".into(), long)]);
        assert_eq!(kb.len(), 3);
        let hits = kb.retrieve("w401", 1);
        assert_eq!(hits[0].index, 2);
    }

    #[test]
    fn tie_break_is_by_doc_and_index() {
        let kb = KnowledgeBase::from_documents(vec![
            ("b".into(), "token token filler".into()),
            ("a".into(), "token token filler".into()),
        ]);
        let hits = kb.retrieve("token", 2);
        assert_eq!(hits[0].doc_id, "a");
        assert_eq!(hits[1].doc_id, "b");
    }
}
