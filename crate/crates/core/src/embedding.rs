//! Word embeddings: vocabulary, dense row-major matrix, vector math and
//! word2vec text I/O.
//!
//! Floats are written with Rust's shortest round-trip representation, so
//! `load(save(e)) == e` holds exactly.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Duplicate(w.clone()));
            }
        }
        Ok(Self { words, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    vocab: Vocabulary,
    dim: usize,
    data: Vec<f64>,
}

impl Embedding {
    pub fn new(vocab: Vocabulary, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        if data.len() != vocab.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: vocab.len() * dim,
                actual: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite component in row '{}'",
                vocab.word(pos / dim)
            )));
        }
        Ok(Self { vocab, dim, data })
    }

    /// Builds an embedding from `(word, vector)` rows.
    pub fn from_rows<S: Into<String>>(rows: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let dim = rows.first().map(|(_, v)| v.len()).unwrap_or(1);
        let mut words = Vec::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (w, v) in rows {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.len(),
                });
            }
            words.push(w.into());
            data.extend(v);
        }
        Self::new(Vocabulary::new(words)?, dim, data)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.vocab.get(word).map(|i| self.row(i))
    }

    /// Looks a word up as given, falling back to its lowercase form.
    pub fn resolve(&self, word: &str) -> Option<usize> {
        self.vocab
            .get(word)
            .or_else(|| self.vocab.get(&word.to_lowercase()))
    }

    pub fn try_vector(&self, word: &str) -> Result<&[f64]> {
        self.vector(word)
            .ok_or_else(|| Error::UnknownWord(word.to_string()))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Copy with every nonzero row scaled to unit length.
    pub fn normalized(&self) -> Embedding {
        let mut out = self.clone();
        out.normalize_in_place();
        out
    }

    pub fn normalize_in_place(&mut self) {
        let dim = self.dim;
        par::for_each_chunk_mut(&mut self.data, dim, |_, row| {
            let n = norm(row);
            if n > 0.0 {
                row.iter_mut().for_each(|x| *x /= n);
            }
        });
    }

    /// Restricts the embedding to the given words, in the given order.
    pub fn subset(&self, words: &[String]) -> Result<Embedding> {
        let mut data = Vec::with_capacity(words.len() * self.dim);
        for w in words {
            data.extend_from_slice(self.try_vector(w)?);
        }
        Embedding::new(Vocabulary::new(words.to_vec())?, self.dim, data)
    }

    pub fn read_word2vec<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing header"))??;
        let mut parts = header.split_whitespace();
        let (count, dim) = match (parts.next(), parts.next(), parts.next()) {
            (Some(c), Some(d), None) => (
                c.parse::<usize>()
                    .map_err(|_| Error::parse(1, format!("bad word count '{c}'")))?,
                d.parse::<usize>()
                    .map_err(|_| Error::parse(1, format!("bad dimension '{d}'")))?,
            ),
            _ => return Err(Error::parse(1, "header must be '<count> <dim>'")),
        };
        if dim == 0 {
            return Err(Error::parse(1, "dimension must be positive"));
        }
        let mut words = Vec::with_capacity(count);
        let mut seen = HashSet::with_capacity(count);
        let mut data = Vec::with_capacity(count * dim);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if words.len() == count {
                return Err(Error::parse(line_no, "more rows than declared in header"));
            }
            let mut fields = line.split(' ').filter(|f| !f.is_empty());
            let word = fields.next().expect("non-empty line has a field");
            let before = data.len();
            for f in fields {
                let x: f64 = f
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad float '{f}'")))?;
                if !x.is_finite() {
                    return Err(Error::parse(line_no, "non-finite component"));
                }
                data.push(x);
            }
            if data.len() - before != dim {
                return Err(Error::parse(
                    line_no,
                    format!("expected {dim} components, found {}", data.len() - before),
                ));
            }
            if !seen.insert(word.to_string()) {
                return Err(Error::parse(line_no, format!("duplicate word '{word}'")));
            }
            words.push(word.to_string());
        }
        if words.len() != count {
            return Err(Error::parse(
                count + 1,
                format!("header declares {count} rows, found {}", words.len()),
            ));
        }
        Embedding::new(Vocabulary::new(words)?, dim, data)
    }

    pub fn write_word2vec<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for i in 0..self.len() {
            w.write_all(self.vocab.word(i).as_bytes())?;
            for x in self.row(i) {
                write!(w, " {x}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_word2vec_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_word2vec(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("words are UTF-8")
    }

    /// Top-`k` words by cosine similarity to `query`, excluding the query
    /// itself and `exclude`. Ties go to the earlier vocabulary index.
    pub fn nearest_neighbors(
        &self,
        query: &str,
        k: usize,
        exclude: &HashSet<String>,
    ) -> Result<NeighborList> {
        let qi = self
            .vocab
            .get(query)
            .ok_or_else(|| Error::UnknownWord(query.to_string()))?;
        let mut excluded: HashSet<usize> = exclude.iter().filter_map(|w| self.vocab.get(w)).collect();
        excluded.insert(qi);
        let entries = self.rank_by_cosine(self.row(qi), k, &excluded)?;
        Ok(NeighborList {
            query: query.to_string(),
            entries,
        })
    }

    /// Top-`k` words by cosine with a raw direction vector.
    pub fn nearest_to_vector(
        &self,
        v: &[f64],
        k: usize,
        exclude: &HashSet<usize>,
    ) -> Result<Vec<(String, f64)>> {
        self.rank_by_cosine(v, k, exclude)
    }

    fn rank_by_cosine(
        &self,
        v: &[f64],
        k: usize,
        exclude: &HashSet<usize>,
    ) -> Result<Vec<(String, f64)>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        let vn = norm(v);
        if vn == 0.0 {
            return Err(Error::invalid("zero-norm query vector"));
        }
        let scores = par::map_range(self.len(), |i| {
            if exclude.contains(&i) {
                return None;
            }
            let r = self.row(i);
            let rn = norm(r);
            (rn > 0.0).then(|| (dot(r, v) / (rn * vn)).clamp(-1.0, 1.0))
        });
        let mut ranked: Vec<(usize, f64)> = scores
            .into_iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (i, s)))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.truncate(k);
        Ok(ranked
            .into_iter()
            .map(|(i, s)| (self.vocab.word(i).to_string(), s))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub query: String,
    pub entries: Vec<(String, f64)>,
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::invalid("cosine of a zero-norm vector"));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}
