use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::corpus::{load_annotated_corpus, AnnotatedSentence};
use crate::inventory::{normalize_lemma, Pos};

use super::WicError;

/// One row of a WiC data file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WicRow {
    pub lemma: String,
    pub pos: Pos,
    pub index1: usize,
    pub index2: usize,
    pub text1: String,
    pub text2: String,
}

/// A sentence pair with contextual vectors attached. The instance lemma is
/// authoritative for both targets.
#[derive(Debug, Clone, PartialEq)]
pub struct WicInstance {
    /// Zero-based row index in the data file.
    pub instance_id: String,
    pub lemma: String,
    pub pos: Pos,
    pub index1: usize,
    pub index2: usize,
    pub sentence1: AnnotatedSentence,
    pub sentence2: AnnotatedSentence,
    pub gold: Option<bool>,
}

impl WicInstance {
    pub fn target1(&self) -> &[f32] {
        self.sentence1.tokens[self.index1].vector.as_slice()
    }

    pub fn target2(&self) -> &[f32] {
        self.sentence2.tokens[self.index2].vector.as_slice()
    }

    /// The same instance with the two sentences swapped.
    pub fn swapped(&self) -> WicInstance {
        WicInstance {
            index1: self.index2,
            index2: self.index1,
            sentence1: self.sentence2.clone(),
            sentence2: self.sentence1.clone(),
            ..self.clone()
        }
    }
}

/// Parses `target<TAB>pos<TAB>idx1-idx2<TAB>sentence1<TAB>sentence2`.
pub fn parse_wic_rows<R: BufRead>(reader: R) -> Result<Vec<WicRow>, WicError> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || WicError::MalformedRow(line_no);
        let fields: Vec<&str> = line.split('\t').collect();
        let [lemma, pos, idx, text1, text2] = fields.as_slice() else {
            return Err(bad());
        };
        let pos: Pos = pos.trim().parse().map_err(|_| bad())?;
        let (a, b) = idx.trim().split_once('-').ok_or_else(bad)?;
        let index1 = a.parse().map_err(|_| bad())?;
        let index2 = b.parse().map_err(|_| bad())?;
        let lemma = normalize_lemma(lemma);
        if lemma.is_empty() {
            return Err(bad());
        }
        rows.push(WicRow {
            lemma,
            pos,
            index1,
            index2,
            text1: text1.to_string(),
            text2: text2.to_string(),
        });
    }
    Ok(rows)
}

/// Parses a gold file, one `T` or `F` per line.
pub fn parse_gold<R: BufRead>(reader: R) -> Result<Vec<bool>, WicError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        match line.trim() {
            "T" => out.push(true),
            "F" => out.push(false),
            "" => continue,
            _ => return Err(WicError::MalformedGold(i + 1)),
        }
    }
    Ok(out)
}

/// Joins a WiC data file with optional gold labels and the provider's
/// embeddings, keyed `<instance_id>.s1` / `<instance_id>.s2`.
pub fn load_wic_dataset<D, G, E>(
    data: D,
    gold: Option<G>,
    embeddings: E,
) -> Result<Vec<WicInstance>, WicError>
where
    D: BufRead,
    G: BufRead,
    E: BufRead,
{
    let rows = parse_wic_rows(data)?;
    let gold = gold.map(parse_gold).transpose()?;
    if let Some(g) = &gold {
        if g.len() != rows.len() {
            return Err(WicError::GoldCountMismatch {
                rows: rows.len(),
                gold: g.len(),
            });
        }
    }
    let mut sentences: HashMap<String, AnnotatedSentence> = HashMap::new();
    for s in load_annotated_corpus(embeddings) {
        let s = s?;
        sentences.insert(s.sentence_id.clone(), s);
    }

    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        let id = i.to_string();
        let mut take = |suffix: &str, text: &str, index: usize| {
            let key = format!("{id}.{suffix}");
            let s = sentences
                .remove(&key)
                .ok_or_else(|| WicError::MissingEmbedding(key.clone()))?;
            let expected = text.split_whitespace().count();
            if s.tokens.len() != expected {
                return Err(WicError::TokenCountMismatch {
                    key,
                    expected,
                    found: s.tokens.len(),
                });
            }
            if index >= s.tokens.len() {
                return Err(WicError::IndexOutOfRange(id.clone()));
            }
            Ok(s)
        };
        let sentence1 = take("s1", &row.text1, row.index1)?;
        let sentence2 = take("s2", &row.text2, row.index2)?;
        out.push(WicInstance {
            instance_id: id,
            lemma: row.lemma,
            pos: row.pos,
            index1: row.index1,
            index2: row.index2,
            sentence1,
            sentence2,
            gold: gold.as_ref().map(|g| g[i]),
        });
    }
    Ok(out)
}

/// Writes `instance_id<TAB>prob<TAB>T|F` lines.
pub fn write_predictions<W: Write>(
    mut writer: W,
    rows: &[(String, f64, bool)],
) -> std::io::Result<()> {
    for (id, prob, label) in rows {
        writeln!(writer, "{id}\t{prob}\t{}", if *label { "T" } else { "F" })?;
    }
    writer.flush()
}

pub fn read_predictions<R: BufRead>(reader: R) -> Result<Vec<(String, f64, bool)>, WicError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || WicError::MalformedPrediction(i + 1);
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, prob, label] = fields.as_slice() else {
            return Err(bad());
        };
        let prob: f64 = prob.parse().map_err(|_| bad())?;
        if !(0.0..=1.0).contains(&prob) {
            return Err(bad());
        }
        let label = match *label {
            "T" => true,
            "F" => false,
            _ => return Err(bad()),
        };
        out.push((id.to_string(), prob, label));
    }
    Ok(out)
}
