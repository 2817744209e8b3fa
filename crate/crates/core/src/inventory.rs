//! WordNet 3.0 database reader.
//!
//! Reads `index.sense` and the four `data.*` files into an immutable
//! [`SenseInventory`]: synsets with their lemmas, lexicographer file,
//! hypernym pointers and gloss, plus the sense-key cross-links used for
//! candidate lookup.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The 45 lexicographer file names, indexed by `lex_filenum`.
pub const LEXNAMES: [&str; 45] = [
    "adj.all",
    "adj.pert",
    "adv.all",
    "noun.Tops",
    "noun.act",
    "noun.animal",
    "noun.artifact",
    "noun.attribute",
    "noun.body",
    "noun.cognition",
    "noun.communication",
    "noun.event",
    "noun.feeling",
    "noun.food",
    "noun.group",
    "noun.location",
    "noun.motive",
    "noun.object",
    "noun.person",
    "noun.phenomenon",
    "noun.plant",
    "noun.possession",
    "noun.process",
    "noun.quantity",
    "noun.relation",
    "noun.shape",
    "noun.state",
    "noun.substance",
    "noun.time",
    "verb.body",
    "verb.change",
    "verb.cognition",
    "verb.communication",
    "verb.competition",
    "verb.consumption",
    "verb.contact",
    "verb.creation",
    "verb.emotion",
    "verb.motion",
    "verb.perception",
    "verb.possession",
    "verb.social",
    "verb.stative",
    "verb.weather",
    "adj.ppl",
];

#[derive(Debug, Error)]
pub enum InventoryError {
    #[error("line {0}: expected 4 whitespace-separated fields")]
    MalformedLine(usize),
    #[error("line {line}: bad sense key {key:?}")]
    BadSenseKey { line: usize, key: String },
    #[error("duplicate sense key {0}")]
    DuplicateSenseKey(String),
    #[error("line {line}: malformed data record at offset {offset:?}")]
    MalformedRecord { line: usize, offset: String },
    #[error("unknown lexicographer file number {0}")]
    UnknownLexFilenum(u32),
    #[error("missing WordNet file {0}")]
    MissingFile(String),
    #[error("sense {key} points at absent synset {synset}")]
    DanglingSense { key: String, synset: SynsetId },
    #[error("sense {key} has a lemma not listed in synset {synset}")]
    SenseLemmaMismatch { key: String, synset: SynsetId },
    #[error("synset {from} has a hypernym pointer to absent synset {to}")]
    DanglingPointer { from: SynsetId, to: SynsetId },
    #[error("synset {0} defined twice")]
    DuplicateSynset(SynsetId),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Part of speech as encoded by WordNet's `ss_type`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pos {
    #[serde(rename = "n")]
    Noun,
    #[serde(rename = "v")]
    Verb,
    #[serde(rename = "a")]
    Adj,
    #[serde(rename = "r")]
    Adv,
    #[serde(rename = "s")]
    AdjSat,
}

impl Pos {
    /// Lookup order used wherever a POS-agnostic choice has to be made.
    pub const LOOKUP_ORDER: [Pos; 4] = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv];

    pub fn from_char(c: char) -> Option<Pos> {
        match c {
            'n' => Some(Pos::Noun),
            'v' => Some(Pos::Verb),
            'a' => Some(Pos::Adj),
            'r' => Some(Pos::Adv),
            's' => Some(Pos::AdjSat),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pos::Noun => 'n',
            Pos::Verb => 'v',
            Pos::Adj => 'a',
            Pos::Adv => 'r',
            Pos::AdjSat => 's',
        }
    }

    /// Decodes the `ss_type` digit of a sense key (1..=5).
    pub fn from_ss_type_digit(d: u8) -> Option<Pos> {
        match d {
            1 => Some(Pos::Noun),
            2 => Some(Pos::Verb),
            3 => Some(Pos::Adj),
            4 => Some(Pos::Adv),
            5 => Some(Pos::AdjSat),
            _ => None,
        }
    }

    pub fn ss_type_digit(self) -> u8 {
        match self {
            Pos::Noun => 1,
            Pos::Verb => 2,
            Pos::Adj => 3,
            Pos::Adv => 4,
            Pos::AdjSat => 5,
        }
    }

    /// Satellites are looked up as plain adjectives.
    pub fn lookup(self) -> Pos {
        match self {
            Pos::AdjSat => Pos::Adj,
            p => p,
        }
    }

    pub fn data_file_name(self) -> &'static str {
        match self {
            Pos::Noun => "data.noun",
            Pos::Verb => "data.verb",
            Pos::Adj | Pos::AdjSat => "data.adj",
            Pos::Adv => "data.adv",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                Pos::from_char(c.to_ascii_lowercase()).ok_or_else(|| format!("unknown POS {s:?}"))
            }
            _ => Err(format!("unknown POS {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed sense key {0:?}")]
pub struct ParseSenseKeyError(pub String);

/// A WordNet sense key, `lemma%ss_type:lex_filenum:lex_id:head_word:head_id`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SenseKey(String);

impl SenseKey {
    pub fn parse(raw: &str) -> Result<SenseKey, ParseSenseKeyError> {
        let bad = || ParseSenseKeyError(raw.to_string());
        let (lemma, rest) = raw.split_once('%').ok_or_else(bad)?;
        if lemma.is_empty()
            || rest.contains('%')
            || lemma.chars().any(|c| c.is_whitespace() || c.is_uppercase())
            || rest.chars().any(char::is_whitespace)
        {
            return Err(bad());
        }
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 5 {
            return Err(bad());
        }
        let ss_type = parts[0];
        if ss_type.len() != 1
            || ss_type
                .parse::<u8>()
                .ok()
                .and_then(Pos::from_ss_type_digit)
                .is_none()
        {
            return Err(bad());
        }
        for field in &parts[1..3] {
            if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
        }
        Ok(SenseKey(raw.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn lemma(&self) -> &str {
        self.0.split_once('%').map(|(l, _)| l).unwrap_or_default()
    }

    fn lex_sense(&self) -> &str {
        self.0.split_once('%').map(|(_, r)| r).unwrap_or_default()
    }

    /// POS decoded from the `ss_type` digit.
    pub fn pos(&self) -> Pos {
        let d = self.lex_sense().as_bytes()[0] - b'0';
        Pos::from_ss_type_digit(d).expect("validated at construction")
    }

    pub fn lex_filenum(&self) -> u32 {
        self.lex_sense()
            .split(':')
            .nth(1)
            .and_then(|s| s.parse().ok())
            .expect("validated at construction")
    }
}

impl fmt::Display for SenseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for SenseKey {
    type Err = ParseSenseKeyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SenseKey::parse(s)
    }
}

impl TryFrom<String> for SenseKey {
    type Error = ParseSenseKeyError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        SenseKey::parse(&value)
    }
}

impl From<SenseKey> for String {
    fn from(k: SenseKey) -> String {
        k.0
    }
}

impl AsRef<str> for SenseKey {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SynsetId {
    pub pos: Pos,
    pub offset: u32,
}

impl SynsetId {
    pub fn new(pos: Pos, offset: u32) -> Self {
        SynsetId { pos, offset }
    }

    /// The same offset under the other adjective tag (`a` <-> `s`).
    fn adjective_twin(self) -> Option<SynsetId> {
        match self.pos {
            Pos::Adj => Some(SynsetId::new(Pos::AdjSat, self.offset)),
            Pos::AdjSat => Some(SynsetId::new(Pos::Adj, self.offset)),
            _ => None,
        }
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08}-{}", self.offset, self.pos)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synset {
    pub id: SynsetId,
    /// Surface lemmas in file order, case preserved, markers like `(a)` stripped.
    pub lemmas: Vec<String>,
    pub lex_filenum: u8,
    pub hypernyms: Vec<SynsetId>,
    pub gloss: String,
}

impl Synset {
    pub fn lexname(&self) -> &'static str {
        LEXNAMES[self.lex_filenum as usize]
    }
}

/// One `index.sense` record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SenseEntry {
    pub synset: SynsetId,
    pub sense_number: u32,
    pub tag_count: u32,
}

/// Parses `index.sense`: `sense_key synset_offset sense_number tag_cnt`.
pub fn parse_index_sense<R: BufRead>(
    reader: R,
) -> Result<BTreeMap<SenseKey, SenseEntry>, InventoryError> {
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(InventoryError::MalformedLine(line_no));
        }
        let key = SenseKey::parse(fields[0]).map_err(|_| InventoryError::BadSenseKey {
            line: line_no,
            key: fields[0].to_string(),
        })?;
        let (offset, sense_number, tag_count) = match (
            fields[1].parse::<u32>(),
            fields[2].parse::<u32>(),
            fields[3].parse::<u32>(),
        ) {
            (Ok(o), Ok(n), Ok(t)) => (o, n, t),
            _ => return Err(InventoryError::MalformedLine(line_no)),
        };
        let entry = SenseEntry {
            synset: SynsetId::new(key.pos(), offset),
            sense_number,
            tag_count,
        };
        if out.contains_key(&key) {
            return Err(InventoryError::DuplicateSenseKey(key.0));
        }
        out.insert(key, entry);
    }
    Ok(out)
}

fn strip_syntactic_marker(word: &str) -> &str {
    match word.find('(') {
        Some(i) if word.ends_with(')') => &word[..i],
        _ => word,
    }
}

/// Parses one `data.{noun,verb,adj,adv}` file. `pos` names the file; records
/// in `data.adj` may carry either `a` or `s`.
pub fn parse_data_file<R: BufRead>(reader: R, pos: Pos) -> Result<Vec<Synset>, InventoryError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.starts_with("  ") || line.trim().is_empty() {
            continue;
        }
        out.push(parse_data_record(&line, line_no, pos)?);
    }
    Ok(out)
}

fn parse_data_record(line: &str, line_no: usize, file_pos: Pos) -> Result<Synset, InventoryError> {
    let offset_text = line.split_whitespace().next().unwrap_or_default().to_string();
    let malformed = || InventoryError::MalformedRecord {
        line: line_no,
        offset: offset_text.clone(),
    };
    let (head, gloss) = line.split_once('|').ok_or_else(malformed)?;
    let mut fields = head.split_whitespace();
    let mut next = || fields.next().ok_or_else(malformed);

    let offset: u32 = next()?.parse().map_err(|_| malformed())?;
    let lex_filenum: u32 = next()?.parse().map_err(|_| malformed())?;
    if lex_filenum as usize >= LEXNAMES.len() {
        return Err(InventoryError::UnknownLexFilenum(lex_filenum));
    }
    let ss_type = next()?;
    let pos = match ss_type.chars().next().and_then(Pos::from_char) {
        Some(p) if ss_type.len() == 1 && p.data_file_name() == file_pos.data_file_name() => p,
        _ => return Err(malformed()),
    };
    let w_cnt = u32::from_str_radix(next()?, 16).map_err(|_| malformed())?;
    if w_cnt == 0 {
        return Err(malformed());
    }
    let mut lemmas = Vec::with_capacity(w_cnt as usize);
    for _ in 0..w_cnt {
        let word = next()?;
        u8::from_str_radix(next()?, 16).map_err(|_| malformed())?;
        lemmas.push(strip_syntactic_marker(word).to_string());
    }
    let p_cnt: u32 = next()?.parse().map_err(|_| malformed())?;
    let mut hypernyms = Vec::new();
    for _ in 0..p_cnt {
        let symbol = next()?;
        let target: u32 = next()?.parse().map_err(|_| malformed())?;
        let target_pos = next()?;
        let source_target = next()?;
        if source_target.len() != 4 || u16::from_str_radix(source_target, 16).is_err() {
            return Err(malformed());
        }
        let target_pos = match target_pos.chars().next().and_then(Pos::from_char) {
            Some(p) if target_pos.len() == 1 => p,
            _ => return Err(malformed()),
        };
        if symbol == "@" || symbol == "@i" {
            hypernyms.push(SynsetId::new(target_pos, target));
        }
    }
    // anything left before `|` is the verb frame list

    Ok(Synset {
        id: SynsetId::new(pos, offset),
        lemmas,
        lex_filenum: lex_filenum as u8,
        hypernyms,
        gloss: gloss.trim().to_string(),
    })
}

/// Lowercases and replaces spaces with underscores, the sense-key lemma form.
pub fn normalize_lemma(lemma: &str) -> String {
    lemma
        .split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
        .to_lowercase()
}

/// Immutable, cross-linked view of a WordNet database.
#[derive(Debug, Clone)]
pub struct SenseInventory {
    synsets: BTreeMap<SynsetId, Synset>,
    senses: BTreeMap<SenseKey, SenseEntry>,
    synset_senses: BTreeMap<SynsetId, Vec<SenseKey>>,
    hyponyms: BTreeMap<SynsetId, BTreeSet<SynsetId>>,
    lemma_pos_index: BTreeMap<(String, Pos), Vec<SenseKey>>,
    first_sense: BTreeMap<(String, Pos), SenseKey>,
}

impl SenseInventory {
    /// Cross-links parsed `index.sense` entries with parsed synsets.
    pub fn from_parts(
        senses: BTreeMap<SenseKey, SenseEntry>,
        synset_list: Vec<Synset>,
    ) -> Result<SenseInventory, InventoryError> {
        let mut synsets = BTreeMap::new();
        for s in synset_list {
            if synsets.contains_key(&s.id) {
                return Err(InventoryError::DuplicateSynset(s.id));
            }
            synsets.insert(s.id, s);
        }

        let resolve = |id: SynsetId, synsets: &BTreeMap<SynsetId, Synset>| {
            if synsets.contains_key(&id) {
                Some(id)
            } else {
                id.adjective_twin().filter(|t| synsets.contains_key(t))
            }
        };

        let ids: Vec<SynsetId> = synsets.keys().copied().collect();
        for id in ids {
            let targets = synsets[&id].hypernyms.clone();
            let mut resolved = Vec::with_capacity(targets.len());
            for to in targets {
                let r = resolve(to, &synsets)
                    .ok_or(InventoryError::DanglingPointer { from: id, to })?;
                resolved.push(r);
            }
            synsets.get_mut(&id).expect("present").hypernyms = resolved;
        }

        let mut hyponyms: BTreeMap<SynsetId, BTreeSet<SynsetId>> = BTreeMap::new();
        for s in synsets.values() {
            for h in &s.hypernyms {
                hyponyms.entry(*h).or_default().insert(s.id);
            }
        }

        let mut linked = BTreeMap::new();
        let mut synset_senses: BTreeMap<SynsetId, Vec<SenseKey>> = BTreeMap::new();
        let mut lemma_pos_index: BTreeMap<(String, Pos), Vec<SenseKey>> = BTreeMap::new();
        let mut first: BTreeMap<(String, Pos), (u32, SenseKey)> = BTreeMap::new();
        for (key, mut entry) in senses {
            let id = resolve(entry.synset, &synsets).ok_or_else(|| {
                InventoryError::DanglingSense {
                    key: key.to_string(),
                    synset: entry.synset,
                }
            })?;
            entry.synset = id;
            let synset = &synsets[&id];
            let lemma = key.lemma();
            if !synset.lemmas.iter().any(|l| l.to_lowercase() == lemma) {
                return Err(InventoryError::SenseLemmaMismatch {
                    key: key.to_string(),
                    synset: id,
                });
            }
            let slot = (lemma.to_string(), key.pos().lookup());
            synset_senses.entry(id).or_default().push(key.clone());
            lemma_pos_index
                .entry(slot.clone())
                .or_default()
                .push(key.clone());
            match first.get(&slot) {
                Some((n, _)) if *n <= entry.sense_number => {}
                _ => {
                    first.insert(slot, (entry.sense_number, key.clone()));
                }
            }
            linked.insert(key, entry);
        }
        // BTreeMap iteration already yields keys in ascending order, so the
        // per-lemma and per-synset lists are sorted.

        Ok(SenseInventory {
            synsets,
            senses: linked,
            synset_senses,
            hyponyms,
            lemma_pos_index,
            first_sense: first.into_iter().map(|(k, (_, key))| (k, key)).collect(),
        })
    }

    pub fn synset_count(&self) -> usize {
        self.synsets.len()
    }

    pub fn sense_count(&self) -> usize {
        self.senses.len()
    }

    pub fn synsets(&self) -> impl Iterator<Item = &Synset> {
        self.synsets.values()
    }

    pub fn synset(&self, id: SynsetId) -> Option<&Synset> {
        self.synsets.get(&id)
    }

    /// All sense keys in ascending order.
    pub fn sense_keys(&self) -> impl Iterator<Item = &SenseKey> {
        self.senses.keys()
    }

    pub fn sense_entry(&self, key: &SenseKey) -> Option<&SenseEntry> {
        self.senses.get(key)
    }

    pub fn contains_sense(&self, key: &SenseKey) -> bool {
        self.senses.contains_key(key)
    }

    pub fn synset_of(&self, key: &SenseKey) -> Option<&Synset> {
        self.senses.get(key).and_then(|e| self.synsets.get(&e.synset))
    }

    /// Sense keys belonging to a synset, ascending.
    pub fn senses_of_synset(&self, id: SynsetId) -> &[SenseKey] {
        self.synset_senses.get(&id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Direct hyponyms, i.e. synsets that list `id` as a hypernym.
    pub fn hyponyms(&self, id: SynsetId) -> impl Iterator<Item = SynsetId> + '_ {
        self.hyponyms.get(&id).into_iter().flatten().copied()
    }

    /// Synsets that are the target of at least one hypernym edge.
    pub fn hypernym_targets(&self) -> impl Iterator<Item = SynsetId> + '_ {
        self.hyponyms.keys().copied()
    }

    /// The `(lemma, lookup POS)` index in key order.
    pub fn lemma_pos_index(&self) -> impl Iterator<Item = (&str, Pos, &[SenseKey])> {
        self.lemma_pos_index
            .iter()
            .map(|((l, p), keys)| (l.as_str(), *p, keys.as_slice()))
    }

    /// Candidate senses for a normalized lemma, ascending by raw key. With no
    /// POS the union over all parts of speech is returned.
    pub fn senses_for_lemma(&self, lemma: &str, pos: Option<Pos>) -> Vec<&SenseKey> {
        match pos {
            Some(p) => self
                .lemma_pos_index
                .get(&(lemma.to_string(), p.lookup()))
                .map(|v| v.iter().collect())
                .unwrap_or_default(),
            None => {
                let mut all: Vec<&SenseKey> = Pos::LOOKUP_ORDER
                    .iter()
                    .filter_map(|p| self.lemma_pos_index.get(&(lemma.to_string(), *p)))
                    .flatten()
                    .collect();
                all.sort();
                all
            }
        }
    }

    pub fn knows_lemma(&self, lemma: &str) -> bool {
        Pos::LOOKUP_ORDER
            .iter()
            .any(|p| self.lemma_pos_index.contains_key(&(lemma.to_string(), *p)))
    }

    /// WordNet's first sense (lowest sense number) for the lemma. Without a
    /// POS the first part of speech in `n, v, a, r` order that has the lemma
    /// decides.
    pub fn first_sense(&self, lemma: &str, pos: Option<Pos>) -> Option<&SenseKey> {
        match pos {
            Some(p) => self.first_sense.get(&(lemma.to_string(), p.lookup())),
            None => Pos::LOOKUP_ORDER
                .iter()
                .find_map(|p| self.first_sense.get(&(lemma.to_string(), *p))),
        }
    }
}

fn open(dir: &Path, name: &str) -> Result<BufReader<File>, InventoryError> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(InventoryError::MissingFile(name.to_string()));
    }
    Ok(BufReader::new(File::open(path)?))
}

/// Builds an inventory from a WordNet 3.0 `dict/` directory.
pub fn build_inventory(wordnet_dir: &Path) -> Result<SenseInventory, InventoryError> {
    let index = open(wordnet_dir, "index.sense")?;
    let files = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv]
        .into_iter()
        .map(|p| open(wordnet_dir, p.data_file_name()).map(|r| (p, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let senses = parse_index_sense(index)?;
    let mut synsets = Vec::new();
    for (pos, reader) in files {
        synsets.extend(parse_data_file(reader, pos)?);
    }
    SenseInventory::from_parts(senses, synsets)
}
