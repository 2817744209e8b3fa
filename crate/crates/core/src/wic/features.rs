use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::inventory::SenseKey;
use crate::vectorspace::cosine;
use crate::wsd::{SenseIndex, Space};

use super::{WicError, WicInstance};

/// Pairing of contextual and sense vectors for sim3 and sim4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sim34Variant {
    /// sim3 = cos(c1, s1), sim4 = cos(c2, s2).
    #[default]
    Within,
    /// sim3 = cos(c1, s2), sim4 = cos(c2, s1).
    Cross,
}

/// Space in which sim2 compares the two chosen sense vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sim2Space {
    /// Whatever space the index lives in.
    #[default]
    Native,
    /// The contextual half only, when the index is concatenated.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeatureConfig {
    #[serde(default)]
    pub sim34: Sim34Variant,
    #[serde(default)]
    pub sim2_space: Sim2Space,
}

/// sim1..sim4 for one instance, plus the senses chosen for each target.
/// A similarity is absent when the sense it needs has no vector, which
/// happens only after a first-sense fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityFeatures {
    pub sims: [Option<f64>; 4],
    pub sense1: SenseKey,
    pub sense2: SenseKey,
}

impl SimilarityFeatures {
    pub fn sim(&self, n: usize) -> Option<f64> {
        self.sims.get(n.wrapping_sub(1)).copied().flatten()
    }
}

pub fn compute_similarities(
    inst: &WicInstance,
    idx: &SenseIndex<'_>,
    config: &FeatureConfig,
) -> Result<SimilarityFeatures, WicError> {
    let c1 = inst.target1();
    let c2 = inst.target2();
    let d1 = idx.disambiguate(c1, &inst.lemma, Some(inst.pos))?;
    let d2 = idx.disambiguate(c2, &inst.lemma, Some(inst.pos))?;
    let v1 = idx.vector(&d1.chosen).map(|v| v.as_slice());
    let v2 = idx.vector(&d2.chosen).map(|v| v.as_slice());

    let sim1 = cosine(c1, c2)?;
    let sim2 = match (v1, v2) {
        (Some(a), Some(b)) => Some(match (config.sim2_space, idx.space()) {
            (Sim2Space::Plain, Space::Concat) => {
                let h = a.len() / 2;
                cosine(&a[..h], &b[..h])?
            }
            _ => cosine(a, b)?,
        }),
        _ => None,
    };
    let a1 = idx.align(c1)?;
    let a2 = idx.align(c2)?;
    let (t3, t4) = match config.sim34 {
        Sim34Variant::Within => (v1, v2),
        Sim34Variant::Cross => (v2, v1),
    };
    let sim3 = t3.map(|v| cosine(&a1, v)).transpose()?;
    let sim4 = t4.map(|v| cosine(&a2, v)).transpose()?;

    Ok(SimilarityFeatures {
        sims: [Some(sim1), sim2, sim3, sim4],
        sense1: d1.chosen,
        sense2: d2.chosen,
    })
}

/// The sense-comparison classifier: same meaning iff both targets got the
/// same sense.
pub fn classify_by_sense_match(features: &SimilarityFeatures) -> bool {
    features.sense1 == features.sense2
}

/// One line of a features file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub instance_id: String,
    pub sense1: SenseKey,
    pub sense2: SenseKey,
    pub sim1: Option<f64>,
    pub sim2: Option<f64>,
    pub sim3: Option<f64>,
    pub sim4: Option<f64>,
    #[serde(default)]
    pub gold: Option<bool>,
}

impl FeatureRecord {
    pub fn new(instance_id: String, f: &SimilarityFeatures, gold: Option<bool>) -> FeatureRecord {
        FeatureRecord {
            instance_id,
            sense1: f.sense1.clone(),
            sense2: f.sense2.clone(),
            sim1: f.sims[0],
            sim2: f.sims[1],
            sim3: f.sims[2],
            sim4: f.sims[3],
            gold,
        }
    }

    pub fn features(&self) -> SimilarityFeatures {
        SimilarityFeatures {
            sims: [self.sim1, self.sim2, self.sim3, self.sim4],
            sense1: self.sense1.clone(),
            sense2: self.sense2.clone(),
        }
    }
}

pub fn write_features<W: Write>(mut writer: W, records: &[FeatureRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn read_features<R: BufRead>(reader: R) -> Result<Vec<FeatureRecord>, WicError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: FeatureRecord =
            serde_json::from_str(&line).map_err(|_| WicError::MalformedFeatures(i + 1))?;
        if [r.sim1, r.sim2, r.sim3, r.sim4]
            .iter()
            .flatten()
            .any(|s| !s.is_finite())
        {
            return Err(WicError::MalformedFeatures(i + 1));
        }
        out.push(r);
    }
    Ok(out)
}
