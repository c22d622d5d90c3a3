use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PairedSample, StatsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1); 0 for a single score.
    pub sd: f64,
}

impl GroupStats {
    pub fn of(group: impl Into<String>, scores: &[u8]) -> Option<Self> {
        if scores.is_empty() {
            return None;
        }
        let n = scores.len();
        let mean = scores.iter().map(|&s| f64::from(s)).sum::<f64>() / n as f64;
        let sd = if n < 2 {
            0.0
        } else {
            (scores.iter().map(|&s| (f64::from(s) - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Some(GroupStats { group: group.into(), n, mean, sd })
    }

    /// `mean ± sd`, two decimals.
    pub fn formatted(&self) -> String {
        format!("{:.2} ± {:.2}", self.mean, self.sd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhonemeDelta {
    pub phoneme: String,
    pub pre: GroupStats,
    pub post: GroupStats,
    pub mean_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LikertSummary {
    pub pre: Option<GroupStats>,
    pub post: Option<GroupStats>,
    /// Sorted by phoneme.
    pub per_phoneme: Vec<PhonemeDelta>,
    pub warnings: Vec<String>,
}

/// Independent groups of single-question scores. Empty groups are dropped
/// with a warning.
pub fn summarize_scores(groups: &[(String, Vec<u8>)]) -> (Vec<GroupStats>, Vec<String>) {
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for (name, scores) in groups {
        match GroupStats::of(name.clone(), scores) {
            Some(g) => out.push(g),
            None => {
                log::warn!("likert group {name:?} is empty; omitted");
                warnings.push(format!("group {name:?} is empty; omitted"));
            }
        }
    }
    (out, warnings)
}

/// Overall pre/post summaries plus per-phoneme pre/post deltas.
pub fn summarize_likert(records: &[PairedSample]) -> Result<LikertSummary, StatsError> {
    for r in records {
        r.validate()?;
    }
    let mut warnings = Vec::new();
    if records.is_empty() {
        log::warn!("no ratings to summarize");
        warnings.push("no ratings to summarize".to_string());
    }
    let pre: Vec<u8> = records.iter().map(|r| r.pre).collect();
    let post: Vec<u8> = records.iter().map(|r| r.post).collect();
    let mut by_phoneme: BTreeMap<&str, Vec<&PairedSample>> = BTreeMap::new();
    for r in records {
        by_phoneme.entry(&r.phoneme).or_default().push(r);
    }
    let per_phoneme = by_phoneme
        .into_iter()
        .map(|(ph, rs)| {
            let pre: Vec<u8> = rs.iter().map(|r| r.pre).collect();
            let post: Vec<u8> = rs.iter().map(|r| r.post).collect();
            let pre = GroupStats::of("pre", &pre).expect("non-empty");
            let post = GroupStats::of("post", &post).expect("non-empty");
            PhonemeDelta { phoneme: ph.to_string(), mean_delta: post.mean - pre.mean, pre, post }
        })
        .collect();
    Ok(LikertSummary { pre: GroupStats::of("pre", &pre), post: GroupStats::of("post", &post), per_phoneme, warnings })
}

#[derive(Deserialize)]
struct SurveyRow {
    participant_id: String,
    phoneme: String,
    pre: i64,
    post: i64,
}

/// Reads a `participant_id,phoneme,pre,post` CSV with a header row.
pub fn read_survey_csv(path: &Path) -> Result<Vec<PairedSample>, StatsError> {
    let file = std::fs::File::open(path).map_err(|source| StatsError::Io { path: path.display().to_string(), source })?;
    parse_survey_csv(file)
}

pub fn parse_survey_csv<R: std::io::Read>(reader: R) -> Result<Vec<PairedSample>, StatsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<SurveyRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| StatsError::MalformedSurvey { line, reason: e.to_string() })?;
        let score = |v: i64| {
            u8::try_from(v)
                .ok()
                .filter(|s| (1..=5).contains(s))
                .ok_or(StatsError::MalformedSurvey { line, reason: format!("score {v} outside 1-5") })
        };
        out.push(PairedSample {
            participant_id: row.participant_id,
            phoneme: row.phoneme,
            pre: score(row.pre)?,
            post: score(row.post)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_formatting() {
        assert_eq!(GroupStats::of("a", &[4, 4, 4]).unwrap().formatted(), "4.00 ± 0.00");
        assert_eq!(GroupStats::of("a", &[3, 4, 5]).unwrap().formatted(), "4.00 ± 1.00");
        let (g, w) = summarize_scores(&[("x".into(), vec![]), ("y".into(), vec![5])]);
        assert_eq!(g.len(), 1);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn csv_rows() {
        let text = "participant_id,phoneme,pre,post\np1,ʈ,2,4\np2,ʈ,3,3\n";
        let rows = parse_survey_csv(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        let s = summarize_likert(&rows).unwrap();
        assert_eq!(s.per_phoneme[0].mean_delta, 1.0);
        assert!(parse_survey_csv("participant_id,phoneme,pre,post\np1,ʈ,0,4\n".as_bytes()).is_err());
        assert!(parse_survey_csv("participant_id,phoneme,pre,post\np1,ʈ,x,4\n".as_bytes()).is_err());
    }
}
