//! Study runner: manifest in, per-subject coefficients and aggregate tables
//! out.
//!
//! Each subject contributes three recordings in one of two protocol orders.
//! `NNA` is normal, normal, angry; `NAN` is normal, angry, normal. For every
//! subject the two normal recordings are compared with each other (`r_nn`)
//! and with the angry one (`r_na`, by default the mean over both normals).

mod manifest;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::audio_io::{decode_wav, AudioError, SegmentSpec};
use crate::correlation::{compare, CompareError};
use crate::lts::{compute_lts, LtsConfig, LtsError, Spectrum};
use crate::stats::{
    anger_distribution, offset_fraction, summarize, AngerDistribution, Baselines, StatsError,
    SummaryStats,
};
use crate::Scalar;

pub use manifest::{load_manifest, parse_manifest, MANIFEST_HEADER};
pub use report::{parse_rows, read_rows, render_csv, render_text, ROWS_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Nna,
    Nan,
}

impl FromStr for Order {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "NNA" => Ok(Order::Nna),
            "NAN" => Ok(Order::Nan),
            other => Err(format!("bad order code {other:?} (expected NNA or NAN)")),
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::Nna => "NNA",
            Order::Nan => "NAN",
        })
    }
}

/// Which recording of a trio an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    FirstNormal,
    SecondNormal,
    Angry,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::FirstNormal => "first normal",
            Role::SecondNormal => "second normal",
            Role::Angry => "angry",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionRecord {
    pub subject_id: String,
    pub order: Order,
    /// Recordings in the order they were made.
    pub recordings: [PathBuf; 3],
    pub anger_rating: u8,
}

impl SessionRecord {
    /// Paths by role: first normal, second normal, angry.
    pub fn by_role(&self) -> [(Role, &Path); 3] {
        let [a, b, c] = &self.recordings;
        match self.order {
            Order::Nna => [
                (Role::FirstNormal, a.as_path()),
                (Role::SecondNormal, b.as_path()),
                (Role::Angry, c.as_path()),
            ],
            Order::Nan => [
                (Role::FirstNormal, a.as_path()),
                (Role::SecondNormal, c.as_path()),
                (Role::Angry, b.as_path()),
            ],
        }
    }
}

/// Which normal-vs-angry comparison feeds `r_na`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    #[default]
    Mean,
    First,
    Second,
}

impl FromStr for Pairing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "mean" => Ok(Pairing::Mean),
            "first" => Ok(Pairing::First),
            "second" => Ok(Pairing::Second),
            other => Err(format!(
                "bad pairing {other:?} (expected mean, first or second)"
            )),
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pairing::Mean => "mean",
            Pairing::First => "first",
            Pairing::Second => "second",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyConfig<T> {
    pub segment: SegmentSpec,
    pub lts: LtsConfig<T>,
    pub pairing: Pairing,
    pub baselines: Baselines<T>,
    /// Ratings at or above this form the "angriest" subset.
    pub angry_threshold: u8,
}

impl<T: Scalar> Default for StudyConfig<T> {
    fn default() -> Self {
        Self {
            segment: SegmentSpec::default(),
            lts: LtsConfig::default(),
            pairing: Pairing::Mean,
            baselines: Baselines::default(),
            angry_threshold: 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error(transparent)]
    Compare(#[from] CompareError),
}

#[derive(Debug, Error)]
#[error("subject {subject_id}{}: {source}", role.map(|r| format!(" ({r} recording)")).unwrap_or_default())]
pub struct SessionError {
    pub subject_id: String,
    pub role: Option<Role>,
    #[source]
    pub source: PipelineError,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest line {line}: {msg}")]
    Manifest { line: u64, msg: String },
    #[error("manifest lists no sessions")]
    EmptyManifest,
    #[error("{} session(s) failed:\n{}", .0.len(), .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Sessions(Vec<SessionError>),
    #[error("report line {line}: {msg}")]
    Rows { line: u64, msg: String },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Per-subject coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRow<T> {
    pub subject_id: String,
    pub order: Order,
    pub anger_rating: u8,
    pub r_nn: T,
    pub r_na: T,
    pub sddd_nn: T,
    pub sddd_na: T,
}

/// Aggregates over one subset of subjects.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetReport<T> {
    pub label: String,
    pub r_nn: SummaryStats<T>,
    pub r_na: SummaryStats<T>,
    pub sddd_nn: SummaryStats<T>,
    pub sddd_na: SummaryStats<T>,
    /// Offset fraction of the subset's mean `r_na`.
    pub offset: T,
}

impl<T> SubsetReport<T> {
    pub fn n(&self) -> usize {
        self.r_nn.n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport<T> {
    pub baselines: Baselines<T>,
    pub angry_threshold: u8,
    /// Sorted by subject id.
    pub rows: Vec<SubjectRow<T>>,
    pub overall: SubsetReport<T>,
    pub anger: AngerDistribution<T>,
    /// `None` when no subject reaches the threshold.
    pub angry_subset: Option<SubsetReport<T>>,
    /// One entry per protocol order present, NNA first.
    pub by_order: Vec<SubsetReport<T>>,
}

/// Segment and LTS of one file.
pub fn recording_spectrum<T: Scalar>(
    path: &Path,
    cfg: &StudyConfig<T>,
) -> Result<Spectrum<T>, PipelineError> {
    let clip = decode_wav::<T>(path)?;
    let seg = clip.extract_segment(&cfg.segment)?;
    Ok(compute_lts(&seg, &cfg.lts)?)
}

/// Coefficients for one subject.
pub fn pair_correlations<T: Scalar>(
    rec: &SessionRecord,
    cfg: &StudyConfig<T>,
) -> Result<SubjectRow<T>, SessionError> {
    let fail = |role: Option<Role>, source: PipelineError| SessionError {
        subject_id: rec.subject_id.clone(),
        role,
        source,
    };
    let [n1, n2, angry] = rec
        .by_role()
        .map(|(role, path)| recording_spectrum(path, cfg).map_err(|e| fail(Some(role), e)));
    let (n1, n2, angry) = (n1?, n2?, angry?);
    let pair = |a: &Spectrum<T>, b: &Spectrum<T>| compare(a, b).map_err(|e| fail(None, e.into()));
    let nn = pair(&n1, &n2)?;
    let na1 = pair(&n1, &angry)?;
    let na2 = pair(&n2, &angry)?;
    let half = T::lit(0.5);
    let (r_na, sddd_na) = match cfg.pairing {
        Pairing::Mean => ((na1.r + na2.r) * half, (na1.sddd + na2.sddd) * half),
        Pairing::First => (na1.r, na1.sddd),
        Pairing::Second => (na2.r, na2.sddd),
    };
    Ok(SubjectRow {
        subject_id: rec.subject_id.clone(),
        order: rec.order,
        anger_rating: rec.anger_rating,
        r_nn: nn.r,
        r_na,
        sddd_nn: nn.sddd,
        sddd_na,
    })
}

/// Runs every session (in parallel) and aggregates. Any failing session
/// aborts the run; all failures are reported together.
pub fn run_study<T: Scalar>(
    sessions: &[SessionRecord],
    cfg: &StudyConfig<T>,
) -> Result<StudyReport<T>, HarnessError> {
    if sessions.is_empty() {
        return Err(HarnessError::EmptyManifest);
    }
    cfg.baselines.validate()?;
    let results: Vec<Result<SubjectRow<T>, SessionError>> = sessions
        .par_iter()
        .map(|rec| pair_correlations(rec, cfg))
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        errors.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
        return Err(HarnessError::Sessions(errors));
    }
    aggregate(rows, &cfg.baselines, cfg.angry_threshold)
}

fn subset<T: Scalar>(
    label: String,
    rows: &[&SubjectRow<T>],
    baselines: &Baselines<T>,
) -> Result<SubsetReport<T>, HarnessError> {
    let col = |f: fn(&SubjectRow<T>) -> T| rows.iter().map(|r| f(r)).collect::<Vec<T>>();
    let r_na = summarize(&col(|r| r.r_na))?;
    Ok(SubsetReport {
        label,
        r_nn: summarize(&col(|r| r.r_nn))?,
        offset: offset_fraction(r_na.mean, baselines)?,
        r_na,
        sddd_nn: summarize(&col(|r| r.sddd_nn))?,
        sddd_na: summarize(&col(|r| r.sddd_na))?,
    })
}

/// Builds the report from per-subject rows (any order).
pub fn aggregate<T: Scalar>(
    mut rows: Vec<SubjectRow<T>>,
    baselines: &Baselines<T>,
    angry_threshold: u8,
) -> Result<StudyReport<T>, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyManifest);
    }
    baselines.validate()?;
    rows.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    let all: Vec<&SubjectRow<T>> = rows.iter().collect();
    let overall = subset("all".to_string(), &all, baselines)?;
    let ratings: Vec<i64> = rows.iter().map(|r| i64::from(r.anger_rating)).collect();
    let anger = anger_distribution(&ratings)?;
    let angry: Vec<&SubjectRow<T>> = rows
        .iter()
        .filter(|r| r.anger_rating >= angry_threshold)
        .collect();
    let angry_subset = if angry.is_empty() {
        None
    } else {
        Some(subset(
            format!("rating>={angry_threshold}"),
            &angry,
            baselines,
        )?)
    };
    let mut by_order = Vec::new();
    for order in [Order::Nna, Order::Nan] {
        let sel: Vec<&SubjectRow<T>> = rows.iter().filter(|r| r.order == order).collect();
        if !sel.is_empty() {
            by_order.push(subset(format!("order={order}"), &sel, baselines)?);
        }
    }
    Ok(StudyReport {
        baselines: *baselines,
        angry_threshold,
        rows,
        overall,
        anger,
        angry_subset,
        by_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, order: Order, rating: u8, r_nn: f64, r_na: f64) -> SubjectRow<f64> {
        SubjectRow {
            subject_id: id.to_string(),
            order,
            anger_rating: rating,
            r_nn,
            r_na,
            sddd_nn: 1.0,
            sddd_na: 2.0,
        }
    }

    #[test]
    fn roles_follow_order() {
        let rec = |order| SessionRecord {
            subject_id: "s".into(),
            order,
            recordings: ["a".into(), "b".into(), "c".into()],
            anger_rating: 3,
        };
        let names = |r: SessionRecord| {
            r.by_role()
                .map(|(_, p)| p.to_string_lossy().into_owned())
                .join("")
        };
        assert_eq!(names(rec(Order::Nna)), "abc");
        assert_eq!(names(rec(Order::Nan)), "acb");
    }

    #[test]
    fn constant_na_gives_expected_offset() {
        let rows: Vec<_> = (0..32)
            .map(|i| row(&format!("s{i:02}"), Order::Nna, 3, 0.95, 0.934))
            .collect();
        let rep = aggregate(rows, &Baselines::default(), 4).unwrap();
        assert!((rep.overall.offset - 0.3231).abs() < 5e-5);
        assert!(rep.angry_subset.is_none());
    }

    #[test]
    fn single_session_has_undefined_spread() {
        let rep = aggregate(
            vec![row("a", Order::Nan, 2, 0.9, 0.8)],
            &Baselines::default(),
            4,
        )
        .unwrap();
        assert_eq!(rep.overall.r_nn.n, 1);
        assert_eq!(rep.overall.r_nn.sd, None);
        assert_eq!(rep.overall.r_na.se, None);
    }

    #[test]
    fn threshold_selects_angriest() {
        let mut rows = Vec::new();
        for i in 0..5 {
            rows.push(row(&format!("a{i}"), Order::Nna, 4, 0.95, 0.92));
        }
        for i in 0..18 {
            rows.push(row(&format!("b{i:02}"), Order::Nan, 3, 0.95, 0.94));
        }
        for i in 0..9 {
            rows.push(row(&format!("c{i}"), Order::Nna, 2, 0.95, 0.94));
        }
        let rep = aggregate(rows, &Baselines::default(), 4).unwrap();
        let angry = rep.angry_subset.unwrap();
        assert_eq!(angry.n(), 5);
        assert_eq!(angry.label, "rating>=4");
        assert_eq!(rep.by_order.len(), 2);
        assert_eq!(rep.by_order[0].n() + rep.by_order[1].n(), 32);
        assert_eq!(rep.anger.counts, [0, 9, 18, 5, 0]);
    }

    #[test]
    fn rows_are_sorted_and_permutation_invariant() {
        let rows = vec![
            row("s3", Order::Nna, 2, 0.91, 0.90),
            row("s1", Order::Nan, 4, 0.97, 0.93),
            row("s2", Order::Nna, 3, 0.93, 0.88),
        ];
        let mut rev = rows.clone();
        rev.reverse();
        let a = aggregate(rows, &Baselines::default(), 4).unwrap();
        let b = aggregate(rev, &Baselines::default(), 4).unwrap();
        assert_eq!(a, b);
        let ids: Vec<_> = a.rows.iter().map(|r| r.subject_id.as_str()).collect();
        assert_eq!(ids, ["s1", "s2", "s3"]);
    }

    #[test]
    fn empty_rows_and_bad_baselines() {
        assert!(matches!(
            aggregate::<f64>(vec![], &Baselines::default(), 4),
            Err(HarnessError::EmptyManifest)
        ));
        assert!(matches!(
            run_study::<f64>(&[], &StudyConfig::default()),
            Err(HarnessError::EmptyManifest)
        ));
        let bad = Baselines {
            r_same: 0.8,
            r_diff: 0.9,
        };
        assert!(matches!(
            aggregate(vec![row("a", Order::Nna, 3, 0.9, 0.9)], &bad, 4),
            Err(HarnessError::Stats(_))
        ));
    }

    #[test]
    fn session_errors_name_subject_and_role() {
        let rec = SessionRecord {
            subject_id: "s07".into(),
            order: Order::Nan,
            recordings: [
                "/nonexistent/a.wav".into(),
                "/nonexistent/b.wav".into(),
                "/nonexistent/c.wav".into(),
            ],
            anger_rating: 3,
        };
        let err = run_study::<f64>(&[rec], &StudyConfig::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("s07 (first normal recording)"), "{msg}");
        assert!(matches!(err, HarnessError::Sessions(v) if v.len() == 1));
    }
}
