//! Report renderings.
//!
//! The machine form is comma-delimited: a per-subject block with header
//! [`ROWS_HEADER`], one blank line, then an aggregate block with header
//! `aggregate,subset,n,mean,sd,se`. Undefined statistics are written `NA`.
//! The human form lays the same numbers out as three tables: pooled
//! coefficients, anger ratings, and the angriest subset.

use std::fmt::Write as _;
use std::path::Path;

use super::{HarnessError, StudyReport, SubjectRow, SubsetReport};
use crate::stats::SummaryStats;
use crate::Scalar;

pub const ROWS_HEADER: [&str; 7] = [
    "subject_id",
    "order",
    "anger_rating",
    "r_nn",
    "r_na",
    "sddd_nn",
    "sddd_na",
];

const AGG_HEADER: [&str; 6] = ["aggregate", "subset", "n", "mean", "sd", "se"];

fn num<T: Scalar>(v: T, round: Option<usize>) -> String {
    match round {
        Some(d) => format!("{v:.d$}"),
        None => v.to_string(),
    }
}

fn opt<T: Scalar>(v: Option<T>, round: Option<usize>) -> String {
    v.map(|v| num(v, round)).unwrap_or_else(|| "NA".to_string())
}

fn percent<T: Scalar>(v: T) -> String {
    format!("{:.1}%", v.as_f64() * 100.0)
}

fn csv_bytes(records: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    for r in records {
        w.write_record(r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

/// Machine-readable report.
pub fn render_csv<T: Scalar>(rep: &StudyReport<T>, round: Option<usize>) -> String {
    let mut rows: Vec<Vec<String>> = vec![ROWS_HEADER.iter().map(|s| s.to_string()).collect()];
    for r in &rep.rows {
        rows.push(vec![
            r.subject_id.clone(),
            r.order.to_string(),
            r.anger_rating.to_string(),
            num(r.r_nn, round),
            num(r.r_na, round),
            num(r.sddd_nn, round),
            num(r.sddd_na, round),
        ]);
    }

    let mut agg: Vec<Vec<String>> = vec![AGG_HEADER.iter().map(|s| s.to_string()).collect()];
    let stat = |name: &str, label: &str, s: &SummaryStats<T>| {
        vec![
            name.to_string(),
            label.to_string(),
            s.n.to_string(),
            num(s.mean, round),
            opt(s.sd, round),
            opt(s.se, round),
        ]
    };
    let mut subsets: Vec<&SubsetReport<T>> = vec![&rep.overall];
    subsets.extend(rep.angry_subset.as_ref());
    subsets.extend(rep.by_order.iter());
    for s in &subsets {
        agg.push(stat("r_nn", &s.label, &s.r_nn));
        agg.push(stat("r_na", &s.label, &s.r_na));
        agg.push(stat("sddd_nn", &s.label, &s.sddd_nn));
        agg.push(stat("sddd_na", &s.label, &s.sddd_na));
        agg.push(vec![
            "offset".into(),
            s.label.clone(),
            s.n().to_string(),
            num(s.offset, round),
            String::new(),
            String::new(),
        ]);
    }
    agg.push(stat("anger", "all", &rep.anger.stats));
    agg.push(vec![
        "anger_sd_population".into(),
        "all".into(),
        rep.anger.stats.n.to_string(),
        String::new(),
        num(rep.anger.stats.sd_population, round),
        String::new(),
    ]);
    for level in 1..=5u8 {
        agg.push(vec![
            "anger_count".into(),
            format!("rating={level}"),
            rep.anger.count(level).to_string(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    for (name, v) in [
        ("baseline_r_same", rep.baselines.r_same),
        ("baseline_r_diff", rep.baselines.r_diff),
    ] {
        agg.push(vec![
            name.into(),
            String::new(),
            String::new(),
            num(v, round),
            String::new(),
            String::new(),
        ]);
    }
    let mut out = csv_bytes(&rows);
    out.push('\n');
    out.push_str(&csv_bytes(&agg));
    out
}

const LABEL_W: usize = 30;
const COL_W: usize = 24;

fn coefficient_table<T: Scalar>(
    out: &mut String,
    title: &str,
    nn: &SummaryStats<T>,
    na: &SummaryStats<T>,
    round: Option<usize>,
) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "{:LABEL_W$}{:<COL_W$} Normal-angry",
        "", "Normal-normal"
    );
    let _ = writeln!(
        out,
        "{:LABEL_W$}{:<COL_W$} {}",
        "Average",
        num(nn.mean, round),
        num(na.mean, round)
    );
    let _ = writeln!(
        out,
        "{:LABEL_W$}{:<COL_W$} {}",
        "Standard deviation",
        opt(nn.sd, round),
        opt(na.sd, round)
    );
    let _ = writeln!(
        out,
        "{:LABEL_W$}{:<COL_W$} {}",
        "Standard error of the mean",
        opt(nn.se, round),
        opt(na.se, round)
    );
}

fn offset_line<T: Scalar>(
    out: &mut String,
    rep: &StudyReport<T>,
    s: &SubsetReport<T>,
    round: Option<usize>,
) {
    let _ = writeln!(
        out,
        "Offset toward a different speaker: {} ({}; r_same = {}, r_diff = {})",
        num(s.offset, round),
        percent(s.offset),
        num(rep.baselines.r_same, round),
        num(rep.baselines.r_diff, round)
    );
}

/// Human-readable report.
pub fn render_text<T: Scalar>(rep: &StudyReport<T>, round: Option<usize>) -> String {
    let mut out = String::new();
    let all = &rep.overall;
    coefficient_table(
        &mut out,
        &format!(
            "Table 1. Intra-speaker Bravais-Pearson coefficient R (n = {})",
            all.n()
        ),
        &all.r_nn,
        &all.r_na,
        round,
    );
    offset_line(&mut out, rep, all, round);
    out.push('\n');

    let a = &rep.anger;
    let _ = writeln!(
        out,
        "Table 2. Self-reported anger level (n = {})",
        a.stats.n
    );
    let _ = writeln!(
        out,
        "{:LABEL_W$}Self-reported anger level",
        "Number of subjects"
    );
    for level in (1..=5u8).rev() {
        let c = a.count(level);
        if c > 0 {
            let _ = writeln!(out, "{c:<LABEL_W$}{level}");
        }
    }
    let _ = writeln!(out, "{:LABEL_W$}{}", "Average", num(a.stats.mean, round));
    let _ = writeln!(
        out,
        "{:LABEL_W$}{}",
        "Standard deviation",
        opt(a.stats.sd, round)
    );
    let _ = writeln!(
        out,
        "{:LABEL_W$}{}",
        "Standard deviation (1/n)",
        num(a.stats.sd_population, round)
    );
    let _ = writeln!(
        out,
        "{:LABEL_W$}{}",
        "Standard error of the mean",
        opt(a.stats.se, round)
    );
    out.push('\n');

    match &rep.angry_subset {
        Some(s) => {
            coefficient_table(
                &mut out,
                &format!(
                    "Table 3. Angriest recordings, rating >= {} (n = {})",
                    rep.angry_threshold,
                    s.n()
                ),
                &s.r_nn,
                &s.r_na,
                round,
            );
            offset_line(&mut out, rep, s, round);
        }
        None => {
            let _ = writeln!(
                out,
                "Table 3. Angriest recordings, rating >= {} (n = 0): no subjects",
                rep.angry_threshold
            );
        }
    }
    out.push('\n');

    coefficient_table(
        &mut out,
        &format!("SDDD in dB (n = {})", all.n()),
        &all.sddd_nn,
        &all.sddd_na,
        round,
    );
    out.push('\n');

    for s in &rep.by_order {
        coefficient_table(
            &mut out,
            &format!("By protocol order, {} (n = {})", s.label, s.n()),
            &s.r_nn,
            &s.r_na,
            round,
        );
        out.push('\n');
    }

    let _ = writeln!(out, "Per subject");
    let _ = writeln!(
        out,
        "{:<12} {:<6} {:<7} {:<22} {:<22} {:<22} sddd_na",
        "subject", "order", "rating", "r_nn", "r_na", "sddd_nn"
    );
    for r in &rep.rows {
        let _ = writeln!(
            out,
            "{:<12} {:<6} {:<7} {:<22} {:<22} {:<22} {}",
            r.subject_id,
            r.order.to_string(),
            r.anger_rating,
            num(r.r_nn, round),
            num(r.r_na, round),
            num(r.sddd_nn, round),
            num(r.sddd_na, round)
        );
    }
    out
}

/// Parses the per-subject block of a machine report. The aggregate block,
/// if present, is ignored.
pub fn parse_rows<T: Scalar>(text: &str) -> Result<Vec<SubjectRow<T>>, HarnessError> {
    let block_end = text.find("\n\n").map(|i| i + 1).unwrap_or(text.len());
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(&text.as_bytes()[..block_end]);
    let header = rdr
        .headers()
        .map_err(|e| HarnessError::Rows {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    if header.iter().ne(ROWS_HEADER) {
        return Err(HarnessError::Rows {
            line: 1,
            msg: format!("header must be exactly {:?}", ROWS_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::Rows {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let err = |msg: String| HarnessError::Rows { line, msg };
        let val = |i: usize| -> Result<T, HarnessError> {
            rec[i]
                .parse::<T>()
                .map_err(|_| err(format!("{}: cannot parse {:?}", ROWS_HEADER[i], &rec[i])))
        };
        let anger_rating = match rec[2].parse::<u8>() {
            Ok(v @ 1..=5) => v,
            _ => return Err(err(format!("anger_rating {:?} is not in 1..=5", &rec[2]))),
        };
        rows.push(SubjectRow {
            subject_id: rec[0].to_string(),
            order: rec[1].parse().map_err(err)?,
            anger_rating,
            r_nn: val(3)?,
            r_na: val(4)?,
            sddd_nn: val(5)?,
            sddd_na: val(6)?,
        });
    }
    Ok(rows)
}

pub fn read_rows<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<SubjectRow<T>>, HarnessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_rows(&text)
}
