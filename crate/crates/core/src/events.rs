//! Conflict-event dyads: per-period opponent proportions and breakpoint shifts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::corpus::{parse_date, DATE_FORMAT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub date: NaiveDate,
    pub actor: String,
    pub category: String,
}

/// Allowed opponent categories plus optional raw-label aliases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMap {
    pub categories: Vec<String>,
    #[serde(default)]
    pub aliases: BTreeMap<String, String>,
}

impl Default for CategoryMap {
    fn default() -> Self {
        Self {
            categories: ["state", "sectarian", "tribal", "rival_jihadist"]
                .map(String::from)
                .to_vec(),
            aliases: BTreeMap::new(),
        }
    }
}

impl CategoryMap {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?
        };
        if let Some((raw, target)) = map.aliases.iter().find(|(_, t)| !map.categories.contains(t)) {
            return Err(Error::Spec(format!(
                "alias `{raw}` maps to unknown category `{target}`"
            )));
        }
        Ok(map)
    }

    /// Canonical category of a raw label, if known.
    pub fn resolve(&self, raw: &str) -> Option<&str> {
        let raw = raw.trim();
        self.categories
            .iter()
            .find(|c| c.as_str() == raw)
            .map(String::as_str)
            .or_else(|| self.aliases.get(raw).map(String::as_str))
    }

    pub fn index(&self, category: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == category)
    }
}

/// Reads `date,actor,category` csv rows, mapping categories through `map`.
pub fn read_events_csv(path: &Path, map: &CategoryMap) -> Result<Vec<EventRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Record {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Record {
            line: 1,
            message: format!("missing column `{name}`"),
        })
    };
    let (di, ai, ci) = (col("date")?, col("actor")?, col("category")?);
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Record {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let date = parse_date(&row[di]).map_err(|e| Error::Record {
            line,
            message: e.to_string(),
        })?;
        let category = map.resolve(&row[ci]).ok_or_else(|| Error::UnknownCategory {
            record: format!("line {line}"),
            category: row[ci].to_string(),
        })?;
        out.push(EventRecord {
            date,
            actor: row[ai].to_string(),
            category: category.to_string(),
        });
    }
    Ok(out)
}

pub fn write_events_csv(events: &[EventRecord], path: &Path) -> Result<()> {
    let mut text = String::from("date,actor,category\n");
    for e in events {
        let _ = writeln!(text, "{},{},{}", e.date.format(DATE_FORMAT), e.actor, e.category);
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    #[default]
    Year,
    Quarter,
}

impl Period {
    /// First day of the period containing `date`.
    pub fn start_of(self, date: NaiveDate) -> NaiveDate {
        let month = match self {
            Period::Year => 1,
            Period::Quarter => (date.month0() / 3) * 3 + 1,
        };
        NaiveDate::from_ymd_opt(date.year(), month, 1).expect("valid period start")
    }

    /// First day of the following period.
    pub fn next(self, start: NaiveDate) -> NaiveDate {
        let months = match self {
            Period::Year => 12,
            Period::Quarter => 3,
        };
        start
            .checked_add_months(chrono::Months::new(months))
            .expect("date in range")
    }

    pub fn label(self, start: NaiveDate) -> String {
        match self {
            Period::Year => start.year().to_string(),
            Period::Quarter => format!("{}-Q{}", start.year(), start.month0() / 3 + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRow {
    pub label: String,
    pub start: NaiveDate,
    /// Exclusive.
    pub end: NaiveDate,
    pub counts: Vec<u64>,
    pub total: u64,
    /// `None` for periods without events.
    pub proportions: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadSeries {
    pub period: Period,
    pub categories: Vec<String>,
    /// Every period from the first to the last event, gaps included.
    pub rows: Vec<PeriodRow>,
}

impl DyadSeries {
    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.total).sum()
    }

    /// `period,category,count,proportion`; empty periods get `NA` proportions.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period,category,count,proportion\n");
        for r in &self.rows {
            for (c, name) in self.categories.iter().enumerate() {
                let p = r
                    .proportions
                    .as_ref()
                    .map_or_else(|| "NA".to_string(), |p| format!("{:.6}", p[c]));
                let _ = writeln!(out, "{},{},{},{}", r.label, name, r.counts[c], p);
            }
        }
        out
    }
}

/// Counts events per period and category.
pub fn dyad_proportions(events: &[EventRecord], period: Period, map: &CategoryMap) -> Result<DyadSeries> {
    if events.is_empty() {
        return Err(Error::InvalidInput("no events".into()));
    }
    let k = map.categories.len();
    let mut counts: BTreeMap<NaiveDate, Vec<u64>> = BTreeMap::new();
    for (i, e) in events.iter().enumerate() {
        let c = map.index(&e.category).ok_or_else(|| Error::UnknownCategory {
            record: format!("event {i} ({} {})", e.date.format(DATE_FORMAT), e.actor),
            category: e.category.clone(),
        })?;
        counts.entry(period.start_of(e.date)).or_insert_with(|| vec![0; k])[c] += 1;
    }
    let first = *counts.keys().next().expect("nonempty");
    let last = *counts.keys().next_back().expect("nonempty");
    let mut rows = Vec::new();
    let mut start = first;
    while start <= last {
        let end = period.next(start);
        let c = counts.remove(&start).unwrap_or_else(|| vec![0; k]);
        let total: u64 = c.iter().sum();
        let proportions = (total > 0).then(|| c.iter().map(|&x| x as f64 / total as f64).collect());
        rows.push(PeriodRow {
            label: period.label(start),
            start,
            end,
            counts: c,
            total,
            proportions,
        });
        start = end;
    }
    Ok(DyadSeries {
        period,
        categories: map.categories.clone(),
        rows,
    })
}

/// Mean proportion of `category` in nonempty periods from the one containing
/// `breakpoint` onward, minus the mean over the nonempty periods before it.
pub fn shift_statistic(series: &DyadSeries, breakpoint: NaiveDate, category: &str) -> Result<f64> {
    let c = series
        .categories
        .iter()
        .position(|x| x == category)
        .ok_or_else(|| Error::UnknownCategory {
            record: "shift statistic".into(),
            category: category.to_string(),
        })?;
    let (mut pre, mut post) = (Vec::new(), Vec::new());
    for r in &series.rows {
        if let Some(p) = &r.proportions {
            if r.end <= breakpoint {
                pre.push(p[c]);
            } else {
                post.push(p[c]);
            }
        }
    }
    if pre.is_empty() || post.is_empty() {
        return Err(Error::InvalidInput(format!(
            "breakpoint {} leaves no nonempty period on one side ({} before, {} after)",
            breakpoint.format(DATE_FORMAT),
            pre.len(),
            post.len()
        )));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(mean(&post) - mean(&pre))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn ev(date: NaiveDate, category: &str) -> EventRecord {
        EventRecord {
            date,
            actor: "AQAP".into(),
            category: category.into(),
        }
    }

    #[test]
    fn one_year_proportions() {
        let mut events: Vec<EventRecord> = (0..8).map(|i| ev(d(2010, 1 + i, 1), "state")).collect();
        events.extend((0..2).map(|_| ev(d(2010, 6, 6), "sectarian")));
        let s = dyad_proportions(&events, Period::Year, &CategoryMap::default()).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rows[0].proportions.as_ref().unwrap()[..2], [0.8, 0.2]);
    }

    #[test]
    fn single_category_and_gaps() {
        let events = vec![ev(d(2009, 3, 1), "tribal"), ev(d(2011, 3, 1), "tribal")];
        let s = dyad_proportions(&events, Period::Year, &CategoryMap::default()).unwrap();
        assert_eq!(s.rows.len(), 3);
        assert_eq!(s.rows[0].proportions.as_ref().unwrap()[2], 1.0);
        assert!(s.rows[1].proportions.is_none());
        assert!(s.to_csv().contains("2010,state,0,NA"));
    }

    #[test]
    fn quarters() {
        let events = vec![ev(d(2011, 2, 10), "state"), ev(d(2011, 11, 30), "state")];
        let s = dyad_proportions(&events, Period::Quarter, &CategoryMap::default()).unwrap();
        let labels: Vec<&str> = s.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["2011-Q1", "2011-Q2", "2011-Q3", "2011-Q4"]);
    }

    #[test]
    fn errors() {
        let map = CategoryMap::default();
        assert!(dyad_proportions(&[], Period::Year, &map).is_err());
        let err = dyad_proportions(&[ev(d(2010, 1, 1), "aliens")], Period::Year, &map).unwrap_err();
        assert!(matches!(err, Error::UnknownCategory { category, .. } if category == "aliens"));
        let s = dyad_proportions(&[ev(d(2010, 1, 1), "state")], Period::Year, &map).unwrap();
        assert!(shift_statistic(&s, d(2010, 6, 1), "state").is_err());
        assert!(shift_statistic(&s, d(2012, 1, 1), "state").is_err());
    }

    fn step_events(pre: f64, post: f64) -> Vec<EventRecord> {
        let mut events = Vec::new();
        for year in 2008..2014 {
            let p = if year < 2011 { pre } else { post };
            let n_sect = (p * 100.0).round() as usize;
            for i in 0..100 {
                events.push(ev(
                    d(year, 1 + (i % 12) as u32, 1),
                    if i < n_sect { "sectarian" } else { "state" },
                ));
            }
        }
        events
    }

    #[test]
    fn planted_step() {
        let s = dyad_proportions(&step_events(0.2, 0.5), Period::Year, &CategoryMap::default()).unwrap();
        let delta = shift_statistic(&s, d(2011, 1, 1), "sectarian").unwrap();
        assert!((delta - 0.3).abs() < 1e-12);
        // breakpoint inside 2011 still counts 2011 as post
        assert_eq!(shift_statistic(&s, d(2011, 7, 1), "sectarian").unwrap(), delta);
        let flat = dyad_proportions(&step_events(0.4, 0.4), Period::Year, &CategoryMap::default()).unwrap();
        assert_eq!(shift_statistic(&flat, d(2011, 1, 1), "sectarian").unwrap(), 0.0);
        let gone = dyad_proportions(&step_events(0.3, 0.0), Period::Year, &CategoryMap::default()).unwrap();
        assert!((shift_statistic(&gone, d(2011, 1, 1), "sectarian").unwrap() + 0.3).abs() < 1e-12);
    }

    #[test]
    fn aliases_and_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let map_path = dir.path().join("map.toml");
        std::fs::write(
            &map_path,
            "categories = [\"state\", \"sectarian\"]\n[aliases]\n\"Government of Yemen\" = \"state\"\nHouthis = \"sectarian\"\n",
        )
        .unwrap();
        let map = CategoryMap::from_path(&map_path).unwrap();
        let csv_path = dir.path().join("events.csv");
        std::fs::write(
            &csv_path,
            "date,actor,category\n2010-01-02,AQAP,Government of Yemen\n2010-03-04,AQAP,Houthis\n",
        )
        .unwrap();
        let events = read_events_csv(&csv_path, &map).unwrap();
        assert_eq!(events[1].category, "sectarian");
        write_events_csv(&events, &csv_path).unwrap();
        assert_eq!(read_events_csv(&csv_path, &map).unwrap(), events);
        std::fs::write(&csv_path, "date,actor,category\n2010-01-02,AQAP,Martians\n").unwrap();
        let err = read_events_csv(&csv_path, &map).unwrap_err();
        assert!(matches!(err, Error::UnknownCategory { record, .. } if record == "line 2"));
    }

    proptest! {
        #[test]
        fn deltas_sum_to_zero(cats in prop::collection::vec((0usize..4, 0u32..72), 10..200), bp in 3u32..71) {
            let map = CategoryMap::default();
            let mut events: Vec<EventRecord> = cats.iter()
                .map(|&(c, m)| ev(d(2008 + (m / 12) as i32, 1 + m % 12, 1), &map.categories[c]))
                .collect();
            // guarantee both sides
            events.push(ev(d(2008, 1, 1), "state"));
            events.push(ev(d(2013, 12, 1), "state"));
            let s = dyad_proportions(&events, Period::Quarter, &map).unwrap();
            let breakpoint = d(2008 + (bp / 12) as i32, 1 + bp % 12, 1);
            let total: f64 = map.categories.iter().map(|c| shift_statistic(&s, breakpoint, c).unwrap()).sum();
            prop_assert!(total.abs() < 1e-12);
            for r in &s.rows {
                if let Some(p) = &r.proportions {
                    prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                }
            }
            events.reverse();
            prop_assert_eq!(dyad_proportions(&events, Period::Quarter, &map).unwrap(), s);
        }
    }
}
