//! Output formats: aligned text tables, CSV and JSON.

use std::str::FromStr;

use serde::Serialize;

use crate::eval::{ResultRow, TaskResult};
use crate::subset::SubsetSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other}; expected text, json or csv")),
        }
    }
}

/// Left-aligned first column, right-aligned others.
pub fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    out += &line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for r in rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

pub fn csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    for r in rows {
        w.serialize(r).expect("rows serialize to csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("values serialize to json") + "\n"
}

pub fn result_rows(rows: &[ResultRow], format: Format) -> String {
    match format {
        Format::Json => json(rows),
        Format::Csv => csv(rows),
        Format::Text => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.set.clone(),
                        r.variant.to_string(),
                        format!("{}/{}", r.solved, r.tasks),
                        format!("{:.2}", r.solved_fraction),
                        format!("{:.1}", r.mean_length),
                        r.max_length.to_string(),
                        format!("{:.2}", r.mean_proposals),
                        format!("{:.2}", r.mean_planning_ms),
                        format!("{:.1}", r.lifted),
                        format!("{:.1}", r.grounded),
                    ]
                })
                .collect();
            table(&["set", "variant", "solved", "frac", "|p|", "max|p|", "#p", "ms", "|A|", "|A_g|"], &body)
        }
    }
}

pub fn task_results(results: &[TaskResult], format: Format) -> String {
    match format {
        Format::Json => json(results),
        Format::Csv => {
            #[derive(Serialize)]
            struct Flat<'a> {
                set: &'a str,
                task: &'a str,
                variant: String,
                solved: bool,
                plan_length: Option<usize>,
                proposals: usize,
                planning_ms: f64,
                lifted: usize,
                grounded: usize,
                replay_ok: Option<bool>,
            }
            let flat: Vec<Flat> = results
                .iter()
                .map(|r| Flat {
                    set: &r.set,
                    task: &r.task,
                    variant: r.variant.to_string(),
                    solved: r.solved,
                    plan_length: r.plan_length,
                    proposals: r.proposals,
                    planning_ms: r.planning_ms,
                    lifted: r.lifted,
                    grounded: r.grounded,
                    replay_ok: r.replay_ok,
                })
                .collect();
            csv(&flat)
        }
        Format::Text => {
            let body: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    vec![
                        format!("{} {}", r.set, r.task),
                        r.variant.to_string(),
                        if r.solved { "yes".into() } else { "no".into() },
                        r.plan_length.map_or("-".into(), |l| l.to_string()),
                        r.proposals.to_string(),
                        format!("{:.2}", r.planning_ms),
                        r.grounded.to_string(),
                    ]
                })
                .collect();
            table(&["task", "variant", "solved", "|p|", "#p", "ms", "|A_g|"], &body)
        }
    }
}

pub fn subset_rows(rows: &[SubsetSummary], format: Format) -> String {
    match format {
        Format::Json => json(rows),
        Format::Csv => csv(rows),
        Format::Text => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.k.to_string(),
                        r.combinations.to_string(),
                        format!("{:.3}", r.median),
                        format!("{:.3}", r.min),
                        format!("{:.3}", r.max),
                        r.complete.to_string(),
                    ]
                })
                .collect();
            table(&["k", "combinations", "median", "min", "max", "complete"], &body)
        }
    }
}
