//! Report bundle files and the appendix table text format.

use std::path::Path;

use textaug_core::grid::{AugPct, Group};
use textaug_core::summary::{AppendixTable, MeanGain, ReportBundle};

use crate::error::{Error, Result};

fn column_name(g: Group, p: AugPct) -> String {
    format!("{g} {p}")
}

/// Renders rows of subset sizes against `group p` columns; missing cells
/// are empty.
pub fn appendix_csv(t: &AppendixTable) -> String {
    let mut s = String::from("subset_size");
    for &(g, p) in &t.columns {
        s.push(',');
        s.push_str(&column_name(g, p));
    }
    s.push('\n');
    for (size, row) in t.sizes.iter().zip(&t.cells) {
        s.push_str(&size.to_string());
        for cell in row {
            s.push(',');
            if let Some(v) = cell {
                s.push_str(&format!("{v:.*}", t.decimals));
            }
        }
        s.push('\n');
    }
    s
}

/// Parses [`appendix_csv`] output. The decimal count is taken from the
/// first non-empty cell and must be the same for every cell.
pub fn parse_appendix_csv(text: &str, path: &Path) -> Result<AppendixTable> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::format(path, "empty table"))?;
    let mut head = header.split(',');
    if head.next() != Some("subset_size") {
        return Err(Error::format(path, "first column must be subset_size"));
    }
    let columns = head
        .map(|h| {
            let (g, p) = h.split_once(' ').ok_or_else(|| Error::format(path, format!("bad column {h:?}")))?;
            let g: Group = g.parse().map_err(|_| Error::format(path, format!("bad group in {h:?}")))?;
            let p: AugPct = p.parse().map_err(|_| Error::format(path, format!("bad percentage in {h:?}")))?;
            Ok((g, p))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut decimals: Option<usize> = None;
    let mut sizes = Vec::new();
    let mut cells = Vec::new();
    for (n, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let size: usize = fields
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(path, format!("row {}: bad subset size", n + 1)))?;
        let row = fields
            .map(|f| {
                if f.is_empty() {
                    return Ok(None);
                }
                let d = f.split_once('.').map_or(0, |(_, frac)| frac.len());
                if *decimals.get_or_insert(d) != d {
                    return Err(Error::format(path, format!("row {}: mixed decimal places", n + 1)));
                }
                f.parse::<f64>().map(Some).map_err(|_| Error::format(path, format!("row {}: bad value {f:?}", n + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != columns.len() {
            return Err(Error::format(path, format!("row {}: {} cells for {} columns", n + 1, row.len(), columns.len())));
        }
        sizes.push(size);
        cells.push(row);
    }
    Ok(AppendixTable {
        sizes,
        columns,
        cells,
        decimals: decimals.unwrap_or(4),
    })
}

fn gains_csv(rows: &[MeanGain]) -> String {
    let mut s = String::from("dataset,group,subset_size,mean_gain,count\n");
    for g in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            g.dataset.as_deref().unwrap_or("all"),
            g.group,
            g.subset_size.map(|n| n.to_string()).unwrap_or_else(|| "all".into()),
            g.mean_gain,
            g.count
        ));
    }
    s
}

/// File name and contents of every artifact in the bundle.
pub fn bundle_files(b: &ReportBundle) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for (d, t) in &b.baseline_tables {
        files.push((format!("baseline_f1_{d}.csv"), appendix_csv(t)));
    }
    for (d, t) in &b.pvalue_tables {
        files.push((format!("pvalues_{d}.csv"), appendix_csv(t)));
    }
    files.push(("gain_by_group.csv".into(), gains_csv(&b.gain_by_group)));
    files.push(("gain_by_group_size.csv".into(), gains_csv(&b.gain_by_group_size)));
    files.push(("gain_combined.csv".into(), gains_csv(&b.gain_combined)));
    let mut sig = String::from("dataset,group,subset_size,aug_pct,round,gain,p_value,neg_log10_p,significant\n");
    for r in &b.significance {
        let c = &r.coord;
        sig.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.dataset, c.group, c.subset_size, c.aug_pct, c.round, r.gain, r.p_value, r.neg_log10_p, r.significant
        ));
    }
    files.push(("significance.csv".into(), sig));
    files.push(("summary.txt".into(), b.text.clone()));
    files
}

pub fn write_bundle(dir: &Path, b: &ReportBundle) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut names = Vec::new();
    for (name, contents) in bundle_files(b) {
        let p = dir.join(&name);
        std::fs::write(&p, contents).map_err(|e| Error::io(&p, e))?;
        names.push(name);
    }
    Ok(names)
}
