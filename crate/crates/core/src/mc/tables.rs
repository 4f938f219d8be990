use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::McReport;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Csv,
    Markdown,
}

impl TableFormat {
    fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Markdown => "md",
        }
    }
}

const DEFAULT_LEVELS: [f64; 3] = [0.99, 0.95, 0.90];

fn num(v: f64) -> String {
    format!("{v:.6}")
}

fn pct(level: f64) -> String {
    let p = level * 100.0;
    if (p - p.round()).abs() < 1e-9 {
        format!("{}", p.round() as i64)
    } else {
        format!("{p}").replace('.', "_")
    }
}

fn omit_label(omit: &[usize]) -> String {
    omit.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

type Table = (Vec<String>, Vec<Vec<String>>);

fn graphs_table(reports: &[McReport]) -> Table {
    let header = [
        "scenario",
        "n",
        "village_size",
        "contact_max_degree",
        "contact_avg_degree",
        "contact_clustering",
        "observed_max_degree",
        "observed_avg_degree",
        "observed_clustering",
    ];
    let rows = reports
        .iter()
        .map(|r| {
            let (c, o) = (&r.contact_stats, &r.observed_stats);
            vec![
                r.label.clone(),
                r.n.to_string(),
                r.village_size.to_string(),
                c.max_degree.to_string(),
                num(c.avg_degree),
                num(c.clustering),
                o.max_degree.to_string(),
                num(o.avg_degree),
                num(o.clustering),
            ]
        })
        .collect();
    (header.iter().map(|s| s.to_string()).collect(), rows)
}

fn truth_table(reports: &[McReport]) -> Table {
    let header = [
        "scenario",
        "n",
        "delta0",
        "alpha",
        "omit",
        "oracle_draws",
        "true_adm",
        "true_adm_se",
        "true_delta",
        "true_delta_se",
        "true_c_empty",
    ];
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                r.n.to_string(),
                num(r.delta0),
                num(r.alpha),
                omit_label(&r.omit),
                r.true_adm.draws.to_string(),
                num(r.true_adm.mean),
                num(r.true_adm.se),
                num(r.true_delta.mean),
                num(r.true_delta.se),
                num(r.true_c_empty.mean),
            ]
        })
        .collect();
    (header.iter().map(|s| s.to_string()).collect(), rows)
}

fn coverage_table(reports: &[McReport]) -> Table {
    let levels: Vec<f64> = match reports.first() {
        Some(r) => r.levels.iter().map(|l| l.level).collect(),
        None => DEFAULT_LEVELS.to_vec(),
    };
    let mut header: Vec<String> = [
        "scenario",
        "n",
        "delta0",
        "alpha",
        "omit",
        "replications",
        "failures",
        "mean_est_adm",
        "mean_delta_hat",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(levels.iter().map(|&l| format!("coverage_{}", pct(l))));
    header.extend(levels.iter().map(|&l| format!("median_length_{}", pct(l))));
    header.extend(
        ["sigma_clamp_rate", "failure_rate", "fwer"]
            .iter()
            .map(|s| s.to_string()),
    );
    let rows = reports
        .iter()
        .map(|r| {
            let mut row = vec![
                r.label.clone(),
                r.n.to_string(),
                num(r.delta0),
                num(r.alpha),
                omit_label(&r.omit),
                r.replications.to_string(),
                r.failures.to_string(),
                num(r.mean_est_adm),
                num(r.mean_delta_hat),
            ];
            for &l in &levels {
                row.push(
                    r.levels
                        .iter()
                        .find(|x| x.level == l)
                        .map_or(String::new(), |x| num(x.coverage)),
                );
            }
            for &l in &levels {
                row.push(
                    r.levels
                        .iter()
                        .find(|x| x.level == l)
                        .map_or(String::new(), |x| num(x.median_ci_length)),
                );
            }
            row.push(num(r.sigma_clamp_rate));
            row.push(num(r.failure_rate));
            row.push(r.fwer.map_or(String::new(), num));
            row
        })
        .collect();
    (header, rows)
}

fn write_table(path: &Path, (header, rows): &Table, format: TableFormat) -> Result<()> {
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(header)?;
            for row in rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        TableFormat::Markdown => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            writeln!(f, "| {} |", header.join(" | "))?;
            writeln!(f, "|{}", "---|".repeat(header.len()))?;
            for row in rows {
                writeln!(f, "| {} |", row.join(" | "))?;
            }
            f.flush()?;
        }
    }
    Ok(())
}

/// Writes `table1_graphs`, `table2_truth` and `table3_coverage` into `dir`
/// and returns their paths in that order.
pub fn emit_tables(reports: &[McReport], dir: &Path, format: TableFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let ext = format.extension();
    let tables = [
        ("table1_graphs", graphs_table(reports)),
        ("table2_truth", truth_table(reports)),
        ("table3_coverage", coverage_table(reports)),
    ];
    let mut paths = Vec::with_capacity(3);
    for (name, table) in &tables {
        let path = dir.join(format!("{name}.{ext}"));
        write_table(&path, table, format)?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn write_report_json(reports: &[McReport], path: &Path) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(f, reports)?;
    Ok(())
}
