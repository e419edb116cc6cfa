//! Artifact writers and the human-readable comparison table.
//!
//! JSON artifacts have the shape `{ "config": …, "results": …, "meta": … }`;
//! `config` and `results` are deterministic for a given invocation, `meta`
//! holds the timestamp. CSV artifacts carry the resolved config as a single
//! leading `#` comment line, then a mandatory header row; rows are
//! newline-terminated with `.` as the decimal separator.

use std::path::Path;

use serde::Serialize;
use serde_json::json;

use homodyne_core::montecarlo::{BatchStatistics, PolicyComparison};

/// Environment variable supplying the default output directory.
pub const OUT_DIR_ENV: &str = "HOMODYNE_OUT_DIR";

fn unix_time() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn json_artifact<C: Serialize, R: Serialize>(
    path: &Path,
    config: &C,
    results: &R,
) -> std::io::Result<()> {
    let artifact = json!({
        "config": config,
        "results": results,
        "meta": {
            "unix_time": unix_time(),
            "generator": concat!("homodyne ", env!("CARGO_PKG_VERSION")),
        },
    });
    let mut text = serde_json::to_string_pretty(&artifact)?;
    text.push('\n');
    std::fs::write(path, text)
}

pub fn csv_artifact<C: Serialize>(
    path: &Path,
    config: &C,
    rows: &[String],
) -> std::io::Result<()> {
    let mut text = format!("# config: {}\n", serde_json::to_string(config)?);
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(path, text)
}

pub fn batch_csv_header() -> String {
    "ensemble,policy,n_trajectories,mean_gain_bits,std_gain_bits,ci_half_width_bits".to_string()
}

pub fn batch_csv_row(stats: &BatchStatistics) -> String {
    format!(
        "{},{},{},{},{},{}",
        stats.config.ensemble,
        stats.config.policy.name(),
        stats.n_trajectories,
        stats.mean_gain,
        stats.std_gain,
        stats.ci_half_width
    )
}

pub fn table1_csv_header() -> String {
    "ensemble,mean_photon,i1_bits,chi_bits,policy,mean_gain_bits,std_gain_bits,ci_half_width_bits,n_trajectories"
        .to_string()
}

pub fn table1_csv_rows(report: &PolicyComparison) -> Vec<String> {
    report
        .policies
        .iter()
        .map(|b| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                report.ensemble,
                report.mean_photon_number,
                report.heterodyne_capacity,
                report.holevo_information,
                b.config.policy.name(),
                b.mean_gain,
                b.std_gain,
                b.ci_half_width,
                b.n_trajectories
            )
        })
        .collect()
}

/// Renders the comparison reports as an aligned text table: one column per
/// ensemble, reference rows first, then one row per policy with its
/// confidence interval.
pub fn render_table1(reports: &[PolicyComparison]) -> String {
    let mut out = String::new();
    let width = 16;
    out.push_str(&format!("{:<18}", "quantity"));
    for r in reports {
        out.push_str(&format!("{:>width$}", r.ensemble));
    }
    out.push('\n');

    let mut push_row = |label: &str, cells: Vec<String>| {
        out.push_str(&format!("{label:<18}"));
        for c in cells {
            out.push_str(&format!("{c:>width$}"));
        }
        out.push('\n');
    };

    push_row(
        "<n>",
        reports
            .iter()
            .map(|r| format!("{:.3}", r.mean_photon_number))
            .collect(),
    );
    push_row(
        "I1(<n>), bits",
        reports
            .iter()
            .map(|r| format!("{:.3}", r.heterodyne_capacity))
            .collect(),
    );
    push_row(
        "chi(E), bits",
        reports
            .iter()
            .map(|r| format!("{:.3}", r.holevo_information))
            .collect(),
    );
    for (i, label) in ["heterodyne", "wiseman", "lmmi"].iter().enumerate() {
        push_row(
            &format!("{label}, bits"),
            reports
                .iter()
                .map(|r| {
                    let b = &r.policies[i];
                    format!("{:.3}±{:.3}", b.mean_gain, b.ci_half_width)
                })
                .collect(),
        );
    }
    out
}
