//! Plain SVG charts: PDI timeline and populist volume by speech segment.

use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use popdisc_core::corpus::Campaign;
use popdisc_core::scoring::{ScoreConfig, ScoreRow};
use popdisc_core::stats::StatRow;

use crate::analyze::{densities, read_rows, BIN_NAMES, PV_TYPES};
use crate::config::{require_path, RunConfig};
use crate::error::{CliError, CliResult};
use crate::{Metric, PlotArgs};

const W: f64 = 800.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 5] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#888888"];

fn campaign_color(c: Option<Campaign>) -> &'static str {
    match c {
        Some(Campaign::Primaries2016) => COLORS[0],
        Some(Campaign::Election2016) => COLORS[1],
        Some(Campaign::Election2020) => COLORS[2],
        Some(Campaign::Election2024) => COLORS[3],
        _ => COLORS[4],
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title)).unwrap();
    writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{y}" x2="{x}" y2="{y}" stroke="black"/><line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{y}" stroke="black"/>"#,
        x = W - MARGIN,
        y = H - MARGIN
    )
    .unwrap();
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn y_axis(s: &mut String, max: f64) {
    for i in 0..=4 {
        let v = max * i as f64 / 4.0;
        let y = H - MARGIN - (H - 2.0 * MARGIN) * i as f64 / 4.0;
        writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
            MARGIN - 4.0,
            y + 4.0
        )
        .unwrap();
    }
}

fn nice_max(v: f64) -> f64 {
    if v <= 0.0 || !v.is_finite() {
        1.0
    } else {
        v * 1.1
    }
}

/// Scatter of the speech metric over time, coloured by campaign.
pub fn timeline_svg(rows: &[ScoreRow], metric: Metric) -> Option<String> {
    let points: Vec<(NaiveDate, f64, Option<Campaign>)> = rows
        .iter()
        .filter_map(|r| {
            let v = match metric {
                Metric::Pdi => r.pdi,
                Metric::Wpdi => r.wpdi,
            };
            r.date.map(|d| (d, v, r.campaign()))
        })
        .collect();
    if points.is_empty() {
        return None;
    }
    let first = points.iter().map(|p| p.0).min().unwrap();
    let last = points.iter().map(|p| p.0).max().unwrap();
    let span = ((last - first).num_days().max(1)) as f64;
    let ymax = nice_max(points.iter().map(|p| p.1).fold(0.0, f64::max));
    let name = match metric {
        Metric::Pdi => "PDI",
        Metric::Wpdi => "WPDI",
    };
    let mut s = header(&format!("{name} per speech"));
    y_axis(&mut s, ymax);
    let px = |d: NaiveDate| MARGIN + (W - 2.0 * MARGIN) * (d - first).num_days() as f64 / span;
    let py = |v: f64| H - MARGIN - (H - 2.0 * MARGIN) * v / ymax;
    for (d, v, c) in &points {
        writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{}" fill-opacity="0.7"/>"#,
            px(*d),
            py(*v),
            campaign_color(*c)
        )
        .unwrap();
    }
    writeln!(s, r#"<text x="{MARGIN}" y="{}">{first}</text>"#, H - MARGIN + 16.0).unwrap();
    writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{last}</text>"#,
        W - MARGIN,
        H - MARGIN + 16.0
    )
    .unwrap();
    for (i, c) in Campaign::PERIODS.iter().enumerate() {
        let y = MARGIN + 14.0 * i as f64;
        writeln!(
            s,
            r#"<circle cx="{}" cy="{y}" r="4" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            W - 150.0,
            campaign_color(Some(*c)),
            W - 140.0,
            y + 4.0,
            c.display_name()
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Some(s)
}

fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else {
        "*"
    }
}

/// Mean density per segment for each populism type, with significant
/// pairwise differences listed above each group.
pub fn bins_svg(rows: &[ScoreRow], stats: &[StatRow], cfg: &ScoreConfig) -> Option<String> {
    let means: Vec<Option<[f64; 3]>> = (0..3)
        .map(|k| {
            let d = densities(rows, k, cfg);
            if d.is_empty() {
                return None;
            }
            let mut m = [0.0; 3];
            for v in &d {
                for b in 0..3 {
                    m[b] += v[b] / d.len() as f64;
                }
            }
            Some(m)
        })
        .collect();
    if means.iter().all(Option::is_none) {
        return None;
    }
    let ymax = nice_max(means.iter().flatten().flat_map(|m| m.iter().copied()).fold(0.0, f64::max));
    let mut s = header("Populist volume density by speech segment");
    y_axis(&mut s, ymax);
    let group_w = (W - 2.0 * MARGIN) / 3.0;
    let bar_w = group_w / 4.0;
    for (k, m) in means.iter().enumerate() {
        let x0 = MARGIN + group_w * k as f64 + bar_w / 2.0;
        writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + 1.5 * bar_w,
            H - MARGIN + 30.0,
            PV_TYPES[k]
        )
        .unwrap();
        let Some(m) = m else { continue };
        for b in 0..3 {
            let h = (H - 2.0 * MARGIN) * m[b] / ymax;
            writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="{}"/><text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
                x0 + bar_w * b as f64,
                H - MARGIN - h,
                bar_w * 0.9,
                COLORS[b],
                x0 + bar_w * (b as f64 + 0.45),
                H - MARGIN + 14.0,
                BIN_NAMES[b]
            )
            .unwrap();
        }
        let prefix = format!("{}: ", PV_TYPES[k]);
        let sig = stats
            .iter()
            .filter(|r| r.comparison.starts_with(&prefix) && r.significant_at_bonferroni == Some(true));
        for (i, r) in sig.enumerate() {
            writeln!(
                s,
                r#"<text x="{:.1}" y="{}" text-anchor="middle">{} {}</text>"#,
                x0 + 1.5 * bar_w,
                MARGIN + 12.0 * i as f64,
                escape(&r.comparison[prefix.len()..]),
                stars(r.p)
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    Some(s)
}

pub fn read_stats(path: &Path) -> CliResult<Vec<StatRow>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    Ok(r.deserialize().collect::<Result<Vec<StatRow>, _>>()?)
}

fn write(path: PathBuf, body: &str) -> CliResult<()> {
    std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn run(cfg: &RunConfig, args: PlotArgs) -> CliResult<()> {
    let path = require_path(args.scores, &cfg.paths.scores, "score table")?;
    let rows = read_rows(&path)?;
    if rows.is_empty() {
        return Err(CliError::input("empty_input", format!("{} has no rows", path.display())));
    }
    let stats = match args.stats.or_else(|| cfg.paths.stats.clone()) {
        Some(p) => read_stats(&p)?,
        None => Vec::new(),
    };
    let timeline = timeline_svg(&rows, args.metric);
    let bins = bins_svg(&rows, &stats, &cfg.score);
    if timeline.is_none() && bins.is_none() {
        return Err(CliError::input("empty_input", "no dated speeches and no populist volume to plot"));
    }
    let dir = args
        .out_dir
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    if let Some(t) = timeline {
        write(dir.join("pdi_timeline.svg"), &t)?;
    }
    if let Some(b) = bins {
        write(dir.join("pv_bins.svg"), &b)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(date: Option<&str>, pv: Option<[f64; 3]>) -> ScoreRow {
        ScoreRow {
            speech_id: "s".into(),
            date: date.map(|d| d.parse().unwrap()),
            campaign: Some("Election2020".into()),
            state: None,
            n_scored: 3,
            pdi: 50.0,
            wpdi: 60.0,
            pv_open: pv.map(|p| p[0]),
            pv_body: pv.map(|p| p[1]),
            pv_close: pv.map(|p| p[2]),
            adjacency_pairs: 0,
            swing_ballotpedia: None,
            swing_attention: None,
            pv_ae_open: None,
            pv_ae_body: None,
            pv_ae_close: None,
            pv_pc_open: None,
            pv_pc_body: None,
            pv_pc_close: None,
            adjacency_sentences: 0,
            n_sentences: 3,
        }
    }

    #[test]
    fn timeline_needs_dates() {
        assert!(timeline_svg(&[row(None, None)], Metric::Pdi).is_none());
        let svg = timeline_svg(&[row(Some("2020-01-01"), None)], Metric::Pdi).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<circle").count(), 5);
    }

    #[test]
    fn bins_lists_significant_rows() {
        let rows = [row(None, Some([0.5, 0.3, 0.2]))];
        let stats = [StatRow {
            comparison: "overall: opening vs body".into(),
            statistic: 5.0,
            dof: "9".into(),
            p: 0.004,
            effect: 1.0,
            mean_diff: Some(1.0),
            significant_at_bonferroni: Some(true),
        }];
        let svg = bins_svg(&rows, &stats, &ScoreConfig::default()).unwrap();
        assert!(svg.contains("opening vs body **"));
        assert_eq!(svg.matches("<rect x=").count(), 3);
        assert!(bins_svg(&[row(None, None)], &[], &ScoreConfig::default()).is_none());
    }
}
