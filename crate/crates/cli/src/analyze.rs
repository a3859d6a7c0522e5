//! Grouped significance tests over a speech score table.

use std::fs::File;
use std::path::Path;

use popdisc_core::corpus::Campaign;
use popdisc_core::scoring::{density_reweight, read_scores_csv, ScoreConfig, ScoreRow};
use popdisc_core::stats::{
    bonferroni, one_way_anova, pairwise_t_tests, pearson, t_test_independent, t_test_paired, write_stats_csv,
    StatRow, TTestVariant,
};

use crate::commands::with_output;
use crate::config::{require_path, RunConfig, DEFAULT_ALPHA};
use crate::error::{CliError, CliResult};
use crate::{AnalyzeArgs, Grouping, Metric};

pub const BIN_NAMES: [&str; 3] = ["opening", "body", "closing"];
pub const PV_TYPES: [&str; 3] = ["overall", "AE", "PC"];

pub fn read_rows(path: &Path) -> CliResult<Vec<ScoreRow>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(read_scores_csv(file)?)
}

fn metric_of(row: &ScoreRow, metric: Metric) -> f64 {
    match metric {
        Metric::Pdi => row.pdi,
        Metric::Wpdi => row.wpdi,
    }
}

/// Speech values per campaign, in chronological campaign order, skipping
/// speeches outside every campaign window.
pub fn campaign_groups(rows: &[ScoreRow], metric: Metric) -> Vec<(Campaign, Vec<f64>)> {
    Campaign::PERIODS
        .iter()
        .map(|c| {
            let vals = rows
                .iter()
                .filter(|r| r.campaign() == Some(*c))
                .map(|r| metric_of(r, metric))
                .collect::<Vec<_>>();
            (*c, vals)
        })
        .filter(|(_, v)| !v.is_empty())
        .collect()
}

fn with_bonferroni(rows: &mut [StatRow], alpha: f64) -> CliResult<f64> {
    let ps: Vec<f64> = rows.iter().map(|r| r.p).collect();
    let b = bonferroni(&ps, alpha)?;
    for (r, s) in rows.iter_mut().zip(b.significant) {
        r.significant_at_bonferroni = Some(s);
    }
    Ok(b.threshold)
}

pub fn campaign(rows: &[ScoreRow], metric: Metric, variant: TTestVariant, alpha: f64) -> CliResult<Vec<StatRow>> {
    let groups = campaign_groups(rows, metric);
    if groups.len() < 2 {
        return Err(CliError::input(
            "degenerate",
            format!("campaign grouping needs two campaigns with speeches, found {}", groups.len()),
        ));
    }
    for (c, v) in &groups {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        eprintln!("{}: n={} mean={mean:.3}", c.display_name(), v.len());
    }
    let values: Vec<&[f64]> = groups.iter().map(|(_, v)| v.as_slice()).collect();
    let anova = one_way_anova(&values)?;
    let mut out = vec![StatRow::new("ANOVA", &anova, Some(anova.p_value < alpha))];
    let named: Vec<(String, &[f64])> = groups
        .iter()
        .map(|(c, v)| (c.display_name().to_string(), v.as_slice()))
        .collect();
    let mut pairs: Vec<StatRow> = pairwise_t_tests(&named, variant)?
        .iter()
        .map(|(name, r)| StatRow::new(name.clone(), r, None))
        .collect();
    let threshold = with_bonferroni(&mut pairs, alpha)?;
    eprintln!("bonferroni threshold {threshold}");
    out.extend(pairs);

    let pdi: Vec<f64> = rows.iter().map(|r| r.pdi).collect();
    let wpdi: Vec<f64> = rows.iter().map(|r| r.wpdi).collect();
    if let Ok(r) = pearson(&pdi, &wpdi) {
        eprintln!("pdi~wpdi pearson r = {r:.4}");
    }
    Ok(out)
}

pub fn swing(
    rows: &[ScoreRow],
    metric: Metric,
    variant: TTestVariant,
    alpha: f64,
    attention: bool,
) -> CliResult<Vec<StatRow>> {
    let mut out = Vec::new();
    for c in Campaign::PERIODS {
        let flag = |r: &ScoreRow| if attention { r.swing_attention } else { r.swing_ballotpedia };
        let in_campaign = rows.iter().filter(|r| r.campaign() == Some(c));
        let (mut yes, mut no) = (Vec::new(), Vec::new());
        for r in in_campaign {
            match flag(r) {
                Some(true) => yes.push(metric_of(r, metric)),
                Some(false) => no.push(metric_of(r, metric)),
                None => {}
            }
        }
        if yes.len() < 2 || no.len() < 2 {
            log::info!(
                "{}: skipped ({} swing, {} non-swing speeches)",
                c.display_name(),
                yes.len(),
                no.len()
            );
            continue;
        }
        let r = t_test_independent(&yes, &no, variant)?;
        out.push(StatRow::new(format!("{}: swing vs non-swing", c.display_name()), &r, None));
    }
    if out.is_empty() {
        return Err(CliError::input(
            "degenerate",
            "no campaign has two swing and two non-swing speeches",
        ));
    }
    let threshold = with_bonferroni(&mut out, alpha)?;
    eprintln!("bonferroni threshold {threshold}");
    Ok(out)
}

/// Density-reweighted PV per speech for one populism type.
pub fn densities(rows: &[ScoreRow], kind: usize, score_cfg: &ScoreConfig) -> Vec<Vec<f64>> {
    rows.iter()
        .filter_map(|r| match kind {
            0 => r.pv(),
            1 => r.pv_ae(),
            _ => r.pv_pc(),
        })
        .map(|pv| density_reweight(&pv, score_cfg))
        .collect()
}

pub fn bins(rows: &[ScoreRow], alpha: f64, score_cfg: &ScoreConfig) -> CliResult<Vec<StatRow>> {
    if score_cfg.bin_scheme.len() != 3 {
        return Err(CliError::input("invalid_config", "bins grouping needs a 3-bin scheme"));
    }
    let mut out = Vec::new();
    for (kind, name) in PV_TYPES.iter().enumerate() {
        let d = densities(rows, kind, score_cfg);
        if d.len() < 2 {
            return Err(CliError::input(
                "degenerate",
                format!("{name}: fewer than two speeches with defined populist volume"),
            ));
        }
        let col = |b: usize| d.iter().map(|v| v[b]).collect::<Vec<f64>>();
        let means: Vec<f64> = (0..3).map(|b| col(b).iter().sum::<f64>() / d.len() as f64).collect();
        eprintln!(
            "{name}: n={} mean density opening {:.3} body {:.3} closing {:.3}",
            d.len(),
            means[0],
            means[1],
            means[2]
        );
        let mut rows_k = Vec::new();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let r = t_test_paired(&col(a), &col(b))?;
            rows_k.push(StatRow::new(
                format!("{name}: {} vs {}", BIN_NAMES[a], BIN_NAMES[b]),
                &r,
                None,
            ));
        }
        with_bonferroni(&mut rows_k, alpha)?;
        out.extend(rows_k);
    }
    Ok(out)
}

pub fn run(cfg: &RunConfig, args: AnalyzeArgs) -> CliResult<()> {
    let path = require_path(args.scores, &cfg.paths.scores, "score table")?;
    let rows = read_rows(&path)?;
    if rows.is_empty() {
        return Err(CliError::input("empty_input", format!("{} has no rows", path.display())));
    }
    let alpha = args.alpha.or(cfg.stats.alpha).unwrap_or(DEFAULT_ALPHA);
    let variant = args.t_test.or(cfg.stats.t_test).unwrap_or_default();
    let stats = match args.grouping {
        Grouping::Campaign => campaign(&rows, args.metric, variant, alpha)?,
        Grouping::SwingBallotpedia => swing(&rows, args.metric, variant, alpha, false)?,
        Grouping::SwingAttention => swing(&rows, args.metric, variant, alpha, true)?,
        Grouping::Bins => bins(&rows, alpha, &cfg.score)?,
    };
    let name = match args.grouping {
        Grouping::Campaign => "stats_campaign.csv",
        Grouping::SwingBallotpedia => "stats_swing_ballotpedia.csv",
        Grouping::SwingAttention => "stats_swing_attention.csv",
        Grouping::Bins => "stats_bins.csv",
    };
    let out = cfg.output(args.output, name);
    with_output(out.as_deref(), |w| Ok(write_stats_csv(&stats, w)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, campaign: Campaign, pdi: f64, swing: Option<bool>, pv: Option<[f64; 3]>) -> ScoreRow {
        ScoreRow {
            speech_id: id.into(),
            date: None,
            campaign: Some(campaign.as_str().into()),
            state: None,
            n_scored: 10,
            pdi,
            wpdi: pdi * 1.1,
            pv_open: pv.map(|p| p[0]),
            pv_body: pv.map(|p| p[1]),
            pv_close: pv.map(|p| p[2]),
            adjacency_pairs: 0,
            swing_ballotpedia: swing,
            swing_attention: swing,
            pv_ae_open: pv.map(|p| p[0]),
            pv_ae_body: pv.map(|p| p[1]),
            pv_ae_close: pv.map(|p| p[2]),
            pv_pc_open: pv.map(|p| p[0]),
            pv_pc_body: pv.map(|p| p[1]),
            pv_pc_close: pv.map(|p| p[2]),
            adjacency_sentences: 0,
            n_sentences: 12,
        }
    }

    fn table() -> Vec<ScoreRow> {
        let mut rows = Vec::new();
        for (i, c) in Campaign::PERIODS.iter().enumerate() {
            for j in 0..5 {
                let pv = [0.1 + 0.02 * j as f64, 0.6, 0.3 - 0.02 * j as f64];
                rows.push(row(
                    &format!("{i}-{j}"),
                    *c,
                    (i * 3 + j) as f64,
                    Some(j % 2 == 0),
                    Some(pv),
                ));
            }
        }
        rows
    }

    #[test]
    fn campaign_shape() {
        let out = campaign(&table(), Metric::Pdi, TTestVariant::Pooled, 0.05).unwrap();
        assert_eq!(out.len(), 7);
        assert_eq!(out[0].comparison, "ANOVA");
        assert_eq!(out[0].dof, "3, 16");
        assert_eq!(out[1].comparison, "2016 Primaries vs 2016 Campaign");
        assert!(out[1..].iter().all(|r| r.significant_at_bonferroni.is_some()));
    }

    #[test]
    fn single_campaign_is_an_error() {
        let rows: Vec<ScoreRow> = table().into_iter().filter(|r| r.campaign() == Some(Campaign::Election2020)).collect();
        assert!(campaign(&rows, Metric::Pdi, TTestVariant::Pooled, 0.05).is_err());
    }

    #[test]
    fn swing_shape() {
        let out = swing(&table(), Metric::Pdi, TTestVariant::Pooled, 0.05, false).unwrap();
        assert_eq!(out.len(), 4);
        assert!(out[0].comparison.ends_with("swing vs non-swing"));
    }

    #[test]
    fn bins_shape() {
        let out = bins(&table(), 0.05, &ScoreConfig::default()).unwrap();
        assert_eq!(out.len(), 9);
        assert_eq!(out[0].comparison, "overall: opening vs body");
        assert_eq!(out[8].comparison, "PC: body vs closing");
    }
}
