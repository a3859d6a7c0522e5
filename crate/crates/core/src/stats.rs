//! Inferential statistics over speech-level samples: one-way ANOVA,
//! independent and paired t-tests, Bonferroni thresholds, Pearson
//! correlation and nominal Krippendorff's alpha.
//!
//! p-values come from the regularized incomplete beta function, evaluated
//! with a Lentz continued fraction and a Lanczos log-gamma.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::LabelSet;
use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of Student's t with `dof` degrees of freedom.
pub fn p_value_from_t(t: f64, dof: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    if !t.is_finite() {
        return 0.0;
    }
    let x = dof / (dof + t * t);
    reg_inc_beta(dof / 2.0, 0.5, x).clamp(0.0, 1.0)
}

/// Upper-tail p-value of the F distribution.
pub fn p_value_from_f(f: f64, df1: f64, df2: f64) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if !f.is_finite() {
        return 0.0;
    }
    let x = df2 / (df2 + df1 * f);
    reg_inc_beta(df2 / 2.0, df1 / 2.0, x).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dof {
    One(f64),
    Pair(f64, f64),
}

impl fmt::Display for Dof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dof::One(d) => write!(f, "{}", fmt_num(*d)),
            Dof::Pair(a, b) => write!(f, "{}, {}", fmt_num(*a), fmt_num(*b)),
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.3}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub dof: Dof,
    pub p_value: f64,
    /// Cohen's d for t-tests, eta squared for ANOVA.
    pub effect_size: f64,
    pub mean_difference: Option<f64>,
}

impl TestResult {
    /// First (or only) degrees of freedom.
    pub fn dof_value(&self) -> f64 {
        match self.dof {
            Dof::One(d) | Dof::Pair(d, _) => d,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sum of squared deviations from the mean.
fn ss(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum()
}

fn var(xs: &[f64]) -> f64 {
    ss(xs) / (xs.len() as f64 - 1.0)
}

fn check_finite(xs: &[f64], what: &str) -> Result<()> {
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate(format!("{what} contains a non-finite value")));
    }
    Ok(())
}

/// Classical fixed-effects one-way ANOVA.
pub fn one_way_anova<S: AsRef<[f64]>>(groups: &[S]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::Degenerate("ANOVA needs at least two groups".into()));
    }
    for g in groups {
        if g.as_ref().len() < 2 {
            return Err(Error::Degenerate("every ANOVA group needs two observations".into()));
        }
        check_finite(g.as_ref(), "group")?;
    }
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let grand = groups.iter().flat_map(|g| g.as_ref()).sum::<f64>() / n as f64;
    let ss_between: f64 = groups
        .iter()
        .map(|g| {
            let g = g.as_ref();
            let d = mean(g) - grand;
            g.len() as f64 * d * d
        })
        .sum();
    let ss_within: f64 = groups.iter().map(|g| ss(g.as_ref())).sum();
    let ss_total = ss_between + ss_within;
    if ss_total == 0.0 {
        return Err(Error::Degenerate("zero total variance".into()));
    }
    let k = groups.len() as f64;
    let df_b = k - 1.0;
    let df_w = n as f64 - k;
    let f = if ss_within == 0.0 {
        f64::INFINITY
    } else {
        (ss_between / df_b) / (ss_within / df_w)
    };
    Ok(TestResult {
        statistic: f,
        dof: Dof::Pair(df_b, df_w),
        p_value: p_value_from_f(f, df_b, df_w),
        effect_size: ss_between / ss_total,
        mean_difference: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TTestVariant {
    /// Student's t with pooled variance.
    #[default]
    Pooled,
    Welch,
}

impl std::str::FromStr for TTestVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pooled" | "student" => Ok(TTestVariant::Pooled),
            "welch" => Ok(TTestVariant::Welch),
            _ => Err(Error::InvalidConfig(format!("unknown t-test variant {s:?}"))),
        }
    }
}

/// Independent-samples t-test of `a` against `b`. Cohen's d uses the
/// pooled standard deviation in both variants.
pub fn t_test_independent(a: &[f64], b: &[f64], variant: TTestVariant) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Degenerate("t-test needs two observations per group".into()));
    }
    check_finite(a, "sample")?;
    check_finite(b, "sample")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (var(a), var(b));
    let diff = mean(a) - mean(b);
    let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    if pooled == 0.0 {
        return Err(Error::Degenerate("zero pooled variance".into()));
    }
    let d = diff / pooled.sqrt();
    let (t, dof) = match variant {
        TTestVariant::Pooled => (diff / (pooled * (1.0 / na + 1.0 / nb)).sqrt(), na + nb - 2.0),
        TTestVariant::Welch => {
            let (sa, sb) = (va / na, vb / nb);
            let dof = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
            (diff / (sa + sb).sqrt(), dof)
        }
    };
    Ok(TestResult {
        statistic: t,
        dof: Dof::One(dof),
        p_value: p_value_from_t(t, dof),
        effect_size: d,
        mean_difference: Some(diff),
    })
}

/// Paired t-test on `a - b`; d is mean(diff) / sd(diff). Identical samples
/// give t = 0 and p = 1; a constant nonzero difference is an error.
pub fn t_test_paired(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::Degenerate(format!(
            "paired samples differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::Degenerate("paired t-test needs two pairs".into()));
    }
    check_finite(a, "sample")?;
    check_finite(b, "sample")?;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len() as f64;
    let m = mean(&diffs);
    let sd = var(&diffs).sqrt();
    let dof = n - 1.0;
    if sd == 0.0 {
        if m == 0.0 {
            return Ok(TestResult {
                statistic: 0.0,
                dof: Dof::One(dof),
                p_value: 1.0,
                effect_size: 0.0,
                mean_difference: Some(0.0),
            });
        }
        return Err(Error::Degenerate("zero variance of paired differences".into()));
    }
    let t = m / (sd / n.sqrt());
    Ok(TestResult {
        statistic: t,
        dof: Dof::One(dof),
        p_value: p_value_from_t(t, dof),
        effect_size: m / sd,
        mean_difference: Some(m),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bonferroni {
    pub threshold: f64,
    pub significant: Vec<bool>,
}

/// Bonferroni-adjusted threshold `alpha / k` and per-test flags `p < threshold`.
pub fn bonferroni(p_values: &[f64], alpha: f64) -> Result<Bonferroni> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let threshold = alpha / p_values.len().max(1) as f64;
    Ok(Bonferroni {
        threshold,
        significant: p_values.iter().map(|p| *p < threshold).collect(),
    })
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Degenerate("pearson needs two equally long samples of length >= 2".into()));
    }
    check_finite(x, "x")?;
    check_finite(y, "y")?;
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("zero variance in correlation input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Nominal Krippendorff's alpha. `codings[annotator][item]` holds a value or
/// `None` when the annotator did not code the item.
pub fn krippendorff_alpha<T: Ord + Clone>(codings: &[Vec<Option<T>>]) -> Result<f64> {
    if codings.len() < 2 {
        return Err(Error::Degenerate("alpha needs at least two annotators".into()));
    }
    let items = codings.iter().map(Vec::len).max().unwrap_or(0);
    let mut values: BTreeMap<T, usize> = BTreeMap::new();
    for row in codings {
        for v in row.iter().flatten() {
            let next = values.len();
            values.entry(v.clone()).or_insert(next);
        }
    }
    let k = values.len();
    let mut o = vec![vec![0.0f64; k]; k];
    let mut pairable_items = 0;
    for u in 0..items {
        let codes: Vec<usize> = codings
            .iter()
            .filter_map(|row| row.get(u).cloned().flatten())
            .map(|v| values[&v])
            .collect();
        let m = codes.len();
        if m < 2 {
            continue;
        }
        pairable_items += 1;
        let w = 1.0 / (m as f64 - 1.0);
        for (i, &c) in codes.iter().enumerate() {
            for (j, &e) in codes.iter().enumerate() {
                if i != j {
                    o[c][e] += w;
                }
            }
        }
    }
    if pairable_items == 0 {
        return Err(Error::Degenerate("no item is coded by two annotators".into()));
    }
    let nc: Vec<f64> = o.iter().map(|row| row.iter().sum()).collect();
    let n: f64 = nc.iter().sum();
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for e in 0..k {
            if c != e {
                observed += o[c][e];
                expected += nc[c] * nc[e];
            }
        }
    }
    if expected == 0.0 {
        return Err(Error::Degenerate("only one value is ever coded".into()));
    }
    Ok(1.0 - (n - 1.0) * observed / expected)
}

/// Alpha over multi-label codings: the four joint states, then each
/// dimension as a binary value (`None` when a dimension never varies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelAgreement {
    pub joint: f64,
    pub anti_elitism: Option<f64>,
    pub people_centrism: Option<f64>,
}

pub fn krippendorff_alpha_labels(codings: &[Vec<Option<LabelSet>>]) -> Result<LabelAgreement> {
    let joint = krippendorff_alpha(
        &codings
            .iter()
            .map(|r| r.iter().map(|l| l.map(|l| l.code())).collect())
            .collect::<Vec<Vec<Option<usize>>>>(),
    )?;
    let dim = |f: fn(LabelSet) -> bool| {
        krippendorff_alpha(
            &codings
                .iter()
                .map(|r| r.iter().map(|l| l.map(f)).collect())
                .collect::<Vec<Vec<Option<bool>>>>(),
        )
        .ok()
    };
    Ok(LabelAgreement {
        joint,
        anti_elitism: dim(|l| l.anti_elitism),
        people_centrism: dim(|l| l.people_centrism),
    })
}

/// Pooled or Welch t-tests for every unordered pair of groups, in input order.
pub fn pairwise_t_tests<S: AsRef<[f64]>>(
    groups: &[(String, S)],
    variant: TTestVariant,
) -> Result<Vec<(String, TestResult)>> {
    let mut out = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let r = t_test_independent(groups[i].1.as_ref(), groups[j].1.as_ref(), variant)?;
            out.push((format!("{} vs {}", groups[i].0, groups[j].0), r));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub comparison: String,
    pub statistic: f64,
    pub dof: String,
    pub p: f64,
    pub effect: f64,
    pub mean_diff: Option<f64>,
    pub significant_at_bonferroni: Option<bool>,
}

impl StatRow {
    pub fn new(comparison: impl Into<String>, r: &TestResult, significant: Option<bool>) -> Self {
        StatRow {
            comparison: comparison.into(),
            statistic: r.statistic,
            dof: r.dof.to_string(),
            p: r.p_value,
            effect: r.effect_size,
            mean_diff: r.mean_difference,
            significant_at_bonferroni: significant,
        }
    }
}

pub const STAT_COLUMNS: [&str; 7] = [
    "comparison",
    "statistic",
    "dof",
    "p",
    "effect",
    "mean_diff",
    "significant_at_bonferroni",
];

pub fn write_stats_csv<W: Write>(rows: &[StatRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let err = |e: csv::Error| Error::Parse {
        line: 0,
        message: e.to_string(),
    };
    w.write_record(STAT_COLUMNS).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Tanh-sinh quadrature of `f(y, 1 - y)` on [a, b] within [0, 1]; the
    /// complement is passed separately to keep precision near 1.
    fn tanh_sinh(f: impl Fn(f64, f64) -> f64, a: f64, b: f64) -> f64 {
        let half = std::f64::consts::FRAC_PI_2;
        let h = 1.0 / 64.0;
        let c = 0.5 * (b - a);
        let mut sum = 0.0;
        let kmax = (4.5 / h) as i64;
        for k in -kmax..=kmax {
            let t = k as f64 * h;
            let u = half * t.sinh();
            let w = half * t.cosh() / u.cosh().powi(2);
            // Distance to the nearer endpoint, computed without cancellation.
            let e = c / (u.abs().exp() * u.cosh());
            let (y, comp) = if t >= 0.0 { (b - e, (1.0 - b) + e) } else { (a + e, (1.0 - a) - e) };
            if e <= 0.0 || w == 0.0 {
                continue;
            }
            sum += w * f(y, comp);
        }
        c * h * sum
    }

    /// Upper tail of Beta(a, b) above y0, by quadrature.
    fn beta_tail_oracle(a: f64, b: f64, y0: f64) -> f64 {
        let dens = |y: f64, comp: f64| ((a - 1.0) * y.ln() + (b - 1.0) * comp.ln()).exp();
        tanh_sinh(dens, y0, 1.0) / tanh_sinh(dens, 0.0, 1.0)
    }

    fn t_oracle(t: f64, dof: f64) -> f64 {
        beta_tail_oracle(0.5, dof / 2.0, t * t / (dof + t * t))
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        let fact10: f64 = (1..10).map(|i| i as f64).product();
        assert!(rel(ln_gamma(10.0), fact10.ln()) < 1e-14);
    }

    #[test]
    fn t_p_values() {
        assert_eq!(p_value_from_t(0.0, 5.0), 1.0);
        assert!((p_value_from_t(1.96, 1e6) - 0.049_999_7).abs() < 1e-4);
        assert!((p_value_from_t(2.776, 4.0) - 0.05).abs() < 1e-3);
        // Cauchy: p = 1 - 2 atan(t) / pi.
        let t: f64 = 1.7;
        let cauchy = 1.0 - 2.0 * t.atan() / std::f64::consts::PI;
        assert!(rel(p_value_from_t(t, 1.0), cauchy) < 1e-12);
        // Two dof: p = 1 - t / sqrt(t^2 + 2).
        let two = 1.0 - t / (t * t + 2.0).sqrt();
        assert!(rel(p_value_from_t(t, 2.0), two) < 1e-12);
    }

    #[test]
    fn t_p_values_match_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let dof = rng.gen_range(1..600) as f64;
            let t = rng.gen_range(0.05..5.0);
            let got = p_value_from_t(t, dof);
            let want = t_oracle(t, dof);
            assert!(rel(got, want) < 1e-9, "t={t} dof={dof}: {got} vs {want}");
        }
    }

    #[test]
    fn f_p_values_match_quadrature_and_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..25 {
            let d1 = rng.gen_range(1..8) as f64;
            let d2 = rng.gen_range(2..600) as f64;
            let f = rng.gen_range(0.1..8.0);
            let got = p_value_from_f(f, d1, d2);
            let want = beta_tail_oracle(d1 / 2.0, d2 / 2.0, d1 * f / (d1 * f + d2));
            assert!(rel(got, want) < 1e-9, "F={f} ({d1},{d2}): {got} vs {want}");
        }
        // d1 = 2: survival is (d2 / (d2 + 2 f))^(d2 / 2).
        let (f, d2) = (3.1, 17.0);
        assert!(rel(p_value_from_f(f, 2.0, d2), (d2 / (d2 + 2.0 * f)).powf(d2 / 2.0)) < 1e-12);
    }

    fn anova_oracle(groups: &[Vec<f64>]) -> (f64, f64) {
        let all: Vec<f64> = groups.iter().flatten().copied().collect();
        let grand = all.iter().sum::<f64>() / all.len() as f64;
        let ss_total: f64 = all.iter().map(|x| (x - grand).powi(2)).sum();
        let mut ss_within = 0.0;
        for g in groups {
            let m = g.iter().sum::<f64>() / g.len() as f64;
            ss_within += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
        }
        let ss_between = ss_total - ss_within;
        let k = groups.len() as f64;
        let n = all.len() as f64;
        ((ss_between / (k - 1.0)) / (ss_within / (n - k)), ss_between / ss_total)
    }

    #[test]
    fn anova_examples() {
        let r = one_way_anova(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.effect_size, 0.0);
        assert_eq!(r.p_value, 1.0);

        let groups = vec![
            vec![4.0, 5.5, 6.1, 5.0],
            vec![7.2, 8.1, 6.9, 7.7, 8.4],
            vec![3.1, 2.8, 4.0],
        ];
        let r = one_way_anova(&groups).unwrap();
        let (f, eta) = anova_oracle(&groups);
        assert!(rel(r.statistic, f) < 1e-10);
        assert!(rel(r.effect_size, eta) < 1e-10);
        assert_eq!(r.dof, Dof::Pair(2.0, 9.0));

        assert!(one_way_anova(&[vec![1.0, 1.0], vec![1.0, 1.0]]).is_err());
        assert!(one_way_anova(&[vec![1.0, 2.0]]).is_err());
        assert!(one_way_anova(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn t_test_examples() {
        let a = [0.0, 0.0, 1.0, 1.0];
        let b = [1.0, 1.0, 2.0, 2.0];
        let r = t_test_independent(&a, &b, TTestVariant::Pooled).unwrap();
        // Both variances are 1/3, so se = sqrt(1/3 * 1/2) and t = -1 / se.
        let t = -1.0 / (1.0f64 / 6.0).sqrt();
        assert!(rel(r.statistic, t) < 1e-12);
        assert_eq!(r.dof, Dof::One(6.0));
        assert!(rel(r.effect_size, -(3.0f64).sqrt()) < 1e-12);
        assert!(rel(r.p_value, t_oracle(t.abs(), 6.0)) < 1e-10);
        let w = t_test_independent(&a, &b, TTestVariant::Welch).unwrap();
        assert!(rel(w.statistic, t) < 1e-12);
        assert!(rel(w.dof_value(), 6.0) < 1e-12);

        let same = t_test_independent(&a, &a, TTestVariant::Pooled).unwrap();
        assert_eq!((same.statistic, same.effect_size, same.p_value), (0.0, 0.0, 1.0));
        assert!(t_test_independent(&[1.0, 1.0], &[2.0, 2.0], TTestVariant::Pooled).is_err());
    }

    #[test]
    fn paired_examples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = t_test_paired(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(t_test_paired(&[2.0, 3.0, 4.0, 5.0], &a).is_err());

        let b = [1.5, 1.0, 2.0, 5.0];
        // diffs: -0.5, 1, 1, -1; mean 0.125; var = (0.390625+0.765625*2+1.265625)/3.
        let r = t_test_paired(&a, &b).unwrap();
        let sd = ((0.390625 + 2.0 * 0.765625 + 1.265625) / 3.0f64).sqrt();
        assert!(rel(r.statistic, 0.125 / (sd / 2.0)) < 1e-10);
        assert!(rel(r.effect_size, 0.125 / sd) < 1e-10);
        assert_eq!(r.dof, Dof::One(3.0));
    }

    #[test]
    fn bonferroni_examples() {
        let b = bonferroni(&[0.01, 0.02, 0.3, 0.0125], 0.05).unwrap();
        assert_eq!(b.threshold, 0.0125);
        assert_eq!(b.significant, vec![true, false, false, false]);
        assert_eq!(bonferroni(&[0.04], 0.05).unwrap().threshold, 0.05);
        assert!(bonferroni(&[1.0; 5], 0.05).unwrap().significant.iter().all(|s| !s));
        assert!(bonferroni(&[0.1], 1.0).is_err());
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 4.0, 7.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert!(pearson(&x, &[1.0; 4]).is_err());
    }

    /// Alpha from all ordered pairs of pairable values.
    fn alpha_oracle(codings: &[Vec<Option<u32>>]) -> f64 {
        let items = codings[0].len();
        let mut pool = Vec::new();
        let mut d_o = 0.0;
        for u in 0..items {
            let vals: Vec<u32> = codings.iter().filter_map(|r| r[u]).collect();
            if vals.len() < 2 {
                continue;
            }
            let m = vals.len() as f64;
            for i in 0..vals.len() {
                for j in 0..vals.len() {
                    if i != j && vals[i] != vals[j] {
                        d_o += 1.0 / (m - 1.0);
                    }
                }
            }
            pool.extend(vals);
        }
        let n = pool.len() as f64;
        let mut d_e = 0.0;
        for i in 0..pool.len() {
            for j in 0..pool.len() {
                if i != j && pool[i] != pool[j] {
                    d_e += 1.0;
                }
            }
        }
        1.0 - (d_o / n) / (d_e / (n * (n - 1.0)))
    }

    #[test]
    fn alpha_reference_example() {
        // Four coders, twelve units, nominal values; alpha = 0.743.
        let rows: [[u32; 12]; 4] = [
            [1, 2, 3, 3, 2, 1, 4, 1, 2, 0, 0, 0],
            [1, 2, 3, 3, 2, 2, 4, 1, 2, 5, 0, 3],
            [0, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, 0],
            [1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, 0],
        ];
        let codings: Vec<Vec<Option<u32>>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| (v != 0).then_some(v)).collect())
            .collect();
        let a = krippendorff_alpha(&codings).unwrap();
        assert!((a - 0.743).abs() < 5e-4, "{a}");
        assert!((a - alpha_oracle(&codings)).abs() < 1e-12);
    }

    #[test]
    fn alpha_small_cases() {
        let perfect = vec![vec![Some(1), Some(2), Some(1)], vec![Some(1), Some(2), Some(1)]];
        assert_eq!(krippendorff_alpha(&perfect).unwrap(), 1.0);

        // Systematic disagreement on two values with balanced margins.
        let flip = vec![vec![Some(0u32), Some(1)], vec![Some(1), Some(0)]];
        let a = krippendorff_alpha(&flip).unwrap();
        assert!((a - alpha_oracle(&flip)).abs() < 1e-12);
        assert!((a - (-0.5)).abs() < 1e-12);

        let single = vec![vec![Some(1), None], vec![None, Some(2)]];
        assert!(krippendorff_alpha(&single).is_err());
        assert!(krippendorff_alpha(&[vec![Some(1), Some(1)], vec![Some(1), Some(1)]]).is_err());
    }

    #[test]
    fn alpha_random_codings_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let codings: Vec<Vec<Option<u32>>> = (0..2)
            .map(|_| (0..10_000).map(|_| Some(rng.gen_range(0..4))).collect())
            .collect();
        let a = krippendorff_alpha(&codings).unwrap();
        assert!(a.abs() < 0.05, "{a}");
    }

    #[test]
    fn alpha_on_label_sets() {
        let ann = vec![
            vec![Some(LabelSet::AE), Some(LabelSet::NEUTRAL), Some(LabelSet::BOTH), Some(LabelSet::PC)],
            vec![Some(LabelSet::AE), Some(LabelSet::NEUTRAL), Some(LabelSet::AE), Some(LabelSet::PC)],
        ];
        let r = krippendorff_alpha_labels(&ann).unwrap();
        assert!(r.joint < 1.0 && r.joint > 0.0);
        assert_eq!(r.anti_elitism, Some(1.0));
        assert!(r.people_centrism.unwrap() < 1.0);
    }

    #[test]
    fn stats_csv_shape() {
        let r = t_test_independent(&[0.0, 0.0, 1.0, 1.0], &[1.0, 1.0, 2.0, 2.0], TTestVariant::Pooled).unwrap();
        let anova = one_way_anova(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 7.0]]).unwrap();
        let mut buf = Vec::new();
        write_stats_csv(
            &[StatRow::new("a vs b", &r, Some(true)), StatRow::new("anova", &anova, None)],
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], STAT_COLUMNS.join(","));
        assert!(lines[1].starts_with("a vs b,"));
        assert!(lines[1].contains(",6,") && lines[1].ends_with(",-1.0,true"));
        assert!(lines[2].contains(",\"1, 4\","));
        assert!(lines[2].ends_with(','));
    }
}
