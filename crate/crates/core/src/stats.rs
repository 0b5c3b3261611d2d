//! Two-sample group statistics.
//!
//! Student's pooled-variance t-test by default, Welch's unequal-variance
//! test on request. p-values come from the regularized incomplete beta
//! function (continued fraction, modified Lentz). Effect size is
//! `eta^2 = t^2 / (t^2 + df)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{FrameMeta, GradientTotals, Group, GroupComparison, Metric, Site};

const CF_TOLERANCE: f64 = 1e-10;
const CF_MAX_ITER: usize = 500;
const TINY: f64 = 1e-300;

/// Regularized incomplete beta `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    // The continued fraction converges fast for x < (a + 1) / (a + b + 2).
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
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
    for m in 1..=CF_MAX_ITER {
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
        if (del - 1.0).abs() < CF_TOLERANCE {
            break;
        }
    }
    h
}

/// Two-tailed p-value of Student's t distribution.
pub fn t_two_tailed_p(t: f64, df: f64) -> f64 {
    if t.is_nan() || df.is_nan() || df <= 0.0 {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5).clamp(0.0, 1.0)
}

/// `t` such that the two-tailed p-value equals `alpha`.
pub fn t_critical(alpha: f64, df: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while t_two_tailed_p(hi, df) > alpha {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_two_tailed_p(mid, df) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Outcome of [`group_compare`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSampleTest {
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: f64,
    pub df: f64,
    pub p_two_tailed: f64,
    pub eta_squared: f64,
    pub degenerate: bool,
}

/// Compares group `a` against group `b`. `t > 0` means `a` has the larger mean.
pub fn group_compare(a: &[f64], b: &[f64], welch: bool) -> Result<TwoSampleTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mean_a, var_a) = mean_var(a);
    let (mean_b, var_b) = mean_var(b);
    let pooled_df = na + nb - 2.0;

    if var_a == 0.0 && var_b == 0.0 {
        if mean_a != mean_b {
            return Err(Error::ZeroVariance);
        }
        return Ok(TwoSampleTest {
            mean_a,
            mean_b,
            t: 0.0,
            df: pooled_df,
            p_two_tailed: 1.0,
            eta_squared: 0.0,
            degenerate: true,
        });
    }

    let (se, df) = if welch {
        let (qa, qb) = (var_a / na, var_b / nb);
        let se2 = qa + qb;
        let df = se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
        (libm::sqrt(se2), df)
    } else {
        let sp2 = ((na - 1.0) * var_a + (nb - 1.0) * var_b) / pooled_df;
        (libm::sqrt(sp2 * (1.0 / na + 1.0 / nb)), pooled_df)
    };
    let t = (mean_a - mean_b) / se;
    let t2 = t * t;
    Ok(TwoSampleTest {
        mean_a,
        mean_b,
        t,
        df,
        p_two_tailed: t_two_tailed_p(t, df),
        eta_squared: t2 / (t2 + df),
        degenerate: false,
    })
}

/// Mean and 95% confidence half-width `t_{0.975, n-1} * s / sqrt(n)`.
pub fn ci95(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InsufficientData);
    }
    let n = values.len() as f64;
    let (mean, var) = mean_var(values);
    if var == 0.0 {
        return Ok((mean, 0.0));
    }
    let half = t_critical(0.05, n - 1.0) * libm::sqrt(var / n);
    Ok((mean, half))
}

/// One site/metric row of a cohort report.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortRow {
    pub site: Site,
    pub metric: Metric,
    pub n_a: usize,
    pub n_b: usize,
    pub outcome: Result<GroupComparison>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CohortReport {
    pub rows: Vec<CohortRow>,
    /// Sites with frames from only one group.
    pub skipped_sites: Vec<Site>,
}

/// Per-site, per-metric comparison of NonUlcerated (group `a`) against
/// Ulcerated (group `b`).
///
/// Every frame is an independent observation. Frames whose metric is
/// undefined are left out of that metric. Sites with no frames at all are
/// omitted silently; sites with only one group are listed in
/// `skipped_sites`.
pub fn cohort_analysis(records: &[(FrameMeta, GradientTotals)], welch: bool) -> CohortReport {
    let mut report = CohortReport::default();
    for site in Site::ALL {
        let at_site: Vec<_> = records.iter().filter(|(m, _)| m.site == site).collect();
        if at_site.is_empty() {
            continue;
        }
        let has = |g: Group| at_site.iter().any(|(m, _)| m.group == g);
        if !has(Group::NonUlcerated) || !has(Group::Ulcerated) {
            report.skipped_sites.push(site);
            continue;
        }
        for metric in Metric::ALL {
            let collect = |g: Group| -> Vec<f64> {
                at_site
                    .iter()
                    .filter(|(m, _)| m.group == g)
                    .filter_map(|(_, t)| t.get(metric))
                    .collect()
            };
            let a = collect(Group::NonUlcerated);
            let b = collect(Group::Ulcerated);
            let outcome = compare_row(site, metric, &a, &b, welch);
            report.rows.push(CohortRow {
                site,
                metric,
                n_a: a.len(),
                n_b: b.len(),
                outcome,
            });
        }
    }
    report
}

fn compare_row(site: Site, metric: Metric, a: &[f64], b: &[f64], welch: bool) -> Result<GroupComparison> {
    let test = group_compare(a, b, welch)?;
    let (_, ci95_a) = ci95(a)?;
    let (_, ci95_b) = ci95(b)?;
    Ok(GroupComparison {
        site,
        metric,
        n_a: a.len(),
        n_b: b.len(),
        mean_a: test.mean_a,
        mean_b: test.mean_b,
        ci95_a,
        ci95_b,
        t: test.t,
        df: test.df,
        p_two_tailed: test.p_two_tailed,
        eta_squared: test.eta_squared,
        degenerate: test.degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_groups() {
        let r = group_compare(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], false).unwrap();
        assert_eq!(r.t, 0.0);
        assert_abs_diff_eq!(r.p_two_tailed, 1.0, epsilon = 1e-12);
        assert_eq!(r.eta_squared, 0.0);
        assert!(!r.degenerate);
    }

    #[test]
    fn pooled_hand_case() {
        let r = group_compare(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0, 5.0, 6.0], false).unwrap();
        // t = -2 / sqrt(5/3 * 1/2)
        assert_abs_diff_eq!(r.t, -2.0 / libm::sqrt(5.0 / 6.0), epsilon = 1e-12);
        assert_eq!(r.df, 6.0);
        assert_abs_diff_eq!(r.p_two_tailed, 0.0707, epsilon = 1e-3);
        assert_abs_diff_eq!(r.eta_squared, 4.8 / 10.8, epsilon = 1e-12);
        let s = group_compare(&[3.0, 4.0, 5.0, 6.0], &[1.0, 2.0, 3.0, 4.0], false).unwrap();
        assert_eq!(s.t, -r.t);
        assert_eq!(s.p_two_tailed, r.p_two_tailed);
        assert_eq!(s.eta_squared, r.eta_squared);
    }

    #[test]
    fn welch_equal_sizes_equal_variance_matches_pooled_t() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [3.0, 4.0, 5.0, 6.0];
        let p = group_compare(&a, &b, false).unwrap();
        let w = group_compare(&a, &b, true).unwrap();
        assert_abs_diff_eq!(p.t, w.t, epsilon = 1e-12);
        assert_abs_diff_eq!(w.df, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn welch_df_unequal() {
        // Hand computation: qa = 1/3 * ... see below.
        let a = [1.0, 2.0, 3.0];
        let b = [10.0, 20.0, 30.0, 40.0, 50.0];
        let w = group_compare(&a, &b, true).unwrap();
        let qa: f64 = 1.0 / 3.0;
        let qb: f64 = 250.0 / 5.0;
        let df = (qa + qb) * (qa + qb) / (qa * qa / 2.0 + qb * qb / 4.0);
        assert_abs_diff_eq!(w.df, df, epsilon = 1e-9);
        assert_abs_diff_eq!(w.t, (2.0 - 30.0) / libm::sqrt(qa + qb), epsilon = 1e-12);
    }

    #[test]
    fn constant_equal_groups_are_degenerate() {
        let r = group_compare(&[2.0, 2.0], &[2.0, 2.0, 2.0], false).unwrap();
        assert!(r.degenerate);
        assert_eq!((r.t, r.p_two_tailed), (0.0, 1.0));
        assert_eq!(
            group_compare(&[2.0, 2.0], &[3.0, 3.0], false),
            Err(Error::ZeroVariance)
        );
    }

    #[test]
    fn too_few_observations() {
        assert_eq!(group_compare(&[1.0], &[1.0, 2.0], false), Err(Error::InsufficientData));
        assert_eq!(ci95(&[1.0]), Err(Error::InsufficientData));
    }

    #[test]
    fn ci_zero_variance() {
        assert_eq!(ci95(&[5.0; 4]).unwrap(), (5.0, 0.0));
    }

    #[test]
    fn ci_two_points() {
        let (m, h) = ci95(&[0.0, 2.0]).unwrap();
        assert_eq!(m, 1.0);
        // t_{0.975,1} * sqrt(2) / sqrt(2)
        assert_abs_diff_eq!(h, 12.706, epsilon = 5e-4);
    }

    #[test]
    fn table_points() {
        for (df, t) in [(1.0, 12.706), (10.0, 2.228), (30.0, 2.042)] {
            assert_abs_diff_eq!(t_two_tailed_p(t, df), 0.05, epsilon = 5e-4);
        }
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x ; I_x(a, 1) = x^a ; I_x(1, b) = 1 - (1-x)^b
        for &x in &[0.1, 0.37, 0.5, 0.92] {
            assert_abs_diff_eq!(regularized_incomplete_beta(x, 1.0, 1.0), x, epsilon = 1e-12);
            assert_abs_diff_eq!(regularized_incomplete_beta(x, 3.0, 1.0), x * x * x, epsilon = 1e-12);
            assert_abs_diff_eq!(
                regularized_incomplete_beta(x, 1.0, 4.0),
                1.0 - libm::pow(1.0 - x, 4.0),
                epsilon = 1e-12
            );
        }
        assert_eq!(regularized_incomplete_beta(0.0, 2.0, 3.0), 0.0);
        assert_eq!(regularized_incomplete_beta(1.0, 2.0, 3.0), 1.0);
    }

    #[test]
    fn t_with_one_df_is_cauchy() {
        // p = 1 - 2 atan(t) / pi
        for &t in &[0.3, 1.0, 4.0, 30.0] {
            let expected = 1.0 - 2.0 * libm::atan(t) / core::f64::consts::PI;
            assert_abs_diff_eq!(t_two_tailed_p(t, 1.0), expected, epsilon = 1e-10);
        }
    }

    fn meta(site: Site, group: Group, i: u32) -> FrameMeta {
        FrameMeta {
            subject_id: i.to_string(),
            site,
            group,
            frame_index: i,
        }
    }

    fn totals(v: f64) -> GradientTotals {
        GradientTotals {
            gx: Some(v),
            gy: Some(v),
            gr: Some(v),
        }
    }

    #[test]
    fn single_group_site_skipped() {
        let mut records = vec![];
        for i in 0..4 {
            records.push((meta(Site::LeftHeel, Group::NonUlcerated, i), totals(i as f64)));
            records.push((meta(Site::LeftHeel, Group::Ulcerated, i), totals(i as f64 + 1.0)));
            records.push((meta(Site::RightHeel, Group::NonUlcerated, i), totals(i as f64)));
        }
        let report = cohort_analysis(&records, false);
        assert_eq!(report.skipped_sites, [Site::RightHeel]);
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows.iter().all(|r| r.site == Site::LeftHeel));
    }

    #[test]
    fn identical_value_lists_give_zero_t() {
        let mut records = vec![];
        for i in 0..5 {
            records.push((meta(Site::LeftForefoot, Group::NonUlcerated, i), totals(i as f64 * 0.1)));
            records.push((meta(Site::LeftForefoot, Group::Ulcerated, i), totals(i as f64 * 0.1)));
        }
        let report = cohort_analysis(&records, false);
        assert_eq!(report.rows.len(), 3);
        for row in &report.rows {
            assert_eq!(row.outcome.as_ref().unwrap().t, 0.0);
        }
    }

    #[test]
    fn per_row_errors_are_recorded() {
        let records = vec![
            (meta(Site::LeftForefoot, Group::NonUlcerated, 0), totals(1.0)),
            (meta(Site::LeftForefoot, Group::NonUlcerated, 1), totals(2.0)),
            (meta(Site::LeftForefoot, Group::Ulcerated, 0), totals(1.0)),
        ];
        let report = cohort_analysis(&records, false);
        assert!(report.rows.iter().all(|r| r.outcome == Err(Error::InsufficientData)));
    }
}
