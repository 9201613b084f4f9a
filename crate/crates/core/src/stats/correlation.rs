use std::collections::BTreeMap;

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{average_ranks, check_finite, Method, StatResult};
use crate::error::{Error, Result};
use crate::metrics::FileMetricsRow;

/// Largest sample for which [`spearman_exact`] enumerates permutations.
pub const SPEARMAN_EXACT_MAX_N: usize = 10;

fn validate_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!(
            "vectors differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::Validation(format!(
            "correlation needs at least 3 observations, got {}",
            x.len()
        )));
    }
    check_finite("x", x)?;
    check_finite("y", y)
}

fn product_moment(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate(
            "correlation undefined for a vector with zero variance".into(),
        ));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-sided p-value of a correlation coefficient via
/// `t = r·sqrt((n−2)/(1−r²))` on `n−2` degrees of freedom.
fn t_test_p_value(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

fn result(method: Method, r: f64, p_value: f64, n: usize) -> StatResult {
    StatResult {
        statistic: r,
        p_value,
        n,
        method,
        extras: BTreeMap::from([("df".to_owned(), (n - 2) as f64)]),
    }
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<StatResult> {
    validate_pair(x, y)?;
    let r = product_moment(x, y)?;
    Ok(result(Method::Pearson, r, t_test_p_value(r, x.len()), x.len()))
}

/// Spearman's rho: Pearson correlation of average ranks, with the
/// t-approximation p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<StatResult> {
    validate_pair(x, y)?;
    let rho = product_moment(&average_ranks(x), &average_ranks(y))?;
    Ok(result(Method::Spearman, rho, t_test_p_value(rho, x.len()), x.len()))
}

/// Spearman's rho with an exact two-sided permutation p-value, enumerating
/// all `n!` pairings. Limited to `n <= SPEARMAN_EXACT_MAX_N`.
pub fn spearman_exact(x: &[f64], y: &[f64]) -> Result<StatResult> {
    validate_pair(x, y)?;
    let n = x.len();
    if n > SPEARMAN_EXACT_MAX_N {
        return Err(Error::Config(format!(
            "exact Spearman p-value supports n <= {SPEARMAN_EXACT_MAX_N}, got {n}"
        )));
    }
    let rx = average_ranks(x);
    let mut ry = average_ranks(y);
    let rho = product_moment(&rx, &ry)?;

    // rho is affine in Σ rx·ry once both rank vectors are fixed, so the
    // permutation test compares centered cross products.
    let mean = (n as f64 + 1.0) / 2.0;
    let cx: Vec<f64> = rx.iter().map(|r| r - mean).collect();
    let observed: f64 = cx.iter().zip(&ry).map(|(a, b)| a * (b - mean)).sum::<f64>().abs();
    let tol = 1e-9 * (1.0 + observed);

    let mut extreme = 0u64;
    let mut total = 0u64;
    heap_permutations(&mut ry, &mut |perm| {
        total += 1;
        let s: f64 = cx.iter().zip(perm).map(|(a, b)| a * (b - mean)).sum();
        if s.abs() >= observed - tol {
            extreme += 1;
        }
    });

    let mut res = result(Method::Spearman, rho, extreme as f64 / total as f64, n);
    res.extras.insert("exact".into(), 1.0);
    Ok(res)
}

fn heap_permutations(items: &mut [f64], visit: &mut impl FnMut(&[f64])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntropyMetric {
    Sctr,
    Cce,
}

impl EntropyMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            EntropyMetric::Sctr => "sctr",
            EntropyMetric::Cce => "cce",
        }
    }

    pub fn value(self, row: &FileMetricsRow) -> f64 {
        match self {
            EntropyMetric::Sctr => row.sctr,
            EntropyMetric::Cce => row.cce,
        }
    }
}

/// Pools `(metric, defect_count)` over all rows of one project and returns
/// the Pearson and Spearman results.
pub fn correlate_metric_vs_defects(rows: &[FileMetricsRow], metric: EntropyMetric) -> Result<(StatResult, StatResult)> {
    if rows.len() < 3 {
        return Err(Error::Validation(format!(
            "correlating {} needs at least 3 rows, got {}",
            metric.as_str(),
            rows.len()
        )));
    }
    let mut xs = Vec::with_capacity(rows.len());
    let mut ys = Vec::with_capacity(rows.len());
    for row in rows {
        let defects = row.defect_count.ok_or_else(|| {
            Error::Validation(format!(
                "row {}/{} has no defect count; join labels first",
                row.release, row.file
            ))
        })?;
        xs.push(metric.value(row));
        ys.push(defects as f64);
    }
    Ok((pearson(&xs, &ys)?, spearman(&xs, &ys)?))
}
