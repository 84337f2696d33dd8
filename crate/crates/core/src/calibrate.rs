//! Estimators that turn observed pre/post-execution gaps into model quantities.
//!
//! Input is a CSV file with header `block_number,pair_id,e_pre,e_post,e_next`
//! where `e_next` (the next-block pre-execution gap) may be empty or the
//! column may be absent. Gaps are nonnegative log-price magnitudes.
//!
//! Conventions, fixed so fixtures are exact:
//!
//! - median: midpoint of the two middle order statistics for even `n`;
//! - first quartile: the lowest `ceil(n / 4)` observations by `e_pre`;
//! - quartile groups `Q1..Q4`: rank groups `[floor(k n / 4), floor((k + 1) n / 4))`;
//! - large-error subset: `e_pre >= median(e_pre)` (ties go large).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference correction shares scanned by [`select_lambda`].
pub const LAMBDA_LEVELS: [f64; 3] = [0.25, 0.50, 0.75];
/// A level is selected only if its large-error delivery share exceeds this.
pub const DELIVERY_THRESHOLD: f64 = 0.70;

const COLUMNS: [&str; 4] = ["block_number", "pair_id", "e_pre", "e_post"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub block_number: i64,
    pub pair_id: String,
    pub e_pre: f64,
    pub e_post: f64,
    pub e_next: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub observations: Vec<Observation>,
    /// Where the observations came from, if loaded from a file.
    pub source: Option<String>,
}

impl ObservationSet {
    pub fn new(observations: Vec<Observation>) -> Self {
        ObservationSet {
            observations,
            source: None,
        }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Keeps only observations whose `pair_id` is in `pairs`.
    pub fn filter_pairs(&self, pairs: &[&str]) -> ObservationSet {
        ObservationSet {
            observations: self
                .observations
                .iter()
                .filter(|o| pairs.contains(&o.pair_id.as_str()))
                .cloned()
                .collect(),
            source: self.source.clone(),
        }
    }

    fn require_nonempty(&self, what: &str) -> Result<()> {
        if self.is_empty() {
            Err(Error::EmptySet(what.to_string()))
        } else {
            Ok(())
        }
    }

    fn sorted_pre(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.observations.iter().map(|o| o.e_pre).collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

pub fn load_observations(path: impl AsRef<Path>) -> Result<ObservationSet> {
    let path = path.as_ref();
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let index_of = |name: &str| headers.iter().position(|h| h == name);
    let mut idx = [0usize; 4];
    for (slot, name) in idx.iter_mut().zip(COLUMNS) {
        *slot = index_of(name).ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })?;
    }
    let next_idx = index_of("e_next");

    let mut observations = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = i as u64 + 1;
        let line = record.position().map_or(row + 1, |p| p.line());
        let bad = |reason: String| Error::BadRow {
            path: path.to_path_buf(),
            row,
            line,
            reason,
        };
        let field = |k: usize, name: &str| {
            record
                .get(k)
                .ok_or_else(|| bad(format!("missing field `{name}`")))
        };
        let gap = |k: usize, name: &str| -> Result<f64> {
            let raw = field(k, name)?;
            let v: f64 = raw
                .parse()
                .map_err(|_| bad(format!("`{name}` is not a number: {raw:?}")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(bad(format!("`{name}` must be a finite nonnegative gap, got {v}")));
            }
            Ok(v)
        };
        let raw_block = field(idx[0], "block_number")?;
        let block_number = raw_block
            .parse()
            .map_err(|_| bad(format!("`block_number` is not an integer: {raw_block:?}")))?;
        let e_next = match next_idx.and_then(|k| record.get(k)) {
            None | Some("") => None,
            Some(_) => Some(gap(next_idx.unwrap(), "e_next")?),
        };
        observations.push(Observation {
            block_number,
            pair_id: field(idx[1], "pair_id")?.to_string(),
            e_pre: gap(idx[2], "e_pre")?,
            e_post: gap(idx[3], "e_post")?,
            e_next,
        });
    }
    if observations.is_empty() {
        return Err(Error::EmptySet(format!("{} has no data rows", path.display())));
    }
    let source = Some(path.display().to_string());
    Ok(ObservationSet {
        observations,
        source,
    })
}

/// Realised within-block correction `S = e_pre - e_post`; negative when the
/// block widened the gap.
pub fn correction(obs: &Observation) -> f64 {
    obs.e_pre - obs.e_post
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(median_sorted(values))
}

/// Half the median of the lowest `ceil(n/4)` pre-execution gaps.
pub fn deadzone_proxy(set: &ObservationSet) -> Result<f64> {
    set.require_nonempty("dead-zone proxy")?;
    let sorted = set.sorted_pre();
    let k = sorted.len().div_ceil(4);
    Ok(0.5 * median_sorted(&sorted[..k]))
}

/// Sample median of the pre-execution gap.
pub fn threshold(set: &ObservationSet) -> Result<f64> {
    set.require_nonempty("threshold")?;
    Ok(median_sorted(&set.sorted_pre()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    /// `e_pre >= median(e_pre)`.
    Large,
    Small,
    All,
}

fn subset(set: &ObservationSet, which: Subset) -> Result<Vec<&Observation>> {
    set.require_nonempty("subset split")?;
    let cut = threshold(set)?;
    let picked: Vec<&Observation> = set
        .observations
        .iter()
        .filter(|o| match which {
            Subset::Large => o.e_pre >= cut,
            Subset::Small => o.e_pre < cut,
            Subset::All => true,
        })
        .collect();
    if picked.is_empty() {
        return Err(Error::EmptySet(format!("{which:?} subset")));
    }
    Ok(picked)
}

fn delivery_share(obs: &[&Observation], lambda: f64) -> f64 {
    let hits = obs.iter().filter(|o| correction(o) >= lambda * o.e_pre).count();
    hits as f64 / obs.len() as f64
}

/// Empirical `P(S >= lambda e_pre)` on a subset, per lambda.
pub fn phat_curve(set: &ObservationSet, lambdas: &[f64], which: Subset) -> Result<Vec<(f64, f64)>> {
    let obs = subset(set, which)?;
    lambdas
        .iter()
        .map(|&l| {
            if l > 0.0 && l <= 1.0 {
                Ok((l, delivery_share(&obs, l)))
            } else {
                Err(Error::invalid("lambda", format!("expected 0 < lambda <= 1, got {l}")))
            }
        })
        .collect()
}

/// Largest reference level whose large-error delivery share exceeds 70%,
/// with that share; `None` when no level qualifies.
pub fn select_lambda(set: &ObservationSet) -> Result<Option<(f64, f64)>> {
    let curve = phat_curve(set, &LAMBDA_LEVELS, Subset::Large)?;
    Ok(curve.into_iter().rev().find(|&(_, p)| p > DELIVERY_THRESHOLD))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuartileStats {
    pub count: usize,
    /// Share with `S > 0`; `None` for an empty group.
    pub positive_correction_ratio: Option<f64>,
    /// Median of `S / e_pre` over members with `e_pre > 0`.
    pub median_relative_correction: Option<f64>,
}

/// Positive-correction ratio and median relative correction per `e_pre` rank quartile.
pub fn quartile_stats(set: &ObservationSet) -> Result<[QuartileStats; 4]> {
    set.require_nonempty("quartile statistics")?;
    let mut order: Vec<&Observation> = set.observations.iter().collect();
    order.sort_by(|a, b| a.e_pre.total_cmp(&b.e_pre));
    let n = order.len();
    Ok(std::array::from_fn(|k| {
        let group = &order[k * n / 4..(k + 1) * n / 4];
        let positive = group.iter().filter(|o| correction(o) > 0.0).count();
        let mut rel: Vec<f64> = group
            .iter()
            .filter(|o| o.e_pre > 0.0)
            .map(|o| correction(o) / o.e_pre)
            .collect();
        QuartileStats {
            count: group.len(),
            positive_correction_ratio: (!group.is_empty()).then(|| positive as f64 / group.len() as f64),
            median_relative_correction: median(&mut rel),
        }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessShares {
    /// Observations carrying `e_next`.
    pub count: usize,
    /// Share with `e_{n+1} <= (e_n - S)_+`.
    pub share_without_proxy: f64,
    /// Share with `e_{n+1} <= (e_n - S)_+ + w_hat`. The proxy
    /// `w_hat = (e_{n+1} - (e_n - S)_+)_+` makes this 1 by construction.
    pub share_with_proxy: f64,
    /// Mean of the disturbance proxy.
    pub mean_disturbance_proxy: f64,
}

/// Next-block checks of the one-step excess recursion against observed data.
pub fn robustness_report(set: &ObservationSet, gamma_bar: f64) -> Result<RobustnessShares> {
    crate::error::ensure_nonneg("gamma_bar", gamma_bar)?;
    let with_next: Vec<(&Observation, f64)> = set
        .observations
        .iter()
        .filter_map(|o| o.e_next.map(|n| (o, n)))
        .collect();
    if with_next.is_empty() {
        return Err(Error::NoNextGap);
    }
    let (mut raw, mut proxied, mut proxy_sum) = (0usize, 0usize, 0.0);
    for &(o, next) in &with_next {
        let e_n = (o.e_pre - gamma_bar).max(0.0);
        let e_next = (next - gamma_bar).max(0.0);
        let carried = (e_n - correction(o)).max(0.0);
        let w_hat = (e_next - carried).max(0.0);
        proxy_sum += w_hat;
        if e_next <= carried {
            raw += 1;
        }
        if e_next <= carried + w_hat {
            proxied += 1;
        }
    }
    let n = with_next.len() as f64;
    Ok(RobustnessShares {
        count: with_next.len(),
        share_without_proxy: raw as f64 / n,
        share_with_proxy: proxied as f64 / n,
        mean_disturbance_proxy: proxy_sum / n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub observations: usize,
    pub source: Option<String>,
    pub gamma_bar: f64,
    pub x_star: f64,
    /// `None` when no reference level clears the delivery threshold.
    pub lambda_star: Option<f64>,
    pub p_star: Option<f64>,
    pub phat_at_025: f64,
    pub phat_at_050: f64,
    pub phat_at_075: f64,
    pub positive_correction_ratio: f64,
    pub quartiles: [QuartileStats; 4],
    /// Present when the data carries next-block gaps.
    pub robustness: Option<RobustnessShares>,
}

impl CalibrationReport {
    pub fn lambda_selected(&self) -> bool {
        self.lambda_star.is_some()
    }
}

pub fn calibration_report(set: &ObservationSet) -> Result<CalibrationReport> {
    set.require_nonempty("calibration report")?;
    let gamma_bar = deadzone_proxy(set)?;
    let x_star = threshold(set)?;
    let levels = phat_curve(set, &LAMBDA_LEVELS, Subset::Large)?;
    let selected = select_lambda(set)?;
    let positive = set.observations.iter().filter(|o| correction(o) > 0.0).count();
    let robustness = match robustness_report(set, gamma_bar) {
        Ok(r) => Some(r),
        Err(Error::NoNextGap) => None,
        Err(e) => return Err(e),
    };
    Ok(CalibrationReport {
        observations: set.len(),
        source: set.source.clone(),
        gamma_bar,
        x_star,
        lambda_star: selected.map(|s| s.0),
        p_star: selected.map(|s| s.1),
        phat_at_025: levels[0].1,
        phat_at_050: levels[1].1,
        phat_at_075: levels[2].1,
        positive_correction_ratio: positive as f64 / set.len() as f64,
        quartiles: quartile_stats(set)?,
        robustness,
    })
}

/// Rows `(lambda, p_hat_large, p_hat_small)`; the small column is `None`
/// when every observation falls in the large half.
pub fn phat_table(set: &ObservationSet, lambdas: &[f64]) -> Result<Vec<(f64, f64, Option<f64>)>> {
    let large = phat_curve(set, lambdas, Subset::Large)?;
    let small = match phat_curve(set, lambdas, Subset::Small) {
        Ok(c) => Some(c),
        Err(Error::EmptySet(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(large
        .into_iter()
        .enumerate()
        .map(|(i, (l, pl))| (l, pl, small.as_ref().map(|s| s[i].1)))
        .collect())
}
