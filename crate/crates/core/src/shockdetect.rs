//! Main-shock identification on a volatility series.
//!
//! The procedure takes the `k` largest volatilities, discards any candidate
//! lying fewer than `min_gap` intervals from a larger one (a foreshock or
//! aftershock), drops shocks too close to the end of the sample to observe a
//! full search window, and ends each shock's impact at the lowest volatility
//! within `search_window` intervals after it.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::volatility::VolatilitySeries;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ShockError {
    #[error("candidate count must be positive")]
    ZeroCandidates,
    #[error("requested {k} candidates from a series of {len} values")]
    TooManyCandidates { k: usize, len: usize },
    #[error("shock at index {t0} has {available} intervals after it, need {needed}")]
    InsufficientWindow {
        t0: usize,
        available: usize,
        needed: usize,
    },
    #[error("search window after index {0} contains no non-empty interval")]
    NoMinimum(usize),
    #[error("search window must be positive")]
    ZeroWindow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub index: usize,
    pub value: f64,
}

/// How the impact duration `T` counts intervals between `t0` and `t1`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DurationConvention {
    /// Excludes `t0`, includes `t1`: `T = t1 - t0`.
    #[default]
    AfterShock,
    /// Includes both ends: `T = t1 - t0 + 1`.
    Inclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectParams {
    pub k: usize,
    pub min_gap: usize,
    pub search_window: usize,
    #[serde(default)]
    pub duration: DurationConvention,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            k: 7,
            min_gap: 30,
            search_window: 60,
            duration: DurationConvention::AfterShock,
        }
    }
}

/// A main shock and the extent of its impact, as indices into the volatility
/// series it was detected on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Shock {
    pub t0: usize,
    pub t1: usize,
    pub t0_label: String,
    pub t1_label: String,
    /// Impact duration `T` under the chosen convention.
    pub duration: usize,
    pub v_max: f64,
    pub v_min: f64,
    /// Log return of the shock interval's close against the previous close.
    pub r0: Option<f64>,
}

impl Shock {
    /// Number of intervals after `t0` up to and including `t1`.
    pub fn window_len(&self) -> usize {
        self.t1 - self.t0
    }
}

fn by_value_desc(a: &Candidate, b: &Candidate) -> Ordering {
    b.value
        .partial_cmp(&a.value)
        .unwrap_or(Ordering::Equal)
        .then(a.index.cmp(&b.index))
}

/// The `k` largest values, largest first; ties go to the earlier interval.
pub fn top_candidates(vols: &VolatilitySeries, k: usize) -> Result<Vec<Candidate>, ShockError> {
    if k == 0 {
        return Err(ShockError::ZeroCandidates);
    }
    if k > vols.len() {
        return Err(ShockError::TooManyCandidates { k, len: vols.len() });
    }
    let mut all: Vec<Candidate> = vols
        .values()
        .enumerate()
        .map(|(index, value)| Candidate { index, value })
        .collect();
    all.sort_by(by_value_desc);
    all.truncate(k);
    Ok(all)
}

/// Removes every candidate lying fewer than `min_gap` intervals from a larger
/// surviving one. Survivors keep their input order.
pub fn merge_proximate(candidates: &[Candidate], min_gap: usize) -> Vec<Candidate> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| by_value_desc(&candidates[a], &candidates[b]));
    let mut keep = vec![false; candidates.len()];
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let idx = candidates[i].index;
        if kept.iter().all(|&j| idx.abs_diff(j) >= min_gap) {
            keep[i] = true;
            kept.push(idx);
        }
    }
    candidates
        .iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(*c))
        .collect()
}

/// Drops shocks followed by fewer than `search_window` intervals.
pub fn exclude_boundary(
    shocks: &[Candidate],
    vols: &VolatilitySeries,
    search_window: usize,
) -> Vec<Candidate> {
    shocks
        .iter()
        .filter(|c| vols.len() - 1 - c.index >= search_window)
        .copied()
        .collect()
}

/// Ends the impact of the shock at `t0` at the minimum volatility over
/// `(t0, t0 + search_window]`, earliest on ties. Empty intervals (data gaps)
/// are skipped.
pub fn impact_duration(
    vols: &VolatilitySeries,
    t0: usize,
    search_window: usize,
    convention: DurationConvention,
) -> Result<Shock, ShockError> {
    if search_window == 0 {
        return Err(ShockError::ZeroWindow);
    }
    let available = vols.len().saturating_sub(t0 + 1);
    if available < search_window {
        return Err(ShockError::InsufficientWindow {
            t0,
            available,
            needed: search_window,
        });
    }
    let windows = vols.windows();
    let mut best: Option<usize> = None;
    for i in t0 + 1..=t0 + search_window {
        if windows[i].is_empty() {
            continue;
        }
        match best {
            Some(b) if windows[i].value >= windows[b].value => {}
            _ => best = Some(i),
        }
    }
    let t1 = best.ok_or(ShockError::NoMinimum(t0))?;
    let duration = match convention {
        DurationConvention::AfterShock => t1 - t0,
        DurationConvention::Inclusive => t1 - t0 + 1,
    };
    let r0 = match (t0.checked_sub(1), windows[t0].close) {
        (Some(prev), Some(close)) => windows[prev].close.map(|p| close.ln() - p.ln()),
        _ => None,
    };
    Ok(Shock {
        t0,
        t1,
        t0_label: windows[t0].label(),
        t1_label: windows[t1].label(),
        duration,
        v_max: windows[t0].value,
        v_min: windows[t1].value,
        r0,
    })
}

/// Full detection pass; shocks are returned in chronological order.
pub fn detect_shocks(
    vols: &VolatilitySeries,
    params: &DetectParams,
) -> Result<Vec<Shock>, ShockError> {
    let candidates = top_candidates(vols, params.k)?;
    let merged = merge_proximate(&candidates, params.min_gap);
    let mut kept = exclude_boundary(&merged, vols, params.search_window);
    kept.sort_by_key(|c| c.index);
    kept.iter()
        .map(|c| impact_duration(vols, c.index, params.search_window, params.duration))
        .collect()
}

/// Carries a shock found on a daily series over to a finer series computed
/// from the same returns. The fine `t0` is the largest window of the shock day
/// (earliest on ties) and the fine `t1` is the last window of the day holding
/// the daily `t1`. Returns `None` when either day has no fine windows.
pub fn refine_shock(
    shock: &Shock,
    daily: &VolatilitySeries,
    fine: &VolatilitySeries,
    convention: DurationConvention,
) -> Option<Shock> {
    let d0 = daily.windows()[shock.t0].day;
    let d1 = daily.windows()[shock.t1].day;
    let windows = fine.windows();
    let mut t0: Option<usize> = None;
    let mut t1: Option<usize> = None;
    for (i, w) in windows.iter().enumerate() {
        if w.day == d0 && t0.is_none_or(|b| w.value > windows[b].value) {
            t0 = Some(i);
        }
        if w.day == d1 {
            t1 = Some(i);
        }
    }
    let (t0, t1) = (t0?, t1?);
    if t1 <= t0 {
        return None;
    }
    let duration = match convention {
        DurationConvention::AfterShock => t1 - t0,
        DurationConvention::Inclusive => t1 - t0 + 1,
    };
    Some(Shock {
        t0,
        t1,
        t0_label: windows[t0].label(),
        t1_label: windows[t1].label(),
        duration,
        v_max: windows[t0].value,
        v_min: windows[t1].value,
        r0: shock.r0,
    })
}

/// Shock table with columns `t0,t1,T,V_max_over_sigma,V_max,V_min,r0`.
pub fn write_shocks_csv<W: Write>(
    shocks: &[Shock],
    sigma: Option<f64>,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "t0,t1,T,V_max_over_sigma,V_max,V_min,r0")?;
    for s in shocks {
        let ratio = sigma
            .filter(|s| *s > 0.0)
            .map(|sig| format!("{:.3}", s.v_max / sig))
            .unwrap_or_default();
        let r0 = s.r0.map(|r| format!("{r:.6}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{:.6e},{:.6e},{}",
            s.t0_label, s.t1_label, s.duration, ratio, s.v_max, s.v_min, r0
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volatility::VolWindow;
    use chrono::NaiveDate;

    fn vols(values: &[f64]) -> VolatilitySeries {
        VolatilitySeries::from_daily_values(NaiveDate::from_ymd_opt(2001, 2, 5).unwrap(), values)
    }

    fn cand(index: usize, value: f64) -> Candidate {
        Candidate { index, value }
    }

    #[test]
    fn top_two() {
        let c = top_candidates(&vols(&[1.0, 5.0, 3.0, 2.0]), 2).unwrap();
        assert_eq!(c, vec![cand(1, 5.0), cand(2, 3.0)]);
    }

    #[test]
    fn ties_prefer_earlier() {
        let c = top_candidates(&vols(&[4.0; 6]), 3).unwrap();
        assert_eq!(c.iter().map(|c| c.index).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn k_bounds() {
        assert_eq!(
            top_candidates(&vols(&[1.0, 2.0]), 3),
            Err(ShockError::TooManyCandidates { k: 3, len: 2 })
        );
        assert_eq!(
            top_candidates(&vols(&[1.0]), 0),
            Err(ShockError::ZeroCandidates)
        );
    }

    #[test]
    fn aftershock_removed() {
        // larger earlier shock absorbs a later, smaller one
        let merged = merge_proximate(&[cand(10, 0.00543), cand(27, 0.004)], 30);
        assert_eq!(merged, vec![cand(10, 0.00543)]);
    }

    #[test]
    fn foreshock_removed() {
        let merged = merge_proximate(&[cand(100, 0.00578), cand(78, 0.003)], 30);
        assert_eq!(merged, vec![cand(100, 0.00578)]);
    }

    #[test]
    fn exactly_min_gap_apart_both_kept() {
        let merged = merge_proximate(&[cand(0, 2.0), cand(30, 1.0)], 30);
        assert_eq!(merged.len(), 2);
        let merged = merge_proximate(&[cand(0, 2.0), cand(29, 1.0)], 30);
        assert_eq!(merged.len(), 1);
    }

    #[test]
    fn survivors_keep_input_order() {
        let input = [cand(200, 5.0), cand(10, 4.0), cand(100, 3.0), cand(15, 2.0)];
        let merged = merge_proximate(&input, 30);
        assert_eq!(merged, vec![cand(200, 5.0), cand(10, 4.0), cand(100, 3.0)]);
    }

    #[test]
    fn boundary_rule() {
        let v = vols(&vec![1.0; 100]);
        // index 39 has 60 intervals after it, index 40 only 59
        let kept = exclude_boundary(&[cand(39, 2.0), cand(40, 2.0)], &v, 60);
        assert_eq!(kept, vec![cand(39, 2.0)]);
        assert!(exclude_boundary(&[], &v, 60).is_empty());
    }

    #[test]
    fn decay_to_planted_minimum() {
        let mut v = vec![1.0; 120];
        v[10] = 20.0;
        for s in 1..=60 {
            v[10 + s] = 0.5 + (s as f64 - 28.0).powi(2) * 0.01;
        }
        let shock = impact_duration(&vols(&v), 10, 60, DurationConvention::AfterShock).unwrap();
        assert_eq!(shock.t1, 38);
        assert_eq!(shock.duration, 28);
        assert_eq!(shock.v_max, 20.0);
        assert_eq!(shock.v_min, 0.5);
        let inclusive = impact_duration(&vols(&v), 10, 60, DurationConvention::Inclusive).unwrap();
        assert_eq!(inclusive.duration, 29);
    }

    #[test]
    fn monotone_decay_ends_at_window_edge() {
        let v: Vec<f64> = (0..100).map(|i| 100.0 - i as f64).collect();
        let shock = impact_duration(&vols(&v), 0, 60, DurationConvention::AfterShock).unwrap();
        assert_eq!(shock.t1, 60);
        assert_eq!(shock.duration, 60);
    }

    #[test]
    fn insufficient_window() {
        let v = vols(&[1.0; 50]);
        assert_eq!(
            impact_duration(&v, 0, 60, DurationConvention::AfterShock),
            Err(ShockError::InsufficientWindow {
                t0: 0,
                available: 49,
                needed: 60
            })
        );
    }

    #[test]
    fn empty_intervals_skipped_in_minimum() {
        let mut v = vols(&[5.0, 2.0, 3.0, 4.0]);
        let mut windows = v.windows().to_vec();
        windows[1].value = 0.0;
        windows[1].returns = 0;
        v = VolatilitySeries::from_windows(v.aggregation(), windows);
        let shock = impact_duration(&v, 0, 3, DurationConvention::AfterShock).unwrap();
        assert_eq!(shock.t1, 2);
    }

    #[test]
    fn refine_to_finer_series() {
        let daily = vols(&[9.0, 1.0, 2.0]);
        let shock = impact_duration(&daily, 0, 2, DurationConvention::AfterShock).unwrap();
        assert_eq!(shock.t1, 1);
        let day = |d: usize, value: f64, m: u32| VolWindow {
            date: daily.windows()[d].date,
            end: chrono::NaiveTime::from_hms_opt(9, 30 + m, 0),
            day: d,
            value,
            returns: 1,
            close: None,
        };
        let fine = VolatilitySeries::from_windows(
            crate::volatility::Aggregation::Minutely,
            vec![
                day(0, 1.0, 1),
                day(0, 7.0, 2),
                day(0, 7.0, 3),
                day(1, 2.0, 1),
                day(1, 0.5, 2),
                day(2, 3.0, 1),
            ],
        );
        let fine_shock =
            refine_shock(&shock, &daily, &fine, DurationConvention::AfterShock).unwrap();
        assert_eq!(
            (fine_shock.t0, fine_shock.t1, fine_shock.duration),
            (1, 4, 3)
        );
        assert_eq!(fine_shock.t0_label, "2001-02-05 09:32");
        assert_eq!(fine_shock.v_min, 0.5);
    }
}
