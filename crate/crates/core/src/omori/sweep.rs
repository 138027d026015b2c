use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::shockdetect::Shock;
use crate::volatility::VolatilitySeries;

use super::count::{count_aftershocks, CountCurve};
use super::fit::{fit_omori, OmoriFit};
use super::OmoriError;

/// Status of one `(shock, threshold)` row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepFlag {
    Ok,
    /// Fitted, but the optimizer stopped before meeting its tolerances.
    NotConverged,
    /// Fitted with `p` outside `[0, 4]` or `tau > 100 T`; the curve is close
    /// to its linear limit and the exponent is poorly determined.
    QualityWarning,
    /// Every interval exceeded the threshold, `N(t) = t`.
    DegenerateAll,
    /// No interval or only a constant count after the first; `N(t)` flat.
    DegenerateConstant,
    /// Fewer than four intervals in the impact window.
    TooShort,
}

impl SweepFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepFlag::Ok => "ok",
            SweepFlag::NotConverged => "not_converged",
            SweepFlag::QualityWarning => "quality_warning",
            SweepFlag::DegenerateAll => "degenerate_all",
            SweepFlag::DegenerateConstant => "degenerate_constant",
            SweepFlag::TooShort => "too_short",
        }
    }

    pub fn is_degenerate(self) -> bool {
        matches!(
            self,
            SweepFlag::DegenerateAll | SweepFlag::DegenerateConstant | SweepFlag::TooShort
        )
    }
}

impl fmt::Display for SweepFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub shock_label: String,
    pub theta_over_sigma: f64,
    pub curve: CountCurve,
    pub fit: Option<OmoriFit>,
    pub flag: SweepFlag,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn extend(&mut self, other: SweepTable) {
        self.rows.extend(other.rows);
    }

    pub fn all_degenerate(&self) -> bool {
        self.rows.iter().all(|r| r.flag.is_degenerate())
    }

    /// `t0,theta_over_sigma,p,tau,K,sse,converged,flag`; fit columns are blank
    /// for degenerate rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t0,theta_over_sigma,p,tau,K,sse,converged,flag")?;
        for row in &self.rows {
            match &row.fit {
                Some(f) => writeln!(
                    out,
                    "{},{},{:.4},{:.4},{:.6e},{:.6e},{},{}",
                    row.shock_label,
                    row.theta_over_sigma,
                    f.p,
                    f.tau,
                    f.k,
                    f.sse,
                    f.converged,
                    row.flag
                )?,
                None => writeln!(
                    out,
                    "{},{},,,,,,{}",
                    row.shock_label, row.theta_over_sigma, row.flag
                )?,
            }
        }
        Ok(())
    }
}

/// Counts and fits one shock at each threshold `theta_over_sigma[i] * sigma`.
pub fn threshold_sweep(
    vols: &VolatilitySeries,
    shock: &Shock,
    thetas: &[f64],
    sigma: f64,
) -> Result<SweepTable, OmoriError> {
    if thetas.is_empty() {
        return Err(OmoriError::NoThresholds);
    }
    if thetas
        .windows(2)
        .any(|w| w[0].is_nan() || w[1].is_nan() || w[0] >= w[1])
    {
        return Err(OmoriError::ThresholdsNotAscending);
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(OmoriError::InvalidSigma(sigma));
    }
    let horizon = shock.window_len() as f64;
    let mut rows = Vec::with_capacity(thetas.len());
    for &mult in thetas {
        let mut curve = count_aftershocks(vols, shock, mult * sigma)?;
        curve.theta_over_sigma = Some(mult);
        let (fit, flag) = if curve.len() < 4 {
            (None, SweepFlag::TooShort)
        } else if curve.is_saturated() {
            (None, SweepFlag::DegenerateAll)
        } else if curve.is_constant() {
            (None, SweepFlag::DegenerateConstant)
        } else {
            match fit_omori(&curve, None) {
                Ok(fit) => {
                    let flag = if !fit.converged {
                        SweepFlag::NotConverged
                    } else if !(0.0..=4.0).contains(&fit.p) || fit.tau > 100.0 * horizon {
                        SweepFlag::QualityWarning
                    } else {
                        SweepFlag::Ok
                    };
                    (Some(fit), flag)
                }
                // preconditions are checked above
                Err(_) => (None, SweepFlag::DegenerateConstant),
            }
        };
        rows.push(SweepRow {
            shock_label: shock.t0_label.clone(),
            theta_over_sigma: mult,
            curve,
            fit,
            flag,
        });
    }
    Ok(SweepTable { rows })
}
