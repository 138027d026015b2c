use std::io::Write;

use crate::shockdetect::Shock;
use crate::volatility::VolatilitySeries;

use super::fit::OmoriFit;
use super::model::unit_cumulative;
use super::OmoriError;

/// Cumulative number of intervals after a main shock whose volatility exceeds
/// a threshold. `t[i] = i + 1` counts intervals after the shock; the shock
/// interval itself is offset zero and never counted.
#[derive(Debug, Clone, PartialEq)]
pub struct CountCurve {
    pub t: Vec<u32>,
    pub n: Vec<u32>,
    pub theta: f64,
    pub theta_over_sigma: Option<f64>,
    pub shock_label: String,
}

impl CountCurve {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Every interval exceeded the threshold: `N(t) = t`.
    pub fn is_saturated(&self) -> bool {
        self.t.iter().zip(&self.n).all(|(t, n)| t == n)
    }

    pub fn is_constant(&self) -> bool {
        self.n.windows(2).all(|w| w[0] == w[1])
    }

    /// `t,N,N_fit` CSV; `N_fit` is blank without a fit.
    pub fn write_csv<W: Write>(&self, fit: Option<&OmoriFit>, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,N,N_fit")?;
        for (&t, &n) in self.t.iter().zip(&self.n) {
            match fit {
                Some(f) => writeln!(
                    out,
                    "{t},{n},{:.6}",
                    f.k * unit_cumulative(f64::from(t), f.p, f.tau)
                )?,
                None => writeln!(out, "{t},{n},")?,
            }
        }
        Ok(())
    }
}

/// Counts `V(t0 + s) > theta` for `s = 1..=t1 - t0`.
pub fn count_aftershocks(
    vols: &VolatilitySeries,
    shock: &Shock,
    theta: f64,
) -> Result<CountCurve, OmoriError> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(OmoriError::InvalidThreshold(theta));
    }
    let len = shock.t1.saturating_sub(shock.t0);
    if len == 0 || shock.t1 >= vols.len() {
        return Err(OmoriError::EmptyWindow);
    }
    let mut t = Vec::with_capacity(len);
    let mut n = Vec::with_capacity(len);
    let mut count = 0u32;
    for (s, v) in vols.values().skip(shock.t0 + 1).take(len).enumerate() {
        if v > theta {
            count += 1;
        }
        t.push(s as u32 + 1);
        n.push(count);
    }
    Ok(CountCurve {
        t,
        n,
        theta,
        theta_over_sigma: vols.sigma().map(|s| theta / s),
        shock_label: shock.t0_label.clone(),
    })
}
