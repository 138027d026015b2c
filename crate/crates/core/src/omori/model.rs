//! Omori rate `n(t) = K (t + tau)^-p` and its integral `N(t)`.
//!
//! With `q = 1 - p` and `L = ln(1 + t/tau)` the cumulative count is
//! `N(t) = K tau^q expm1(q L) / q`, which equals `K [(t+tau)^q - tau^q] / q`
//! but stays accurate as `q -> 0`, where it tends to `K L`.

use serde::{Deserialize, Serialize};

use super::OmoriError;

/// Below this `|p - 1|` the logarithmic form is used.
pub const LOG_BRANCH_EPS: f64 = 1e-6;
/// Below this `|(1 - p) ln(1 + t/tau)|` the power form uses a two-term series.
pub const SERIES_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmoriParams {
    #[serde(rename = "K")]
    pub k: f64,
    pub p: f64,
    pub tau: f64,
}

impl OmoriParams {
    pub fn new(k: f64, p: f64, tau: f64) -> Self {
        Self { k, p, tau }
    }

    pub fn validate(&self) -> Result<(), OmoriError> {
        check(self.k, self.p, self.tau)
    }

    pub fn rate(&self, t: f64) -> Result<f64, OmoriError> {
        omori_rate(t, self.k, self.p, self.tau)
    }

    pub fn cumulative(&self, t: f64) -> Result<f64, OmoriError> {
        omori_cumulative(t, self.k, self.p, self.tau)
    }
}

fn check(k: f64, p: f64, tau: f64) -> Result<(), OmoriError> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(OmoriError::InvalidTau(tau));
    }
    if !(k.is_finite() && k > 0.0) {
        return Err(OmoriError::InvalidK(k));
    }
    if !p.is_finite() {
        return Err(OmoriError::InvalidP(p));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<(), OmoriError> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(OmoriError::InvalidTime(t))
    }
}

pub fn omori_rate(t: f64, k: f64, p: f64, tau: f64) -> Result<f64, OmoriError> {
    check(k, p, tau)?;
    check_t(t)?;
    Ok(k * (t + tau).powf(-p))
}

pub fn omori_cumulative(t: f64, k: f64, p: f64, tau: f64) -> Result<f64, OmoriError> {
    check(k, p, tau)?;
    check_t(t)?;
    Ok(k * unit_cumulative(t, p, tau))
}

/// Slope `K tau^-p` of the cumulative curve as `t -> 0`.
pub fn linear_limit_slope(k: f64, p: f64, tau: f64) -> Result<f64, OmoriError> {
    omori_rate(0.0, k, p, tau)
}

/// `N(t) / K`; inputs are assumed valid.
pub(crate) fn unit_cumulative(t: f64, p: f64, tau: f64) -> f64 {
    let l = (t / tau).ln_1p();
    let q = 1.0 - p;
    if q.abs() < LOG_BRANCH_EPS {
        return l;
    }
    let x = q * l;
    if x.abs() < SERIES_GUARD {
        tau.powf(q) * l * (1.0 + 0.5 * x)
    } else {
        tau.powf(q) * x.exp_m1() / q
    }
}

/// `N(t)` together with its partial derivatives with respect to
/// `(ln K, p, ln tau)`.
pub(crate) fn cumulative_with_gradient(t: f64, k: f64, p: f64, tau: f64) -> (f64, [f64; 3]) {
    let l = (t / tau).ln_1p();
    let q = 1.0 - p;
    let tq = tau.powf(q);
    let x = q * l;
    let g = unit_cumulative(t, p, tau);
    // d g / d q = ln(tau) g + tau^q L^2 phi'(q L), phi(x) = expm1(x) / x
    let dg_dq = tau.ln() * g + tq * l * l * dphi(x);
    let n = k * g;
    let d_lnk = n;
    let d_p = -k * dg_dq;
    let d_lntau = k * tau * ((t + tau).powf(-p) - tau.powf(-p));
    (n, [d_lnk, d_p, d_lntau])
}

/// Derivative of `expm1(x) / x`.
fn dphi(x: f64) -> f64 {
    if x.abs() < 0.5 {
        // sum_{n>=1} n x^(n-1) / (n+1)!
        let mut sum = 0.0;
        let mut pow = 1.0;
        let mut fact = 2.0;
        for n in 1..=24 {
            sum += n as f64 * pow / fact;
            pow *= x;
            fact *= (n + 2) as f64;
        }
        sum
    } else {
        (x * x.exp() - x.exp_m1()) / (x * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_examples() {
        assert_eq!(
            omori_rate(0.0, 3.0, 1.5, 4.0).unwrap(),
            3.0 * 4f64.powf(-1.5)
        );
        for t in [0.0, 1.0, 17.5, 1e6] {
            assert_eq!(omori_rate(t, 1.0, 0.0, 9.0).unwrap(), 1.0);
        }
        assert!((omori_rate(12.0, 2.0, 1.5, 4.0).unwrap() - 0.03125).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        assert_eq!(
            omori_rate(1.0, 1.0, 1.0, 0.0),
            Err(OmoriError::InvalidTau(0.0))
        );
        assert_eq!(
            omori_cumulative(1.0, 1.0, 1.0, -2.0),
            Err(OmoriError::InvalidTau(-2.0))
        );
        assert_eq!(
            linear_limit_slope(1.0, 1.0, 0.0),
            Err(OmoriError::InvalidTau(0.0))
        );
        assert!(omori_cumulative(-1.0, 1.0, 1.0, 1.0).is_err());
        assert!(omori_cumulative(1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn cumulative_vanishes_at_zero() {
        for p in [0.0, 0.5, 1.0, 1.0 + 1e-9, 1.3, 2.0, 3.5] {
            assert_eq!(omori_cumulative(0.0, 2.5, p, 7.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn log_branch_hand_value() {
        let e = std::f64::consts::E;
        assert!((omori_cumulative(e - 1.0, 1.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn power_branch_matches_textbook_form() {
        let cases: [(f64, f64, f64, f64); 3] = [
            (5.0, 3.0, 1.5, 10.0),
            (60.0, 30.0, 0.7, 25.0),
            (1.0, 1.0, 2.4, 2.0),
        ];
        for &(t, k, p, tau) in &cases {
            let direct = k * ((t + tau).powf(1.0 - p) - tau.powf(1.0 - p)) / (1.0 - p);
            let ours = omori_cumulative(t, k, p, tau).unwrap();
            assert!(
                ((ours - direct) / direct).abs() < 1e-13,
                "{t} {k} {p} {tau}"
            );
        }
    }

    #[test]
    fn p2_limit_is_inverse_tau() {
        let far = omori_cumulative(1e12, 1.0, 2.0, 1.0).unwrap();
        assert!((far - 1.0).abs() < 1e-11);
    }

    #[test]
    fn slope_examples() {
        assert_eq!(linear_limit_slope(1.0, 0.0, 123.0).unwrap(), 1.0);
        assert!((linear_limit_slope(2.0, 1.5, 4.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let cases = [
            (10.0, 3.0, 1.5, 10.0),
            (60.0, 30.0, 1.0, 25.0),
            (30.0, 5.0, 1.0 + 3e-6, 104.0),
            (1.0, 0.5, 2.4, 2.0),
            (45.0, 12.0, 0.2, 150.0),
        ];
        for &(t, k, p, tau) in &cases {
            let (n, grad) = cumulative_with_gradient(t, k, p, tau);
            assert!((n - omori_cumulative(t, k, p, tau).unwrap()).abs() <= 1e-14 * n.abs());
            let x = [k.ln(), p, tau.ln()];
            let f = |x: [f64; 3]| x[0].exp() * unit_cumulative(t, x[1], x[2].exp());
            for j in 0..3 {
                let h = 1e-5;
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let fd = (f(xp) - f(xm)) / (2.0 * h);
                let err = (fd - grad[j]).abs() / grad[j].abs().max(1e-12);
                assert!(
                    err < 1e-6,
                    "param {j} at {:?}: fd {fd} analytic {}",
                    (t, k, p, tau),
                    grad[j]
                );
            }
        }
    }

    #[test]
    fn dphi_series_and_closed_form_agree_at_switch() {
        let a = dphi(0.4999999);
        let b = (0.5f64 * 0.5f64.exp() - 0.5f64.exp_m1()) / 0.25;
        assert!((a - b).abs() < 1e-6);
        assert!((dphi(0.0) - 0.5).abs() < 1e-16);
    }
}
