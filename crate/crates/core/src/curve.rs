//! Parametric non-decreasing expected-reward curves `μ(n)` indexed by the
//! arm's own pull count `n ≥ 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Expected reward as a function of the pull count.
///
/// Serialized adjacently tagged as `{"family": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum RewardCurve {
    /// `c (1 − e^{−a n})` with `a, c ∈ (0, 1]`.
    Exponential { c: f64, a: f64 },
    /// `c (1 − b (n + b^{1/ρ})^{−ρ})` with `c, ρ ∈ (0, 1]`, `b ≥ 0`.
    Polynomial { c: f64, b: f64, rho: f64 },
    /// `min(slope · (n − offset), cap)`, clamped below at zero.
    LinearCapped { slope: f64, cap: f64, offset: f64 },
    Constant { value: f64 },
    /// Explicit `μ(1), μ(2), …`; constant past the end of the table.
    Tabulated { values: Vec<f64> },
}

impl RewardCurve {
    pub fn constant(value: f64) -> Self {
        RewardCurve::Constant { value }
    }

    pub fn tabulated(values: Vec<f64>) -> Self {
        RewardCurve::Tabulated { values }
    }

    /// Checks the family's parameter domain. Monotonicity of tabulated
    /// curves is checked here too; range checks against a reward law need a
    /// horizon and live in [`crate::Instance::new`].
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidCurve(msg));
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        match *self {
            RewardCurve::Exponential { c, a } => {
                if !unit(c) || !unit(a) {
                    return bad(format!("exponential requires a, c in (0,1], got c={c}, a={a}"));
                }
            }
            RewardCurve::Polynomial { c, b, rho } => {
                if !unit(c) || !unit(rho) || !(b >= 0.0 && b.is_finite()) {
                    return bad(format!(
                        "polynomial requires c, rho in (0,1] and finite b >= 0, got c={c}, b={b}, rho={rho}"
                    ));
                }
            }
            RewardCurve::LinearCapped { slope, cap, offset } => {
                if !(slope >= 0.0 && slope.is_finite()) || !(cap >= 0.0 && cap.is_finite()) || !offset.is_finite() {
                    return bad(format!(
                        "linear_capped requires finite slope >= 0, cap >= 0, offset, got slope={slope}, cap={cap}, offset={offset}"
                    ));
                }
            }
            RewardCurve::Constant { value } => {
                if !value.is_finite() {
                    return bad(format!("constant value must be finite, got {value}"));
                }
            }
            RewardCurve::Tabulated { ref values } => {
                if values.is_empty() {
                    return bad("tabulated curve needs at least one value".into());
                }
                if let Some(v) = values.iter().find(|v| !v.is_finite()) {
                    return bad(format!("tabulated value {v} is not finite"));
                }
                if let Some(n) = values.windows(2).position(|w| w[1] < w[0]) {
                    return bad(format!("tabulated curve decreases between n={} and n={}", n + 1, n + 2));
                }
            }
        }
        Ok(())
    }

    /// `μ(n)` for `n ≥ 1`. `n = 0` is treated as `n = 1`.
    pub fn eval(&self, n: usize) -> f64 {
        let n = n.max(1);
        let x = n as f64;
        match *self {
            RewardCurve::Exponential { c, a } => -c * (-a * x).exp_m1(),
            RewardCurve::Polynomial { c, b, rho } => {
                if b == 0.0 {
                    c
                } else {
                    // 1 − b (x + b^{1/ρ})^{−ρ} = 1 − (1 + x b^{−1/ρ})^{−ρ}
                    c * -(-rho * (x * b.powf(-1.0 / rho)).ln_1p()).exp_m1()
                }
            }
            RewardCurve::LinearCapped { slope, cap, offset } => {
                let shifted = x - offset;
                if shifted <= 0.0 {
                    0.0
                } else {
                    (slope * shifted).min(cap)
                }
            }
            RewardCurve::Constant { value } => value,
            RewardCurve::Tabulated { ref values } => values[n.min(values.len()) - 1],
        }
    }

    /// Increment `γ(n) = μ(n+1) − μ(n)`.
    pub fn increment(&self, n: usize) -> f64 {
        self.eval(n + 1) - self.eval(n)
    }
}

/// Free-function form of [`RewardCurve::eval`].
pub fn eval_mu(curve: &RewardCurve, n: usize) -> f64 {
    curve.eval(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_capped_reaches_cap() {
        let c = RewardCurve::LinearCapped { slope: 1.0 / 8.0, cap: 0.5, offset: 1.0 };
        assert_eq!(c.eval(5), 0.5);
        assert_eq!(c.eval(1), 0.0);
        assert_eq!(c.eval(3), 0.25);
        assert_eq!(c.eval(100), 0.5);
    }

    #[test]
    fn constant_is_flat() {
        assert_eq!(RewardCurve::constant(0.3).eval(1_000_000), 0.3);
    }

    #[test]
    fn exponential_ln2_is_one_minus_power_of_two() {
        let c = RewardCurve::Exponential { c: 1.0, a: std::f64::consts::LN_2 };
        assert!((c.eval(3) - 0.875).abs() < 1e-15);
    }

    #[test]
    fn polynomial_starts_near_zero_and_rises() {
        let c = RewardCurve::Polynomial { c: 0.8, b: 4.0, rho: 0.5 };
        c.validate().unwrap();
        let mut prev = 0.0;
        for n in 1..1000 {
            let v = c.eval(n);
            assert!(v >= prev && v <= 0.8);
            prev = v;
        }
        // n = 0 extension of the family is exactly 0
        let at_zero = 0.8 * (1.0 - 4.0 * (4.0f64.powf(2.0)).powf(-0.5));
        assert!(at_zero.abs() < 1e-15);
    }

    #[test]
    fn tabulated_extends_as_constant() {
        let c = RewardCurve::tabulated(vec![0.1, 0.2, 0.4]);
        assert_eq!(c.eval(3), 0.4);
        assert_eq!(c.eval(50), 0.4);
        assert_eq!(c.increment(3), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RewardCurve::Polynomial { c: 0.5, b: 1.0, rho: 1.5 }.validate().is_err());
        assert!(RewardCurve::Exponential { c: 0.0, a: 0.5 }.validate().is_err());
        assert!(RewardCurve::tabulated(vec![0.3, 0.2]).validate().is_err());
        assert!(RewardCurve::tabulated(vec![]).validate().is_err());
        assert!(RewardCurve::LinearCapped { slope: -1.0, cap: 0.5, offset: 0.0 }.validate().is_err());
    }

    #[test]
    fn serde_shape() {
        let c = RewardCurve::Exponential { c: 1.0, a: 0.5 };
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"family":"exponential","params":{"c":1.0,"a":0.5}}"#);
    }
}
