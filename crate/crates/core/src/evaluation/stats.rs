//! Paired t-test with a two-tailed Student-t p-value from the regularized
//! incomplete beta function.

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TTest {
    /// Every paired difference is zero.
    NotApplicable,
    /// `t` is infinite when the differences are constant and nonzero; `p`
    /// is then 0.
    Computed { t: f64, p: f64 },
}

impl TTest {
    pub fn p_value(&self) -> Option<f64> {
        match self {
            TTest::NotApplicable => None,
            TTest::Computed { p, .. } => Some(*p),
        }
    }

    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value().is_some_and(|p| p < alpha)
    }
}

/// Tests `b - a`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(EvalError::TooFewPairs(n));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    if d.iter().all(|&x| x == 0.0) {
        return Ok(TTest::NotApplicable);
    }
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    // Constant differences leave only rounding noise in `var`.
    if sd <= 1e-12 * mean.abs() {
        return Ok(TTest::Computed { t: mean.signum() * f64::INFINITY, p: 0.0 });
    }
    let t = mean / (sd / nf.sqrt());
    Ok(TTest::Computed { t, p: student_t_two_tailed(t, nf - 1.0) })
}

/// `P(|T| >= |t|)` for `df` degrees of freedom.
pub fn student_t_two_tailed(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5)
}

/// Lanczos approximation (g = 7, 9 terms).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
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
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `I_x(a, b)` by Lentz's continued fraction, using the symmetry
/// `I_x(a, b) = 1 - I_{1-x}(b, a)` where it converges faster.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_fraction(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_fraction(1.0 - x, b, a) / b
    }
}

fn beta_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let clamp = |v: f64| if v.abs() < TINY { TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - (a + b) * x / (a + 1.0));
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 / clamp(1.0 + even * d);
        c = clamp(1.0 + even / c);
        h *= d * c;
        let odd = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 / clamp(1.0 + odd * d);
        c = clamp(1.0 + odd / c);
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_at_integers_and_half() {
        let mut fact = 1.0f64;
        for n in 1..20 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12, "{n}");
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn beta_closed_forms() {
        // I_x(1, b) = 1 - (1 - x)^b and I_x(a, 1) = x^a.
        for &x in &[0.01f64, 0.2, 0.5, 0.77, 0.99] {
            for &k in &[0.5, 1.0, 2.5, 7.0] {
                assert!((regularized_incomplete_beta(x, 1.0, k) - (1.0 - (1.0 - x).powf(k))).abs() < 1e-13);
                assert!((regularized_incomplete_beta(x, k, 1.0) - x.powf(k)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn one_degree_of_freedom_is_cauchy() {
        for &t in &[0.1f64, 1.0, 3.0, 25.0] {
            let exact = 1.0 - 2.0 * t.atan() / std::f64::consts::PI;
            assert!((student_t_two_tailed(t, 1.0) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_cases() {
        assert_eq!(paired_t_test(&[0.5, 0.6], &[0.5, 0.6]).unwrap(), TTest::NotApplicable);
        assert_eq!(
            paired_t_test(&[0.0; 4], &[1.0; 4]).unwrap(),
            TTest::Computed { t: f64::INFINITY, p: 0.0 }
        );
        assert_eq!(
            paired_t_test(&[0.3, 0.4, 0.5], &[0.2, 0.3, 0.4]).unwrap(),
            TTest::Computed { t: f64::NEG_INFINITY, p: 0.0 }
        );
        assert!(matches!(paired_t_test(&[1.0], &[2.0]), Err(EvalError::TooFewPairs(1))));
        assert!(matches!(paired_t_test(&[1.0, 2.0], &[2.0]), Err(EvalError::LengthMismatch(2, 1))));
    }

    #[test]
    fn symmetric_in_arguments() {
        let a = [0.61, 0.64, 0.58, 0.70];
        let b = [0.66, 0.65, 0.63, 0.71];
        let (TTest::Computed { t: t1, p: p1 }, TTest::Computed { t: t2, p: p2 }) =
            (paired_t_test(&a, &b).unwrap(), paired_t_test(&b, &a).unwrap())
        else {
            panic!("expected computed tests");
        };
        assert_eq!(t1, -t2);
        assert_eq!(p1, p2);
    }
}
