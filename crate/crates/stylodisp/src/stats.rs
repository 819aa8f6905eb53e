//! Statistical primitives shared by the dispersion and correlation stages:
//! Welch's and Student's t-tests, Pearson correlation with p-values, and the
//! regularized incomplete beta function both tests reduce to.
//!
//! Everything here is pure and reentrant. Two-sided p-values for a t statistic
//! at `df` degrees of freedom are computed as `I_x(df/2, 1/2)` with
//! `x = df / (df + t^2)`.

use thiserror::Error;

/// Computed p-values are floored here instead of reporting 0; results carry an
/// `underflow` flag when the floor was applied.
pub const P_VALUE_FLOOR: f64 = 1e-300;

const BETA_EPS: f64 = 1e-16;
const BETA_TINY: f64 = 1e-300;
const BETA_MAX_ITER: usize = 500;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("sample too small: need at least {need}, got {got}")]
    SampleTooSmall { need: usize, got: usize },
    #[error("samples have mismatched lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("zero variance, nonzero difference: both samples constant but unequal")]
    ZeroVarianceNonzeroDiff,
    #[error("constant input: sample has zero variance")]
    ConstantInput,
    #[error("non-finite value in sample")]
    NonFinite,
    #[error("parameter out of domain: {0}")]
    Domain(&'static str),
}

/// Outcome of a two-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestResult {
    /// The t statistic. Positive when mean(a) > mean(b).
    pub t: f64,
    /// Degrees of freedom; real-valued (Welch–Satterthwaite is not rounded).
    pub df: f64,
    /// Two-sided tail probability of Student-t(df) at |t|, in (0, 1].
    pub p: f64,
    /// True when the computed p fell below [`P_VALUE_FLOOR`] and was clamped.
    pub underflow: bool,
}

/// Pearson product-moment correlation with its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PearsonResult {
    /// Correlation coefficient in [-1, 1].
    pub r: f64,
    /// Number of paired observations.
    pub n: usize,
    /// Two-sided p-value from t = r * sqrt((n-2)/(1-r^2)) on Student-t(n-2).
    pub p: f64,
    /// True when |r| = 1 and p is reported as the smallest positive f64.
    pub exact: bool,
    /// True when p was clamped to [`P_VALUE_FLOOR`].
    pub underflow: bool,
}

/// Natural log of the gamma function for positive arguments.
///
/// Lanczos approximation (g = 7, 15 coefficients), accurate to ~1e-15
/// relative over the range used here.
pub fn ln_gamma(x: f64) -> f64 {
    // Coefficients for g = 7, n = 9 (Godfrey / Pugh tabulation).
    const COEFFS: [f64; 9] = [
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
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps accuracy for small arguments.
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta function I_x(a, b).
///
/// Continued-fraction evaluation (modified Lentz), switching to the
/// symmetric form `1 - I_{1-x}(b, a)` when `x > (a+1)/(a+b+2)` so the
/// fraction always converges fast. Absolute accuracy is ~1e-14 on the
/// parameter ranges exercised by the t-tests.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64, StatsError> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(StatsError::Domain("a and b must be positive"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(StatsError::Domain("x must lie in [0, 1]"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let front = (a * x.ln() + b * (1.0 - x).ln() + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b))
        .exp();
    // The front factor x^a (1-x)^b / B(a,b) is symmetric under
    // (a, b, x) -> (b, a, 1-x), so both branches share it.
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cont_frac(a, b, x) / a)
    } else {
        Ok(1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b)
    }
}

fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < BETA_TINY {
        d = BETA_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETA_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < BETA_TINY {
            d = BETA_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < BETA_TINY {
            c = BETA_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < BETA_TINY {
            d = BETA_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < BETA_TINY {
            c = BETA_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < BETA_EPS {
            break;
        }
    }
    h
}

/// Two-sided tail probability of Student-t(df) at |t|.
pub fn student_t_two_sided_p(t: f64, df: f64) -> Result<f64, StatsError> {
    if !(df > 0.0) {
        return Err(StatsError::Domain("degrees of freedom must be positive"));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let x = df / (df + t * t);
    reg_inc_beta(df / 2.0, 0.5, x)
}

fn mean_and_var(sample: &[f64]) -> Result<(f64, f64), StatsError> {
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var))
}

fn finish_t(t: f64, df: f64) -> Result<TTestResult, StatsError> {
    let raw = student_t_two_sided_p(t, df)?;
    let underflow = raw < P_VALUE_FLOOR;
    Ok(TTestResult {
        t,
        df,
        p: if underflow { P_VALUE_FLOOR } else { raw },
        underflow,
    })
}

/// Welch's unequal-variance two-sided t-test with Satterthwaite df.
///
/// Two identical constant samples are not an error: they compare equal with
/// t = 0 and p = 1. Two *different* constant samples are degenerate and
/// rejected, since no finite t statistic describes them.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TTestResult, StatsError> {
    if a.len() < 2 {
        return Err(StatsError::SampleTooSmall { need: 2, got: a.len() });
    }
    if b.len() < 2 {
        return Err(StatsError::SampleTooSmall { need: 2, got: b.len() });
    }
    let (ma, va) = mean_and_var(a)?;
    let (mb, vb) = mean_and_var(b)?;
    if va == 0.0 && vb == 0.0 {
        if ma == mb {
            return Ok(TTestResult {
                t: 0.0,
                df: (a.len() + b.len() - 2) as f64,
                p: 1.0,
                underflow: false,
            });
        }
        return Err(StatsError::ZeroVarianceNonzeroDiff);
    }
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let sa = va / na;
    let sb = vb / nb;
    let t = (ma - mb) / (sa + sb).sqrt();
    let df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    finish_t(t, df)
}

/// Student's pooled-variance two-sided t-test (equal-variance assumption).
pub fn student_t_pooled(a: &[f64], b: &[f64]) -> Result<TTestResult, StatsError> {
    if a.len() < 2 {
        return Err(StatsError::SampleTooSmall { need: 2, got: a.len() });
    }
    if b.len() < 2 {
        return Err(StatsError::SampleTooSmall { need: 2, got: b.len() });
    }
    let (ma, va) = mean_and_var(a)?;
    let (mb, vb) = mean_and_var(b)?;
    if va == 0.0 && vb == 0.0 {
        if ma == mb {
            return Ok(TTestResult {
                t: 0.0,
                df: (a.len() + b.len() - 2) as f64,
                p: 1.0,
                underflow: false,
            });
        }
        return Err(StatsError::ZeroVarianceNonzeroDiff);
    }
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let df = na + nb - 2.0;
    let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    let t = (ma - mb) / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    finish_t(t, df)
}

/// Pearson product-moment correlation with a two-sided p-value.
///
/// Constant inputs are rejected; callers that tabulate many feature columns
/// are expected to mask those instead. |r| = 1 gets the smallest positive
/// f64 as its p-value plus the `exact` flag, since the t transform diverges.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<PearsonResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::SampleTooSmall { need: 3, got: x.len() });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    // Cauchy-Schwarz: sxy^2 <= sxx*syy with equality iff exact linearity.
    let r = if sxy * sxy >= sxx * syy {
        sxy.signum()
    } else {
        (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
    };
    if r == 1.0 || r == -1.0 {
        return Ok(PearsonResult {
            r,
            n: x.len(),
            p: f64::MIN_POSITIVE,
            exact: true,
            underflow: false,
        });
    }
    let df = n - 2.0;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let raw = student_t_two_sided_p(t, df)?;
    let underflow = raw < P_VALUE_FLOOR;
    Ok(PearsonResult {
        r,
        n: x.len(),
        p: if underflow { P_VALUE_FLOOR } else { raw },
        exact: false,
        underflow,
    })
}

/// Star annotation for a p-value at the .05 / .01 thresholds.
pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inc_beta_endpoints() {
        assert_eq!(reg_inc_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(2.0, 3.0, 1.0).unwrap(), 1.0);
        // Uniform distribution: I_x(1,1) = x.
        assert!((reg_inc_beta(1.0, 1.0, 0.5).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn inc_beta_symmetry_identity() {
        // I_x(a,b) + I_{1-x}(b,a) = 1 over a grid.
        for &a in &[0.5, 1.0, 2.5, 10.0, 60.0] {
            for &b in &[0.5, 1.0, 3.0, 25.0] {
                for i in 1..20 {
                    let x = i as f64 / 20.0;
                    let lhs = reg_inc_beta(a, b, x).unwrap();
                    let rhs = reg_inc_beta(b, a, 1.0 - x).unwrap();
                    assert!(
                        (lhs + rhs - 1.0).abs() < 1e-12,
                        "identity violated at a={a} b={b} x={x}: {lhs} + {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn inc_beta_known_values() {
        // I_x(2,2) = x^2 (3 - 2x), exact closed form.
        for i in 1..10 {
            let x = i as f64 / 10.0;
            let expect = x * x * (3.0 - 2.0 * x);
            assert!((reg_inc_beta(2.0, 2.0, x).unwrap() - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn inc_beta_domain_errors() {
        assert!(reg_inc_beta(0.0, 1.0, 0.5).is_err());
        assert!(reg_inc_beta(1.0, -1.0, 0.5).is_err());
        assert!(reg_inc_beta(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn welch_identical_samples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let r = welch_t(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn welch_antisymmetry() {
        let a = [1.0, 2.0, 3.0, 4.5, 2.2];
        let b = [2.0, 3.1, 4.0, 5.5];
        let ab = welch_t(&a, &b).unwrap();
        let ba = welch_t(&b, &a).unwrap();
        assert!((ab.t + ba.t).abs() < 1e-15);
        assert_eq!(ab.p, ba.p);
        assert!((ab.df - ba.df).abs() < 1e-12);
    }

    #[test]
    fn welch_p_monotone_in_t() {
        // At fixed df, larger |t| means smaller p.
        let mut last = 1.0;
        for i in 1..40 {
            let t = i as f64 * 0.25;
            let p = student_t_two_sided_p(t, 12.3).unwrap();
            assert!(p < last, "p not decreasing at t={t}");
            last = p;
        }
    }

    #[test]
    fn welch_degenerate_cases() {
        let c1 = [2.0, 2.0, 2.0];
        let c2 = [3.0, 3.0, 3.0];
        assert_eq!(welch_t(&c1, &c1).unwrap().p, 1.0);
        assert_eq!(welch_t(&c1, &c2), Err(StatsError::ZeroVarianceNonzeroDiff));
        assert!(matches!(
            welch_t(&[1.0], &c1),
            Err(StatsError::SampleTooSmall { .. })
        ));
    }

    #[test]
    fn pearson_exact_lines() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let r = pearson(&x, &x).unwrap();
        assert_eq!(r.r, 1.0);
        assert!(r.exact);
        let y: Vec<f64> = x.iter().map(|v| -2.0 * v + 3.0).collect();
        let r = pearson(&x, &y).unwrap();
        assert_eq!(r.r, -1.0);
    }

    #[test]
    fn pearson_hand_value() {
        // (1,2),(2,4),(3,5): sxy = 3, sxx = 2, syy = 14/3;
        // r = 3 / sqrt(2 * 14/3) = 3 / sqrt(28/3) = 0.9819805060619659.
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 5.0]).unwrap();
        assert!((r.r - 0.981_980_506_061_965_9).abs() < 1e-12);
    }

    #[test]
    fn pearson_affine_invariance() {
        let x = [0.3, 1.7, 2.2, 5.0, 4.1, 3.3];
        let y = [1.0, 0.4, 2.9, 4.2, 3.3, 1.1];
        let r0 = pearson(&x, &y).unwrap().r;
        let xs: Vec<f64> = x.iter().map(|v| 7.5 * v + 100.0).collect();
        let ys: Vec<f64> = y.iter().map(|v| 0.01 * v - 3.0).collect();
        let r1 = pearson(&xs, &ys).unwrap().r;
        assert!((r0 - r1).abs() < 1e-12);
        let yneg: Vec<f64> = y.iter().map(|v| -v).collect();
        let r2 = pearson(&x, &yneg).unwrap().r;
        assert!((r0 + r2).abs() < 1e-12);
    }

    #[test]
    fn pearson_errors() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::LengthMismatch(2, 3))
        );
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::SampleTooSmall { .. })
        ));
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ConstantInput)
        );
    }

    #[test]
    fn stars_thresholds() {
        assert_eq!(significance_stars(0.005), "**");
        assert_eq!(significance_stars(0.01), "*");
        assert_eq!(significance_stars(0.049), "*");
        assert_eq!(significance_stars(0.05), "");
        assert_eq!(significance_stars(1.0), "");
    }
}
