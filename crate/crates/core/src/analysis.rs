//! Closed-form side of the model: the chi-square law of the generated
//! interference, its small-argument lower bound, qualification
//! probabilities and finite-grid trend checks for the asymptotic claims.
//!
//! All incomplete-gamma evaluations have integer shape `K−1`, so the
//! regularised function is the Erlang CDF
//! `P(n, x) = 1 − e^{−x} Σ_{j<n} x^j/j!`. For small `x` that difference
//! cancels badly and the equivalent tail series `e^{−x} Σ_{j≥n} x^j/j!`
//! is summed instead.

use crate::error::{domain_err, Result};
use crate::scheduling::DosParams;

/// `Γ(n) = (n−1)!` for integer `n ≥ 1`.
pub fn gamma_int(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(domain_err("Gamma(0) is undefined"));
    }
    Ok((1..n).map(f64::from).product())
}

/// Regularised lower incomplete gamma `γ(n, x)/Γ(n)` for integer `n ≥ 1`.
pub fn regularized_lower_gamma(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain_err("shape must be >= 1"));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain_err(format!("argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let nf = f64::from(n);
    if x < nf + 1.0 {
        // e^{-x} x^n/n! · Σ_{m≥0} x^m n!/(n+m)!
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut m = 1.0;
        while term > sum * 1e-17 {
            term *= x / (nf + m);
            sum += term;
            m += 1.0;
        }
        let log_lead = -x + nf * x.ln() - ln_factorial(n);
        Ok((log_lead.exp() * sum).min(1.0))
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..n {
            term *= x / f64::from(j);
            sum += term;
        }
        Ok((1.0 - (-x).exp() * sum).clamp(0.0, 1.0))
    }
}

/// Lower incomplete gamma `γ(n, x)` for integer `n ≥ 1`.
pub fn lower_gamma(n: u32, x: f64) -> Result<f64> {
    Ok(regularized_lower_gamma(n, x)? * gamma_int(n)?)
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|j| f64::from(j).ln()).sum()
}

fn shape(cells: usize) -> Result<u32> {
    if cells == 0 {
        return Err(domain_err("K must be >= 1"));
    }
    u32::try_from(cells - 1).map_err(|_| domain_err("K too large"))
}

/// CDF of the chi-square law with `2(K−1)` degrees of freedom,
/// `F(x) = γ(K−1, x/2)/Γ(K−1)`. With a single cell there is nothing to sum
/// and `F ≡ 1`.
pub fn chi2_cdf(cells: usize, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(domain_err(format!("chi-square CDF needs x >= 0, got {x}")));
    }
    match shape(cells)? {
        0 => Ok(1.0),
        n => regularized_lower_gamma(n, x / 2.0),
    }
}

/// CDF of `Σ_{k≠i} |h_k|²`, a sum of `K−1` unit-mean exponentials. Since
/// `2·Σ|h|²` is chi-square with `2(K−1)` degrees of freedom this is
/// `chi2_cdf(K, 2x)`.
pub fn interference_sum_cdf(cells: usize, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(domain_err(format!("CDF argument must be >= 0, got {x}")));
    }
    chi2_cdf(cells, 2.0 * x)
}

/// `c1 = e^{-1}·2^{-(K−1)} / ((K−1)·Γ(K−1))`, defined for `K ≥ 2`.
pub fn c1(cells: usize) -> Result<f64> {
    let n = shape(cells)?;
    if n == 0 {
        return Err(domain_err("c1 is defined for K >= 2"));
    }
    Ok((-1f64).exp() * 2f64.powi(-(n as i32)) / (f64::from(n) * gamma_int(n)?))
}

/// `c1·x^{K−1}`, a lower bound on `chi2_cdf(K, x)` for `0 ≤ x < 2`.
pub fn lemma2_bound(cells: usize, x: f64) -> Result<f64> {
    if !(0.0..2.0).contains(&x) {
        return Err(domain_err(format!("bound holds for 0 <= x < 2, got {x}")));
    }
    let c = c1(cells)?;
    Ok(c * x.powi((cells - 1) as i32))
}

/// Probability that a user passes both DOS criteria when every `β = 1`:
/// `Pr{Σ|h|² ≤ η_I/scale} · e^{−η_tr}`, the two events being independent.
pub fn qualification_probability(cells: usize, snr: f64, params: &DosParams) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(domain_err(format!("SNR must be > 0, got {snr}")));
    }
    let limit = params.eta_i / params.interference_scale(snr);
    let interference = if limit.is_infinite() {
        1.0
    } else {
        interference_sum_cdf(cells, limit)?
    };
    Ok(interference * (-params.eta_tr).exp())
}

/// `1 − (1 − p)^N` with `p` the per-user qualification probability.
pub fn prob_at_least_one(cells: usize, users: usize, snr: f64, params: &DosParams) -> Result<f64> {
    if users == 0 {
        return Err(domain_err("N must be >= 1"));
    }
    let p = qualification_probability(cells, snr, params)?;
    if p >= 1.0 {
        return Ok(1.0);
    }
    Ok(-((users as f64) * (-p).ln_1p()).exp_m1())
}

/// Growth driver `N^{1−ε} / SNR^{K−1}` of the at-least-one-qualifier
/// condition, compared against a configurable threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingCondition {
    pub driver: f64,
    pub threshold: f64,
    pub satisfied: bool,
    /// `N` has to outgrow `SNR^{required_exponent}`.
    pub required_exponent: f64,
}

pub fn scaling_condition(
    cells: usize,
    users: f64,
    snr: f64,
    epsilon: f64,
    threshold: f64,
) -> Result<ScalingCondition> {
    if cells == 0 {
        return Err(domain_err("K must be >= 1"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(domain_err(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(users >= 1.0 && snr > 0.0) {
        return Err(domain_err("need N >= 1 and SNR > 0"));
    }
    let k1 = (cells - 1) as f64;
    // log domain keeps N = SNR^5 style inputs finite
    let driver = ((1.0 - epsilon) * users.ln() - k1 * snr.ln()).exp();
    Ok(ScalingCondition {
        driver,
        threshold,
        satisfied: driver > threshold,
        required_exponent: k1 / (1.0 - epsilon),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LemmaFamily {
    /// `f(x) = c/x`: `x·f(x) = c` stays bounded.
    Reciprocal { c: f64 },
    /// `f(x) = c·x^{a−1}` with `a > 0`: `x·f(x) = c·x^a` diverges.
    Power { c: f64, a: f64 },
}

impl LemmaFamily {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            LemmaFamily::Reciprocal { c } => c / x,
            LemmaFamily::Power { c, a } => c * x.powf(a - 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Increasing,
    Decreasing,
    Flat,
    Mixed,
}

fn trend(values: &[f64], rel_tol: f64) -> Trend {
    let mut up = false;
    let mut down = false;
    for w in values.windows(2) {
        let scale = w[0].abs().max(w[1].abs()).max(f64::MIN_POSITIVE);
        let d = (w[1] - w[0]) / scale;
        if d > rel_tol {
            up = true;
        } else if d < -rel_tol {
            down = true;
        }
    }
    match (up, down) {
        (true, false) => Trend::Increasing,
        (false, true) => Trend::Decreasing,
        (false, false) => Trend::Flat,
        (true, true) => Trend::Mixed,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Row {
    pub x: f64,
    pub f: f64,
    pub product: f64,
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Report {
    pub family: LemmaFamily,
    pub rows: Vec<Lemma1Row>,
    /// Trend of `x·f(x)` along the grid.
    pub product_trend: Trend,
    /// Trend of `(1 − f(x))^x` along the grid.
    pub power_trend: Trend,
}

impl Lemma1Report {
    pub fn last(&self) -> &Lemma1Row {
        self.rows.last().expect("grid is nonempty")
    }
}

/// Evaluates `(1 − f(x))^x` and `x·f(x)` along `grid` for one family.
pub fn lemma1_numeric_check(family: LemmaFamily, grid: &[f64]) -> Result<Lemma1Report> {
    if grid.is_empty() {
        return Err(domain_err("x grid is empty"));
    }
    let rows = grid
        .iter()
        .map(|&x| {
            if !(x > 0.0 && x.is_finite()) {
                return Err(domain_err(format!("grid point {x} must be finite and > 0")));
            }
            let f = family.eval(x);
            if !(0.0..=1.0).contains(&f) {
                return Err(domain_err(format!("f({x}) = {f} is outside [0, 1]")));
            }
            Ok(Lemma1Row {
                x,
                f,
                product: x * f,
                power: (x * (-f).ln_1p()).exp(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let products: Vec<f64> = rows.iter().map(|r| r.product).collect();
    let powers: Vec<f64> = rows.iter().map(|r| r.power).collect();
    Ok(Lemma1Report {
        family,
        product_trend: trend(&products, 1e-9),
        power_trend: trend(&powers, 1e-9),
        rows,
    })
}
