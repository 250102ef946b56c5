//! Closed-form bounds for GREEDY allocation.
//!
//! All logarithms are natural. Probability-valued results are clamped into
//! `[0, 1]`, and every semantic clamp is reported through a diagnostic.

use std::f64::consts::{E, PI};

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(name, format!("{v} is outside [0, 1]")));
    }
    Ok(())
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::invalid(name, format!("must be positive, got {v}")));
    }
    Ok(())
}

/// A probability bound with the unclamped value it came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probability {
    pub value: f64,
    pub raw: f64,
    pub diagnostic: Option<String>,
}

impl Probability {
    fn clamped(raw: f64, what: &str) -> Self {
        let value = raw.clamp(0.0, 1.0);
        let diagnostic = (value != raw).then(|| format!("{what} = {raw} clamped to {value}"));
        Self {
            value,
            raw,
            diagnostic,
        }
    }
}

/// Upper bound `x^d·m` on the expected balls in the least `xn` bins.
pub fn subset_upper_bound(x: f64, d: u32, m: f64) -> Result<f64> {
    check_unit("x", x)?;
    Ok(x.powi(d as i32) * m)
}

/// `P(Bin(m, p) >= k)`, summed in log space from the side away from the mode.
pub fn binomial_upper_tail(m: u64, p: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > m || p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let mf = m as f64;
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let ln_term = |i: u64| {
        let i = i as f64;
        ln_gamma(mf + 1.0) - ln_gamma(i + 1.0) - ln_gamma(mf - i + 1.0) + i * ln_p + (mf - i) * ln_q
    };
    let odds = p / (1.0 - p);
    if k as f64 > mf * p {
        // terms decrease geometrically from k upward
        let mut rel = 1.0f64;
        let mut cur = 1.0f64;
        let mut i = k;
        while i < m {
            cur *= (m - i) as f64 / (i + 1) as f64 * odds;
            rel += cur;
            if cur < 1e-17 * rel {
                break;
            }
            i += 1;
        }
        (ln_term(k) + rel.ln()).exp().clamp(0.0, 1.0)
    } else {
        // lower tail P(X <= k-1), terms decrease from k-1 downward
        let top = k - 1;
        let mut rel = 1.0f64;
        let mut cur = 1.0f64;
        let mut i = top;
        while i > 0 {
            cur *= i as f64 / (m - i + 1) as f64 / odds;
            rel += cur;
            if cur < 1e-17 * rel {
                break;
            }
            i -= 1;
        }
        let lower = (ln_term(top) + rel.ln()).exp();
        (1.0 - lower).clamp(0.0, 1.0)
    }
}

/// Upper bound on the probability that the least `xn` bins hold at least `k`
/// of `m` balls: the upper tail of `Bin(m, x^d)` at `k`.
pub fn subset_tail_bound(x: f64, d: u32, m: u64, k: u64) -> Result<f64> {
    check_unit("x", x)?;
    Ok(binomial_upper_tail(m, x.powi(d as i32), k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LowerBoundCase {
    /// `xn > d`: `x^{d+1} m / (2ed)`.
    Spread,
    /// `1 < xn <= d`: `e^{-d} x^d m`.
    Narrow,
    /// `xn = 1`: `x^{d+1} m`.
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetLowerBound {
    pub case: LowerBoundCase,
    pub value: f64,
    /// The simplified-argument bound `3^{-d} x^{d+1} m / (6 - 4x)`.
    pub sketch: f64,
}

/// Lower bound on the expected balls in the least `xn` bins under
/// GREEDY(m, n, d), picking the case by `xn`.
pub fn subset_lower_bound(x: f64, n: u64, d: u32, m: f64) -> Result<SubsetLowerBound> {
    check_unit("x", x)?;
    let xn = x * n as f64;
    let tol = 1e-9 * xn.max(1.0);
    if xn < 1.0 - tol {
        return Err(Error::invalid(
            "x",
            format!("x·n = {xn} must be at least 1"),
        ));
    }
    let df = d as f64;
    let (case, value) = if (xn - 1.0).abs() <= tol {
        (LowerBoundCase::Single, x.powi(d as i32 + 1) * m)
    } else if xn > df + tol {
        (
            LowerBoundCase::Spread,
            x.powi(d as i32 + 1) * m / (2.0 * E * df),
        )
    } else {
        (LowerBoundCase::Narrow, (-df).exp() * x.powi(d as i32) * m)
    };
    Ok(SubsetLowerBound {
        case,
        value,
        sketch: sketch_lower_bound(x, d, m),
    })
}

/// `3^{-d} x^{d+1} m / (6 - 4x)`.
pub fn sketch_lower_bound(x: f64, d: u32, m: f64) -> f64 {
    good_step_share(3f64.powi(-(d as i32)) * x.powi(d as i32) * m, x)
}

/// Balls guaranteed in the least `xn` bins after `s` steps whose option sets
/// fell inside the least `xn/3`: `s·x / (6 - 4x)`.
pub fn good_step_share(s: f64, x: f64) -> f64 {
    s * x / (6.0 - 4.0 * x)
}

/// A formula value, or the reason it does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RegimeValue {
    InRegime { value: f64, denominator: f64 },
    OutOfRegime { denominator: f64 },
}

impl RegimeValue {
    fn from_parts(numerator: f64, denominator: f64) -> Self {
        if denominator > 0.0 {
            RegimeValue::InRegime {
                value: numerator / denominator,
                denominator,
            }
        } else {
            RegimeValue::OutOfRegime { denominator }
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            RegimeValue::InRegime { value, .. } => Some(value),
            RegimeValue::OutOfRegime { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxLoadBound {
    /// `(2+ε) ln n / (ln ln n − ln d − ln c)`.
    pub constant: RegimeValue,
    /// `(2+ε) ln n / (ln(2+ε) + ln ln n − ln c − ln d)`.
    pub general: RegimeValue,
}

/// High-probability maximum-load bounds for GREEDY(cn, n, d).
pub fn maxload_bound(c: f64, d: f64, n: u64, eps: f64) -> Result<MaxLoadBound> {
    check_positive("c", c)?;
    check_positive("d", d)?;
    check_positive("eps", eps)?;
    if n < 2 {
        return Err(Error::invalid("n", "need at least two bins"));
    }
    let ln_n = (n as f64).ln();
    let numerator = (2.0 + eps) * ln_n;
    let lnln = ln_n.ln();
    Ok(MaxLoadBound {
        constant: RegimeValue::from_parts(numerator, lnln - d.ln() - c.ln()),
        general: RegimeValue::from_parts(numerator, (2.0 + eps).ln() + lnln - c.ln() - d.ln()),
    })
}

/// `(e^{β−1} β^{−β})^{cd}`, evaluated as `exp(cd(β − 1 − β ln β))`.
pub fn chernoff_upper(beta: f64, c: f64, d: f64) -> Result<f64> {
    check_positive("beta", beta)?;
    if !(c * d >= 0.0) {
        return Err(Error::invalid("c*d", "must be non-negative"));
    }
    Ok((c * d * (beta - 1.0 - beta * beta.ln())).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwapBound {
    /// Load lead `δn/(d−1)` that makes a later swap unlikely.
    pub gap: f64,
    /// `e^{−δ}`.
    pub probability: f64,
}

pub fn swap_gap_and_bound(delta: f64, n: u64, d: u32) -> Result<SwapBound> {
    if d < 2 {
        return Err(Error::invalid("d", "swap bound needs d >= 2"));
    }
    if !(delta >= 0.0) {
        return Err(Error::invalid(
            "delta",
            format!("must be non-negative, got {delta}"),
        ));
    }
    Ok(SwapBound {
        gap: delta * n as f64 / (d - 1) as f64,
        probability: (-delta).exp(),
    })
}

/// Ruin probability `((1−ε)/(1+ε))^x` of a walk with up-probability
/// `(1+ε)/2` started at `x`.
pub fn ruin_probability(x: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(
            "epsilon",
            format!("{eps} is outside (0, 1)"),
        ));
    }
    if !(x >= 0.0) {
        return Err(Error::invalid(
            "x",
            format!("must be non-negative, got {x}"),
        ));
    }
    Ok(((1.0 - eps) / (1.0 + eps)).powf(x))
}

/// Walk bias `ε` with `(1+ε)/2 = (n^d − (n−1)^d) / (n^d − (n−2)^d)`: the
/// smallest chance that the larger of two adjacent-rank bins wins a ball,
/// attained by the two largest bins.
pub fn bias_epsilon(n: u64, d: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid("n", "need at least three bins"));
    }
    if d < 2 {
        return Err(Error::invalid("d", "bias needs d >= 2"));
    }
    // x^d − y^d = (x−y) Σ x^i y^{d−1−i}; avoids cancellation for large n
    let diff_sum = |x: f64, y: f64| {
        (0..d)
            .map(|i| x.powi(i as i32) * y.powi((d - 1 - i) as i32))
            .sum::<f64>()
    };
    let nf = n as f64;
    let top = diff_sum(nf, nf - 1.0);
    let bottom = 2.0 * diff_sum(nf, nf - 2.0);
    Ok(2.0 * top / bottom - 1.0)
}

/// Bound `(4d²/n) e^{t d²/n}` on the chance of an intersecting option-set
/// chain within `t` steps.
pub fn paradox_prob_bound(t: f64, n: u64, d: u32) -> Probability {
    let d2 = (d as f64).powi(2);
    let nf = n as f64;
    Probability::clamped(4.0 * d2 / nf * (t * d2 / nf).exp(), "paradox bound")
}

/// Polynomial order `c d² − 1` of the paradox bound at `t = c·n·ln n`.
pub fn paradox_exponent(c: f64, d: u32) -> f64 {
    c * (d as f64).powi(2) - 1.0
}

/// Parameters of the equal-load and `j`-gap probability products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EqualLoadParams {
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub m_prime: u64,
    pub t_steps: u64,
    pub m: u64,
    pub n: u64,
    pub d: u32,
    /// Gap size; 1 asks for unequal loads.
    pub j: u64,
}

impl EqualLoadParams {
    /// Parameter choice for `n² log n = o(m)`: `t = n ln n / (2d²)`,
    /// `α = β = √(m' ln n)`, `λ = √(t ln n)`, `γ = (ln n)^{3/4}`,
    /// `ε = δ^{(d+1)/(d−1)} / 32`.
    pub fn asymptotic_choice(delta: f64, n: u64, m: u64, d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid("d", "needs d >= 2"));
        }
        let ln_n = (n as f64).ln();
        let t_steps = ((n as f64) * ln_n / (2.0 * (d as f64).powi(2))).floor() as u64;
        if t_steps >= m {
            return Err(Error::invalid("m", format!("must exceed t = {t_steps}")));
        }
        let m_prime = m - t_steps;
        let dm1 = (d - 1) as f64;
        Ok(Self {
            delta,
            alpha: (m_prime as f64 * ln_n).sqrt(),
            beta: (m_prime as f64 * ln_n).sqrt(),
            epsilon: delta.powf((d as f64 + 1.0) / dm1) / 32.0,
            lambda: (t_steps as f64 * ln_n).sqrt(),
            gamma: ln_n.powf(0.75),
            m_prime,
            t_steps,
            m,
            n,
            d,
            j: 1,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.m_prime.checked_add(self.t_steps) != Some(self.m) {
            return Err(Error::invalid(
                "m_prime + t_steps",
                format!("{} + {} != m = {}", self.m_prime, self.t_steps, self.m),
            ));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("epsilon", self.epsilon),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
        ] {
            check_positive(name, v)?;
        }
        if self.delta >= 1.0 {
            return Err(Error::invalid("delta", "must be below 1"));
        }
        if self.m_prime == 0 || self.t_steps == 0 || self.n == 0 || self.d == 0 {
            return Err(Error::invalid("m_prime, t_steps, n, d", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Factor {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EqualLoadBound {
    pub precondition_lhs: f64,
    pub precondition_rhs: f64,
    pub precondition_satisfied: bool,
    pub factors: [Factor; 6],
    /// Unclamped product of the six factors.
    pub product: f64,
    /// Probability lower bound; 0 when the precondition fails or a factor
    /// is non-positive.
    pub bound: f64,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Precondition {
    /// `(δ^d m' − α)δ/((6−4δ)n) − (2^d ε^d m' + β)/(εn)`
    pub lhs: f64,
    /// `εdt + λ`
    pub rhs: f64,
    pub satisfied: bool,
}

/// Evaluates the gap precondition `lhs > rhs` of the equal-load bound.
pub fn equal_load_precondition(p: &EqualLoadParams) -> Result<Precondition> {
    p.validate()?;
    let n = p.n as f64;
    let di = p.d as i32;
    let mp = p.m_prime as f64;
    let eps = p.epsilon;
    let lhs = (p.delta.powi(di) * mp - p.alpha) * p.delta / ((6.0 - 4.0 * p.delta) * n)
        - (2f64.powi(di) * eps.powi(di) * mp + p.beta) / (eps * n);
    let rhs = eps * p.d as f64 * p.t_steps as f64 + p.lambda;
    Ok(Precondition {
        lhs,
        rhs,
        satisfied: lhs > rhs,
    })
}

/// Lower bound on the probability that two bins outside the least `δn`
/// are at least `j` balls apart (`j = 1`: not equal).
pub fn equal_load_bound(p: &EqualLoadParams) -> Result<EqualLoadBound> {
    let pre = equal_load_precondition(p)?;
    let n = p.n as f64;
    let d = p.d as f64;
    let di = p.d as i32;
    let mp = p.m_prime as f64;
    let t = p.t_steps as f64;
    let eps = p.epsilon;
    let (lhs, rhs, satisfied) = (pre.lhs, pre.rhs, pre.satisfied);

    let final_factor = if p.j == 0 {
        1.0
    } else {
        let q_low = 2.0 * d * eps.powi(di - 1) * t / n - p.gamma;
        if q_low <= 0.0 {
            return Err(Error::invalid(
                "gamma",
                format!("final factor undefined: 2dε^(d−1)t/n − γ = {q_low} <= 0"),
            ));
        }
        1.0 - p.j as f64 * (2.0 / (PI * q_low)).sqrt()
    };
    let factors = [
        Factor {
            name: "alpha_concentration",
            value: 1.0 - (-2.0 * p.alpha.powi(2) / mp).exp(),
        },
        Factor {
            name: "beta_concentration",
            value: 1.0 - (-2.0 * p.beta.powi(2) / mp).exp(),
        },
        Factor {
            name: "lambda_concentration",
            value: 1.0 - (-2.0 * p.lambda.powi(2) / t).exp(),
        },
        Factor {
            name: "important_count",
            value: 1.0
                - 2.0 * (-(p.gamma.powi(2) * n) / (2f64.powi(di + 3) * eps.powi(di - 1) * t)).exp(),
        },
        Factor {
            name: "no_intersecting_chain",
            value: 1.0 - (4.0 * d * d / n) * (t * d * d / n).exp(),
        },
        Factor {
            name: "antichain",
            value: final_factor,
        },
    ];
    let product: f64 = factors.iter().map(|f| f.value).product();
    let mut diagnostics = Vec::new();
    let mut bound = product;
    for f in &factors {
        if f.value <= 0.0 {
            diagnostics.push(format!(
                "factor {} = {} is non-positive; bound clamped to 0",
                f.name, f.value
            ));
            bound = 0.0;
        }
    }
    if !satisfied {
        diagnostics.push(format!(
            "precondition fails ({lhs} <= {rhs}); only the trivial bound 0 holds"
        ));
        bound = 0.0;
    }
    Ok(EqualLoadBound {
        precondition_lhs: lhs,
        precondition_rhs: rhs,
        precondition_satisfied: satisfied,
        factors,
        product,
        bound: bound.clamp(0.0, 1.0),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_upper_examples() {
        assert_eq!(subset_upper_bound(1.0, 3, 500.0).unwrap(), 500.0);
        assert_eq!(subset_upper_bound(0.5, 2, 1e5).unwrap(), 25_000.0);
        let n = 1e4f64;
        let v = subset_upper_bound(n.powf(-0.5), 2, 1e6).unwrap();
        assert!((v - 100.0).abs() < 1e-9);
        assert!(subset_upper_bound(-0.1, 2, 1.0).is_err());
    }

    #[test]
    fn tail_edges() {
        assert_eq!(subset_tail_bound(0.3, 2, 100, 0).unwrap(), 1.0);
        assert_eq!(subset_tail_bound(0.0, 2, 100, 1).unwrap(), 0.0);
        assert_eq!(subset_tail_bound(0.5, 2, 100, 101).unwrap(), 0.0);
        assert_eq!(subset_tail_bound(1.0, 2, 100, 100).unwrap(), 1.0);
    }

    #[test]
    fn tail_huge_m_is_finite() {
        let m = 1_000_000_000;
        let mean = 0.25 * m as f64;
        let at_mean = subset_tail_bound(0.5, 2, m, mean as u64).unwrap();
        assert!((at_mean - 0.5).abs() < 0.01, "{at_mean}");
        let far = subset_tail_bound(0.5, 2, m, (mean * 1.01) as u64).unwrap();
        assert!(far < 1e-100);
        let below = subset_tail_bound(0.5, 2, m, (mean * 0.99) as u64).unwrap();
        assert_eq!(below, 1.0);
    }

    #[test]
    fn lower_bound_cases() {
        let n = 100;
        let single = subset_lower_bound(1.0 / n as f64, n, 2, 1e4).unwrap();
        assert_eq!(single.case, LowerBoundCase::Single);
        assert!((single.value - 1e4 / (n as f64).powi(3)).abs() < 1e-12);

        let spread = subset_lower_bound(0.5, n, 2, 1e4).unwrap();
        assert_eq!(spread.case, LowerBoundCase::Spread);
        assert!((spread.value - 1e4 / (8.0 * 4.0 * E)).abs() < 1e-9);
        assert!((spread.value - 114.9).abs() < 0.1);

        let narrow = subset_lower_bound(0.02, n, 3, 1e4).unwrap();
        assert_eq!(narrow.case, LowerBoundCase::Narrow);
        assert!((narrow.value - (-3f64).exp() * 0.02f64.powi(3) * 1e4).abs() < 1e-12);

        assert!(subset_lower_bound(0.001, n, 2, 1.0).is_err());
        assert!((good_step_share(10.0, 0.5) - 1.25).abs() < 1e-15);
        assert!((spread.sketch - 1e4 / 9.0 * 0.125 / 4.0).abs() < 1e-9);
    }

    #[test]
    fn maxload_example() {
        let b = maxload_bound(1.0, 2.0, 1_000_000, 0.1).unwrap();
        let v = b.constant.value().unwrap();
        let ln_n = 1e6f64.ln();
        let expect = 2.1 * ln_n / (ln_n.ln() - 2f64.ln());
        assert!((v - expect).abs() < 1e-12);
        assert!((v - 15.01).abs() < 0.01, "{v}");
        assert!(b.general.value().unwrap() < v);
    }

    #[test]
    fn maxload_out_of_regime() {
        // ln c + ln d >= ln ln n
        let b = maxload_bound(3.0, 5.0, 1000, 0.5).unwrap();
        assert!(matches!(b.constant, RegimeValue::OutOfRegime { .. }));
        assert!(maxload_bound(1.0, 2.0, 1, 0.1).is_err());
    }

    #[test]
    fn maxload_monotone_in_eps() {
        let a = maxload_bound(1.0, 2.0, 10_000, 0.1).unwrap();
        let b = maxload_bound(1.0, 2.0, 10_000, 0.5).unwrap();
        assert!(b.constant.value() > a.constant.value());
        assert!(b.general.value() > a.general.value());
    }

    #[test]
    fn chernoff_examples() {
        assert_eq!(chernoff_upper(1.0, 3.0, 2.0).unwrap(), 1.0);
        assert!((chernoff_upper(2.0, 1.0, 1.0).unwrap() - E / 4.0).abs() < 1e-15);
        let mut prev = 1.0;
        for beta in [1.5, 2.0, 4.0, 8.0, 16.0, 64.0] {
            let v = chernoff_upper(beta, 1.0, 2.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-100);
        assert!(chernoff_upper(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn swap_examples() {
        let s = swap_gap_and_bound(0.0, 1000, 2).unwrap();
        assert_eq!((s.gap, s.probability), (0.0, 1.0));
        let s = swap_gap_and_bound(100f64.ln(), 1000, 2).unwrap();
        assert!((s.probability - 0.01).abs() < 1e-15);
        assert_eq!(swap_gap_and_bound(1.0, 1000, 2).unwrap().gap, 1000.0);
        assert!(swap_gap_and_bound(1.0, 1000, 1).is_err());
    }

    #[test]
    fn ruin_examples() {
        assert_eq!(ruin_probability(0.0, 0.3).unwrap(), 1.0);
        assert!(ruin_probability(1.0, 1.0 - 1e-12).unwrap() < 1e-11);
        assert!(ruin_probability(1.0, 1.0).is_err());
        let eps = bias_epsilon(100, 2).unwrap();
        assert!((eps - 1.0 / 198.0).abs() < 1e-15);
        let r = ruin_probability(10.0, eps).unwrap();
        assert!((r - (197.0f64 / 199.0).powi(10)).abs() < 1e-14);
    }

    #[test]
    fn bias_epsilon_large_n() {
        // d = 2: ε = 1/(2n − 2) exactly
        let eps = bias_epsilon(1_000_000, 2).unwrap();
        assert!((eps / (1.0 / 1_999_998.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn paradox_examples() {
        let p = paradox_prob_bound(0.0, 100, 2);
        assert!((p.value - 0.16).abs() < 1e-15);
        assert!(p.diagnostic.is_none());
        assert!(paradox_prob_bound(50.0, 100, 2).value > p.value);
        let big = paradox_prob_bound(1e4, 100, 2);
        assert_eq!(big.value, 1.0);
        assert!(big.diagnostic.is_some());

        // at t = c n ln n the bound is 16 n^{4c - 1}
        let c = 0.1;
        assert!(paradox_exponent(c, 2) < 0.0);
        let at = |n: u64| paradox_prob_bound(c * n as f64 * (n as f64).ln(), n, 2).raw;
        assert!((at(10_000) - 16.0 * 1e4f64.powf(-0.6)).abs() < 1e-12);
        assert!(at(1_000_000) < at(10_000));
    }

    #[test]
    fn equal_load_invariant_violation() {
        let mut p = EqualLoadParams::asymptotic_choice(0.1, 10_000, 1_000_000_000_000, 2).unwrap();
        p.m_prime += 1;
        assert!(equal_load_bound(&p).is_err());
    }

    #[test]
    fn equal_load_j_zero_is_unit_final_factor() {
        let mut p = EqualLoadParams::asymptotic_choice(0.1, 10_000, 1_000_000_000_000, 2).unwrap();
        p.j = 0;
        let b = equal_load_bound(&p).unwrap();
        assert_eq!(b.factors[5].value, 1.0);
        let first5: f64 = b.factors[..5].iter().map(|f| f.value).product();
        assert_eq!(b.product, first5);
    }
}
