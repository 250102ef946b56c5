//! Independent re-computations checked against the library.

use greedybins_core::bounds::{
    bias_epsilon, binomial_upper_tail, equal_load_bound, equal_load_precondition,
    subset_tail_bound, EqualLoadParams,
};
use greedybins_core::fluid::{empty_fraction_closed_form, integrate, rhs};
use greedybins_core::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// `z_k'` straight from the definition, recomputing every prefix sum.
fn literal_rhs(z: &[f64], d: i32) -> Vec<f64> {
    let prefix = |j: isize| -> f64 {
        if j < 0 {
            0.0
        } else {
            z[..=j as usize].iter().sum()
        }
    };
    (0..z.len() as isize)
        .map(|k| {
            if k == 0 {
                -prefix(0).powi(d)
            } else {
                2.0 * prefix(k - 1).powi(d) - prefix(k - 2).powi(d) - prefix(k).powi(d)
            }
        })
        .collect()
}

#[test]
fn rhs_matches_literal_definition() {
    let states: [&[f64]; 3] = [
        &[0.5, 0.3, 0.1, 0.05, 0.05],
        &[0.2, 0.2, 0.2, 0.2, 0.1, 0.1, 0.0],
        &[1.0, 0.0, 0.0],
    ];
    for z in states {
        for d in 1..6 {
            let fast = rhs(z, d as u32);
            let slow = literal_rhs(z, d);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-14, "d={d}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn rk4_agrees_with_fine_euler() {
    let k = 20;
    let rk = integrate(2, Some(k), 1.0, 1e-3).unwrap();
    let h = 1e-6;
    let mut z = vec![0.0; k + 1];
    z[0] = 1.0;
    for _ in 0..1_000_000 {
        let dz = literal_rhs_fast(&z, 2);
        for (zi, di) in z.iter_mut().zip(dz) {
            *zi += h * di;
        }
    }
    for (a, b) in rk.last().iter().zip(&z) {
        assert!((a - b).abs() < 1e-5, "{a} vs {b}");
    }
}

// Euler needs a million evaluations; this is the same recurrence with running sums.
fn literal_rhs_fast(z: &[f64], d: i32) -> Vec<f64> {
    let mut p = Vec::with_capacity(z.len());
    let mut acc = 0.0;
    for v in z {
        acc += v;
        p.push(acc);
    }
    let pw = |j: isize| if j < 0 { 0.0 } else { p[j as usize].powi(d) };
    (0..z.len() as isize)
        .map(|k| {
            if k == 0 {
                -pw(0)
            } else {
                2.0 * pw(k - 1) - pw(k - 2) - pw(k)
            }
        })
        .collect()
}

#[test]
fn rk4_is_fourth_order() {
    let exact = empty_fraction_closed_form(1.0, 2);
    let err = |h: f64| (integrate(2, Some(12), 1.0, h).unwrap().final_fraction(0) - exact).abs();
    let (coarse, fine) = (err(0.1), err(0.05));
    assert!(coarse < 10.0 * 0.1f64.powi(4), "{coarse}");
    let ratio = coarse / fine;
    assert!((10.0..24.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn truncation_leaves_lower_components_untouched() {
    for d in [2, 3, 5] {
        let small = integrate(d, Some(15), 2.0, 1e-3).unwrap();
        let big = integrate(d, Some(30), 2.0, 1e-3).unwrap();
        for (a, b) in small.states.iter().zip(&big.states) {
            assert_eq!(a[..], b[..16]);
        }
    }
}

#[test]
fn fluid_conserves_bins_and_balls() {
    for d in [2, 3, 5] {
        let sol = integrate(d, None, 1.0, 1e-3).unwrap();
        for (c, z) in sol.iter() {
            let mass: f64 = z.iter().sum();
            let balls: f64 = z.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
            assert!((mass - 1.0).abs() < 1e-6);
            assert!((balls - c).abs() < 1e-5);
        }
    }
}

/// `P(Bin(m, p) >= k)` in exact rational arithmetic.
fn exact_tail(m: u64, p: &BigRational, k: u64) -> f64 {
    let q = BigRational::one() - p;
    let mut coeff = BigInt::one();
    let mut total = BigRational::zero();
    for i in 0..=m {
        if i >= k {
            let term = BigRational::from_integer(coeff.clone())
                * num_traits::pow(p.clone(), i as usize)
                * num_traits::pow(q.clone(), (m - i) as usize);
            total += term;
        }
        coeff = coeff * BigInt::from(m - i) / BigInt::from(i + 1);
    }
    total.to_f64().unwrap()
}

#[test]
fn binomial_tail_matches_exact_rationals() {
    let quarter = BigRational::new(1.into(), 4.into());
    let cases: [(u64, u64); 7] = [
        (100, 30),
        (100, 25),
        (100, 10),
        (100, 60),
        (500, 140),
        (1000, 230),
        (1000, 300),
    ];
    for (m, k) in cases {
        let exact = exact_tail(m, &quarter, k);
        let fast = subset_tail_bound(0.5, 2, m, k).unwrap();
        let rel = (fast - exact).abs() / exact.max(1e-300);
        assert!(rel < 1e-9, "m={m} k={k}: {fast} vs {exact}");
    }
    let tenth = BigRational::new(1.into(), 10.into());
    for k in [0, 1, 5, 12, 40] {
        let exact = exact_tail(200, &tenth, k);
        let fast = binomial_upper_tail(200, 0.1, k);
        assert!((fast - exact).abs() <= 1e-9 * exact.max(1e-300), "k={k}");
    }
}

#[test]
fn bias_matches_exact_ratio() {
    // (1+ε)/2 = (n^d − (n−1)^d) / (n^d − (n−2)^d)
    for (n, d) in [(100u64, 2u32), (50, 3), (1000, 4)] {
        let pw = |b: u64| BigInt::from(b).pow(d);
        let half = BigRational::new(pw(n) - pw(n - 1), pw(n) - pw(n - 2));
        let exact = (half * BigRational::from_integer(2.into()) - BigRational::one())
            .to_f64()
            .unwrap();
        let eps = bias_epsilon(n, d).unwrap();
        assert!((eps / exact - 1.0).abs() < 1e-12, "n={n} d={d}");
    }
    assert!((bias_epsilon(100, 2).unwrap() - 1.0 / 198.0).abs() < 1e-15);
}

/// The six factors written out term by term.
fn literal_factors(p: &EqualLoadParams) -> [f64; 6] {
    let (n, d, mp, t) = (p.n as f64, p.d as f64, p.m_prime as f64, p.t_steps as f64);
    let e = p.epsilon;
    let q = 2.0 * d * e.powf(d - 1.0) * t / n - p.gamma;
    [
        1.0 - (-2.0 * p.alpha * p.alpha / mp).exp(),
        1.0 - (-2.0 * p.beta * p.beta / mp).exp(),
        1.0 - (-2.0 * p.lambda * p.lambda / t).exp(),
        1.0 - 2.0 * (-(p.gamma * p.gamma) * n / (2f64.powf(d + 3.0) * e.powf(d - 1.0) * t)).exp(),
        1.0 - 4.0 * d * d / n * (t * d * d / n).exp(),
        if p.j == 0 {
            1.0
        } else {
            1.0 - p.j as f64 * (2.0 / (std::f64::consts::PI * q)).sqrt()
        },
    ]
}

#[test]
fn equal_load_matches_literal_transcription() {
    let p = EqualLoadParams {
        delta: 0.3,
        alpha: 50.0,
        beta: 40.0,
        epsilon: 0.2,
        lambda: 10.0,
        gamma: 1.5,
        m_prime: 90_000,
        t_steps: 10_000,
        m: 100_000,
        n: 1_000,
        d: 2,
        j: 1,
    };
    let got = equal_load_bound(&p).unwrap();
    for (f, lit) in got.factors.iter().zip(literal_factors(&p)) {
        assert!(
            (f.value - lit).abs() < 1e-12,
            "{}: {} vs {lit}",
            f.name,
            f.value
        );
    }
    let j0 = equal_load_bound(&EqualLoadParams { j: 0, ..p }).unwrap();
    assert_eq!(j0.factors[5].value, 1.0);
    let without_last: f64 = got.factors[..5].iter().map(|f| f.value).product();
    assert!((j0.product - without_last).abs() < 1e-15);
}

#[test]
fn asymptotic_parameters_at_desk_scale() {
    // At n = 10^4, d = 2, δ = 0.1 the gap condition needs m far beyond n^3,
    // and γ = (ln n)^{3/4} swamps 2dε^{d−1}t/n, leaving the last factor undefined.
    let at = |m: u64| EqualLoadParams::asymptotic_choice(0.1, 10_000, m, 2).unwrap();
    let cubic = equal_load_precondition(&at(1_000_000_000_000)).unwrap();
    assert!(!cubic.satisfied, "{cubic:?}");
    assert!(cubic.lhs < 0.0);
    let huge = equal_load_precondition(&at(10_000_000_000_000_000_000)).unwrap();
    assert!(huge.satisfied, "{huge:?}");
    let err = equal_load_bound(&at(1_000_000_000_000)).unwrap_err();
    assert!(
        matches!(err, Error::InvalidParameter { name: "gamma", .. }),
        "{err}"
    );
}
