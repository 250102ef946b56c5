//! Fluid limit of GREEDY: `z_k(c)` is the limiting fraction of bins holding
//! `k` balls after `c·n` balls.
//!
//! With prefix sums `P_j = z_0 + ... + z_j` (and `P_{-1} = P_{-2} = 0`) the
//! system is
//!
//! ```text
//! z_k' = 2 P_{k-1}^d - P_{k-2}^d - P_k^d,   z_0(0) = 1, z_k(0) = 0 (k > 0)
//! ```
//!
//! It is lower triangular: `z_k` depends only on `z_0..=z_k`, so truncating at
//! `K` leaves the tracked components exact. Integration is fixed-step RK4.

use crate::error::{Error, Result};

/// Values in `(-NEG_TOLERANCE, 0)` are roundoff and are clamped to zero;
/// anything lower is a numerical failure.
pub const NEG_TOLERANCE: f64 = 1e-9;

/// Default RK4 step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Truncation is raised until `z_K(c_end)` drops below this.
pub const TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidSystem {
    pub d: u32,
    pub k_max: usize,
}

impl FluidSystem {
    pub fn new(d: u32, k_max: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("d", "must be at least 1"));
        }
        if k_max == 0 {
            return Err(Error::invalid("k_max", "must be at least 1"));
        }
        Ok(Self { d, k_max })
    }

    pub fn initial(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.k_max + 1];
        z[0] = 1.0;
        z
    }
}

/// Writes `dz/dc` for state `z` into `out` in one prefix-sum pass.
pub fn rhs_into(z: &[f64], d: u32, out: &mut [f64]) {
    debug_assert_eq!(z.len(), out.len());
    let d = d as i32;
    // pow_prev2 = P_{k-2}^d, pow_prev = P_{k-1}^d
    let (mut pow_prev2, mut pow_prev) = (0.0f64, 0.0f64);
    let mut prefix = 0.0f64;
    for (k, (&zk, dz)) in z.iter().zip(out.iter_mut()).enumerate() {
        prefix += zk;
        let pow_k = prefix.powi(d);
        *dz = match k {
            0 => -pow_k,
            _ => 2.0 * pow_prev - pow_prev2 - pow_k,
        };
        pow_prev2 = pow_prev;
        pow_prev = pow_k;
    }
}

/// Derivative vector of the truncated system.
pub fn rhs(z: &[f64], d: u32) -> Vec<f64> {
    let mut out = vec![0.0; z.len()];
    rhs_into(z, d, &mut out);
    out
}

/// `z_0(c)` in closed form: `((d-1)c + 1)^(-1/(d-1))`, or `e^{-c}` for `d = 1`.
pub fn empty_fraction_closed_form(c: f64, d: u32) -> f64 {
    if d <= 1 {
        (-c).exp()
    } else {
        let dm1 = (d - 1) as f64;
        (dm1 * c + 1.0).powf(-1.0 / dm1)
    }
}

/// Integrated trajectory on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidSolution {
    pub d: u32,
    pub k_max: usize,
    pub h: f64,
    /// Scaled times `c`, starting at 0 and ending at `c_end`.
    pub times: Vec<f64>,
    /// `states[i][k]` is `z_k(times[i])`.
    pub states: Vec<Vec<f64>>,
}

impl FluidSolution {
    pub fn last(&self) -> &[f64] {
        self.states
            .last()
            .expect("solution has at least one grid point")
    }

    pub fn c_end(&self) -> f64 {
        *self
            .times
            .last()
            .expect("solution has at least one grid point")
    }

    /// `z_k(c_end)`, zero beyond the truncation.
    pub fn final_fraction(&self, k: usize) -> f64 {
        self.last().get(k).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times
            .iter()
            .copied()
            .zip(self.states.iter().map(|s| s.as_slice()))
    }
}

fn rk4_step(z: &mut [f64], d: u32, h: f64, scratch: &mut [Vec<f64>; 5]) {
    let [k1, k2, k3, k4, tmp] = scratch;
    rhs_into(z, d, k1);
    for i in 0..z.len() {
        tmp[i] = z[i] + 0.5 * h * k1[i];
    }
    rhs_into(tmp, d, k2);
    for i in 0..z.len() {
        tmp[i] = z[i] + 0.5 * h * k2[i];
    }
    rhs_into(tmp, d, k3);
    for i in 0..z.len() {
        tmp[i] = z[i] + h * k3[i];
    }
    rhs_into(tmp, d, k4);
    for i in 0..z.len() {
        z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

fn checked_output(z: &[f64], c: f64) -> Result<Vec<f64>> {
    z.iter()
        .enumerate()
        .map(|(k, &v)| {
            if v < -NEG_TOLERANCE || !v.is_finite() {
                Err(Error::Numerical(format!(
                    "z_{k}({c:.6}) = {v:e} left [0, 1]; try a smaller step"
                )))
            } else if v > 1.0 + NEG_TOLERANCE {
                Err(Error::Numerical(format!(
                    "z_{k}({c:.6}) = {v} exceeds 1; try a smaller step"
                )))
            } else {
                Ok(v.clamp(0.0, 1.0))
            }
        })
        .collect()
}

/// RK4 with fixed step `h` from `c = 0` to `c_end`, tracking `z_0..=z_{k_max}`.
///
/// The last step is shortened when `c_end` is not a multiple of `h`.
pub fn integrate_truncated(system: FluidSystem, c_end: f64, h: f64) -> Result<FluidSolution> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(
            "h",
            format!("step must be positive, got {h}"),
        ));
    }
    if !(c_end >= 0.0) || !c_end.is_finite() {
        return Err(Error::invalid(
            "c_end",
            format!("must be non-negative, got {c_end}"),
        ));
    }
    let len = system.k_max + 1;
    let mut z = system.initial();
    let mut scratch: [Vec<f64>; 5] = std::array::from_fn(|_| vec![0.0; len]);
    let full_steps = (c_end / h * (1.0 + 1e-12)).floor() as u64;
    let mut times = vec![0.0];
    let mut states = vec![z.clone()];
    for i in 1..=full_steps {
        rk4_step(&mut z, system.d, h, &mut scratch);
        let c = i as f64 * h;
        states.push(checked_output(&z, c)?);
        times.push(c);
    }
    let covered = full_steps as f64 * h;
    let rest = c_end - covered;
    if rest > 1e-12 * h.max(c_end) {
        rk4_step(&mut z, system.d, rest, &mut scratch);
        states.push(checked_output(&z, c_end)?);
        times.push(c_end);
    } else if full_steps > 0 {
        // snap accumulated roundoff onto the requested horizon
        *times.last_mut().expect("non-empty grid") = c_end;
    }
    Ok(FluidSolution {
        d: system.d,
        k_max: system.k_max,
        h,
        times,
        states,
    })
}

/// Default truncation for horizon `c_end`: `8 + ⌈4·c_end⌉`.
pub fn default_k_max(c_end: f64) -> usize {
    8 + (4.0 * c_end).ceil().max(0.0) as usize
}

/// Integrates with `k_max` chosen automatically (or as given) and raised
/// until `z_{k_max}(c_end) < 1e-8` when not given explicitly.
pub fn integrate(d: u32, k_max: Option<usize>, c_end: f64, h: f64) -> Result<FluidSolution> {
    match k_max {
        Some(k) => integrate_truncated(FluidSystem::new(d, k)?, c_end, h),
        None => {
            let mut k = default_k_max(c_end);
            loop {
                let sol = integrate_truncated(FluidSystem::new(d, k)?, c_end, h)?;
                if sol.final_fraction(k) < TAIL_TOLERANCE || k > 10_000 {
                    return Ok(sol);
                }
                k += k / 2;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhs_at_initial_condition() {
        assert_eq!(rhs(&[1.0, 0.0, 0.0], 2), vec![-1.0, 1.0, 0.0]);
        assert_eq!(rhs(&[0.0; 4], 3), vec![0.0; 4]);
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(empty_fraction_closed_form(1.0, 2), 0.5);
        assert!((empty_fraction_closed_form(1.0, 3) - 3f64.powf(-0.5)).abs() < 1e-15);
        for d in 2..8u32 {
            let expect = (d as f64).powf(-1.0 / (d as f64 - 1.0));
            assert!((empty_fraction_closed_form(1.0, d) - expect).abs() < 1e-14);
            assert_eq!(empty_fraction_closed_form(0.0, d), 1.0);
        }
        assert!((empty_fraction_closed_form(1.0, 1) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn empty_fraction_after_one_ball_per_bin() {
        let s2 = integrate(2, Some(30), 1.0, 1e-3).unwrap();
        assert!((s2.final_fraction(0) - 0.5).abs() < 1e-6);
        let s3 = integrate(3, Some(30), 1.0, 1e-3).unwrap();
        assert!((s3.final_fraction(0) - 0.57735).abs() < 1e-5);
        assert!((s3.final_fraction(0) - 3f64.powf(-0.5)).abs() < 1e-6);
    }

    #[test]
    fn zero_horizon() {
        let s = integrate(2, None, 0.0, 1e-3).unwrap();
        assert_eq!(s.times, vec![0.0]);
        assert_eq!(s.states[0][0], 1.0);
        assert!(s.states[0][1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_ends_exactly_at_horizon() {
        let s = integrate(2, Some(10), 0.37, 0.1).unwrap();
        assert_eq!(*s.times.last().unwrap(), 0.37);
        assert_eq!(s.times.len(), 5);
        let s = integrate(2, Some(10), 1.0, 1e-3).unwrap();
        assert_eq!(s.times.len(), 1001);
        assert!((s.c_end() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_parameters() {
        assert!(integrate(2, None, 1.0, 0.0).is_err());
        assert!(integrate(2, None, -1.0, 0.1).is_err());
        assert!(FluidSystem::new(0, 3).is_err());
        assert!(FluidSystem::new(2, 0).is_err());
    }

    #[test]
    fn huge_steps_fail_numerically() {
        let err = integrate(8, Some(10), 20.0, 5.0).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }

    #[test]
    fn automatic_truncation_meets_tail_tolerance() {
        let s = integrate(2, None, 3.0, 1e-2).unwrap();
        assert!(s.final_fraction(s.k_max) < TAIL_TOLERANCE);
        assert!(s.k_max >= default_k_max(3.0));
    }
}
