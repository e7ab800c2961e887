//! Enumeration of `Fix(fⁿ)` and periodic Lyapunov exponents.
//!
//! On `[0, 1)` the function `G(x) = Fⁿ(x) − x` is strictly increasing and
//! gains exactly `Kⁿ − 1` across the period, so the periodic points of
//! period `n` are the solutions of `G(x) = L` for the `Kⁿ − 1` integers `L`
//! in `[G(0), G(0) + Kⁿ − 1)`. Branch index `m = 1, …, Kⁿ − 1` numbers these
//! levels from the bottom; points therefore increase with `m`.
//!
//! The level-`L` solution lies between `(Fⁿ)⁻¹(L)` and `(Fⁿ)⁻¹(L + 1)`, the
//! endpoints of one interval of the partition on which `fⁿ` is a bijection
//! onto the circle. Those endpoints bracket a safeguarded Newton iteration on
//! `G`, whose derivative `(fⁿ)' − 1` comes from the chain rule. Exponents
//! are sums of `ln f'` along the orbit, so `(fⁿ)'` never has to be
//! representable on its own.

use rayon::prelude::*;
use serde::Serialize;

use crate::circle_map::CircleMap;
use crate::error::{Error, Result};
use crate::roots::increasing_root;
use crate::scalar::{compensated_sum, split_unit, CompensatedSum, Real};
use crate::statistics::EmpiricalDistribution;

/// Default bound on the number of periodic points a single call may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;
/// Newton iterations allowed per branch before reporting a failure.
pub const MAX_NEWTON_ITERATIONS: usize = 200;
const CHUNK: u64 = 1024;

/// Integer level `m ∈ [1, Kⁿ − 1]` of a periodic point of period `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BranchIndex {
    pub m: u64,
    pub period: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeriodicPointRecord<T> {
    /// Location on the circle, in `[0, 1)`.
    pub point: T,
    /// Period (not necessarily minimal).
    pub period: u32,
    pub branch: BranchIndex,
    /// `(1/n) ln (fⁿ)'(point)`.
    pub exponent: T,
    /// `|Fⁿ(x) − x − L| / ((fⁿ)'(x) − 1)`: the distance in `x` to the exact
    /// root predicted by one further Newton step.
    pub residual: T,
}

/// `Kⁿ − 1`, or `None` on overflow.
pub fn fix_count(degree: u32, period: u32) -> Option<u64> {
    (degree as u64).checked_pow(period).map(|p| p - 1)
}

/// Fails with [`Error::CapExceeded`] unless `Kⁿ − 1 ≤ cap`.
pub fn check_cap(degree: u32, period: u32, cap: u64) -> Result<u64> {
    if period == 0 {
        return Err(Error::InvalidArgument("period must be at least 1".into()));
    }
    match fix_count(degree, period) {
        Some(c) if c <= cap => Ok(c),
        Some(c) => Err(Error::CapExceeded { required: c, cap }),
        None => Err(Error::CapExceeded {
            required: u64::MAX,
            cap,
        }),
    }
}

/// `Fⁿ(x) = carry + end` with `end ∈ [0, 1)`, plus `Σ ln f'` and
/// `(Fⁿ)'(x)` along the orbit.
struct Orbit<T> {
    carry: i64,
    end: T,
    log_sum: T,
    slope: T,
}

fn orbit<T: Real>(map: &CircleMap<T>, x: T, n: u32) -> Orbit<T> {
    let k = map.degree() as i64;
    let (mut carry, mut r) = split_unit(x);
    let mut log_sum = CompensatedSum::new();
    let mut slope = T::one();
    for _ in 0..n {
        let d = map.derivative(r);
        log_sum.add(d.ln());
        slope = slope * d;
        let (i, next) = map.step(r);
        carry = carry * k + i;
        r = next;
    }
    Orbit {
        carry,
        end: r,
        log_sum: log_sum.value(),
        slope,
    }
}

/// `(Fⁿ)⁻¹(level)`, clipped to `[0, 1]`.
fn partition_point<T: Real>(map: &CircleMap<T>, n: u32, level: i64) -> T {
    let mut y = (level, T::zero());
    for _ in 0..n {
        y = map.inverse_lift(y.0, y.1);
    }
    match y.0 {
        i if i < 0 => T::zero(),
        0 => y.1,
        _ => T::one(),
    }
}

/// Lowest integer level `⌈G(0)⌉ = ⌈Fⁿ(0)⌉`.
fn base_level<T: Real>(map: &CircleMap<T>, n: u32) -> i64 {
    let o = orbit(map, T::zero(), n);
    if o.end == T::zero() {
        o.carry
    } else {
        o.carry + 1
    }
}

fn solve_level<T: Real>(
    map: &CircleMap<T>,
    n: u32,
    m: u64,
    level: i64,
    lo: T,
    hi: T,
) -> Result<PeriodicPointRecord<T>> {
    let branch = BranchIndex { m, period: n };
    let tol = T::lit(T::ROOT_TOL);
    let g = |x: T| {
        let o = orbit(map, x, n);
        let value = T::from_int(o.carry - level) + (o.end - x);
        (value, o.slope - T::one())
    };
    let root = increasing_root(g, lo, hi, tol * T::lit(1e-2), MAX_NEWTON_ITERATIONS).map_err(
        |step| Error::ConvergenceFailure {
            period: n,
            branch: m,
            last_step: step.to_f64().unwrap_or(f64::NAN),
        },
    )?;
    let (_, point) = split_unit(root.x);
    let o = orbit(map, root.x, n);
    let value = T::from_int(o.carry - level) + (o.end - root.x);
    let residual = value.abs() / (o.slope - T::one());
    if !(residual <= tol) {
        return Err(Error::ConvergenceFailure {
            period: n,
            branch: m,
            last_step: residual.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(PeriodicPointRecord {
        point,
        period: n,
        branch,
        exponent: o.log_sum / T::from_u32(n).unwrap(),
        residual,
    })
}

/// The periodic point carried by branch `m` of period `n`.
pub fn solve_branch<T: Real>(
    map: &CircleMap<T>,
    n: u32,
    m: u64,
) -> Result<PeriodicPointRecord<T>> {
    let count = fix_count(map.degree(), n)
        .filter(|_| n >= 1)
        .ok_or_else(|| Error::InvalidArgument(format!("period {n} is out of range")))?;
    if m == 0 || m > count {
        return Err(Error::InvalidArgument(format!(
            "branch index {m} outside [1, {count}] for period {n}"
        )));
    }
    let level = base_level(map, n) + (m as i64 - 1);
    let lo = partition_point(map, n, level);
    let hi = partition_point(map, n, level + 1);
    solve_level(map, n, m, level, lo, hi)
}

/// All `Kⁿ − 1` points of `Fix(fⁿ)`, ordered by branch index, using the
/// default cap.
pub fn enumerate_fix<T: Real>(map: &CircleMap<T>, n: u32) -> Result<Vec<PeriodicPointRecord<T>>> {
    enumerate_fix_capped(map, n, DEFAULT_ENUMERATION_CAP)
}

/// As [`enumerate_fix`] with an explicit cap on the number of points.
///
/// Work is split into contiguous runs of branch indices; every record is a
/// pure function of `(map, n, m)`, so the output does not depend on the
/// size of the rayon pool.
pub fn enumerate_fix_capped<T: Real>(
    map: &CircleMap<T>,
    n: u32,
    cap: u64,
) -> Result<Vec<PeriodicPointRecord<T>>> {
    let count = check_cap(map.degree(), n, cap)?;
    let base = base_level(map, n);
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Vec<PeriodicPointRecord<T>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let first = c * CHUNK + 1;
            let last = (first + CHUNK - 1).min(count);
            let edges: Vec<T> = (first..=last + 1)
                .map(|m| partition_point(map, n, base + m as i64 - 1))
                .collect();
            (first..=last)
                .zip(edges.windows(2))
                .map(|(m, w)| solve_level(map, n, m, base + m as i64 - 1, w[0], w[1]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(count as usize);
    for p in parts {
        out.extend(p);
    }
    Ok(out)
}

/// `(1/n) Σ_{k<n} g(fᵏ x)`.
pub fn birkhoff_average<T: Real>(map: &CircleMap<T>, g: impl Fn(T) -> T, x: T, n: u32) -> T {
    assert!(n >= 1, "Birkhoff average needs n >= 1");
    let mut r = split_unit(x).1;
    let mut acc = CompensatedSum::new();
    for _ in 0..n {
        acc.add(g(r));
        r = map.step(r).1;
    }
    acc.value() / T::from_u32(n).unwrap()
}

/// Sorted exponents of `Fix(fⁿ)`.
pub fn exponent_multiset<T: Real>(map: &CircleMap<T>, n: u32) -> Result<EmpiricalDistribution<T>> {
    exponent_multiset_capped(map, n, DEFAULT_ENUMERATION_CAP)
}

pub fn exponent_multiset_capped<T: Real>(
    map: &CircleMap<T>,
    n: u32,
    cap: u64,
) -> Result<EmpiricalDistribution<T>> {
    let records = enumerate_fix_capped(map, n, cap)?;
    Ok(EmpiricalDistribution::from_exponents(
        records.iter().map(|r| r.exponent).collect(),
        n,
    ))
}

/// `Σ_p h(p)` over the enumerated points; equals `Σ_p χₙ(p)` up to rounding.
pub fn sum_of_log_derivative<T: Real>(map: &CircleMap<T>, records: &[PeriodicPointRecord<T>]) -> T {
    let h = map.log_derivative();
    compensated_sum(records.iter().map(|r| h.value(r.point)))
}
