//! Expanding circle maps described by their lifts.
//!
//! A map of degree `K` on the circle `ℝ/ℤ` is stored through a lift
//! `F: ℝ → ℝ` with `F(x + 1) = F(x) + K` and `F(0) ∈ [0, 1)`, together with
//! the 1-periodic derivatives `f'` and `f''`. Every constructor certifies
//! that `f' > 1` before returning.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::increasing_root;
use crate::scalar::{split_unit, Real};

/// Grid used when certifying a map at construction.
pub const DEFAULT_CERTIFICATION_GRID: usize = 4096;
/// Smallest grid accepted by [`expansivity_certificate`].
pub const MIN_CERTIFICATION_GRID: usize = 1024;
/// Finest grid tried when a coarse certificate is inconclusive.
pub const MAX_CERTIFICATION_GRID: usize = 1 << 20;
const CONSISTENCY_GRID: usize = 10_000;

/// A real function of one variable, shared between threads.
pub type Callable<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MapFamily {
    Linear,
    TrigPerturbedDoubling,
    Blaschke,
    Custom,
}

/// Lower bound on `f'` (and companion bounds) certified on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpansivityCertificate<T> {
    /// Certified lower bound of `f'`; always `> 1`.
    pub lambda_star: T,
    /// Upper bound of `|f''|` used for the Lipschitz slack.
    pub max_second_derivative: T,
    /// Upper bound of `f'`.
    pub max_derivative: T,
    pub grid_size: usize,
}

#[derive(Clone)]
enum Kind<T> {
    Linear,
    Trig {
        eps: T,
    },
    Blaschke {
        a: T,
    },
    Custom {
        lift: Callable<T>,
        derivative: Callable<T>,
        second_derivative: Callable<T>,
        offset: T,
    },
}

/// An orientation-preserving expanding circle map of degree `K ≥ 2`.
///
/// Values are immutable once built and can be shared freely across threads.
#[derive(Clone)]
pub struct CircleMap<T> {
    family: MapFamily,
    degree: u32,
    parameters: Vec<T>,
    kind: Kind<T>,
    certificate: ExpansivityCertificate<T>,
    // bounds of the periodic part F(x) - K x
    periodic_min: T,
    periodic_max: T,
}

impl<T: Real> fmt::Debug for CircleMap<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleMap")
            .field("family", &self.family)
            .field("degree", &self.degree)
            .field("parameters", &self.parameters)
            .field("certificate", &self.certificate)
            .finish()
    }
}

impl<T: Real> CircleMap<T> {
    /// `x ↦ K x`.
    pub fn linear(degree: u32) -> Result<Self> {
        if degree < 2 {
            return Err(Error::ParameterOutOfRange(format!(
                "linear map needs degree >= 2, got {degree}"
            )));
        }
        Self::finish(MapFamily::Linear, degree, vec![], Kind::Linear)
    }

    /// `x ↦ 2x + ε (sin 2πx + cos 2πx − 1)`.
    pub fn trig_doubling(eps: T) -> Result<Self> {
        if !eps.is_finite() {
            return Err(Error::ParameterOutOfRange(format!(
                "perturbation amplitude must be finite, got {eps}"
            )));
        }
        // f' = 2 + 2πε(cos − sin) has minimum 2 − 2π|ε|√2
        let analytic_min = T::lit(2.0) - T::TAU() * eps.abs() * T::SQRT_2();
        if analytic_min <= T::one() {
            return Err(Error::ParameterOutOfRange(format!(
                "trig perturbation {eps} makes min f' = {analytic_min} <= 1"
            )));
        }
        Self::finish(
            MapFamily::TrigPerturbedDoubling,
            2,
            vec![eps],
            Kind::Trig { eps },
        )
    }

    /// Angle map of the Blaschke product `z ↦ z (z − a) / (1 − a z)` on the
    /// unit circle, for real `a` with `|a| < 1`.
    pub fn blaschke(a: T) -> Result<Self> {
        if !(a.abs() < T::one()) {
            return Err(Error::ParameterOutOfRange(format!(
                "Blaschke zero must satisfy |a| < 1, got {a}"
            )));
        }
        Self::finish(MapFamily::Blaschke, 2, vec![a], Kind::Blaschke { a })
    }

    /// A user-supplied map. The lift is shifted by an integer so that
    /// `F(0) ∈ [0, 1)`; degree, derivative consistency and expansivity are
    /// all checked here.
    pub fn custom(
        degree: u32,
        lift: Callable<T>,
        derivative: Callable<T>,
        second_derivative: Callable<T>,
    ) -> Result<Self> {
        if degree < 2 {
            return Err(Error::ParameterOutOfRange(format!(
                "custom map needs degree >= 2, got {degree}"
            )));
        }
        let f0 = lift(T::zero());
        if !f0.is_finite() {
            return Err(Error::InconsistentMap("F(0) is not finite".into()));
        }
        let offset = f0.floor();
        let kind = Kind::Custom {
            lift,
            derivative,
            second_derivative,
            offset,
        };
        let map = Self::finish(MapFamily::Custom, degree, vec![], kind)?;
        map.check_consistency()?;
        Ok(map)
    }

    /// Builds one of the built-in families from its parameter list.
    pub fn make_builtin(family: MapFamily, parameters: &[T]) -> Result<Self> {
        let one = |what: &str| -> Result<T> {
            match parameters {
                [p] => Ok(*p),
                _ => Err(Error::ParameterOutOfRange(format!(
                    "{what} takes exactly one parameter, got {}",
                    parameters.len()
                ))),
            }
        };
        match family {
            MapFamily::Linear => {
                let k = one("linear")?;
                let deg = k.to_u32().filter(|&d| T::from_u32(d) == Some(k));
                match deg {
                    Some(d) => Self::linear(d),
                    None => Err(Error::ParameterOutOfRange(format!(
                        "linear degree must be a positive integer, got {k}"
                    ))),
                }
            }
            MapFamily::TrigPerturbedDoubling => Self::trig_doubling(one("trigdoubling")?),
            MapFamily::Blaschke => Self::blaschke(one("blaschke")?),
            MapFamily::Custom => Err(Error::InvalidArgument(
                "custom maps are built with CircleMap::custom".into(),
            )),
        }
    }

    fn finish(family: MapFamily, degree: u32, parameters: Vec<T>, kind: Kind<T>) -> Result<Self> {
        let mut map = Self {
            family,
            degree,
            parameters,
            kind,
            certificate: ExpansivityCertificate {
                lambda_star: T::one(),
                max_second_derivative: T::zero(),
                max_derivative: T::one(),
                grid_size: 0,
            },
            periodic_min: T::zero(),
            periodic_max: T::zero(),
        };
        map.certificate = certify(&map)?;

        let grid = DEFAULT_CERTIFICATION_GRID;
        let h = T::one() / T::from_count(grid);
        let k = T::from_u32(degree).unwrap();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..grid {
            let x = T::from_count(i) * h;
            let p = map.lift_unit(x) - k * x;
            lo = lo.min(p);
            hi = hi.max(p);
        }
        // |p'| = |f' - K| bounds the variation between grid points
        let slope = (map.certificate.max_derivative - k)
            .abs()
            .max((k - map.certificate.lambda_star).abs());
        let slack = slope * h + T::lit(8.0) * T::epsilon() * (T::one() + k);
        map.periodic_min = lo - slack;
        map.periodic_max = hi + slack;
        Ok(map)
    }

    pub fn family(&self) -> MapFamily {
        self.family
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn parameters(&self) -> &[T] {
        &self.parameters
    }

    pub fn certificate(&self) -> &ExpansivityCertificate<T> {
        &self.certificate
    }

    /// Lift restricted to `[0, 1)`; callers reduce their argument first.
    #[inline]
    fn lift_unit(&self, r: T) -> T {
        let k = T::from_u32(self.degree).unwrap();
        match &self.kind {
            Kind::Linear => k * r,
            Kind::Trig { eps } => {
                let (s, c) = (T::TAU() * r).sin_cos();
                T::lit(2.0) * r + *eps * (s + c - T::one())
            }
            Kind::Blaschke { a } => r + blaschke_factor_angle(*a, r),
            Kind::Custom { lift, offset, .. } => lift(r) - *offset,
        }
    }

    /// The lift `F`.
    #[inline]
    pub fn lift(&self, x: T) -> T {
        let (i, r) = split_unit(x);
        T::from_int(i) * T::from_u32(self.degree).unwrap() + self.lift_unit(r)
    }

    /// `f'`, 1-periodic.
    #[inline]
    pub fn derivative(&self, x: T) -> T {
        match &self.kind {
            Kind::Linear => T::from_u32(self.degree).unwrap(),
            Kind::Trig { eps } => {
                let (s, c) = (T::TAU() * x).sin_cos();
                T::lit(2.0) + T::TAU() * *eps * (c - s)
            }
            Kind::Blaschke { a } => T::one() + poisson_kernel(*a, x),
            Kind::Custom { derivative, .. } => derivative(split_unit(x).1),
        }
    }

    /// `f''`, 1-periodic.
    #[inline]
    pub fn second_derivative(&self, x: T) -> T {
        match &self.kind {
            Kind::Linear => T::zero(),
            Kind::Trig { eps } => {
                let (s, c) = (T::TAU() * x).sin_cos();
                -T::TAU() * T::TAU() * *eps * (s + c)
            }
            Kind::Blaschke { a } => {
                let a = *a;
                let (s, c) = (T::TAU() * x).sin_cos();
                let den = T::one() - T::lit(2.0) * a * c + a * a;
                -(T::one() - a * a) * T::lit(2.0) * a * T::TAU() * s / (den * den)
            }
            Kind::Custom {
                second_derivative, ..
            } => second_derivative(split_unit(x).1),
        }
    }

    /// One step of the circle map on a reduced coordinate `r ∈ [0, 1)`:
    /// returns `(⌊F(r)⌋, F(r) mod 1)`.
    #[inline]
    pub fn step(&self, r: T) -> (i64, T) {
        split_unit(self.lift_unit(r))
    }

    /// Circle map `f(x) = F(x) mod 1`.
    #[inline]
    pub fn apply(&self, x: T) -> T {
        self.step(split_unit(x).1).1
    }

    /// Solves `F(x) = int + frac` for the lift, returning `x` split as
    /// `(⌊x⌋, x mod 1)`.
    pub fn inverse_lift(&self, int: i64, frac: T) -> (i64, T) {
        let k = self.degree as i64;
        let q = int.div_euclid(k);
        let s = T::from_int(int.rem_euclid(k)) + frac;
        let kk = T::from_u32(self.degree).unwrap();
        let lo = (s - self.periodic_max) / kk;
        let hi = (s - self.periodic_min) / kk;
        let tol = T::lit(4.0) * T::epsilon();
        let x = match increasing_root(|x| (self.lift(x) - s, self.derivative(x)), lo, hi, tol, 200) {
            Ok(root) => root.x,
            // bracket collapsed to rounding level; any point inside is as good
            Err(_) => T::lit(0.5) * (lo + hi),
        };
        let (i, r) = split_unit(x);
        (q + i, r)
    }

    /// The `K` preimages of `z ∈ [0, 1)` under the circle map, in increasing
    /// order of their lift level.
    pub fn preimages(&self, z: T) -> Vec<T> {
        (0..self.degree as i64)
            .map(|j| self.inverse_lift(j, z).1)
            .collect()
    }

    /// The observable `h = ln f'`.
    pub fn log_derivative(&self) -> LogDerivative<'_, T> {
        LogDerivative { map: self }
    }

    /// Upper bound of `ln f'`.
    pub fn max_log_derivative(&self) -> T {
        self.certificate.max_derivative.ln()
    }

    /// Certified lower bound of `ln f'`.
    pub fn min_log_derivative(&self) -> T {
        self.certificate.lambda_star.ln()
    }

    fn check_consistency(&self) -> Result<()> {
        let k = T::from_u32(self.degree).unwrap();
        let eps = T::epsilon();
        let delta = eps.cbrt();
        let fd_tol = T::lit(100.0) * delta * delta;
        let Kind::Custom {
            lift,
            derivative,
            second_derivative,
            ..
        } = &self.kind
        else {
            return Ok(());
        };
        for i in 0..CONSISTENCY_GRID {
            let x = T::from_count(i) / T::from_count(CONSISTENCY_GRID);
            let fx = lift(x);
            let jump = lift(x + T::one()) - fx;
            let scale = T::one() + fx.abs() + k;
            if (jump - k).abs() > T::lit(64.0) * eps * scale {
                return Err(Error::InconsistentMap(format!(
                    "F(x+1) - F(x) = {jump} at x = {x}, expected degree {k}"
                )));
            }
            let d1 = derivative(x);
            let fd1 = (lift(x + delta) - lift(x - delta)) / (delta + delta);
            if (d1 - fd1).abs() > fd_tol * scale {
                return Err(Error::InconsistentMap(format!(
                    "f'({x}) = {d1} disagrees with finite difference {fd1}"
                )));
            }
            let d2 = second_derivative(x);
            let fd2 = (derivative(x + delta) - derivative(x - delta)) / (delta + delta);
            if (d2 - fd2).abs() > fd_tol * (T::one() + d1.abs() + d2.abs()) {
                return Err(Error::InconsistentMap(format!(
                    "f''({x}) = {d2} disagrees with finite difference {fd2}"
                )));
            }
        }
        Ok(())
    }
}

/// Angle of the Möbius factor `(z − a)/(1 − a z)` at `z = e^{2πiθ}`, in turns,
/// continuous in `θ` and zero at `θ = 0`. Its derivative is the Poisson kernel.
#[inline]
fn blaschke_factor_angle<T: Real>(a: T, theta: T) -> T {
    let k = theta.round();
    let s = theta - k;
    let (sn, cs) = (T::PI() * s).sin_cos();
    k + ((T::one() + a) * sn).atan2((T::one() - a) * cs) / T::PI()
}

#[inline]
fn poisson_kernel<T: Real>(a: T, theta: T) -> T {
    let c = (T::TAU() * theta).cos();
    (T::one() - a * a) / (T::one() - T::lit(2.0) * a * c + a * a)
}

/// Certifies `f' > 1` on a grid of `grid_size` points.
///
/// The bound is `min f'(xᵢ) − M h / 2` with `h` the grid spacing and `M` an
/// upper bound of `|f''|`, taken as the grid maximum of `|f''|` plus the
/// largest jump of `f''` between neighbouring grid points.
/// Certifies on the default grid, refining while only the Lipschitz slack
/// stands in the way.
fn certify<T: Real>(map: &CircleMap<T>) -> Result<ExpansivityCertificate<T>> {
    let mut grid = DEFAULT_CERTIFICATION_GRID;
    loop {
        match expansivity_certificate(map, grid) {
            Err(Error::NotExpanding { .. }) if grid < MAX_CERTIFICATION_GRID => {
                let coarse = T::one() / T::from_count(grid);
                let min_d1 = (0..grid)
                    .map(|i| map.derivative(T::from_count(i) * coarse))
                    .fold(T::infinity(), T::min);
                if !(min_d1 > T::one()) {
                    return expansivity_certificate(map, grid);
                }
                grid *= 4;
            }
            other => return other,
        }
    }
}

pub fn expansivity_certificate<T: Real>(
    map: &CircleMap<T>,
    grid_size: usize,
) -> Result<ExpansivityCertificate<T>> {
    if grid_size < MIN_CERTIFICATION_GRID {
        return Err(Error::InvalidArgument(format!(
            "certification grid must have at least {MIN_CERTIFICATION_GRID} points, got {grid_size}"
        )));
    }
    let h = T::one() / T::from_count(grid_size);
    let mut min_d1 = T::infinity();
    let mut max_d1 = T::neg_infinity();
    let mut max_d2 = T::zero();
    let mut max_jump = T::zero();
    let mut prev_d2 = map.second_derivative(T::one() - h);
    for i in 0..grid_size {
        let x = T::from_count(i) * h;
        let d1 = map.derivative(x);
        let d2 = map.second_derivative(x);
        if !d1.is_finite() || !d2.is_finite() {
            return Err(Error::InconsistentMap(format!(
                "non-finite derivative at x = {x}"
            )));
        }
        min_d1 = min_d1.min(d1);
        max_d1 = max_d1.max(d1);
        max_d2 = max_d2.max(d2.abs());
        max_jump = max_jump.max((d2 - prev_d2).abs());
        prev_d2 = d2;
    }
    let bound = max_d2 + max_jump;
    let slack = bound * h * T::lit(0.5);
    let lambda_star = min_d1 - slack;
    if !(lambda_star > T::one()) {
        return Err(Error::NotExpanding {
            lambda_star: lambda_star.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(ExpansivityCertificate {
        lambda_star,
        max_second_derivative: bound,
        max_derivative: max_d1 + slack,
        grid_size,
    })
}

/// The observable `h = ln f'` and its derivative `h' = f''/f'`.
#[derive(Clone, Copy)]
pub struct LogDerivative<'a, T> {
    map: &'a CircleMap<T>,
}

impl<T: Real> LogDerivative<'_, T> {
    #[inline]
    pub fn value(&self, x: T) -> T {
        self.map.derivative(x).ln()
    }

    #[inline]
    pub fn slope(&self, x: T) -> T {
        self.map.second_derivative(x) / self.map.derivative(x)
    }
}

/// String identifier of a built-in map: `linear:K`, `trigdoubling:eps` or
/// `blaschke:a`.
#[derive(Clone, Debug, PartialEq)]
pub struct MapId {
    pub family: MapFamily,
    pub parameter: f64,
}

impl MapId {
    pub fn build<T: Real>(&self) -> Result<CircleMap<T>> {
        CircleMap::make_builtin(self.family, &[T::lit(self.parameter)])
    }
}

impl FromStr for MapId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, value) = s.split_once(':').ok_or_else(|| {
            Error::InvalidArgument(format!(
                "map id `{s}` must look like linear:K, trigdoubling:eps or blaschke:a"
            ))
        })?;
        let family = match name {
            "linear" => MapFamily::Linear,
            "trigdoubling" => MapFamily::TrigPerturbedDoubling,
            "blaschke" => MapFamily::Blaschke,
            other => {
                return Err(Error::InvalidArgument(format!("unknown map family `{other}`")));
            }
        };
        let parameter: f64 = value
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad parameter `{value}` in map id")))?;
        if family == MapFamily::Linear && (parameter.fract() != 0.0 || parameter < 2.0) {
            return Err(Error::InvalidArgument(format!(
                "linear degree must be an integer >= 2, got `{value}`"
            )));
        }
        Ok(Self { family, parameter })
    }
}

impl fmt::Display for MapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            MapFamily::Linear => write!(f, "linear:{}", self.parameter),
            MapFamily::TrigPerturbedDoubling => write!(f, "trigdoubling:{}", self.parameter),
            MapFamily::Blaschke => write!(f, "blaschke:{}", self.parameter),
            MapFamily::Custom => write!(f, "custom"),
        }
    }
}
