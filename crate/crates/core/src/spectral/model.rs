use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::circle_map::CircleMap;
use crate::error::{Error, Result};
use crate::scalar::{split_unit, Real};

/// Smallest number of modes accepted by [`SpectralModel::build`].
pub const MIN_MODES: usize = 8;
pub const DEFAULT_MODES: usize = 64;
/// Automatic refinement stops after this many modes.
pub const MAX_MODES: usize = 512;
const MAX_POWER_ITERATIONS: usize = 10_000;

/// Galerkin matrix of the normalized (optionally twisted) transfer operator
/// `φ ↦ K⁻¹ Σ_{f(y)=x} e^{itĥ(y)} φ(y)` in the basis `e_k(x) = e^{2πikx}`,
/// `|k| ≤ N`, with its leading eigendata.
///
/// Entry `(k, l)` is `K⁻¹ ∫ e^{2πily} e^{itĥ(y)} e^{−2πikF(y)} f'(y) dy`, the
/// change of variables `x = f(y)` applied to `⟨e_k, P e_l⟩`. The integrand
/// is smooth and periodic, so the trapezoid rule on `16 (N + K N)` nodes is
/// spectrally accurate; one inverse FFT per row evaluates all columns.
#[derive(Clone, Debug)]
pub struct SpectralModel<T: Real> {
    map: CircleMap<T>,
    modes: usize,
    twist: T,
    chi_bar: T,
    nodes: usize,
    matrix: Vec<Complex<T>>,
    log_derivative_spectrum: Vec<Complex<T>>,
    leading_eigenvalue: Complex<T>,
    leading_eigenfunction: Vec<Complex<T>>,
    leading_eigenmeasure: Vec<Complex<T>>,
    contraction_ratio: T,
}

impl<T: Real> SpectralModel<T> {
    /// Untwisted model; `χ̄ = μ(ln f')` is computed from its eigenmeasure.
    pub fn untwisted(map: &CircleMap<T>, modes: usize) -> Result<Self> {
        Self::build(map, modes, T::zero(), None)
    }

    /// Untwisted model with the default number of modes, doubled on
    /// [`Error::Resolution`] up to [`MAX_MODES`].
    pub fn untwisted_auto(map: &CircleMap<T>) -> Result<Self> {
        let mut modes = DEFAULT_MODES;
        loop {
            match Self::untwisted(map, modes) {
                Err(Error::Resolution { .. }) if modes < MAX_MODES => modes *= 2,
                other => return other,
            }
        }
    }

    /// The model twisted by `e^{itĥ}` with the same resolution and
    /// centering as `self`.
    pub fn twisted(&self, twist: T) -> Result<Self> {
        Self::build(&self.map, self.modes, twist, Some(self.chi_bar))
    }

    /// General constructor. A nonzero `twist` needs the centering constant
    /// `chi_bar` of `ĥ = ln f' − χ̄`, normally taken from an untwisted model.
    pub fn build(map: &CircleMap<T>, modes: usize, twist: T, chi_bar: Option<T>) -> Result<Self> {
        if modes < MIN_MODES {
            return Err(Error::InvalidArgument(format!(
                "spectral model needs at least {MIN_MODES} modes, got {modes}"
            )));
        }
        if !twist.is_finite() {
            return Err(Error::InvalidArgument(format!("twist {twist} is not finite")));
        }
        if twist != T::zero() && chi_bar.is_none() {
            return Err(Error::InvalidArgument(
                "a twisted model needs the centering constant from the untwisted model".into(),
            ));
        }
        let degree = map.degree() as usize;
        let dim = 2 * modes + 1;
        let nodes = 16 * (modes + degree * modes);
        let centering = chi_bar.unwrap_or(T::zero());

        let grid: Vec<T> = (0..nodes)
            .map(|j| T::from_count(j) / T::from_count(nodes))
            .collect();
        let h = map.log_derivative();
        let log_derivative_spectrum = spectrum(&grid, |y| h.value(y));
        check_resolved(&log_derivative_spectrum, modes, "ln f'")?;

        let scale = T::one() / (T::from_count(degree) * T::from_count(nodes));
        let weights: Vec<Complex<T>> = grid
            .iter()
            .map(|&y| {
                let twist_phase = twist * (h.value(y) - centering);
                Complex::from_polar(map.derivative(y) * scale, twist_phase)
            })
            .collect();
        let lifted: Vec<T> = grid.iter().map(|&y| map.lift(y)).collect();

        let ifft = FftPlanner::<T>::new().plan_fft_inverse(nodes);
        let rows: Vec<Vec<Complex<T>>> = (0..dim)
            .into_par_iter()
            .map(|row| {
                let k = T::from_int(row as i64 - modes as i64);
                let mut buf: Vec<Complex<T>> = weights
                    .iter()
                    .zip(&lifted)
                    .map(|(&w, &fy)| {
                        let phase = -T::TAU() * split_unit(k * fy).1;
                        w * Complex::from_polar(T::one(), phase)
                    })
                    .collect();
                ifft.process(&mut buf);
                (0..dim)
                    .map(|col| buf[wrap(col as i64 - modes as i64, nodes)])
                    .collect()
            })
            .collect();
        let matrix: Vec<Complex<T>> = rows.into_iter().flatten().collect();

        let mut model = Self {
            map: map.clone(),
            modes,
            twist,
            chi_bar: centering,
            nodes,
            matrix,
            log_derivative_spectrum,
            leading_eigenvalue: Complex::new(T::one(), T::zero()),
            leading_eigenfunction: Vec::new(),
            leading_eigenmeasure: Vec::new(),
            contraction_ratio: T::zero(),
        };
        model.solve_leading_pair()?;
        if chi_bar.is_none() {
            model.chi_bar = model.pair(&centered(&model.log_derivative_spectrum, modes)).re;
        }
        Ok(model)
    }

    fn solve_leading_pair(&mut self) -> Result<()> {
        let dim = self.dim();
        let tol = T::lit(T::EIGEN_TOL);
        let mut unit = vec![Complex::new(T::zero(), T::zero()); dim];
        unit[self.modes] = Complex::new(T::one(), T::zero());

        let (v, ratio_right) = self.power_iterate(unit.clone(), tol, |m, x| m.apply(x))?;
        let vmax = max_abs(&v);
        let tail = v
            .iter()
            .enumerate()
            .filter(|(i, _)| i.abs_diff(self.modes) + 1 >= self.modes)
            .fold(T::zero(), |acc, (_, c)| acc.max(c.norm()));
        if tail > T::lit(T::TAIL_TOL) * vmax {
            return Err(Error::Resolution {
                modes: self.modes,
                reason: format!("leading eigenfunction tail {tail:e} relative to {vmax:e}"),
            });
        }

        let (mut m, ratio_left) = self.power_iterate(unit, tol, |model, x| model.apply_adjoint(x))?;
        let norm = dot(&m, &v);
        for c in &mut m {
            *c = *c / norm;
        }
        let pv = self.apply(&v);
        self.leading_eigenvalue = dot(&m, &pv) / dot(&m, &v);
        self.leading_eigenfunction = v;
        self.leading_eigenmeasure = m;
        self.contraction_ratio = ratio_right.max(ratio_left);
        Ok(())
    }

    /// Power iteration from `start`, normalizing by the frequency-0
    /// coefficient when it dominates. Returns the fixed direction and the
    /// last observed contraction ratio of successive differences.
    fn power_iterate(
        &self,
        start: Vec<Complex<T>>,
        tol: T,
        step: impl Fn(&Self, &[Complex<T>]) -> Vec<Complex<T>>,
    ) -> Result<(Vec<Complex<T>>, T)> {
        let mut x = start;
        let mut prev_diff = T::zero();
        let mut ratio = T::zero();
        for _ in 0..MAX_POWER_ITERATIONS {
            let mut y = step(self, &x);
            let big = max_abs(&y);
            if !(big > T::zero()) || !big.is_finite() {
                return Err(Error::Resolution {
                    modes: self.modes,
                    reason: "power iteration collapsed".into(),
                });
            }
            let pivot = y[self.modes];
            let norm = if pivot.norm() > T::lit(0.1) * big {
                pivot
            } else {
                Complex::new(big, T::zero())
            };
            for c in &mut y {
                *c = *c / norm;
            }
            let diff = y
                .iter()
                .zip(&x)
                .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()));
            if prev_diff > T::zero() {
                ratio = diff / prev_diff;
            }
            prev_diff = diff;
            x = y;
            if diff <= tol * max_abs(&x) {
                return Ok((x, ratio));
            }
        }
        Err(Error::Resolution {
            modes: self.modes,
            reason: "power iteration did not settle on a leading eigenvalue".into(),
        })
    }

    pub fn map(&self) -> &CircleMap<T> {
        &self.map
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes + 1
    }

    pub fn twist(&self) -> T {
        self.twist
    }

    /// Quadrature nodes used for every Fourier integral.
    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// `χ̄ = μ(ln f')`, the centering constant of `ĥ`.
    pub fn chi_bar(&self) -> T {
        self.chi_bar
    }

    pub fn leading_eigenvalue(&self) -> Complex<T> {
        self.leading_eigenvalue
    }

    /// Adjoint leading eigenvector; at zero twist its entries are
    /// `μ(e_l) = ∫ e^{2πilx} dμ`.
    pub fn leading_eigenmeasure(&self) -> &[Complex<T>] {
        &self.leading_eigenmeasure
    }

    pub fn leading_eigenfunction(&self) -> &[Complex<T>] {
        &self.leading_eigenfunction
    }

    /// Observed contraction ratio of the power iterations (an empirical gap).
    pub fn contraction_ratio(&self) -> T {
        self.contraction_ratio
    }

    /// Matrix entry for frequencies `k` (row) and `l` (column).
    pub fn entry(&self, k: i64, l: i64) -> Complex<T> {
        let n = self.modes as i64;
        assert!(k.abs() <= n && l.abs() <= n, "frequency outside the model");
        self.matrix[(k + n) as usize * self.dim() + (l + n) as usize]
    }

    /// Applies the operator to a coefficient vector indexed `−N..=N`.
    pub fn apply(&self, coefficients: &[Complex<T>]) -> Vec<Complex<T>> {
        let dim = self.dim();
        assert_eq!(coefficients.len(), dim);
        self.matrix
            .chunks_exact(dim)
            .map(|row| dot(row, coefficients))
            .collect()
    }

    /// Row vector times the matrix.
    pub fn apply_adjoint(&self, row: &[Complex<T>]) -> Vec<Complex<T>> {
        let dim = self.dim();
        assert_eq!(row.len(), dim);
        let mut out = vec![Complex::new(T::zero(), T::zero()); dim];
        for (r, coeffs) in row.iter().zip(self.matrix.chunks_exact(dim)) {
            for (o, &p) in out.iter_mut().zip(coeffs) {
                *o = *o + *r * p;
            }
        }
        out
    }

    /// Pairing of the leading eigenmeasure with a coefficient vector.
    pub fn pair(&self, coefficients: &[Complex<T>]) -> Complex<T> {
        dot(&self.leading_eigenmeasure, coefficients)
    }

    /// Fourier coefficients `−N..=N` of `φ`, failing if `φ` has content
    /// above frequency `N`.
    pub fn coefficients(&self, phi: impl Fn(T) -> T) -> Result<Vec<Complex<T>>> {
        let grid: Vec<T> = (0..self.nodes)
            .map(|j| T::from_count(j) / T::from_count(self.nodes))
            .collect();
        let s = spectrum(&grid, phi);
        check_resolved(&s, self.modes, "observable")?;
        Ok(centered(&s, self.modes))
    }

    /// `μ(φ)` for the measure of maximal entropy. Requires zero twist.
    pub fn mme_integral(&self, phi: impl Fn(T) -> T) -> Result<T> {
        if self.twist != T::zero() {
            return Err(Error::InvalidArgument(
                "the measure of maximal entropy lives on the untwisted model".into(),
            ));
        }
        let c = self.coefficients(phi)?;
        Ok(self.pair(&c).re)
    }

    /// Coefficients of `ĥ = ln f' − χ̄` for frequencies `−2N..=2N`.
    pub(crate) fn centered_coefficients_wide(&self) -> Vec<Complex<T>> {
        let n2 = 2 * self.modes;
        let mut c = centered(&self.log_derivative_spectrum, n2);
        c[n2] = c[n2] - Complex::new(self.chi_bar, T::zero());
        c
    }
}

/// Normalized DFT of `φ` sampled on `grid`; entry `wrap(l)` is `φ̂_l`.
fn spectrum<T: Real>(grid: &[T], phi: impl Fn(T) -> T) -> Vec<Complex<T>> {
    let nodes = grid.len();
    let mut buf: Vec<Complex<T>> = grid
        .iter()
        .map(|&y| Complex::new(phi(y), T::zero()))
        .collect();
    FftPlanner::<T>::new().plan_fft_forward(nodes).process(&mut buf);
    let inv = T::one() / T::from_count(nodes);
    buf.iter_mut().for_each(|c| *c = *c * inv);
    buf
}

/// Coefficients `−width..=width` of a full spectrum.
fn centered<T: Real>(spectrum: &[Complex<T>], width: usize) -> Vec<Complex<T>> {
    let w = width as i64;
    (-w..=w).map(|l| spectrum[wrap(l, spectrum.len())]).collect()
}

fn check_resolved<T: Real>(spectrum: &[Complex<T>], modes: usize, what: &str) -> Result<()> {
    let nodes = spectrum.len();
    let scale = spectrum.iter().fold(T::one(), |acc, c| acc.max(c.norm()));
    let beyond = (modes..=nodes / 2)
        .flat_map(|l| [l as i64, -(l as i64)])
        .fold(T::zero(), |acc, l| acc.max(spectrum[wrap(l, nodes)].norm()));
    if beyond > T::lit(T::TAIL_TOL) * scale {
        return Err(Error::Resolution {
            modes,
            reason: format!("{what} has Fourier content {beyond:e} at or above frequency {modes}"),
        });
    }
    Ok(())
}

#[inline]
fn wrap(l: i64, len: usize) -> usize {
    l.rem_euclid(len as i64) as usize
}

pub(crate) fn dot<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (&x, &y)| acc + x * y)
}

fn max_abs<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, c| acc.max(c.norm()))
}
