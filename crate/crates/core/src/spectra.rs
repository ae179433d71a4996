//! Uniform two-axis grids, zero-padded double Fourier transform, the
//! absorptive combination and peak extraction.
//!
//! Axis 1 carries t₁ or ω₁ (rows), axis 2 carries t₃ or ω₃ (columns).

use crate::error::SpectraError;
use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Forward transform kernel `e^{+iωt}` on both time axes. With this choice
/// a detected coherence rotating as `e^{−iωt}` appears at `+ω`.
pub const FFT_SIGN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
    pub unit: String,
}

impl Axis {
    pub fn new(start: f64, step: f64, count: usize, unit: impl Into<String>) -> Result<Self, SpectraError> {
        if !(step > 0.0 && step.is_finite() && start.is_finite()) {
            return Err(SpectraError::InvalidAxis(format!("step must be positive and finite, got {step}")));
        }
        if count < 2 {
            return Err(SpectraError::InvalidAxis(format!("need at least 2 points, got {count}")));
        }
        Ok(Self { start, step, count, unit: unit.into() })
    }

    /// `count` points spanning `center ± half_width` inclusive.
    pub fn centered(center: f64, half_width: f64, count: usize, unit: impl Into<String>) -> Result<Self, SpectraError> {
        if count < 2 {
            return Err(SpectraError::InvalidAxis(format!("need at least 2 points, got {count}")));
        }
        Self::new(center - half_width, 2.0 * half_width / (count - 1) as f64, count, unit)
    }

    pub fn value(&self, k: usize) -> f64 {
        self.start + self.step * k as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.value(k)).collect()
    }

    pub fn last(&self) -> f64 {
        self.value(self.count - 1)
    }

    /// Maps every value `v` to `offset + scale·v`.
    pub fn rescaled(&self, scale: f64, offset: f64, unit: impl Into<String>) -> Self {
        Self { start: offset + scale * self.start, step: scale * self.step, count: self.count, unit: unit.into() }
    }

    /// Fractional index of `v`.
    pub fn position(&self, v: f64) -> f64 {
        (v - self.start) / self.step
    }

    fn matches(&self, other: &Axis) -> bool {
        self.count == other.count
            && self.unit == other.unit
            && (self.start - other.start).abs() <= 1e-9 * self.step
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexGrid2D {
    pub axis1: Axis,
    pub axis2: Axis,
    pub values: Array2<Complex64>,
}

impl ComplexGrid2D {
    pub fn new(axis1: Axis, axis2: Axis, values: Array2<Complex64>) -> Result<Self, SpectraError> {
        if values.dim() != (axis1.count, axis2.count) {
            return Err(SpectraError::GridMismatch(format!(
                "values {:?} vs axes ({}, {})",
                values.dim(),
                axis1.count,
                axis2.count
            )));
        }
        Ok(Self { axis1, axis2, values })
    }

    pub fn zeros(axis1: Axis, axis2: Axis) -> Self {
        let values = Array2::zeros((axis1.count, axis2.count));
        Self { axis1, axis2, values }
    }

    pub fn real(&self) -> Array2<f64> {
        self.values.mapv(|z| z.re)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_real(&self) -> f64 {
        self.values.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { axis1: self.axis1.clone(), axis2: self.axis2.clone(), values: self.values.mapv(|z| z * s) }
    }

    /// Sub-grid of the points whose axis values lie inside the ranges.
    pub fn crop(&self, range1: (f64, f64), range2: (f64, f64)) -> Result<Self, SpectraError> {
        let span = |a: &Axis, (lo, hi): (f64, f64)| {
            let first = (0..a.count).find(|&k| a.value(k) >= lo);
            let last = (0..a.count).rev().find(|&k| a.value(k) <= hi);
            match (first, last) {
                (Some(f), Some(l)) if l > f => Ok((f, l + 1)),
                _ => Err(SpectraError::InvalidAxis(format!("window [{lo}, {hi}] holds fewer than 2 points"))),
            }
        };
        let (a0, a1) = span(&self.axis1, range1)?;
        let (b0, b1) = span(&self.axis2, range2)?;
        let sub = |a: &Axis, k0: usize, k1: usize| Axis { start: a.value(k0), step: a.step, count: k1 - k0, unit: a.unit.clone() };
        Ok(Self {
            axis1: sub(&self.axis1, a0, a1),
            axis2: sub(&self.axis2, b0, b1),
            values: self.values.slice(ndarray::s![a0..a1, b0..b1]).to_owned(),
        })
    }

    fn same_axes(&self, other: &Self) -> Result<(), SpectraError> {
        if !self.axis1.matches(&other.axis1) || !self.axis2.matches(&other.axis2) {
            return Err(SpectraError::GridMismatch(format!(
                "axes {:?} × {:?} vs {:?} × {:?}",
                self.axis1, self.axis2, other.axis1, other.axis2
            )));
        }
        Ok(())
    }
}

/// A frequency-domain grid plus what is needed to interpret and reproduce
/// it. `normalization` is the factor the stored values were divided by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub grid: ComplexGrid2D,
    pub center_frequency: f64,
    pub method: String,
    pub t2: Option<f64>,
    pub normalization: f64,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl SpectrumResult {
    pub fn new(grid: ComplexGrid2D, center_frequency: f64, method: impl Into<String>, t2: Option<f64>) -> Self {
        Self { grid, center_frequency, method: method.into(), t2, normalization: 1.0, metadata: BTreeMap::new() }
    }

    /// Rescales so that the largest real value has magnitude one.
    pub fn normalize_real(mut self) -> Result<Self, SpectraError> {
        let m = self.grid.max_abs_real();
        if m == 0.0 || !m.is_finite() {
            return Err(SpectraError::EmptySpectrum);
        }
        self.grid.values.mapv_inplace(|z| z / m);
        self.normalization *= m;
        Ok(self)
    }

    pub fn with_metadata(mut self, key: &str, value: impl Serialize) -> Self {
        self.metadata.insert(key.to_string(), serde_json::to_value(value).unwrap_or(serde_json::Value::Null));
        self
    }
}

/// Pointwise evaluation `f(axis1 value, axis2 value)`, rows in parallel when
/// the `parallel` feature is on. Each point is computed independently, so
/// the result does not depend on scheduling.
pub fn evaluate_grid<E, F>(axis1: &Axis, axis2: &Axis, f: F) -> Result<ComplexGrid2D, E>
where
    E: Send,
    F: Fn(f64, f64) -> Result<Complex64, E> + Sync,
{
    let row = |i: usize| -> Result<Vec<Complex64>, E> {
        let a = axis1.value(i);
        (0..axis2.count).map(|j| f(a, axis2.value(j))).collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Result<Vec<_>, E> = (0..axis1.count).into_par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Result<Vec<_>, E> = (0..axis1.count).map(row).collect();
    Ok(assemble(axis1, axis2, rows?))
}

pub fn evaluate_grid_serial<E, F>(axis1: &Axis, axis2: &Axis, f: F) -> Result<ComplexGrid2D, E>
where
    F: Fn(f64, f64) -> Result<Complex64, E>,
{
    let rows: Result<Vec<Vec<Complex64>>, E> = (0..axis1.count)
        .map(|i| {
            let a = axis1.value(i);
            (0..axis2.count).map(|j| f(a, axis2.value(j))).collect()
        })
        .collect();
    Ok(assemble(axis1, axis2, rows?))
}

fn assemble(axis1: &Axis, axis2: &Axis, rows: Vec<Vec<Complex64>>) -> ComplexGrid2D {
    let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
    let values = Array2::from_shape_vec((axis1.count, axis2.count), flat).expect("row lengths match axis");
    ComplexGrid2D { axis1: axis1.clone(), axis2: axis2.clone(), values }
}

/// Frequency axis of an `n`-point transform of samples spaced by `dt`, with
/// zero frequency at index `n/2`.
pub fn frequency_axis(n: usize, dt: f64, time_unit: &str) -> Axis {
    let step = TAU / (n as f64 * dt);
    Axis { start: -((n / 2) as f64) * step, step, count: n, unit: format!("rad/{time_unit}") }
}

/// `Δt·Σ x_k e^{+iω_j t_k}` over a zero-padded buffer, reordered so that zero
/// frequency sits at index `n/2`. The time axis is assumed to start at 0.
fn transform_in_place(buf: &mut [Complex64], fft: &dyn rustfft::Fft<f64>, dt: f64) {
    fft.process(buf);
    let n = buf.len();
    buf.rotate_right(n / 2);
    for z in buf.iter_mut() {
        *z *= dt;
    }
}

/// Zero-pads each axis to `pad`, transforms t₁ → ω₁ and t₃ → ω₃ with the
/// [`FFT_SIGN`] kernel, and returns the centred spectrum.
pub fn double_fft(grid: &ComplexGrid2D, pad: (usize, usize)) -> Result<ComplexGrid2D, SpectraError> {
    let (n1, n2) = grid.values.dim();
    if pad.0 < n1 {
        return Err(SpectraError::PadTooSmall { pad: pad.0, len: n1 });
    }
    if pad.1 < n2 {
        return Err(SpectraError::PadTooSmall { pad: pad.1, len: n2 });
    }
    let mut planner = FftPlanner::new();
    let fft2 = planner.plan_fft_inverse(pad.1);
    let fft1 = planner.plan_fft_inverse(pad.0);
    let (dt1, dt2) = (grid.axis1.step, grid.axis2.step);

    let mut out = Array2::<Complex64>::zeros(pad);
    out.slice_mut(ndarray::s![..n1, ..n2]).assign(&grid.values);
    {
        // Rows beyond n1 are zero and stay zero.
        let data = out.as_slice_mut().expect("standard layout");
        let rows = &mut data[..n1 * pad.1];
        #[cfg(feature = "parallel")]
        rows.par_chunks_mut(pad.1).for_each(|r| transform_in_place(r, fft2.as_ref(), dt2));
        #[cfg(not(feature = "parallel"))]
        rows.chunks_mut(pad.1).for_each(|r| transform_in_place(r, fft2.as_ref(), dt2));
    }

    const BLOCK: usize = 64;
    for first in (0..pad.1).step_by(BLOCK) {
        let cols: Vec<usize> = (first..(first + BLOCK).min(pad.1)).collect();
        let column = |j: &usize| {
            let mut buf: Vec<Complex64> = out.column(*j).to_vec();
            transform_in_place(&mut buf, fft1.as_ref(), dt1);
            buf
        };
        #[cfg(feature = "parallel")]
        let done: Vec<Vec<Complex64>> = cols.par_iter().map(column).collect();
        #[cfg(not(feature = "parallel"))]
        let done: Vec<Vec<Complex64>> = cols.iter().map(column).collect();
        for (j, buf) in cols.iter().zip(done) {
            out.column_mut(*j).assign(&ndarray::ArrayView1::from(&buf[..]));
        }
    }

    Ok(ComplexGrid2D {
        axis1: frequency_axis(pad.0, dt1, &grid.axis1.unit),
        axis2: frequency_axis(pad.1, dt2, &grid.axis2.unit),
        values: out,
    })
}

/// Index of `−ω` on a centred transform axis of length `n`.
fn mirror_index(k: usize, n: usize) -> usize {
    (2 * (n / 2) + n - k) % n
}

/// Reflects a centred grid in ω₁ about its zero-frequency row.
pub fn mirror_axis1(values: &Array2<Complex64>) -> Array2<Complex64> {
    let (n1, n2) = values.dim();
    Array2::from_shape_fn((n1, n2), |(i, j)| values[[mirror_index(i, n1), j]])
}

/// `Re(R)` reflected in ω₁ plus `Re(NR)`, stored with zero imaginary part.
pub fn absorptive_combine(
    rephasing: &SpectrumResult,
    nonrephasing: &SpectrumResult,
) -> Result<SpectrumResult, SpectraError> {
    let mut grid = nonrephasing.grid.clone();
    absorptive_combine_into(&rephasing.grid, &mut grid)?;
    let mut out = SpectrumResult::new(grid, nonrephasing.center_frequency, "absorptive", nonrephasing.t2);
    out.metadata = nonrephasing.metadata.clone();
    Ok(out)
}

/// In-place form of [`absorptive_combine`]: overwrites `nonrephasing`,
/// avoiding a second full-size grid.
pub fn absorptive_combine_into(rephasing: &ComplexGrid2D, nonrephasing: &mut ComplexGrid2D) -> Result<(), SpectraError> {
    rephasing.same_axes(nonrephasing)?;
    let n1 = rephasing.axis1.count;
    for (i, mut row) in nonrephasing.values.rows_mut().into_iter().enumerate() {
        let mirrored = rephasing.values.row(mirror_index(i, n1));
        for (z, r) in row.iter_mut().zip(mirrored) {
            *z = Complex64::new(z.re + r.re, 0.0);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub omega1: f64,
    pub omega3: f64,
    pub height: f64,
    pub sign: i8,
    pub index: (usize, usize),
}

/// Vertex offset of the parabola through three equally spaced samples.
fn parabolic_offset(a: f64, b: f64, c: f64) -> f64 {
    let d = a - 2.0 * b + c;
    if d == 0.0 {
        0.0
    } else {
        (0.5 * (a - c) / d).clamp(-0.5, 0.5)
    }
}

/// Local maxima of positive and minima of negative values of `Re(grid)`
/// over the 8-neighbourhood, at least `fraction` of the largest magnitude,
/// with positions refined per axis. Sorted by magnitude, largest first.
pub fn find_peaks(grid: &ComplexGrid2D, fraction: f64) -> Result<Vec<Peak>, SpectraError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(SpectraError::InvalidAxis(format!("peak fraction must lie in (0, 1), got {fraction}")));
    }
    let re = grid.real();
    let (n1, n2) = re.dim();
    let top = re.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if top == 0.0 {
        return Err(SpectraError::EmptySpectrum);
    }
    let threshold = fraction * top;
    let mut peaks = Vec::new();
    for i in 0..n1 {
        for j in 0..n2 {
            let v = re[[i, j]];
            if v.abs() < threshold {
                continue;
            }
            let s = v.signum();
            let mut extremal = true;
            'scan: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a < 0 || b < 0 || a >= n1 as i64 || b >= n2 as i64 {
                        continue;
                    }
                    let w = s * re[[a as usize, b as usize]];
                    // Ties resolve towards the earlier index so a plateau
                    // yields one peak.
                    let earlier = (a as usize, b as usize) < (i, j);
                    if w > s * v || (earlier && w == s * v) {
                        extremal = false;
                        break 'scan;
                    }
                }
            }
            if !extremal {
                continue;
            }
            let d1 = if i > 0 && i + 1 < n1 { parabolic_offset(re[[i - 1, j]], v, re[[i + 1, j]]) } else { 0.0 };
            let d2 = if j > 0 && j + 1 < n2 { parabolic_offset(re[[i, j - 1]], v, re[[i, j + 1]]) } else { 0.0 };
            peaks.push(Peak {
                omega1: grid.axis1.value(i) + d1 * grid.axis1.step,
                omega3: grid.axis2.value(j) + d2 * grid.axis2.step,
                height: v,
                sign: s as i8,
                index: (i, j),
            });
        }
    }
    peaks.sort_by(|a, b| b.height.abs().total_cmp(&a.height.abs()));
    Ok(peaks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectralAxis {
    Omega1,
    Omega3,
}

impl Peak {
    pub fn coordinate(&self, axis: SpectralAxis) -> f64 {
        match axis {
            SpectralAxis::Omega1 => self.omega1,
            SpectralAxis::Omega3 => self.omega3,
        }
    }
}

/// `|p_a − p_b|` along `axis` for each requested index pair.
pub fn peak_gaps(peaks: &[Peak], pairs: &[(usize, usize)], axis: SpectralAxis) -> Result<Vec<f64>, SpectraError> {
    pairs
        .iter()
        .map(|&(a, b)| {
            let pa = peaks.get(a).ok_or(SpectraError::PeakIndex(a))?;
            let pb = peaks.get(b).ok_or(SpectraError::PeakIndex(b))?;
            Ok((pa.coordinate(axis) - pb.coordinate(axis)).abs())
        })
        .collect()
}

/// Sorted distinct peak coordinates along `axis`, merging values closer
/// than `tolerance`.
pub fn distinct_positions(peaks: &[Peak], axis: SpectralAxis, tolerance: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = peaks.iter().map(|p| p.coordinate(axis)).collect();
    xs.sort_by(f64::total_cmp);
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for x in xs {
        match groups.last_mut() {
            Some(g) if x - g[g.len() - 1] <= tolerance => g.push(x),
            _ => groups.push(vec![x]),
        }
    }
    groups.iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect()
}

/// Spacings between neighbouring distinct positions along `axis`.
pub fn adjacent_gaps(peaks: &[Peak], axis: SpectralAxis, tolerance: f64) -> Vec<f64> {
    distinct_positions(peaks, axis, tolerance).windows(2).map(|w| w[1] - w[0]).collect()
}

/// Pairs each peak of `a` with the nearest peak of `b` (grid-index
/// distance) when no further than `max_bins`; `None` otherwise.
pub fn match_peaks(a: &[Peak], b: &[Peak], max_bins: usize) -> Vec<Option<usize>> {
    a.iter()
        .map(|p| {
            b.iter()
                .enumerate()
                .map(|(k, q)| {
                    let d1 = p.index.0.abs_diff(q.index.0);
                    let d2 = p.index.1.abs_diff(q.index.1);
                    (k, d1.max(d2))
                })
                .filter(|&(_, d)| d <= max_bins)
                .min_by_key(|&(_, d)| d)
                .map(|(k, _)| k)
        })
        .collect()
}

/// Strongest oscillation of a real sampled series inside `band` (angular
/// frequency), returned as `(ω, phase)` of `Σ y_k e^{−iωt_k}` after mean
/// removal. The FFT maximum is polished by golden-section search on the
/// exact transform.
pub fn dominant_frequency(samples: &[f64], dt: f64, band: (f64, f64)) -> Result<(f64, f64), SpectraError> {
    if samples.len() < 4 {
        return Err(SpectraError::EmptySpectrum);
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let y: Vec<f64> = samples.iter().map(|v| v - mean).collect();
    let dft = |w: f64| -> Complex64 {
        y.iter().enumerate().map(|(k, &v)| v * Complex64::from_polar(1.0, -w * dt * k as f64)).sum()
    };
    let n = (8 * y.len()).next_power_of_two();
    let mut buf: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::default());
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bin = TAU / (n as f64 * dt);
    let best = (0..n / 2)
        .filter(|&k| (band.0..=band.1).contains(&(k as f64 * bin)))
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .ok_or(SpectraError::EmptySpectrum)?;
    let (mut lo, mut hi) = ((best as f64 - 1.0) * bin, (best as f64 + 1.0) * bin);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if dft(m1).norm() < dft(m2).norm() {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let w = 0.5 * (lo + hi);
    Ok((w, dft(w).arg()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn time_axis(n: usize, dt: f64) -> Axis {
        Axis::new(0.0, dt, n, "ps").unwrap()
    }

    #[test]
    fn axis_validation() {
        assert!(Axis::new(0.0, 0.0, 10, "x").is_err());
        assert!(Axis::new(0.0, 1.0, 1, "x").is_err());
        let a = Axis::centered(0.0, 4.0, 401, "x").unwrap();
        assert!((a.value(200)).abs() < 1e-12);
        assert!((a.last() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_function_gives_constant_grid() {
        let a = Axis::centered(0.0, 1.0, 7, "x").unwrap();
        let g = evaluate_grid::<(), _>(&a, &a, |_, _| Ok(Complex64::new(2.0, -1.0))).unwrap();
        assert!(g.values.iter().all(|&z| z == Complex64::new(2.0, -1.0)));
    }

    #[test]
    fn parallel_and_serial_grids_agree_bitwise() {
        let a = Axis::centered(0.0, 3.0, 41, "x").unwrap();
        let f = |x: f64, y: f64| -> Result<Complex64, ()> { Ok(Complex64::new((x * y).sin(), x.exp() / (1.0 + y * y))) };
        assert_eq!(evaluate_grid(&a, &a, f).unwrap(), evaluate_grid_serial(&a, &a, f).unwrap());
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let g = ComplexGrid2D::zeros(time_axis(8, 0.1), time_axis(6, 0.1));
        let s = double_fft(&g, (16, 16)).unwrap();
        assert!(s.values.iter().all(|z| z.norm() == 0.0));
        assert!(double_fft(&g, (4, 16)).is_err());
    }

    #[test]
    fn padded_resolution_matches_grid_arithmetic() {
        let ax = frequency_axis(5000, 0.005, "ps");
        let cm = ax.step / TAU / crate::model::SPEED_OF_LIGHT_CM_PER_PS;
        assert!((cm - 1.334).abs() < 1e-3);
    }

    #[test]
    fn parseval_without_padding() {
        let (n1, n2, dt) = (24, 30, 0.07);
        let values = Array2::from_shape_fn((n1, n2), |(i, j)| {
            Complex64::new((0.3 * i as f64).cos() + 0.1 * j as f64, (1.7 * (i * j) as f64).sin())
        });
        let g = ComplexGrid2D::new(time_axis(n1, dt), time_axis(n2, dt), values).unwrap();
        let s = double_fft(&g, (n1, n2)).unwrap();
        let lhs: f64 = g.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * dt * dt;
        let rhs: f64 =
            s.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * s.axis1.step * s.axis2.step / (TAU * TAU);
        assert!((lhs - rhs).abs() < 1e-10 * lhs);
    }

    /// `e^{−γt−iω₀t}` along t₃ transforms to `i/(ω−ω₀+iγ)` up to
    /// discretisation, a Lorentzian of half-width γ at ω₀.
    #[test]
    fn damped_exponential_gives_lorentzian() {
        let (n, dt, gamma, w0) = (512, 0.01, 0.8, 30.0);
        let mut v = Array2::zeros((2, n));
        for k in 0..n {
            let t = k as f64 * dt;
            v[[0, k]] = Complex64::from_polar((-gamma * t).exp(), -w0 * t);
        }
        let g = ComplexGrid2D::new(time_axis(2, dt), time_axis(n, dt), v).unwrap();
        let s = double_fft(&g, (2, 8192)).unwrap();
        let row: Vec<f64> = (0..s.axis2.count).map(|j| s.values[[1, j]].norm()).collect();
        let k = (0..row.len()).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap();
        assert!((s.axis2.value(k) - w0).abs() <= 2.0 * s.axis2.step);
        let half: Vec<f64> =
            (0..row.len()).filter(|&j| row[j] >= row[k] / 2f64.sqrt()).map(|j| s.axis2.value(j)).collect();
        let hwhm = 0.5 * (half.last().unwrap() - half[0]);
        assert!((hwhm - gamma).abs() <= 2.0 * s.axis2.step + 0.02 * gamma, "{hwhm}");
    }

    #[test]
    fn frequency_shift_moves_peak() {
        let (n, dt) = (256, 0.02);
        let peak_at = |w0: f64| {
            let v = Array2::from_shape_fn((n, n), |(i, j)| {
                let (t1, t3) = (i as f64 * dt, j as f64 * dt);
                Complex64::from_polar((-0.5 * (t1 + t3)).exp(), -w0 * t3 - 2.0 * t1)
            });
            let g = ComplexGrid2D::new(time_axis(n, dt), time_axis(n, dt), v).unwrap();
            let s = double_fft(&g, (512, 512)).unwrap();
            let k = s.values.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap().0;
            (s.axis2.value(k % 512), s.axis2.step)
        };
        let (a, step) = peak_at(10.0);
        let (b, _) = peak_at(10.0 + 7.3);
        assert!((b - a - 7.3).abs() <= step);
    }

    #[test]
    fn crop_selects_window() {
        let a = Axis::new(0.0, 1.0, 10, "x").unwrap();
        let g = evaluate_grid::<(), _>(&a, &a, |x, y| Ok(Complex64::new(x, y))).unwrap();
        let c = g.crop((2.5, 6.0), (0.0, 1.0)).unwrap();
        assert_eq!((c.axis1.start, c.axis1.count, c.axis2.count), (3.0, 4, 2));
        assert_eq!(c.values[[0, 1]], Complex64::new(3.0, 1.0));
        assert!(g.crop((20.0, 30.0), (0.0, 9.0)).is_err());
    }

    #[test]
    fn mirroring_twice_is_identity() {
        for n in [6, 7] {
            let v = Array2::from_shape_fn((n, 3), |(i, j)| Complex64::new(i as f64, j as f64));
            assert_eq!(mirror_axis1(&mirror_axis1(&v)), v);
            let ax = frequency_axis(n, 0.3, "ps");
            for k in 1..n {
                assert!((ax.value(mirror_index(k, n)) + ax.value(k)).abs() < 1e-12 || (n % 2 == 0 && k == 0));
            }
        }
    }

    fn spectrum(values: Array2<Complex64>) -> SpectrumResult {
        let (n1, n2) = values.dim();
        let g = ComplexGrid2D::new(frequency_axis(n1, 0.1, "ps"), frequency_axis(n2, 0.1, "ps"), values).unwrap();
        SpectrumResult::new(g, 0.0, "test", Some(0.0))
    }

    #[test]
    fn absorptive_combination_cases() {
        let v = Array2::from_shape_fn((8, 5), |(i, j)| Complex64::new((i * 5 + j) as f64, 1.0));
        let nr = spectrum(v.clone());
        let r = spectrum(mirror_axis1(&v));
        let sum = absorptive_combine(&r, &nr).unwrap();
        assert_eq!(sum.grid.values, v.mapv(|z| Complex64::new(2.0 * z.re, 0.0)));
        let zero = spectrum(Array2::zeros((8, 5)));
        let only = absorptive_combine(&zero, &nr).unwrap();
        assert_eq!(only.grid.values, v.mapv(|z| Complex64::new(z.re, 0.0)));
        let other = spectrum(Array2::zeros((6, 5)));
        assert!(absorptive_combine(&other, &nr).is_err());
    }

    fn lorentz_grid(centres: &[(f64, f64, f64)]) -> ComplexGrid2D {
        let a = Axis::centered(0.0, 10.0, 201, "x").unwrap();
        evaluate_grid::<(), _>(&a, &a, |x, y| {
            Ok(Complex64::new(
                centres.iter().map(|&(cx, cy, h)| h / (1.0 + (x - cx).powi(2) + (y - cy).powi(2))).sum(),
                0.0,
            ))
        })
        .unwrap()
    }

    #[test]
    fn single_lorentzian_peak_is_located() {
        let g = lorentz_grid(&[(1.234, -2.71, 1.0)]);
        let p = find_peaks(&g, 0.1).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p[0].omega1 - 1.234).abs() < 0.1 * g.axis1.step);
        assert!((p[0].omega3 + 2.71).abs() < 0.1 * g.axis2.step);
        assert_eq!(p[0].sign, 1);
    }

    #[test]
    fn signed_peaks_and_gaps() {
        let g = lorentz_grid(&[(-3.0, -3.0, 1.0), (3.0, 4.0, -0.6), (3.0, -3.0, 0.05)]);
        let p = find_peaks(&g, 0.2).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!((p[0].sign, p[1].sign), (1, -1));
        let gaps = peak_gaps(&p, &[(0, 1)], SpectralAxis::Omega3).unwrap();
        assert!((gaps[0] - 7.0).abs() < 0.05);
        assert!(peak_gaps(&p, &[(0, 5)], SpectralAxis::Omega3).is_err());
        assert!(adjacent_gaps(&p[..1], SpectralAxis::Omega1, 0.1).is_empty());
        assert!(find_peaks(&ComplexGrid2D::zeros(g.axis1.clone(), g.axis2.clone()), 0.5).is_err());
    }

    #[test]
    fn positive_scaling_keeps_peaks() {
        let g = lorentz_grid(&[(-3.0, 2.0, 1.0), (4.0, 4.0, -0.7)]);
        let a = find_peaks(&g, 0.2).unwrap();
        let b = find_peaks(&g.scaled(37.5), 0.2).unwrap();
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.index, q.index);
        }
    }

    #[test]
    fn dominant_frequency_of_damped_cosine() {
        let dt = 0.001;
        let y: Vec<f64> =
            (0..10_000).map(|k| (-0.3 * k as f64 * dt).exp() * (12.5 * k as f64 * dt + 0.4).cos()).collect();
        let (w, phase) = dominant_frequency(&y, dt, (5.0, 30.0)).unwrap();
        assert!((w - 12.5).abs() < 0.01 * 12.5);
        assert!((phase - 0.4).abs() < 0.05, "{phase}");
    }
}
