//! Periodic tensor grids, DFTs, fractional derivative multipliers and the
//! Littlewood–Paley projection family.
//!
//! Frequency convention: integer lattice on the unit torus with basis
//! `e^{2πi k·x}`; the homogeneous multiplier for `D^β` is `|k|^β` with no
//! 2π factor, so single-mode examples stay integer-clean.

use crate::error::Error;
use crate::flagtree::DerivKind;
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use std::io::{Read, Write};

pub type Complex = num_complex::Complex64;

/// Hard cap on grid size (total complex samples).
pub const GRID_BUDGET: usize = 1 << 24;

/// Shape of a periodic tensor grid: one power-of-two axis per parameter.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GridSpec {
    sizes: Vec<usize>,
}

impl GridSpec {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidGrid("no axes".into()));
        }
        let mut total: usize = 1;
        for &m in &sizes {
            if m < 8 || !m.is_power_of_two() {
                return Err(Error::InvalidGrid(format!(
                    "axis size {m} must be a power of two >= 8"
                )));
            }
            total = total
                .checked_mul(m)
                .filter(|&t| t <= GRID_BUDGET)
                .ok_or_else(|| Error::InvalidGrid("grid exceeds budget".into()))?;
        }
        Ok(GridSpec { sizes })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn n_axes(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.sizes.len()];
        for i in (0..self.sizes.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.sizes[i + 1];
        }
        s
    }

    /// Signed frequency for a storage index along `axis`.
    pub fn freq_of_index(&self, axis: usize, idx: usize) -> i64 {
        let m = self.sizes[axis] as i64;
        let i = idx as i64;
        if i < m / 2 {
            i
        } else {
            i - m
        }
    }

    /// Storage index for a signed frequency, or None when out of band.
    pub fn index_of_freq(&self, axis: usize, k: i64) -> Option<usize> {
        let m = self.sizes[axis] as i64;
        if k >= -m / 2 && k < m / 2 {
            Some(k.rem_euclid(m) as usize)
        } else {
            None
        }
    }

    /// Flat storage offset of a signed frequency vector.
    pub fn offset_of_freq(&self, k: &[i64]) -> Option<usize> {
        let strides = self.strides();
        let mut off = 0;
        for (axis, (&kj, stride)) in k.iter().zip(&strides).enumerate() {
            off += self.index_of_freq(axis, kj)? * stride;
        }
        Some(off)
    }

    /// Signed frequency vector at a flat storage offset.
    pub fn freq_at_offset(&self, mut off: usize) -> Vec<i64> {
        let strides = self.strides();
        let mut k = Vec::with_capacity(self.sizes.len());
        for (axis, stride) in strides.iter().enumerate() {
            let idx = off / stride;
            off %= stride;
            k.push(self.freq_of_index(axis, idx));
        }
        k
    }

    /// Dyadic scale range `[0, log2(M)-1]` available along `axis`.
    pub fn scale_range(&self, axis: usize) -> (i64, i64) {
        (0, (self.sizes[axis].trailing_zeros() as i64) - 1)
    }
}

/// Samples of a function on the torus together with its cached spectrum.
/// Immutable after construction; the two representations stay consistent.
#[derive(Clone, Debug)]
pub struct GridFunction {
    spec: GridSpec,
    samples: Vec<Complex>,
    spectrum: Vec<Complex>,
}

impl GridFunction {
    pub fn from_samples(spec: GridSpec, samples: Vec<Complex>) -> Result<Self> {
        if samples.len() != spec.total() {
            return Err(Error::InvalidGrid("sample count mismatch".into()));
        }
        let mut spectrum = samples.clone();
        fft_all_axes(&spec, &mut spectrum, rustfft::FftDirection::Forward);
        let scale = 1.0 / spec.total() as f64;
        for c in &mut spectrum {
            *c *= scale;
        }
        Ok(GridFunction {
            spec,
            samples,
            spectrum,
        })
    }

    pub fn from_spectrum(spec: GridSpec, spectrum: Vec<Complex>) -> Result<Self> {
        if spectrum.len() != spec.total() {
            return Err(Error::InvalidGrid("spectrum length mismatch".into()));
        }
        let mut samples = spectrum.clone();
        fft_all_axes(&spec, &mut samples, rustfft::FftDirection::Inverse);
        Ok(GridFunction {
            spec,
            samples,
            spectrum,
        })
    }

    pub fn zero(spec: GridSpec) -> Self {
        let n = spec.total();
        GridFunction {
            spec,
            samples: vec![Complex::default(); n],
            spectrum: vec![Complex::default(); n],
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn samples(&self) -> &[Complex] {
        &self.samples
    }

    pub fn spectrum(&self) -> &[Complex] {
        &self.spectrum
    }

    pub fn spectrum_at(&self, k: &[i64]) -> Complex {
        self.spec
            .offset_of_freq(k)
            .map(|o| self.spectrum[o])
            .unwrap_or_default()
    }

    /// Single Fourier mode `c·e^{2πi k·x}`.
    pub fn single_mode(spec: GridSpec, k: &[i64], c: Complex) -> Result<Self> {
        let mut spectrum = vec![Complex::default(); spec.total()];
        let off = spec
            .offset_of_freq(k)
            .ok_or_else(|| Error::OutOfBand(k.to_vec()))?;
        spectrum[off] = c;
        GridFunction::from_spectrum(spec, spectrum)
    }

    /// New function with spectrum `c_k ↦ w(k)·c_k`.
    pub fn map_spectrum(&self, w: impl Fn(&[i64], Complex) -> Complex) -> GridFunction {
        let mut spectrum = Vec::with_capacity(self.spectrum.len());
        for (off, &c) in self.spectrum.iter().enumerate() {
            let k = self.spec.freq_at_offset(off);
            spectrum.push(w(&k, c));
        }
        GridFunction::from_spectrum(self.spec.clone(), spectrum).expect("same shape")
    }

    /// Pointwise product in sample space.
    pub fn pointwise_mul(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch("pointwise product".into()));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .collect();
        GridFunction::from_samples(self.spec.clone(), samples)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch("sum".into()));
        }
        let spectrum = self
            .spectrum
            .iter()
            .zip(&other.spectrum)
            .map(|(a, b)| a + b)
            .collect();
        GridFunction::from_spectrum(self.spec.clone(), spectrum)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch("difference".into()));
        }
        let spectrum = self
            .spectrum
            .iter()
            .zip(&other.spectrum)
            .map(|(a, b)| a - b)
            .collect();
        GridFunction::from_spectrum(self.spec.clone(), spectrum)
    }

    pub fn scale(&self, c: Complex) -> GridFunction {
        let spectrum = self.spectrum.iter().map(|a| a * c).collect();
        GridFunction::from_spectrum(self.spec.clone(), spectrum).expect("same shape")
    }

    /// Cyclic translation by whole grid cells (exact permutation).
    pub fn translate(&self, shift: &[i64]) -> Result<GridFunction> {
        if shift.len() != self.spec.n_axes() {
            return Err(Error::GridMismatch("translate shift length".into()));
        }
        let sizes = self.spec.sizes().to_vec();
        let strides = self.spec.strides();
        let mut samples = vec![Complex::default(); self.samples.len()];
        for (off, &v) in self.samples.iter().enumerate() {
            let mut rem = off;
            let mut dst = 0;
            for axis in 0..sizes.len() {
                let idx = rem / strides[axis];
                rem %= strides[axis];
                let m = sizes[axis] as i64;
                let nidx = ((idx as i64 + shift[axis]).rem_euclid(m)) as usize;
                dst += nidx * strides[axis];
            }
            samples[dst] = v;
        }
        GridFunction::from_samples(self.spec.clone(), samples)
    }

    /// Fractional derivative: homogeneous `∏_j |k_j|^{β_j}` or inhomogeneous
    /// `∏_j (1+k_j²)^{β_j/2}`.  `0^β := 0` for `β > 0` and `0^0 := 1`.
    pub fn fractional_derivative(&self, orders: &[f64], kind: DerivKind) -> Result<GridFunction> {
        if orders.len() != self.spec.n_axes() {
            return Err(Error::GridMismatch("order count".into()));
        }
        if kind == DerivKind::Homogeneous {
            let peak = self
                .spectrum
                .iter()
                .map(|c| c.norm())
                .fold(0.0f64, f64::max);
            for (axis, &b) in orders.iter().enumerate() {
                if b < 0.0 {
                    // need no mass on the k_axis = 0 hyperplane
                    let mass = self
                        .spectrum
                        .iter()
                        .enumerate()
                        .filter(|(off, _)| self.spec.freq_at_offset(*off)[axis] == 0)
                        .map(|(_, c)| c.norm())
                        .fold(0.0f64, f64::max);
                    if mass > 1e-12 * peak.max(1e-300) {
                        return Err(Error::NegativeOrderOnNonzeroMeanMode { axis, order: b });
                    }
                }
            }
        }
        Ok(self.map_spectrum(|k, c| {
            let mut w = 1.0;
            for (kj, &b) in k.iter().zip(orders) {
                w *= match kind {
                    DerivKind::Homogeneous => homogeneous_factor(*kj as f64, b),
                    DerivKind::Inhomogeneous => {
                        (1.0 + (*kj * *kj) as f64).powf(b / 2.0)
                    }
                };
            }
            c * w
        }))
    }

    /// Multiply the spectrum by a window in the `axis` frequency only.
    pub fn project_axis(&self, axis: usize, w: impl Fn(i64) -> Complex) -> GridFunction {
        self.map_spectrum(|k, c| c * w(k[axis]))
    }

    /// Littlewood–Paley projection along one axis.
    pub fn lp_project(&self, axis: usize, k: i64, mode: LpMode) -> GridFunction {
        let m = self.spec.sizes()[axis];
        self.project_axis(axis, |xi| Complex::new(lp_window(mode, k, xi, m), 0.0))
    }

    /// Modulated projection: the LP window times the phase `e^{2πi a ξ/2^k}`.
    pub fn modulated_project(&self, axis: usize, k: i64, a: f64, mode: LpMode) -> GridFunction {
        let m = self.spec.sizes()[axis];
        self.project_axis(axis, |xi| {
            let phase = 2.0 * std::f64::consts::PI * a * xi as f64 / (2f64).powi(k as i32);
            Complex::from_polar(lp_window(mode, k, xi, m), phase)
        })
    }

    /// Zero all spectrum entries with any `|k_j| > band`.
    pub fn truncate_band(&self, band: i64) -> GridFunction {
        self.map_spectrum(|k, c| {
            if k.iter().all(|kj| kj.abs() <= band) {
                c
            } else {
                Complex::default()
            }
        })
    }

    /// Remove the mean along every axis (zero the full zero mode only).
    pub fn remove_global_mean(&self) -> GridFunction {
        self.map_spectrum(|k, c| {
            if k.iter().all(|&kj| kj == 0) {
                Complex::default()
            } else {
                c
            }
        })
    }

    /// L² norm of the samples (normalized counting measure).
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.spec.total() as f64).sqrt()
    }

    /// Relative L² distance to another function.
    pub fn rel_l2_distance(&self, other: &GridFunction) -> f64 {
        let num = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den = self
            .samples
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// Little-endian binary dump: u64 axis count, u64 sizes, then row-major
    /// complex64 samples (re, im pairs).
    pub fn write_dump(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(&(self.spec.n_axes() as u64).to_le_bytes())?;
        for &m in self.spec.sizes() {
            w.write_all(&(m as u64).to_le_bytes())?;
        }
        for c in &self.samples {
            w.write_all(&c.re.to_le_bytes())?;
            w.write_all(&c.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump(r: &mut impl Read) -> Result<GridFunction> {
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf8)?;
        let n = u64::from_le_bytes(buf8) as usize;
        if n == 0 || n > 8 {
            return Err(Error::InvalidGrid(format!("dump axis count {n}")));
        }
        let mut sizes = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut buf8)?;
            sizes.push(u64::from_le_bytes(buf8) as usize);
        }
        let spec = GridSpec::new(sizes)?;
        let mut samples = Vec::with_capacity(spec.total());
        for _ in 0..spec.total() {
            r.read_exact(&mut buf8)?;
            let re = f64::from_le_bytes(buf8);
            r.read_exact(&mut buf8)?;
            let im = f64::from_le_bytes(buf8);
            samples.push(Complex::new(re, im));
        }
        GridFunction::from_samples(spec, samples)
    }
}

fn homogeneous_factor(k: f64, b: f64) -> f64 {
    if k == 0.0 {
        if b == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        k.abs().powf(b)
    }
}

fn fft_all_axes(spec: &GridSpec, data: &mut [Complex], dir: rustfft::FftDirection) {
    let sizes = spec.sizes();
    let strides = spec.strides();
    let mut planner = FftPlanner::new();
    for axis in 0..sizes.len() {
        let m = sizes[axis];
        let stride = strides[axis];
        let fft = planner.plan_fft(m, dir);
        let mut line = vec![Complex::default(); m];
        // iterate over all 1-d lines along `axis`
        let total = spec.total();
        let block = stride * m;
        for base in (0..total).step_by(block) {
            for inner in 0..stride {
                let start = base + inner;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + i * stride];
                }
                fft.process(&mut line);
                for (i, &v) in line.iter().enumerate() {
                    data[start + i * stride] = v;
                }
            }
        }
    }
}

/// Littlewood–Paley window selector.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LpMode {
    /// Annulus `Δ_k`.
    Delta,
    /// Low-pass `S_k = mean + Σ_{ℓ ≤ k-3} Δ_ℓ`.
    Low,
    /// High-pass complement `Δ_{≻k} = Σ_{ℓ ≥ k-2} Δ_ℓ`.
    High,
    /// Positive-frequency half `Δ_{k,+}`.
    DeltaPlus,
    /// Negative-frequency half `Δ_{k,-}`.
    DeltaMinus,
    /// `Δ_{≤k} = Σ_{0 ≤ ℓ ≤ k} Δ_ℓ` (no mean).
    DeltaLeq,
}

/// Smooth C^∞ blend: 1 on `|t| ≤ 1`, 0 on `|t| ≥ 2`.
pub fn phi(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let theta = |s: f64| (-1.0 / s).exp();
        let up = theta(2.0 - a);
        up / (up + theta(a - 1.0))
    }
}

/// `ψ(ξ) = φ(ξ) − φ(2ξ)`, supported on `1/2 ≤ |ξ| ≤ 2`.
pub fn psi(t: f64) -> f64 {
    phi(t) - phi(2.0 * t)
}

/// `ψ_k(ξ) = ψ(2^{-k} ξ)`.
pub fn psi_k(xi: f64, k: i64) -> f64 {
    psi(xi / (2f64).powi(k as i32))
}

/// Window value at integer frequency `xi` for an axis of size `m`.
///
/// The scale range is `0..=log2(m)-1`; the closed telescoping forms below
/// make the partitions `Σ_k Δ_k = Id − mean` and `S_k + Δ_{≻k} = Id`
/// exact on the lattice (the top window saturates at Nyquist where
/// `φ(2^{-k_max}ξ) = 1`).
pub fn lp_window(mode: LpMode, k: i64, xi: i64, m: usize) -> f64 {
    let k_max = (m.trailing_zeros() as i64) - 1;
    let x = xi as f64;
    let pow2 = |e: i64| (2f64).powi(e as i32);
    match mode {
        LpMode::Delta => psi_k(x, k),
        LpMode::DeltaPlus => {
            if xi >= 0 {
                psi_k(x, k)
            } else {
                0.0
            }
        }
        LpMode::DeltaMinus => {
            if xi < 0 {
                psi_k(x, k)
            } else {
                0.0
            }
        }
        LpMode::Low => {
            if xi == 0 {
                1.0
            } else if k - 3 < 0 {
                0.0
            } else {
                // Σ_{ℓ=0}^{k-3} ψ_ℓ(ξ) telescopes (φ(2ξ)=0 for |ξ| ≥ 1)
                phi(x / pow2(k - 3))
            }
        }
        LpMode::High => {
            if xi == 0 {
                0.0
            } else {
                let lo = if k - 3 < 0 { 0.0 } else { phi(x / pow2(k - 3)) };
                phi(x / pow2(k_max)) - lo
            }
        }
        LpMode::DeltaLeq => {
            if xi == 0 || k < 0 {
                0.0
            } else {
                phi(x / pow2(k))
            }
        }
    }
}

/// Random band-limited test function: i.i.d. complex Gaussian coefficients
/// damped by `exp(-|k|²/σ²)`; Hermitian-symmetrized when `real` is set.
pub fn random_band_limited(spec: &GridSpec, seed: u64, sigma: f64, real: bool) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = spec.total();
    let mut spectrum = vec![Complex::default(); total];
    for off in 0..total {
        let k = spec.freq_at_offset(off);
        let k2: f64 = k.iter().map(|&kj| (kj * kj) as f64).sum();
        let damp = if sigma > 0.0 { (-k2 / (sigma * sigma)).exp() } else { 0.0 };
        let (g1, g2) = gaussian_pair(&mut rng);
        spectrum[off] = Complex::new(g1, g2) * damp;
    }
    if sigma == 0.0 {
        // only the mean survives
        let (g1, g2) = gaussian_pair(&mut rng);
        spectrum[0] = Complex::new(g1, if real { 0.0 } else { g2 });
    }
    if real {
        let mut sym = spectrum.clone();
        for off in 0..total {
            let k = spec.freq_at_offset(off);
            let neg: Vec<i64> = k
                .iter()
                .enumerate()
                .map(|(axis, &kj)| {
                    let m = spec.sizes()[axis] as i64;
                    // reflect within the band: -(-M/2) folds back to -M/2
                    let nk = -kj;
                    if nk >= m / 2 {
                        nk - m
                    } else {
                        nk
                    }
                })
                .collect();
            let part = spec.offset_of_freq(&neg).expect("in band");
            sym[off] = 0.5 * (spectrum[off] + spectrum[part].conj());
        }
        spectrum = sym;
    }
    GridFunction::from_spectrum(spec.clone(), spectrum).expect("shape ok")
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Box–Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * u2;
    (r * t.cos(), r * t.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec1(m: usize) -> GridSpec {
        GridSpec::new(vec![m]).unwrap()
    }

    #[test]
    fn parseval_and_roundtrip() {
        let f = random_band_limited(&spec1(64), 7, 5.0, false);
        let time: f64 = f.samples().iter().map(|c| c.norm_sqr()).sum::<f64>() / 64.0;
        let freq: f64 = f.spectrum().iter().map(|c| c.norm_sqr()).sum();
        assert!((time - freq).abs() <= 1e-12 * freq);
        let g = GridFunction::from_samples(f.spec().clone(), f.samples().to_vec()).unwrap();
        for (a, b) in f.spectrum().iter().zip(g.spectrum()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_mode_derivative() {
        let f = GridFunction::single_mode(spec1(16), &[3], Complex::new(1.0, 0.0)).unwrap();
        let g = f
            .fractional_derivative(&[0.5], DerivKind::Homogeneous)
            .unwrap();
        let c = g.spectrum_at(&[3]);
        assert!((c.re - 3f64.sqrt()).abs() < 1e-13 && c.im.abs() < 1e-15);
        // J^β of the constant is the constant
        let one = GridFunction::single_mode(spec1(16), &[0], Complex::new(2.5, 0.0)).unwrap();
        let j = one
            .fractional_derivative(&[1.7], DerivKind::Inhomogeneous)
            .unwrap();
        assert!((j.spectrum_at(&[0]).re - 2.5).abs() < 1e-14);
        // β=0 is the identity
        let id = f.fractional_derivative(&[0.0], DerivKind::Homogeneous).unwrap();
        assert!(f.rel_l2_distance(&id) < 1e-14);
    }

    #[test]
    fn multiplier_composition() {
        let f = random_band_limited(&spec1(32), 3, 6.0, false).remove_global_mean();
        let a = f
            .fractional_derivative(&[0.7], DerivKind::Homogeneous)
            .unwrap()
            .fractional_derivative(&[0.6], DerivKind::Homogeneous)
            .unwrap();
        let b = f
            .fractional_derivative(&[1.3], DerivKind::Homogeneous)
            .unwrap();
        assert!(a.rel_l2_distance(&b) < 1e-13);
    }

    #[test]
    fn negative_order_guard() {
        let f = random_band_limited(&spec1(16), 1, 4.0, false);
        assert!(matches!(
            f.fractional_derivative(&[-0.5], DerivKind::Homogeneous),
            Err(Error::NegativeOrderOnNonzeroMeanMode { .. })
        ));
        let g = f.map_spectrum(|k, c| if k[0] == 0 { Complex::default() } else { c });
        assert!(g.fractional_derivative(&[-0.5], DerivKind::Homogeneous).is_ok());
    }

    #[test]
    fn lp_partitions_exact() {
        let m = 64;
        let (k_min, k_max) = spec1(m).scale_range(0);
        for xi in -(m as i64) / 2..(m as i64) / 2 {
            let total: f64 = (k_min..=k_max).map(|k| lp_window(LpMode::Delta, k, xi, m)).sum();
            let expect = if xi == 0 { 0.0 } else { 1.0 };
            assert!((total - expect).abs() < 1e-15, "xi={xi} total={total}");
            for k in -2..=(k_max + 4) {
                let s = lp_window(LpMode::Low, k, xi, m) + lp_window(LpMode::High, k, xi, m);
                assert!((s - 1.0).abs() < 1e-15, "k={k} xi={xi}");
                let d = lp_window(LpMode::DeltaPlus, k, xi, m)
                    + lp_window(LpMode::DeltaMinus, k, xi, m)
                    - lp_window(LpMode::Delta, k, xi, m);
                assert!(d.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn modulated_phase_and_norm() {
        let f = GridFunction::single_mode(spec1(32), &[5], Complex::new(1.0, 0.0)).unwrap();
        let k = 2;
        let a = 0.37;
        let g = f.modulated_project(0, k, a, LpMode::Delta);
        let plain = f.lp_project(0, k, LpMode::Delta);
        let expect = Complex::from_polar(
            plain.spectrum_at(&[5]).norm(),
            2.0 * std::f64::consts::PI * a * 5.0 / 4.0,
        );
        assert!((g.spectrum_at(&[5]) - expect).norm() < 1e-13);
        assert!((g.l2_norm() - plain.l2_norm()).abs() < 1e-13);
    }

    #[test]
    fn random_determinism_and_realness() {
        let spec = GridSpec::new(vec![16, 8]).unwrap();
        let f1 = random_band_limited(&spec, 42, 3.0, true);
        let f2 = random_band_limited(&spec, 42, 3.0, true);
        assert_eq!(f1.samples(), f2.samples());
        let max_im = f1.samples().iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        assert!(max_im <= 1e-12);
    }

    #[test]
    fn dump_roundtrip() {
        let spec = GridSpec::new(vec![8, 16]).unwrap();
        let f = random_band_limited(&spec, 5, 2.0, false);
        let mut buf = Vec::new();
        f.write_dump(&mut buf).unwrap();
        let g = GridFunction::read_dump(&mut buf.as_slice()).unwrap();
        assert_eq!(f.spec(), g.spec());
        assert_eq!(f.samples(), g.samples());
    }

    #[test]
    fn translate_is_exact_permutation() {
        let spec = GridSpec::new(vec![8, 8]).unwrap();
        let f = random_band_limited(&spec, 9, 2.0, false);
        let g = f.translate(&[3, 5]).unwrap().translate(&[-3, -5]).unwrap();
        assert_eq!(f.samples(), g.samples());
    }
}
