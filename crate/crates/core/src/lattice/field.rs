use alloc::vec;
use alloc::vec::Vec;


use super::Site;
use crate::{Complex, Error, Result};
// float math for no_std builds
#[allow(unused_imports)]
use num_traits::Float;

/// Finite index window of Z² carrying a field.
///
/// Periodic and half-strip windows store one primitive cell starting at
/// `origin`; sites outside it are reached by wrapping the periodic
/// directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    /// ℓ²_k with the cell `origin + [0,k)²`.
    Periodic { period: usize, origin: Site },
    /// Zero-extended field supported in `[-L, L]²`.
    Box { half_width: usize },
    /// `n₁ ∈ 1..=width`, `n₂` periodic with cell `origin + [0,k)`.
    HalfStrip { width: usize, period: usize, origin: i64 },
}

fn centered_origin(k: usize) -> i64 {
    -((k / 2) as i64)
}

impl Window {
    /// `Y_k = [0,k)²`.
    pub fn periodic(k: usize) -> Self {
        Window::Periodic { period: k, origin: [0, 0] }
    }

    /// Periodic cell `[-⌊k/2⌋, k-1-⌊k/2⌋]²`, centered on the origin.
    pub fn centered(k: usize) -> Self {
        let o = centered_origin(k);
        Window::Periodic { period: k, origin: [o, o] }
    }

    pub fn boxed(half_width: usize) -> Self {
        Window::Box { half_width }
    }

    pub fn half_strip(width: usize, k: usize) -> Self {
        Window::HalfStrip { width, period: k, origin: centered_origin(k) }
    }

    pub fn num_sites(&self) -> usize {
        match *self {
            Window::Periodic { period, .. } => period * period,
            Window::Box { half_width } => (2 * half_width + 1).pow(2),
            Window::HalfStrip { width, period, .. } => width * period,
        }
    }

    pub fn period(&self) -> Option<usize> {
        match *self {
            Window::Periodic { period, .. } | Window::HalfStrip { period, .. } => Some(period),
            Window::Box { .. } => None,
        }
    }

    /// Site stored at `idx`.
    pub fn site(&self, idx: usize) -> Site {
        match *self {
            Window::Periodic { period, origin } => {
                [origin[0] + (idx / period) as i64, origin[1] + (idx % period) as i64]
            }
            Window::Box { half_width } => {
                let s = 2 * half_width + 1;
                let l = half_width as i64;
                [(idx / s) as i64 - l, (idx % s) as i64 - l]
            }
            Window::HalfStrip { width, origin, .. } => [(idx % width) as i64 + 1, origin + (idx / width) as i64],
        }
    }

    /// Storage index of `site` if it lies in the stored cell itself.
    pub fn cell_index(&self, site: Site) -> Option<usize> {
        match *self {
            Window::Periodic { period, origin } => {
                let k = period as i64;
                let (a, b) = (site[0] - origin[0], site[1] - origin[1]);
                ((0..k).contains(&a) && (0..k).contains(&b)).then(|| (a * k + b) as usize)
            }
            Window::Box { half_width } => {
                let l = half_width as i64;
                let s = 2 * l + 1;
                (site[0].abs() <= l && site[1].abs() <= l).then(|| ((site[0] + l) * s + site[1] + l) as usize)
            }
            Window::HalfStrip { width, period, origin } => {
                let b = site[1] - origin;
                ((1..=width as i64).contains(&site[0]) && (0..period as i64).contains(&b))
                    .then(|| (b as usize) * width + (site[0] - 1) as usize)
            }
        }
    }

    /// Storage index of `site`, wrapping periodic directions.
    pub fn index(&self, site: Site) -> Option<usize> {
        match *self {
            Window::Periodic { period, origin } => {
                let k = period as i64;
                let a = (site[0] - origin[0]).rem_euclid(k);
                let b = (site[1] - origin[1]).rem_euclid(k);
                Some((a * k + b) as usize)
            }
            Window::Box { .. } => self.cell_index(site),
            Window::HalfStrip { width, period, origin } => {
                if !(1..=width as i64).contains(&site[0]) {
                    return None;
                }
                let b = (site[1] - origin).rem_euclid(period as i64);
                Some((b as usize) * width + (site[0] - 1) as usize)
            }
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.num_sites()).map(move |i| self.site(i))
    }

    /// Smallest box containing every stored site.
    pub fn bounding_box(&self) -> Window {
        let l = self.sites().map(|s| s[0].abs().max(s[1].abs())).max().unwrap_or(0);
        Window::Box { half_width: l as usize }
    }
}

/// Complex `d`-vector field on a window. Layout: `values[site_idx * d + i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField {
    window: Window,
    d: usize,
    values: Vec<Complex>,
}

impl LatticeField {
    pub fn zeros(window: Window, d: usize) -> Self {
        Self { window, d, values: vec![Complex::new(0.0, 0.0); window.num_sites() * d] }
    }

    pub fn from_values(window: Window, d: usize, values: Vec<Complex>) -> Result<Self> {
        if values.len() != window.num_sites() * d {
            return Err(Error::WindowMismatch);
        }
        Ok(Self { window, d, values })
    }

    pub fn from_real(window: Window, d: usize, values: &[f64]) -> Result<Self> {
        Self::from_values(window, d, values.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    /// `amplitude` at one (site, component); the site must be stored in the window.
    pub fn delta(window: Window, d: usize, site: Site, component: usize, amplitude: f64) -> Result<Self> {
        let mut f = Self::zeros(window, d);
        let idx = window
            .cell_index(site)
            .filter(|_| component < d)
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("site {site:?}/{component} outside window")))?;
        f.values[idx * d + component] = Complex::new(amplitude, 0.0);
        Ok(f)
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[Complex] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex> {
        self.values
    }

    /// Value at any site of Z², zero where the window has no support.
    pub fn get(&self, site: Site, component: usize) -> Complex {
        match self.window.index(site) {
            Some(i) if component < self.d => self.values[i * self.d + component],
            _ => Complex::new(0.0, 0.0),
        }
    }

    pub fn set(&mut self, site: Site, component: usize, value: Complex) -> Result<()> {
        let i = self.window.index(site).filter(|_| component < self.d).ok_or(Error::WindowMismatch)?;
        self.values[i * self.d + component] = value;
        Ok(())
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `(Σ_n Σ_i |a_n^i|^p)^{1/p}` over the stored cell.
    pub fn norm_lp(&self, p: f64) -> f64 {
        self.values.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im == 0.0)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    /// `Σ conj(self) · other` over the stored cell.
    pub fn inner(&self, other: &Self) -> Result<Complex> {
        self.check_compatible(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.window != other.window || self.d != other.d {
            return Err(Error::WindowMismatch);
        }
        Ok(())
    }

    /// R: the stored cell, zero-extended into the smallest enclosing box.
    pub fn truncate(&self) -> Self {
        self.truncate_into(self.window.bounding_box())
    }

    /// R into a caller-chosen box; cell sites outside the box are lost.
    pub fn truncate_into(&self, target: Window) -> Self {
        let mut out = Self::zeros(target, self.d);
        for (i, site) in self.window.sites().enumerate() {
            if let Some(j) = target.cell_index(site) {
                out.values[j * self.d..(j + 1) * self.d].copy_from_slice(&self.values[i * self.d..(i + 1) * self.d]);
            }
        }
        out
    }

    /// S: keep only this field's stored cell, then wrap it onto `target`.
    ///
    /// Sites outside the stored cell are cut before wrapping, so periodizing
    /// a periodic field onto a different period does not fold its images.
    pub fn periodize(&self, target: Window) -> Self {
        let mut out = Self::zeros(target, self.d);
        for (j, site) in target.sites().enumerate() {
            if let Some(i) = self.window.cell_index(site) {
                out.values[j * self.d..(j + 1) * self.d].copy_from_slice(&self.values[i * self.d..(i + 1) * self.d]);
            }
        }
        out
    }

    /// `max |self − other|` over the stored cell of `self`, reading `other` by site.
    pub fn max_diff_on_cell(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for (i, site) in self.window.sites().enumerate() {
            for c in 0..self.d {
                m = m.max((self.values[i * self.d + c] - other.get(site, c)).norm());
            }
        }
        m
    }
}
