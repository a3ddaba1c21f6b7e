//! Field diffracted through an aperture in an infinite screen.
//!
//! The angular-spectrum field restricted to the propagating square
//! `|kx|, |ky| <= k` is
//!
//! ```text
//! phi(x, y, z, t) = e^(-i w0 t) / (2 pi) * int int F(kx, ky) e^(-i kx x) e^(-i ky y) e^(i z kz) dkx dky
//! kz = sqrt(k^2 - kx^2 - ky^2)
//! ```
//!
//! For even `F`, expanding both transverse integrals with the alternating
//! dyadic sum gives a superposition of plane waves at `kx = m k / 2^n`,
//! `ky = q k / 2^p` with weights `(-1)^(m+q) 2^(-n-p) F(kx, ky)`:
//!
//! ```text
//! phi ~ (2 k^2 / pi) e^(-i w0 t) sum_{n,m,p,q} (-1)^(m+q) 2^(-n-p) F(kx, ky) cos(kx x) cos(ky y) e^(i z kz)
//! ```
//!
//! Where `kx^2 + ky^2 > k^2` the exponential is taken on the decaying branch
//! `e^(-z sqrt(kx^2 + ky^2 - k^2))` unless [`Evanescent::Zero`] is selected.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::quadrature::pow2;
use crate::summation::Neumaier;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffractionError {
    #[error("invalid wave parameters: {0}")]
    Wave(String),
    #[error("aperture '{0}' is not flagged even-symmetric")]
    NotEven(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite aperture transform F({kx}, {ky}) = {value}")]
    NonFiniteTransform { kx: f64, ky: f64, value: f64 },
}

/// Wavenumber, angular frequency and phase speed with `k = omega0 / c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    k: f64,
    omega0: f64,
    c: f64,
}

impl WaveParams {
    pub fn new(k: f64, omega0: f64, c: f64) -> Result<Self, DiffractionError> {
        for (name, v) in [("k", k), ("omega0", omega0), ("c", c)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(DiffractionError::Wave(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if ((omega0 / c) - k).abs() > 1e-12 * k {
            return Err(DiffractionError::Wave(format!(
                "k = {k} is inconsistent with omega0 / c = {}",
                omega0 / c
            )));
        }
        Ok(Self { k, omega0, c })
    }

    /// Parameters for wavenumber `k` and phase speed `c`.
    pub fn from_wavenumber(k: f64, c: f64) -> Result<Self, DiffractionError> {
        Self::new(k, k * c, c)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Spatial-frequency transform `F(kx, ky)` of an aperture.
pub struct Aperture {
    transform: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    even_symmetric: bool,
    label: String,
}

impl std::fmt::Debug for Aperture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Aperture")
            .field("label", &self.label)
            .field("even_symmetric", &self.even_symmetric)
            .finish()
    }
}

fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        u.sin() / u
    }
}

impl Aperture {
    pub fn custom(
        label: impl Into<String>,
        even_symmetric: bool,
        transform: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            transform: Box::new(transform),
            even_symmetric,
            label: label.into(),
        }
    }

    /// `F = 1`.
    pub fn unit() -> Self {
        Self::custom("unit", true, |_, _| 1.0)
    }

    /// `F = 0`.
    pub fn zero() -> Self {
        Self::custom("zero", true, |_, _| 0.0)
    }

    /// Rectangular opening of widths `wx` by `wy`:
    /// `F = sinc(kx wx / 2) sinc(ky wy / 2)`.
    pub fn rectangular(wx: f64, wy: f64) -> Result<Self, DiffractionError> {
        if !(wx > 0.0 && wy > 0.0) || !wx.is_finite() || !wy.is_finite() {
            return Err(DiffractionError::InvalidArgument(format!(
                "rectangle widths must be finite and > 0, got {wx} x {wy}"
            )));
        }
        Ok(Self::custom(format!("rect {wx}x{wy}"), true, move |kx, ky| {
            sinc(0.5 * kx * wx) * sinc(0.5 * ky * wy)
        }))
    }

    #[inline]
    pub fn transform(&self, kx: f64, ky: f64) -> f64 {
        (self.transform)(kx, ky)
    }

    pub fn is_even_symmetric(&self) -> bool {
        self.even_symmetric
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Spot-checks `F(kx, ky) = F(-kx, ky) = F(kx, -ky)` on the given points.
    pub fn check_even_symmetry(&self, points: &[(f64, f64)], rel_tol: f64) -> bool {
        points.iter().all(|&(kx, ky)| {
            let f = self.transform(kx, ky);
            let scale = f.abs().max(f64::MIN_POSITIVE);
            (self.transform(-kx, ky) - f).abs() <= rel_tol * scale
                && (self.transform(kx, -ky) - f).abs() <= rel_tol * scale
        })
    }

    fn sample(&self, kx: f64, ky: f64) -> Result<f64, DiffractionError> {
        let value = self.transform(kx, ky);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(DiffractionError::NonFiniteTransform { kx, ky, value })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: f64,
}

impl FieldPoint {
    pub fn new(x: f64, y: f64, z: f64, t: f64) -> Self {
        Self { x, y, z, t }
    }

    fn validate(&self) -> Result<(), DiffractionError> {
        if ![self.x, self.y, self.z, self.t].iter().all(|v| v.is_finite()) || self.z < 0.0 {
            return Err(DiffractionError::InvalidArgument(format!(
                "field point must be finite with z >= 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Treatment of components with `kx^2 + ky^2 > k^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evanescent {
    /// `e^(-z sqrt(kx^2 + ky^2 - k^2))`.
    #[default]
    Decay,
    Zero,
}

/// Truncation levels of the two transverse expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Levels2 {
    pub n: u32,
    pub p: u32,
}

impl Levels2 {
    pub fn new(n: u32, p: u32) -> Self {
        Self { n, p }
    }

    pub fn square(n: u32) -> Self {
        Self { n, p: n }
    }

    fn validate(&self) -> Result<(), DiffractionError> {
        if !(1..=20).contains(&self.n) || !(1..=20).contains(&self.p) {
            return Err(DiffractionError::InvalidArgument(format!(
                "levels must be in [1, 20], got N = {}, P = {}",
                self.n, self.p
            )));
        }
        Ok(())
    }
}

/// `e^(i z kz)` for normalized transverse wavenumbers `u = kx/k`, `v = ky/k`.
#[inline]
fn propagator(u: f64, v: f64, zk: f64, mode: Evanescent) -> Complex64 {
    let radicand = 1.0 - u * u - v * v;
    if radicand >= 0.0 {
        Complex64::from_polar(1.0, zk * radicand.sqrt())
    } else {
        match mode {
            Evanescent::Decay => Complex64::new((-zk * (-radicand).sqrt()).exp(), 0.0),
            Evanescent::Zero => Complex64::new(0.0, 0.0),
        }
    }
}

#[derive(Default)]
struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    #[inline]
    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

fn check_even(ap: &Aperture) -> Result<(), DiffractionError> {
    if ap.is_even_symmetric() {
        Ok(())
    } else {
        Err(DiffractionError::NotEven(ap.label().to_string()))
    }
}

/// Exhaustion expansion of the field, truncated at `levels`.
///
/// Evaluated through the telescoped tensor-product form
/// `2^(-N-P) sum_{m < 2^N} sum_{q < 2^P} G(m / 2^N, q / 2^P)`.
pub fn field_exhaustion(
    ap: &Aperture,
    pt: FieldPoint,
    wave: WaveParams,
    levels: Levels2,
    mode: Evanescent,
) -> Result<Complex64, DiffractionError> {
    check_even(ap)?;
    pt.validate()?;
    levels.validate()?;
    let k = wave.k();
    let zk = pt.z * k;
    let hu = pow2(-(levels.n as i32));
    let hv = pow2(-(levels.p as i32));

    let v_nodes: Vec<f64> = (1..(1u64 << levels.p)).map(|q| q as f64 * hv).collect();
    let cos_y: Vec<f64> = v_nodes.iter().map(|v| (v * k * pt.y).cos()).collect();

    let mut acc = ComplexSum::default();
    for m in 1..(1u64 << levels.n) {
        let u = m as f64 * hu;
        let cos_x = (u * k * pt.x).cos();
        for (&v, &cy) in v_nodes.iter().zip(&cos_y) {
            let f = ap.sample(u * k, v * k)?;
            acc.add(propagator(u, v, zk, mode) * (f * cos_x * cy));
        }
    }
    Ok(prefactor(wave, pt) * acc.value() * (hu * hv))
}

fn prefactor(wave: WaveParams, pt: FieldPoint) -> Complex64 {
    let k = wave.k();
    Complex64::from_polar(2.0 * k * k / PI, -wave.omega0() * pt.t)
}

/// The quadruple sum evaluated term by term. Cost grows like `4^(N+P)`.
pub fn field_exhaustion_literal(
    ap: &Aperture,
    pt: FieldPoint,
    wave: WaveParams,
    levels: Levels2,
    mode: Evanescent,
) -> Result<Complex64, DiffractionError> {
    check_even(ap)?;
    pt.validate()?;
    levels.validate()?;
    let k = wave.k();
    let zk = pt.z * k;
    let mut acc = ComplexSum::default();
    for n in 1..=levels.n {
        let two_n = pow2(n as i32);
        for m in 1..(1u64 << n) {
            let u = m as f64 / two_n;
            for p in 1..=levels.p {
                let two_p = pow2(p as i32);
                for q in 1..(1u64 << p) {
                    let v = q as f64 / two_p;
                    let sign = if (m + q) % 2 == 0 { 1.0 } else { -1.0 };
                    let w = sign / (two_n * two_p) * ap.sample(u * k, v * k)?;
                    let c = (u * k * pt.x).cos() * (v * k * pt.y).cos();
                    acc.add(propagator(u, v, zk, mode) * (w * c));
                }
            }
        }
    }
    Ok(prefactor(wave, pt) * acc.value())
}

/// Midpoint-rule quadrature of the angular-spectrum integral over
/// `[-k, k]^2` with `grid x grid` cells. Independent of the exhaustion path.
pub fn field_reference(
    ap: &Aperture,
    pt: FieldPoint,
    wave: WaveParams,
    grid: usize,
    mode: Evanescent,
) -> Result<Complex64, DiffractionError> {
    pt.validate()?;
    if grid < 64 {
        return Err(DiffractionError::InvalidArgument(format!("grid must be >= 64, got {grid}")));
    }
    let k = wave.k();
    let h = 2.0 * k / grid as f64;
    let nodes: Vec<f64> = (0..grid).map(|i| -k + h * (i as f64 + 0.5)).collect();
    let phase_y: Vec<Complex64> = nodes.iter().map(|&ky| Complex64::from_polar(1.0, -ky * pt.y)).collect();

    let mut acc = ComplexSum::default();
    for &kx in &nodes {
        let phase_x = Complex64::from_polar(1.0, -kx * pt.x);
        for (&ky, &py) in nodes.iter().zip(&phase_y) {
            let f = ap.sample(kx, ky)?;
            acc.add(propagator(kx / k, ky / k, pt.z * k, mode) * phase_x * py * f);
        }
    }
    let time = Complex64::from_polar(1.0, -wave.omega0() * pt.t);
    Ok(time * acc.value() * (h * h / (2.0 * PI)))
}

/// Normalized Helmholtz residual `|lap(phi) + k^2 phi| / (k^2 max(|phi|, eps))`
/// from 7-point central differences with step `h`.
pub fn helmholtz_residual<F>(field: F, pt: FieldPoint, k: f64, h: f64) -> f64
where
    F: Fn(FieldPoint) -> Complex64,
{
    let at = |dx: f64, dy: f64, dz: f64| field(FieldPoint::new(pt.x + dx, pt.y + dy, pt.z + dz, pt.t));
    let center = at(0.0, 0.0, 0.0);
    let laplacian = (at(h, 0.0, 0.0)
        + at(-h, 0.0, 0.0)
        + at(0.0, h, 0.0)
        + at(0.0, -h, 0.0)
        + at(0.0, 0.0, h)
        + at(0.0, 0.0, -h)
        - center * 6.0)
        / (h * h);
    let residual = (laplacian + center * (k * k)).norm();
    residual / (k * k * center.norm().max(1e-300))
}

/// Default finite-difference step for [`helmholtz_residual`].
pub fn default_step(k: f64) -> f64 {
    0.01 / k
}

/// One plane wave of the expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveComponent {
    pub n: u32,
    pub m: u64,
    pub p: u32,
    pub q: u64,
    pub kx: f64,
    pub ky: f64,
    /// `(-1)^(m+q) 2^(-n-p) F(kx, ky)`.
    pub weight: f64,
    /// Axial wavenumber; `None` for evanescent components.
    pub kz: Option<f64>,
    /// `c kz / k`; `None` for evanescent components.
    pub group_speed_z: Option<f64>,
    pub evanescent: bool,
}

/// Enumerates every component through `levels`, in `(n, m, p, q)` order.
///
/// The axial group speed `c kz / k` follows from the free-space dispersion
/// relation of each plane wave.
pub fn group_velocity_spectrum(
    ap: &Aperture,
    wave: WaveParams,
    levels: Levels2,
) -> Result<Vec<PlaneWaveComponent>, DiffractionError> {
    levels.validate()?;
    let k = wave.k();
    let count = component_count(levels);
    let mut out = Vec::with_capacity(count as usize);
    for n in 1..=levels.n {
        for m in 1..(1u64 << n) {
            let u = m as f64 * pow2(-(n as i32));
            for p in 1..=levels.p {
                for q in 1..(1u64 << p) {
                    let v = q as f64 * pow2(-(p as i32));
                    let (kx, ky) = (u * k, v * k);
                    let sign = if (m + q) % 2 == 0 { 1.0 } else { -1.0 };
                    let weight = sign * pow2(-((n + p) as i32)) * ap.sample(kx, ky)?;
                    let radicand = 1.0 - u * u - v * v;
                    let kz = (radicand >= 0.0).then(|| k * radicand.sqrt());
                    out.push(PlaneWaveComponent {
                        n,
                        m,
                        p,
                        q,
                        kx,
                        ky,
                        weight,
                        kz,
                        group_speed_z: kz.map(|kz| wave.c() * kz / k),
                        evanescent: kz.is_none(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// `sum_{n<=N} (2^n - 1) * sum_{p<=P} (2^p - 1)`.
pub fn component_count(levels: Levels2) -> u64 {
    let per_axis = |l: u32| (1..=l).map(|n| (1u64 << n) - 1).sum::<u64>();
    per_axis(levels.n) * per_axis(levels.p)
}
