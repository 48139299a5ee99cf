//! Signal-processing baselines: Butterworth low-pass, Savitzky-Golay and a
//! penalized cubic B-spline.
//!
//! Each smoother filters the three position channels and the four quaternion
//! components independently, renormalizes the quaternion and recomputes
//! velocities by forward difference. Timestamps, masks, gripper aperture and
//! obstacle distance are copied unchanged, so smoothing never changes the
//! duration of a demonstration.

use nalgebra::{DMatrix, DVector, Quaternion, SymmetricEigen, UnitQuaternion, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{recompute_velocities, Demonstration};

/// Which baseline to run, with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Smoother {
    Butterworth(ButterworthParams),
    SavitzkyGolay(SavGolParams),
    BSpline(SplineParams),
}

impl Smoother {
    pub fn name(&self) -> &'static str {
        match self {
            Smoother::Butterworth(_) => "butterworth",
            Smoother::SavitzkyGolay(_) => "savgol",
            Smoother::BSpline(_) => "bspline",
        }
    }

    pub fn apply(&self, demo: &Demonstration) -> Result<Demonstration> {
        match self {
            Smoother::Butterworth(p) => butterworth_lowpass_with(demo, p),
            Smoother::SavitzkyGolay(p) => savitzky_golay(demo, p.window, p.polyorder),
            Smoother::BSpline(p) => bspline_smooth_with(demo, p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ButterworthParams {
    pub order: usize,
    pub cutoff_hz: f64,
    /// Forward-backward application. The effective response is the squared
    /// magnitude, i.e. -6 dB at the cutoff.
    pub zero_phase: bool,
}

impl Default for ButterworthParams {
    fn default() -> Self {
        Self {
            order: 4,
            cutoff_hz: 2.0,
            zero_phase: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SavGolParams {
    pub window: usize,
    pub polyorder: usize,
}

impl Default for SavGolParams {
    fn default() -> Self {
        Self {
            window: 11,
            polyorder: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplineParams {
    pub degree: usize,
    /// Samples between interior knots.
    pub knot_spacing: usize,
    /// Roughness weight in s^4. The fit minimizes
    /// `dt * sum (s(t_i) - x_i)^2 + lambda * integral (s'')^2`, whose
    /// half-power frequency is about `1 / (2 pi lambda^(1/4))` Hz.
    pub lambda: f64,
}

impl Default for SplineParams {
    fn default() -> Self {
        Self {
            degree: 3,
            knot_spacing: 4,
            lambda: 4e-5,
        }
    }
}

// ---------------------------------------------------------------------------
// Butterworth

/// One second-order section, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    /// Frequency response at `omega` radians per sample.
    pub fn response(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = z1 * z1;
        (self.b[0] + z1 * self.b[1] + z2 * self.b[2]) / (self.a[0] + z1 * self.a[1] + z2 * self.a[2])
    }

    /// Transposed direct form II state after a long run of unit input.
    fn steady_state(&self) -> [f64; 2] {
        let y = self.dc_gain();
        let z2 = self.b[2] - self.a[2] * y;
        let z1 = self.b[1] + self.b[2] - (self.a[1] + self.a[2]) * y;
        [z1, z2]
    }
}

/// Digital Butterworth low-pass as cascaded second-order sections.
///
/// Analog prototype poles are scaled to the prewarped cutoff and mapped with
/// the bilinear transform; every section has unit DC gain.
pub fn butterworth_sos(order: usize, cutoff_hz: f64, fs: f64) -> Result<Vec<Biquad>> {
    if order < 1 {
        return Err(Error::InvalidConfig("Butterworth order must be at least 1".into()));
    }
    let nyquist = fs / 2.0;
    if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(Error::InvalidCutoff {
            cutoff_hz,
            nyquist_hz: nyquist,
        });
    }
    let warped = 2.0 * fs * (std::f64::consts::PI * cutoff_hz / fs).tan();
    let bilinear = |s: Complex64| (2.0 * fs + s) / (2.0 * fs - s);
    let n = order as f64;
    let mut sos = Vec::with_capacity(order.div_ceil(2));
    for k in 0..order / 2 {
        let theta = std::f64::consts::PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n);
        let z = bilinear(Complex64::from_polar(warped, theta));
        let mut s = Biquad {
            b: [1.0, 2.0, 1.0],
            a: [1.0, -2.0 * z.re, z.norm_sqr()],
        };
        let g = 1.0 / s.dc_gain();
        s.b.iter_mut().for_each(|b| *b *= g);
        sos.push(s);
    }
    if order % 2 == 1 {
        let z = bilinear(Complex64::new(-warped, 0.0)).re;
        let mut s = Biquad {
            b: [1.0, 1.0, 0.0],
            a: [1.0, -z, 0.0],
        };
        let g = 1.0 / s.dc_gain();
        s.b.iter_mut().for_each(|b| *b *= g);
        sos.push(s);
    }
    Ok(sos)
}

fn run_sections(sos: &[Biquad], x: &[f64], init: Option<f64>) -> Vec<f64> {
    let mut y = x.to_vec();
    let mut level = init;
    for s in sos {
        let [mut z1, mut z2] = match level {
            Some(v) => s.steady_state().map(|z| z * v),
            None => [0.0, 0.0],
        };
        for v in y.iter_mut() {
            let input = *v;
            let out = s.b[0] * input + z1;
            z1 = s.b[1] * input - s.a[1] * out + z2;
            z2 = s.b[2] * input - s.a[2] * out;
            *v = out;
        }
        level = level.map(|v| v * s.dc_gain());
    }
    y
}

/// Causal filtering from rest.
pub fn sosfilt(sos: &[Biquad], x: &[f64]) -> Vec<f64> {
    run_sections(sos, x, None)
}

/// Zero-phase forward-backward filtering.
///
/// The signal is padded at both ends by odd reflection and each pass starts
/// from the steady state matching its first sample.
pub fn sosfiltfilt(sos: &[Biquad], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return x.to_vec();
    }
    let pad = (3 * (2 * sos.len() + 1)).min(n - 1);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|k| 2.0 * x[0] - x[k]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|k| 2.0 * x[n - 1] - x[n - 1 - k]));

    let first = ext[0];
    let mut y = run_sections(sos, &ext, Some(first));
    y.reverse();
    let first = y[0];
    let mut y = run_sections(sos, &y, Some(first));
    y.reverse();
    y[pad..pad + n].to_vec()
}

pub fn butterworth_lowpass(demo: &Demonstration, order: usize, cutoff_hz: f64) -> Result<Demonstration> {
    butterworth_lowpass_with(
        demo,
        &ButterworthParams {
            order,
            cutoff_hz,
            zero_phase: true,
        },
    )
}

pub fn butterworth_lowpass_with(demo: &Demonstration, params: &ButterworthParams) -> Result<Demonstration> {
    let sos = butterworth_sos(params.order, params.cutoff_hz, 1.0 / demo.dt)?;
    map_pose_channels(demo, |x| {
        Ok(if params.zero_phase {
            sosfiltfilt(&sos, x)
        } else {
            sosfilt(&sos, x)
        })
    })
}

// ---------------------------------------------------------------------------
// Savitzky-Golay

fn check_savgol(window: usize, polyorder: usize) -> Result<()> {
    if window % 2 == 0 || window <= polyorder {
        return Err(Error::InvalidWindow { window, polyorder });
    }
    Ok(())
}

/// Least-squares projection onto polynomials of degree `polyorder` over a
/// window of offsets `-half..=half`: row `j` maps window samples to the
/// coefficient of `offset^j`.
fn savgol_projection(window: usize, polyorder: usize) -> DMatrix<f64> {
    let half = (window / 2) as f64;
    let vander = DMatrix::from_fn(window, polyorder + 1, |i, j| (i as f64 - half).powi(j as i32));
    vander
        .svd(true, true)
        .pseudo_inverse(1e-12)
        .expect("SVD computed with both factors")
}

/// Weights producing the smoothed value at the window center.
pub fn savgol_coeffs(window: usize, polyorder: usize) -> Result<Vec<f64>> {
    check_savgol(window, polyorder)?;
    Ok(savgol_projection(window, polyorder).row(0).iter().copied().collect())
}

/// Savitzky-Golay smoothing of one channel. The first and last half-windows
/// are taken from the polynomial fitted to the first and last full window.
pub fn savgol_filter(x: &[f64], window: usize, polyorder: usize) -> Result<Vec<f64>> {
    check_savgol(window, polyorder)?;
    if x.len() < window {
        return Err(Error::TooShort {
            len: x.len(),
            required: window,
        });
    }
    let proj = savgol_projection(window, polyorder);
    let half = window / 2;
    let n = x.len();
    let center = proj.row(0);
    let mut y = vec![0.0; n];
    for i in half..n - half {
        y[i] = center.iter().zip(&x[i - half..=i + half]).map(|(c, v)| c * v).sum();
    }
    let eval = |coef: &DVector<f64>, offset: f64| {
        coef.iter().rev().fold(0.0, |acc, c| acc * offset + c)
    };
    let head = &proj * DVector::from_column_slice(&x[..window]);
    let tail = &proj * DVector::from_column_slice(&x[n - window..]);
    for i in 0..half {
        y[i] = eval(&head, i as f64 - half as f64);
        y[n - 1 - i] = eval(&tail, half as f64 - i as f64);
    }
    Ok(y)
}

pub fn savitzky_golay(demo: &Demonstration, window: usize, polyorder: usize) -> Result<Demonstration> {
    check_savgol(window, polyorder)?;
    map_pose_channels(demo, |x| savgol_filter(x, window, polyorder))
}

// ---------------------------------------------------------------------------
// Penalized B-spline

/// Clamped knot vector on the given breakpoints.
fn clamped_knots(breaks: &[f64], degree: usize) -> Vec<f64> {
    let mut knots = vec![breaks[0]; degree];
    knots.extend_from_slice(breaks);
    knots.extend(std::iter::repeat_n(*breaks.last().expect("non-empty"), degree));
    knots
}

fn find_span(knots: &[f64], degree: usize, n_basis: usize, u: f64) -> usize {
    if u >= knots[n_basis] {
        return n_basis - 1;
    }
    // last index in [degree, n_basis) with knots[span] <= u
    let upper = knots[degree + 1..=n_basis].partition_point(|&k| k <= u);
    degree + upper
}

/// Nonzero basis functions at `u` and their derivatives up to `n_deriv`:
/// `out[k][j]` is the k-th derivative of basis `span - degree + j`.
fn basis_derivatives(knots: &[f64], degree: usize, span: usize, u: f64, n_deriv: usize) -> Vec<Vec<f64>> {
    let p = degree;
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![vec![0.0; p + 1]; n_deriv + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0, 1);
        a[0][0] = 1.0;
        for k in 1..=n_deriv {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p as isize - k as isize;
            if rk >= 0 {
                a[s2][0] = a[s1][0] / ndu[(pk + 1) as usize][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk as usize];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[(pk + 1) as usize][idx];
                d += a[s2][j] * ndu[idx][pk as usize];
            }
            if r as isize <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[(pk + 1) as usize][r];
                d += a[s2][k] * ndu[r][pk as usize];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=n_deriv {
        for v in ders[k].iter_mut() {
            *v *= factor;
        }
        factor *= (p as f64) - k as f64;
    }
    ders
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect()
}

/// A penalized least-squares spline fit shared by all channels of a demo.
struct SplineFit {
    /// `(first basis index, values)` at each sample.
    rows: Vec<(usize, Vec<f64>)>,
    n_basis: usize,
    factor: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    /// Coupling of interior coefficients to the two clamped end coefficients.
    coupling: DMatrix<f64>,
    weight: f64,
}

impl SplineFit {
    fn new(u: &[f64], params: &SplineParams, dt: f64) -> Result<Self> {
        let p = params.degree;
        if p < 1 || params.knot_spacing < 1 || !(params.lambda >= 0.0) {
            return Err(Error::InvalidConfig(
                "spline needs degree >= 1, knot_spacing >= 1 and lambda >= 0".into(),
            ));
        }
        let n = u.len();
        if n < p + 1 {
            return Err(Error::TooShort {
                len: n,
                required: p + 1,
            });
        }
        let mut breaks: Vec<f64> = (0..n).step_by(params.knot_spacing).map(|i| u[i]).collect();
        if *breaks.last().expect("non-empty") < u[n - 1] {
            breaks.push(u[n - 1]);
        }
        let knots = clamped_knots(&breaks, p);
        let n_basis = knots.len() - p - 1;

        let mut normal = DMatrix::<f64>::zeros(n_basis, n_basis);
        let mut rows = Vec::with_capacity(n);
        for &ui in u {
            let span = find_span(&knots, p, n_basis, ui);
            let vals = basis_derivatives(&knots, p, span, ui, 0).swap_remove(0);
            let first = span - p;
            for a in 0..=p {
                for b in 0..=p {
                    normal[(first + a, first + b)] += dt * vals[a] * vals[b];
                }
            }
            rows.push((first, vals));
        }

        let m = p.min(2);
        let quad = gauss_legendre(p - m + 1);
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            for &(x, wt) in &quad {
                let uq = lo + half * (x + 1.0);
                let span = find_span(&knots, p, n_basis, uq);
                let d = &basis_derivatives(&knots, p, span, uq, m)[m];
                let first = span - p;
                for a in 0..=p {
                    for b in 0..=p {
                        normal[(first + a, first + b)] += params.lambda * wt * half * d[a] * d[b];
                    }
                }
            }
        }

        let inner = n_basis.saturating_sub(2);
        let (factor, coupling) = if inner > 0 {
            let m_ii = normal.view((1, 1), (inner, inner)).into_owned();
            let coupling = DMatrix::from_fn(inner, 2, |i, j| normal[(1 + i, if j == 0 { 0 } else { n_basis - 1 })]);
            let chol = m_ii
                .cholesky()
                .ok_or_else(|| Error::InvalidConfig("spline system is singular".into()))?;
            (Some(chol), coupling)
        } else {
            (None, DMatrix::zeros(0, 2))
        };
        Ok(Self {
            rows,
            n_basis,
            factor,
            coupling,
            weight: dt,
        })
    }

    fn smooth(&self, x: &[f64]) -> Vec<f64> {
        let nb = self.n_basis;
        let (x0, x1) = (x[0], x[x.len() - 1]);
        let mut coef = DVector::<f64>::zeros(nb);
        coef[0] = x0;
        coef[nb - 1] = x1;
        if let Some(chol) = &self.factor {
            let mut rhs = DVector::<f64>::zeros(nb);
            for ((first, vals), &xi) in self.rows.iter().zip(x) {
                for (a, v) in vals.iter().enumerate() {
                    rhs[first + a] += self.weight * v * xi;
                }
            }
            let inner = nb - 2;
            let b = rhs.rows(1, inner) - &self.coupling * nalgebra::Vector2::new(x0, x1);
            let c = chol.solve(&b);
            coef.rows_mut(1, inner).copy_from(&c);
        }
        self.rows
            .iter()
            .map(|(first, vals)| vals.iter().enumerate().map(|(a, v)| v * coef[first + a]).sum())
            .collect()
    }
}

/// Penalized spline fit of one channel sampled at times `t`, evaluated at
/// those times. The fitted curve passes through the first and last sample.
pub fn smoothing_spline(t: &[f64], x: &[f64], params: &SplineParams) -> Result<Vec<f64>> {
    assert_eq!(t.len(), x.len(), "time and value channels differ in length");
    let u: Vec<f64> = t.iter().map(|v| v - t[0]).collect();
    let dt = if t.len() > 1 {
        u[u.len() - 1] / (u.len() - 1) as f64
    } else {
        1.0
    };
    Ok(SplineFit::new(&u, params, dt)?.smooth(x))
}

pub fn bspline_smooth(demo: &Demonstration, degree: usize) -> Result<Demonstration> {
    bspline_smooth_with(
        demo,
        &SplineParams {
            degree,
            ..Default::default()
        },
    )
}

pub fn bspline_smooth_with(demo: &Demonstration, params: &SplineParams) -> Result<Demonstration> {
    let t0 = demo.points.first().map_or(0.0, |p| p.t);
    let u: Vec<f64> = demo.points.iter().map(|p| p.t - t0).collect();
    let fit = SplineFit::new(&u, params, demo.dt)?;
    map_pose_channels(demo, |x| Ok(fit.smooth(x)))
}

// ---------------------------------------------------------------------------

/// Applies `filter` to each pose channel. Constant channels are left as is.
fn map_pose_channels(
    demo: &Demonstration,
    filter: impl Fn(&[f64]) -> Result<Vec<f64>>,
) -> Result<Demonstration> {
    let n = demo.points.len();
    let mut channels: Vec<Vec<f64>> = (0..7).map(|_| Vec::with_capacity(n)).collect();
    let mut prev: Option<Quaternion<f64>> = None;
    for p in &demo.points {
        let mut q = *p.pose.orientation.quaternion();
        // keep consecutive quaternions in one hemisphere
        if prev.is_some_and(|r| r.dot(&q) < 0.0) {
            q = -q;
        }
        prev = Some(q);
        let v = [
            p.pose.position.x,
            p.pose.position.y,
            p.pose.position.z,
            q.w,
            q.i,
            q.j,
            q.k,
        ];
        for (c, x) in channels.iter_mut().zip(v) {
            c.push(x);
        }
    }
    let mut filtered = Vec::with_capacity(7);
    for c in &channels {
        if c.iter().all(|&v| v == c[0]) {
            filtered.push(c.clone());
        } else {
            filtered.push(filter(c)?);
        }
    }
    let mut points = demo.points.clone();
    for (i, p) in points.iter_mut().enumerate() {
        p.pose.position = Vector3::new(filtered[0][i], filtered[1][i], filtered[2][i]);
        let q = Quaternion::new(filtered[3][i], filtered[4][i], filtered[5][i], filtered[6][i]);
        if (3..7).any(|c| filtered[c] != channels[c]) {
            p.pose.orientation = UnitQuaternion::from_quaternion(q);
        }
    }
    recompute_velocities(&mut points);
    Ok(Demonstration::new(points, demo.dt, demo.interface.clone(), demo.task_label.clone()))
}
