//! Spectral velocity recovery on the periodic torus.
//!
//! Incompressibility plus the curl-free constraint determine the velocity
//! from phase and flux mode by mode:
//! `û(k) = -(k⊥/|k|²) (A m̂ + θ̂ i)(k) · k⊥`, with the zero mode pinned to
//! zero. The multiplier is real and even, so real fields map to real
//! fields.

use crate::atwood::AtwoodParams;
use crate::error::{Error, Result};
use crate::field::{Field2, Geometry};
use crate::plane::PlaneVec;
use crate::state_geometry::State;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Complex 2-D FFT, rows then columns. `inverse` applies the conjugate
/// transform and divides by the sample count.
fn fft2(data: &mut [Complex<f64>], nx: usize, ny: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let dir = if inverse {
        rustfft::FftDirection::Inverse
    } else {
        rustfft::FftDirection::Forward
    };
    let fft_x = planner.plan_fft(nx, dir);
    let fft_y = planner.plan_fft(ny, dir);
    for row in data.chunks_exact_mut(nx) {
        fft_x.process(row);
    }
    let mut col = vec![Complex::default(); ny];
    for i in 0..nx {
        for j in 0..ny {
            col[j] = data[j * nx + i];
        }
        fft_y.process(&mut col);
        for j in 0..ny {
            data[j * nx + i] = col[j];
        }
    }
    if inverse {
        let scale = 1.0 / (nx * ny) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

fn to_complex(f: &[f64]) -> Vec<Complex<f64>> {
    f.iter().map(|&v| Complex::new(v, 0.0)).collect()
}

/// Signed integer frequency of index `i` on an `n`-point torus.
fn freq(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Velocity field determined by phase and flux on the torus, with zero
/// mean. Grids must agree and be periodic.
pub fn biot_savart(
    theta: &Field2<f64>,
    m: &Field2<PlaneVec>,
    p: &AtwoodParams,
) -> Result<Field2<PlaneVec>> {
    theta.same_grid(m)?;
    let g = theta.grid;
    if g.geometry != Geometry::Torus {
        return Err(Error::Config("spectral solve requires a torus grid".into()));
    }
    let (nx, ny) = (g.nx, g.ny);
    // w = A m + θ i, componentwise.
    let w1: Vec<f64> = m.data.iter().map(|mv| p.atwood * mv.x).collect();
    let w2: Vec<f64> = m
        .data
        .iter()
        .zip(theta.data.iter())
        .map(|(mv, &t)| p.atwood * mv.y + t)
        .collect();
    let mut w1h = to_complex(&w1);
    let mut w2h = to_complex(&w2);
    fft2(&mut w1h, nx, ny, false);
    fft2(&mut w2h, nx, ny, false);
    let mut u1h = vec![Complex::default(); nx * ny];
    let mut u2h = vec![Complex::default(); nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let k1 = freq(i, nx) as f64;
            let k2 = freq(j, ny) as f64;
            let k2n = k1 * k1 + k2 * k2;
            if k2n == 0.0 {
                continue;
            }
            let idx = j * nx + i;
            // s = ŵ · k⊥ with k⊥ = (-k2, k1).
            let s = w1h[idx] * (-k2) + w2h[idx] * k1;
            u1h[idx] = s * (k2 / k2n);
            u2h[idx] = s * (-k1 / k2n);
        }
    }
    fft2(&mut u1h, nx, ny, true);
    fft2(&mut u2h, nx, ny, true);
    let data = u1h
        .iter()
        .zip(u2h.iter())
        .map(|(a, b)| PlaneVec::new(a.re, b.re))
        .collect();
    Ok(Field2 { grid: g, data })
}

/// Fourier-side residuals of the two stationary constraints:
/// `max_k |û(k)·k|` and `max_k |(û + A m̂ + θ̂ i)(k)·k⊥|`, both scaled by
/// the grid norm of `u`.
pub fn constraint_residuals(
    theta: &Field2<f64>,
    m: &Field2<PlaneVec>,
    u: &Field2<PlaneVec>,
    p: &AtwoodParams,
) -> Result<(f64, f64)> {
    theta.same_grid(m)?;
    theta.same_grid(u)?;
    let g = theta.grid;
    let (nx, ny) = (g.nx, g.ny);
    let mut u1h = to_complex(&u.data.iter().map(|v| v.x).collect::<Vec<_>>());
    let mut u2h = to_complex(&u.data.iter().map(|v| v.y).collect::<Vec<_>>());
    let mut w1h = to_complex(&m.data.iter().map(|v| p.atwood * v.x).collect::<Vec<_>>());
    let mut w2h = to_complex(
        &m.data
            .iter()
            .zip(theta.data.iter())
            .map(|(mv, &t)| p.atwood * mv.y + t)
            .collect::<Vec<_>>(),
    );
    for h in [&mut u1h, &mut u2h, &mut w1h, &mut w2h] {
        fft2(h, nx, ny, false);
    }
    let norm: f64 = u
        .data
        .iter()
        .map(|v| v.norm_sq())
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let mut div = 0.0f64;
    let mut curl = 0.0f64;
    for j in 0..ny {
        for i in 0..nx {
            let k1 = freq(i, nx) as f64;
            let k2 = freq(j, ny) as f64;
            let idx = j * nx + i;
            let d = u1h[idx] * k1 + u2h[idx] * k2;
            let c = (u1h[idx] + w1h[idx]) * (-k2) + (u2h[idx] + w2h[idx]) * k1;
            div = div.max(d.norm());
            curl = curl.max(c.norm());
        }
    }
    Ok((div / norm, curl / norm))
}

/// Bounds report for a relaxed-set-valued field: the pointwise flux bound
/// `|m| <= |u| + 1 + |θ|` and the closed-form L² bounds on `u` and `m`.
#[derive(Debug, Clone)]
pub struct L2Report {
    /// Minimum over cells of `|u| + 1 + |θ| - |m|` (negative = violated).
    pub pointwise_margin: f64,
    pub u_l2: f64,
    pub m_l2: f64,
    pub u_l2_bound: f64,
    pub m_l2_bound: f64,
}

impl L2Report {
    pub fn ok(&self) -> bool {
        self.pointwise_margin >= -1e-12
            && self.u_l2 <= self.u_l2_bound + 1e-12
            && self.m_l2 <= self.m_l2_bound + 1e-12
    }
}

/// Verifies the L² boundedness estimates on a state field.
pub fn l2_check(z: &Field2<State>, p: &AtwoodParams) -> L2Report {
    let g = z.grid;
    let cell = g.dx * g.dy;
    let mut margin = f64::INFINITY;
    let mut u2 = 0.0;
    let mut m2 = 0.0;
    let mut th2 = 0.0;
    let mut one_th2 = 0.0;
    for s in &z.data {
        margin = margin.min(s.u.norm() + 1.0 + s.theta.abs() - s.m.norm());
        u2 += s.u.norm_sq() * cell;
        m2 += s.m.norm_sq() * cell;
        th2 += s.theta * s.theta * cell;
        let w = 1.0 + s.theta.abs();
        one_th2 += w * w * cell;
    }
    let a = p.atwood.abs();
    let th = th2.sqrt();
    let oth = one_th2.sqrt();
    L2Report {
        pointwise_margin: margin,
        u_l2: u2.sqrt(),
        m_l2: m2.sqrt(),
        u_l2_bound: (th + a * oth) / (1.0 - a),
        m_l2_bound: (th + oth) / (1.0 - a),
    }
}
