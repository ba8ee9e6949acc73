//! Wave-cone classification and localized plane waves.
//!
//! The linear system couples a state `z = (θ, u, m)` through the matrix
//!
//! ```text
//!           | θ    m1           m2        |
//! T_A(z) =  | 0    u1           u2        |
//!           | 0    u2+A m2+θ   -u1-A m1   |
//! ```
//!
//! whose rows are the divergence forms of the transport, incompressibility
//! and curl-free constraints. The wave cone splits as Λ0 (θ̄ = 0,
//! ū = -A m̄) and Λ1 (θ̄ ≠ 0, ū = ω̄ (A m̄ + θ̄ i) with ω̄ on the shifted
//! circle `|2ω̄ + 1| = 1`). Plane waves `z̄ h(k ξ·(t,x))` along cone
//! directions are produced by a second-order potential; localized versions
//! multiply the potential by a cutoff and pick up an `O(1/k)` error.

use crate::atwood::AtwoodParams;
use crate::error::{Error, Result};
use crate::field::{Field3, Grid3};
use crate::plane::{self, PlaneVec};
use crate::state_geometry::{shift_t, State};

/// Classification tolerance on the cone conditions.
pub const LAMBDA_TOL: f64 = 1e-12;

/// A wave-cone element together with its circle parameter when it has one.
#[derive(Debug, Clone, Copy)]
pub struct LambdaDirection {
    pub state: State,
    /// `Some(ω̄)` for Λ1 directions; `None` on Λ0.
    pub omega_bar: Option<PlaneVec>,
}

/// Outcome of the cone membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaClass {
    Lambda0,
    Lambda1 { omega_bar: PlaneVec },
    None,
}

/// Classifies a raw state as a wave-cone direction.
pub fn in_lambda(zbar: &State, p: &AtwoodParams) -> LambdaClass {
    let scale = 1.0 + zbar.u.norm() + zbar.m.norm();
    if zbar.theta == 0.0 {
        let resid = (zbar.u + zbar.m * p.atwood).norm();
        if resid <= LAMBDA_TOL * scale {
            return LambdaClass::Lambda0;
        }
        return LambdaClass::None;
    }
    let w = zbar.m * p.atwood + plane::I * zbar.theta;
    if w.norm() <= LAMBDA_TOL * scale {
        // Degenerate pencil: any circle point works when ū vanishes.
        if zbar.u.norm() <= LAMBDA_TOL * scale {
            return LambdaClass::Lambda1 {
                omega_bar: plane::ZERO,
            };
        }
        return LambdaClass::None;
    }
    let omega_bar = match zbar.u.cdiv(w) {
        Some(o) => o,
        None => return LambdaClass::None,
    };
    if (shift_t(omega_bar).norm() - 1.0).abs() <= LAMBDA_TOL * (1.0 + omega_bar.norm()) {
        LambdaClass::Lambda1 { omega_bar }
    } else {
        LambdaClass::None
    }
}

/// The 3×3 system matrix evaluated on a state.
pub fn t_matrix(z: &State, p: &AtwoodParams) -> [[f64; 3]; 3] {
    let a = p.atwood;
    [
        [z.theta, z.m.x, z.m.y],
        [0.0, z.u.x, z.u.y],
        [0.0, z.u.y + a * z.m.y + z.theta, -z.u.x - a * z.m.x],
    ]
}

pub fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Frequency data of a plane wave: `ξ = (ξ0, ζ)` with `|ζ| = 1`, amplitude
/// coefficients `a` (phase) and `b` (stream), profile `h(s) = cos s` with
/// `H(s) = -cos s`, `H'' = h`.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWaveSpec {
    pub xi0: f64,
    pub zeta: PlaneVec,
    pub a: f64,
    pub b: f64,
}

impl PlaneWaveSpec {
    pub fn xi(&self) -> [f64; 3] {
        [self.xi0, self.zeta.x, self.zeta.y]
    }
}

/// Profile `h` and its second antiderivative used by the potentials.
pub fn profile_h(s: f64) -> f64 {
    s.cos()
}

fn profile_big_h(s: f64) -> f64 {
    -s.cos()
}

fn profile_big_h_prime(s: f64) -> f64 {
    s.sin()
}

/// Frequency and amplitudes solving `T_A(z̄) ξ = 0` for a nonzero cone
/// direction.
pub fn plane_wave_params(zbar: &State, p: &AtwoodParams) -> Result<PlaneWaveSpec> {
    let scale = zbar.theta.abs() + zbar.u.norm() + zbar.m.norm();
    if scale == 0.0 {
        return Err(Error::Domain("zero direction has no plane wave".into()));
    }
    match in_lambda(zbar, p) {
        LambdaClass::None => Err(Error::Domain("state is not a wave-cone direction".into())),
        LambdaClass::Lambda0 => {
            // ū = -A m̄, m̄ = b ζ⊥ with b = |m̄|.
            let b = zbar.m.norm();
            if b == 0.0 {
                return Err(Error::Domain("zero direction has no plane wave".into()));
            }
            let zeta = -(zbar.m.perp()) / b; // ζ = -i m̄ / |m̄| so that m̄ = b ζ⊥
            Ok(PlaneWaveSpec {
                xi0: 0.0,
                zeta,
                a: 0.0,
                b,
            })
        }
        LambdaClass::Lambda1 { omega_bar } => {
            let a = zbar.theta;
            let w = zbar.m * p.atwood + plane::I * a;
            let zeta = if (omega_bar * w).norm() <= LAMBDA_TOL * (1.0 + scale) {
                if w.norm() <= LAMBDA_TOL * (1.0 + scale) {
                    // Pinch direction: any unit ζ works.
                    plane::ONE
                } else {
                    w / w.norm()
                }
            } else {
                let zeta_perp = (omega_bar / omega_bar.norm()) * (w / w.norm());
                -zeta_perp.perp() // ζ = -i ζ⊥
            };
            let xi0 = -zbar.m.dot(zeta) / a;
            let b = zbar.m.dot(zeta.perp());
            Ok(PlaneWaveSpec { xi0, zeta, a, b })
        }
    }
}

/// Discrete second-order potential: from sampled `φ`, `ϕ` builds the state
/// field `(Δφ, -∇⊥(∂_{x1}φ + Aϕ), ∇⊥ϕ - ∂_t∇φ)`.
pub fn potential_field(
    phi: &Field3<f64>,
    varphi: &Field3<f64>,
    p: &AtwoodParams,
) -> Result<Field3<State>> {
    phi.same_grid(varphi)?;
    use crate::field::Axis3::{T, X, Y};
    let theta = phi.laplacian_xy();
    let phi_x = phi.deriv(X);
    let mut w = phi_x.clone();
    for (wv, vv) in w.data.iter_mut().zip(varphi.data.iter()) {
        *wv += p.atwood * vv;
    }
    let w_x = w.deriv(X);
    let w_y = w.deriv(Y);
    let vp_x = varphi.deriv(X);
    let vp_y = varphi.deriv(Y);
    let phi_t = phi.deriv(T);
    let phi_tx = phi_t.deriv(X);
    let phi_ty = phi_t.deriv(Y);
    let g = phi.grid;
    let mut data = Vec::with_capacity(g.len());
    for idx in 0..g.len() {
        // u = -∇⊥ w = (∂y w, -∂x w); m = ∇⊥ϕ - ∂t ∇φ.
        let u = PlaneVec::new(w_y.data[idx], -w_x.data[idx]);
        let m = PlaneVec::new(-vp_y.data[idx] - phi_tx.data[idx], vp_x.data[idx] - phi_ty.data[idx]);
        data.push(State::new(theta.data[idx], u, m));
    }
    Ok(Field3 { grid: g, data })
}

/// Maximum absolute residual of the three discrete divergence rows of the
/// system on a state field.
pub fn divergence_residual(field: &Field3<State>, p: &AtwoodParams) -> f64 {
    use crate::field::Axis3::{T, X, Y};
    let g = field.grid;
    let scalar = |f: &dyn Fn(&State) -> f64| Field3 {
        grid: g,
        data: field.data.iter().map(f).collect::<Vec<f64>>(),
    };
    let a = p.atwood;
    let theta = scalar(&|z: &State| z.theta);
    let m1 = scalar(&|z: &State| z.m.x);
    let m2 = scalar(&|z: &State| z.m.y);
    let u1 = scalar(&|z: &State| z.u.x);
    let u2 = scalar(&|z: &State| z.u.y);
    let c1 = scalar(&|z: &State| z.u.y + a * z.m.y + z.theta);
    let c2 = scalar(&|z: &State| -(z.u.x + a * z.m.x));
    let r1a = theta.deriv(T);
    let r1b = m1.deriv(X);
    let r1c = m2.deriv(Y);
    let r2a = u1.deriv(X);
    let r2b = u2.deriv(Y);
    let r3a = c1.deriv(X);
    let r3b = c2.deriv(Y);
    let mut worst = 0.0f64;
    for idx in 0..g.len() {
        let r1 = r1a.data[idx] + r1b.data[idx] + r1c.data[idx];
        let r2 = r2a.data[idx] + r2b.data[idx];
        let r3 = r3a.data[idx] + r3b.data[idx];
        worst = worst.max(r1.abs()).max(r2.abs()).max(r3.abs());
    }
    worst
}

/// Smooth cutoff with closed-form derivatives, used by [`localized_wave`].
#[derive(Debug, Clone, Copy)]
pub enum Cutoff {
    /// `ψ ≡ 1` (no localization).
    One,
    /// Tensor bump `Π_axis (1 - s²)³` with `s = (coord - centre) / radius`.
    Bump {
        center: [f64; 3],
        radius: [f64; 3],
    },
}

fn bump_1d(s: f64) -> (f64, f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = 1.0 - s * s;
    let w = q * q * q;
    let dw = -6.0 * s * q * q;
    let ddw = q * (30.0 * s * s - 6.0);
    (w, dw, ddw)
}

impl Cutoff {
    /// Value, gradient and Hessian at a space-time point.
    pub fn eval(&self, pt: [f64; 3]) -> (f64, [f64; 3], [[f64; 3]; 3]) {
        match self {
            Cutoff::One => (1.0, [0.0; 3], [[0.0; 3]; 3]),
            Cutoff::Bump { center, radius } => {
                let mut w = [0.0; 3];
                let mut dw = [0.0; 3];
                let mut ddw = [0.0; 3];
                for a in 0..3 {
                    let s = (pt[a] - center[a]) / radius[a];
                    let (v, d, dd) = bump_1d(s);
                    w[a] = v;
                    dw[a] = d / radius[a];
                    ddw[a] = dd / (radius[a] * radius[a]);
                }
                let value = w[0] * w[1] * w[2];
                let grad = [
                    dw[0] * w[1] * w[2],
                    w[0] * dw[1] * w[2],
                    w[0] * w[1] * dw[2],
                ];
                let mut hess = [[0.0; 3]; 3];
                hess[0][0] = ddw[0] * w[1] * w[2];
                hess[1][1] = w[0] * ddw[1] * w[2];
                hess[2][2] = w[0] * w[1] * ddw[2];
                hess[0][1] = dw[0] * dw[1] * w[2];
                hess[0][2] = dw[0] * w[1] * dw[2];
                hess[1][2] = w[0] * dw[1] * dw[2];
                hess[1][0] = hess[0][1];
                hess[2][0] = hess[0][2];
                hess[2][1] = hess[1][2];
                (value, grad, hess)
            }
        }
    }
}

/// Localized plane wave along a cone direction.
///
/// Builds the potentials `φ_k = (a/k²) H(k ξ·(t,x)) ψ` and
/// `ϕ_k = (b/k) H'(k ξ·(t,x)) ψ`, applies the potential map with
/// closed-form derivatives, samples the resulting exact solution on the
/// grid, and reports the sampled sup distance to the ideal oscillation
/// `z̄ h(k ξ·(t,x)) ψ`. The distance decays like `C/k`.
pub fn localized_wave(
    zbar: &State,
    cutoff: &Cutoff,
    k: u32,
    p: &AtwoodParams,
    grid: &Grid3,
) -> Result<(Field3<State>, f64)> {
    if k == 0 {
        return Err(Error::Domain("wave number must be positive".into()));
    }
    let scale = zbar.theta.abs() + zbar.u.norm() + zbar.m.norm();
    if scale == 0.0 {
        let zero = Field3::from_fn(*grid, |_, _, _| State::default());
        return Ok((zero, 0.0));
    }
    let spec = plane_wave_params(zbar, p)?;
    let kf = f64::from(k);
    let xi = spec.xi();
    let a = spec.a;
    let b = spec.b;
    let atw = p.atwood;
    let mut data = Vec::with_capacity(grid.len());
    let mut sup = 0.0f64;
    for kk in 0..grid.nt {
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let pt = [grid.t(kk), grid.x(i), grid.y(j)];
                let s = kf * (xi[0] * pt[0] + xi[1] * pt[1] + xi[2] * pt[2]);
                let (psi, dpsi, hpsi) = cutoff.eval(pt);
                let h = profile_h(s);
                let hh = profile_big_h(s);
                let hp = profile_big_h_prime(s);

                // φ = (a/k²) H ψ: second derivatives via the product rule.
                let phi_dd = |mu: usize, nu: usize| {
                    a * h * xi[mu] * xi[nu] * psi
                        + (a / kf) * hp * (xi[mu] * dpsi[nu] + xi[nu] * dpsi[mu])
                        + (a / (kf * kf)) * hh * hpsi[mu][nu]
                };
                // ϕ = (b/k) H' ψ: first derivatives.
                let vphi_d = |mu: usize| b * h * xi[mu] * psi + (b / kf) * hp * dpsi[mu];

                let theta = phi_dd(1, 1) + phi_dd(2, 2);
                // w_mu = ∂_mu (∂_x1 φ + A ϕ)
                let w1 = phi_dd(1, 1) + atw * vphi_d(1);
                let w2 = phi_dd(1, 2) + atw * vphi_d(2);
                let u = PlaneVec::new(w2, -w1);
                let m = PlaneVec::new(-vphi_d(2) - phi_dd(0, 1), vphi_d(1) - phi_dd(0, 2));
                let z = State::new(theta, u, m);
                let ideal = *zbar * (h * psi);
                let diff = z - ideal;
                let dev =
                    (diff.theta * diff.theta + diff.u.norm_sq() + diff.m.norm_sq()).sqrt();
                sup = sup.max(dev);
                data.push(z);
            }
        }
    }
    Ok((Field3 { grid: *grid, data }, sup))
}
