//! Constructive lamination segments, hull decompositions and the numeric
//! hull checks.
//!
//! Every state of the open relaxation admits a long cone segment through
//! it (the perturbation property): the direction is read off the
//! shifted-disc coordinate, radially projected when the state sits close
//! to the slice boundary. For the bounded relaxation the direction must
//! additionally respect a half-plane and two ball constraints; depending
//! on the local slack this picks the plain direction, a root of the
//! half-plane bracket `b(z, ω̄) = α`, or an interpolated `α` near the
//! corner. Decomposition runs the other way: a relaxed state is split
//! along a `θ̄ = 0` direction onto the slice boundary and each boundary
//! point is resolved into two constitutive leaves.

use crate::atwood::{AtwoodParams, BoundParams};
use crate::error::{Error, Result};
use crate::plane::{self, PlaneVec};
use crate::state_geometry::{
    b_quadratic, b_vec, in_k, in_u, in_u_closed, in_u_m, k_margin, m_from_omega, omega_of,
    relaxation_functionals, shift_t, shift_t_inv, sigma_pm, u_bound, State,
};
use crate::wave_cone::LambdaDirection;
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::HashMap;
use std::sync::Mutex;

/// Tunables of the segment constructions.
#[derive(Debug, Clone, Copy)]
pub struct SegmentSolverConfig {
    /// Scale `D` of the slack threshold `δ = D (1-θ²)(M²-1)`.
    pub d_scale: f64,
    /// Convergence tolerance of the cyclic projection.
    pub dykstra_tol: f64,
    /// Bisection tolerance of [`segment_radius`].
    pub bisect_tol: f64,
    pub max_iter: usize,
}

impl Default for SegmentSolverConfig {
    fn default() -> Self {
        Self {
            d_scale: 0.1,
            dykstra_tol: 1e-10,
            bisect_tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Radial shift-disc choice shared by the segment constructions: centre
/// states take `ω̄ = 0`, near-boundary states project radially.
fn zseg_omega(omega: PlaneVec) -> PlaneVec {
    let t = shift_t(omega);
    if t.norm() <= 0.5 {
        plane::ZERO
    } else {
        shift_t_inv(t / t.norm())
    }
}

fn direction_from_omega_bar(
    z: &State,
    omega_bar: PlaneVec,
    p: &AtwoodParams,
) -> Result<LambdaDirection> {
    // m̄ inverts m̄ + θ ω̄ (A m̄ + i) = u.
    let den = plane::ONE + omega_bar * (z.theta * p.atwood);
    let m_bar = (z.u - omega_bar * plane::I * z.theta)
        .cdiv(den)
        .ok_or_else(|| Error::Singular("1 + θ ω̄ A = 0".into()))?;
    let u_bar = omega_bar * (m_bar * p.atwood + plane::I);
    Ok(LambdaDirection {
        state: State::new(1.0, u_bar, m_bar),
        omega_bar: Some(omega_bar),
    })
}

/// Cone direction with long segments inside the open relaxation.
pub fn unbounded_direction(z: &State, p: &AtwoodParams) -> Result<LambdaDirection> {
    if !in_u(z, p) {
        return Err(Error::Domain("state outside the open relaxation".into()));
    }
    let omega = omega_of(z, p)?;
    direction_from_omega_bar(z, zseg_omega(omega), p)
}

/// Which branch produced a bounded direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundedCase {
    /// Inside the pinch band: the plain direction already works.
    PinchBand,
    /// Half-plane slack exceeds `δ`: plain disc choice.
    Interior,
    /// On the half-plane wall: root of `b(z, ω̄) = 0`.
    HalfPlaneWall,
    /// Near the wall-disc corner: root of `b(z, ω̄) = α(z)`.
    Corner,
    /// Root solve failed; plain direction returned and flagged.
    FallbackUnbounded,
}

/// A bounded-relaxation segment direction with provenance.
#[derive(Debug, Clone, Copy)]
pub struct BoundedDirection {
    pub dir: LambdaDirection,
    pub case: BoundedCase,
    /// True when the root solve failed and the plain direction was used.
    pub fallback: bool,
}

/// Sign convention of the protected outer ball: `+1` protects the upper
/// ball (`|σ₋| <= |σ₊|`), `-1` the lower one.
fn sigma_branch(z: &State, b: &BoundParams) -> Result<f64> {
    let s = sigma_pm(z, b)?;
    Ok(if s.sigma_minus.norm() <= s.sigma_plus.norm() {
        1.0
    } else {
        -1.0
    })
}

/// `q` factor of the half-plane bracket for the given branch sign.
fn q_factor(z: &State, omega: PlaneVec, eps: f64, p: &AtwoodParams) -> Result<PlaneVec> {
    let den = plane::ONE + omega * (z.theta * p.atwood);
    (z.au_i(p) * (plane::ONE + omega * (eps * p.atwood)))
        .cdiv(den)
        .ok_or_else(|| Error::Singular("1 + ω θ A = 0".into()))
}

fn direction_from(
    z: &State,
    omega: PlaneVec,
    omega_bar: PlaneVec,
    eps: f64,
    p: &AtwoodParams,
) -> Result<LambdaDirection> {
    // n̄ removes the first-order drift of the protected ball coordinate.
    let n_den = plane::ONE + omega_bar * (eps * p.atwood);
    let n_bar = (plane::ONE * (-eps * (1.0 - eps * z.theta)))
        .cdiv(n_den)
        .ok_or_else(|| Error::Singular("1 ± ω̄ A = 0".into()))?;
    let den = plane::ONE + omega * (z.theta * p.atwood);
    let drift = (z.au_i(p) * (omega_bar - omega))
        .cdiv(den)
        .ok_or_else(|| Error::Singular("1 + ω θ A = 0".into()))?;
    let v = z.u + n_bar * drift;
    let m_den = plane::ONE + omega_bar * (z.theta * p.atwood);
    let m_bar = (v - omega_bar * plane::I * z.theta)
        .cdiv(m_den)
        .ok_or_else(|| Error::Singular("1 + θ ω̄ A = 0".into()))?;
    let u_bar = omega_bar * (m_bar * p.atwood + plane::I);
    Ok(LambdaDirection {
        state: State::new(1.0, u_bar, m_bar),
        omega_bar: Some(omega_bar),
    })
}

/// First-order rate of change of the capped quantity `B` along the
/// direction generated by `ω̄` (branch sign from the state):
/// `B(z + λ z̄) = B(z) + λ b + λ² (…)`.
pub fn b_value(z: &State, omega_bar: PlaneVec, p: &AtwoodParams, b: &BoundParams) -> Result<f64> {
    let omega = omega_of(z, p)?;
    let eps = sigma_branch(z, b)?;
    let dir = direction_from(z, omega, omega_bar, eps, p)?;
    let zb = dir.state;
    let lin = zb.u + zb.m * p.atwood + plane::I;
    Ok(4.0 * zb.u.dot(b_vec(z, p)) + 4.0 * z.u.dot(lin))
}

/// Euclidean distance from `m` to the bounded slice
/// `U_M(θ, u) ⊂ R²` by cyclic (Dykstra) projection onto the slice disc,
/// the half-plane and the two outer balls.
pub fn slice_distance(z: &State, p: &AtwoodParams, b: &BoundParams, cfg: &SegmentSolverConfig) -> f64 {
    let theta = z.theta;
    let one_m_t2 = 1.0 - theta * theta;
    let aui = z.au_i(p);
    // Disc data of the four constraints in the m-plane.
    let c_disc = z.u * theta - aui * (one_m_t2 / (2.0 * (1.0 - theta * p.atwood)));
    let r_disc = one_m_t2 * aui.norm() / (2.0 * (1.0 - theta * p.atwood));
    let c_lo = z.u - plane::I * (0.5 * (1.0 - theta));
    let r_lo = 0.5 * b.m_minus * (1.0 - theta);
    let c_hi = -z.u - plane::I * (0.5 * (1.0 + theta));
    let r_hi = 0.5 * b.m_plus * (1.0 + theta);
    // Half plane (4 A u) · m <= M² - 1 - 4|u|² - 4(θ + A) u2.
    let normal = z.u * (4.0 * p.atwood);
    let cap = b.m * b.m - 1.0 - 4.0 * z.u.norm_sq() - 4.0 * (theta + p.atwood) * z.u.y;

    let proj_disc = |x: PlaneVec, c: PlaneVec, r: f64| -> PlaneVec {
        let d = x - c;
        let n = d.norm();
        if n <= r {
            x
        } else {
            c + d * (r / n)
        }
    };
    let proj_half = |x: PlaneVec| -> PlaneVec {
        let n2 = normal.norm_sq();
        if n2 == 0.0 {
            return x;
        }
        let excess = normal.dot(x) - cap;
        if excess <= 0.0 {
            x
        } else {
            x - normal * (excess / n2)
        }
    };

    let mut x = z.m;
    let mut incr = [plane::ZERO; 4];
    for _ in 0..cfg.max_iter {
        let prev = x;
        for (idx, set) in (0..4usize).enumerate() {
            let y = x + incr[idx];
            let projected = match set {
                0 => proj_disc(y, c_disc, r_disc),
                1 => proj_half(y),
                2 => proj_disc(y, c_lo, r_lo),
                _ => proj_disc(y, c_hi, r_hi),
            };
            incr[idx] = y - projected;
            x = projected;
        }
        if (x - prev).norm() <= cfg.dykstra_tol {
            break;
        }
    }
    (z.m - x).norm()
}

/// Interpolated target value for the half-plane bracket near the
/// wall-disc corner.
pub fn alpha_interp(
    z: &State,
    p: &AtwoodParams,
    b: &BoundParams,
    cfg: &SegmentSolverConfig,
) -> Result<f64> {
    let omega = omega_of(z, p)?;
    let s = sigma_pm(z, b)?;
    let m2 = b.m * b.m;
    let alpha_disc = 0.5
        * ((m2 - p.atwood) * (1.0 - s.sigma_minus.norm_sq())
            - (m2 + p.atwood) * (1.0 - s.sigma_plus.norm_sq()));
    let slack_h = m2 - 1.0 - b_quadratic(z, p);
    let den = plane::ONE + omega * (z.theta * p.atwood);
    let disc_term = (1.0 - z.theta * z.theta) * z.au_i(p).norm_sq() / den.norm_sq()
        * (1.0 - shift_t(omega).norm_sq());
    let d = 8.0 * (1.0f64.max(p.atwood.abs() * z.u.norm())) * slice_distance(z, p, b, cfg);
    let denom = disc_term + slack_h + d;
    if denom.abs() <= 1e-300 {
        return Ok(0.0);
    }
    Ok((slack_h + d) / denom * alpha_disc)
}

/// Roots `ω̄` on the shifted circle of the bracket equation
/// `b(z, ω̄) = α`. The bracket is quadratic in the imaginary part of the
/// rotated unknown; a negative discriminant yields `NoSolution`.
pub fn solve_b(
    z: &State,
    alpha: f64,
    p: &AtwoodParams,
    b: &BoundParams,
) -> Result<Vec<PlaneVec>> {
    if z.theta.abs() >= 1.0 || z.is_pinched(p) {
        return Err(Error::Domain("bracket solve needs |θ| < 1 off the pinch".into()));
    }
    let omega = omega_of(z, p)?;
    let eps = sigma_branch(z, b)?;
    let q = q_factor(z, omega, eps, p)?;
    let bv = b_vec(z, p);
    let btilde = bv - z.u * (1.0 - eps * p.atwood);
    let qb = q.conj() * btilde;
    let a2 = 1.0 - eps * p.atwood;
    let a1 = 4.0 * qb.y;
    let a0 = a2 * alpha * alpha + 4.0 * qb.x * alpha - 4.0 * b_quadratic(z, p) * q.norm_sq();
    let delta = a1 * a1 - 4.0 * a2 * a0;
    if delta < 0.0 {
        return Err(Error::NoSolution(format!("discriminant {delta} < 0")));
    }
    let sq = delta.sqrt();
    let mut out = Vec::with_capacity(2);
    for s in [1.0, -1.0] {
        let beta = (-a1 + s * sq) / (2.0 * a2);
        let ab = PlaneVec::new(alpha, -beta);
        let num = q * (bv - z.u).conj() * 4.0 + ab * (2.0 - eps * p.atwood);
        let den = q * (bv + z.u).conj() * 4.0 - ab * (eps * p.atwood);
        let t = num
            .cdiv(den)
            .ok_or_else(|| Error::Singular("degenerate bracket".into()))?;
        out.push(shift_t_inv(t));
        if delta == 0.0 {
            break;
        }
    }
    Ok(out)
}

fn cache_key(p: &AtwoodParams, b: &BoundParams) -> (u64, u64) {
    (p.atwood.to_bits(), b.m.to_bits())
}

static GAMMA_CACHE: Mutex<Option<HashMap<(u64, u64), f64>>> = Mutex::new(None);

/// Width of the pinch band inside which the bounded relaxation locally
/// coincides with the unbounded one (only meaningful for `M > M*(A)`).
/// Calibrated once per `(A, M)` by sampling and cached.
pub fn pinch_band_gamma(p: &AtwoodParams, b: &BoundParams) -> f64 {
    if p.atwood == 0.0 || b.m <= p.m_star {
        return 0.0;
    }
    let key = cache_key(p, b);
    {
        let guard = GAMMA_CACHE.lock().unwrap();
        if let Some(map) = guard.as_ref() {
            if let Some(&g) = map.get(&key) {
                return g;
            }
        }
    }
    let g = calibrate_gamma(p, b);
    let mut guard = GAMMA_CACHE.lock().unwrap();
    guard.get_or_insert_with(HashMap::new).insert(key, g);
    g
}

fn calibrate_gamma(p: &AtwoodParams, b: &BoundParams) -> f64 {
    use rand::SeedableRng;
    let a = p.atwood;
    let m2 = b.m * b.m;
    // Margins of the pinch state against the three extra constraints.
    let u_p = plane::I * (-1.0 / a);
    let hn = (m2 - p.m_star * p.m_star) / (m2 - 1.0);
    let sp = sigma_pm(&State::new(0.0, u_p, plane::ZERO), b).unwrap();
    let sm = (1.0 - sp.sigma_minus.norm_sq()).min(1.0 - sp.sigma_plus.norm_sq());
    let mut gamma = 0.25 * hn.min(sm).max(0.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e3779b97f4a7c15);
    'outer: for _ in 0..60 {
        if gamma < 1e-9 {
            return 0.0;
        }
        for _ in 0..4000 {
            let theta: f64 = rng.gen_range(-0.999..0.999);
            let r: f64 = rng.gen_range(0.0..1.0f64);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let band = PlaneVec::new(phi.cos(), phi.sin()) * (gamma * r);
            let u = (band - plane::I).cdiv(PlaneVec::new(a, 0.0)).unwrap();
            let tphi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let tr: f64 = rng.gen_range(0.0..1.0f64);
            let omega = shift_t_inv(PlaneVec::new(tphi.cos(), tphi.sin()) * tr.sqrt() * 0.9999);
            let m = match m_from_omega(theta, u, omega, p) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let z = State::new(theta, u, m);
            if !in_u(&z, p) {
                continue;
            }
            let (_, mask) = in_u_m(&z, p, b);
            if !(mask[1] && mask[2] && mask[3]) {
                gamma *= 0.5;
                continue 'outer;
            }
        }
        return 0.5 * gamma;
    }
    0.0
}

/// Cone direction with long segments inside the bounded relaxation.
pub fn bounded_direction(
    z: &State,
    p: &AtwoodParams,
    b: &BoundParams,
    cfg: &SegmentSolverConfig,
) -> Result<BoundedDirection> {
    if p.m_star.is_finite() && (b.m - p.m_star).abs() <= 1e-9 {
        return Err(Error::Unsupported(
            "bound coincides with the pinch-critical value M*(A)".into(),
        ));
    }
    if !in_u_m(z, p, b).0 {
        return Err(Error::Domain("state outside the bounded relaxation".into()));
    }
    let gamma = pinch_band_gamma(p, b);
    if gamma > 0.0 && z.au_i(p).norm() <= gamma {
        return Ok(BoundedDirection {
            dir: unbounded_direction(z, p)?,
            case: BoundedCase::PinchBand,
            fallback: false,
        });
    }
    let omega = omega_of(z, p)?;
    let eps = sigma_branch(z, b)?;
    let m2 = b.m * b.m;
    let slack_h = m2 - 1.0 - b_quadratic(z, p);
    let delta = cfg.d_scale * (1.0 - z.theta * z.theta) * (m2 - 1.0);
    if slack_h > delta {
        let dir = direction_from(z, omega, zseg_omega(omega), eps, p)?;
        return Ok(BoundedDirection {
            dir,
            case: BoundedCase::Interior,
            fallback: false,
        });
    }
    let t_slack = 1.0 - shift_t(omega).norm();
    let (alpha, case) = if t_slack > delta {
        (0.0, BoundedCase::HalfPlaneWall)
    } else {
        (alpha_interp(z, p, b, cfg)?, BoundedCase::Corner)
    };
    match solve_b(z, alpha, p, b) {
        Ok(roots) => {
            let t = shift_t(omega);
            let best = roots
                .into_iter()
                .min_by(|a, c| {
                    let da = (shift_t(*a) - t).norm();
                    let dc = (shift_t(*c) - t).norm();
                    da.partial_cmp(&dc).unwrap()
                })
                .expect("solve_b returned no roots");
            let dir = direction_from(z, omega, best, eps, p)?;
            Ok(BoundedDirection {
                dir,
                case,
                fallback: false,
            })
        }
        Err(Error::NoSolution(_)) => Ok(BoundedDirection {
            dir: unbounded_direction(z, p)?,
            case: BoundedCase::FallbackUnbounded,
            fallback: true,
        }),
        Err(e) => Err(e),
    }
}

/// Which set a segment is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetId {
    U,
    UM,
}

/// Largest symmetric-around-zero parameter interval `(λ₋, λ₊)` keeping
/// `z + λ z̄` in the set, located by outward scan plus bisection. The scan
/// is capped at `±2 (1 - |θ|)`.
pub fn segment_radius(
    z: &State,
    dir: &State,
    set: SetId,
    p: &AtwoodParams,
    b: Option<&BoundParams>,
    cfg: &SegmentSolverConfig,
) -> Result<(f64, f64)> {
    let member = |lambda: f64| -> bool {
        let zl = *z + *dir * lambda;
        match set {
            SetId::U => in_u(&zl, p),
            SetId::UM => in_u_m(&zl, p, b.expect("bound params required for UM")).0,
        }
    };
    if !member(0.0) {
        return Err(Error::Domain("base state outside the set".into()));
    }
    let cap = 2.0 * (1.0 - z.theta.abs());
    let scan = 64;
    let mut out = [cap, -cap];
    for (side, sign) in [1.0f64, -1.0].iter().enumerate() {
        let mut last_in = 0.0;
        let mut first_out = None;
        for s in 1..=scan {
            let lam = sign * cap * s as f64 / scan as f64;
            if member(lam) {
                last_in = lam;
            } else {
                first_out = Some(lam);
                break;
            }
        }
        if let Some(mut hi) = first_out {
            let mut lo = last_in;
            while (hi - lo).abs() > cfg.bisect_tol {
                let mid = 0.5 * (lo + hi);
                if member(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out[side] = lo;
        } else {
            out[side] = sign * cap;
        }
    }
    Ok((out[1], out[0]))
}

/// One node of a laminate tree.
#[derive(Debug, Clone)]
pub struct LaminateNode {
    pub state: State,
    pub weight: f64,
    pub split: Option<LaminateSplit>,
}

/// A binary split of a node along a cone direction: children sit at
/// parameters `lam_minus < 0 < lam_plus` along `direction`.
#[derive(Debug, Clone)]
pub struct LaminateSplit {
    pub direction: State,
    pub lam_minus: f64,
    pub lam_plus: f64,
    pub children: Vec<LaminateNode>,
}

#[derive(Debug, Clone)]
pub struct LaminateTree {
    pub root: LaminateNode,
}

/// Numeric summary of tree validity.
#[derive(Debug, Clone, Copy)]
pub struct TreeCheck {
    pub n_leaves: usize,
    pub weight_sum_err: f64,
    pub barycenter_err: f64,
    pub max_split_residual: f64,
    pub max_leaf_margin: f64,
}

impl LaminateTree {
    pub fn leaves(&self) -> Vec<(State, f64)> {
        let mut out = Vec::new();
        fn walk(node: &LaminateNode, out: &mut Vec<(State, f64)>) {
            match &node.split {
                None => out.push((node.state, node.weight)),
                Some(s) => {
                    for c in &s.children {
                        walk(c, out);
                    }
                }
            }
        }
        walk(&self.root, &mut out);
        out
    }

    /// Residuals of the structural invariants: leaf weights sum to one,
    /// the weighted barycenter reproduces the root, every split direction
    /// lies in the cone, every leaf lies in the constitutive set.
    pub fn verify(&self, p: &AtwoodParams) -> TreeCheck {
        let leaves = self.leaves();
        let wsum: f64 = leaves.iter().map(|(_, w)| w).sum();
        let mut bary = State::default();
        for (s, w) in &leaves {
            bary = bary + *s * *w;
        }
        let diff = bary - self.root.state;
        let bary_err =
            (diff.theta * diff.theta + diff.u.norm_sq() + diff.m.norm_sq()).sqrt();
        let mut split_res = 0.0f64;
        fn walk(node: &LaminateNode, p: &AtwoodParams, worst: &mut f64) {
            if let Some(s) = &node.split {
                let dir_res = lambda_residual(&s.direction, p);
                *worst = worst.max(dir_res);
                for (c, lam) in s
                    .children
                    .iter()
                    .zip([s.lam_minus, s.lam_plus].into_iter())
                {
                    let expect = node.state + s.direction * lam;
                    let d = c.state - expect;
                    *worst = worst
                        .max((d.theta * d.theta + d.u.norm_sq() + d.m.norm_sq()).sqrt());
                    walk(c, p, worst);
                }
            }
        }
        walk(&self.root, p, &mut split_res);
        let leaf_margin = leaves
            .iter()
            .map(|(s, _)| k_margin(s))
            .fold(0.0f64, f64::max);
        TreeCheck {
            n_leaves: leaves.len(),
            weight_sum_err: (wsum - 1.0).abs(),
            barycenter_err: bary_err,
            max_split_residual: split_res,
            max_leaf_margin: leaf_margin,
        }
    }
}

/// Distance of a raw direction from the wave cone (zero on the cone).
pub fn lambda_residual(dir: &State, p: &AtwoodParams) -> f64 {
    let scale = 1.0 + dir.u.norm() + dir.m.norm();
    if dir.theta == 0.0 {
        return (dir.u + dir.m * p.atwood).norm() / scale;
    }
    let w = dir.m * p.atwood + plane::I * dir.theta;
    if w.norm() <= 1e-14 * scale {
        return dir.u.norm() / scale;
    }
    match dir.u.cdiv(w) {
        Some(omega) => (shift_t(omega).norm() - 1.0).abs(),
        None => f64::INFINITY,
    }
}

/// Quadratic coefficients of `λ ↦ g(z + λ z̄)` for a `θ̄ = 0` direction,
/// fitted exactly from three samples.
fn g_quadratic(z: &State, dir: &State, p: &AtwoodParams) -> (f64, f64, f64) {
    let g_at = |lam: f64| relaxation_functionals(&(*z + *dir * lam), p).1;
    let p0 = g_at(0.0);
    let p1 = g_at(1.0);
    let pm = g_at(-1.0);
    let a2 = 0.5 * (p1 + pm) - p0;
    let a1 = 0.5 * (p1 - pm);
    (a2, a1, p0)
}

/// Splits a boundary state (slice boundary, not constitutive) into its two
/// constitutive leaves. Pinched boundary states have `m = θ u` and split
/// with a vanishing wave part.
fn boundary_split(z: &State, weight: f64, p: &AtwoodParams) -> Result<LaminateNode> {
    let (m_bar, u_bar) = if z.is_pinched(p) {
        (z.u, plane::ZERO)
    } else {
        let omega = omega_of(z, p)?;
        let den = plane::ONE + omega * (z.theta * p.atwood);
        let m_bar = (z.u - omega * plane::I * z.theta)
            .cdiv(den)
            .ok_or_else(|| Error::Singular("1 + θ ω A = 0".into()))?;
        (m_bar, omega * (m_bar * p.atwood + plane::I))
    };
    let up = m_bar + u_bar;
    let dn = m_bar - u_bar;
    let leaf_hi = State::new(1.0, up, up);
    let leaf_lo = State::new(-1.0, dn, -dn);
    let w_hi = 0.5 * (1.0 + z.theta);
    let w_lo = 0.5 * (1.0 - z.theta);
    Ok(LaminateNode {
        state: *z,
        weight,
        split: Some(LaminateSplit {
            direction: State::new(1.0, u_bar, m_bar),
            lam_minus: -1.0 - z.theta,
            lam_plus: 1.0 - z.theta,
            children: vec![
                LaminateNode {
                    state: leaf_lo,
                    weight: weight * w_lo,
                    split: None,
                },
                LaminateNode {
                    state: leaf_hi,
                    weight: weight * w_hi,
                    split: None,
                },
            ],
        }),
    })
}

/// Decomposes a state of the closed relaxation into at most four
/// constitutive leaves: one `θ̄ = 0` split onto the slice boundary, then
/// one constitutive split per boundary point.
pub fn laminate_decompose(z: &State, p: &AtwoodParams) -> Result<LaminateTree> {
    if !in_u_closed(z, p) {
        return Err(Error::Domain("state outside the closed relaxation".into()));
    }
    if in_k(z) {
        return Ok(LaminateTree {
            root: LaminateNode {
                state: *z,
                weight: 1.0,
                split: None,
            },
        });
    }
    let (_, g) = relaxation_functionals(z, p);
    let scale = 1.0 + z.u.norm_sq() + z.m.norm_sq();
    if g >= -1e-13 * scale {
        // Already on the slice boundary.
        return Ok(LaminateTree {
            root: boundary_split(z, 1.0, p)?,
        });
    }
    let dev = z.deviation();
    let m_bar = dev / dev.norm();
    let dir = State::new(0.0, -m_bar * p.atwood, m_bar);
    let (a2, a1, a0) = g_quadratic(z, &dir, p);
    // a2 = (1 - A²)(1 + θ A) |m̄|² > 0 and a0 = g(z) < 0: one root per sign.
    let disc = (a1 * a1 - 4.0 * a2 * a0).sqrt();
    let q = -0.5 * (a1 + a1.signum() * disc);
    let (r1, r2) = (q / a2, a0 / q);
    let (lam_minus, lam_plus) = (r1.min(r2), r1.max(r2));
    let z_minus = *z + dir * lam_minus;
    let z_plus = *z + dir * lam_plus;
    let w_minus = lam_plus / (lam_plus - lam_minus);
    let w_plus = -lam_minus / (lam_plus - lam_minus);
    Ok(LaminateTree {
        root: LaminateNode {
            state: *z,
            weight: 1.0,
            split: Some(LaminateSplit {
                direction: dir,
                lam_minus,
                lam_plus,
                children: vec![
                    boundary_split(&z_minus, w_minus, p)?,
                    boundary_split(&z_plus, w_plus, p)?,
                ],
            }),
        },
    })
}

fn gauss(rng: &mut impl Rng) -> PlaneVec {
    PlaneVec::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn circle_point(rng: &mut impl Rng) -> PlaneVec {
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    shift_t_inv(PlaneVec::new(phi.cos(), phi.sin()))
}

/// Random state of the order-`depth` lamination of the constitutive set
/// (`depth` 1 or 2). Depth 1 lands on the slice boundary, depth 2 anywhere
/// in the closed relaxation.
pub fn random_laminate(depth: u32, p: &AtwoodParams, rng: &mut impl Rng) -> Result<State> {
    if !(1..=2).contains(&depth) {
        return Err(Error::Domain(format!("depth must be 1 or 2, got {depth}")));
    }
    let m_bar = gauss(rng);
    let omega_bar = circle_point(rng);
    let u_bar = omega_bar * (m_bar * p.atwood + plane::I);
    let s: f64 = rng.gen_range(-1.0..1.0);
    let z1 = State::new(0.0, m_bar, u_bar) + State::new(1.0, u_bar, m_bar) * s;
    if depth == 1 {
        return Ok(z1);
    }
    let m0 = gauss(rng);
    let m0 = if m0.norm() < 1e-9 { plane::I } else { m0 / m0.norm() };
    let dir = State::new(0.0, -m0 * p.atwood, m0);
    let (a2, a1, _) = g_quadratic(&z1, &dir, p);
    let lam2 = if a2.abs() < 1e-300 { 0.0 } else { -a1 / a2 };
    let tau: f64 = rng.gen_range(0.0..1.0);
    Ok(z1 + dir * (tau * lam2))
}

/// Relative residuals of the two linking identities evaluated on a state:
/// the four-line bound identity and its disc-coordinate form.
#[derive(Debug, Clone, Copy)]
pub struct IdentityResiduals {
    pub id_bound: f64,
    pub id_disc: f64,
}

/// Evaluates both sides of the linking identities and returns relative
/// residuals. The disc form needs `|θ| < 1` and a non-pinched velocity.
pub fn identity_check(z: &State, p: &AtwoodParams, b: &BoundParams) -> Result<IdentityResiduals> {
    let a = p.atwood;
    let theta = z.theta;
    let one_m_t2 = 1.0 - theta * theta;
    let aui = z.au_i(p);
    let dev = z.deviation();
    let m2 = b.m * b.m;
    let bq = b_quadratic(z, p);

    let l1 = (one_m_t2 * one_m_t2 * aui.norm_sq()
        - (dev * (2.0 * (1.0 - theta * a)) + aui * one_m_t2).norm_sq())
        / (1.0 - theta * a);
    let l2 = one_m_t2 * (m2 - 1.0 - bq);
    let lo = ((z.m - z.u) * 2.0 + plane::I * (1.0 - theta)).norm_sq();
    let hi = ((z.m + z.u) * 2.0 + plane::I * (1.0 + theta)).norm_sq();
    let r3 = 0.5 * (1.0 + theta) * ((m2 - a) * (1.0 - theta) * (1.0 - theta) - (1.0 - a) * lo);
    let r4 = 0.5 * (1.0 - theta) * ((m2 + a) * (1.0 + theta) * (1.0 + theta) - (1.0 + a) * hi);
    let scale1 = 1.0 + l1.abs() + l2.abs() + r3.abs() + r4.abs();
    let id_bound = ((l1 + l2) - (r3 + r4)).abs() / scale1;

    let omega = omega_of(z, p)?;
    let s = sigma_pm(z, b)?;
    let den = plane::ONE + omega * (theta * a);
    let lhs = one_m_t2 * aui.norm_sq() / den.norm_sq() * (1.0 - shift_t(omega).norm_sq())
        + (m2 - 1.0 - bq);
    let rhs = 0.5 * (1.0 - theta) * (m2 - a) * (1.0 - s.sigma_minus.norm_sq())
        + 0.5 * (1.0 + theta) * (m2 + a) * (1.0 - s.sigma_plus.norm_sq());
    let scale4 = 1.0 + lhs.abs() + rhs.abs();
    Ok(IdentityResiduals {
        id_bound,
        id_disc: (lhs - rhs).abs() / scale4,
    })
}

/// Values of the membership functional along the pinch ray
/// `z₀ = (0, -i/A, 0)`, direction `(1, 0, 0)`; closed form
/// `2 |1 - λA| |λ| / |A|`. The curve is not convex, certifying that the
/// functional itself is not cone-convex for `A ≠ 0`.
pub fn nonconvexity_curve(p: &AtwoodParams, lambdas: &[f64]) -> Result<Vec<f64>> {
    if p.atwood == 0.0 {
        return Err(Error::Domain("the certificate needs A != 0".into()));
    }
    let z0 = State::new(0.0, plane::I * (-1.0 / p.atwood), plane::ZERO);
    let dir = State::new(1.0, plane::ZERO, plane::ZERO);
    Ok(lambdas
        .iter()
        .map(|&l| relaxation_functionals(&(z0 + dir * l), p).0)
        .collect())
}

/// Closed form of the pinch-ray curve.
pub fn nonconvexity_closed_form(p: &AtwoodParams, lambda: f64) -> f64 {
    2.0 * (1.0 - lambda * p.atwood).abs() * lambda.abs() / p.atwood.abs()
}

/// Certified lower bounds on the normalized segment half-length
/// `radius / (1 - θ²)` of the plain direction, per Atwood number.
/// Calibrated once by brute force (20 000 samples, seed 0xA11CE,
/// [`min_unbounded_ratio`]); recorded at ~60% of the measured minimum.
pub const C0_UNBOUNDED: [(f64, f64); 5] = [
    (-0.8, 0.048),
    (-0.5, 0.055),
    (0.0, 0.076),
    (0.5, 0.057),
    (0.8, 0.049),
];

/// Same bounds for the bounded-set construction, per `(A, M)`.
/// Calibrated with 5 000 samples, seed 0xB0B ([`min_bounded_ratio`]);
/// no fallback directions were observed during calibration.
pub const C0_BOUNDED: [(f64, f64, f64); 15] = [
    (-0.8, 2.0, 0.011),
    (-0.8, 4.0, 0.013),
    (-0.8, 8.0, 0.010),
    (-0.5, 2.0, 0.020),
    (-0.5, 4.0, 0.031),
    (-0.5, 8.0, 0.026),
    (0.0, 2.0, 0.029),
    (0.0, 4.0, 0.034),
    (0.0, 8.0, 0.074),
    (0.5, 2.0, 0.015),
    (0.5, 4.0, 0.028),
    (0.5, 8.0, 0.025),
    (0.8, 2.0, 0.009),
    (0.8, 4.0, 0.009),
    (0.8, 8.0, 0.016),
];

/// Recorded bound for an Atwood number, if calibrated.
pub fn c0_unbounded(atwood: f64) -> Option<f64> {
    C0_UNBOUNDED
        .iter()
        .find(|(a, _)| (a - atwood).abs() < 1e-12)
        .map(|(_, c)| *c)
}

/// Recorded bound for an `(A, M)` pair, if calibrated.
pub fn c0_bounded(atwood: f64, m: f64) -> Option<f64> {
    C0_BOUNDED
        .iter()
        .find(|(a, mm, _)| (a - atwood).abs() < 1e-12 && (mm - m).abs() < 1e-12)
        .map(|(_, _, c)| *c)
}

/// Smallest normalized segment half-length `min(radius) / (1 - θ²)` of the
/// plain construction over `n` sampled states of the open relaxation.
pub fn min_unbounded_ratio(p: &AtwoodParams, n: usize, seed: u64, cfg: &SegmentSolverConfig) -> f64 {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..n {
        let z = sample_in_u(p, &mut rng);
        let d = unbounded_direction(&z, p).expect("sampled state must be interior");
        let (lo, hi) = segment_radius(&z, &d.state, SetId::U, p, None, cfg)
            .expect("segment of an interior state");
        let radius = (-lo).min(hi);
        worst = worst.min(radius / (1.0 - z.theta * z.theta));
    }
    worst
}

/// Bounded-set analogue of [`min_unbounded_ratio`]; also counts fallback
/// directions (root solve failures), which are logged rather than hidden.
pub fn min_bounded_ratio(
    p: &AtwoodParams,
    b: &BoundParams,
    n: usize,
    seed: u64,
    cfg: &SegmentSolverConfig,
) -> (f64, usize) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut fallbacks = 0usize;
    for _ in 0..n {
        let z = sample_in_u_m(p, b, &mut rng);
        let d = bounded_direction(&z, p, b, cfg).expect("sampled state must be interior");
        if d.fallback {
            fallbacks += 1;
        }
        let (lo, hi) = segment_radius(&z, &d.dir.state, SetId::UM, p, Some(b), cfg)
            .expect("segment of an interior state");
        let radius = (-lo).min(hi);
        worst = worst.min(radius / (1.0 - z.theta * z.theta));
        // Midpoints of the measured interval re-verify membership.
        for lam in [0.5 * lo, 0.5 * hi] {
            debug_assert!(in_u_m(&(z + d.dir.state * lam), p, b).0);
        }
    }
    (worst, fallbacks)
}

/// Random state of the open relaxation: uniform phase, Gaussian velocity,
/// uniform disc coordinate.
pub fn sample_in_u(p: &AtwoodParams, rng: &mut impl Rng) -> State {
    loop {
        let theta: f64 = rng.gen_range(-0.999..0.999);
        let u = gauss(rng);
        let r: f64 = rng.gen_range(0.0..1.0f64);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let omega = shift_t_inv(PlaneVec::new(phi.cos(), phi.sin()) * r.sqrt() * 0.99999);
        if let Ok(m) = m_from_omega(theta, u, omega, p) {
            let z = State::new(theta, u, m);
            if in_u(&z, p) {
                return z;
            }
        }
    }
}

/// Random state of the bounded relaxation (rejection from a velocity ball
/// sized by the closed-form bound).
pub fn sample_in_u_m(p: &AtwoodParams, b: &BoundParams, rng: &mut impl Rng) -> State {
    let ub = u_bound(p, b);
    loop {
        let theta: f64 = rng.gen_range(-0.999..0.999);
        let u = gauss(rng) * (0.5 * ub);
        let r: f64 = rng.gen_range(0.0..1.0f64);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let omega = shift_t_inv(PlaneVec::new(phi.cos(), phi.sin()) * r.sqrt() * 0.99999);
        if let Ok(m) = m_from_omega(theta, u, omega, p) {
            let z = State::new(theta, u, m);
            if in_u_m(&z, p, b).0 {
                return z;
            }
        }
    }
}
