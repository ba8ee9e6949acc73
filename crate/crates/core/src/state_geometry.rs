//! Pointwise algebra of the constitutive set, its relaxations, and the
//! disc coordinates of the relaxed slices.
//!
//! A state `z = (θ, u, m)` collects phase, velocity and relaxed flux. The
//! constitutive set `K` fixes `|θ| = 1, m = θ u`; the open relaxation `U`
//! is the disc bundle
//! `|2 (1 - θA) (m - θu) + (1 - θ²)(Au + i)| < (1 - θ²) |Au + i|`,
//! which pinches where `Au + i = 0`. The bounded relaxation `U_M` adds a
//! half-plane and two ball constraints. Membership predicates use exact
//! floating comparisons; the signed-margin accessors are what tests should
//! combine with tolerances.

use crate::atwood::{AtwoodParams, BoundParams};
use crate::error::{Error, Result};
use crate::plane::{self, PlaneVec};

/// Relative threshold below which `Au + i` counts as pinched.
pub const PINCH_TOL: f64 = 1e-14;
/// Relative tolerance on `|m - θu|` used by the closed membership test at
/// the pinch and at `|θ| = 1`.
pub const CLOSURE_TOL: f64 = 1e-12;

/// A point of the differential inclusion: phase, velocity, relaxed flux.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub theta: f64,
    pub u: PlaneVec,
    pub m: PlaneVec,
}

impl State {
    pub const fn new(theta: f64, u: PlaneVec, m: PlaneVec) -> Self {
        Self { theta, u, m }
    }

    /// `Au + i`, the quantity whose vanishing pinches the relaxation.
    pub fn au_i(&self, p: &AtwoodParams) -> PlaneVec {
        self.u * p.atwood + plane::I
    }

    /// `m - θu`, the deviation from the constitutive relation.
    pub fn deviation(&self) -> PlaneVec {
        self.m - self.u * self.theta
    }

    pub fn is_pinched(&self, p: &AtwoodParams) -> bool {
        self.au_i(p).norm() <= PINCH_TOL * (1.0 + self.u.norm())
    }
}

impl std::ops::Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State::new(self.theta + o.theta, self.u + o.u, self.m + o.m)
    }
}

impl std::ops::Sub for State {
    type Output = State;
    fn sub(self, o: State) -> State {
        State::new(self.theta - o.theta, self.u - o.u, self.m - o.m)
    }
}

impl std::ops::Mul<f64> for State {
    type Output = State;
    fn mul(self, s: f64) -> State {
        State::new(self.theta * s, self.u * s, self.m * s)
    }
}

/// Disc coordinates of a state: `omega` in the shifted disc (the slice ball
/// of `U`), `sigma_minus`/`sigma_plus` in the unit discs of the two outer
/// balls of `U_M`.
#[derive(Debug, Clone, Copy)]
pub struct SliceCoords {
    pub omega: PlaneVec,
    pub sigma_minus: PlaneVec,
    pub sigma_plus: PlaneVec,
}

/// The shift `T ω = 2ω + 1` mapping the shifted disc onto the unit disc.
pub fn shift_t(omega: PlaneVec) -> PlaneVec {
    omega * 2.0 + plane::ONE
}

/// Inverse shift, `ω = (ζ - 1) / 2`.
pub fn shift_t_inv(zeta: PlaneVec) -> PlaneVec {
    (zeta - plane::ONE) * 0.5
}

/// Maps applied by [`disc_transport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscMap {
    /// `ω ↦ 2ω + 1`.
    Shift,
    /// `ζ ↦ (ζ - 1) / 2`.
    ShiftInv,
    /// The shifted-disc automorphism `φ_b(ω) = (1 - b) ω / (1 + ω b)`.
    Mobius,
}

/// Applies one of the disc maps. For `Mobius` the parameter `b` must lie in
/// the open unit disc and `1 + ω b` must not vanish.
pub fn disc_transport(b: PlaneVec, omega: PlaneVec, map: DiscMap) -> Result<PlaneVec> {
    match map {
        DiscMap::Shift => Ok(shift_t(omega)),
        DiscMap::ShiftInv => Ok(shift_t_inv(omega)),
        DiscMap::Mobius => {
            if b.norm() >= 1.0 {
                return Err(Error::Domain(format!(
                    "Mobius parameter must lie in the open unit disc, |b| = {}",
                    b.norm()
                )));
            }
            let den = plane::ONE + omega * b;
            ((plane::ONE - b) * omega)
                .cdiv(den)
                .ok_or_else(|| Error::Singular("1 + ω b = 0 in disc automorphism".into()))
        }
    }
}

/// Determinant of the linear system evaluated on a state:
/// `-θ u · (u + A m + θ i)`.
pub fn det_t(z: &State, p: &AtwoodParams) -> f64 {
    -z.theta * z.u.dot(z.u + z.m * p.atwood + plane::I * z.theta)
}

/// Power balance `P(z) = u · (u + A m + θ i)`.
pub fn power_balance(z: &State, p: &AtwoodParams) -> f64 {
    z.u.dot(z.u + z.m * p.atwood + plane::I * z.theta)
}

/// The pair `(f, g)` controlling membership in the relaxation:
///
/// `f(z) = |2 (1-θA)(m-θu) + (1-θ²)(Au+i)| - (1-θ²) |Au+i|`,
/// `g(z) = ((1-θA)(m-θu) + (1-θ²)(Au+i)) · (m-θu)`.
///
/// Both are negative exactly on the open relaxation, zero on its boundary.
/// They are linked by `4 (1-θA) g = f (f + 2 (1-θ²) |Au+i|)`.
pub fn relaxation_functionals(z: &State, p: &AtwoodParams) -> (f64, f64) {
    let one_m_ta = 1.0 - z.theta * p.atwood;
    let one_m_t2 = 1.0 - z.theta * z.theta;
    let dev = z.deviation();
    let aui = z.au_i(p);
    let f = (dev * (2.0 * one_m_ta) + aui * one_m_t2).norm() - one_m_t2 * aui.norm();
    let g = (dev * one_m_ta + aui * one_m_t2).dot(dev);
    (f, g)
}

/// Signed slack of the open-relaxation inequality; negative inside.
pub fn u_margin(z: &State, p: &AtwoodParams) -> f64 {
    relaxation_functionals(z, p).0
}

/// Distance-flavoured margin for the constitutive set:
/// `max(||θ| - 1|, |m - θu|)`.
pub fn k_margin(z: &State) -> f64 {
    (z.theta.abs() - 1.0).abs().max(z.deviation().norm())
}

/// `b_A(z) = u + A m + θ i + A i`.
pub fn b_vec(z: &State, p: &AtwoodParams) -> PlaneVec {
    z.u + z.m * p.atwood + plane::I * (z.theta + p.atwood)
}

/// `B_A(z) = 4 u · b_A(z)`, the quantity capped by `M² - 1`.
pub fn b_quadratic(z: &State, p: &AtwoodParams) -> f64 {
    4.0 * z.u.dot(b_vec(z, p))
}

/// Membership in the constitutive set `K`: `|θ| = 1` and `m = θ u`
/// (within [`CLOSURE_TOL`]).
pub fn in_k(z: &State) -> bool {
    let scale = 1.0 + z.u.norm();
    (z.theta.abs() - 1.0).abs() <= CLOSURE_TOL && z.deviation().norm() <= CLOSURE_TOL * scale
}

/// Membership in the capped constitutive set: additionally
/// `B_A(z) <= M² - 1`.
pub fn in_k_m(z: &State, p: &AtwoodParams, b: &BoundParams) -> bool {
    in_k(z) && b_quadratic(z, p) <= b.m * b.m - 1.0 + CLOSURE_TOL
}

/// Membership in the open relaxation. Strict inequality, exact floating
/// comparison; false at the pinch and at `|θ| = 1`.
pub fn in_u(z: &State, p: &AtwoodParams) -> bool {
    if z.theta.abs() >= 1.0 || z.is_pinched(p) {
        return false;
    }
    u_margin(z, p) < 0.0
}

/// Membership in the closure of the relaxation. At the pinch or at
/// `|θ| = 1` the closure forces `m = θ u`.
pub fn in_u_closed(z: &State, p: &AtwoodParams) -> bool {
    if z.theta.abs() > 1.0 {
        return false;
    }
    if z.theta.abs() >= 1.0 || z.is_pinched(p) {
        return z.deviation().norm() <= CLOSURE_TOL * (1.0 + z.u.norm());
    }
    u_margin(z, p) <= 0.0
}

/// Signed margins of the four inequalities cutting out the bounded
/// relaxation `U_M`; all negative inside.
///
/// Order: the slice-disc inequality, the half-plane `B_A(z) < M² - 1`, the
/// lower ball, the upper ball.
pub fn u_m_margins(z: &State, p: &AtwoodParams, b: &BoundParams) -> [f64; 4] {
    let dev_disc = u_margin(z, p);
    let half_plane = b_quadratic(z, p) - (b.m * b.m - 1.0);
    let lower = (z.deviation_pm(false)).norm() - b.m_minus * (1.0 - z.theta);
    let upper = (z.deviation_pm(true)).norm() - b.m_plus * (1.0 + z.theta);
    [dev_disc, half_plane, lower, upper]
}

impl State {
    /// `2 (m ± u) + (1 ± θ) i`, the recentred coordinates of the outer balls.
    fn deviation_pm(&self, plus: bool) -> PlaneVec {
        if plus {
            (self.m + self.u) * 2.0 + plane::I * (1.0 + self.theta)
        } else {
            (self.m - self.u) * 2.0 + plane::I * (1.0 - self.theta)
        }
    }
}

/// Membership in the bounded relaxation together with the per-inequality
/// verdicts (true = inequality holds strictly).
pub fn in_u_m(z: &State, p: &AtwoodParams, b: &BoundParams) -> (bool, [bool; 4]) {
    let margins = u_m_margins(z, p, b);
    let mask = [
        in_u(z, p),
        margins[1] < 0.0,
        margins[2] < 0.0,
        margins[3] < 0.0,
    ];
    (mask.iter().all(|&h| h), mask)
}

/// Shifted-disc coordinate of a state: the solution `ω` of
/// `(1 + ω θ A)(m - θu) = (1 - θ²)(Au + i) ω`.
///
/// `|Tω| < 1` iff the state lies in the open relaxation, `|Tω| = 1` on its
/// boundary. Requires `|θ| < 1` and a non-pinched velocity.
pub fn omega_of(z: &State, p: &AtwoodParams) -> Result<PlaneVec> {
    if z.theta.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "disc coordinate needs |θ| < 1, got θ = {}",
            z.theta
        )));
    }
    if z.is_pinched(p) {
        return Err(Error::Domain("disc coordinate undefined at the pinch".into()));
    }
    let dev = z.deviation();
    let one_m_t2 = 1.0 - z.theta * z.theta;
    let den = z.au_i(p) * one_m_t2 - dev * (z.theta * p.atwood);
    dev.cdiv(den)
        .ok_or_else(|| Error::Singular("zero denominator in disc coordinate".into()))
}

/// Unit-disc coordinates `σ_±` of the two outer balls:
/// `σ_± = (2 (m ± u) + (1 ± θ) i) / (M_± (1 ± θ))`.
pub fn sigma_pm(z: &State, b: &BoundParams) -> Result<SliceCoordsSigma> {
    if z.theta.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "ball coordinates degenerate at |θ| = 1, got θ = {}",
            z.theta
        )));
    }
    Ok(SliceCoordsSigma {
        sigma_minus: z.deviation_pm(false) / (b.m_minus * (1.0 - z.theta)),
        sigma_plus: z.deviation_pm(true) / (b.m_plus * (1.0 + z.theta)),
    })
}

/// The `σ_±` pair on its own (callers that also need `ω` use
/// [`slice_coords`]).
#[derive(Debug, Clone, Copy)]
pub struct SliceCoordsSigma {
    pub sigma_minus: PlaneVec,
    pub sigma_plus: PlaneVec,
}

/// All three disc coordinates of a state.
pub fn slice_coords(z: &State, p: &AtwoodParams, b: &BoundParams) -> Result<SliceCoords> {
    let omega = omega_of(z, p)?;
    let s = sigma_pm(z, b)?;
    Ok(SliceCoords {
        omega,
        sigma_minus: s.sigma_minus,
        sigma_plus: s.sigma_plus,
    })
}

/// Upper bound on `|u|` over the bounded relaxation:
/// `((1+|A|) + sqrt((1+|A|)² + (1-|A|)(M²-1))) / (2 (1-|A|))`.
pub fn u_bound(p: &AtwoodParams, b: &BoundParams) -> f64 {
    let a = p.atwood.abs();
    ((1.0 + a) + ((1.0 + a) * (1.0 + a) + (1.0 - a) * (b.m * b.m - 1.0)).sqrt())
        / (2.0 * (1.0 - a))
}

/// Reconstructs `m` from a shifted-disc coordinate:
/// `m = θu + (1-θ²)(Au+i) ω / (1 + ω θ A)`.
pub fn m_from_omega(theta: f64, u: PlaneVec, omega: PlaneVec, p: &AtwoodParams) -> Result<PlaneVec> {
    let aui = u * p.atwood + plane::I;
    let num = aui * (1.0 - theta * theta) * omega;
    let den = plane::ONE + omega * (theta * p.atwood);
    let dev = num
        .cdiv(den)
        .ok_or_else(|| Error::Singular("1 + ω θ A = 0".into()))?;
    Ok(u * theta + dev)
}
