//! Entropy profile of the mixing conservation law, a monotone
//! finite-volume solver for it, and the confined free-boundary evolution.
//!
//! The coarse-grained phase solves `∂_t Θ = ∂_{x2} G(Θ)` with
//! `G(Θ) = (1 - Θ²) / (1 - Θ A)`; from the flat unstable datum the unique
//! entropy solution is an explicit self-similar ramp between `-c⁻ t` and
//! `c⁺ t`. On the confined square the ramp is clipped at the walls and the
//! pile-up fronts obey a scalar ODE integrated here with classical RK4 and
//! bisection event detection for the collapse time.

use crate::atwood::AtwoodParams;
use crate::error::{Error, Result};
use crate::plane::{self, PlaneVec};

/// Closed-form entropy profile with mixing-speed parameter `alpha`.
#[derive(Debug, Clone, Copy)]
pub struct EntropyProfile {
    pub params: AtwoodParams,
    pub alpha: f64,
}

impl EntropyProfile {
    pub fn new(params: AtwoodParams, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!(
                "mixing speed must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self { params, alpha })
    }
}

/// Which of the three equivalent interior closed forms to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileForm {
    Symmetric,
    Mobility,
    Radical,
}

fn interior_value(a: f64, mobility: f64, tau: f64, x2: f64, form: ProfileForm) -> f64 {
    if a == 0.0 {
        return x2 / (2.0 * tau);
    }
    match form {
        ProfileForm::Symmetric => {
            let root = ((1.0 - a * a) * tau * (tau + a * x2)).sqrt();
            (x2 + a * tau) / (tau + a * x2 + root)
        }
        ProfileForm::Mobility => {
            let root = (mobility * tau * (tau + a * x2)).sqrt();
            (x2 - tau + root) / (tau + a * x2 + root)
        }
        ProfileForm::Radical => {
            (1.0 - ((1.0 - a * a) * tau / (tau + a * x2)).sqrt()) / a
        }
    }
}

/// Profile value `Θ_A(α t, x2)`: `±1` outside the mixing zone
/// `-α c⁻ t < x2 < α c⁺ t`, the closed form inside. Requires `t > 0`.
pub fn theta_exact(prof: &EntropyProfile, t: f64, x2: f64) -> Result<f64> {
    theta_exact_form(prof, t, x2, ProfileForm::Symmetric)
}

/// Same as [`theta_exact`] with an explicit choice of interior form.
pub fn theta_exact_form(
    prof: &EntropyProfile,
    t: f64,
    x2: f64,
    form: ProfileForm,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("profile needs t > 0, got {t}")));
    }
    let p = &prof.params;
    let tau = prof.alpha * t;
    if x2 >= p.c_plus * tau {
        return Ok(1.0);
    }
    if x2 <= -p.c_minus * tau {
        return Ok(-1.0);
    }
    Ok(interior_value(p.atwood, p.mobility, tau, x2, form).clamp(-1.0, 1.0))
}

/// Conservation-law flux `G(Θ) = (1 - Θ²) / (1 - Θ A)`.
pub fn flux(theta: f64, p: &AtwoodParams) -> f64 {
    (1.0 - theta * theta) / (1.0 - theta * p.atwood)
}

/// Interior critical point of `G` in `[-1, 1]`.
fn flux_argmax(p: &AtwoodParams) -> f64 {
    let a = p.atwood;
    if a == 0.0 {
        0.0
    } else {
        (1.0 - (1.0 - a * a).sqrt()) / a
    }
}

/// Finite-volume run configuration.
#[derive(Debug, Clone, Copy)]
pub struct ClawConfig {
    /// CFL number; must not exceed 0.45.
    pub cfl: f64,
}

impl Default for ClawConfig {
    fn default() -> Self {
        Self { cfl: 0.45 }
    }
}

/// Result of a finite-volume run: cell centres, snapshots, step size.
#[derive(Debug, Clone)]
pub struct ClawSolution {
    pub x: Vec<f64>,
    pub dx: f64,
    pub dt: f64,
    /// Snapshot times, first entry 0.
    pub times: Vec<f64>,
    /// One value vector per snapshot time.
    pub snapshots: Vec<Vec<f64>>,
}

impl ClawSolution {
    pub fn final_state(&self) -> &[f64] {
        self.snapshots.last().unwrap()
    }
}

/// Godunov flux of `F = -α G` for left/right states. `G` has a single
/// interior maximum, so `F` has a single interior minimum and the exact
/// Riemann flux reduces to endpoint and kink evaluations.
fn godunov_flux(left: f64, right: f64, alpha: f64, crit: f64, p: &AtwoodParams) -> f64 {
    let f = |v: f64| -alpha * flux(v, p);
    if left <= right {
        if left <= crit && crit <= right {
            f(crit)
        } else {
            f(left).min(f(right))
        }
    } else {
        f(left).max(f(right))
    }
}

/// Evolves the conservation law `∂_t Θ + ∂_x(-α G(Θ)) = 0` from cell
/// averages `theta0` on a uniform grid of spacing `dx`. The domain
/// truncation pins the ghost cells to the far-field values of the initial
/// datum. Snapshots are recorded at `n_snapshots` evenly spaced times
/// including the final one.
pub fn solve_claw(
    theta0: &[f64],
    dx: f64,
    x_left: f64,
    p: &AtwoodParams,
    alpha: f64,
    t_end: f64,
    cfg: &ClawConfig,
    n_snapshots: usize,
) -> Result<ClawSolution> {
    if !(cfg.cfl > 0.0 && cfg.cfl <= 0.45) {
        return Err(Error::Config(format!(
            "CFL must lie in (0, 0.45], got {}",
            cfg.cfl
        )));
    }
    if theta0.iter().any(|v| v.abs() > 1.0 + 1e-12) {
        return Err(Error::Domain("initial data must lie in [-1, 1]".into()));
    }
    let max_speed = alpha * 2.0 / (1.0 - p.atwood.abs());
    let n_steps = (t_end * max_speed / (cfg.cfl * dx)).ceil().max(1.0) as usize;
    let dt = t_end / n_steps as f64;
    let crit = flux_argmax(p);
    let n = theta0.len();
    let (ghost_lo, ghost_hi) = (theta0[0], theta0[n - 1]);
    let mut state = theta0.to_vec();
    let mut fluxes = vec![0.0f64; n + 1];
    let record_every = (n_steps / n_snapshots.max(1)).max(1);
    let mut sol = ClawSolution {
        x: (0..n).map(|i| x_left + (i as f64 + 0.5) * dx).collect(),
        dx,
        dt,
        times: vec![0.0],
        snapshots: vec![state.clone()],
    };
    for step in 1..=n_steps {
        for i in 0..=n {
            let l = if i == 0 { ghost_lo } else { state[i - 1] };
            let r = if i == n { ghost_hi } else { state[i] };
            fluxes[i] = godunov_flux(l, r, alpha, crit, p);
        }
        let lam = dt / dx;
        for i in 0..n {
            state[i] -= lam * (fluxes[i + 1] - fluxes[i]);
        }
        if step % record_every == 0 || step == n_steps {
            sol.times.push(step as f64 * dt);
            sol.snapshots.push(state.clone());
        }
    }
    Ok(sol)
}

/// Discrete Kruzhkov entropy residual of one Godunov step: for entropy
/// `|Θ - k|` with numerical entropy flux `Q(a,b) = F(a∨k, b∨k) - F(a∧k, b∧k)`
/// the per-cell residual is non-positive for a monotone scheme.
pub fn kruzhkov_residual(
    before: &[f64],
    after: &[f64],
    k: f64,
    dx: f64,
    dt: f64,
    alpha: f64,
    p: &AtwoodParams,
) -> f64 {
    let crit = flux_argmax(p);
    let n = before.len();
    let q = |a: f64, b: f64| {
        godunov_flux(a.max(k), b.max(k), alpha, crit, p)
            - godunov_flux(a.min(k), b.min(k), alpha, crit, p)
    };
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        let l = if i == 0 { before[0] } else { before[i - 1] };
        let r = if i + 1 == n { before[n - 1] } else { before[i + 1] };
        let resid = ((after[i] - k).abs() - (before[i] - k).abs()) / dt
            + (q(before[i], r) - q(l, before[i])) / dx;
        worst = worst.max(resid);
    }
    worst
}

/// Closed-form interval mean of the profile at unit time,
/// `fint_L Θ_A(α, x2) dx2 / |L|`, for `L = (l1, l2)` inside the mixing
/// zone.
pub fn mean_interval(prof: &EntropyProfile, l1: f64, l2: f64) -> Result<f64> {
    let p = &prof.params;
    let al = prof.alpha;
    if !(l1 < l2) {
        return Err(Error::Domain("need l1 < l2".into()));
    }
    if l1 < -al * p.c_minus - 1e-15 || l2 > al * p.c_plus + 1e-15 {
        return Err(Error::Domain(format!(
            "interval ({l1}, {l2}) escapes the mixing zone ({}, {})",
            -al * p.c_minus,
            al * p.c_plus
        )));
    }
    let a = p.atwood;
    if a == 0.0 {
        return Ok((l1 + l2) / (4.0 * al));
    }
    let root = |l: f64| (al + a * l).sqrt();
    Ok((1.0 - 2.0 * ((1.0 - a * a) * al).sqrt() / (root(l1) + root(l2))) / a)
}

/// Vertical relaxed flux of the profile subsolution:
/// `m̆ = -α (1 - θ²) / (1 - θ A) i`.
pub fn m_breve(theta: f64, p: &AtwoodParams, alpha: f64) -> PlaneVec {
    if theta.abs() >= 1.0 {
        return plane::ZERO;
    }
    plane::I * (-alpha * (1.0 - theta * theta) / (1.0 - theta * p.atwood))
}

/// State of the confined free boundaries: `f_±` measures how far the
/// pile-up front has travelled from the wall `x2 = ±1` (0 at contact,
/// 1 at collapse).
#[derive(Debug, Clone, Copy)]
pub struct FreeBoundaryState {
    pub t: f64,
    pub f_plus: f64,
    pub f_minus: f64,
    /// Signed interior phase mass `∫ Θ dx2` over `[-1, 1]`.
    pub mass: f64,
}

/// Full confined-run result.
#[derive(Debug, Clone)]
pub struct ConfinedRun {
    pub trajectory: Vec<FreeBoundaryState>,
    pub t_collapse_plus: f64,
    pub t_collapse_minus: f64,
}

/// Antiderivative of the interior profile at time `t` (unit mixing speed).
fn profile_antiderivative(p: &AtwoodParams, t: f64, x2: f64) -> f64 {
    let a = p.atwood;
    if a == 0.0 {
        x2 * x2 / (4.0 * t)
    } else {
        (a * x2 - 2.0 * ((1.0 - a * a) * t * (t + a * x2)).sqrt()) / (a * a)
    }
}

/// Front velocity of the `±` pile-up boundary at `(t, f)`.
fn front_rate(p: &AtwoodParams, plus: bool, t: f64, f: f64) -> f64 {
    let x = if plus { 1.0 - f } else { -(1.0 - f) };
    let prof = EntropyProfile {
        params: *p,
        alpha: 1.0,
    };
    let theta = theta_exact(&prof, t, x).unwrap();
    if plus {
        (1.0 - theta) / (1.0 - theta * p.atwood)
    } else {
        (1.0 + theta) / (1.0 - theta * p.atwood)
    }
}

fn rk4_step(p: &AtwoodParams, plus: bool, t: f64, f: f64, dt: f64) -> f64 {
    let k1 = front_rate(p, plus, t, f);
    let k2 = front_rate(p, plus, t + 0.5 * dt, f + 0.5 * dt * k1);
    let k3 = front_rate(p, plus, t + 0.5 * dt, f + 0.5 * dt * k2);
    let k4 = front_rate(p, plus, t + dt, f + dt * k3);
    f + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Interior mass of the confined profile at time `t` given the two front
/// positions (`None` before wall contact on that side).
fn confined_mass(p: &AtwoodParams, t: f64, f_plus: Option<f64>, f_minus: Option<f64>) -> f64 {
    // Segment boundaries: -1 .. lower edge .. upper edge .. 1, with the
    // self-similar interior in between.
    let upper = match f_plus {
        Some(f) => 1.0 - f,
        None => (p.c_plus * t).min(1.0),
    };
    let lower = match f_minus {
        Some(f) => -(1.0 - f),
        None => (-p.c_minus * t).max(-1.0),
    };
    // Above `upper`: -1 after contact, +1 before.
    let top = if f_plus.is_some() {
        -(1.0 - upper)
    } else {
        1.0 - upper
    };
    let bottom = if f_minus.is_some() {
        (lower - (-1.0)) * 1.0
    } else {
        -(lower + 1.0)
    };
    let interior = profile_antiderivative(p, t, upper) - profile_antiderivative(p, t, lower);
    top + bottom + interior
}

/// Integrates the confined free boundaries with RK4 from wall contact and
/// reports the collapse times `f_± = 1` (bisection inside the bracketing
/// step). Sampled states include the interior mass, which stays at zero.
pub fn confined_run(p: &AtwoodParams, dt: f64, n_outputs: usize) -> Result<ConfinedRun> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    let contact = [1.0 / p.c_plus, 1.0 / p.c_minus];
    let mut collapse = [f64::NAN, f64::NAN];
    let mut fronts: Vec<(bool, Vec<(f64, f64)>)> = Vec::new();
    for (side, plus) in [(0usize, true), (1usize, false)] {
        let t0 = contact[side];
        let mut t = t0;
        let mut f = 0.0f64;
        let mut path = vec![(t, f)];
        loop {
            let f_next = rk4_step(p, plus, t, f, dt);
            if f_next >= 1.0 {
                // Bisect the step for the crossing time.
                let (mut lo, mut hi) = (0.0f64, dt);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if rk4_step(p, plus, t, f, mid) >= 1.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo < 1e-14 {
                        break;
                    }
                }
                collapse[side] = t + 0.5 * (lo + hi);
                path.push((collapse[side], 1.0));
                break;
            }
            t += dt;
            f = f_next;
            path.push((t, f));
            if t > t0 + 1e7 * dt {
                return Err(Error::Config("front failed to collapse".into()));
            }
        }
        fronts.push((plus, path));
    }
    let t_end = collapse[0].max(collapse[1]);
    let sample = |path: &[(f64, f64)], t: f64, t0: f64| -> Option<f64> {
        if t < t0 {
            return None;
        }
        let idx = ((t - t0) / dt) as usize;
        if idx + 1 >= path.len() {
            return Some(path.last().unwrap().1.min(1.0));
        }
        let (ta, fa) = path[idx];
        let (tb, fb) = path[idx + 1];
        if tb > ta {
            Some(fa + (fb - fa) * (t - ta) / (tb - ta))
        } else {
            Some(fa)
        }
    };
    let mut trajectory = Vec::with_capacity(n_outputs + 1);
    for k in 0..=n_outputs {
        let t = t_end * k as f64 / n_outputs as f64;
        if t <= 0.0 {
            continue;
        }
        let fp = sample(&fronts[0].1, t, contact[0]);
        let fm = sample(&fronts[1].1, t, contact[1]);
        let mass = confined_mass(p, t, fp, fm);
        trajectory.push(FreeBoundaryState {
            t,
            f_plus: fp.unwrap_or(0.0),
            f_minus: fm.unwrap_or(0.0),
            mass,
        });
    }
    Ok(ConfinedRun {
        trajectory,
        t_collapse_plus: collapse[0],
        t_collapse_minus: collapse[1],
    })
}

/// Numeric property report of the profile.
#[derive(Debug, Clone, Copy)]
pub struct ProfileProps {
    pub edge_continuity: f64,
    pub min_slope: f64,
    /// Maximum of `sign(A) * second_difference`; concavity for `A > 0`
    /// means this stays nonpositive.
    pub max_signed_curvature: f64,
    pub self_similarity_err: f64,
    pub antisymmetry_err: f64,
}

/// Samples monotonicity, curvature sign, self-similarity and antisymmetry
/// of the profile on a grid.
pub fn profile_props(prof: &EntropyProfile) -> Result<ProfileProps> {
    let p = &prof.params;
    let mirror = EntropyProfile {
        params: crate::atwood::make_atwood(-p.atwood)?,
        alpha: prof.alpha,
    };
    let n = 400;
    let mut edge = 0.0f64;
    let mut min_slope = f64::INFINITY;
    let mut max_curv = f64::NEG_INFINITY;
    let mut selfsim = 0.0f64;
    let mut antisym = 0.0f64;
    for &t in &[0.5, 1.0, 2.3] {
        let zone = (-prof.alpha * p.c_minus * t, prof.alpha * p.c_plus * t);
        let h = (zone.1 - zone.0) / n as f64;
        for i in 1..n {
            let x = zone.0 + i as f64 * h;
            let v = theta_exact(prof, t, x)?;
            let vm = theta_exact(prof, t, x - h)?;
            let vp = theta_exact(prof, t, x + h)?;
            min_slope = min_slope.min((vp - vm) / (2.0 * h));
            if i > 1 && i < n - 1 {
                max_curv = max_curv.max(p.atwood.signum() * (vp - 2.0 * v + vm));
            }
            selfsim = selfsim.max((v - theta_exact(prof, 2.0 * t, 2.0 * x / 1.0)?).abs());
            antisym = antisym.max((theta_exact(&mirror, t, x)? + theta_exact(prof, t, -x)?).abs());
        }
        edge = edge
            .max((theta_exact(prof, t, zone.1)? - 1.0).abs())
            .max((theta_exact(prof, t, zone.0)? + 1.0).abs());
    }
    Ok(ProfileProps {
        edge_continuity: edge,
        min_slope,
        max_signed_curvature: max_curv,
        self_similarity_err: selfsim,
        antisymmetry_err: antisym,
    })
}
