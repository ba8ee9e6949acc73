//! Profile subsolution on a space-time grid, weak-form residuals,
//! admissibility checks, averaged comparisons and the interface regime
//! classifier.
//!
//! The subsolution has zero velocity, a phase depending on `(t, x2)` only
//! and a vertical flux slaved to the phase; inside the mixing wedge it
//! takes values in the open relaxation, outside it is exact. Weak forms
//! are tested against randomized tensor bumps sampled on the grid and
//! differentiated discretely: with the discrete gradients the two
//! stationary constraints telescope to round-off, while the transport form
//! measures the conservation-law residual plus an `O(Δt)` time-boundary
//! term.

use crate::atwood::AtwoodParams;
use crate::entropy_claw::{m_breve, mean_interval, theta_exact, EntropyProfile};
use crate::error::{Error, Result};
use crate::field::{Field2, Grid3};
use crate::plane::{self, PlaneVec};
use crate::state_geometry::{relaxation_functionals, State};
use crate::wave_cone::Cutoff;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Profile subsolution sampled on a space-time grid. The phase is
/// `x1`-independent by construction; `patches` lets tests corrupt
/// individual cells.
#[derive(Debug, Clone)]
pub struct SubsolutionField {
    pub grid: Grid3,
    pub alpha: f64,
    pub params: AtwoodParams,
    /// Row phase, indexed `k * ny + j`.
    theta: Vec<f64>,
    patches: Vec<(usize, usize, usize, State)>,
}

impl SubsolutionField {
    pub fn theta_row(&self, k: usize, j: usize) -> f64 {
        self.theta[k * self.grid.ny + j]
    }

    /// State at a cell, honoring patches.
    pub fn z_at(&self, k: usize, i: usize, j: usize) -> State {
        for &(pk, pi, pj, s) in &self.patches {
            if pk == k && pi == i && pj == j {
                return s;
            }
        }
        let th = self.theta_row(k, j);
        State::new(th, plane::ZERO, m_breve(th, &self.params, self.alpha))
    }

    /// Mixing-wedge membership of a `(t, x2)` cell.
    pub fn in_mix(&self, k: usize, j: usize) -> bool {
        let t = self.grid.t(k);
        let y = self.grid.y(j);
        y > -self.alpha * self.params.c_minus * t && y < self.alpha * self.params.c_plus * t
    }

    /// Flat initial phase.
    pub fn theta0(&self, y: f64) -> f64 {
        if y > 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn add_patch(&mut self, k: usize, i: usize, j: usize, z: State) {
        self.patches.push((k, i, j, z));
    }

    pub fn profile(&self) -> EntropyProfile {
        EntropyProfile {
            params: self.params,
            alpha: self.alpha,
        }
    }
}

/// Samples the profile subsolution on a grid whose time slices must be
/// positive. The mixing speed must lie in `(0, 1]`; strict interior
/// admissibility needs `α < 1`.
pub fn build_subsolution(p: &AtwoodParams, alpha: f64, grid: Grid3) -> Result<SubsolutionField> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!(
            "mixing speed must lie in (0, 1], got {alpha}"
        )));
    }
    if grid.t0 <= 0.0 {
        return Err(Error::Config("time slices must be positive".into()));
    }
    let prof = EntropyProfile {
        params: *p,
        alpha,
    };
    let mut theta = Vec::with_capacity(grid.nt * grid.ny);
    for k in 0..grid.nt {
        for j in 0..grid.ny {
            theta.push(theta_exact(&prof, grid.t(k), grid.y(j))?);
        }
    }
    Ok(SubsolutionField {
        grid,
        alpha,
        params: *p,
        theta,
        patches: Vec::new(),
    })
}

/// Randomized family of tensor test bumps: `per_scale` bumps at each of
/// three dyadic scales. Spatial supports keep a 10% margin from the box
/// edge so that sampled bumps vanish identically on the outermost cells of
/// any reasonable grid; time supports may stick out through the ends. The
/// seed pins the family independently of any grid.
pub fn test_family(grid: &Grid3, seed: u64, per_scale: usize) -> Vec<Cutoff> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t_span = grid.dt * grid.nt as f64;
    let x_span = grid.dx * grid.nx as f64;
    let y_span = grid.dy * grid.ny as f64;
    let (ta, xa, ya) = (
        grid.t0 - 0.5 * grid.dt,
        grid.x0 - 0.5 * grid.dx,
        grid.y0 - 0.5 * grid.dy,
    );
    let mut out = Vec::new();
    for scale in 0..3 {
        let shrink = 0.5f64.powi(scale);
        for _ in 0..per_scale {
            let radius = [
                0.6 * t_span * shrink,
                0.25 * x_span * shrink,
                0.25 * y_span * shrink,
            ];
            let xm = 0.1 * x_span;
            let ym = 0.1 * y_span;
            let center = [
                ta + rng.gen_range(0.0..1.0) * t_span,
                xa + radius[1] + xm + rng.gen_range(0.0..1.0) * (x_span - 2.0 * (radius[1] + xm)),
                ya + radius[2] + ym + rng.gen_range(0.0..1.0) * (y_span - 2.0 * (radius[2] + ym)),
            ];
            out.push(Cutoff::Bump { center, radius });
        }
    }
    out
}

/// Maximum absolute residuals `(r1, r2, r3)` of the three weak forms over
/// a bump family: transport (with initial/final boundary terms),
/// incompressibility, and the curl-free constraint.
///
/// Time derivatives of the test functions are exact (the bumps are
/// polynomial); spatial gradients are discrete, which lets the stationary
/// forms telescope to round-off. The transport boundary term at the final
/// time can only be evaluated half a cell early, so `r1` carries an
/// honest `O(Δt)` contribution.
pub fn weak_residuals(field: &SubsolutionField, family: &[Cutoff]) -> (f64, f64, f64) {
    let g = field.grid;
    let cell_a = g.dx * g.dy;
    let cell_v = cell_a * g.dt;
    let t_end = g.t0 + (g.nt as f64 - 0.5) * g.dt;
    let mut r1 = 0.0f64;
    let r2 = 0.0f64; // u ≡ 0 makes the incompressibility form vanish identically
    let mut r3 = 0.0f64;
    for bump in family {
        // Factor the tensor bump into its axis profiles.
        let (c, r) = match bump {
            Cutoff::Bump { center, radius } => (*center, *radius),
            Cutoff::One => ([0.0; 3], [1.0; 3]),
        };
        let axis = |v: f64, ax: usize| -> f64 {
            let s = (v - c[ax]) / r[ax];
            if s.abs() >= 1.0 {
                0.0
            } else {
                let q = 1.0 - s * s;
                q * q * q
            }
        };
        let axis_deriv = |v: f64, ax: usize| -> f64 {
            let s = (v - c[ax]) / r[ax];
            if s.abs() >= 1.0 {
                0.0
            } else {
                let q = 1.0 - s * s;
                -6.0 * s * q * q / r[ax]
            }
        };
        let bt: Vec<f64> = (0..g.nt).map(|k| axis(g.t(k), 0)).collect();
        let bx: Vec<f64> = (0..g.nx).map(|i| axis(g.x(i), 1)).collect();
        let by: Vec<f64> = (0..g.ny).map(|j| axis(g.y(j), 2)).collect();
        let sum_bx: f64 = bx.iter().sum();
        let dbt = |k: usize| -> f64 { axis_deriv(g.t(k), 0) };
        let dby = |j: usize| -> f64 {
            let up = if j + 1 < g.ny { by[j + 1] } else { 0.0 };
            let dn = if j > 0 { by[j - 1] } else { 0.0 };
            (up - dn) / (2.0 * g.dy)
        };
        // Transport form.
        let mut volume = 0.0;
        for k in 0..g.nt {
            let mut row_theta = 0.0;
            let mut row_flux = 0.0;
            for j in 0..g.ny {
                let th = field.theta_row(k, j);
                let m2 = m_breve(th, &field.params, field.alpha).y;
                row_theta += th * by[j];
                row_flux += m2 * dby(j);
            }
            volume += (dbt(k) * row_theta + bt[k] * row_flux) * sum_bx * cell_v;
        }
        let bt_end = axis(t_end, 0);
        let bt_zero = axis(g.t0 - 0.5 * g.dt, 0);
        let mut final_term = 0.0;
        let mut initial_term = 0.0;
        for j in 0..g.ny {
            final_term += field.theta_row(g.nt - 1, j) * by[j];
            initial_term += field.theta0(g.y(j)) * by[j];
        }
        let boundary =
            (bt_end * final_term - bt_zero * initial_term) * sum_bx * cell_a;
        r1 = r1.max((volume - boundary).abs());
        // Curl-free form at a few time slices: the only surviving term is
        // w2(x2) Σ_i Dx[bx](i), which telescopes to zero.
        let dbx_sum: f64 = {
            let mut acc = 0.0;
            for i in 0..g.nx {
                let up = if i + 1 < g.nx { bx[i + 1] } else { 0.0 };
                let dn = if i > 0 { bx[i - 1] } else { 0.0 };
                acc += (up - dn) / (2.0 * g.dx);
            }
            acc
        };
        for k in [0, g.nt / 2, g.nt - 1] {
            let mut slice = 0.0;
            for j in 0..g.ny {
                let th = field.theta_row(k, j);
                let w2 = field.params.atwood * m_breve(th, &field.params, field.alpha).y + th;
                slice += w2 * by[j] * dbx_sum * cell_a;
            }
            r3 = r3.max(slice.abs());
        }
    }
    (r1, r2, r3)
}

/// Admissibility report: interior strictness, exterior exactness.
#[derive(Debug, Clone, Copy)]
pub struct AdmissibilityReport {
    /// Maximum of the membership functional over mixing cells
    /// (strictness needs this `< 0`).
    pub max_f_inside: f64,
    /// Maximum of `max(|m̆|, ||θ̆| - 1|)` over exterior cells.
    pub worst_outside: f64,
    pub mix_cells: usize,
    pub strict: bool,
    pub closed: bool,
    pub admissible: bool,
}

/// Checks interior membership and exterior exactness pointwise.
pub fn admissibility(field: &SubsolutionField, p: &AtwoodParams) -> AdmissibilityReport {
    let g = field.grid;
    let mut max_f = f64::NEG_INFINITY;
    let mut worst_out = 0.0f64;
    let mut mix_cells = 0usize;
    for k in 0..g.nt {
        for j in 0..g.ny {
            // The x1-independent core: one representative cell per row.
            let z = field.z_at(k, usize::MAX, j);
            if field.in_mix(k, j) {
                mix_cells += g.nx;
                let (f, _) = relaxation_functionals(&z, p);
                max_f = max_f.max(f);
            } else {
                worst_out = worst_out
                    .max(z.m.norm())
                    .max((z.theta.abs() - 1.0).abs());
            }
        }
    }
    for &(k, i, j, z) in &field.patches {
        let _ = i;
        if field.in_mix(k, j) {
            let (f, _) = relaxation_functionals(&z, p);
            max_f = max_f.max(f);
        } else {
            worst_out = worst_out
                .max(z.deviation().norm())
                .max((z.theta.abs() - 1.0).abs());
        }
    }
    let strict = max_f < 0.0 && worst_out <= 1e-12;
    let closed = max_f <= 1e-12 && worst_out <= 1e-12;
    AdmissibilityReport {
        max_f_inside: max_f,
        worst_outside: worst_out,
        mix_cells,
        strict,
        closed,
        admissible: strict,
    }
}

/// Error budget: monotone caps `s`, `t` with `s(0) = t(0) = 0` and the
/// small-rectangle exponent `γ ∈ [0, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct ErrorBudget {
    pub s: fn(f64) -> f64,
    pub t: fn(f64) -> f64,
    pub gamma: f64,
}

impl Default for ErrorBudget {
    fn default() -> Self {
        fn cap(r: f64) -> f64 {
            r.clamp(0.0, 1.0)
        }
        Self {
            s: cap,
            t: cap,
            gamma: 0.0,
        }
    }
}

/// Axis-aligned rectangle in the plane.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub x1: (f64, f64),
    pub x2: (f64, f64),
}

impl Rect {
    pub fn area(&self) -> f64 {
        (self.x1.1 - self.x1.0) * (self.x2.1 - self.x2.0)
    }
}

/// Evaluates the budget `S(1 ∧ sup dist)·T(t)·(1 ∧ |R|^γ)/|R|` for a
/// rectangle inside the mixing band at time `t`; the band edges are taken
/// from the discrete mask of the field.
pub fn error_budget(
    eb: &ErrorBudget,
    field: &SubsolutionField,
    t: f64,
    rect: &Rect,
) -> Result<f64> {
    let g = field.grid;
    let k = ((t - g.t0) / g.dt).round().clamp(0.0, g.nt as f64 - 1.0) as usize;
    // Discrete band edges at slice k.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..g.ny {
        if field.in_mix(k, j) {
            lo = lo.min(g.y(j) - 0.5 * g.dy);
            hi = hi.max(g.y(j) + 0.5 * g.dy);
        }
    }
    if !(rect.x2.0 >= lo && rect.x2.1 <= hi) {
        return Err(Error::Domain(format!(
            "rectangle [{}, {}] escapes the mixing band [{lo}, {hi}]",
            rect.x2.0, rect.x2.1
        )));
    }
    // sup over the rectangle of the distance to the band boundary.
    let mid = 0.5 * (lo + hi);
    let best_x2 = mid.clamp(rect.x2.0, rect.x2.1);
    let dist = (best_x2 - lo).min(hi - best_x2);
    let area = rect.area();
    Ok((eb.s)(dist.min(1.0)) * (eb.t)(t) * area.powf(eb.gamma).min(1.0) / area)
}

/// Observable compared over rectangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareFn {
    /// The phase itself.
    Theta,
    /// The power balance `u·(u + A m + θ i)`; zero for rest fields.
    Power,
}

#[derive(Debug, Clone, Copy)]
pub struct RectCompare {
    pub rect: Rect,
    pub budget: f64,
    pub avg_diff: f64,
    /// `budget - |avg_diff|`; nonnegative when the comparison passes.
    pub margin: f64,
}

/// Compares rectangle averages of a sampled phase field against the
/// subsolution.
pub fn rectangle_compare(
    theta_field: &Field2<f64>,
    field: &SubsolutionField,
    t: f64,
    rects: &[Rect],
    func: CompareFn,
    eb: &ErrorBudget,
) -> Result<Vec<RectCompare>> {
    let fg = theta_field.grid;
    let g = field.grid;
    let k = ((t - g.t0) / g.dt).round().clamp(0.0, g.nt as f64 - 1.0) as usize;
    let mut out = Vec::with_capacity(rects.len());
    for rect in rects {
        let mut sum_sample = 0.0;
        let mut n_sample = 0usize;
        for j in 0..fg.ny {
            let y = fg.y(j);
            if y < rect.x2.0 || y > rect.x2.1 {
                continue;
            }
            for i in 0..fg.nx {
                let x = fg.x(i);
                if x < rect.x1.0 || x > rect.x1.1 {
                    continue;
                }
                let v = *theta_field.at(i, j);
                sum_sample += match func {
                    CompareFn::Theta => v,
                    CompareFn::Power => 0.0,
                };
                n_sample += 1;
            }
        }
        let avg_sample = if n_sample == 0 {
            0.0
        } else {
            sum_sample / n_sample as f64
        };
        let mut sum_sub = 0.0;
        let mut n_sub = 0usize;
        for j in 0..g.ny {
            let y = g.y(j);
            if y < rect.x2.0 || y > rect.x2.1 {
                continue;
            }
            let th = field.theta_row(k, j);
            sum_sub += match func {
                CompareFn::Theta => th,
                CompareFn::Power => 0.0,
            };
            n_sub += 1;
        }
        let avg_sub = if n_sub == 0 { 0.0 } else { sum_sub / n_sub as f64 };
        let budget = error_budget(eb, field, t, rect)?;
        let avg_diff = avg_sample - avg_sub;
        out.push(RectCompare {
            rect: *rect,
            budget,
            avg_diff,
            margin: budget - avg_diff.abs(),
        });
    }
    Ok(out)
}

/// Mean of a sampled phase over a wide band `S × tL` against the
/// closed-form interval mean of the profile. Returns
/// `(sample mean, closed form, |difference|)`.
pub fn line_average_compare(
    theta_field: &Field2<f64>,
    field: &SubsolutionField,
    t: f64,
    l: (f64, f64),
) -> Result<(f64, f64, f64)> {
    let fg = theta_field.grid;
    let (ylo, yhi) = (t * l.0, t * l.1);
    let mut acc = 0.0;
    let mut n = 0usize;
    for j in 0..fg.ny {
        let y = fg.y(j);
        if y < ylo || y > yhi {
            continue;
        }
        for i in 0..fg.nx {
            acc += *theta_field.at(i, j);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Domain("band contains no sample cells".into()));
    }
    let sample = acc / n as f64;
    let prof = EntropyProfile {
        params: field.params,
        alpha: field.alpha * t,
    };
    // ⟨L⟩ is the mean of Θ(α, ·) over L scaled to time t; equivalently the
    // mean of Θ(αt, ·) over tL.
    let closed = mean_interval(&prof, l.0 * t, l.1 * t)?;
    Ok((sample, closed, (sample - closed).abs()))
}

/// Report of the maximal-mixing inequalities.
#[derive(Debug, Clone, Copy)]
pub struct MaxmixReport {
    /// Minimum over cells of `m̆₂ + (1 - θ̆²)/(1 - θ̆ A)`.
    pub min_margin: f64,
    /// True when some interior cell attains the bound to 1e-12.
    pub equality_interior: bool,
    /// Phase is `±1` outside the maximal wedge `|x2| <= c± t`.
    pub support_ok: bool,
}

/// Pointwise check of the flux lower bound and the maximal support wedge.
pub fn maxmix_check(field: &SubsolutionField, p: &AtwoodParams) -> MaxmixReport {
    let g = field.grid;
    let mut min_margin = f64::INFINITY;
    let mut equality = false;
    let mut support_ok = true;
    for k in 0..g.nt {
        let t = g.t(k);
        for j in 0..g.ny {
            let th = field.theta_row(k, j);
            let m2 = m_breve(th, p, field.alpha).y;
            let bound = -(1.0 - th * th) / (1.0 - th * p.atwood);
            let margin = m2 - bound;
            if margin < -1e-12 {
                min_margin = min_margin.min(margin);
            }
            min_margin = min_margin.min(margin);
            if field.in_mix(k, j) && margin.abs() <= 1e-12 && th.abs() < 1.0 {
                equality = true;
            }
            let y = g.y(j);
            if (y > p.c_plus * t && (th - 1.0).abs() > 1e-12)
                || (y < -p.c_minus * t && (th + 1.0).abs() > 1e-12)
            {
                support_ok = false;
            }
        }
    }
    MaxmixReport {
        min_margin,
        equality_interior: equality,
        support_ok,
    }
}

/// Interface data: mean velocity, unit tangent, phase jump across the
/// curve.
#[derive(Debug, Clone, Copy)]
pub struct InterfacePoint {
    pub mean_velocity: PlaneVec,
    pub tangent: PlaneVec,
    pub jump: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Both strengths vanish: the pinch.
    BoundaryPinch,
    /// No vorticity, positive normal strength.
    StableLine,
    Mixing,
}

/// Vorticity and normal strengths of an interface point:
/// `ϖ + σ i = -[θ] (A ŭ + i)* ∂_s z`, with the regime read off the signs.
pub fn classify_interface(pt: &InterfacePoint, p: &AtwoodParams) -> (f64, f64, Regime) {
    let w = (pt.mean_velocity * p.atwood + plane::I).conj() * pt.tangent * (-pt.jump);
    let (varpi, sigma) = (w.x, w.y);
    let tol = 1e-12 * (1.0 + pt.mean_velocity.norm());
    let regime = if varpi.abs() + sigma.abs() <= tol {
        Regime::BoundaryPinch
    } else if varpi.abs() <= tol && sigma > 0.0 {
        Regime::StableLine
    } else {
        Regime::Mixing
    };
    (varpi, sigma, regime)
}
