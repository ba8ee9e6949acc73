//! Acceptance suite: one test per release criterion, each printing a
//! pass line with the measured quantities. Run in release mode for the
//! stated runtime budgets (`cargo test --release --test acceptance`).

use ipm_core::atwood::{make_atwood, BoundParams};
use ipm_core::entropy_claw::{
    confined_run, solve_claw, theta_exact, theta_exact_form, ClawConfig, EntropyProfile,
    ProfileForm,
};
use ipm_core::field::{Field2, Grid2, Grid3};
use ipm_core::lamination::{
    c0_bounded, c0_unbounded, identity_check, laminate_decompose, min_bounded_ratio,
    min_unbounded_ratio, nonconvexity_closed_form, random_laminate, sample_in_u,
    SegmentSolverConfig,
};
use ipm_core::plane::{PlaneVec, I, ZERO};
use ipm_core::random_walk::{
    front_positions, recursion_run, run_simulation, WalkConfig,
};
use ipm_core::spectral::biot_savart;
use ipm_core::state_geometry::{
    b_quadratic, relaxation_functionals, sigma_pm, shift_t_inv, State,
};
use ipm_core::subsolution::{
    admissibility, build_subsolution, maxmix_check, test_family, weak_residuals,
};
use ipm_core::wave_cone::{localized_wave, mat_vec, plane_wave_params, t_matrix, Cutoff};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Runtime budgets assume release builds; debug builds get slack.
fn assert_runtime(t0: Instant, limit_s: f64, label: &str) {
    let budget = if cfg!(debug_assertions) {
        limit_s * 40.0
    } else {
        limit_s
    };
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(
        elapsed < budget,
        "{label}: runtime {elapsed:.2}s exceeds budget {budget:.0}s"
    );
}

fn gauss(rng: &mut ChaCha8Rng) -> PlaneVec {
    use rand_distr::StandardNormal;
    PlaneVec::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn flat_datum(n: usize, half_width: f64) -> (Vec<f64>, f64) {
    let dx = 2.0 * half_width / n as f64;
    let data = (0..n)
        .map(|i| {
            if (i as f64 + 0.5) * dx - half_width > 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    (data, dx)
}

#[test]
fn criterion_01_closed_form_profile() {
    let t0 = Instant::now();
    let p0 = EntropyProfile::new(make_atwood(0.0).unwrap(), 1.0).unwrap();
    let v = theta_exact(&p0, 1.0, 1.0).unwrap();
    assert_eq!(v, 0.5, "Θ_0(1,1) must be exactly 1/2");
    let ph = EntropyProfile::new(make_atwood(0.5).unwrap(), 1.0).unwrap();
    let expect = 2.0 - 3f64.sqrt();
    let mut worst = 0.0f64;
    for form in [ProfileForm::Symmetric, ProfileForm::Mobility, ProfileForm::Radical] {
        let v = theta_exact_form(&ph, 1.0, 0.0, form).unwrap();
        worst = worst.max((v - expect).abs());
    }
    assert!(worst <= 1e-12, "closed-form spread {worst}");
    assert_runtime(t0, 1.0, "criterion 1");
    println!(
        "[criterion 01] PASS in {:.3?}: Θ_0(1,1)=0.5 exact, three-form spread {worst:.2e}",
        t0.elapsed()
    );
}

#[test]
fn criterion_02_conservation_law_convergence() {
    let t0 = Instant::now();
    let cfg = ClawConfig::default();
    let mut report = String::new();
    for a in [-0.5, 0.0, 0.5] {
        let p = make_atwood(a).unwrap();
        let prof = EntropyProfile::new(p, 1.0).unwrap();
        let mut errors = Vec::new();
        for n in [200usize, 400, 800, 1600] {
            let (theta0, dx) = flat_datum(n, 3.0);
            let sol = solve_claw(&theta0, dx, -3.0, &p, 1.0, 1.0, &cfg, 1).unwrap();
            let err: f64 = sol
                .x
                .iter()
                .zip(sol.final_state().iter())
                .map(|(&x, &v)| (v - theta_exact(&prof, 1.0, x).unwrap()).abs() * dx)
                .sum();
            errors.push(err);
        }
        let final_err = errors[3];
        assert!(final_err <= 2e-2, "A={a}: L1 error {final_err}");
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio >= 1.5, "A={a}: refinement ratio {ratio}");
        }
        report.push_str(&format!("A={a}: L1(N=1600)={final_err:.2e}; "));
    }
    assert_runtime(t0, 30.0, "criterion 2");
    println!("[criterion 02] PASS in {:.2?}: {report}", t0.elapsed());
}

#[test]
fn criterion_03_confined_domain() {
    let t0 = Instant::now();
    let p0 = make_atwood(0.0).unwrap();
    let run = confined_run(&p0, 1e-4, 400).unwrap();
    assert!((run.t_collapse_plus - 2.0).abs() <= 1e-4);
    assert!((run.t_collapse_minus - 2.0).abs() <= 1e-4);
    let mut sup = 0.0f64;
    for s in &run.trajectory {
        if s.t >= 0.5 && s.t <= 2.0 {
            let expect = 1.0 + 2.0 * s.t - 2.0 * (2.0 * s.t).sqrt();
            sup = sup.max((s.f_plus - expect).abs());
            sup = sup.max((s.f_minus - expect).abs());
        }
    }
    assert!(sup <= 1e-6, "A=0 free-boundary sup error {sup}");
    let mut collapse_spread = 0.0f64;
    let mut worst_mass = 0.0f64;
    for a in [0.5, -0.5] {
        let p = make_atwood(a).unwrap();
        let run = confined_run(&p, 1e-4, 400).unwrap();
        collapse_spread =
            collapse_spread.max((run.t_collapse_plus - run.t_collapse_minus).abs());
        for s in &run.trajectory {
            worst_mass = worst_mass.max(s.mass.abs());
        }
    }
    assert!(collapse_spread <= 1e-4, "collapse spread {collapse_spread}");
    assert!(worst_mass <= 1e-6, "interior mass {worst_mass}");
    assert_runtime(t0, 10.0, "criterion 3");
    println!(
        "[criterion 03] PASS in {:.2?}: A=0 sup {sup:.1e}, collapse spread {collapse_spread:.1e}, mass {worst_mass:.1e}",
        t0.elapsed()
    );
}

#[test]
fn criterion_04_algebraic_identities() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1D);
    let mut worst_fg = 0.0f64;
    let mut worst_bound = 0.0f64;
    let mut worst_disc = 0.0f64;
    let mut n = 0usize;
    while n < 100_000 {
        let p = make_atwood(rng.gen_range(-0.9..0.9)).unwrap();
        let b = BoundParams::new(rng.gen_range(1.5..8.0), &p).unwrap();
        let z = State::new(rng.gen_range(-0.99..0.99), gauss(&mut rng) * 2.0, gauss(&mut rng) * 2.0);
        if z.is_pinched(&p) {
            continue;
        }
        n += 1;
        let (f, g) = relaxation_functionals(&z, &p);
        let lhs = 4.0 * (1.0 - z.theta * p.atwood) * g;
        let rhs = f * (f + 2.0 * (1.0 - z.theta * z.theta) * z.au_i(&p).norm());
        worst_fg = worst_fg.max((lhs - rhs).abs() / (1.0 + f * f));
        let res = identity_check(&z, &p, &b).unwrap();
        worst_bound = worst_bound.max(res.id_bound);
        worst_disc = worst_disc.max(res.id_disc);
    }
    assert!(worst_fg <= 1e-10, "fg identity {worst_fg}");
    assert!(worst_bound <= 1e-10, "bound identity {worst_bound}");
    assert!(worst_disc <= 1e-10, "disc identity {worst_disc}");
    assert_runtime(t0, 5.0, "criterion 4");
    println!(
        "[criterion 04] PASS in {:.2?}: fg {worst_fg:.1e}, four-line {worst_bound:.1e}, disc {worst_disc:.1e}",
        t0.elapsed()
    );
}

#[test]
fn criterion_05_hull_equivalence() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5A11);
    let atwoods = [-0.8, -0.5, 0.0, 0.5, 0.8];
    let mut worst_f = f64::NEG_INFINITY;
    for i in 0..100_000 {
        let p = make_atwood(atwoods[i % atwoods.len()]).unwrap();
        let z = random_laminate(2, &p, &mut rng).unwrap();
        let (f, _) = relaxation_functionals(&z, &p);
        worst_f = worst_f.max(f);
    }
    assert!(worst_f <= 1e-9, "depth-2 laminate f {worst_f}");
    let mut worst = (0usize, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..10_000 {
        let p = make_atwood(atwoods[i % atwoods.len()]).unwrap();
        let z = sample_in_u(&p, &mut rng);
        let tree = laminate_decompose(&z, &p).unwrap();
        let check = tree.verify(&p);
        worst.0 = worst.0.max(check.n_leaves);
        worst.1 = worst.1.max(check.barycenter_err);
        worst.2 = worst.2.max(check.weight_sum_err);
        worst.3 = worst.3.max(check.max_split_residual.max(check.max_leaf_margin));
    }
    assert!(worst.0 <= 4, "leaf count {}", worst.0);
    assert!(worst.1 <= 1e-9, "barycenter {}", worst.1);
    assert!(worst.2 <= 1e-12, "weight sum {}", worst.2);
    assert!(worst.3 <= 1e-9, "split/leaf residual {}", worst.3);
    assert_runtime(t0, 60.0, "criterion 5");
    println!(
        "[criterion 05] PASS in {:.2?}: depth-2 f {worst_f:.1e}; decompositions: ≤{} leaves, barycenter {:.1e}, weights {:.1e}, splits {:.1e}",
        t0.elapsed(),
        worst.0,
        worst.1,
        worst.2,
        worst.3
    );
}

#[test]
fn criterion_06_perturbation_property() {
    let t0 = Instant::now();
    let cfg = SegmentSolverConfig::default();
    let mut report = String::new();
    for a in [-0.8, -0.5, 0.0, 0.5, 0.8] {
        let p = make_atwood(a).unwrap();
        let c0 = c0_unbounded(a).expect("calibrated constant");
        let measured = min_unbounded_ratio(&p, 10_000, 0xACCE97, &cfg);
        assert!(c0 > 0.0);
        assert!(
            measured >= c0,
            "A={a}: measured ratio {measured} below recorded c0 {c0}"
        );
        report.push_str(&format!("U(A={a}):{measured:.3}≥{c0}; "));
        for m in [2.0, 4.0, 8.0] {
            assert!((m - p.m_star).abs() > 1e-9, "M = M*(A) excluded");
            let b = BoundParams::new(m, &p).unwrap();
            let c0m = c0_bounded(a, m).expect("calibrated constant");
            let (measured, fallbacks) = min_bounded_ratio(&p, &b, 10_000, 0xACCE97, &cfg);
            assert!(
                measured >= c0m,
                "A={a} M={m}: measured {measured} below recorded {c0m}"
            );
            assert_eq!(fallbacks, 0, "A={a} M={m}: unexpected fallback directions");
        }
    }
    assert_runtime(t0, 120.0, "criterion 6");
    println!("[criterion 06] PASS in {:.2?}: {report}", t0.elapsed());
}

#[test]
fn criterion_07_plane_waves() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7A7E);
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let p = make_atwood(rng.gen_range(-0.9..0.9)).unwrap();
        let zbar = if i % 3 == 0 {
            let m = gauss(&mut rng);
            State::new(0.0, m * (-p.atwood), m)
        } else {
            let m = gauss(&mut rng);
            let theta: f64 = rng.gen_range(0.05..1.0) * if i % 2 == 0 { 1.0 } else { -1.0 };
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let omega = shift_t_inv(PlaneVec::new(phi.cos(), phi.sin()));
            State::new(theta, omega * (m * p.atwood + I * theta), m)
        };
        let spec = plane_wave_params(&zbar, &p).unwrap();
        let r = mat_vec(&t_matrix(&zbar, &p), spec.xi());
        worst = worst.max((r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt());
    }
    assert!(worst <= 1e-12, "cone annihilation residual {worst}");
    let p = make_atwood(0.3).unwrap();
    let m_bar = PlaneVec::new(0.7, -0.2);
    let omega = PlaneVec::new(-0.5, 0.5);
    let zbar = State::new(1.0, omega * (m_bar * p.atwood + I), m_bar);
    let g = Grid3::boxed(24, 24, 24, 0.0, 2.0, -1.0, 1.0, -1.0, 1.0);
    let bump = Cutoff::Bump {
        center: [1.0, 0.0, 0.0],
        radius: [0.9, 0.9, 0.9],
    };
    let (_, d32) = localized_wave(&zbar, &bump, 32, &p, &g).unwrap();
    let (_, d64) = localized_wave(&zbar, &bump, 64, &p, &g).unwrap();
    let ratio = d32 / d64;
    assert!((1.7..=2.3).contains(&ratio), "deviation ratio {ratio}");
    assert_runtime(t0, 30.0, "criterion 7");
    println!(
        "[criterion 07] PASS in {:.2?}: annihilation {worst:.1e}, k-ratio {ratio:.2}",
        t0.elapsed()
    );
}

#[test]
fn criterion_08_biot_savart() {
    let t0 = Instant::now();
    let g = Grid2::torus(128);
    let p = make_atwood(0.35).unwrap();
    let theta = Field2::from_fn(g, |x, _| x.cos());
    let m = Field2::constant(g, ZERO);
    let u = biot_savart(&theta, &m, &p).unwrap();
    let mut worst = 0.0f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let expect = PlaneVec::new(0.0, -g.x(i).cos());
            worst = worst.max((*u.at(i, j) - expect).norm());
        }
    }
    assert!(worst <= 1e-12, "manufactured solution error {worst}");

    let g = Grid2::torus(32);
    let cell = g.dx * g.dy;
    let mut rng = ChaCha8Rng::seed_from_u64(0xB107);
    let mut band = |rng: &mut ChaCha8Rng| {
        let mut modes = Vec::new();
        for k1 in -3i64..=3 {
            for k2 in -3i64..=3 {
                if k1 == 0 && k2 == 0 {
                    continue;
                }
                modes.push((
                    k1 as f64,
                    k2 as f64,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ));
            }
        }
        Field2::from_fn(g, move |x, y| {
            modes
                .iter()
                .map(|(k1, k2, a, ph)| a * (k1 * x + k2 * y + ph).cos())
                .sum::<f64>()
        })
    };
    let mut worst_slack = f64::INFINITY;
    for i in 0..1000 {
        let p = make_atwood(-0.85 + 1.7 * (i as f64 / 999.0)).unwrap();
        let theta = band(&mut rng);
        let m1 = band(&mut rng);
        let m2 = band(&mut rng);
        let m = Field2 {
            grid: g,
            data: m1
                .data
                .iter()
                .zip(m2.data.iter())
                .map(|(&a, &b)| PlaneVec::new(a, b))
                .collect(),
        };
        let u = biot_savart(&theta, &m, &p).unwrap();
        let u_n = (u.data.iter().map(|v| v.norm_sq()).sum::<f64>() * cell).sqrt();
        let m_n = (m.data.iter().map(|v| v.norm_sq()).sum::<f64>() * cell).sqrt();
        let t_n = (theta.data.iter().map(|v| v * v).sum::<f64>() * cell).sqrt();
        let slack = p.atwood.abs() * m_n + t_n - u_n;
        worst_slack = worst_slack.min(slack);
        assert!(
            slack >= -1e-9 * (1.0 + t_n + m_n),
            "energy inequality violated: slack {slack}"
        );
    }
    assert_runtime(t0, 10.0, "criterion 8");
    println!(
        "[criterion 08] PASS in {:.2?}: manufactured {worst:.1e}, min inequality slack {worst_slack:.2e}",
        t0.elapsed()
    );
}

#[test]
fn criterion_09_random_walk() {
    let t0 = Instant::now();
    // Mean-field recursion vs entropy profile at lattice spacing 1/256
    // (α = c a / 2 = 1/2 with c = 2, h = 1/512).
    let p0 = make_atwood(0.0).unwrap();
    let steps = 512usize;
    let n_rows = 1536usize;
    let cell = 1.0 / 256.0;
    let theta0: Vec<f64> = (0..n_rows)
        .map(|r| if r >= n_rows / 2 { 1.0 } else { -1.0 })
        .collect();
    let rec = recursion_run(&theta0, &p0, steps);
    let prof = EntropyProfile::new(p0, 0.5).unwrap();
    let sup = (0..n_rows)
        .map(|r| {
            let x2 = cell * (r as f64 - n_rows as f64 / 2.0 + 0.5);
            (rec[r] - theta_exact(&prof, 1.0, x2).unwrap()).abs()
        })
        .fold(0.0f64, f64::max);
    assert!(sup <= 0.05, "recursion sup distance {sup}");

    // Monte Carlo lines vs the recursion: 5σ Bernoulli band per row.
    let cfg = WalkConfig {
        params: p0,
        n_cols: 4096,
        n_rows: 512,
        c: 2.0,
        h: 1.0 / 256.0,
        steps: 256,
        seed: 0x9A17,
        snapshot_every: 0,
    };
    let run = run_simulation(&cfg).unwrap();
    assert_eq!(run.mass_initial, run.mass_final, "phase mass must be exact");
    let avg = ipm_core::random_walk::line_average(&run.final_lattice);
    let n_cols = cfg.n_cols as f64;
    let mut worst_z = 0.0f64;
    for (row, (&a, &r)) in avg.iter().zip(run.recursion.iter()).enumerate() {
        let sigma = ((1.0 - r * r).max(0.0) / n_cols).sqrt();
        let band = 5.0 * sigma + 4.0 / n_cols;
        let dev = (a - r).abs();
        assert!(dev <= band, "row {row}: deviation {dev} outside band {band}");
        if sigma > 0.0 {
            worst_z = worst_z.max(dev / (sigma + 4.0 / n_cols / 5.0));
        }
    }

    // Asymmetric front speeds for A = ±1/2.
    let mut ratios = Vec::new();
    for a in [0.5, -0.5] {
        let p = make_atwood(a).unwrap();
        let cfg = WalkConfig {
            params: p,
            n_cols: 4096,
            n_rows: 768,
            c: 2.0,
            h: 1.0 / 256.0,
            steps: 256,
            seed: 0xF407,
            snapshot_every: 0,
        };
        let run = run_simulation(&cfg).unwrap();
        assert_eq!(run.mass_initial, run.mass_final);
        let (lower, upper) = front_positions(&run.final_lattice, 0.1);
        let ratio = if a > 0.0 {
            upper.abs() / lower.abs()
        } else {
            lower.abs() / upper.abs()
        };
        assert!(
            (ratio - 3.0).abs() <= 0.45,
            "A={a}: front ratio {ratio} outside 3 ± 15%"
        );
        ratios.push(ratio);
    }
    assert_runtime(t0, 120.0, "criterion 9");
    println!(
        "[criterion 09] PASS in {:.2?}: recursion sup {sup:.3}, worst CLT z {worst_z:.2}, front ratios {:.2}/{:.2}",
        t0.elapsed(),
        ratios[0],
        ratios[1]
    );
}

#[test]
fn criterion_10_pinch_structure() {
    let t0 = Instant::now();
    for a in [0.5, -0.5] {
        let p = make_atwood(a).unwrap();
        let u_pinch = I * (-1.0 / a);
        for theta in [-0.4, 0.0, 0.6] {
            let z = State::new(theta, u_pinch, u_pinch * theta);
            // At M = M*: on all three extra boundaries to 1e-10.
            let bstar = BoundParams::new(p.m_star, &p).unwrap();
            let h_resid = (b_quadratic(&z, &p) - (bstar.m * bstar.m - 1.0)).abs();
            let s = sigma_pm(&z, &bstar).unwrap();
            assert!(h_resid <= 1e-10, "half-plane residual {h_resid}");
            assert!((s.sigma_minus.norm() - 1.0).abs() <= 1e-10);
            assert!((s.sigma_plus.norm() - 1.0).abs() <= 1e-10);
            // Away from M*: margins at least 1e-3.
            for m in [p.m_star - 0.5, p.m_star + 0.5] {
                let b = BoundParams::new(m, &p).unwrap();
                let h_margin = (b_quadratic(&z, &p) - (b.m * b.m - 1.0)).abs();
                let s = sigma_pm(&z, &b).unwrap();
                assert!(h_margin >= 1e-3, "half-plane margin {h_margin}");
                assert!((s.sigma_minus.norm() - 1.0).abs() >= 1e-3);
                assert!((s.sigma_plus.norm() - 1.0).abs() >= 1e-3);
            }
        }
    }
    // Mid-point convexity violation of the pinch-ray curve at A = 1/2.
    let p = make_atwood(0.5).unwrap();
    let h = |l: f64| nonconvexity_closed_form(&p, l);
    assert!(h(0.4) + h(0.8) < 2.0 * h(0.6));
    assert_runtime(t0, 1.0, "criterion 10");
    println!(
        "[criterion 10] PASS in {:.3?}: pinch on ∂H∩∂B₋∩∂B₊ iff M=M*, certificate {}",
        t0.elapsed(),
        h(0.4) + h(0.8) - 2.0 * h(0.6)
    );
}

#[test]
fn criterion_11_subsolution() {
    let t0 = Instant::now();
    // First-order decay of the transport residual under grid doubling.
    let p = make_atwood(0.0).unwrap();
    let fine = |n: usize| Grid3::boxed(n, 8, 4 * n, 0.0, 1.0, -1.0, 1.0, -2.0, 2.0);
    let family = test_family(&fine(1), 77, 8);
    let mut prev = f64::INFINITY;
    let mut ratios = Vec::new();
    for n in [32usize, 64, 128] {
        let field = build_subsolution(&p, 0.5, fine(n)).unwrap();
        let (r1, r2, r3) = weak_residuals(&field, &family);
        assert!(r2 == 0.0 && r3 <= 1e-13, "stationary forms r2={r2} r3={r3}");
        if prev.is_finite() {
            let ratio = prev / r1;
            assert!((1.7..=2.3).contains(&ratio), "r1 ratio {ratio} at n={n}");
            ratios.push(ratio);
        }
        prev = r1;
    }
    // Admissibility for three mixing speeds.
    let pa = make_atwood(0.5).unwrap();
    let grid = Grid3::boxed(48, 8, 192, 0.0, 1.0, -1.0, 1.0, -2.5, 2.5);
    for alpha in [0.3, 0.7, 0.99] {
        let field = build_subsolution(&pa, alpha, grid).unwrap();
        let rep = admissibility(&field, &pa);
        assert!(rep.strict && rep.admissible, "α={alpha}: {rep:?}");
    }
    // Flux lower bound with equality exactly at α = 1.
    for alpha in [0.3, 0.7, 0.99, 1.0] {
        let field = build_subsolution(&pa, alpha, grid).unwrap();
        let rep = maxmix_check(&field, &pa);
        assert!(rep.min_margin >= -1e-12, "α={alpha}: margin {}", rep.min_margin);
        assert!(rep.support_ok);
        assert_eq!(rep.equality_interior, alpha == 1.0, "α={alpha}");
    }
    assert_runtime(t0, 30.0, "criterion 11");
    println!(
        "[criterion 11] PASS in {:.2?}: r1 doubling ratios {:?}, admissible for α∈{{0.3,0.7,0.99}}, equality only at α=1",
        t0.elapsed(),
        ratios
    );
}
