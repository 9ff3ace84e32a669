//! Structural properties of the oracle, the potentials and the asymptotic formulas.

use anharmonic_core::asymptotics::{
    counting_asymptotic, eigenvalue_expansion, merged_sequence, quantization_phase, quantization_solve, ExpansionConstants,
};
use anharmonic_core::eigensolve::{
    boundary_angle, discrete_eigenvalue, solve_range, sturm_count, BoundaryCondition, BoundaryProblem, Geometry, Scheme,
    Shooter, TypeTag,
};
use anharmonic_core::fit::loglog_fit;
use anharmonic_core::potential::{Limit, Perturbation, Piece, PotentialSpec, PowerTerm};
use anharmonic_core::quadrature::integrate_split;
use anharmonic_core::specfun::gamma;
use anharmonic_core::Error;
use anharmonic_core::volterra::{solve_interior, Side};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn test_potentials() -> Vec<PotentialSpec<f64>> {
    vec![
        PotentialSpec::<f64>::power(2.0, 1.0),
        PotentialSpec::<f64>::power(4.0, 1.0).with_perturbation(Perturbation::step(0.5, -0.5, 0.8)),
        PotentialSpec::<f64>::plain(vec![PowerTerm { a: 1.0, alpha: 2.0 }, PowerTerm { a: 1.0, alpha: 4.0 }], 1.0),
        PotentialSpec::<f64>::shifted_power(1.0, 3.0, 1.0),
        PotentialSpec::<f64>::quartic(1.0, 1.0),
        PotentialSpec::<f64>::power(2.0, 3.5).with_perturbation(Perturbation::weierstrass(0.5, 6)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gamma_recurrence(x in 0.1f64..30.0) {
        let r = gamma(x + 1.0).unwrap() / gamma(x).unwrap();
        prop_assert!((r / x - 1.0).abs() <= 1e-12, "x = {x}: ratio {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn turning_point_inverts_q0(which in 0usize..5, excess in 0.5f64..1e5) {
        let spec = &test_potentials()[which];
        let lambda = spec.q_at_b() + excess;
        let a = spec.turning_point(lambda).unwrap();
        prop_assert!(a > spec.b);
        prop_assert!(((spec.q0(a) - lambda) / lambda).abs() <= 1e-10);
    }

    #[test]
    fn action_is_monotone(which in 0usize..5, l1 in 2.0f64..500.0, dl in 0.5f64..100.0, dx in 0.01f64..0.5) {
        let spec = &test_potentials()[which];
        let lam = spec.q0(spec.b + dx) + l1;
        let q = spec.action_q(spec.b, lam).unwrap();
        prop_assert!(spec.action_q(spec.b, lam + dl).unwrap() > q);
        prop_assert!(spec.action_q(spec.b + dx, lam).unwrap() < q);
    }

    #[test]
    fn adding_a_nonnegative_step_never_lowers_eigenvalues(h in 0.0f64..2.0, lo in -0.9f64..0.0, len in 0.1f64..0.9) {
        let base = PotentialSpec::<f64>::power(2.0, 1.0);
        let bumped = base.clone().with_perturbation(Perturbation::step(h, lo, lo + len));
        let p = BoundaryProblem::auto(&bumped, Geometry::FullLine, BoundaryCondition::Dirichlet, 12).unwrap();
        let a = solve_range(&p, &base, 1, 12, 1e-9).unwrap();
        let b = solve_range(&p, &bumped, 1, 12, 1e-9).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!(y.lambda >= x.lambda - 2e-9, "n = {}: {} < {}", x.n, y.lambda, x.lambda);
        }
    }

    #[test]
    fn quantization_phase_is_increasing(which in 0usize..6, u in 1.0f64..1e4, du in 1e-3f64..50.0) {
        let spec = &test_potentials()[which];
        let lam = spec.q_at_b() + 1.0 + u;
        prop_assert!(quantization_phase(spec, lam + du).unwrap() > quantization_phase(spec, lam).unwrap());
    }

    #[test]
    fn counting_stays_in_band(which in 0usize..5, lam in 10.0f64..1000.0) {
        let spec = &test_potentials()[which];
        prop_assume!(lam > spec.q_at_b());
        let p = BoundaryProblem::auto(spec, Geometry::FullLine, BoundaryCondition::Dirichlet, counting_asymptotic(spec, 1000.0).unwrap() as usize + 10).unwrap();
        let dev = sturm_count(&p, spec, lam).unwrap() as f64 - counting_asymptotic(spec, lam).unwrap();
        prop_assert!(dev.abs() <= 2.0, "lambda = {lam}: deviation {dev}");
    }

    #[test]
    fn interior_solution_is_linear(lam in 20.0f64..2e4, u in (-1.0f64..1.0, -1.0f64..1.0), v in (-1.0f64..1.0, -1.0f64..1.0), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let spec = PotentialSpec::<f64>::power(2.0, 1.5).with_perturbation(Perturbation::step(0.5, -1.0, 0.6));
        let rl = lam.sqrt();
        let su = solve_interior(&spec, lam, u.0, u.1 * rl, Side::Plus).unwrap();
        let sv = solve_interior(&spec, lam, v.0, v.1 * rl, Side::Plus).unwrap();
        let sw = solve_interior(&spec, lam, s * u.0 + t * v.0, (s * u.1 + t * v.1) * rl, Side::Plus).unwrap();
        let scale = 1.0 + s.abs() + t.abs();
        for i in 0..sw.f.len() {
            prop_assert!((sw.f[i] - (s * su.f[i] + t * sv.f[i])).abs() <= 1e-9 * scale);
        }
        let (fb, dfb) = sw.at_b();
        let (gb, dgb) = sw.boundary_from_k();
        prop_assert!((fb - gb).abs() <= 1e-8 * scale && (dfb - dgb).abs() <= 1e-8 * scale * rl);
    }

    #[test]
    fn holder_bound_holds_on_samples(x in -3.1f64..3.1, d in 1e-6f64..0.5) {
        let pieces = [
            Piece::TruncatedWeierstrass { tau: 0.5, j: 6 },
            Piece::WindowedCosine { amplitude: 0.7, omega: 5.0, lo: -2.0, hi: 2.0 },
            Piece::SampledTable { x: vec![-1.0, -0.2, 0.5, 1.0], v: vec![0.0, 1.0, -0.5, 0.0] },
        ];
        for p in pieces {
            let tau = p.tau();
            let c = p.holder_constant(tau);
            let (lo, hi) = p.window().unwrap();
            let y = x + d;
            if !(x > lo && y < hi) {
                continue;
            }
            let dv = (p.eval(x, Limit::Mean) - p.eval(y, Limit::Mean)).abs();
            prop_assert!(dv <= c * d.powf(tau) * (1.0 + 1e-12), "{p:?}: {dv} > {}", c * d.powf(tau));
        }
    }
}

#[test]
fn weierstrass_resonances_decay_like_omega_to_minus_tau() {
    for tau in [0.3, 0.5, 0.8] {
        let v = Perturbation::weierstrass(tau, 8);
        let (w, t): (Vec<f64>, Vec<f64>) = (1..=8).map(|k| { let w = 2f64.powi(k); (w, v.cos_transform(w)) }).unzip();
        let fit = loglog_fit(&w, &t, None).unwrap();
        assert!((fit.slope + tau).abs() <= 0.02, "tau {tau}: slope {}", fit.slope);
    }
}

#[test]
fn closed_forms_match_quadrature() {
    let families = [
        Perturbation::weierstrass(0.5, 5),
        Perturbation::windowed_cosine(0.8, 3.0, -2.0, 1.5),
        Perturbation::step(1.3, -0.7, 0.4),
        Perturbation::table(vec![-1.0, -0.3, 0.2, 0.9], vec![0.0, 0.8, -0.4, 0.0]),
    ];
    let mut rng = StdRng::seed_from_u64(7);
    for v in &families {
        let (lo, hi) = v.support().unwrap();
        let mut points = v.breakpoints();
        points.extend((1..200).map(|i| lo + (hi - lo) * i as f64 / 200.0));
        for _ in 0..50 {
            let omega: f64 = rng.gen_range(0.0..80.0);
            let cos_q = integrate_split(|x| v.eval(x) * (omega * x).cos(), lo, hi, &points, 1e-12, 1e-12).unwrap().value;
            let sin_q = integrate_split(|x| v.eval(x) * (omega * x).sin(), lo, hi, &points, 1e-12, 1e-12).unwrap().value;
            assert!((v.cos_transform(omega) - cos_q).abs() <= 1e-8, "{v:?} cos at {omega}");
            assert!((v.sin_transform(omega) - sin_q).abs() <= 1e-8, "{v:?} sin at {omega}");
        }
    }
}

#[test]
fn returned_indices_are_certified() {
    let spec = PotentialSpec::<f64>::power(2.0, 0.5);
    let p = BoundaryProblem::full_line(12.0, 5e-4);
    let s = solve_range(&p, &spec, 1, 30, 1e-9).unwrap();
    for e in &s.eigenvalues {
        // the discrete operator is within O(h⁴λ³) of the continuous one, far below the 1e-6 window
        let c = sturm_count(&p, &spec, e.lambda + 1e-6).unwrap() - sturm_count(&p, &spec, e.lambda - 1e-6).unwrap();
        assert_eq!(c, 1, "n = {}", e.n);
    }
}

#[test]
fn scheme_convergence_orders() {
    let spec = PotentialSpec::<f64>::power(2.0, 0.5);
    for (scheme, order) in [(Scheme::Fd2, 2.0), (Scheme::Numerov, 4.0)] {
        let lam: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| discrete_eigenvalue(&BoundaryProblem::full_line(10.0, h).with_scheme(scheme), &spec, 3, 1e-13).unwrap())
            .collect();
        let p = ((lam[0] - lam[1]) / (lam[1] - lam[2])).log2();
        assert!((p - order).abs() <= 0.2, "{scheme:?}: observed order {p}");
    }
}

#[test]
fn longer_truncation_does_not_move_eigenvalues() {
    let spec = PotentialSpec::<f64>::power(4.0, 1.0).with_perturbation(Perturbation::step(0.5, -0.5, 0.8));
    let p = BoundaryProblem::auto(&spec, Geometry::FullLine, BoundaryCondition::Dirichlet, 20).unwrap();
    let mut longer = p.clone();
    longer.l *= 1.2;
    let a = solve_range(&p, &spec, 1, 20, 1e-10).unwrap();
    let b = solve_range(&longer, &spec, 1, 20, 1e-10).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x.lambda - y.lambda).abs() < 1e-9, "n = {}: {} vs {}", x.n, x.lambda, y.lambda);
    }
}

#[test]
fn full_line_is_merge_of_half_lines_for_even_v() {
    let spec = PotentialSpec::<f64>::power(2.0, 1.0).with_perturbation(Perturbation::step(0.7, -0.5, 0.5));
    let tol = 1e-9;
    let half = |bc| {
        let p = BoundaryProblem::auto(&spec, Geometry::HalfLine, bc, 10).unwrap();
        solve_range(&p, &spec, 1, 10, tol).unwrap().lambdas()
    };
    let mut merged = half(BoundaryCondition::Neumann);
    merged.extend(half(BoundaryCondition::Dirichlet));
    merged.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let p = BoundaryProblem::auto(&spec, Geometry::FullLine, BoundaryCondition::Dirichlet, 20).unwrap();
    let full = solve_range(&p, &spec, 1, 20, tol).unwrap().lambdas();
    for (n, (a, b)) in full.iter().zip(&merged).enumerate() {
        assert!((a - b).abs() <= 2.0 * tol, "n = {}: {a} vs {b}", n + 1);
    }
}

#[test]
fn fourth_term_ratio_decays_at_the_stated_rate() {
    for alpha in [3.0, 4.0, 6.0] {
        let c = ExpansionConstants::new(alpha, &Perturbation::zero()).unwrap();
        let ns: Vec<usize> = vec![10, 30, 100, 300, 1000];
        let mut x = vec![];
        let mut y = vec![];
        for &n in &ns {
            let r = eigenvalue_expansion(&c, &Perturbation::zero(), n).unwrap();
            assert_eq!(r.term2, 0.0);
            assert_eq!(r.term3, 0.0);
            x.push((2 * n - 1) as f64);
            y.push(r.term4 / r.term1);
        }
        // the displayed exponents give exactly (2n − 1)^{−2}, faster than (2n − 1)^{−6/(α+2)} for α > 1
        let fit = loglog_fit(&x, &y, None).unwrap();
        assert!(fit.slope <= -6.0 / (alpha + 2.0), "alpha {alpha}: {}", fit.slope);
        assert!((fit.slope + 2.0).abs() < 1e-9, "alpha {alpha}: {}", fit.slope);
    }
}

#[test]
fn quantization_agrees_with_harmonic_expansion() {
    let spec = PotentialSpec::<f64>::power(2.0, 1.0);
    let c = ExpansionConstants::new(2.0, &Perturbation::zero()).unwrap();
    for e in merged_sequence(&spec, 200).unwrap().into_iter().filter(|e| e.m >= 10) {
        let pred = eigenvalue_expansion(&c, &Perturbation::zero(), e.m).unwrap().predicted;
        assert!((e.nu - pred).abs() <= 5.0 / e.nu, "m = {}: {} vs {pred}", e.m, e.nu);
    }
}

#[test]
fn quantization_roots_interlace() {
    for spec in test_potentials() {
        let (mut prev_n, mut bad) = (None::<f64>, vec![]);
        for n in 5..=200 {
            // below q(b) + 1 the relation has no root; only leading indices may be skipped
            let (lo, hi) = match (quantization_solve(&spec, n, TypeTag::NType), quantization_solve(&spec, n, TypeTag::DType)) {
                (Ok(a), Ok(b)) => (a.lambda, b.lambda),
                (Err(Error::NoRoot(_)), _) | (_, Err(Error::NoRoot(_))) if prev_n.is_none() && n < 50 => continue,
                (a, b) => panic!("n = {n}: {:?} / {:?}", a.err(), b.err()),
            };
            if let Some(d_prev) = prev_n {
                if d_prev > lo {
                    bad.push(n);
                }
            }
            if lo > hi {
                bad.push(n);
            }
            prev_n = Some(hi);
        }
        assert!(bad.is_empty(), "{:?}: violations at {bad:?}", spec.composite);
    }
}

#[test]
fn interior_solution_matches_oracle_eigenfunction() {
    let spec = PotentialSpec::<f64>::power(2.0, 1.0).with_perturbation(Perturbation::step(0.5, -0.4, 0.7));
    let p = BoundaryProblem::auto(&spec, Geometry::FullLine, BoundaryCondition::Dirichlet, 14).unwrap();
    let s = solve_range(&p, &spec, 10, 14, 1e-10).unwrap();
    let shooter = Shooter::new(&p, &spec).unwrap();
    for e in &s.eigenvalues {
        let a = boundary_angle(&p, &spec, e.lambda).unwrap();
        let f = solve_interior(&spec, e.lambda, a.y0, a.dy0, Side::Plus).unwrap();
        let (fb, dfb) = f.at_b();
        let (y, dy) = shooter.right_direction(e.lambda, spec.b).unwrap();
        let w = fb * dy - dfb * y;
        let scale = (fb * fb + dfb * dfb).sqrt();
        assert!(w.abs() <= 1e-5 * scale, "n = {}: matching defect {w:e}", e.n);
    }
}
