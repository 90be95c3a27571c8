//! Acceptance suite: one test per criterion, each printing a PASS line on
//! success (run with `cargo test --test acceptance -- --nocapture` to see
//! them). Tolerances are pinned in the assertions.

use cm_core::cmtest::{
    self, fink_schur_check, inequality_suite_146, inequality_suite_940, log_convexity_check,
    ratio_monotonicity_check, sample_146, sample_940, schur_sum_product_check, ConditionStatus,
    GridSpec, Spacing, Verdict,
};
use cm_core::expr::parse;
use cm_core::gammaex;
use cm_core::inversion::{gil_pelaez, invert_cm, oscillatory_integral, InversionConfig};
use cm_core::jet::jet_eval;
use cm_core::krull;
use cm_core::laplace::{catalog, transform, TransformPair};
use cm_core::measure::{add, convolve, scale, Measure};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn assert_pair_sound(pair: &TransformPair, xs: &[f64]) {
    for &x in xs {
        let lhs = transform(&pair.measure, x, 1e-9).unwrap();
        let rhs = pair.function.eval(x).unwrap();
        let tol = 1e-7 * (1.0 + rhs.abs());
        assert!(
            (lhs - rhs).abs() <= tol,
            "{} {:?} at x={x}: transform {lhs} vs function {rhs}",
            pair.name,
            pair.params
        );
    }
}

#[test]
fn acceptance_01_catalog_soundness() {
    let xs = [0.3, 1.0, 3.0, 10.0];
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..10 {
        let a = rng.random_range(0.0..4.0);
        assert_pair_sound(&catalog("milsam1", &params(&[("a", a)])).unwrap(), &xs);

        let (a, b, c) = (
            rng.random_range(0.2..3.0),
            rng.random_range(0.2..3.0),
            rng.random_range(0.3..3.0),
        );
        assert_pair_sound(
            &catalog("milsam2", &params(&[("a", a), ("b", b), ("c", c)])).unwrap(),
            &xs,
        );

        let (a, b) = (rng.random_range(1.0..4.0), rng.random_range(0.2..3.0));
        assert_pair_sound(&catalog("milsam3", &params(&[("a", a), ("b", b)])).unwrap(), &xs);

        assert_pair_sound(&catalog("milsam4", &params(&[])).unwrap(), &xs);

        let a = rng.random_range(0.3..2.5);
        assert_pair_sound(&catalog("milsam5", &params(&[("a", a)])).unwrap(), &xs);
    }
    // Degenerate milsam2 corners are admissible too.
    assert_pair_sound(
        &catalog("milsam2", &params(&[("a", 0.0), ("b", 2.0), ("c", 1.5)])).unwrap(),
        &xs,
    );
    assert_pair_sound(
        &catalog("milsam2", &params(&[("a", 1.5), ("b", 0.0), ("c", 0.8)])).unwrap(),
        &xs,
    );
    for n in 1..=3 {
        assert_pair_sound(&catalog("psin", &params(&[("n", n as f64)])).unwrap(), &xs);
    }
    for &a in &[0.5, 1.0, 2.0] {
        assert_pair_sound(&catalog("recxn", &params(&[("a", a)])).unwrap(), &xs);
    }
    println!("acceptance 1 (catalog soundness): PASS");
}

#[test]
fn acceptance_02_gil_pelaez_dirac_and_sign_integral() {
    let cfg = InversionConfig::default();
    let phi = |x: f64| Ok(Complex64::new(0.0, x).exp());
    let (f05, _) = gil_pelaez(phi, 1.0, 0.5, &cfg).unwrap();
    assert!((-1e-3..=1e-3).contains(&f05), "F(0.5)={f05}");
    let (f15, _) = gil_pelaez(phi, 1.0, 1.5, &cfg).unwrap();
    assert!((f15 - 1.0).abs() <= 1e-3, "F(1.5)={f15}");
    let (f1, _) = gil_pelaez(phi, 1.0, 1.0, &cfg).unwrap();
    assert!((f1 - 0.5).abs() <= 1e-3, "F(1)={f1}");

    for &a in &[-2.0, -0.5, 0.5, 2.0] {
        let mut g = |x: f64| Ok((a * x).sin() / x);
        let (v, _) = oscillatory_integral(&mut g, 1e-8, a, &cfg).unwrap();
        let want = std::f64::consts::FRAC_PI_2 * a.signum();
        assert!((v - want).abs() <= 1e-4, "a={a}: {v} vs {want}");
    }
    println!("acceptance 2 (Gil-Pelaez Dirac recovery + sign integral): PASS");
}

#[test]
fn acceptance_03_threshold_exa200() {
    let r = gammaex::scan_exa200().unwrap();
    let (lo, hi) = r.numeric_bracket;
    assert!(lo <= 0.5 && 0.5 <= hi, "bracket ({lo}, {hi}) misses 0.5");
    assert!(hi - lo <= 2e-4, "bracket width {} above 2e-4", hi - lo);
    assert!(lo >= 0.5 - 1e-4 && hi <= 0.5 + 1e-4, "bracket not within ±1e-4");

    let u = gammaex::u_threshold(1e-3).unwrap();
    assert!(u > 0.49 && u < 0.51, "u(1e-3)={u}");

    let us = gammaex::u_on_grid(200).unwrap();
    for w in us.windows(2) {
        assert!(w[1].1 < w[0].1, "u not decreasing at t={}", w[1].0);
    }

    for &t in &gammaex::default_scan_grid() {
        assert!(gammaex::h_a(t, 0.0).unwrap() <= 1e-12, "h_0({t}) > 1e-12");
    }
    println!("acceptance 3 (exa200 threshold at 1/2): PASS");
}

#[test]
fn acceptance_04_threshold_exa300() {
    let r = gammaex::scan_exa300().unwrap();
    let b2 = gammaex::exa300_threshold();
    let (lo, hi) = r.numeric_bracket;
    assert!(lo <= b2 && b2 <= hi, "bracket ({lo}, {hi}) misses {b2}");
    assert!(lo >= b2 - 1e-4 && hi <= b2 + 1e-4, "bracket not within ±1e-4");

    // h_b(t)/t² at t = 1e-3 vs the limit coefficient. The genuine O(t)
    // defect is p3(b)·t (0.24% of the tiny coefficient at b = 0.8), so the
    // 1e-3 comparison uses the combined scale 1 + |coefficient|.
    for &b in &[0.6, 0.8, 1.0] {
        let ratio = gammaex::h_b(1e-3, b).unwrap() / 1e-6;
        let want = gammaex::small_t_coefficient(b);
        assert!(
            (ratio - want).abs() <= 1e-3 * (1.0 + want.abs()),
            "b={b}: ratio {ratio} vs coefficient {want}"
        );
    }
    println!("acceptance 4 (exa300 threshold at 1/2 + 1/sqrt(12)): PASS");
}

#[test]
fn acceptance_05_representation_cross_checks() {
    let xs = [0.5, 1.0, 2.0, 5.0];
    for &x in &xs {
        let closed = gammaex::w_value(x).unwrap();
        let quad = gammaex::w_quadrature(x, 1e-9).unwrap();
        assert!(
            (closed - quad).abs() <= 1e-6 * (1.0 + closed.abs()),
            "W at {x}: {closed} vs {quad}"
        );
    }
    for &a in &[0.0, 0.5, 1.0] {
        for &x in &xs {
            let closed = gammaex::g_a_value(x, a).unwrap();
            let quad = gammaex::g_a_quadrature(x, a, 1e-9).unwrap();
            assert!(
                (closed - quad).abs() <= 1e-6 * (1.0 + closed.abs()),
                "G_{a} at {x}: {closed} vs {quad}"
            );
        }
    }
    for &b in &[0.79, 0.9, 1.2] {
        for &x in &xs {
            let closed = gammaex::phi_bc_value(x, b, b - 0.5).unwrap();
            let quad = gammaex::phi_b_quadrature(x, b, 1e-9).unwrap();
            assert!(
                (closed - quad).abs() <= 1e-6 * (1.0 + closed.abs()),
                "phi_{b} at {x}: {closed} vs {quad}"
            );
        }
    }
    println!("acceptance 5 (closed forms vs quadrature of densities): PASS");
}

#[test]
fn acceptance_06_krull_polygamma_consistency() {
    let f = parse("log(x)").unwrap();
    let v = krull::krull_gderiv(&f, 2, 1.0, 10_000, 1e-12).unwrap();
    let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
    assert!((v - pi2_6).abs() <= 1e-10, "g''(1)={v} vs {pi2_6}");

    let r = krull::krull_residual(&f, &[0.5, 1.0, 2.0, 5.0], 10_000, 1e-12).unwrap();
    assert!(r <= 1e-9, "max residual {r}");
    println!("acceptance 6 (Krull/polygamma consistency): PASS");
}

#[test]
fn acceptance_07_necessary_condition_hierarchy() {
    let grid = GridSpec::default_cm();
    let cm_corpus = [
        "exp(-1.5*x)",
        "1/(2*x+3)^1.5",
        "log(1+1/x)",
        "exp(1/x)",
        "log(1+x)/x",
    ];
    let mut rng = StdRng::seed_from_u64(42);
    for src in cm_corpus {
        let f = parse(src).unwrap();

        let o = log_convexity_check(&f, &grid).unwrap();
        assert_eq!(o.status, ConditionStatus::Pass, "{src}: log-convexity");

        // 20 random majorization pairs of dimension ≤ 4.
        let mut done = 0;
        while done < 20 {
            let dim = rng.random_range(2..=4);
            let (m, n) = cmtest::random_majorization_pair_int(&mut rng, dim, 5);
            let x = rng.random_range(0.3..3.0);
            let o = fink_schur_check(&f, x, &m, &n).unwrap();
            assert_eq!(o.status, ConditionStatus::Pass, "{src}: fink {m:?} {n:?} at {x}");
            done += 1;
        }

        for &(k, j) in &[(0usize, 1usize), (1, 1), (0, 2)] {
            let o = ratio_monotonicity_check(&f, k, j, &grid).unwrap();
            assert_eq!(o.status, ConditionStatus::Pass, "{src}: ratio k={k} j={j}");
        }

        let s = sample_940(&mut rng, 50);
        let o = inequality_suite_940(&f, &s).unwrap();
        assert_eq!(o.status, ConditionStatus::Pass, "{src}: supad suite");
        let s = sample_146(&mut rng, 50);
        let o = inequality_suite_146(&f, &s).unwrap();
        assert_eq!(o.status, ConditionStatus::Pass, "{src}: conc suite");

        let mut done = 0;
        while done < 20 {
            let dim = rng.random_range(2..=4);
            let (xv, yv) = cmtest::random_majorization_pair_pos(&mut rng, dim, 0.2, 4.0);
            let o = schur_sum_product_check(&f, &xv, &yv).unwrap();
            assert_eq!(o.status, ConditionStatus::Pass, "{src}: sconv");
            done += 1;
        }
    }

    // Non-CM corpus refuted with reproducible witnesses.
    for src in ["exp(-x^2)", "exp(lgamma(x))", "x*exp(-x)"] {
        let f = parse(src).unwrap();
        let r = cmtest::cm_grid_check(&f, &grid, 6).unwrap();
        assert_eq!(r.verdict, Verdict::Refuted, "{src} should be refuted");
        let w = &r.witnesses[0];
        let k: usize = w.index.trim_start_matches("k=").parse().unwrap();
        let jet = jet_eval(&f, w.point[0], k).unwrap();
        let d = jet.derivative(k);
        let signed = if k % 2 == 0 { d } else { -d };
        assert!(
            (signed - w.lhs).abs() <= 1e-14 * w.lhs.abs().max(1e-300),
            "{src}: witness does not re-evaluate"
        );
    }
    println!("acceptance 7 (necessary-condition hierarchy): PASS");
}

#[test]
fn acceptance_08_convolution_product_rule() {
    let e_density = || Measure::from_density_text("exp(-t)", None).unwrap();
    let pairs: Vec<(Measure, Measure)> = vec![
        (Measure::dirac(1.0), Measure::dirac(2.0)),
        (Measure::dirac(1.0), e_density()),
        (e_density(), e_density()),
        (
            add(&scale(&Measure::dirac(0.5), 0.5), &e_density()),
            Measure::from_density_text("2*exp(-3*t)", None).unwrap(),
        ),
        (
            catalog("milsam2", &params(&[("a", 1.0), ("b", 1.0), ("c", 1.0)]))
                .unwrap()
                .measure,
            catalog("milsam2", &params(&[("a", 1.0), ("b", 2.0), ("c", 2.0)]))
                .unwrap()
                .measure,
        ),
    ];
    for (i, (mu, nu)) in pairs.iter().enumerate() {
        let conv = convolve(mu, nu).unwrap();
        for &x in &[0.5, 1.0, 2.0] {
            let lhs = transform(&conv, x, 1e-10).unwrap();
            let rhs = transform(mu, x, 1e-10).unwrap() * transform(nu, x, 1e-10).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-6,
                "pair {i} at x={x}: {lhs} vs {rhs}"
            );
        }
    }
    println!("acceptance 8 (convolution product rule): PASS");
}

#[test]
fn acceptance_09_round_trip_inversion() {
    let cfg = InversionConfig::default();
    let ts = [0.25, 0.5, 2.0, 5.0];
    let cases = [
        catalog("milsam1", &params(&[("a", 1.0)])).unwrap(),
        catalog("milsam1", &params(&[("a", 2.6)])).unwrap(),
        catalog("milsam2", &params(&[("a", 1.0), ("b", 1.0), ("c", 1.0)])).unwrap(),
        catalog("milsam2", &params(&[("a", 1.0), ("b", 2.0), ("c", 2.0)])).unwrap(),
    ];
    for pair in &cases {
        let est = invert_cm(&pair.function, &ts, &cfg).unwrap();
        for p in &est.points {
            let want = pair.measure.cumulative(p.t).unwrap();
            assert!(
                (p.f_estimate - want).abs() <= 5e-3,
                "{} {:?} at t={}: F={} vs mu([0,t])={want}",
                pair.name,
                pair.params,
                p.t,
                p.f_estimate
            );
        }
        assert!(
            est.monotonicity_violations.is_empty(),
            "{}: F estimates must be nondecreasing",
            pair.name
        );
    }
    println!("acceptance 9 (round-trip inversion of catalog pairs): PASS");
}

#[test]
fn acceptance_10_levy_form_check() {
    let f = parse("exp(-(1-exp(-x)))").unwrap();
    let mu = Measure::dirac(1.0);
    let dev = cmtest::levy_check(&f, &mu, &[0.5, 1.0, 2.0, 5.0], 1e-10).unwrap();
    assert!(dev <= 1e-8, "max deviation {dev}");
    let integ = cmtest::levy_integrability(&mu).unwrap();
    assert!(integ.is_finite() && (integ - 1.0).abs() < 1e-12);
    println!("acceptance 10 (Levy-form representation): PASS");
}

/// Extra guard used by criterion 7's corpus: the default grid must include
/// both the small-x blowup region and the tail region.
#[test]
fn default_grid_covers_both_regimes() {
    let grid = GridSpec::default_cm();
    assert_eq!(grid.spacing, Spacing::Log);
    let xs = grid.generate().unwrap();
    assert!(xs[0] <= 0.05 + 1e-12 && xs[xs.len() - 1] >= 50.0 - 1e-9);
}
