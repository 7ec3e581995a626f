use std::sync::Arc;

use ergolab_core::algebra::{AlgElement, Interval, Projection, TraceAlgebra};
use ergolab_core::averaging::{
    discrete_average_with, quadrature_weighted_average, weighted_average, AverageRequest, ExactMethod,
    VectorizedSemigroup,
};
use ergolab_core::certify::{measure, revalidate, shave_projection, BoundKind};
use ergolab_core::dynamics::{random_ds, MarkovSemigroup};
use ergolab_core::rearrangement::{
    luxemburg_norm, mu, orlicz_modular, step_norm, submajorization_gap, submajorize_within, sym_norm, ConcaveWeight,
    OrliczFunction, SingularFunction, Step, SymmetricSpace,
};
use ergolab_core::sampling::{random_algebra, random_element, random_projection, random_psd, rng_from_seed, stream_seed};
use ergolab_core::weights::{
    cesaro_error, estimate_limsup, geometric_grid, BesicovitchWeight, Perturbation, SignPattern, Side, TrigPolynomial,
    TrigTerm,
};
use ergolab_core::C64;
use proptest::prelude::*;
use rand::Rng;

fn algebra(seed: u64) -> Arc<TraceAlgebra> {
    random_algebra(&mut rng_from_seed(stream_seed(seed, 0)), 4, 5).unwrap()
}

fn semigroup(a: &Arc<TraceAlgebra>, seed: u64) -> MarkovSemigroup {
    let mut rng = rng_from_seed(stream_seed(seed, 3));
    let phi = random_ds(a, stream_seed(seed, 1), rng.random_range(1..=3)).unwrap();
    MarkovSemigroup::new(phi, rng.random_range(0.2..2.0)).unwrap()
}

fn diff(a: &AlgElement, b: &AlgElement) -> f64 {
    a.max_abs_diff(b).unwrap()
}

fn all_specs() -> Vec<SymmetricSpace> {
    vec![
        SymmetricSpace::Lp(1.0),
        SymmetricSpace::Lp(1.5),
        SymmetricSpace::Lp(2.0),
        SymmetricSpace::Lp(3.0),
        SymmetricSpace::Lp(f64::INFINITY),
        SymmetricSpace::L1CapLinf,
        SymmetricSpace::L1PlusLinf,
        SymmetricSpace::Orlicz(OrliczFunction::power(2.0).unwrap()),
        SymmetricSpace::Orlicz(OrliczFunction::ExpMinusOne),
        SymmetricSpace::Orlicz(OrliczFunction::table(vec![(0.5, 0.1), (1.0, 1.0), (4.0, 10.0)]).unwrap()),
        SymmetricSpace::Lorentz(ConcaveWeight::power(0.5).unwrap()),
        SymmetricSpace::Lorentz(ConcaveWeight::Log1p),
        SymmetricSpace::Lorentz(ConcaveWeight::table(vec![(1.0, 2.0), (3.0, 3.0)]).unwrap()),
        SymmetricSpace::Marcinkiewicz(ConcaveWeight::power(0.5).unwrap()),
        SymmetricSpace::Marcinkiewicz(ConcaveWeight::Log1p),
        SymmetricSpace::Marcinkiewicz(ConcaveWeight::table(vec![(1.0, 2.0), (3.0, 3.0)]).unwrap()),
    ]
}

/// Random nonincreasing step function from a seed.
fn random_steps(seed: u64) -> SingularFunction {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(1..=8);
    let mut values: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..5.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    SingularFunction::from_steps(values.into_iter().map(|value| Step {
        value,
        width: rng.random_range(0.05..2.0),
    }))
    .unwrap()
}

/// Lowers each value by a random factor, keeping the result nonincreasing.
fn pointwise_below(f: &SingularFunction, seed: u64) -> SingularFunction {
    let mut rng = rng_from_seed(seed);
    let mut prev = f64::INFINITY;
    let steps: Vec<Step> = f
        .steps()
        .iter()
        .map(|s| {
            prev = prev.min(s.value * rng.random_range(0.0..=1.0));
            Step { value: prev, width: s.width }
        })
        .collect();
    SingularFunction::from_steps(steps).unwrap()
}

/// Averages `f` over random runs of consecutive steps (a conditional
/// expectation), which is submajorized by `f`.
fn hlp_average(f: &SingularFunction, seed: u64) -> SingularFunction {
    let mut rng = rng_from_seed(seed);
    let steps = f.steps();
    let mut out = Vec::new();
    let mut i = 0;
    let mut prev = f64::INFINITY;
    while i < steps.len() {
        let j = rng.random_range(i + 1..=steps.len());
        let width: f64 = steps[i..j].iter().map(|s| s.width).sum();
        let mass: f64 = steps[i..j].iter().map(|s| s.value * s.width).sum();
        // rounding can lift an average by an ulp above its predecessor
        prev = prev.min(mass / width);
        out.push(Step { value: prev, width });
        i = j;
    }
    SingularFunction::from_steps(out).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn trace_is_faithful(seed in any::<u64>(), scale in -14.0f64..0.0) {
        let a = algebra(seed);
        let x = random_element(&mut rng_from_seed(seed), &a).scale_real(10f64.powf(scale));
        let dim: usize = a.blocks().iter().map(|b| b.dim).sum();
        let t = x.adjoint().mul(&x).unwrap().trace().re;
        prop_assert!(t > 0.0);
        // τ(x*x) ≥ min α · ‖x‖∞², so a tiny trace forces a tiny norm
        let n = x.op_norm();
        prop_assert!(a.min_weight() * n * n <= t * (1.0 + 1e-10));
        if t <= 1e-16 * dim as f64 {
            prop_assert!(n <= 1e-8 * (dim as f64 / a.min_weight()).sqrt() * (1.0 + 1e-10));
        }
    }

    #[test]
    fn meet_complement_is_subadditive(seed in any::<u64>(), n in 1usize..5) {
        let a = algebra(seed);
        let mut rng = rng_from_seed(seed);
        let es: Vec<Projection> = (0..n).map(|_| random_projection(&mut rng, &a)).collect();
        let m = Projection::meet(&es).unwrap();
        let bound: f64 = es.iter().map(Projection::tau_perp).sum();
        prop_assert!(m.tau_perp() <= bound + 1e-9);
        for e in &es {
            // the meet lies under every e
            prop_assert!(diff(&m.as_element().mul(e.as_element()).unwrap(), m.as_element()) < 1e-9);
        }
    }

    #[test]
    fn holder_inequalities(seed in any::<u64>()) {
        let a = algebra(seed);
        let mut rng = rng_from_seed(seed);
        let x = random_element(&mut rng, &a);
        let y = random_element(&mut rng, &a);
        let xy = x.mul(&y).unwrap();
        prop_assert!(xy.l1_norm() <= x.op_norm() * y.l1_norm() * (1.0 + 1e-12));
        prop_assert!(xy.op_norm() <= x.op_norm() * y.op_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn spectral_projections_partition(seed in any::<u64>(), cut in -1.0f64..1.0) {
        let a = algebra(seed);
        let h = random_element(&mut rng_from_seed(seed), &a).real_part();
        let whole = h.spectral_projection(Interval::all()).unwrap();
        prop_assert!(diff(whole.as_element(), Projection::one(&a).as_element()) < 1e-12);
        let lo = h.spectral_projection(Interval::below(cut)).unwrap();
        let hi = h.spectral_projection(Interval::above(cut)).unwrap();
        let prod = lo.as_element().mul(hi.as_element()).unwrap();
        prop_assert!(prod.op_norm() < 1e-9);
    }

    #[test]
    fn schatten_via_mu_matches_direct(seed in any::<u64>()) {
        let a = algebra(seed);
        let x = random_element(&mut rng_from_seed(seed), &a);
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let via_mu = sym_norm(&x, &SymmetricSpace::Lp(p)).unwrap();
            let direct = x.schatten_norm(p);
            prop_assert!((via_mu - direct).abs() <= 1e-10 * direct.max(1.0), "p={p}: {via_mu} vs {direct}");
        }
    }

    #[test]
    fn mu_is_adjoint_invariant_and_homogeneous(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let a = algebra(seed);
        let x = random_element(&mut rng_from_seed(seed), &a);
        let m = mu(&x);
        let tol = 1e-12 * m.sup().max(1.0);
        prop_assert!(submajorization_gap(&mu(&x.adjoint()), &m).abs() <= tol * a.total_trace());
        prop_assert!(submajorization_gap(&m, &mu(&x.adjoint())).abs() <= tol * a.total_trace());
        let s = C64::new(re, im);
        let scaled = mu(&x.scale(s));
        let want = m.scaled(s.norm());
        for t in want.breakpoints() {
            let probe = t * (1.0 - 1e-9);
            prop_assert!((scaled.value_at(probe) - want.value_at(probe)).abs() <= 1e-11 * (1.0 + s.norm()) * m.sup());
        }
    }

    #[test]
    fn norms_are_monotone_pointwise(seed in any::<u64>()) {
        let x = random_steps(seed);
        let y = pointwise_below(&x, seed ^ 1);
        prop_assert!(y.pointwise_le(&x));
        for spec in all_specs() {
            let nx = step_norm(&x, &spec).unwrap();
            let ny = step_norm(&y, &spec).unwrap();
            prop_assert!(ny <= nx * (1.0 + 1e-12), "{}: {ny} > {nx}", spec.name());
        }
    }

    #[test]
    fn norms_are_monotone_under_submajorization(seed in any::<u64>()) {
        let x = random_steps(seed);
        let y = hlp_average(&x, seed ^ 2);
        prop_assert!(submajorize_within(&y, &x, 1e-12));
        for spec in all_specs() {
            let nx = step_norm(&x, &spec).unwrap();
            let ny = step_norm(&y, &spec).unwrap();
            prop_assert!(ny <= nx * (1.0 + 1e-12), "{}: {ny} > {nx}", spec.name());
        }
    }

    #[test]
    fn luxemburg_modular_hits_one(seed in any::<u64>()) {
        let f = random_steps(seed);
        for phi in [
            OrliczFunction::power(1.5).unwrap(),
            OrliczFunction::ExpMinusOne,
            OrliczFunction::table(vec![(0.5, 0.1), (1.0, 1.0), (4.0, 10.0)]).unwrap(),
        ] {
            let a = luxemburg_norm(&f, &phi).unwrap();
            let r = orlicz_modular(&f, &phi, a);
            prop_assert!((r - 1.0).abs() <= 1e-8, "{phi:?}: {r}");
        }
    }

    #[test]
    fn semigroup_contracts_every_norm(seed in any::<u64>(), t in 0.0f64..5.0) {
        let a = algebra(seed);
        let sg = semigroup(&a, seed);
        let x = random_element(&mut rng_from_seed(seed), &a);
        let y = sg.semigroup_at(t, &x).unwrap();
        prop_assert!(submajorize_within(&mu(&y), &mu(&x), 1e-10));
        for spec in all_specs() {
            let nx = sym_norm(&x, &spec).unwrap();
            let ny = sym_norm(&y, &spec).unwrap();
            prop_assert!(ny <= nx * (1.0 + 1e-9), "{} at t={t}: {ny} > {nx}", spec.name());
        }
    }

    #[test]
    fn rational_time_reduction(seed in any::<u64>(), n in 1usize..=16, m in 1usize..=16) {
        let a = algebra(seed);
        let sg = semigroup(&a, seed);
        let vs = VectorizedSemigroup::new(&sg);
        let x = random_element(&mut rng_from_seed(seed), &a);
        let h = 1.0 / m as f64;
        let y = vs.average(&x, h).unwrap();
        let rhs = discrete_average_with(&y, n, |z| sg.semigroup_at(h, z)).unwrap();
        let lhs = vs.average(&x, n as f64 / m as f64).unwrap();
        prop_assert!(diff(&lhs, &rhs) <= 1e-8);
    }

    #[test]
    fn unit_powers_are_multiplicative(theta in -3.1f64..3.1, t in -50.0f64..50.0, s in -50.0f64..50.0) {
        let p = TrigPolynomial::new(vec![TrigTerm { weight: C64::new(1.0, 0.0), theta }]).unwrap();
        prop_assert!((p.eval(t + s) - p.eval(t) * p.eval(s)).norm() <= 1e-12);
    }

    #[test]
    fn cesaro_error_of_bump_is_overlap(h in 0.1f64..2.0, start in 0.0f64..5.0, len in 0.01f64..5.0, t in 0.01f64..12.0) {
        let p = TrigPolynomial::new(vec![
            TrigTerm { weight: C64::new(0.4, 0.1), theta: 0.0 },
            TrigTerm { weight: C64::new(0.2, -0.3), theta: 2.1 },
        ]).unwrap();
        let end = start + len;
        let beta = BesicovitchWeight::new(p.clone(), Perturbation::Bump { height: h, start, end }, 3.0).unwrap();
        let overlap = (end.min(t) - start.min(t)).max(0.0);
        let got = cesaro_error(&beta, &p, t).unwrap();
        prop_assert!((got - h * overlap / t).abs() <= 1e-9, "{got} vs {}", h * overlap / t);
    }

    #[test]
    fn decaying_limsup_falls_as_grid_moves_right(h in 0.1f64..1.0, gamma in 0.2f64..2.0, alternating in any::<bool>()) {
        let p = TrigPolynomial::constant(C64::new(0.5, 0.0));
        let sign = if alternating { SignPattern::Alternating { period: 0.9 } } else { SignPattern::Positive };
        let beta = BesicovitchWeight::new(p.clone(), Perturbation::Decaying { height: h, gamma, sign }, 2.0).unwrap();
        let mut last = f64::INFINITY;
        for lo in [1.0, 4.0, 16.0, 64.0] {
            let est = estimate_limsup(&beta, &p, Side::AtInfinity, &geometric_grid(lo, 32.0 * lo, 16)).unwrap();
            prop_assert!(est.value <= last * (1.0 + 1e-9));
            last = est.value;
        }
    }

    #[test]
    fn weighted_averages_respect_bounds(seed in any::<u64>(), t in 0.01f64..20.0) {
        let a = algebra(seed);
        let sg = semigroup(&a, seed);
        let beta = random_weight(seed);
        let c = beta.bound();
        let x = random_element(&mut rng_from_seed(seed), &a);
        let req = AverageRequest::new(sg, Some(beta), x.clone(), vec![t]).unwrap();
        let b = weighted_average(&req, t).unwrap();
        prop_assert!(b.l1_norm() <= c * x.l1_norm() * (1.0 + 1e-9));
        prop_assert!(b.op_norm() <= c * x.op_norm() * (1.0 + 1e-9));
        prop_assert!(submajorize_within(&mu(&b.scale_real(1.0 / c)), &mu(&x), 1e-9));
        for spec in all_specs() {
            let nb = sym_norm(&b, &spec).unwrap();
            let nx = sym_norm(&x, &spec).unwrap();
            prop_assert!(nb <= c * nx * (1.0 + 1e-9), "{}: {nb} > {c}·{nx}", spec.name());
        }
    }

    #[test]
    fn weighted_average_is_linear_in_x_and_beta(seed in any::<u64>(), t in 0.01f64..10.0, s in -2.0f64..2.0) {
        let a = algebra(seed);
        let sg = semigroup(&a, seed);
        let mut rng = rng_from_seed(seed);
        let x = random_element(&mut rng, &a);
        let y = random_element(&mut rng, &a);
        // perturbations do not add within the closed menu, so sum trigonometric parts
        let b1 = BesicovitchWeight::from_poly(random_weight(seed).poly().clone());
        let b2 = BesicovitchWeight::from_poly(random_weight(seed ^ 7).poly().clone());
        let avg = |beta: &BesicovitchWeight, z: &AlgElement| {
            let req = AverageRequest::new(sg.clone(), Some(beta.clone()), z.clone(), vec![t]).unwrap();
            weighted_average(&req, t).unwrap()
        };
        let combo = x.add(&y.scale_real(s)).unwrap();
        let lin = avg(&b1, &x).add(&avg(&b1, &y).scale_real(s)).unwrap();
        prop_assert!(diff(&avg(&b1, &combo), &lin) <= 1e-11 * (1.0 + s.abs()));
        let mut terms = b1.poly().terms().to_vec();
        terms.extend_from_slice(b2.poly().terms());
        let sum = BesicovitchWeight::from_poly(TrigPolynomial::new(terms).unwrap());
        let add = avg(&b1, &x).add(&avg(&b2, &x)).unwrap();
        prop_assert!(diff(&avg(&sum, &x), &add) <= 1e-11);
    }

    #[test]
    fn exact_paths_and_quadrature_agree(seed in any::<u64>()) {
        let a = algebra(seed);
        let sg = semigroup(&a, seed);
        let x = random_element(&mut rng_from_seed(seed), &a);
        let times = vec![0.05, 0.7, 3.0, 11.0];
        let req = AverageRequest::new(sg, Some(random_weight(seed)), x, times.clone()).unwrap();
        let aug = req.evaluate(ExactMethod::AugmentedExponential).unwrap();
        let series = req.evaluate(ExactMethod::PoissonSeries).unwrap();
        for ((t, u), v) in times.iter().zip(&aug).zip(&series) {
            prop_assert!(diff(u, v) <= 1e-10);
            let q = quadrature_weighted_average(&req, *t, 1e-11).unwrap();
            prop_assert!(diff(u, &q) <= 1e-8, "t={t}: {}", diff(u, &q));
        }
    }

    #[test]
    fn shaved_certificates_revalidate(seed in any::<u64>(), lambda in 0.05f64..1.5, two_sided in any::<bool>()) {
        let a = algebra(seed);
        let mut rng = rng_from_seed(seed);
        let family: Vec<(f64, AlgElement)> = (0..6)
            .map(|k| (k as f64, if two_sided { random_psd(&mut rng, &a) } else { random_element(&mut rng, &a) }))
            .collect();
        let kind = if two_sided { BoundKind::TwoSided } else { BoundKind::OneSided };
        let cert = shave_projection(&family, lambda, f64::INFINITY, kind).unwrap();
        let r = revalidate(&cert, &family).unwrap();
        prop_assert!(r.pass && r.witnesses_match);
        prop_assert!(cert.achieved_sup <= lambda * (1.0 + 1e-9));
        let w = measure(&family, &cert.projection, kind).unwrap();
        prop_assert_eq!(w, cert.witnesses);
    }
}

/// Three-term trigonometric weight with an optional perturbation, `C = Σ|w| + |h|`.
fn random_weight(seed: u64) -> BesicovitchWeight {
    let mut rng = rng_from_seed(stream_seed(seed, 4));
    let terms: Vec<TrigTerm> = (0..3)
        .map(|k| TrigTerm {
            weight: C64::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6)),
            theta: if k == 0 { 0.0 } else { rng.random_range(-3.0..3.0) },
        })
        .collect();
    let poly = TrigPolynomial::new(terms).unwrap();
    let pert = match rng.random_range(0..3) {
        0 => Perturbation::None,
        1 => Perturbation::Bump {
            height: rng.random_range(-0.5..0.5),
            start: rng.random_range(0.0..2.0),
            end: rng.random_range(2.5..6.0),
        },
        _ => Perturbation::Decaying {
            height: rng.random_range(-0.5..0.5),
            gamma: rng.random_range(0.5..2.0),
            sign: SignPattern::Alternating { period: 0.8 },
        },
    };
    let c = poly.abs_bound() + pert.sup_abs();
    BesicovitchWeight::new(poly, pert, c).unwrap()
}
