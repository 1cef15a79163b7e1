//! Property tests for the structural invariants: kernel symmetry and
//! positivity, transform roundtrips, causality of fitted solutions, slice
//! component geometry, and least-squares first-order optimality.

use caloric::approx::{fit_fixed_poles, PoleSet, RationalHeatSolution};
use caloric::colehopf::ColeHopfMap;
use caloric::fields::{heat_residual_fd, EntireDictionaryMember, Field, HeatField};
use caloric::geom::AaBox;
use caloric::kernel::{phi, KernelTerm, SpacetimePoint};
use caloric::runge::{jones_check, slice_complement, ComponentGeometry, Region};
use proptest::prelude::*;

fn pt(t: f64, x: &[f64]) -> SpacetimePoint<f64> {
    SpacetimePoint::new(t, x.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_symmetric_in_space(t in -2.0f64..2.0, x in -5.0f64..5.0, y in -5.0f64..5.0) {
        prop_assert_eq!(phi(&pt(t, &[x, y])), phi(&pt(t, &[-x, -y])));
        prop_assert_eq!(phi(&pt(t, &[x])), phi(&pt(t, &[-x])));
    }

    #[test]
    fn phi_is_positive_exactly_for_positive_time(
        t in -2.0f64..2.0,
        x in -3.0f64..3.0,
    ) {
        // Keep the exponent above the flush floor so positivity is decided
        // by the sign of t alone.
        prop_assume!(t <= 0.0 || x * x / (4.0 * t) < 600.0);
        let v = phi(&pt(t, &[x]));
        prop_assert!(v >= 0.0);
        prop_assert_eq!(v > 0.0, t > 0.0);
    }

    #[test]
    fn cole_hopf_roundtrip_on_admissible_range(
        a in -2.0f64..2.0,
        p in -3.0f64..3.0,
    ) {
        let map = ColeHopfMap::constant(a);
        let u = map.forward(p);
        prop_assert!(map.domain_valid(u));
        let back = map.inverse(u).unwrap();
        prop_assert!((back - p).abs() < 1e-10, "a={}, p={}, back={}", a, p, back);
        // And the other direction.
        let again = map.forward(back);
        prop_assert!((again - u).abs() < 1e-10 * u.abs().max(1.0));
    }

    #[test]
    fn rational_solutions_vanish_before_their_poles(
        pole_ts in prop::collection::vec(-3.0f64..0.0, 1..4),
        coeffs in prop::collection::vec(-2.0f64..2.0, 4),
        probe_x in -3.0f64..3.0,
    ) {
        let terms: Vec<KernelTerm<f64>> = pole_ts
            .iter()
            .zip(&coeffs)
            .enumerate()
            .map(|(i, (&t0, &c))| KernelTerm::simple(pt(t0, &[0.3 * i as f64]), c))
            .collect();
        let sol = RationalHeatSolution { dim: 1, terms };
        let earliest = sol.earliest_pole_time().unwrap();
        let probe = pt(earliest - 0.5, &[probe_x]);
        prop_assert_eq!(sol.value(&probe).unwrap(), 0.0);
    }

    #[test]
    fn slice_components_are_disjoint_and_sorted(
        intervals in prop::collection::vec((-4.0f64..4.0, 0.0f64..2.0, -1.0f64..1.0, 0.0f64..1.5), 1..6),
        t_probe in -1.0f64..1.0,
    ) {
        let obstacles: Vec<AaBox<f64>> = intervals
            .iter()
            .map(|&(x_lo, x_len, t_lo, t_len)| {
                AaBox::from_ranges(&[(t_lo, t_lo + t_len), (x_lo, x_lo + x_len)])
            })
            .collect();
        let region = Region::new(2, None, obstacles).unwrap();
        let slice = slice_complement(&region, t_probe).unwrap();
        let mut prev_hi = f64::NEG_INFINITY;
        for c in &slice.components {
            let ComponentGeometry::Interval { lo, hi } = &c.geometry else {
                prop_assert!(false, "expected intervals in n = 1");
                unreachable!()
            };
            let lo = lo.unwrap_or(f64::NEG_INFINITY);
            let hi = hi.unwrap_or(f64::INFINITY);
            prop_assert!(lo <= hi);
            // Strictly separated from the previous component (merged sets).
            prop_assert!(lo > prev_hi, "components touch: {} <= {}", lo, prev_hi);
            prev_hi = hi;
            prop_assert_eq!(c.compact, lo.is_finite() && hi.is_finite());
        }
    }

    #[test]
    fn growing_full_space_regions_stay_not_runge(
        extra_t in -2.0f64..2.0,
        extra_x in -4.0f64..4.0,
        extra_len in 0.0f64..2.0,
    ) {
        // A region with a guaranteed compact slice hole.
        let base: Region<f64> = Region::new(
            2,
            None,
            vec![AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0)])],
        )
        .unwrap();
        prop_assert!(!jones_check(&base).unwrap().is_runge());
        // Any additional bounded obstacle keeps the complement of the slice
        // inside the bounded obstacle union, so compactness survives.
        let grown = base.with_obstacle(AaBox::from_ranges(&[
            (extra_t, extra_t + 1.0),
            (extra_x, extra_x + extra_len),
        ]));
        prop_assert!(!jones_check(&grown).unwrap().is_runge());
    }

    #[test]
    fn residual_is_additive_over_random_pairs(
        k in 0.3f64..2.0,
        degree in 0u32..5,
        t in 0.1f64..1.0,
        x in -1.0f64..1.0,
    ) {
        let f: Field<f64> = Field::Member(EntireDictionaryMember::TrigCos { k: vec![k] });
        let g: Field<f64> = Field::Member(EntireDictionaryMember::HeatPolynomial { degree });
        let sum = Field::Sum(vec![f.clone(), g.clone()]);
        let p = pt(t, &[x]);
        let h = 0.1;
        let rs = heat_residual_fd(&sum, &p, h).unwrap();
        let rf = heat_residual_fd(&f, &p, h).unwrap();
        let rg = heat_residual_fd(&g, &p, h).unwrap();
        prop_assert!((rs - (rf + rg)).abs() < 1e-12);
    }
}

/// Catalogued fields obey the Richardson bound where their truncation error
/// is visible; fields the stencil captures exactly (low-degree heat
/// polynomials, constants) are checked against an absolute roundoff bound,
/// since their residual carries no h² term to decay.
#[test]
fn catalogued_fields_pass_richardson_check() {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    let truncating: Vec<Field<f64>> = vec![
        Field::Member(EntireDictionaryMember::Exponential { k: vec![1.0] }),
        Field::Member(EntireDictionaryMember::Exponential { k: vec![-0.5] }),
        Field::Member(EntireDictionaryMember::TrigCos { k: vec![2.0] }),
        Field::Member(EntireDictionaryMember::TrigSin { k: vec![1.0] }),
        Field::Member(EntireDictionaryMember::HeatPolynomial { degree: 6 }),
        Field::Pole(KernelTerm::simple(pt(-1.0, &[0.0]), 1.0)),
    ];
    let exact: Vec<Field<f64>> = vec![
        Field::Constant { dim: 1, value: 5.0 },
        Field::Member(EntireDictionaryMember::HeatPolynomial { degree: 2 }),
        Field::Member(EntireDictionaryMember::HeatPolynomial { degree: 3 }),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let t = rng.random_range(0.1..1.5);
        let x = rng.random_range(-1.5..1.5);
        let p = pt(t, &[x]);
        for f in &truncating {
            let r1 = heat_residual_fd(f, &p, 1e-2).unwrap().abs();
            let r2 = heat_residual_fd(f, &p, 5e-3).unwrap().abs();
            assert!(
                r2 <= 0.3 * r1 + 1e-12,
                "no decay for {f:?} at {p}: r1={r1}, r2={r2}"
            );
        }
        for f in &exact {
            let r = heat_residual_fd(f, &p, 1e-3).unwrap().abs();
            assert!(r <= 1e-8, "exactly captured field has residual {r}");
        }
    }
}

/// Least-squares optimality: no single fitted coefficient can be nudged by
/// ±1e-3 without increasing the RMS residual over the samples.
#[test]
fn fitted_coefficients_are_first_order_optimal() {
    let truth = RationalHeatSolution {
        dim: 1,
        terms: vec![
            KernelTerm::simple(pt(-1.0, &[0.4]), 1.2),
            KernelTerm::simple(pt(-2.0, &[-0.6]), -0.7),
        ],
    };
    let samples: Vec<(SpacetimePoint<f64>, f64)> = AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0)])
        .uniform_grid(5)
        .into_iter()
        .map(|p| {
            let v = truth.value(&p).unwrap();
            (p, v)
        })
        .collect();
    let candidates = vec![
        pt(-1.0, &[0.4]),
        pt(-2.0, &[-0.6]),
        pt(-1.5, &[0.0]),
        pt(-0.5, &[1.0]),
    ];
    let (sol, report) = fit_fixed_poles(&samples, &PoleSet::simple(candidates), 1e-10).unwrap();

    let rms = |s: &RationalHeatSolution<f64>| {
        let mut acc = 0.0;
        for (p, v) in &samples {
            let d = s.value(p).unwrap() - v;
            acc += d * d;
        }
        (acc / samples.len() as f64).sqrt()
    };
    let base = rms(&sol);
    assert!((base - report.rms_residual).abs() < 1e-12);
    for i in 0..sol.terms.len() {
        for delta in [1e-3, -1e-3] {
            let mut nudged = sol.clone();
            nudged.terms[i].coefficient += delta;
            assert!(
                rms(&nudged) >= base - 1e-12,
                "nudging coefficient {i} by {delta} reduced the residual"
            );
        }
    }
}

/// The numeric core is generic over the scalar: the same pipelines run in
/// f32, at f32-appropriate tolerances.
#[test]
fn core_pipelines_run_in_f32() {
    let map: ColeHopfMap<f32> = ColeHopfMap::constant(0.7);
    for i in 0..20 {
        let p = -2.0 + 4.0 * (i as f32) / 19.0;
        let back = map.inverse(map.forward(p)).unwrap();
        assert!((back - p).abs() < 1e-4, "p={p}, back={back}");
    }

    let target: Field<f32> = Field::Pole(KernelTerm::simple(
        SpacetimePoint::new(-2.0f32, vec![0.0]),
        1.0,
    ));
    let boxes = caloric::approx::BoxPair::new(
        AaBox::<f32>::from_ranges(&[(0.0, 1.0), (-1.0, 1.0)]),
        AaBox::<f32>::from_ranges(&[(-0.5, 1.5), (-2.0, 2.0)]),
    )
    .unwrap();
    let grid = boxes.inner().uniform_grid(5);
    let (coarse, _) = caloric::approx::riemann_approximate(&target, &boxes, 0.5f32).unwrap();
    let (fine, _) = caloric::approx::riemann_approximate(&target, &boxes, 0.25f32).unwrap();
    let e1 = caloric::approx::sup_error(&coarse, &target, &grid).unwrap();
    let e2 = caloric::approx::sup_error(&fine, &target, &grid).unwrap();
    assert!(e2 < e1, "no decrease in f32: {e1} -> {e2}");
}

/// Raster verdicts agree across resolutions on a small two-dimensional
/// corpus (the stability contract for the approximate slice method).
#[test]
fn raster_verdicts_stable_across_resolutions() {
    use caloric::runge::jones_check_with_resolution;
    let corpus: Vec<Region<f64>> = vec![
        Region::full(3),
        Region::new(
            3,
            None,
            vec![AaBox::from_ranges(&[(0.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)])],
        )
        .unwrap(),
        Region::new(
            3,
            None,
            vec![AaBox::from_ranges(&[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0)])],
        )
        .unwrap(),
        Region::new(
            3,
            Some(AaBox::from_ranges(&[(-2.0, 2.0), (-3.0, 3.0), (-3.0, 3.0)])),
            vec![AaBox::from_ranges(&[(0.0, 1.0), (-0.5, 0.5), (-0.5, 0.5)])],
        )
        .unwrap(),
    ];
    for region in &corpus {
        let coarse = jones_check_with_resolution(region, 256).unwrap().is_runge();
        let fine = jones_check_with_resolution(region, 512).unwrap().is_runge();
        assert_eq!(coarse, fine, "verdict flipped with resolution");
    }
}
