use hconc::cube::{vertex_point, CubeFunction};
use hconc::functionals::{
    entropy_of, exp_moment, gradient_sq, orlicz_norm, sigma_partial_sums, DeltaStrategy, GradientMode,
};
use hconc::linalg::{lp_of, singular_values, singular_values_rect};
use hconc::matrix::check_schatten_vs_operator;
use hconc::SpaceDescriptor;
use nalgebra::DMatrix;
use proptest::prelude::*;

const P_EXACT: GradientMode = GradientMode::P(DeltaStrategy::Exact);

fn cube_fn(max_n: usize, max_dim: usize) -> impl Strategy<Value = CubeFunction> {
    (1..=max_n, 1..=max_dim).prop_flat_map(|(n, dim)| {
        prop::collection::vec(-10.0..10.0f64, (1 << n) * dim)
            .prop_map(move |v| CubeFunction::from_flat(n, dim, v).unwrap())
    })
}

fn square(max_d: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1..=max_d).prop_flat_map(|d| (Just(d), prop::collection::vec(-5.0..5.0f64, d * d)))
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_round_trip(f in cube_fn(8, 9)) {
        let g = f.to_coefficients().to_function();
        prop_assert!(close(f.as_flat(), g.as_flat(), 1e-12));
    }

    #[test]
    fn derivative_is_idempotent_and_mean_zero(f in cube_fn(6, 3), i in 0usize..6) {
        let i = i % f.n();
        let d = f.discrete_derivative(i).unwrap();
        let dd = d.discrete_derivative(i).unwrap();
        prop_assert!(close(d.as_flat(), dd.as_flat(), 1e-14));
        for m in d.expectation() {
            prop_assert!(m.abs() < 1e-12);
        }
    }

    #[test]
    fn extension_matches_vertices_and_is_affine(f in cube_fn(5, 2), t in -1.0..1.0f64, u in -1.0..1.0f64) {
        let c = f.to_coefficients();
        for b in 0..f.len() {
            let v = c.evaluate_extension(&vertex_point(f.n(), b)).unwrap();
            prop_assert!(close(&v, f.value(b), 1e-12));
        }
        // affine in the first coordinate
        let mut x = vec![u; f.n()];
        x[0] = t;
        let mid = c.evaluate_extension(&x).unwrap();
        x[0] = 1.0;
        let hi = c.evaluate_extension(&x).unwrap();
        x[0] = -1.0;
        let lo = c.evaluate_extension(&x).unwrap();
        let want: Vec<f64> = hi.iter().zip(&lo).map(|(h, l)| 0.5 * (1.0 + t) * h + 0.5 * (1.0 - t) * l).collect();
        prop_assert!(close(&mid, &want, 1e-12));
    }

    #[test]
    fn norm_axioms(
        (d, a) in square(4),
        b_seed in prop::collection::vec(-5.0..5.0f64, 16),
        c in -3.0..3.0f64,
        p in 2.0..6.0f64,
    ) {
        let b = &b_seed[..d * d];
        for space in [
            SpaceDescriptor::euclidean(d * d).unwrap(),
            SpaceDescriptor::schatten(p, d).unwrap(),
            SpaceDescriptor::operator(d).unwrap(),
        ] {
            let na = space.norm(&a).unwrap();
            let nb = space.norm(b).unwrap();
            let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
            prop_assert!(space.norm(&sum).unwrap() <= (na + nb) * (1.0 + 1e-12) + 1e-12);
            let scaled: Vec<f64> = a.iter().map(|x| c * x).collect();
            prop_assert!((space.norm(&scaled).unwrap() - c.abs() * na).abs() <= 1e-10 * (1.0 + na));
            prop_assert!(na >= 0.0);
        }
    }

    #[test]
    fn schatten_norms_decrease_in_p((d, a) in square(6), p in 1.0..8.0f64, dp in 0.0..4.0f64) {
        let sv = singular_values(&a, d).unwrap();
        let lo = lp_of(&sv, p);
        let hi = lp_of(&sv, p + dp);
        prop_assert!(hi <= lo * (1.0 + 1e-12) + 1e-14);
        prop_assert!(lp_of(&sv, f64::INFINITY) <= hi * (1.0 + 1e-12) + 1e-14);
        prop_assert!(check_schatten_vs_operator(&a, d, p).unwrap().passed());
    }

    #[test]
    fn singular_values_match_frobenius_and_oracle(
        rows in 1usize..7,
        cols in 1usize..7,
        vals in prop::collection::vec(-5.0..5.0f64, 36),
    ) {
        let a = &vals[..rows * cols];
        let sv = singular_values_rect(a, rows, cols).unwrap();
        let frob: f64 = a.iter().map(|v| v * v).sum();
        let s2: f64 = sv.iter().map(|s| s * s).sum();
        prop_assert!((frob - s2).abs() <= 1e-12 * frob.max(1.0));
        let mut oracle: Vec<f64> = DMatrix::from_row_slice(rows, cols, a).singular_values().iter().cloned().collect();
        oracle.sort_by(|x, y| y.partial_cmp(x).unwrap());
        prop_assert!(sv.windows(2).all(|w| w[0] >= w[1]));
        let top = oracle[0].max(1.0);
        for (s, o) in sv.iter().zip(&oracle) {
            prop_assert!((s - o).abs() <= 1e-10 * top, "{sv:?} vs {oracle:?}");
        }
    }

    #[test]
    fn p_equals_gamma_in_hilbert_spaces(f in cube_fn(6, 4)) {
        let space = if f.dim() == 1 { SpaceDescriptor::scalar() } else { SpaceDescriptor::euclidean(f.dim()).unwrap() };
        for x in 0..f.len() {
            let g = gradient_sq(&f, &space, GradientMode::Gamma, x).unwrap();
            let p = gradient_sq(&f, &space, P_EXACT, x).unwrap();
            prop_assert!((g - p).abs() <= 1e-10 * g.max(1.0));
        }
    }

    #[test]
    fn weak_gradient_is_smallest(f in cube_fn(5, 4)) {
        let space = SpaceDescriptor::euclidean(f.dim()).unwrap();
        for x in 0..f.len() {
            let w = gradient_sq(&f, &space, GradientMode::Weak, x).unwrap();
            let p = gradient_sq(&f, &space, P_EXACT, x).unwrap();
            prop_assert!(w <= p + 1e-10 * p.max(1.0));
        }
    }

    #[test]
    fn entropy_is_one_homogeneous(h in prop::collection::vec(0.0..10.0f64, 1..64), c in 0.01..100.0f64) {
        let scaled: Vec<f64> = h.iter().map(|v| c * v).collect();
        let (e, ec) = (entropy_of(&h), entropy_of(&scaled));
        prop_assert!(e >= 0.0);
        prop_assert!((ec - c * e).abs() <= 1e-9 * (1.0 + c * e));
    }

    #[test]
    fn orlicz_norm_homogeneous_and_monotone(f in cube_fn(5, 1), c in 0.1..10.0f64, bump in 0.0..2.0f64, p in 2.0..6.0f64) {
        let g = f.map_vertices(|v| v[0].abs());
        let n = orlicz_norm(&g, p).unwrap();
        let nc = orlicz_norm(&g.scaled(c), p).unwrap();
        prop_assert!((nc - c * n).abs() <= 1e-9 * (1.0 + c * n));
        let bigger = g.map_vertices(|v| v[0] + bump);
        prop_assert!(orlicz_norm(&bigger, p).unwrap() >= n * (1.0 - 1e-10));
    }

    #[test]
    fn sigma_partial_sums_converge(f in cube_fn(5, 2), tau in 0.001..0.3f64) {
        // keep τ‖f‖² moderate so 150 terms suffice
        let f = f.scaled(0.2);
        let space = if f.dim() == 1 { SpaceDescriptor::scalar() } else { SpaceDescriptor::euclidean(f.dim()).unwrap() };
        let sums = sigma_partial_sums(&f, &space, tau, 150).unwrap();
        prop_assert!(sums.windows(2).all(|w| w[1] >= w[0]));
        let exact = exp_moment(&f, &space, tau).unwrap();
        prop_assert!((sums[149] - exact).abs() < 1e-9 * exact.max(1.0));
    }
}
