use exhaustion::diffraction::{
    default_step, field_exhaustion, helmholtz_residual, Aperture, Evanescent, FieldPoint, Levels2, WaveParams,
};
use exhaustion::expr::{parse, BinOp, ExprAst, Func, NamedConst};
use exhaustion::improper::{integrate_semi_infinite, TailPolicy};
use exhaustion::quadrature::literal_partial_sum;
use exhaustion::series::{sinc_product, sinc_sum, Series};
use exhaustion::{integrate, integrate_from_zero, Integrand, Interval, QuadOptions, RefinementState};
use proptest::prelude::*;

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn poly_scale(coeffs: &[f64], iv: Interval) -> f64 {
    // max |f| over a fine grid, times the width
    let max = (0..=64)
        .map(|i| horner(coeffs, iv.a() + iv.width() * i as f64 / 64.0).abs())
        .fold(0.0, f64::max);
    max * iv.width()
}

fn polynomial() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 1..=7)
}

fn interval() -> impl Strategy<Value = Interval> {
    (-5.0..5.0f64, 0.1..5.0f64).prop_map(|(a, w)| Interval::new(a, a + w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn telescoping_matches_literal_sum(coeffs in polynomial(), iv in interval()) {
        let f = Integrand::new("poly", |x| horner(&coeffs, x));
        let scale = poly_scale(&coeffs, iv);
        let mut state = RefinementState::new(iv);
        for n in 1..=12u32 {
            state.refine(&f).unwrap();
            let literal = literal_partial_sum(&f, iv, n).unwrap();
            let tol = 1e-12 * state.partial().abs().max(scale);
            prop_assert!((state.partial() - literal).abs() <= tol, "N={} {} vs {}", n, state.partial(), literal);
        }
    }

    #[test]
    fn partial_is_interior_riemann_sum(coeffs in polynomial(), iv in interval(), levels in 1..=12u32) {
        let f = Integrand::new("poly", |x| horner(&coeffs, x));
        let mut state = RefinementState::new(iv);
        for _ in 0..levels {
            state.refine(&f).unwrap();
        }
        let nodes = (1u64..(1 << levels)).map(|m| exhaustion::dyadic_node(iv, levels, m).unwrap());
        let plain: f64 = nodes.map(|x| f.eval(x)).sum();
        let riemann = iv.width() * plain / 2f64.powi(levels as i32);
        let tol = 1e-12 * riemann.abs().max(poly_scale(&coeffs, iv));
        prop_assert!((state.partial() - riemann).abs() <= tol);
        let summed: f64 = state.history().iter().map(|t| t.value).sum::<f64>() * iv.width();
        prop_assert!((summed - state.partial()).abs() <= tol);
        prop_assert_eq!(state.history().len(), levels as usize);
    }

    #[test]
    fn integration_is_linear(
        p in polynomial(), q in polynomial(), alpha in -3.0..3.0f64, beta in -3.0..3.0f64,
        iv in interval(), level in 3..=14u32,
    ) {
        let opts = QuadOptions::forced(level);
        let f = Integrand::new("p", |x| horner(&p, x));
        let g = Integrand::new("q", |x| horner(&q, x));
        let combo = Integrand::new("ap+bq", |x| alpha * horner(&p, x) + beta * horner(&q, x));
        let lhs = integrate(&combo, iv, &opts).unwrap().value;
        let rhs = alpha * integrate(&f, iv, &opts).unwrap().value + beta * integrate(&g, iv, &opts).unwrap().value;
        let scale = alpha.abs() * poly_scale(&p, iv) + beta.abs() * poly_scale(&q, iv);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(scale));
    }

    #[test]
    fn translation_covariance_is_exact(coeffs in polynomial(), iv in interval(), level in 1..=12u32) {
        let opts = QuadOptions::forced(level);
        let f = Integrand::new("f", |x| horner(&coeffs, x));
        let a = iv.a();
        let shifted = Integrand::new("f(a+u)", |u| horner(&coeffs, a + u));
        let direct = integrate(&f, iv, &opts).unwrap();
        let moved = integrate_from_zero(&shifted, iv.width(), &opts).unwrap();
        prop_assert_eq!(direct.value.to_bits(), moved.value.to_bits());
    }

    #[test]
    fn cos_series_is_one_minus_sine_integral(x in 0.01..6.0f64, levels in 1..=16u32) {
        let series = Series::Cos { x }.eval(levels).unwrap();
        let sine = Integrand::new("sin", f64::sin);
        let core = integrate_from_zero(&sine, x, &QuadOptions::forced(levels)).unwrap().value;
        prop_assert_eq!(series.to_bits(), (1.0 - core).to_bits());
    }

    #[test]
    fn pythagorean_identity(x in -std::f64::consts::PI..std::f64::consts::PI) {
        let s = Series::Sin { x }.eval(16).unwrap();
        let c = Series::Cos { x }.eval(16).unwrap();
        prop_assert!((s * s + c * c - 1.0).abs() <= 2e-4);
    }

    #[test]
    fn ln_homomorphism(x in 0.5..2.0f64, y in 0.5..2.0f64) {
        let ln = |v: f64| Series::Ln { x: v }.eval(20).unwrap();
        prop_assert!((ln(x * y) - ln(x) - ln(y)).abs() <= 1e-4);
    }

    #[test]
    fn sinc_forms_agree(a in -10.0..10.0f64) {
        prop_assert!((sinc_product(a, 40) - sinc_sum(a, 20).unwrap()).abs() <= 1e-4);
    }

    #[test]
    fn parser_round_trip(ast in ast_strategy()) {
        prop_assume!(ast.depth() <= 6);
        let text = ast.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(back, ast);
    }

    #[test]
    fn exhaustion_field_solves_helmholtz(
        x in -3.0..3.0f64, y in -3.0..3.0f64, z in 1.0..10.0f64,
    ) {
        let wave = WaveParams::from_wavenumber(1.0, 1.0).unwrap();
        let ap = Aperture::unit();
        let field = |p: FieldPoint| field_exhaustion(&ap, p, wave, Levels2::square(6), Evanescent::Decay).unwrap();
        let pt = FieldPoint::new(x, y, z, 0.0);
        let r = helmholtz_residual(field, pt, 1.0, default_step(1.0));
        prop_assert!(r <= 1e-3, "residual {} at {:?}", r, pt);
    }
}

fn ast_strategy() -> impl Strategy<Value = ExprAst> {
    let leaf = prop_oneof![
        (0.0..100.0f64).prop_map(ExprAst::Number),
        (0u32..1000).prop_map(|n| ExprAst::Number(n as f64)),
        Just(ExprAst::Var),
        Just(ExprAst::Const(NamedConst::Pi)),
        Just(ExprAst::Const(NamedConst::E)),
    ];
    leaf.prop_recursive(5, 64, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow)
        ];
        let func = prop::sample::select(Func::ALL.to_vec());
        prop_oneof![
            inner.clone().prop_map(|e| ExprAst::Neg(Box::new(e))),
            (func, inner.clone()).prop_map(|(f, e)| ExprAst::Call(f, Box::new(e))),
            (op, inner.clone(), inner).prop_map(|(op, l, r)| ExprAst::Binary(op, Box::new(l), Box::new(r))),
        ]
    })
}

#[test]
fn block_sums_plus_boundaries_match_single_interval() {
    let f = Integrand::new("1/(1+x^2)", |x: f64| 1.0 / (1.0 + x * x));
    let policy = TailPolicy { block_width: 0.75, ..TailPolicy::default() };
    let level = 12;
    let blocks = 4;
    let mut sum = 0.0;
    for p in 0..blocks {
        sum += integrate(&f, policy.block(p).unwrap(), &QuadOptions::forced(level)).unwrap().value;
    }
    let h = policy.block_width / 2f64.powi(level as i32);
    let boundaries: f64 = (1..blocks).map(|p| f.eval(p as f64 * policy.block_width)).sum();
    let whole = integrate(
        &f,
        Interval::new(0.0, blocks as f64 * policy.block_width).unwrap(),
        &QuadOptions::forced(level + 2),
    )
    .unwrap()
    .value;
    assert!((sum + h * boundaries - whole).abs() <= 1e-12 * whole.abs());
    // Without the boundary samples the sums differ by about h * sum f(pb).
    assert!((sum - whole).abs() > 1e-6);
}

#[test]
fn block_values_eventually_non_increasing() {
    let cases: [(&str, fn(f64) -> f64); 3] = [
        ("exp(-x)", |x| (-x).exp()),
        ("1/(1+x^2)", |x| 1.0 / (1.0 + x * x)),
        ("exp(-x^2)", |x| (-x * x).exp()),
    ];
    for (label, func) in cases {
        let f = Integrand::new(label, func);
        let policy = TailPolicy { max_blocks: 60, ..TailPolicy::default() };
        let r = integrate_semi_infinite(&f, &policy, &QuadOptions::forced(10)).unwrap();
        let values: Vec<f64> = r.blocks.iter().map(|b| b.value).collect();
        assert!(values.windows(2).all(|w| w[1] <= w[0]), "{label}: {values:?}");
    }
}

fn exp_product(x: f64, levels: u32) -> f64 {
    Series::Exp { x }.eval(levels).unwrap() * Series::Exp { x: -x }.eval(levels).unwrap()
}

#[test]
fn exp_functional_equation() {
    let worst = (-40..=40)
        .map(|i| i as f64 * 0.05)
        .map(|x| ((exp_product(x, 16) - 1.0).abs(), x))
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    assert!(worst.0 <= 1e-4, "|E(x)E(-x) - 1| = {:.3e} at x = {}", worst.0, worst.1);
}

#[test]
fn exp_product_error_follows_endpoint_law() {
    // Each factor carries its interior-sum endpoint error; to first order
    // E(x)E(-x) - 1 = x 2^-(N+1) (e^x - e^-x).
    for i in -40..=40 {
        let x = i as f64 * 0.05;
        let predicted = x * 2f64.powi(-17) * (x.exp() - (-x).exp());
        assert!((exp_product(x, 16) - 1.0 - predicted).abs() <= 2e-8, "x = {x}");
    }
}
