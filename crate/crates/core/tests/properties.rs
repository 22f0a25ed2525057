//! Randomized grammar and derivative checks: printed trees reparse to the
//! same AST, forward-mode jets agree with central finite differences, and
//! accepted holomorphic profiles satisfy the Cauchy-Riemann equations at
//! sampled points.

use num_complex::Complex64;
use proptest::prelude::*;
use pseudoliouville::expr::{BinOp, Expr, Func};
use pseudoliouville::{FunctionProfile, HolomorphicProfile, Interval, Rect};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FD_STEP: f64 = 1e-5;

/// Leaves stick to non-negative literals: the parser reads a leading minus
/// as `Neg`, so only such trees are in the image of `parse`.
fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        2 => Just(Expr::Var),
        2 => (0u32..=800u32).prop_map(|k| Expr::Num(k as f64 / 8.0)),
        1 => (0.0f64..100.0).prop_map(Expr::Num),
    ]
}

/// Exponents must be variable-free; negatives exercise the unary slot
/// after `^`.
fn constant_exponent() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0u32..=6u32).prop_map(|k| Expr::Num(k as f64)),
        (1u32..=9u32).prop_map(|k| Expr::Num(k as f64 / 2.0)),
        (1u32..=4u32).prop_map(|k| Expr::Neg(Box::new(Expr::Num(k as f64)))),
    ]
}

fn any_func() -> impl Strategy<Value = Func> {
    prop_oneof![
        Just(Func::Sin),
        Just(Func::Cos),
        Just(Func::Tan),
        Just(Func::Exp),
        Just(Func::Log),
        Just(Func::Sqrt),
        Just(Func::Sinh),
        Just(Func::Cosh),
    ]
}

fn arith_op() -> impl Strategy<Value = BinOp> {
    prop_oneof![
        Just(BinOp::Add),
        Just(BinOp::Sub),
        Just(BinOp::Mul),
        Just(BinOp::Div),
    ]
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 96, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (arith_op(), inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::Binary(op, Box::new(l), Box::new(r))),
            (inner.clone(), constant_exponent())
                .prop_map(|(b, e)| Expr::Binary(BinOp::Pow, Box::new(b), Box::new(e))),
            (any_func(), inner).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn printed_trees_reparse_identically(e in expr_tree()) {
        let printed = e.print("x");
        let reparsed = Expr::parse(&printed, "x")
            .unwrap_or_else(|err| panic!("{printed:?} failed to reparse: {err}"));
        prop_assert_eq!(&reparsed, &e, "printed form {:?}", printed);
    }
}

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi).unwrap()
}

fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Rect {
    Rect::new(iv(x0, x1), iv(y0, y1))
}

#[test]
fn jet_derivatives_match_central_differences() {
    let profiles: &[(&str, &str, f64, f64)] = &[
        ("2+sin(x)", "x", -1.5, 1.5),
        ("exp(y)-3", "y", -1.5, 1.2),
        ("x", "x", -1.5, 1.5),
        ("y", "y", -1.5, 1.2),
        ("sin(y)", "y", 0.3, 1.2),
        ("1", "y", 0.3, 1.2),
        ("log(2+x)", "x", -1.0, 3.0),
        ("sqrt(x+2)", "x", -1.0, 2.0),
        ("tan(x)", "x", -1.0, 1.0),
        ("sinh(x)*cosh(x)", "x", -1.0, 1.0),
        ("x^3-2*x", "x", -2.0, 2.0),
        ("1/(x-4)", "x", -2.0, 2.0),
        ("(1+x^2)^-1.5", "x", -1.0, 1.0),
        ("cos(x)^2+0.5*x^4", "x", -1.0, 1.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (src, var, lo, hi) in profiles {
        let p = FunctionProfile::parse(src, var, iv(*lo, *hi)).unwrap();
        for _ in 0..100 {
            let x = rng.gen_range(lo + 1e-4..hi - 1e-4);
            let jet = p.jet(x).unwrap();
            let fd = (p.jet(x + FD_STEP).unwrap().v - p.jet(x - FD_STEP).unwrap().v)
                / (2.0 * FD_STEP);
            let gap = (jet.d1 - fd).abs() / (1.0 + jet.d1.abs());
            assert!(gap < 1e-6, "{src} at {x}: jet {} vs fd {fd}", jet.d1);
        }
    }
}

#[test]
fn holomorphic_profiles_satisfy_cauchy_riemann_at_samples() {
    let profiles = vec![
        HolomorphicProfile::parse_scaled(
            "2+cos(z)",
            "z",
            rect(-1.2, 1.2, -0.8, 0.8),
            Complex64::new(0.0, 1.0),
        )
        .unwrap(),
        HolomorphicProfile::parse("z", "z", rect(-1.2, 1.2, -0.8, 0.8)).unwrap(),
        HolomorphicProfile::parse("z^2+exp(z)", "z", rect(-1.0, 1.0, -1.0, 1.0)).unwrap(),
        HolomorphicProfile::parse("log(3+z)", "z", rect(-1.0, 1.0, -1.0, 1.0)).unwrap(),
        HolomorphicProfile::parse("1/(z-3)", "z", rect(-1.0, 1.0, -1.0, 1.0)).unwrap(),
        HolomorphicProfile::parse("sin(z)*cosh(z)", "z", rect(-1.0, 1.0, -1.0, 1.0)).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for p in &profiles {
        let d = p.domain();
        for _ in 0..100 {
            let x = rng.gen_range(d.x.lo + 1e-4..d.x.hi - 1e-4);
            let y = rng.gen_range(d.y.lo + 1e-4..d.y.hi - 1e-4);
            let ddx = (p.jet(x + FD_STEP, y).unwrap().v - p.jet(x - FD_STEP, y).unwrap().v)
                / (2.0 * FD_STEP);
            let ddy = (p.jet(x, y + FD_STEP).unwrap().v - p.jet(x, y - FD_STEP).unwrap().v)
                / (2.0 * FD_STEP);
            // Both Cauchy-Riemann equations at once: d/dy h = i d/dx h.
            let cr = (ddy - Complex64::i() * ddx).norm();
            assert!(
                cr < 1e-8 * (1.0 + ddx.norm()),
                "Cauchy-Riemann residual {cr:e} at ({x}, {y})"
            );
            let jet = p.jet(x, y).unwrap();
            let gap = (ddx - jet.d1).norm() / (1.0 + jet.d1.norm());
            assert!(gap < 1e-6, "complex derivative mismatch {gap:e} at ({x}, {y})");
        }
    }
}
