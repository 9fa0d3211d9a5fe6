use polyqaoa::parser::{lower, parse, parse_objective, Expr, ExprKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS: &[&str] = &[
    "0",
    "3.5",
    "x",
    "-x",
    "--x",
    "x + y",
    "x - y - z",
    "x * y * z",
    "2 * x + 3",
    "x^2",
    "x^0",
    "-x^2",
    "(-x)^3",
    "2^3 * x^2",
    "(x^2)^2",
    "(x + 1)^2",
    "(x - y)^3",
    "x*(y + z) - 4*x*y",
    "0.5*(x^4 - 16*x^2 + 5*x)",
    "100*(y - x^2)^2 + (1 - x)^2",
    "x^4 - 16*x^2 + 5*x + y^4 - 16*y^2 + 5*y",
    "((((x))))",
    "0.001*x + 200.0*y",
    "x*0.25 - 1.125",
    "x - -y",
    "-(x + y)*(x - y)",
    "3*x*x*x - x^3",
    "(x + y + z)^4",
    "alpha_1 * beta2 - alpha_1^2",
    "(1 - x)*(1 + x)*(1 - y)",
    "  x\t*\n y ",
    "-2*-3*x",
    "(2*x - 1)^5 - 7",
    "x^1 + (x^1)^3",
];

/// Direct recursive evaluation of the syntax tree, independent of lowering.
fn eval(e: &Expr, at: &dyn Fn(&str) -> f64) -> f64 {
    match &e.kind {
        ExprKind::Number(v) => *v,
        ExprKind::Variable(name) => at(name),
        ExprKind::Neg(a) => -eval(a, at),
        ExprKind::Add(a, b) => eval(a, at) + eval(b, at),
        ExprKind::Sub(a, b) => eval(a, at) - eval(b, at),
        ExprKind::Mul(a, b) => eval(a, at) * eval(b, at),
        ExprKind::Pow(a, k) => eval(a, at).powi(*k as i32),
    }
}

#[test]
fn lowering_agrees_with_tree_evaluation() {
    assert!(CORPUS.len() >= 30);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for src in CORPUS {
        let ast = parse(src).unwrap_or_else(|e| panic!("{src}: {e}"));
        let poly = lower(&ast).unwrap();
        for _ in 0..20 {
            let vals: Vec<f64> = (0..6).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let at = |name: &str| {
                let h = name.bytes().map(|b| b as usize).sum::<usize>();
                vals[h % vals.len()]
            };
            let direct = eval(&ast, &at);
            let lowered = poly.evaluate(|n| Some(at(n))).unwrap();
            assert!(
                (direct - lowered).abs() <= 1e-9 * (1.0 + direct.abs()),
                "{src}: {direct} vs {lowered}"
            );
        }
    }
}

#[test]
fn benchmark_values() {
    let st = parse_objective("0.5*(x^4 - 16*x^2 + 5*x)").unwrap();
    assert_eq!(st.evaluate_at(&[("x", -3.0)]).unwrap(), -39.0);
    let rb = parse_objective("100*(y - x^2)^2 + (1 - x)^2").unwrap();
    assert_eq!(rb.evaluate_at(&[("x", 1.0), ("y", 1.0)]).unwrap(), 0.0);
    assert_eq!(rb.evaluate_at(&[("x", 0.0), ("y", 0.0)]).unwrap(), 1.0);
}

#[test]
fn rejections_carry_spans() {
    for src in ["", "x +", "2x", "x / 2", "x^-1", "x^1.5", "x^y", "(x", "x)", "x $ y", "1..2", "x ** 2", "2^3^2", "2^x"] {
        let err = parse(src).expect_err(src);
        assert!(err.span.start <= err.span.end && err.span.end <= src.len(), "{src}: {err}");
    }
    let err = parse("x / 2").unwrap_err();
    assert_eq!(err.to_string(), "unsupported operator / at 2..3");
}

#[test]
fn random_bytes_never_panic() {
    const ALPHABET: &[u8] = b"xyz0123456789.eE+-*^/() \t_$a";
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut accepted = 0;
    for i in 0..100_000 {
        let len = rng.gen_range(0..24);
        let bytes: Vec<u8> = (0..len)
            .map(|_| if i % 4 == 0 { rng.gen() } else { ALPHABET[rng.gen_range(0..ALPHABET.len())] })
            .collect();
        let src = String::from_utf8_lossy(&bytes);
        match parse(&src) {
            Ok(ast) => {
                accepted += 1;
                // `^` applies only to small literals here, so lowering stays bounded
                let _ = lower(&ast);
            }
            Err(e) => assert!(e.span.end <= src.len()),
        }
    }
    assert!(accepted > 0);
}

#[test]
fn deep_nesting_is_rejected_not_overflowed() {
    let src = format!("{}x{}", "(".repeat(10_000), ")".repeat(10_000));
    assert!(parse(&src).is_err());
    let src = "-".repeat(10_000) + "x";
    assert!(parse(&src).is_err());
}
