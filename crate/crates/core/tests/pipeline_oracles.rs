use num_complex::Complex64;
use polyqaoa::circuit::{build_qaoa, GateModel};
use polyqaoa::encoding::{decode, discretize, encode, DomainSpec, VarSpec};
use polyqaoa::optimize::{train_qaoa, OptimizerConfig};
use polyqaoa::parser::parse_objective;
use polyqaoa::quadratize::{quadratize, verify_quadratization};
use polyqaoa::sim::{simulate_fast, simulate_gates, StateVector};
use polyqaoa::spin::{spin_energy_table, to_spin};
use polyqaoa::{BinaryPoly, SpinPoly};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STYBLINSKI_TANG: &str = "0.5*(x^4 - 16*x^2 + 5*x)";
const ROSENBROCK: &str = "100*(y - x^2)^2 + (1 - x)^2";

fn st(x: f64) -> f64 {
    0.5 * (x.powi(4) - 16.0 * x * x + 5.0 * x)
}

fn rb(x: f64, y: f64) -> f64 {
    100.0 * (y - x * x).powi(2) + (1.0 - x).powi(2)
}

/// Sign-magnitude value of `bits` written out by hand: sign, n integer bits, m fraction bits.
fn oracle_decode(bits: &[bool], n: usize) -> f64 {
    let mut mag = 0.0;
    for (i, &b) in bits[1..].iter().enumerate() {
        if b {
            mag += 2f64.powi(n as i32 - 1 - i as i32);
        }
    }
    if bits[0] {
        -mag
    } else {
        mag
    }
}

fn bits_of(k: usize, width: usize) -> Vec<bool> {
    (0..width).map(|q| k >> (width - 1 - q) & 1 == 1).collect()
}

fn domain(names: &[&str], m: u32) -> DomainSpec {
    DomainSpec::new(names.iter().map(|n| VarSpec::signed(*n, 2, m)).collect()).unwrap()
}

fn pubo(src: &str, names: &[&str], m: u32) -> BinaryPoly {
    discretize(&parse_objective(src).unwrap(), &domain(names, m)).unwrap().0
}

#[test]
fn discretization_matches_objective_on_every_assignment() {
    for m in 0..=3 {
        let p = pubo(STYBLINSKI_TANG, &["x"], m);
        let w = 3 + m as usize;
        assert_eq!(p.num_bits(), w);
        let table = p.energy_table().unwrap();
        for (k, &e) in table.iter().enumerate() {
            let x = oracle_decode(&bits_of(k, w), 2);
            assert!((e - st(x)).abs() < 1e-9, "m={m} k={k}");
        }
    }
    for m in 0..=2 {
        let p = pubo(ROSENBROCK, &["x", "y"], m);
        let w = 3 + m as usize;
        assert_eq!(p.num_bits(), 2 * w);
        let table = p.energy_table().unwrap();
        for (k, &e) in table.iter().enumerate() {
            let b = bits_of(k, 2 * w);
            let (x, y) = (oracle_decode(&b[..w], 2), oracle_decode(&b[w..], 2));
            assert!((e - rb(x, y)).abs() < 1e-9, "m={m} k={k}");
        }
    }
}

#[test]
fn qubit_counts_follow_the_layout() {
    assert_eq!(pubo(STYBLINSKI_TANG, &["x"], 3).num_bits(), 6);
    assert_eq!(pubo(ROSENBROCK, &["x", "y"], 1).num_bits(), 8);
}

#[test]
fn styblinski_tang_grid_minimum() {
    let table = pubo(STYBLINSKI_TANG, &["x"], 0).energy_table().unwrap();
    let min = table.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(min, -39.0);
    assert_eq!(table[0b111], -39.0);
}

#[test]
fn naive_expansion_of_the_quadratic_example_is_not_the_oracle() {
    let p = pubo("x^2 + 2*x", &["x"], 0);
    assert_eq!(p.evaluate(&[true, true, true]).unwrap(), 3.0);
    // 4(4x0x1 + x0x2 + x1x2) disagrees at x = 1 (bits 0 0 1)
    let claimed = BinaryPoly::from_terms(3, [(vec![0, 1], 16.0), (vec![0, 2], 4.0), (vec![1, 2], 4.0)]).unwrap();
    assert_ne!(claimed.evaluate(&[false, false, true]).unwrap(), p.evaluate(&[false, false, true]).unwrap());
    assert_eq!(p.evaluate(&[false, false, true]).unwrap(), 3.0);
}

#[test]
fn encode_decode_round_trip_and_pitch() {
    for m in 0..=3u32 {
        let spec = VarSpec::signed("x", 2, m);
        let w = 3 + m as usize;
        let mut grid = Vec::new();
        for k in 0..1 << w {
            let bits = bits_of(k, w);
            let v = decode(&bits, &spec).unwrap();
            assert_eq!(v, oracle_decode(&bits, 2));
            let back = encode(v, &spec).unwrap();
            let negative_zero = bits[0] && bits[1..].iter().all(|b| !b);
            if negative_zero {
                assert!(back.iter().all(|b| !b));
            } else {
                assert_eq!(back, bits);
            }
            if !bits[0] {
                grid.push(v);
            }
        }
        grid.sort_by(f64::total_cmp);
        for pair in grid.windows(2) {
            assert_eq!(pair[1] - pair[0], 2f64.powi(-(m as i32)));
        }
    }
}

fn benchmark_pubos() -> Vec<(String, BinaryPoly)> {
    let mut out = Vec::new();
    for m in 0..=3 {
        out.push((format!("1d-st m={m}"), pubo(STYBLINSKI_TANG, &["x"], m)));
    }
    for m in 0..=1 {
        out.push((format!("2d-rb m={m}"), pubo(ROSENBROCK, &["x", "y"], m)));
    }
    out
}

#[test]
fn quadratization_is_sound_on_every_benchmark() {
    for (name, p) in benchmark_pubos() {
        let q = quadratize(&p).unwrap();
        assert!(q.qubo.degree() <= 2, "{name}");
        assert!(q.total_bits() <= 24, "{name}");
        if p.degree() > 2 {
            assert!(q.num_ancilla > 0, "{name}");
        } else {
            assert_eq!(q.num_ancilla, 0, "{name}");
        }
        let report = verify_quadratization(&p, &q).unwrap();
        assert!(report.passed, "{name}: {report:?}");
        assert!(report.argmin_agree && report.ancillas_consistent, "{name}");
        assert_eq!(report.original_min, report.qubo_min, "{name}");
        assert_eq!(quadratize(&p).unwrap(), q, "{name}");
    }
}

#[test]
fn ancilla_count_is_monotone_in_resolution() {
    let counts: Vec<usize> = (0..=3)
        .map(|m| quadratize(&pubo(STYBLINSKI_TANG, &["x"], m)).unwrap().num_ancilla)
        .collect();
    assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
    // two magnitude bits keep the lowest resolution quadratic already
    assert_eq!(counts[0], 0);
    assert!(counts[3] > 0);
}

#[test]
fn spin_tables_match_binary_tables() {
    for (name, p) in benchmark_pubos() {
        let h = to_spin(&p);
        assert_eq!(spin_energy_table(&h).unwrap(), p.energy_table().unwrap(), "{name}");
    }
}

fn random_spin_poly(rng: &mut ChaCha8Rng, n: usize) -> SpinPoly {
    let terms: Vec<(Vec<usize>, f64)> = (0..rng.gen_range(1..8))
        .map(|_| {
            let k = rng.gen_range(0..=n.min(4));
            let support: Vec<usize> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            (support, rng.gen_range(-2.0..2.0))
        })
        .collect();
    SpinPoly::from_terms(n, terms).unwrap()
}

#[test]
fn gate_and_fast_paths_agree_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..24 {
        let n = rng.gen_range(1..=10);
        let p = rng.gen_range(1..=3);
        let h = random_spin_poly(&mut rng, n);
        let gs: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let bs: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let fast = simulate_fast(&h, &gs, &bs).unwrap();
        let phase = Complex64::from_polar(1.0, h.constant_term() * gs.iter().sum::<f64>());
        let ladder = simulate_gates(&build_qaoa(&h, p, GateModel::Ladder).unwrap().bind(&gs, &bs).unwrap()).unwrap();
        let native = simulate_gates(&build_qaoa(&h, p, GateModel::NativeGadget).unwrap().bind(&gs, &bs).unwrap()).unwrap();
        for k in 0..1 << n {
            let f = fast.amplitudes()[k] * phase;
            assert!((ladder.amplitudes()[k] - f).norm() < 1e-9, "case {case} k {k}");
            assert!((ladder.amplitudes()[k] - native.amplitudes()[k]).norm() < 1e-9, "case {case} k {k}");
        }
        assert!((ladder.norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn uniform_expectation_is_the_grid_mean() {
    let p = pubo(STYBLINSKI_TANG, &["x"], 0);
    let table = p.energy_table().unwrap();
    let oracle: f64 = (0..8).map(|k| st(oracle_decode(&bits_of(k, 3), 2))).sum::<f64>() / 8.0;
    let e = StateVector::uniform(3).unwrap().expectation(&table).unwrap();
    assert!((e - oracle).abs() < 1e-12);
}

#[test]
fn trained_styblinski_tang_beats_the_uniform_state() {
    let p = pubo(STYBLINSKI_TANG, &["x"], 0);
    let h = to_spin(&p);
    let table = p.energy_table().unwrap();
    let uniform = StateVector::uniform(3).unwrap().expectation(&table).unwrap();
    for seed in [1, 2] {
        let t = train_qaoa(&h, 5, &OptimizerConfig::default(), seed).unwrap();
        assert!(t.trace.best_value < uniform, "{} vs {uniform}", t.trace.best_value);
        assert!(t.trace.iterations <= 1000);
    }
}
