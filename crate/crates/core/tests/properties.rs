use proptest::prelude::*;

use svlab::conditions::{s_epsilon_partial_sums, window_integral};
use svlab::discrete::{draw_noise, resolvent_seq, simulate_direct_with, simulate_voc, DiscreteSystem, Initial, MatrixSeq};
use svlab::func::{from_fn, Constant};
use svlab::kernel::KernelSeq;
use svlab::measure::{convolve_measure, Atom, Density};
use svlab::noise::{NoiseFamily, NoiseSpec};
use svlab::{GridPath, GridSpec, Matrix, SignedMeasure, Support, Vector};

fn small() -> impl Strategy<Value = f64> {
    -0.3..0.3f64
}

/// Plain scalar recursion, independent of the library.
fn scalar_resolvent_oracle(k: &[f64], n: usize) -> Vec<f64> {
    let mut r = vec![1.0];
    for m in 0..n {
        let conv: f64 = (0..=m).map(|j| k.get(m - j).copied().unwrap_or(0.0) * r[j]).sum();
        r.push(r[m] + conv);
    }
    r
}

fn half_line_measure(atoms: &[(f64, f64)], density: &[f64], cell: f64) -> SignedMeasure {
    let atoms = atoms
        .iter()
        .map(|&(location, w)| Atom {
            location,
            weight: Matrix::from_element(1, 1, w),
        })
        .collect();
    let density = (!density.is_empty()).then(|| Density {
        start: 0.0,
        cell,
        values: density.iter().map(|&v| Matrix::from_element(1, 1, v)).collect(),
    });
    SignedMeasure::new(1, 1, Support::HalfLine, atoms, density).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resolvent_matches_plain_recursion(k in prop::collection::vec(small(), 1..6), n in 1usize..40) {
        let kernel = KernelSeq::finite(1, k.iter().map(|&v| Matrix::from_element(1, 1, v)).collect()).unwrap();
        let r = resolvent_seq(&kernel, n);
        let oracle = scalar_resolvent_oracle(&k, n);
        for (a, b) in r.iter().zip(&oracle) {
            prop_assert!((a[(0, 0)] - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn direct_and_voc_agree(
        k in prop::collection::vec(small(), 1..4),
        f0 in -1.0..1.0f64,
        s in 0.0..1.0f64,
        seed in any::<u64>(),
    ) {
        let n = 60;
        let kernel = KernelSeq::finite(2, k.iter().map(|&v| Matrix::from_diagonal_element(2, 2, v)).collect()).unwrap();
        let sys = DiscreteSystem::new(
            kernel.clone(),
            MatrixSeq::Geometric { base: Matrix::from_element(2, 1, f0), ratio: 0.9 },
            MatrixSeq::Constant(Matrix::from_diagonal_element(2, 2, s)),
            NoiseSpec::new(NoiseFamily::Uniform { low: -1.0, high: 1.0 }, true, 2).unwrap(),
            Some(Initial::Fixed(Vector::from_vec(vec![1.0, -0.5]))),
            n,
        ).unwrap();
        let draws = draw_noise(&sys, seed, 0);
        let direct = simulate_direct_with(&sys, &draws).unwrap();
        let voc = simulate_voc(&resolvent_seq(&kernel, n), &sys, &draws).unwrap();
        prop_assert!(direct.relative_gap(&voc) < 1e-10);
    }

    #[test]
    fn total_variation_is_subadditive_and_homogeneous(
        a in prop::collection::vec((0.0..3.0f64, -2.0..2.0f64), 0..4),
        b in prop::collection::vec((0.0..3.0f64, -2.0..2.0f64), 0..4),
        da in prop::collection::vec(-1.0..1.0f64, 0..5),
        c in -3.0..3.0f64,
    ) {
        let mu = half_line_measure(&a, &da, 0.25);
        let nu = half_line_measure(&b, &[], 0.25);
        let tv = |m: &SignedMeasure| m.total_variation()[(0, 0)];
        let sum = mu.sum(&nu).unwrap();
        prop_assert!(tv(&sum) <= tv(&mu) + tv(&nu) + 1e-12);
        prop_assert!((tv(&mu.scaled(c)) - c.abs() * tv(&mu)).abs() <= 1e-12 * (1.0 + tv(&mu)));
    }

    #[test]
    fn measure_convolution_is_linear(
        atoms in prop::collection::vec((0u32..8, -1.0..1.0f64), 1..4),
        x in prop::collection::vec(-1.0..1.0f64, 33),
        y in prop::collection::vec(-1.0..1.0f64, 33),
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
    ) {
        let grid = GridSpec::new(0.125, 4.0).unwrap();
        let atoms: Vec<(f64, f64)> = atoms.iter().map(|&(i, w)| (i as f64 * 0.125, w)).collect();
        let mu = half_line_measure(&atoms, &[0.5, -0.25], 0.125);
        let px = GridPath::from_scalar(grid, x.clone()).unwrap();
        let py = GridPath::from_scalar(grid, y.clone()).unwrap();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + beta * b).collect();
        let pm = GridPath::from_scalar(grid, mix).unwrap();
        for k in [0, 5, 16, 32] {
            let lhs = convolve_measure(&mu, &pm, k, &grid).unwrap()[0];
            let rhs = alpha * convolve_measure(&mu, &px, k, &grid).unwrap()[0]
                + beta * convolve_measure(&mu, &py, k, &grid).unwrap()[0];
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn windows_add_and_grow(m1 in 1usize..16, m2 in 1usize..16, freq in 0.1..5.0f64) {
        let grid = GridSpec::new(0.0625, 8.0).unwrap();
        let h = grid.step();
        let f = from_fn("test", move |t| (freq * t).sin().powi(2) + 0.1);
        let w1 = window_integral(f.as_ref(), m1 as f64 * h, &grid).unwrap();
        let w2 = window_integral(f.as_ref(), m2 as f64 * h, &grid).unwrap();
        let w12 = window_integral(f.as_ref(), (m1 + m2) as f64 * h, &grid).unwrap();
        for k in 0..grid.n_nodes() - m1 {
            let split = w1.values[k] + w2.values[k + m1];
            prop_assert!((w12.values[k] - split).abs() <= 1e-12 * w12.values[k].max(1.0));
            // nonnegative integrand
            prop_assert!(w12.values[k] >= w1.values[k]);
        }
    }

    #[test]
    fn s_epsilon_monotone_in_n_and_eps(
        windows in prop::collection::vec(0.0..2.0f64, 1..200),
        e1 in 0.01..1.0f64,
        de in 0.0..1.0f64,
    ) {
        let lo = s_epsilon_partial_sums(&windows, e1);
        let hi = s_epsilon_partial_sums(&windows, e1 + de);
        for w in lo.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        for (a, b) in lo.iter().zip(&hi) {
            prop_assert!(b <= a);
        }
    }
}

#[test]
fn constant_window_is_theta_times_value() {
    let grid = GridSpec::new(0.25, 10.0).unwrap();
    let w = window_integral(&Constant(3.0), 2.0, &grid).unwrap();
    assert!(w.values.iter().all(|v| (v - 6.0).abs() < 1e-12));
}
