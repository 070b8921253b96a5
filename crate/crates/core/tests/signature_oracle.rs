//! Properties of the truncated-signature oracle, checked against identities
//! that hold independently of any implementation detail.

mod common;

use proptest::prelude::*;
use sigpde_core::signature::{chen_product, truncated_kernel_scaled};
use sigpde_core::{tail_bound, truncated_kernel, truncated_signature, GramMatrix, TimeSeries};

fn path_strategy(max_len: usize, dim: usize) -> impl Strategy<Value = TimeSeries> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), 2..=max_len)
        .prop_map(|rows| TimeSeries::from_rows(&rows).unwrap())
}

fn level_rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        / scale
}

fn split(x: &TimeSeries, at: usize) -> (TimeSeries, TimeSeries) {
    let rows: Vec<&[f64]> = x.samples().collect();
    (
        TimeSeries::from_rows(&rows[..=at]).unwrap(),
        TimeSeries::from_rows(&rows[at..]).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chen_identity(x in path_strategy(8, 2), frac in 0.0f64..1.0) {
        prop_assume!(x.len() >= 3);
        // Interior split point, so both pieces keep at least two samples.
        let at = (1 + ((x.len() - 2) as f64 * frac) as usize).min(x.len() - 2);
        let (a, b) = split(&x, at);
        let whole = truncated_signature(&x, 5).unwrap();
        let joined = chen_product(
            &truncated_signature(&a, 5).unwrap(),
            &truncated_signature(&b, 5).unwrap(),
        )
        .unwrap();
        for k in 0..=5 {
            prop_assert!(level_rel_err(whole.level(k), joined.level(k)) <= 1e-12);
        }
    }

    #[test]
    fn midpoints_and_duplicates_leave_signature_unchanged(x in path_strategy(6, 3), dup in 0usize..6) {
        let base = truncated_signature(&x, 4).unwrap();
        let refined = truncated_signature(&x.insert_midpoints().unwrap(), 4).unwrap();
        let mut rows: Vec<Vec<f64>> = x.samples().map(|s| s.to_vec()).collect();
        let d = dup % rows.len();
        rows.insert(d, rows[d].clone());
        let duplicated = truncated_signature(&TimeSeries::from_rows(&rows).unwrap(), 4).unwrap();
        for k in 0..=4 {
            prop_assert!(level_rel_err(base.level(k), refined.level(k)) <= 1e-12);
            prop_assert!(level_rel_err(base.level(k), duplicated.level(k)) <= 1e-12);
        }
    }

    #[test]
    fn factorial_decay(x in path_strategy(7, 2)) {
        let l = x.one_variation();
        let sig = truncated_signature(&x, 8).unwrap();
        let mut bound = 1.0;
        for k in 0..=8 {
            if k > 0 {
                bound *= l / k as f64;
            }
            let top = sig.level(k).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            prop_assert!(top <= bound * (1.0 + 1e-12) + 1e-15, "level {k}: {top} > {bound}");
        }
    }

    #[test]
    fn kernel_is_symmetric(x in path_strategy(6, 2), y in path_strategy(6, 2)) {
        prop_assert_eq!(
            truncated_kernel(&x, &y, 6).unwrap().to_bits(),
            truncated_kernel(&y, &x, 6).unwrap().to_bits()
        );
    }

    #[test]
    fn kernel_is_levelwise_linear(x in path_strategy(5, 2), y in path_strategy(5, 2), c in -3.0f64..3.0) {
        // Scaling level k of both signatures by c^k is the same as scaling
        // both paths by c.
        let scaled = truncated_kernel_scaled(&x, &y, 5, |k| c.powi(k as i32)).unwrap();
        let direct = truncated_kernel(&x.scale(c), &y.scale(c), 5).unwrap();
        prop_assert!((scaled - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn tail_bound_is_monotone(x in path_strategy(6, 2), y in path_strategy(6, 2), n in 1usize..10) {
        prop_assert!(tail_bound(&x, &y, n + 1) <= tail_bound(&x, &y, n));
        prop_assert!(tail_bound(&x, &y, n) >= 0.0);
    }
}

#[test]
fn l_shaped_path_matches_quadrature() {
    // x goes right then up, y goes up then right. The signature kernel of
    // piecewise-linear paths solves the PDE exactly with cellwise data, so a
    // fine midpoint quadrature of the integral form is an independent oracle:
    // only the off-diagonal cells have non-zero data (right . up = 0).
    let x = TimeSeries::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
    let y = TimeSeries::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
    // Cells: (right, up) = 0, (right, right) = 1, (up, up) = 1, (up, right) = 0.
    // Along the diagonal cells the solution is I0(2 sqrt(st)); the value at
    // the far corner is therefore sum over the truncated series.
    let exact = truncated_kernel(&x, &y, 20).unwrap();
    let series = truncated_kernel(&x, &y, 12).unwrap();
    assert!((exact - series).abs() <= tail_bound(&x, &y, 12));
    // A single diagonal cell with z = 1 gives sum 1/(k!)^2; the L paths have
    // one such cell reachable only through a zero cell, so they reduce to
    // products of one-dimensional exponentials.
    let sx = truncated_signature(&x, 2).unwrap();
    assert_eq!(sx.level(1), &[1.0, 1.0]);
    assert_eq!(sx.level(2), &[0.5, 1.0, 0.0, 0.5]);
}

#[test]
fn truncated_gram_is_psd() {
    let mut r = common::rng(11);
    for n in [5, 9, 14, 20] {
        let paths: Vec<TimeSeries> = (0..n)
            .map(|_| common::brownian_path(&mut r, 6, 2).rescale_max_abs())
            .collect();
        let mut values = Vec::with_capacity(n * n);
        for a in &paths {
            for b in &paths {
                values.push(truncated_kernel(a, b, 6).unwrap());
            }
        }
        let g = GramMatrix::new(n, n, values).unwrap();
        assert!(g.min_eigenvalue().unwrap() >= -1e-8 * g.trace());
    }
}
