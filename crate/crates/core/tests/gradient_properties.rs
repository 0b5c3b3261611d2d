use elastoquant_core::gradients::{aggregate, gradient_field};
use elastoquant_core::model::RsMap;
use elastoquant_core::oracle::brute_force_oracle;
use proptest::prelude::*;
use proptest::test_runner::Config as ProptestConfig;

fn close(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(a), Some(b)) => a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs()),
        _ => false,
    }
}

fn matrix(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        prop::collection::vec(prop::collection::vec(0.01f64..10.0, w), h)
    })
}

/// Values on a 1/64 grid keep sums and differences exact in f64.
fn dyadic_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=16, 2usize..=16).prop_flat_map(|(w, h)| {
        prop::collection::vec(
            prop::collection::vec((0i32..6400).prop_map(|i| i as f64 / 64.0), w),
            h,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pipeline_matches_oracle(rs in matrix(32), sx in 0.1f64..3.0, sy in 0.1f64..3.0) {
        let oracle = brute_force_oracle(&rs, sx, sy);
        let map = RsMap::from_rows(&rs).unwrap();
        match aggregate(gradient_field(&map, sx, sy).unwrap(), 1) {
            Ok(f) => {
                prop_assert_eq!(f.row_mean_gx.len(), oracle.row_mean_gx.len());
                for (a, b) in f.row_mean_gx.iter().zip(&oracle.row_mean_gx) {
                    prop_assert!(close(*a, *b));
                }
                for (a, b) in f.col_mean_gy.iter().zip(&oracle.col_mean_gy) {
                    prop_assert!(close(*a, *b));
                }
                prop_assert!(close(f.total_gx, oracle.total_gx));
                prop_assert!(close(f.total_gy, oracle.total_gy));
                prop_assert!(close(f.total_gr, oracle.total_gr));
            }
            Err(_) => {
                prop_assert!(oracle.total_gx.is_none() && oracle.total_gy.is_none());
            }
        }
    }

    #[test]
    fn oblique_dominates_components(rs in matrix(16)) {
        let map = RsMap::from_rows(&rs).unwrap();
        let f = gradient_field(&map, 1.0, 1.0).unwrap();
        for ((gx, gy), gr) in f.gx.as_slice().iter().zip(f.gy.as_slice()).zip(f.gr.as_slice()) {
            match (gx, gy, gr) {
                (Some(x), Some(y), Some(r)) => {
                    prop_assert!(*r >= 0.0);
                    prop_assert!(*r >= x.abs() && *r >= y.abs());
                    prop_assert!((r - (x * x + y * y).sqrt()).abs() <= 1e-12 * r.max(1.0));
                }
                (_, _, None) => prop_assert!(gx.is_none() || gy.is_none()),
                _ => prop_assert!(false, "gr valid without both components"),
            }
        }
        if let Ok(f) = aggregate(f, 1) {
            if let (Some(x), Some(y), Some(r)) = (f.total_gx, f.total_gy, f.total_gr) {
                prop_assert!(r >= x.abs() && r >= y.abs());
            }
        }
    }

    #[test]
    fn shift_invariance_is_exact(rs in dyadic_matrix(), k in -640i32..640) {
        let shift = k as f64 / 64.0;
        let shifted: Vec<Vec<f64>> = rs.iter().map(|r| r.iter().map(|v| v + shift).collect()).collect();
        let a = gradient_field(&RsMap::from_rows(&rs).unwrap(), 1.0, 1.0).unwrap();
        let b = gradient_field(&RsMap::from_rows(&shifted).unwrap(), 1.0, 1.0).unwrap();
        prop_assert_eq!(a.gx, b.gx);
        prop_assert_eq!(a.gy, b.gy);
        prop_assert_eq!(a.gr, b.gr);
    }

    #[test]
    fn directional_gradients_are_linear(
        (r1, r2) in (1usize..=12, 1usize..=12).prop_flat_map(|(w, h)| {
            let m = prop::collection::vec(prop::collection::vec(-5.0f64..5.0, w), h);
            (m.clone(), m)
        }),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let combo: Vec<Vec<f64>> = r1
            .iter()
            .zip(&r2)
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect())
            .collect();
        let f1 = gradient_field(&RsMap::from_rows(&r1).unwrap(), 1.0, 1.0).unwrap();
        let f2 = gradient_field(&RsMap::from_rows(&r2).unwrap(), 1.0, 1.0).unwrap();
        let fc = gradient_field(&RsMap::from_rows(&combo).unwrap(), 1.0, 1.0).unwrap();
        for (field, one, two) in [(&fc.gx, &f1.gx, &f2.gx), (&fc.gy, &f1.gy, &f2.gy)] {
            for ((c, p), q) in field.as_slice().iter().zip(one.as_slice()).zip(two.as_slice()) {
                match (c, p, q) {
                    (Some(c), Some(p), Some(q)) => prop_assert!((c - (a * p + b * q)).abs() <= 1e-9),
                    (None, None, None) => {}
                    _ => prop_assert!(false, "validity differs"),
                }
            }
        }
    }

    #[test]
    fn invalidating_a_pixel_never_adds_cells(rs in matrix(12), pick in any::<prop::sample::Index>()) {
        let full = RsMap::from_rows(&rs).unwrap();
        let mut holed = full.clone();
        let n = holed.values.as_slice().len();
        let i = pick.index(n);
        let (w, _) = (holed.width(), holed.height());
        holed.values.set(i % w, i / w, None);
        let Ok(fb) = gradient_field(&holed, 1.0, 1.0) else { return Ok(()); };
        let fa = gradient_field(&full, 1.0, 1.0).unwrap();
        for (before, after) in [(&fa.gx, &fb.gx), (&fa.gy, &fb.gy), (&fa.gr, &fb.gr)] {
            for (p, q) in before.as_slice().iter().zip(after.as_slice()) {
                prop_assert!(!(p.is_none() && q.is_some()));
            }
        }
    }
}

#[test]
fn degenerate_shapes_agree_with_oracle() {
    let row = vec![vec![1.0, 3.0, 4.0, 8.0]];
    let o = brute_force_oracle(&row, 1.0, 1.0);
    let f = aggregate(gradient_field(&RsMap::from_rows(&row).unwrap(), 1.0, 1.0).unwrap(), 1).unwrap();
    assert_eq!(o.total_gy, None);
    assert_eq!(f.total_gy, None);
    assert!(f.gy.as_slice().iter().all(Option::is_none));
    assert_eq!(f.total_gx, o.total_gx);

    let col = vec![vec![1.0], vec![2.5], vec![2.0]];
    let o = brute_force_oracle(&col, 1.0, 1.0);
    let f = aggregate(gradient_field(&RsMap::from_rows(&col).unwrap(), 1.0, 1.0).unwrap(), 1).unwrap();
    assert_eq!(o.total_gx, None);
    assert_eq!(f.total_gx, None);
    assert!(f.gx.as_slice().iter().all(Option::is_none));
    assert_eq!(f.total_gy, o.total_gy);
}

#[test]
fn two_by_two_against_oracle() {
    let rs = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
    let o = brute_force_oracle(&rs, 1.0, 1.0);
    assert_eq!(o.total_gx, Some(1.0));
    assert_eq!(o.total_gy, Some(2.0));
    assert!((o.total_gr.unwrap() - 2.2361).abs() < 1e-4);
}
