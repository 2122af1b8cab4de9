use std::ops::Range;

use crate::error::{Error, Result};

/// Least-squares slope of `ln y` against `ln x` over `pairs[window]`.
pub fn fit_log_slope(pairs: &[(f64, f64)], window: Range<usize>) -> Result<f64> {
    if window.end > pairs.len() || window.start >= window.end {
        return Err(Error::InvalidArgument(format!(
            "slope window {window:?} is invalid for {} points",
            pairs.len()
        )));
    }
    let pts = &pairs[window];
    if pts.len() < 2 {
        return Err(Error::InvalidArgument("slope fit needs at least 2 points".into()));
    }
    if let Some(&(x, y)) = pts.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "log-log fit needs positive data, got ({x}, {y})"
        )));
    }
    let n = pts.len() as f64;
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Largest leading run of points whose `y` is at least `floor`.
///
/// Sweeps are ordered so that errors decay along the list; once a point
/// falls under the floor the remainder is treated as saturated.
pub fn saturation_window(pairs: &[(f64, f64)], floor: f64) -> Range<usize> {
    let start = pairs.iter().position(|p| p.1 >= floor).unwrap_or(pairs.len());
    let len = pairs[start..].iter().take_while(|p| p.1 >= floor).count();
    start..start + len
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exact_inverse_law() {
        let pairs: Vec<_> = [1.0, 10.0, 100.0].iter().map(|&x| (x, 5.0 / x)).collect();
        assert!((fit_log_slope(&pairs, 0..3).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_has_zero_slope() {
        let pairs = [(1.0, 2.0), (3.0, 2.0), (7.0, 2.0)];
        assert!(fit_log_slope(&pairs, 0..3).unwrap().abs() < 1e-15);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let pairs: Vec<_> = (0..12)
            .map(|k| {
                let x = 10f64.powf(k as f64 / 5.0);
                (x, 3.0 * x.powf(1.7) * (1.0 + rng.gen_range(-0.01..0.01)))
            })
            .collect();
        let s = fit_log_slope(&pairs, 0..pairs.len()).unwrap();
        assert!((1.65..=1.75).contains(&s), "{s}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_log_slope(&[(1.0, 1.0)], 0..1).is_err());
        assert!(fit_log_slope(&[(1.0, 1.0), (2.0, 0.0)], 0..2).is_err());
        assert!(fit_log_slope(&[(1.0, 1.0), (-2.0, 1.0)], 0..2).is_err());
        assert!(fit_log_slope(&[(1.0, 1.0), (2.0, 1.0)], 0..3).is_err());
    }

    #[test]
    fn saturation_window_stops_at_floor() {
        let pairs = [(1.0, 1.0), (2.0, 0.1), (3.0, 1e-12), (4.0, 1e-3)];
        assert_eq!(saturation_window(&pairs, 1e-9), 0..2);
        assert_eq!(saturation_window(&pairs, 10.0), 4..4);
    }

    proptest::proptest! {
        #[test]
        fn power_laws_are_recovered(
            c in 0.01f64..100.0,
            k in -3.0f64..3.0,
            xs in proptest::collection::btree_set(1u32..10_000, 2..8)
        ) {
            let pairs: Vec<_> = xs.iter().map(|&x| {
                let x = x as f64;
                (x, c * x.powf(k))
            }).collect();
            let s = fit_log_slope(&pairs, 0..pairs.len()).unwrap();
            proptest::prop_assert!((s - k).abs() < 1e-12);
        }
    }
}
