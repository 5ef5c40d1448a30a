//! Full width at half maximum of sampled 1-D curves.

use crate::error::{Error, Result};

/// FWHM of `y` sampled at `x`, by linear interpolation between the bracketing
/// samples at half maximum. When several half-max crossings exist (sinc-lobed
/// marginals), the outermost ones are used.
pub fn fwhm(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::invalid("fwhm: need matching x/y with >= 3 samples"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("fwhm: non-finite sample".into()));
    }
    let (i_max, &y_max) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if !(y_max > 0.0) {
        return Err(Error::NotMeasurable(
            "fwhm: curve has no positive maximum".into(),
        ));
    }
    let half = y_max / 2.0;

    // outermost rising crossing left of the peak
    let mut left = None;
    for i in 0..i_max {
        if y[i] < half && y[i + 1] >= half {
            left = Some(interp_cross(x[i], x[i + 1], y[i], y[i + 1], half));
            break;
        }
    }
    // outermost falling crossing right of the peak
    let mut right = None;
    for i in (i_max..x.len() - 1).rev() {
        if y[i] >= half && y[i + 1] < half {
            right = Some(interp_cross(x[i], x[i + 1], y[i], y[i + 1], half));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::NotMeasurable(
            "fwhm: no half-maximum crossing on at least one side".into(),
        )),
    }
}

fn interp_cross(x0: f64, x1: f64, y0: f64, y1: f64, level: f64) -> f64 {
    x0 + (level - y0) * (x1 - x0) / (y1 - y0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::GAUSSIAN_FWHM_PER_SIGMA;

    fn axis(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn unit_gaussian() {
        let x = axis(2001, -6.0, 6.0);
        let y: Vec<f64> = x.iter().map(|&v| (-0.5 * v * v).exp()).collect();
        let w = fwhm(&x, &y).unwrap();
        assert!((w - GAUSSIAN_FWHM_PER_SIGMA).abs() < 1e-4, "w = {w}");
    }

    #[test]
    fn tophat_width_within_one_spacing() {
        let x = axis(101, 0.0, 10.0);
        let y: Vec<f64> = x
            .iter()
            .map(|&v| if (3.0..7.0).contains(&v) { 1.0 } else { 0.0 })
            .collect();
        let w = fwhm(&x, &y).unwrap();
        assert!((w - 4.0).abs() <= 0.1 + 1e-12, "w = {w}");
    }

    #[test]
    fn monotone_ramp_not_measurable() {
        let x = axis(50, 0.0, 1.0);
        let y = x.clone();
        assert!(matches!(fwhm(&x, &y), Err(Error::NotMeasurable(_))));
    }

    #[test]
    fn outermost_crossings_for_lobed_curve() {
        // central peak 1.0 with side lobes at 0.6: lobes sit above half max,
        // so the width must span them
        let x = axis(1201, -6.0, 6.0);
        let y: Vec<f64> = x
            .iter()
            .map(|&v| {
                (-0.5 * v * v).exp()
                    + 0.6 * (-2.0 * (v - 3.0) * (v - 3.0)).exp()
                    + 0.6 * (-2.0 * (v + 3.0) * (v + 3.0)).exp()
            })
            .collect();
        let w = fwhm(&x, &y).unwrap();
        assert!(w > 6.0, "expected lobe-to-lobe width, got {w}");
    }
}
