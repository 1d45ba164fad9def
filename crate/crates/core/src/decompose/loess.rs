//! Locally weighted regression on a regular grid, as used inside STL.

/// Local polynomial fit of `y` (sampled at `0, 1, .., n-1`) evaluated at `x`,
/// using the `window` nearest points with tricube weights.
///
/// `degree` is 0 (weighted mean) or 1 (weighted line). `x` may lie outside
/// the sampled range, which is how STL extends cycle-subseries by one point
/// on each side.
pub fn loess_at(y: &[f64], x: f64, window: usize, degree: usize) -> f64 {
    let n = y.len();
    debug_assert!(n > 0 && window > 0);
    if n == 1 {
        return y[0];
    }
    let last = (n - 1) as f64;
    let (left, right, mut h) = if window >= n {
        (0, n - 1, (x).max(last - x))
    } else {
        let half = (window - 1) as f64 / 2.0;
        let max_left = (n - window) as f64;
        let left = (x - half).floor().clamp(0.0, max_left) as usize;
        let right = left + window - 1;
        (left, right, (x - left as f64).max(right as f64 - x))
    };
    if window > n {
        h += (window - n) as f64 / 2.0;
    }

    let upper = 0.999 * h;
    let lower = 0.001 * h;
    let mut weights = Vec::with_capacity(right - left + 1);
    let mut total = 0.0;
    for j in left..=right {
        let r = (j as f64 - x).abs();
        let w = if r <= lower {
            1.0
        } else if r <= upper {
            let u = r / h;
            let v = 1.0 - u * u * u;
            v * v * v
        } else {
            0.0
        };
        total += w;
        weights.push(w);
    }
    if total <= 0.0 {
        let nearest = x.round().clamp(0.0, last) as usize;
        return y[nearest];
    }
    for w in &mut weights {
        *w /= total;
    }

    if degree >= 1 && h > 0.0 {
        let center: f64 = weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * (left + k) as f64)
            .sum();
        let spread: f64 = weights
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let d = (left + k) as f64 - center;
                w * d * d
            })
            .sum();
        if spread.sqrt() > 0.001 * last {
            let slope = (x - center) / spread;
            for (k, w) in weights.iter_mut().enumerate() {
                *w *= 1.0 + slope * ((left + k) as f64 - center);
            }
        }
    }
    weights
        .iter()
        .zip(&y[left..=right])
        .map(|(w, v)| w * v)
        .sum()
}

/// Evaluates [`loess_at`] at every sample position.
pub fn loess_smooth(y: &[f64], window: usize, degree: usize) -> Vec<f64> {
    (0..y.len())
        .map(|i| loess_at(y, i as f64, window, degree))
        .collect()
}

/// Trailing moving average of width `width`; output has `n - width + 1` points.
pub(crate) fn moving_average(y: &[f64], width: usize) -> Vec<f64> {
    if width == 0 || y.len() < width {
        return Vec::new();
    }
    let w = width as f64;
    let mut sum: f64 = y[..width].iter().sum();
    let mut out = Vec::with_capacity(y.len() - width + 1);
    out.push(sum / w);
    for i in width..y.len() {
        sum += y[i] - y[i - width];
        out.push(sum / w);
    }
    out
}

/// Smallest odd integer not below `x`.
pub(crate) fn next_odd(x: f64) -> usize {
    let n = x.ceil().max(1.0) as usize;
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}
