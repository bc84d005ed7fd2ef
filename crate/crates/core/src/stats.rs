//! Small descriptive statistics helpers shared across modules.

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n - 1 denominator). `NaN` for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

pub fn sample_sd(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// Median of a non-empty slice; averages the two middle values for even
/// lengths. `NaN` entries sort last.
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Pearson correlation, `None` when either input has zero variance or the
/// lengths differ.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Column-wise Pearson correlation matrix of a row-major `rows x cols`
/// sample. Zero-variance columns yield `NaN` entries off the diagonal.
pub fn correlation_matrix(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut means = vec![0.0; cols];
    for r in 0..rows {
        for c in 0..cols {
            means[c] += data[r * cols + c];
        }
    }
    for m in &mut means {
        *m /= rows as f64;
    }
    let mut cov = vec![0.0; cols * cols];
    for r in 0..rows {
        let row = &data[r * cols..(r + 1) * cols];
        for i in 0..cols {
            let di = row[i] - means[i];
            for j in i..cols {
                cov[i * cols + j] += di * (row[j] - means[j]);
            }
        }
    }
    let mut out = vec![0.0; cols * cols];
    for i in 0..cols {
        out[i * cols + i] = 1.0;
        for j in i + 1..cols {
            let denom = (cov[i * cols + i] * cov[j * cols + j]).sqrt();
            let r = if denom > 0.0 {
                (cov[i * cols + j] / denom).clamp(-1.0, 1.0)
            } else {
                f64::NAN
            };
            out[i * cols + j] = r;
            out[j * cols + i] = r;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(sample_variance(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
        assert!(sample_variance(&[1.0]).is_nan());
    }

    #[test]
    fn pearson_of_self_is_exactly_one() {
        let x = [0.3, 1.7, -2.2, 4.1, 0.0];
        assert_eq!(pearson(&x, &x), Some(1.0));
        assert_eq!(pearson(&x, &[1.0; 5]), None);
    }

    proptest! {
        #[test]
        fn pearson_symmetric_and_affine_invariant(
            pts in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..30),
            scale in 0.1f64..10.0,
            shift in -50.0f64..50.0,
        ) {
            let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let y2: Vec<f64> = y.iter().map(|v| v * scale + shift).collect();
            if let (Some(a), Some(b), Some(c)) = (pearson(&x, &y), pearson(&y, &x), pearson(&x, &y2)) {
                prop_assert!((a - b).abs() < 1e-12);
                prop_assert!((a - c).abs() < 1e-9);
            }
        }
    }
}
