//! Small numeric helpers shared across modules.

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<CompensatedSum>().value()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Ordinary least squares for `y ≈ X β` with a handful of columns, solved
/// through the normal equations on centered, scaled columns. An intercept is
/// always fitted and returned second.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let k = columns.len();
    let m = y.len();
    if m <= k {
        return None;
    }
    let ym = y.iter().sum::<f64>() / m as f64;
    let means: Vec<f64> = columns.iter().map(|c| c.iter().sum::<f64>() / m as f64).collect();
    let scales: Vec<f64> = columns
        .iter()
        .zip(&means)
        .map(|(c, mu)| c.iter().map(|v| (v - mu).powi(2)).sum::<f64>().sqrt())
        .collect();
    if scales.contains(&0.0) {
        return None;
    }
    let z: Vec<Vec<f64>> = columns
        .iter()
        .zip(means.iter().zip(&scales))
        .map(|(c, (mu, s))| c.iter().map(|v| (v - mu) / s).collect())
        .collect();
    let yc: Vec<f64> = y.iter().map(|v| v - ym).collect();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = dot(&z[i], &z[j]);
        }
        a[i][k] = dot(&z[i], &yc);
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..k {
        let piv = (col..k).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in 0..k {
            if row != col {
                let f = a[row][col] / a[col][col];
                for j in col..=k {
                    a[row][j] -= f * a[col][j];
                }
            }
        }
    }
    let beta: Vec<f64> = (0..k).map(|i| a[i][k] / a[i][i] / scales[i]).collect();
    let intercept = ym - beta.iter().zip(&means).map(|(b, mu)| b * mu).sum::<f64>();
    Some((beta, intercept))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_beats_naive() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn exact_fit_is_recovered() {
        let t: Vec<f64> = (1..50).map(|i| i as f64).collect();
        let lt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = t.iter().zip(&lt).map(|(a, b)| 0.3 * a - 1.5 * b + 2.0).collect();
        let (beta, c) = least_squares(&[t, lt], &y).unwrap();
        assert!((beta[0] - 0.3).abs() < 1e-10);
        assert!((beta[1] + 1.5).abs() < 1e-10);
        assert!((c - 2.0).abs() < 1e-9);
    }
}
