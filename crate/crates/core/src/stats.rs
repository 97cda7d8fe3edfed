use serde::{Deserialize, Serialize};

/// Sample mean with its standard error `sd / sqrt(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    /// Two-pass estimate; `se` is zero when fewer than two samples exist.
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, n };
        }
        // shifted by the first sample so constant data is exact
        let shift = xs[0];
        let offset = xs.iter().map(|x| x - shift).sum::<f64>() / n as f64;
        let mean = shift + offset;
        if n < 2 {
            return Self { mean, se: 0.0, n };
        }
        let ss: f64 = xs.iter().map(|x| (x - shift - offset) * (x - shift - offset)).sum();
        let sd = (ss / (n - 1) as f64).sqrt();
        Self { mean, se: sd / (n as f64).sqrt(), n }
    }

    /// `mean >= target - z * se`
    pub fn at_least(&self, target: f64, z: f64) -> bool {
        self.mean >= target - z * self.se
    }

    /// `|mean - target| <= z * se + slack`
    pub fn within(&self, target: f64, z: f64, slack: f64) -> bool {
        (self.mean - target).abs() <= z * self.se + slack
    }
}

/// Pearson correlation of two equally long samples.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let ma = MeanSe::of(a).mean;
    let mb = MeanSe::of(b).mean;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_se() {
        let m = MeanSe::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        // sd = sqrt(5/3)
        assert!((m.se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        let c = MeanSe::of(&[0.7; 10]);
        assert_eq!(c.se, 0.0);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
