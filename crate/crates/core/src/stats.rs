//! Descriptive statistics used by the template and generation reports.

use serde::Serialize;

/// Count, mean, population standard deviation, median, min and max.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// All-zero record for empty input.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Summary::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) {
            (sorted[mid - 1] + sorted[mid]) / 2.0
        } else {
            sorted[mid]
        };
        Summary {
            count: values.len(),
            mean,
            std: var.sqrt(),
            median,
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        }
    }

    pub fn of_counts<I: IntoIterator<Item = usize>>(counts: I) -> Self {
        let v: Vec<f64> = counts.into_iter().map(|c| c as f64).collect();
        Self::of(&v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn supports_example() {
        let s = Summary::of_counts([1, 1, 3]);
        assert_eq!(s.count, 3);
        assert_relative_eq!(s.mean, 5.0 / 3.0);
        assert_eq!(s.median, 1.0);
        assert_eq!((s.min, s.max), (1.0, 3.0));
        // population variance: ((2/3)^2*2 + (4/3)^2) / 3 = 8/9
        assert_relative_eq!(s.std, (8.0f64 / 9.0).sqrt());
    }

    #[test]
    fn even_median_and_empty() {
        let s = Summary::of_counts([0, 2, 3, 23]);
        assert_eq!((s.mean, s.median, s.max), (7.0, 2.5, 23.0));
        assert_eq!(Summary::of(&[]), Summary::default());
        let one = Summary::of(&[4.0]);
        assert_eq!((one.mean, one.median, one.min, one.max, one.std), (4.0, 4.0, 4.0, 4.0, 0.0));
    }
}
