//! Summary statistics over repetitions.

use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation over `√n`; zero for a single value.
pub fn std_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// One-sided paired t-test of `H₁: mean(a - b) > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTest {
    pub n: usize,
    pub mean_diff: f64,
    pub std_error: f64,
    pub t: f64,
    pub p_value: f64,
}

impl PairedTest {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Panics if the samples differ in length.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> PairedTest {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len();
    let mean_diff = mean(&diffs);
    let se = std_error(&diffs);
    let (t, p_value) = if n < 2 {
        (f64::NAN, 1.0)
    } else if se == 0.0 {
        // all differences identical
        if mean_diff > 0.0 {
            (f64::INFINITY, 0.0)
        } else if mean_diff < 0.0 {
            (f64::NEG_INFINITY, 1.0)
        } else {
            (0.0, 0.5)
        }
    } else {
        let t = mean_diff / se;
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("n ≥ 2 gives valid dof");
        (t, dist.sf(t))
    };
    PairedTest {
        n,
        mean_diff,
        std_error: se,
        t,
        p_value,
    }
}
