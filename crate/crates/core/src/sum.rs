use std::iter::Sum;
use std::ops::AddAssign;

/// Neumaier's variant of Kahan summation for `f64` streams.
///
/// The `Dd` pipeline gets the same effect from its error-free additions; this
/// type serves the `f64` paths (the adaptive integrator and the oracles).
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }
}

impl Sum<f64> for NeumaierSum {
    fn sum<I: Iterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl From<NeumaierSum> for f64 {
    fn from(s: NeumaierSum) -> f64 {
        s.value()
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().sum::<NeumaierSum>().value()
}
