/// A draw from one lower-level proposal together with its importance weight.
///
/// `chain` (n), `iteration` (t) and `replica` (m) are zero-based and unique
/// within a run. The weight is kept in log-space; [`WeightedSample::raw_weight`]
/// materializes it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub x: Vec<f64>,
    pub log_weight: f64,
    pub chain: usize,
    pub iteration: usize,
    pub replica: usize,
}

impl WeightedSample {
    pub fn raw_weight(&self) -> f64 {
        self.log_weight.exp()
    }
}
