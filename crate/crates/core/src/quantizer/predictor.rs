/// Adaptive FIR predictor with normalized-LMS weight updates.
///
/// Encoder and decoder both drive it with reconstructed samples and the
/// dequantized residual, so their states stay bit-identical without side
/// information.
#[derive(Debug, Clone)]
pub(crate) struct NlmsPredictor {
    weights: Vec<f64>,
    // Most recent sample first.
    history: Vec<f64>,
    step: f64,
    regularizer: f64,
}

impl NlmsPredictor {
    pub(crate) fn new(order: usize, step: f64, scale: f64) -> Self {
        let mut weights = vec![0.0; order];
        weights[0] = 1.0;
        Self {
            weights,
            history: vec![0.0; order],
            step,
            regularizer: 1e-9 * scale * scale,
        }
    }

    pub(crate) fn predict(&self) -> f64 {
        self.weights.iter().zip(&self.history).map(|(w, h)| w * h).sum()
    }

    pub(crate) fn update(&mut self, residual: f64, sample: f64) {
        let energy: f64 = self.history.iter().map(|h| h * h).sum();
        let gain = self.step * residual / (self.regularizer + energy);
        for (w, h) in self.weights.iter_mut().zip(&self.history) {
            *w += gain * h;
        }
        self.history.rotate_right(1);
        self.history[0] = sample;
    }

    #[cfg(test)]
    pub(crate) fn weights(&self) -> &[f64] {
        &self.weights
    }
}
