use crate::error::{Error, Result};

/// Number of past readings fed to every forecaster.
pub const LAG: usize = 5;

/// Supervised pairs cut from a contiguous series segment.
///
/// Inputs are stored row-major: row `k` is `series[k..k + lag]` and its
/// target is `series[k + lag]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    lag: usize,
    inputs: Vec<f64>,
    targets: Vec<f64>,
}

impl TrainingSet {
    pub fn new(lag: usize, inputs: Vec<f64>, targets: Vec<f64>) -> Self {
        assert!(lag >= 1);
        assert_eq!(inputs.len(), lag * targets.len(), "inputs/targets length mismatch");
        Self {
            lag,
            inputs,
            targets,
        }
    }

    pub fn lag(&self) -> usize {
        self.lag
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, k: usize) -> &[f64] {
        &self.inputs[k * self.lag..(k + 1) * self.lag]
    }

    pub fn inputs(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.inputs.chunks_exact(self.lag)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn flat_inputs(&self) -> &[f64] {
        &self.inputs
    }
}

pub fn make_supervised(series: &[f64], lag: usize) -> Result<TrainingSet> {
    if lag == 0 || series.len() <= lag {
        return Err(Error::TooShort {
            len: series.len(),
            lag,
        });
    }
    let n = series.len() - lag;
    let mut inputs = Vec::with_capacity(n * lag);
    for k in 0..n {
        inputs.extend_from_slice(&series[k..k + lag]);
    }
    Ok(TrainingSet::new(lag, inputs, series[lag..].to_vec()))
}
