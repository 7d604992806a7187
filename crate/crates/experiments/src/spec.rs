use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::report::Format;
use crate::{ExperimentError, Result};

/// `steps` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(ExperimentError::InvalidSpec("a range needs at least one step".into()));
        }
        if !(0.0..=1.0).contains(&min) || !(0.0..=1.0).contains(&max) || min > max {
            return Err(ExperimentError::InvalidSpec(format!("range [{min}, {max}] is not within [0, 1]")));
        }
        if steps == 1 && min != max {
            return Err(ExperimentError::InvalidSpec(format!("one step cannot span [{min}, {max}]")));
        }
        Ok(Range { min, max, steps })
    }

    pub fn unit(steps: usize) -> Result<Self> {
        Range::new(0.0, 1.0, steps)
    }

    /// Grid values; the end points are exact.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| if i == last { self.max } else { self.min + (self.max - self.min) * i as f64 / last as f64 })
            .collect()
    }

    pub fn step(&self) -> f64 {
        if self.steps == 1 {
            0.0
        } else {
            (self.max - self.min) / (self.steps - 1) as f64
        }
    }
}

/// How the erasure parameter is chosen at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EtaSpec {
    /// Independent grid axis.
    Grid(Range),
    /// `η = (2/3)(1 − ω)`, the largest erasure survival probability at which
    /// the sources are still unsteerable both ways.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub eta: EtaSpec,
    pub omega: Range,
    /// Number of parties on the line: `n − 1` sources.
    pub n: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl SweepSpec {
    pub fn new(eta: EtaSpec, omega: Range, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(ExperimentError::InvalidSpec(format!("a line needs n >= 3 parties, got {n}")));
        }
        Ok(SweepSpec { eta, omega, n, out: None, format: Format::Csv })
    }

    /// Grid points `(η, ω)`, with `η` as the outer axis.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let omegas = self.omega.values();
        match self.eta {
            EtaSpec::Grid(r) => r.values().into_iter().flat_map(|e| omegas.iter().map(move |&o| (e, o))).collect(),
            EtaSpec::Boundary => omegas.into_iter().map(|o| (boundary_eta(o), o)).collect(),
        }
    }
}

/// `(2/3)(1 − ω)`.
pub fn boundary_eta(omega: f64) -> f64 {
    2.0 / 3.0 * (1.0 - omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_values() {
        let r = Range::unit(21).unwrap();
        let v = r.values();
        assert_eq!(v.len(), 21);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[20], 1.0);
        assert!((v[7] - 0.35).abs() < 1e-15);
        assert_eq!(Range::new(0.4, 0.4, 1).unwrap().values(), vec![0.4]);
        assert!(Range::new(0.0, 1.0, 0).is_err());
        assert!(Range::new(0.0, 1.5, 3).is_err());
        assert!(Range::new(0.6, 0.4, 3).is_err());
    }

    #[test]
    fn spec_points() {
        let s = SweepSpec::new(EtaSpec::Grid(Range::unit(3).unwrap()), Range::unit(2).unwrap(), 3).unwrap();
        assert_eq!(s.points(), vec![(0.0, 0.0), (0.0, 1.0), (0.5, 0.0), (0.5, 1.0), (1.0, 0.0), (1.0, 1.0)]);
        let b = SweepSpec::new(EtaSpec::Boundary, Range::unit(3).unwrap(), 4).unwrap();
        assert!((b.points()[1].0 - 1.0 / 3.0).abs() < 1e-15);
        assert!(SweepSpec::new(EtaSpec::Boundary, Range::unit(3).unwrap(), 2).is_err());
    }
}
