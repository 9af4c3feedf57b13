use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::TraceCoefficients;
use crate::scalar::Real;
use crate::sturm_liouville::{mode_heat_trace, Spectrum, TraceValue};

/// One sample `(t, θ(t), error bound)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample<T: Real> {
    pub t: T,
    pub theta: T,
    pub err: T,
}

/// Log-spaced sampling grid anchored at the split time `T`.
///
/// Nodes are `T·e^{k h}` with `h = ln 10 / per_decade` and `k` running over
/// `−below ..= above`; both counts are multiples of 8 so that each side
/// supports three Romberg refinements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub split: f64,
    pub per_decade: usize,
    pub below: usize,
    pub above: usize,
}

impl LogGrid {
    /// Smallest grid covering `[t_min, t_max]`.
    pub fn covering(t_min: f64, split: f64, t_max: f64, per_decade: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_min < split && split < t_max) {
            return Err(domain(format!(
                "log grid needs 0 < t_min < T < t_max (got {t_min}, {split}, {t_max})"
            )));
        }
        if per_decade < 8 {
            return Err(domain("need at least 8 samples per decade"));
        }
        let h = std::f64::consts::LN_10 / per_decade as f64;
        let round8 = |x: f64| ((x / h).ceil() as usize).div_ceil(8).max(1) * 8;
        Ok(Self {
            split,
            per_decade,
            below: round8((split / t_min).ln()),
            above: round8((t_max / split).ln()),
        })
    }

    pub fn step(&self) -> f64 {
        std::f64::consts::LN_10 / self.per_decade as f64
    }

    pub fn len(&self) -> usize {
        self.below + self.above + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes<T: Real>(&self) -> Vec<T> {
        let (h, s0) = (self.step(), self.split.ln());
        (0..self.len())
            .map(|i| T::lit((s0 + h * (i as f64 - self.below as f64)).exp()))
            .collect()
    }

    pub fn t_min(&self) -> f64 {
        (self.split.ln() - self.step() * self.below as f64).exp()
    }

    pub fn t_max(&self) -> f64 {
        (self.split.ln() + self.step() * self.above as f64).exp()
    }
}

/// Heat trace samples on a [`LogGrid`], the claimed small-time
/// coefficients, and a lower bound on the first eigenvalue for the
/// large-time tail.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeatTrace<T: Real> {
    pub samples: Vec<TraceSample<T>>,
    pub grid: LogGrid,
    pub coefficients: TraceCoefficients<T>,
    /// `λ₁` or a lower bound for it.
    pub ground_state: T,
    /// Free-form description of the geometry that produced the trace.
    pub provenance: String,
}

impl<T: Real> HeatTrace<T> {
    /// Samples `source` on every node of `grid` (in parallel; each sample is
    /// independent so the result does not depend on the thread count).
    pub fn sample<F>(
        source: F,
        grid: LogGrid,
        coefficients: TraceCoefficients<T>,
        ground_state: T,
        provenance: impl Into<String>,
    ) -> Result<Self>
    where
        F: Fn(T) -> TraceValue<T> + Sync,
    {
        if !(ground_state > T::zero()) {
            return Err(Error::Precondition(
                "heat trace needs a positive lowest eigenvalue (Dirichlet, no zero modes)".into(),
            ));
        }
        let samples = grid
            .nodes::<T>()
            .into_par_iter()
            .map(|t| {
                let v = source(t);
                TraceSample {
                    t,
                    theta: v.value,
                    err: v.error(),
                }
            })
            .collect();
        Ok(Self {
            samples,
            grid,
            coefficients,
            ground_state,
            provenance: provenance.into(),
        })
    }

    /// Trace of a single computed spectrum (with its tail bound).
    pub fn from_spectrum(
        spectrum: &Spectrum<T>,
        grid: LogGrid,
        coefficients: TraceCoefficients<T>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let lambda1 = spectrum.eigenvalues[0] - spectrum.errors[0];
        Self::sample(
            |t| mode_heat_trace(spectrum, t),
            grid,
            coefficients,
            lambda1,
            provenance,
        )
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn split_index(&self) -> usize {
        self.grid.below
    }

    /// Largest sample error.
    pub fn max_error(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| m.max(s.err))
    }

    /// Checks positivity and strict decrease within the sample errors.
    pub fn check_monotone(&self) -> Result<()> {
        for w in self.samples.windows(2) {
            if !(w[0].theta > T::zero()) {
                return Err(Error::GeometryInconsistency(format!(
                    "trace not positive at t = {:?}",
                    w[0].t
                )));
            }
            if w[1].theta > w[0].theta + w[0].err + w[1].err {
                return Err(Error::GeometryInconsistency(format!(
                    "trace increases between t = {:?} and {:?}",
                    w[0].t, w[1].t
                )));
            }
        }
        Ok(())
    }

    /// CSV with header `t,theta,err`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
        out.write_record(["t", "theta", "err"])?;
        for s in &self.samples {
            out.write_record([
                format!("{:e}", s.t.to_f()),
                format!("{:e}", s.theta.to_f()),
                format!("{:e}", s.err.to_f()),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Reads `t,theta,err` rows back (grid metadata is not stored in the CSV).
pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<TraceSample<f64>>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rd.deserialize() {
        let s: TraceSample<f64> = rec?;
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_anchors_split_time() {
        let g = LogGrid::covering(1e-4, 0.5, 80.0, 64).unwrap();
        let nodes = g.nodes::<f64>();
        assert_eq!(nodes.len(), g.len());
        assert!((nodes[g.below] - 0.5).abs() < 1e-15);
        assert!(g.t_min() <= 1e-4 && g.t_max() >= 80.0);
        assert_eq!(g.below % 8, 0);
        assert_eq!(g.above % 8, 0);
        assert!(LogGrid::covering(1.0, 0.5, 80.0, 64).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = LogGrid::covering(0.01, 1.0, 10.0, 8).unwrap();
        let tr = HeatTrace::sample(
            |t: f64| TraceValue {
                value: (-t).exp(),
                tail: 0.0,
                discretization: 1e-12,
            },
            g,
            TraceCoefficients { c1: 0.0, c2: 0.0, c3: 0.0 },
            1.0,
            "test",
        )
        .unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let back = read_trace_csv(&buf[..]).unwrap();
        assert_eq!(back.len(), tr.len());
        for (a, b) in back.iter().zip(&tr.samples) {
            assert!((a.theta - b.theta).abs() <= 1e-15 * b.theta.abs());
        }
        tr.check_monotone().unwrap();
    }
}
