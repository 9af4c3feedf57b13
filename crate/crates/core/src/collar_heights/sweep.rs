use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collar_heights::heights::{collar_height, half_collar_height, HalfRoute, Route};
use crate::error::{domain, Result};
use crate::geometry::{standard_subcollar_of, Subcollar, SubcollarKind};
use crate::scalar::Real;
use crate::spectral_zeta::HeightOptions;

/// Leading-term model subtracted from the sweep heights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingTerm {
    /// Coefficient `c` of `c π² / l`.
    pub pi2_coeff: f64,
    /// Whether `log l` is part of the leading term.
    pub include_log: bool,
}

impl LeadingTerm {
    /// `π²/6l + log l` (SC_I), `π²/12l + log l` (SC_II), `π²/12l` (SC_III).
    pub fn stated(kind: SubcollarKind) -> Self {
        match kind {
            SubcollarKind::TypeI => Self {
                pi2_coeff: 1.0 / 6.0,
                include_log: true,
            },
            SubcollarKind::TypeII => Self {
                pi2_coeff: 1.0 / 12.0,
                include_log: true,
            },
            SubcollarKind::TypeIII => Self {
                pi2_coeff: 1.0 / 12.0,
                include_log: false,
            },
        }
    }

    pub fn eval<T: Real>(&self, l: T) -> T {
        let lead = T::lit(self.pi2_coeff) * T::pi() * T::pi() / l;
        if self.include_log {
            lead + l.ln()
        } else {
            lead
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SweepOptions {
    pub route: Route,
    pub leading: Option<LeadingTerm>,
    pub height: HeightOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            route: Route::Conformal,
            leading: None,
            height: HeightOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SweepRow<T: Real> {
    pub l: T,
    pub h: T,
    pub error: T,
    pub leading: T,
    pub residual: T,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSummary {
    pub kind: String,
    pub route: String,
    pub points: usize,
    pub pi2_coeff: f64,
    pub include_log: bool,
    pub residual_min: f64,
    pub residual_max: f64,
    /// `max − min` of the residual.
    pub spread: f64,
}

#[derive(Clone, Debug)]
pub struct SweepTable<T: Real> {
    pub kind: SubcollarKind,
    pub rows: Vec<SweepRow<T>>,
    pub summary: SweepSummary,
}

/// Height of the standard subcollar of `kind` at geodesic length `l`.
pub fn subcollar_height<T: Real>(kind: SubcollarKind, l: T, route: Route, opts: &HeightOptions) -> Result<(T, T)> {
    let h = match standard_subcollar_of(kind, l)? {
        Subcollar::Cylinder(c) => collar_height(&c, route, opts)?,
        Subcollar::Half(h) => half_collar_height(&h, HalfRoute::Identity(route), opts)?,
    };
    Ok((h.value, h.error))
}

/// Heights and residuals `h − leading` over `l_grid ⊂ (0, π/8)`.
pub fn asymptotic_sweep<T: Real>(kind: SubcollarKind, l_grid: &[T], opts: &SweepOptions) -> Result<SweepTable<T>> {
    if l_grid.is_empty() {
        return Err(domain("sweep grid is empty"));
    }
    let eighth = T::pi() * T::lit(0.125);
    if let Some(bad) = l_grid.iter().find(|&&l| !(l > T::zero() && l < eighth)) {
        return Err(domain(format!("sweep values must lie in (0, π/8), got {:?}", bad)));
    }
    let leading = opts.leading.unwrap_or_else(|| LeadingTerm::stated(kind));
    let rows = l_grid
        .par_iter()
        .map(|&l| {
            let (h, error) = subcollar_height(kind, l, opts.route, &opts.height)?;
            let lead = leading.eval(l);
            Ok(SweepRow {
                l,
                h,
                error,
                leading: lead,
                residual: h - lead,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        let v = r.residual.to_f();
        (lo.min(v), hi.max(v))
    });
    let summary = SweepSummary {
        kind: kind.label().to_string(),
        route: opts.route.label().to_string(),
        points: rows.len(),
        pi2_coeff: leading.pi2_coeff,
        include_log: leading.include_log,
        residual_min: lo,
        residual_max: hi,
        spread: hi - lo,
    };
    Ok(SweepTable { kind, rows, summary })
}

impl<T: Real> SweepTable<T> {
    /// Columns `l,h,error,leading,residual`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        w.write_record(["l", "h", "error", "leading", "residual"])?;
        for r in &self.rows {
            w.write_record([
                format!("{:.17e}", r.l.to_f()),
                format!("{:.17e}", r.h.to_f()),
                format!("{:.3e}", r.error.to_f()),
                format!("{:.17e}", r.leading.to_f()),
                format!("{:.17e}", r.residual.to_f()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        let v = serde_json::to_value(&self.summary)?;
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_table_and_summary() {
        let grid = [0.02f64, 0.05, 0.1];
        let t = asymptotic_sweep(SubcollarKind::TypeIII, &grid, &SweepOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 3);
        for r in &t.rows {
            assert!((r.h - r.leading - r.residual).abs() < 1e-12);
        }
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("l,h,error,leading,residual\r\n"));
        assert!(t.summary_json().unwrap().contains("\"spread\""));
        assert!(asymptotic_sweep(SubcollarKind::TypeI, &[0.5f64], &SweepOptions::default()).is_err());
    }
}
