//! Tradeoff sweeps over the brick-wall level `delta`.

use std::fmt::Write as _;

use mdsq_core::shaping::BrickWallSpec;
use mdsq_core::theory::{brickwall_point, finite_p_point, ozarow_bounds};
use mdsq_core::Error as CoreError;

use crate::config::{ExperimentConfig, FilterSource, Pattern};
use crate::sim;
use crate::{HarnessError, Result};

pub const SWEEP_HEADER: &str = "delta,sigma_e2,rate_bits,dc_brickwall,ds_brickwall,ozarow_dc_bound,ozarow_ds_floor,\
p,pdc,pds,dc_finite_p,ds_finite_p,mse_emp_central,mse_emp_side";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub sigma_e2: f64,
    pub rate_bits: f64,
    pub dc_brickwall: f64,
    pub ds_brickwall: f64,
    pub ozarow_dc_bound: f64,
    pub ozarow_ds_floor: f64,
    pub p: usize,
    pub pdc: f64,
    pub pds: f64,
    pub dc_finite_p: f64,
    pub ds_finite_p: f64,
    pub mse_emp_central: f64,
    pub mse_emp_side: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    /// Grid points left out, with the reason.
    pub skipped: Vec<(f64, String)>,
}

impl SweepOutput {
    pub fn csv(&self) -> String {
        let mut out = String::from(SWEEP_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.delta,
                r.sigma_e2,
                r.rate_bits,
                r.dc_brickwall,
                r.ds_brickwall,
                r.ozarow_dc_bound,
                r.ozarow_ds_floor,
                r.p,
                r.pdc,
                r.pds,
                r.dc_finite_p,
                r.ds_finite_p,
                r.mse_emp_central,
                r.mse_emp_side
            );
        }
        out
    }
}

/// One row per `delta`. The finite-order columns use a Yule-Walker design of
/// the template's order (NaN when it is 0 or `delta < 1`); with `simulate`
/// each point also runs the template's Monte-Carlo experiment.
pub fn sweep(deltas: &[f64], template: &ExperimentConfig, simulate: bool) -> Result<SweepOutput> {
    if deltas.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    let sigma_x2 = template.sigma_x2;
    let sigma_e2 = template.quantizer_spec()?.noise_variance();
    let p = template.filter_order();
    let mut out = SweepOutput {
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for &delta in deltas {
        let point = brickwall_point(delta, sigma_e2, sigma_x2)?;
        let oz = match ozarow_bounds(point.rate_bits, point.ds, sigma_x2) {
            Ok(oz) => oz,
            Err(e @ (CoreError::DegenerateRegion { .. } | CoreError::SideDistortionInfeasible { .. })) => {
                eprintln!("sweep: skipping delta = {delta}: {e}");
                out.skipped.push((delta, e.to_string()));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let mut row = SweepRow {
            delta,
            sigma_e2,
            rate_bits: point.rate_bits,
            dc_brickwall: point.dc,
            ds_brickwall: point.ds,
            ozarow_dc_bound: oz.dc_bound,
            ozarow_ds_floor: oz.ds_floor,
            p,
            pdc: f64::NAN,
            pds: f64::NAN,
            dc_finite_p: f64::NAN,
            ds_finite_p: f64::NAN,
            mse_emp_central: f64::NAN,
            mse_emp_side: f64::NAN,
        };
        if p > 0 && delta >= 1.0 {
            let mut exp = template.clone();
            exp.filter = FilterSource::YuleWalkerGamma {
                p,
                gamma: BrickWallSpec::new(delta)?.gamma(),
            };
            exp.delta = Some(delta);
            let filter = exp.design_filter()?;
            let fp = finite_p_point(filter.pdc(), filter.pds(), sigma_e2, sigma_x2)?;
            row.pdc = fp.pdc;
            row.pds = fp.pds;
            row.dc_finite_p = fp.dc;
            row.ds_finite_p = fp.ds;
            if simulate {
                exp.patterns = vec![Pattern::Central, Pattern::Even, Pattern::Odd];
                let r = sim::run_with_filter(&exp, filter)?;
                let get = |p: Pattern| r.pattern(p).map_or(f64::NAN, |s| s.mse_emp);
                row.mse_emp_central = get(Pattern::Central);
                row.mse_emp_side = 0.5 * (get(Pattern::Even) + get(Pattern::Odd));
            }
        }
        out.rows.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    fn template(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_raw(&RawConfig::parse(text).unwrap()).unwrap()
    }

    #[test]
    fn monotone_and_above_bound() {
        let t = template("sigma_e2 = 0.001\np = 16\nlambda = 0.1\n");
        let out = sweep(&[1.0, 2.0, 4.0, 8.0], &t, false).unwrap();
        assert_eq!(out.rows.len(), 4);
        for w in out.rows.windows(2) {
            assert!(w[1].dc_brickwall < w[0].dc_brickwall);
            assert!(w[1].ds_brickwall > w[0].ds_brickwall);
        }
        for r in &out.rows {
            assert!(r.dc_brickwall >= r.ozarow_dc_bound - 1e-12);
            assert!(r.dc_finite_p >= r.dc_brickwall * (1.0 - 1e-9));
        }
    }

    #[test]
    fn empty_grid_is_an_error() {
        let t = template("p = 4\nlambda = 0.1\n");
        assert!(matches!(sweep(&[], &t, false), Err(HarnessError::EmptyGrid)));
    }

    #[test]
    fn csv_shape() {
        let t = template("p = 0\nfilter = coefficients\ncoefficients = 1\n");
        let out = sweep(&[1.0, 3.0], &t, false).unwrap();
        let csv = out.csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().all(|l| l.split(',').count() == 14));
    }
}
