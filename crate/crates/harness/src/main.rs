use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mdsq_core::shaping::{min_phase_check, BrickWallSpec};
use mdsq_core::theory::{brickwall_point, finite_p_point, k4_point, ozarow_bounds, K4Spec};
use mdsq_harness::config::{ExperimentConfig, Origin, RawConfig};
use mdsq_harness::sim::run;
use mdsq_harness::sweep::sweep;
use mdsq_harness::universality::universality_check;
use mdsq_harness::Result;

#[derive(Parser)]
#[command(name = "mdsq", version, about = "Multiple-description coding by dithered Delta-Sigma quantization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a shaping filter and print its powers and root radius.
    DesignFilter(Common),
    /// Closed-form operating point and the matching two-description bound.
    TheoryPoint(Common),
    /// Sweep the brick-wall level over a grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated levels.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        deltas: Vec<f64>,
        /// Also run the Monte-Carlo experiment at every point.
        #[arg(long)]
        simulate: bool,
    },
    /// Two-description Monte-Carlo run.
    Simulate(Common),
    /// Four-description Monte-Carlo run with a three-level target.
    SimulateK4(Common),
    /// Monte-Carlo run with a non-Gaussian source at high resolution.
    Universality(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    sigma_x2: Option<f64>,
    #[arg(long)]
    sigma_e2: Option<f64>,
    #[arg(long)]
    quant_step: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    n_trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    delta0: Option<f64>,
    #[arg(long)]
    delta1: Option<f64>,
    #[arg(long)]
    patterns: Option<String>,
    #[arg(long)]
    post_scaling: Option<String>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn raw(&self) -> Result<RawConfig> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::parse(&fs::read_to_string(path)?)?,
            None => RawConfig::default(),
        };
        let flags: [(&str, Option<String>); 16] = [
            ("sigma_x2", self.sigma_x2.map(|v| v.to_string())),
            ("sigma_e2", self.sigma_e2.map(|v| v.to_string())),
            ("quant_step", self.quant_step.map(|v| v.to_string())),
            ("delta", self.delta.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("lambda", self.lambda.map(|v| v.to_string())),
            ("p", self.p.map(|v| v.to_string())),
            ("n_samples", self.n_samples.map(|v| v.to_string())),
            ("n_trials", self.n_trials.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("source", self.source.clone()),
            ("delta0", self.delta0.map(|v| v.to_string())),
            ("delta1", self.delta1.map(|v| v.to_string())),
            ("patterns", self.patterns.clone()),
            ("post_scaling", self.post_scaling.clone()),
            ("tolerance", self.tolerance.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                raw.insert(key, &v, Origin::Flag)?;
            }
        }
        Ok(raw)
    }

    fn experiment(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_raw(&self.raw()?)
    }

    fn emit(&self, csv: &str, report: &str) -> Result<()> {
        match &self.out {
            Some(path) => {
                fs::write(path, csv)?;
                print!("{report}");
            }
            None => {
                print!("{csv}");
                eprint!("{report}");
            }
        }
        Ok(())
    }
}

/// `Ok(true)` when every checked tolerance holds.
fn execute(command: Command) -> Result<bool> {
    match command {
        Command::DesignFilter(common) => {
            let mut raw = common.raw()?;
            if (common.delta0.is_some() || raw.contains("delta0")) && !raw.contains("oversampling") {
                raw.insert("oversampling", "4", Origin::Flag)?;
            }
            let exp = ExperimentConfig::from_raw(&raw)?;
            let c = exp.design_filter()?;
            let mp = min_phase_check(&c)?;
            let coeffs: Vec<String> = c.coeffs().iter().map(f64::to_string).collect();
            println!("coefficients = {}", coeffs.join(", "));
            println!("pdc = {}", c.pdc());
            println!("pds = {}", c.pds());
            println!("gamma = {}", c.pds() / c.pdc());
            println!("max_root_magnitude = {}", mp.max_root_magnitude);
            println!("log_spectrum_integral = {}", mp.log_spectrum_integral);
            println!("min_phase = {}", mp.is_min_phase);
            Ok(mp.is_min_phase)
        }
        Command::TheoryPoint(common) => {
            let mut raw = common.raw()?;
            if !raw.contains("p") {
                raw.insert("p", "0", Origin::Flag)?;
            }
            let exp = ExperimentConfig::from_raw(&raw)?;
            let delta = exp.delta.unwrap_or(1.0);
            let e = exp.quantizer_spec()?.noise_variance();
            let point = brickwall_point(delta, e, exp.sigma_x2)?;
            println!("delta = {delta}");
            println!("sigma_e2 = {e}");
            println!("rate_bits = {}", point.rate_bits);
            println!("dc = {}", point.dc);
            println!("ds = {}", point.ds);
            println!("alpha = {}", point.alpha);
            println!("beta = {}", point.beta);
            let oz = ozarow_bounds(point.rate_bits, point.ds, exp.sigma_x2)?;
            println!("ozarow_ds_floor = {}", oz.ds_floor);
            println!("ozarow_dc_bound = {}", oz.dc_bound);
            let mut ok = point.dc >= oz.dc_bound * (1.0 - 1e-10);
            if exp.filter_order() > 0 && delta > 1.0 {
                let c = exp.design_filter()?;
                let fp = finite_p_point(c.pdc(), c.pds(), e, exp.sigma_x2)?;
                println!("p = {}", c.order());
                println!("finite_p_rate_bits = {}", fp.rate_bits);
                println!("finite_p_dc = {}", fp.dc);
                println!("finite_p_ds = {}", fp.ds);
                let bw = BrickWallSpec::from_gamma(c.pds() / c.pdc())?;
                let floor = finite_p_point(bw.pdc(), bw.pds(), e, exp.sigma_x2)?;
                ok &= fp.dc >= floor.dc * (1.0 - 1e-9);
            }
            Ok(ok)
        }
        Command::Sweep {
            common,
            deltas,
            simulate,
        } => {
            let exp = common.experiment()?;
            let out = sweep(&deltas, &exp, simulate)?;
            let ok = out.rows.iter().all(|r| r.dc_brickwall >= r.ozarow_dc_bound - 1e-12);
            let report = format!("{} points, {} skipped\n", out.rows.len(), out.skipped.len());
            common.emit(&out.csv(), &report)?;
            Ok(ok)
        }
        Command::Simulate(common) => {
            let exp = common.experiment()?;
            let r = run(&exp)?;
            common.emit(&r.csv(), &r.report())?;
            Ok(r.all_pass())
        }
        Command::SimulateK4(common) => {
            let mut raw = common.raw()?;
            if !raw.contains("oversampling") {
                raw.insert("oversampling", "4", Origin::Flag)?;
            }
            if !raw.contains("post_scaling") {
                raw.insert("post_scaling", "unity", Origin::Flag)?;
            }
            if !raw.contains("tolerance") {
                raw.insert("tolerance", "0.05", Origin::Flag)?;
            }
            if !raw.contains("p") {
                raw.insert("p", "48", Origin::Flag)?;
            }
            let exp = ExperimentConfig::from_raw(&raw)?;
            let r = run(&exp)?;
            let mut report = r.report();
            if let Some((d0, d1)) = exp.k4 {
                let ideal = k4_point(&K4Spec::new(d0, d1, r.sigma_e2, exp.sigma_x2)?);
                report.push_str(&format!(
                    "ideal three-level values: dc {} d2 {} d1 {} rate {}\n",
                    ideal.dc, ideal.d2, ideal.d1, ideal.rate_bits
                ));
            }
            common.emit(&r.csv(), &report)?;
            Ok(r.all_pass())
        }
        Command::Universality(common) => {
            let exp = common.experiment()?;
            let u = universality_check(&exp)?;
            let report = format!(
                "source = {}\n{}gaussian accounting rate {} is an upper bound for this source\n",
                u.source.name(),
                u.result.report(),
                u.gaussian_rate_upper_bound
            );
            common.emit(&u.result.csv(), &report)?;
            Ok(u.all_pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
