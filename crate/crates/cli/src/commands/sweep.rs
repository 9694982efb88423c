use swcs::pipeline::{reconstruct_sequence, SolverChoice, SwcsConfig};

use super::num;
use crate::error::{CliError, Result};
use crate::experiment::{acquisition, apply_overrides, is_simulated, load_config, noise_std, output_root, truth, Truth};
use crate::manifest::{Manifest, MANIFEST_FILE};
use crate::output::OutputDir;
use crate::RunArgs;

pub const SWEEP_FILE: &str = "sweep.csv";
pub const BEST_FILE: &str = "best.csv";

/// Solver settings for every grid point, in row order.
fn grid(cfg: &swcs::config::ExperimentConfig) -> Result<Vec<SwcsConfig>> {
    let base = &cfg.swcs;
    let s = &cfg.sweep;
    let points: Vec<SwcsConfig> = match base.solver {
        SolverChoice::Komp => s
            .komp_k
            .iter()
            .map(|&k| {
                let mut c = base.clone();
                c.komp.k = k;
                c
            })
            .collect(),
        SolverChoice::Bregman if !s.lambda1.is_empty() || !s.lambda2.is_empty() => {
            let l1 = if s.lambda1.is_empty() { vec![base.bregman.lambda1] } else { s.lambda1.clone() };
            let l2 = if s.lambda2.is_empty() { vec![base.bregman.lambda2] } else { s.lambda2.clone() };
            l1.iter()
                .flat_map(|&a| l2.iter().map(move |&b| (a, b)))
                .map(|(a, b)| {
                    let mut c = base.clone();
                    c.bregman.lambda1 = a;
                    c.bregman.lambda2 = b;
                    c
                })
                .collect()
        }
        _ => Vec::new(),
    };
    if points.is_empty() {
        return Err(CliError::invalid(format!(
            "empty grid: the [sweep] section lists no values for the `{}` solver",
            base.solver.name()
        )));
    }
    Ok(points)
}

/// Writes `sweep.csv` with the mean and per-frame RMSE of every grid point
/// and `best.csv` holding the row with the lowest mean.
pub fn run(args: &RunArgs) -> Result<()> {
    let mut cfg = load_config(&args.config)?;
    apply_overrides(&mut cfg, &args.overrides())?;
    if !is_simulated(&cfg) {
        return Err(CliError::invalid("sweep scores against ground truth and needs a simulated phantom"));
    }
    let points = grid(&cfg)?;
    let acq = acquisition(&cfg, None)?;
    let noise = noise_std(&cfg, &acq);
    let frames = cfg.swcs.frame_list(acq.total());
    let truths: Vec<Truth> =
        frames.iter().map(|&m| Ok(truth(&cfg, m)?.expect("simulated"))).collect::<Result<Vec<_>>>()?;

    let mut header = String::from("solver,k,lambda1,lambda2,mean_rmse");
    for m in &frames {
        header += &format!(",rmse_{m}");
    }
    header.push('\n');
    let mut rows = Vec::new();
    for mut p in points {
        p.noise_std = noise;
        let results = reconstruct_sequence(&acq, &p, args.workers())?;
        let rmse: Vec<f64> = results
            .iter()
            .zip(&truths)
            .map(|(r, t)| r.as_ref().ok().and_then(|r| t.rmse(&r.reconstruction).ok()).unwrap_or(f64::NAN))
            .collect();
        let mean = rmse.iter().sum::<f64>() / rmse.len() as f64;
        let mut row = format!(
            "{},{},{},{},{}",
            p.solver.name(),
            p.komp.k,
            num(p.bregman.lambda1),
            num(p.bregman.lambda2),
            num(mean)
        );
        for r in &rmse {
            row += &format!(",{}", num(*r));
        }
        row.push('\n');
        println!("{}", row.trim_end());
        rows.push((mean, row));
    }
    let best = rows
        .iter()
        .filter(|r| !r.0.is_nan())
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or_else(|| CliError::invalid("every grid point failed"))?;

    let mut out = OutputDir::create(&output_root(&cfg, args.out.as_deref())?)?;
    let table: String = rows.iter().map(|r| r.1.as_str()).collect();
    out.write(SWEEP_FILE, format!("{header}{table}").as_bytes())?;
    out.write(BEST_FILE, format!("{header}{}", best.1).as_bytes())?;
    let mut manifest = Manifest::new("sweep", &cfg);
    manifest.noise_std = noise;
    out.write(MANIFEST_FILE, manifest.to_toml_string().as_bytes())?;
    println!("best: {}", best.1.trim_end());
    out.commit();
    Ok(())
}
