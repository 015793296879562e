use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use vortexlab::experiments::{run_pairing, run_sweep, threshold_monitor};
use vortexlab::io::{
    emit_svg_plots, read_cloud_csv, read_measure_csv, write_cloud_csv, write_diagnostics_csv, write_measure_csv,
    write_trajectory_csv, RunConfig, RunManifest, CLOUD_HEADER, MEASURE_HEADER,
};
use vortexlab::metrics::{
    center_of_vorticity, centered_cutoff, chebyshev_ceiling, measure_center, outer_mass, smoothed_outer_mass,
    w1_exact, w1_signed, w2_measure_to_dirac, w2_to_dirac, AtomicMeasure,
};
use vortexlab::point_vortex::{pv_integrate, pv_rhs};
use vortexlab::{Error, ParticleCloud};

use crate::{finish, out_dir, CmdResult, Failure};

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("json values serialize");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn runtime(message: String) -> Failure {
    Failure { code: 2, message }
}

pub(crate) fn pointvortex(cfg: &RunConfig, started: f64) -> CmdResult {
    let state = cfg.pv_state()?;
    let every = ((cfg.cadence / cfg.dt).round() as usize).max(1);
    let traj = pv_integrate(&state, cfg.dt, cfg.horizon, every, cfg.pv_floor())?;
    let dir = out_dir(cfg)?;
    write_trajectory_csv(&traj, &dir.join("trajectory.csv"), &dir.join("invariants.csv"))?;
    let h0 = traj.hamiltonian[0];
    let h1 = *traj.hamiltonian.last().expect("trajectories keep the initial state");
    let summary = json!({
        "t_end": traj.times.last(),
        "snapshots": traj.times.len(),
        "hamiltonian_drift": (h1 - h0).abs() / h0.abs().max(f64::MIN_POSITIVE),
        "collision": traj.collision,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    finish(&dir, cfg, started)?;
    if let Some(c) = traj.collision {
        log::warn!("vortices {} and {} closer than the floor at t = {}", c.i, c.j, c.t);
    }
    println!("{}", serde_json::to_string(&summary).expect("json values serialize"));
    Ok(())
}

pub(crate) fn simulate(cfg: &RunConfig, started: f64) -> CmdResult {
    let spec = cfg.spec()?;
    let out = run_pairing(&spec, &cfg.numerics())?;
    let dir = out_dir(cfg)?;
    write_diagnostics_csv(&out.records, &dir.join("diagnostics.csv"))?;
    write_cloud_csv(&out.cloud, &dir.join("cloud_final.csv"))?;
    write_measure_csv(
        &AtomicMeasure::from_point_vortices(&out.pv.positions, &out.intensities)?,
        &dir.join("point_vortices.csv"),
    )?;
    let monitor = threshold_monitor(&out.records, &spec);
    write_json(&dir.join("threshold.json"), &serde_json::to_value(&monitor).expect("serializable"))?;
    let summary = json!({
        "dt": out.dt,
        "particles": out.cloud.len(),
        "records": out.records.len(),
        "t_run": out.t_run,
        "stop": out.stop,
        "pv_separation_failure": out.pv_separation_failure,
        "pv_collision": out.pv_collision,
        "tail_ratio_max": out.tail_ratios.iter().copied().fold(0.0, f64::max),
        "threshold_crossing": monitor.crossing,
        "failure": out.failure,
    });
    write_json(&dir.join("summary.json"), &summary)?;
    finish(&dir, cfg, started)?;
    println!("{}", serde_json::to_string(&summary).expect("json values serialize"));
    match out.failure {
        Some(f) => Err(runtime(f)),
        None => Ok(()),
    }
}

pub(crate) fn sweep(cfg: &RunConfig, started: f64) -> CmdResult {
    let spec = cfg.spec()?;
    let result = run_sweep(&spec, &cfg.epsilons, &cfg.numerics())?;
    let dir = out_dir(cfg)?;
    for m in &result.members {
        write_diagnostics_csv(&m.records, &dir.join(format!("diagnostics_eps{}.csv", m.epsilon)))?;
    }
    let mut light = result.clone();
    for m in &mut light.members {
        m.records.clear();
    }
    write_json(&dir.join("sweep.json"), &serde_json::to_value(&light).expect("serializable"))?;
    if result.members.iter().filter(|m| m.failure.is_none()).count() >= 2 {
        emit_svg_plots(&result, &dir.join("sweep.svg"))?;
    }
    finish(&dir, cfg, started)?;
    let slopes = |fits: &[Option<vortexlab::experiments::Fit>]| -> Vec<Option<f64>> {
        fits.iter().map(|f| f.map(|f| f.slope)).collect()
    };
    println!(
        "{}",
        json!({
            "epsilons": result.epsilons,
            "w2_slope": slopes(&result.w2_fit),
            "center_gap_slope": slopes(&result.center_gap_fit),
            "vel_gap_slope": slopes(&result.vel_gap_fit),
            "failures": result.members.iter().map(|m| m.failure.clone()).collect::<Vec<_>>(),
        })
    );
    let failed: Vec<String> = result
        .members
        .iter()
        .filter_map(|m| m.failure.as_ref().map(|f| format!("epsilon {}: {f}", m.epsilon)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(runtime(failed.join("; ")))
    }
}

enum Input {
    Cloud(ParticleCloud),
    Measure(AtomicMeasure),
}

fn read_input(path: &Path) -> Result<Input, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = text.lines().next().unwrap_or("").trim();
    if header == CLOUD_HEADER {
        Ok(Input::Cloud(read_cloud_csv(path)?))
    } else if header == MEASURE_HEADER {
        Ok(Input::Measure(read_measure_csv(path)?))
    } else {
        Err(Error::Format {
            path: path.into(),
            message: format!("header `{header}` is neither `{CLOUD_HEADER}` nor `{MEASURE_HEADER}`"),
        }
        .into())
    }
}

fn cloud_report(cloud: &ParticleCloud, radius: Option<f64>) -> Result<Value, Error> {
    let mut comps = Vec::new();
    for i in 0..cloud.n_components() {
        let x = center_of_vorticity(cloud, i)?;
        let mut c = json!({
            "component": i,
            "intensity": cloud.intensity(i),
            "center": [x.x, x.y],
            "w2_center": w2_to_dirac(cloud, i, x)?,
        });
        if let Some(r) = radius {
            let band = r / 8.0;
            let cut = centered_cutoff(cloud, i, 2.0 * r - band, band)?;
            c["m_R"] = json!(outer_mass(cloud, i, r)?);
            c["m_2R"] = json!(outer_mass(cloud, i, 2.0 * r)?);
            c["mu"] = json!(smoothed_outer_mass(cloud, i, &cut)?);
            c["chebyshev_R"] = json!(chebyshev_ceiling(cloud, i, r)?);
            c["chebyshev_2R"] = json!(chebyshev_ceiling(cloud, i, 2.0 * r)?);
        }
        comps.push(c);
    }
    Ok(json!({"kind": "cloud", "particles": cloud.len(), "components": comps}))
}

fn measure_report(m: &AtomicMeasure) -> Value {
    let mut v = json!({"kind": "measure", "atoms": m.len(), "total_mass": m.total_mass()});
    if let Ok(c) = measure_center(m) {
        v["center"] = json!([c.x, c.y]);
        v["w2_center"] = json!(w2_measure_to_dirac(m, c).ok());
    }
    v
}

fn as_measure(i: &Input) -> AtomicMeasure {
    match i {
        Input::Cloud(c) => AtomicMeasure::from_cloud(c),
        Input::Measure(m) => m.clone(),
    }
}

pub(crate) fn metrics(cfg: Option<&RunConfig>, out: Option<&Path>, files: &[PathBuf], started: f64) -> CmdResult {
    let inputs: Vec<Input> = files.iter().map(|p| read_input(p)).collect::<Result<_, _>>()?;
    let radius = cfg.and_then(|c| c.support_radius);
    let mut reports = Vec::new();
    for (p, i) in files.iter().zip(&inputs) {
        let mut r = match i {
            Input::Cloud(c) => cloud_report(c, radius)?,
            Input::Measure(m) => measure_report(m),
        };
        r["file"] = json!(p.display().to_string());
        reports.push(r);
    }
    let mut result = json!({ "inputs": reports });
    if inputs.len() == 2 {
        let (a, b) = (as_measure(&inputs[0]), as_measure(&inputs[1]));
        let nonneg = |m: &AtomicMeasure| m.atoms().iter().all(|x| x.1 >= 0.0);
        let w1 = if nonneg(&a) && nonneg(&b) { w1_exact(&a, &b)?.0 } else { w1_signed(&a, &b)? };
        result["w1"] = json!(w1);
        if let (Input::Cloud(c), Input::Measure(m)) = (&inputs[0], &inputs[1]) {
            if m.len() == c.n_components() {
                let mut w2 = Vec::new();
                for (i, (y, _)) in m.atoms().iter().enumerate() {
                    w2.push(w2_to_dirac(c, i, *y)?);
                }
                result["w2_to_atoms"] = json!(w2);
                let ys: Vec<_> = m.atoms().iter().map(|a| a.0).collect();
                let bound: f64 = (0..c.n_components()).map(|i| c.intensity(i).abs() * w2[i]).sum();
                result["w1_bound"] = json!(bound);
                let pv = vortexlab::PointVortexState::new(ys, m.atoms().iter().map(|a| a.1).collect());
                if let Ok(pv) = pv {
                    result["pv_velocity"] = json!(pv_rhs(&pv)?.iter().map(|v| [v.x, v.y]).collect::<Vec<_>>());
                }
            }
        }
    }
    let text = serde_json::to_string_pretty(&result).expect("json values serialize");
    println!("{text}");
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_json(&dir.join("metrics.json"), &result)?;
        let echo = cfg.map_or(Value::Null, |c| serde_json::to_value(c).expect("configs serialize"));
        RunManifest::write(dir, echo, started)?;
    }
    Ok(())
}
