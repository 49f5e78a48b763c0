//! Subcommand implementations and report emission.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use axiflow_core::atlas::{build_streamline_map, laminar_rate_t, StreamlineMap};
use axiflow_core::field::pressure_gradient_certify;
use axiflow_core::frenet::{frenet_apparatus, write_frames_csv, FrenetSample};
use axiflow_core::identities::{check_pressure_identities, rotation_balance, BalanceReport};
use axiflow_core::scan::instability_scan;
use axiflow_core::trajectory::{
    integrate_trajectory, reparametrize_arclength, Seed, Trajectory, TrajectoryStatus,
};
use axiflow_core::{Error as CoreError, Field};

use crate::config::{ConfigError, ScenarioConfig, SCHEMA_VERSION};
use crate::{Cli, Command};

/// JSON envelope: every document carries the schema version and the full
/// configuration echo, which suffices to reproduce the run.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    config: &'a ScenarioConfig,
    report: T,
}

fn write_json<T: Serialize>(
    path: &Path,
    config: &ScenarioConfig,
    report: T,
) -> std::io::Result<()> {
    let doc = Envelope {
        schema_version: SCHEMA_VERSION,
        config,
        report,
    };
    fs::write(path, serde_json::to_string_pretty(&doc).unwrap())
}

enum RunError {
    Validation(String),
    Numerical(CoreError),
    Io(std::io::Error),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } | CoreError::Uncertified { .. } => {
                RunError::Validation(e.to_string())
            }
            other => RunError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Validation(e.to_string())
    }
}

pub fn run(cli: &Cli) -> i32 {
    let text = match fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("axiflow: cannot read config {}: {e}", cli.config.display());
            return 1;
        }
    };
    let config = match ScenarioConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("axiflow: {e}");
            return 1;
        }
    };
    if let Err(e) = fs::create_dir_all(&cli.out) {
        eprintln!("axiflow: cannot create output dir {}: {e}", cli.out.display());
        return 1;
    }
    match dispatch(cli, &config) {
        Ok(()) => 0,
        Err(RunError::Validation(msg)) => {
            eprintln!("axiflow: validation error: {msg}");
            1
        }
        Err(RunError::Io(e)) => {
            eprintln!("axiflow: i/o error: {e}");
            2
        }
        Err(RunError::Numerical(e)) => {
            eprintln!("axiflow: numerical failure: {e}");
            #[derive(Serialize)]
            struct Failure {
                error: String,
            }
            let _ = write_json(
                &cli.out.join("error.json"),
                &config,
                Failure {
                    error: e.to_string(),
                },
            );
            2
        }
    }
}

fn dispatch(cli: &Cli, config: &ScenarioConfig) -> Result<(), RunError> {
    let field = Arc::new(config.field.build()?);
    if cli.verbose {
        eprintln!("axiflow: field {} loaded", field.name());
    }
    match cli.command {
        Command::Fields => run_fields(cli, config, &field),
        Command::Trace => run_trace(cli, config, &field),
        Command::Atlas => run_atlas(cli, config, &field),
        Command::Frames => run_frames(cli, config, &field),
        Command::Identities => run_identities(cli, config, &field),
        Command::Scan => run_scan(cli, config),
    }
}

fn block<'a, T>(block: &'a Option<T>, name: &str) -> Result<&'a T, RunError> {
    block
        .as_ref()
        .ok_or_else(|| RunError::Validation(format!("config is missing the [{name}] block")))
}

fn run_fields(cli: &Cli, config: &ScenarioConfig, field: &Arc<Field>) -> Result<(), RunError> {
    let b = block(&config.fields, "fields")?;
    let rs = b.r_grid.values();
    let zs = b.z_grid.values();
    let mut csv = String::from("# r,z,t,v_r,v_theta,v_z,divergence\n");
    let mut samples = Vec::new();
    for &r in &rs {
        for &z in &zs {
            let v = field.velocity(r, z, b.t)?;
            let div = field.divergence(r, z, b.t)?;
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r, z, b.t, v.r, v.theta, v.z, div
            ));
            if r > 0.0 {
                samples.push((r, z, b.t));
            }
        }
    }
    fs::write(cli.out.join("fields.csv"), csv)?;
    let cert = pressure_gradient_certify(field, &samples)?;
    #[derive(Serialize)]
    struct FieldsReport {
        field: String,
        incompressible: bool,
        certified_gradient_attached: bool,
        certification: axiflow_core::field::CertificationReport,
    }
    write_json(
        &cli.out.join("fields.json"),
        config,
        FieldsReport {
            field: field.name().to_string(),
            incompressible: field.is_incompressible(),
            certified_gradient_attached: field.is_certified(),
            certification: cert,
        },
    )?;
    Ok(())
}

fn status_str(s: TrajectoryStatus) -> &'static str {
    match s {
        TrajectoryStatus::Completed => "completed",
        TrajectoryStatus::LeftDomain => "left_domain",
        TrajectoryStatus::AxisHit => "axis_hit",
        TrajectoryStatus::Stagnation => "stagnation",
    }
}

fn run_trace(cli: &Cli, config: &ScenarioConfig, field: &Arc<Field>) -> Result<(), RunError> {
    let b = block(&config.trace, "trace")?;
    #[derive(Serialize)]
    struct TraceRow {
        seed: [f64; 3],
        status: &'static str,
        t_end: f64,
        end_r: f64,
        end_theta: f64,
        end_z: f64,
        arc_length: f64,
        csv: String,
    }
    let mut rows = Vec::new();
    for (i, &[r, theta, z]) in b.seeds.iter().enumerate() {
        let traj = integrate_trajectory(
            field.clone(),
            Seed { r, theta, z },
            (b.t_span[0], b.t_span[1]),
            b.rel_tol,
        )?;
        let name = format!("trace_{i}.csv");
        let mut buf = Vec::new();
        traj.write_csv(&mut buf)?;
        fs::write(cli.out.join(&name), buf)?;
        let end = traj.point(traj.t_end());
        rows.push(TraceRow {
            seed: [r, theta, z],
            status: status_str(traj.status()),
            t_end: traj.t_end(),
            end_r: end.r,
            end_theta: end.theta,
            end_z: end.z,
            arc_length: traj.total_arc_length(),
            csv: name,
        });
    }
    write_json(&cli.out.join("trace.json"), config, rows)?;
    Ok(())
}

fn rates_csv(
    map: &StreamlineMap,
    field: &Arc<Field>,
    rbar0s: &[f64],
    zs: &[f64],
    z_in: f64,
    lt_dt: f64,
) -> Result<String, RunError> {
    let mut out = String::from(
        "# rbar0,z,L_x,L_t,fwd_r0_1,fwd_r0_2,fwd_r0_3,fwd_z_1,fwd_z_2,fwd_z_3,\
inv_r_1,inv_r_2,inv_r_3,inv_z_1,inv_z_2,inv_z_3,lt_dt_inverse,lt_dt_dr0,lt_dt_dz\n",
    );
    for &r0 in rbar0s {
        for &z in zs {
            let lx = map.laminar_rate_x(r0, z)?;
            let lt = laminar_rate_t(field, map.t, lt_dt, r0, z, z_in)?;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r0,
                z,
                lx.l_x,
                lt.l_t,
                lx.fwd_r0[0],
                lx.fwd_r0[1],
                lx.fwd_r0[2],
                lx.fwd_z[0],
                lx.fwd_z[1],
                lx.fwd_z[2],
                lx.inv_r[0],
                lx.inv_r[1],
                lx.inv_r[2],
                lx.inv_z[0],
                lx.inv_z[1],
                lx.inv_z[2],
                lt.dt_inverse,
                lt.dt_d_r0,
                lt.dt_d_z
            ));
        }
    }
    Ok(out)
}

fn run_atlas(cli: &Cli, config: &ScenarioConfig, field: &Arc<Field>) -> Result<(), RunError> {
    let b = block(&config.atlas, "atlas")?;
    let z_in = b.z_in.unwrap_or_else(|| field.default_z_in());
    let rbar0s = b.rbar0_grid.values();
    let zs = b.z_grid.values();
    let map = build_streamline_map(field, b.t, &rbar0s, &zs, z_in)?;
    let mut buf = Vec::new();
    map.write_csv(&mut buf)?;
    fs::write(cli.out.join("map.csv"), buf)?;

    let rates_r0 = b.rates_rbar0.as_ref().map(|g| g.values()).unwrap_or_else(|| rbar0s.clone());
    let rates_z = b.rates_z.as_ref().map(|g| g.values()).unwrap_or_else(|| zs.clone());
    let rates = rates_csv(&map, field, &rates_r0, &rates_z, z_in, b.lt_dt)?;
    fs::write(cli.out.join("rates.csv"), rates)?;

    #[derive(Serialize)]
    struct AtlasReport {
        field: String,
        t: f64,
        z_in: f64,
        n_streamlines: usize,
        n_stations: usize,
    }
    write_json(
        &cli.out.join("atlas.json"),
        config,
        AtlasReport {
            field: field.name().to_string(),
            t: b.t,
            z_in,
            n_streamlines: rbar0s.len(),
            n_stations: zs.len(),
        },
    )?;
    Ok(())
}

fn run_frames(cli: &Cli, config: &ScenarioConfig, field: &Arc<Field>) -> Result<(), RunError> {
    let b = block(&config.frames, "frames")?;
    let traj = integrate_trajectory(
        field.clone(),
        Seed {
            r: b.seed[0],
            theta: b.seed[1],
            z: b.seed[2],
        },
        (b.t_span[0], b.t_span[1]),
        b.rel_tol,
    )?;
    let arc = reparametrize_arclength(&traj)?;
    let n = b.n_samples.max(2);
    let samples: Vec<FrenetSample> = (1..n)
        .map(|k| frenet_apparatus(&arc, arc.total_length() * k as f64 / n as f64))
        .collect::<Result<_, _>>()?;
    let mut buf = Vec::new();
    write_frames_csv(&samples, &mut buf)?;
    fs::write(cli.out.join("frames.csv"), buf)?;

    #[derive(Serialize)]
    struct FrameRow {
        s: f64,
        t: f64,
        kappa: f64,
        torsion: f64,
        torsion_raw: f64,
        orientation: axiflow_core::frenet::Orientation,
    }
    let rows: Vec<FrameRow> = samples
        .iter()
        .map(|f| FrameRow {
            s: f.s,
            t: f.t,
            kappa: f.kappa,
            torsion: f.torsion,
            torsion_raw: f.torsion_raw,
            orientation: f.orientation,
        })
        .collect();
    write_json(&cli.out.join("frames.json"), config, rows)?;
    Ok(())
}

fn run_identities(cli: &Cli, config: &ScenarioConfig, field: &Arc<Field>) -> Result<(), RunError> {
    let b = block(&config.identities, "identities")?;
    let traj: Trajectory = integrate_trajectory(
        field.clone(),
        Seed {
            r: b.seed[0],
            theta: b.seed[1],
            z: b.seed[2],
        },
        (b.t_span[0], b.t_span[1]),
        b.rel_tol,
    )?;
    let report = check_pressure_identities(&traj, &b.probes, b.fd_step)?;
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    fs::write(cli.out.join("identities.csv"), buf)?;

    let balances: Vec<BalanceReport> = b
        .probes
        .iter()
        .map(|&t| rotation_balance(&traj, t))
        .collect::<Result<_, _>>()?;
    #[derive(Serialize)]
    struct IdentitiesReport {
        identities: axiflow_core::identities::IdentityReport,
        balances: Vec<BalanceReport>,
    }
    write_json(
        &cli.out.join("identities.json"),
        config,
        IdentitiesReport {
            identities: report,
            balances,
        },
    )?;
    Ok(())
}

fn run_scan(cli: &Cli, config: &ScenarioConfig) -> Result<(), RunError> {
    let params = block(&config.scan, "scan")?;
    let table = instability_scan(params)?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    fs::write(cli.out.join("scan.csv"), buf)?;
    write_json(&cli.out.join("scan.json"), config, &table)?;
    if table.rows.is_empty() {
        eprintln!(
            "axiflow: scan produced no admissible grid points ({} skipped); see scan.json",
            table.skipped.len()
        );
    }
    Ok(())
}
