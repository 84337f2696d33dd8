//! Subcommand bodies. Each returns the text printed on stdout.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use amm_track_core::calibrate::{calibration_report, load_observations, phat_table};
use amm_track_core::simulate::{
    run_mechanism, run_reduced, sweep_mechanism, sweep_reduced, MechScenario, ReducedScenario,
    SimSummary, SimTrace,
};
use amm_track_core::stability::{certify_with, contraction_boundary, CertifyOptions};

use crate::config::{Command, Format, RunConfig};
use crate::output::{to_json, write_file, write_json, Cell, Table};
use crate::CliError;

pub fn run(config: &RunConfig, out: &Path) -> Result<String, CliError> {
    let text = match config.command {
        Command::SimulateReduced => simulate_reduced(config, out)?,
        Command::SimulateCpmm => simulate_cpmm(config, out)?,
        Command::Sweep => sweep(config, out)?,
        Command::Calibrate => calibrate(config, out)?,
        Command::Certify => certify(config, out)?,
    };
    config.write_echo(out)?;
    Ok(text)
}

fn write_table(out: &Path, stem: &str, table: &Table, format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => write_file(&out.join(format!("{stem}.csv")), &table.to_csv()),
        Format::Json => write_file(&out.join(format!("{stem}.json")), &table.to_json()),
    }
}

fn trace_table(trace: &SimTrace, mechanism: bool) -> Table {
    let mut header = vec![
        "block",
        "x",
        "z",
        "correction",
        "w_next",
        "reference_log_price",
        "amm_log_price",
    ];
    if mechanism {
        header.extend(["reserve_x", "reserve_y", "direction", "q", "profit"]);
    }
    let mut t = Table::new(&header);
    for r in &trace.records {
        let mut row: Vec<Cell> = vec![
            r.block.into(),
            r.x.into(),
            r.z.into(),
            r.correction.into(),
            r.w_next.into(),
            r.reference_log_price.into(),
            r.amm_log_price.into(),
        ];
        if mechanism {
            let (rx, ry) = r.reserves.unzip();
            row.extend([Cell::from(rx), Cell::from(ry)]);
            match r.trade {
                Some(tr) => row.extend([
                    Cell::Text(format!("{}", tr.direction.sign() as i8)),
                    tr.q.into(),
                    tr.profit.into(),
                ]),
                None => row.extend([Cell::Empty, Cell::Empty, Cell::Empty]),
            }
        }
        t.push(row);
    }
    t
}

#[derive(Serialize)]
struct RunSummary<'a, S> {
    scenario: &'a S,
    summary: &'a SimSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    no_trade_radius: Option<f64>,
}

fn simulate_reduced(config: &RunConfig, out: &Path) -> Result<String, CliError> {
    let sc: ReducedScenario = config.reduced_scenario()?;
    let format = config.format()?;
    let (trace, summary) = run_reduced(&sc)?;
    write_table(out, "trace", &trace_table(&trace, false), format)?;
    write_json(
        &out.join("summary.json"),
        &RunSummary { scenario: &sc, summary: &summary, no_trade_radius: None },
    )?;
    Ok(format!(
        "mean_excess = {}\nfraction_in_tube = {}\n",
        summary.mean_excess, summary.fraction_in_tube
    ))
}

fn simulate_cpmm(config: &RunConfig, out: &Path) -> Result<String, CliError> {
    let sc: MechScenario = config.mech_scenario()?;
    let format = config.format()?;
    let radius = sc.radius()?;
    let (trace, summary) = run_mechanism(&sc)?;
    write_table(out, "trace", &trace_table(&trace, true), format)?;
    write_json(
        &out.join("summary.json"),
        &RunSummary { scenario: &sc, summary: &summary, no_trade_radius: Some(radius) },
    )?;
    Ok(format!(
        "mean_abs_gap = {}\ntrades_executed = {}\nno_trade_radius = {radius}\n",
        summary.mean_abs_gap,
        summary.trades_executed.unwrap_or(0)
    ))
}

fn sweep(config: &RunConfig, out: &Path) -> Result<String, CliError> {
    let format = config.format()?;
    match config.get("target")? {
        "reduced" => {
            let base = config.reduced_scenario()?;
            let lg = config.grid("lambda_grid")?;
            let pg = config.grid("p_grid")?;
            let radius = config.f64("radius")?;
            let sweep = sweep_reduced(&base, &lg, &pg)?;
            let map = contraction_boundary(&lg, &pg, base.gamma_bar, radius, &base.disturbance)?;
            let mut t = Table::new(&["lambda", "p", "mean_excess", "fraction_in_tube", "rho_star", "certified"]);
            for (i, &l) in lg.iter().enumerate() {
                for (j, &p) in pg.iter().enumerate() {
                    let s = sweep.at(i, j);
                    let c = &map.cells[i * pg.len() + j];
                    t.push(vec![
                        l.into(),
                        p.into(),
                        s.mean_excess.into(),
                        s.fraction_in_tube.into(),
                        c.rho_star.into(),
                        c.certified.into(),
                    ]);
                }
            }
            let mut b = Table::new(&["lambda", "p"]);
            for &(l, p) in &map.boundary {
                b.push(vec![l.into(), p.into()]);
            }
            write_table(out, "matrix", &t, format)?;
            write_table(out, "boundary", &b, format)?;
            Ok(format!("cells = {}\nboundary_points = {}\n", t.len(), b.len()))
        }
        "cpmm" => {
            let base = config.mech_scenario()?;
            let dg = config.grid("depth_grid")?;
            let cg = config.grid("cost_grid")?;
            let sweep = sweep_mechanism(&base, &dg, &cg)?;
            let mut t = Table::new(&[
                "depth_scale",
                "c_f",
                "no_trade_radius",
                "mean_abs_gap",
                "fraction_in_tube",
                "trades_executed",
            ]);
            for (i, &d) in dg.iter().enumerate() {
                for (j, &c) in cg.iter().enumerate() {
                    let s = sweep.at(i, j);
                    t.push(vec![
                        d.into(),
                        c.into(),
                        sweep.radius_at(i, j).into(),
                        s.mean_abs_gap.into(),
                        s.fraction_in_tube.into(),
                        s.trades_executed.into(),
                    ]);
                }
            }
            write_table(out, "matrix", &t, format)?;
            Ok(format!("cells = {}\n", t.len()))
        }
        other => Err(CliError::Config(format!("`target`: expected reduced or cpmm, got `{other}`"))),
    }
}

fn calibrate(config: &RunConfig, out: &Path) -> Result<String, CliError> {
    let input = config.get("input")?;
    if input.is_empty() {
        return Err(CliError::Config("calibrate needs an input CSV".into()));
    }
    let mut set = load_observations(input)?;
    let pairs: Vec<&str> = config
        .get("pairs")?
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if !pairs.is_empty() {
        set = set.filter_pairs(&pairs);
    }
    let grid = config.grid("phat_grid")?;
    let report = calibration_report(&set)?;
    let curve = phat_table(&set, &grid)?;
    write_json(&out.join("report.json"), &report)?;
    let mut t = Table::new(&["lambda", "phat_large", "phat_small"]);
    for (l, large, small) in curve {
        t.push(vec![l.into(), large.into(), small.into()]);
    }
    write_file(&out.join("phat.csv"), &t.to_csv())?;

    let mut text = format!(
        "observations = {}\ngamma_bar = {}\nx_star = {}\n",
        report.observations, report.gamma_bar, report.x_star
    );
    match (report.lambda_star, report.p_star) {
        (Some(l), Some(p)) => {
            let _ = writeln!(text, "lambda_star = {l}\np_star = {p}");
        }
        _ => text.push_str("lambda_star = none (no level clears the delivery threshold)\n"),
    }
    Ok(text)
}

fn certify(config: &RunConfig, out: &Path) -> Result<String, CliError> {
    let pair = config.pair()?;
    let spec = config.disturbance()?;
    let options = CertifyOptions {
        alpha_cap: config.opt_f64("alpha_cap")?,
    };
    let cert = certify_with(pair, config.f64("gamma_bar")?, config.f64("radius")?, &spec, options)
        .map_err(|e| match e {
            amm_track_core::Error::InvalidArgument { .. } => CliError::Config(e.to_string()),
            other => other.into(),
        })?;
    let json = to_json(&cert);
    write_file(&out.join("certificate.json"), &json)?;
    Ok(json)
}
