//! CSV traces, metric summaries and SVG plots.

use std::fs;
use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::ExportError;
use crate::vehicle::VehicleState;

use super::metrics::RunMetrics;
use super::run::{Sample, SimTrace};

pub const TRACE_FILE: &str = "trace.csv";
pub const METRICS_FILE: &str = "metrics.csv";

const WHEELS: [&str; 4] = ["fl", "fr", "rl", "rr"];

/// Column names of the trace CSV, in order.
pub fn trace_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "t", "x", "y", "z", "roll", "pitch", "yaw", "vx", "vy", "vz", "p", "q", "r",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let per_wheel = |h: &mut Vec<String>, prefix: &str| {
        for w in WHEELS {
            h.push(format!("{prefix}_{w}"));
        }
    };
    per_wheel(&mut h, "omega");
    for s in ["speed", "steer", "steer_kinematic", "steer_correction", "throttle", "engine_torque"] {
        h.push(s.into());
    }
    per_wheel(&mut h, "brake");
    for s in [
        "delta_m_yaw",
        "torque_cut",
        "beta",
        "beta_est",
        "beta_ref",
        "psi_dot",
        "psi_dot_ref",
        "psi_dot_limit",
        "e_beta",
        "e_psi_dot",
        "limit_excess",
    ] {
        h.push(s.into());
    }
    per_wheel(&mut h, "sigma");
    per_wheel(&mut h, "alpha");
    per_wheel(&mut h, "load");
    for s in ["lateral_offset", "error", "error_mean", "beta_over_dry", "beta_over_icy"] {
        h.push(s.into());
    }
    h
}

fn sample_values(s: &Sample) -> Vec<f64> {
    let st = &s.state;
    let mut v = vec![s.t];
    v.extend(st.position);
    v.extend(st.euler);
    v.extend(st.velocity);
    v.extend(st.rates);
    v.extend(st.wheel_spin);
    v.extend([
        s.speed,
        s.steer,
        s.steer_kinematic,
        s.steer_correction,
        s.throttle,
        s.engine_torque,
    ]);
    v.extend(s.brake_torque);
    v.extend([
        s.delta_m_yaw,
        s.torque_cut,
        s.beta,
        s.beta_est,
        s.beta_ref,
        s.psi_dot,
        s.psi_dot_ref,
        s.psi_dot_limit,
        s.e_beta,
        s.e_psi_dot,
        s.limit_excess,
    ]);
    v.extend(s.sigma);
    v.extend(s.alpha);
    v.extend(s.load);
    v.extend([
        s.lateral_offset,
        s.error,
        s.error_mean,
        f64::from(u8::from(s.beta_over_dry)),
        f64::from(u8::from(s.beta_over_icy)),
    ]);
    v
}

struct Cursor<'a>(std::slice::Iter<'a, f64>);

impl Cursor<'_> {
    fn one(&mut self) -> f64 {
        self.0.next().copied().unwrap_or(f64::NAN)
    }

    fn many<const N: usize>(&mut self) -> [f64; N] {
        std::array::from_fn(|_| self.one())
    }
}

fn sample_from_values(v: &[f64]) -> Sample {
    let mut c = Cursor(v.iter());
    let t = c.one();
    let state = VehicleState {
        position: c.many(),
        euler: c.many(),
        velocity: c.many(),
        rates: c.many(),
        wheel_spin: c.many(),
    };
    let [speed, steer, steer_kinematic, steer_correction, throttle, engine_torque] = c.many();
    let brake_torque = c.many();
    let [delta_m_yaw, torque_cut, beta, beta_est, beta_ref, psi_dot, psi_dot_ref, psi_dot_limit, e_beta, e_psi_dot, limit_excess] =
        c.many();
    let sigma = c.many();
    let alpha = c.many();
    let load = c.many();
    let [lateral_offset, error, error_mean, dry, icy] = c.many();
    Sample {
        t,
        state,
        speed,
        steer,
        steer_kinematic,
        steer_correction,
        throttle,
        engine_torque,
        brake_torque,
        delta_m_yaw,
        torque_cut,
        beta,
        beta_est,
        beta_ref,
        psi_dot,
        psi_dot_ref,
        psi_dot_limit,
        e_beta,
        e_psi_dot,
        limit_excess,
        sigma,
        alpha,
        load,
        lateral_offset,
        error,
        error_mean,
        beta_over_dry: dry != 0.0,
        beta_over_icy: icy != 0.0,
    }
}

/// Fixed formatting: 17 significant digits, enough to reproduce every `f64`
/// bit for bit.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> ExportError + '_ {
    move |source| ExportError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the trace as CSV. An empty trace produces the header only.
pub fn write_trace_csv<W: std::io::Write>(trace: &SimTrace, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trace_header())?;
    for s in &trace.samples {
        w.write_record(sample_values(s).into_iter().map(format_value))?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_csv_string(trace: &SimTrace) -> String {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}

/// Reads a trace written by [`write_trace_csv`].
pub fn read_trace_csv<R: std::io::Read>(input: R) -> Result<SimTrace, csv::Error> {
    let mut r = csv::Reader::from_reader(input);
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let values: Vec<f64> = rec.iter().map(|f| f.parse().unwrap_or(f64::NAN)).collect();
        samples.push(sample_from_values(&values));
    }
    let period = match samples.as_slice() {
        [a, b, ..] => b.t - a.t,
        _ => 0.0,
    };
    Ok(SimTrace { period, samples })
}

pub fn metrics_header() -> Vec<&'static str> {
    vec![
        "max_abs_beta_deg",
        "spin",
        "spin_time_s",
        "max_error_m",
        "max_mean_error_m",
        "max_abs_e_psi_dot",
        "final_speed_m_s",
    ]
}

pub fn metrics_values(m: &RunMetrics) -> Vec<String> {
    vec![
        format!("{:.6}", m.max_abs_beta_deg),
        m.spin.to_string(),
        m.spin_time_s.map_or(String::new(), |t| format!("{t:.3}")),
        format!("{:.6}", m.max_error_m),
        format!("{:.6}", m.max_mean_error_m),
        format!("{:.6}", m.max_abs_e_psi_dot),
        format!("{:.6}", m.final_speed_m_s),
    ]
}

/// Files written by [`export`].
#[derive(Debug, Clone, Default)]
pub struct Exported {
    pub trace: PathBuf,
    pub metrics: PathBuf,
    pub plots: Vec<PathBuf>,
}

/// Writes `trace.csv`, `metrics.csv` and, optionally, SVG plots into `dir`.
pub fn export(
    dir: &Path,
    trace: &SimTrace,
    metrics: &RunMetrics,
    fault: Option<&str>,
    plots: bool,
) -> Result<Exported, ExportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let trace_path = dir.join(TRACE_FILE);
    let file = fs::File::create(&trace_path).map_err(io_err(&trace_path))?;
    write_trace_csv(trace, std::io::BufWriter::new(file)).map_err(csv_err(&trace_path))?;

    let metrics_path = dir.join(METRICS_FILE);
    let mut w = csv::Writer::from_path(&metrics_path).map_err(csv_err(&metrics_path))?;
    let mut header = metrics_header();
    header.push("fault");
    w.write_record(header).map_err(csv_err(&metrics_path))?;
    let mut row = metrics_values(metrics);
    row.push(fault.unwrap_or("").to_string());
    w.write_record(row).map_err(csv_err(&metrics_path))?;
    w.flush().map_err(io_err(&metrics_path))?;

    let mut out = Exported {
        trace: trace_path,
        metrics: metrics_path,
        plots: Vec::new(),
    };
    if plots {
        out.plots = write_plots(dir, trace)?;
    }
    Ok(out)
}

struct Series<'a> {
    label: &'a str,
    color: RGBColor,
    value: fn(&Sample) -> f64,
}

fn plot(path: &Path, title: &str, y_label: &str, trace: &SimTrace, series: &[Series<'_>]) -> Result<(), ExportError> {
    let fail = |e: &dyn std::fmt::Display| ExportError::Plot {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let t_end = trace.last().map_or(1.0, |s| s.t.max(1e-3));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &trace.samples {
        for ser in series {
            let v = (ser.value)(s);
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !(lo < hi) {
        (lo, hi) = (lo.min(0.0) - 1.0, hi.max(0.0) + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    let root = SVGBackend::new(path, (900, 420)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| fail(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..t_end, (lo - pad)..(hi + pad))
        .map_err(|e| fail(&e))?;
    chart
        .configure_mesh()
        .x_desc("t [s]")
        .y_desc(y_label)
        .draw()
        .map_err(|e| fail(&e))?;
    for ser in series {
        let color = ser.color;
        chart
            .draw_series(LineSeries::new(
                trace.samples.iter().map(|s| (s.t, (ser.value)(s))),
                &color,
            ))
            .map_err(|e| fail(&e))?
            .label(ser.label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| fail(&e))?;
    root.present().map_err(|e| fail(&e))?;
    Ok(())
}

fn write_plots(dir: &Path, trace: &SimTrace) -> Result<Vec<PathBuf>, ExportError> {
    let beta = dir.join("beta.svg");
    plot(
        &beta,
        "Slip angle",
        "deg",
        trace,
        &[
            Series {
                label: "beta",
                color: BLUE,
                value: |s| s.beta.to_degrees(),
            },
            Series {
                label: "beta_ref",
                color: RED,
                value: |s| s.beta_ref.to_degrees(),
            },
        ],
    )?;
    let yaw = dir.join("yaw_rate.svg");
    plot(
        &yaw,
        "Yaw rate",
        "rad/s",
        trace,
        &[
            Series {
                label: "psi_dot",
                color: BLUE,
                value: |s| s.psi_dot,
            },
            Series {
                label: "psi_dot_ref",
                color: RED,
                value: |s| s.psi_dot_ref,
            },
            Series {
                label: "psi_dot_limit",
                color: GREEN,
                value: |s| s.psi_dot_limit,
            },
        ],
    )?;
    let err = dir.join("error.svg");
    plot(
        &err,
        "Trajectory error",
        "m",
        trace,
        &[
            Series {
                label: "mean",
                color: RED,
                value: |s| s.error_mean,
            },
            Series {
                label: "instantaneous",
                color: BLUE,
                value: |s| s.error,
            },
        ],
    )?;
    Ok(vec![beta, yaw, err])
}
