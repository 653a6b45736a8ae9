use serde::Serialize;

use super::run::SimTrace;

/// One full turn of slip angle.
pub const SPIN_THRESHOLD_DEG: f64 = 360.0;

/// Summary figures of one run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RunMetrics {
    pub max_abs_beta_deg: f64,
    /// `|beta|` went past a full turn.
    pub spin: bool,
    /// Time of the first sample past the spin threshold.
    pub spin_time_s: Option<f64>,
    pub max_error_m: f64,
    pub max_mean_error_m: f64,
    pub max_abs_e_psi_dot: f64,
    pub final_speed_m_s: f64,
}

pub fn compute_metrics(trace: &SimTrace) -> RunMetrics {
    let mut m = RunMetrics::default();
    for s in &trace.samples {
        let beta = s.beta.to_degrees().abs();
        m.max_abs_beta_deg = m.max_abs_beta_deg.max(beta);
        if beta > SPIN_THRESHOLD_DEG && m.spin_time_s.is_none() {
            m.spin_time_s = Some(s.t);
        }
        m.max_error_m = m.max_error_m.max(s.error);
        m.max_mean_error_m = m.max_mean_error_m.max(s.error_mean);
        m.max_abs_e_psi_dot = m.max_abs_e_psi_dot.max(s.e_psi_dot.abs());
    }
    m.spin = m.spin_time_s.is_some();
    m.final_speed_m_s = trace.last().map_or(0.0, |s| s.speed);
    m
}
