use crate::error::{Error, Result};

use super::Trajectory;

/// Centered moving average of the thrust and circular mean of the thrust
/// angle over `window` samples (truncated at the ends). `window = 1` is the
/// identity.
pub fn smooth_controls(traj: &Trajectory, window: usize) -> Result<Trajectory> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::Config(format!("smoothing window must be odd and >= 1, got {window}")));
    }
    let mut out = traj.clone();
    if window == 1 {
        return Ok(out);
    }
    let half = window / 2;
    let n = traj.samples.len();
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        let span = &traj.samples[lo..=hi];
        let count = span.len() as f64;
        let thrust = span.iter().map(|s| s.control.thrust).sum::<f64>() / count;
        let (sin, cos) = span
            .iter()
            .fold((0.0, 0.0), |(s, c), x| (s + x.control.alpha.sin(), c + x.control.alpha.cos()));
        let c = &mut out.samples[i].control;
        c.thrust = thrust;
        if sin != 0.0 || cos != 0.0 {
            c.alpha = sin.atan2(cos);
        }
    }
    Ok(out)
}
