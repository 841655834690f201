//! Learning-rate schedules: linear warmup from zero, then linear decay to
//! zero or cosine annealing to zero.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    LinearWarmupLinearDecay,
    LinearWarmupCosine,
}

#[derive(Debug, Clone, Copy)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    /// Fraction of total steps spent warming up.
    pub warmup_ratio: f64,
    pub total_steps: u64,
}

impl ScheduleConfig {
    pub fn warmup_steps(&self) -> u64 {
        (self.warmup_ratio * self.total_steps as f64).ceil() as u64
    }
}

/// Learning rate at `step` for the given peak. Continuous at the warmup
/// boundary and non-negative everywhere.
pub fn lr_at(step: u64, schedule: &ScheduleConfig, peak: f64) -> f64 {
    let total = schedule.total_steps.max(1);
    let step = step.min(total);
    let warmup = schedule.warmup_steps().min(total);
    if step < warmup {
        return peak * step as f64 / warmup as f64;
    }
    if total == warmup {
        return peak;
    }
    let progress = (step - warmup) as f64 / (total - warmup) as f64;
    match schedule.kind {
        ScheduleKind::LinearWarmupLinearDecay => peak * (1.0 - progress),
        ScheduleKind::LinearWarmupCosine => {
            0.5 * peak * (1.0 + (std::f64::consts::PI * progress).cos())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: ScheduleKind) -> ScheduleConfig {
        ScheduleConfig {
            kind,
            warmup_ratio: 0.1,
            total_steps: 1000,
        }
    }

    #[test]
    fn zero_at_start_peak_at_warmup_end() {
        for kind in [
            ScheduleKind::LinearWarmupLinearDecay,
            ScheduleKind::LinearWarmupCosine,
        ] {
            let s = cfg(kind);
            assert_eq!(lr_at(0, &s, 3e-4), 0.0);
            assert_eq!(lr_at(s.warmup_steps(), &s, 3e-4), 3e-4);
            assert_eq!(lr_at(s.total_steps, &s, 3e-4), 0.0);
        }
    }

    #[test]
    fn cosine_midpoint_is_half_peak() {
        let s = cfg(ScheduleKind::LinearWarmupCosine);
        let mid = s.warmup_steps() + (s.total_steps - s.warmup_steps()) / 2;
        let lr = lr_at(mid, &s, 1e-3);
        assert!((lr - 0.5e-3).abs() < 1e-15, "{lr}");
    }

    #[test]
    fn continuous_at_warmup_boundary_and_nonnegative() {
        for kind in [
            ScheduleKind::LinearWarmupLinearDecay,
            ScheduleKind::LinearWarmupCosine,
        ] {
            let s = cfg(kind);
            let w = s.warmup_steps();
            let before = lr_at(w - 1, &s, 1.0);
            let at = lr_at(w, &s, 1.0);
            assert!((at - before) < 2.0 / w as f64, "jump at boundary");
            for step in 0..=s.total_steps {
                assert!(lr_at(step, &s, 1.0) >= 0.0);
            }
        }
    }

    #[test]
    fn zero_warmup_starts_at_peak() {
        let s = ScheduleConfig {
            kind: ScheduleKind::LinearWarmupLinearDecay,
            warmup_ratio: 0.0,
            total_steps: 10,
        };
        assert_eq!(lr_at(0, &s, 0.5), 0.5);
    }
}
