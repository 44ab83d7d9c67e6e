use serde::{Deserialize, Serialize};

/// Snap tolerance on λ at the end of a ramp, absorbing rounding in the
/// accumulated increments.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValveMode {
    Closed,
    Opening,
    Open,
    Closing,
}

/// Controller state: mode and configuration blend `λ` (1 closed, 0 open).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValveState {
    pub mode: ValveMode,
    pub lambda: f64,
}

impl ValveState {
    pub fn closed() -> Self {
        ValveState { mode: ValveMode::Closed, lambda: 1.0 }
    }

    pub fn open() -> Self {
        ValveState { mode: ValveMode::Open, lambda: 0.0 }
    }

    /// Resting state for a given blend; intermediate values count as closed
    /// until the first pressure signal arrives.
    pub fn at(lambda: f64) -> Self {
        let mode = if lambda <= 0.0 { ValveMode::Open } else { ValveMode::Closed };
        ValveState { mode, lambda: lambda.clamp(0.0, 1.0) }
    }
}

/// Advances the state by one step of length `dt` under pressure jump
/// `dp = p_downstream − p_upstream`. Negative `dp` drives opening, positive
/// `dp` drives closing, zero keeps the current direction.
pub fn controller_step(state: ValveState, dp: f64, ramp_open: f64, ramp_close: f64, dt: f64) -> ValveState {
    use ValveMode::*;
    let mode = match (state.mode, dp) {
        (Closed | Closing, dp) if dp < 0.0 => Opening,
        (Open | Opening, dp) if dp > 0.0 => Closing,
        (m, _) => m,
    };
    match mode {
        Opening => {
            let l = state.lambda - dt / ramp_open;
            if l <= SNAP {
                ValveState { mode: Open, lambda: 0.0 }
            } else {
                ValveState { mode, lambda: l }
            }
        }
        Closing => {
            let l = state.lambda + dt / ramp_close;
            if l >= 1.0 - SNAP {
                ValveState { mode: Closed, lambda: 1.0 }
            } else {
                ValveState { mode, lambda: l }
            }
        }
        Open | Closed => ValveState { mode, lambda: state.lambda },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn opens_in_fifty_steps() {
        let mut s = ValveState::closed();
        for k in 1..=50 {
            let prev = s.lambda;
            s = controller_step(s, -100.0, 0.01, 0.035, 2e-4);
            if k < 50 {
                assert_eq!(s.mode, ValveMode::Opening);
                assert!((prev - s.lambda - 0.02).abs() < 1e-12);
            }
        }
        assert_eq!(s, ValveState::open());
    }

    #[test]
    fn steady_pressure_keeps_state() {
        let s = ValveState::open();
        assert_eq!(controller_step(s, -5.0, 0.01, 0.035, 2e-4), s);
        assert_eq!(controller_step(s, 0.0, 0.01, 0.035, 2e-4), s);
        let c = ValveState::closed();
        assert_eq!(controller_step(c, 3.0, 0.01, 0.035, 2e-4), c);
    }

    #[test]
    fn reversal_mid_transition_is_continuous() {
        let mut s = ValveState::closed();
        for _ in 0..20 {
            s = controller_step(s, -1.0, 0.01, 0.08, 2e-4);
        }
        let mid = s.lambda;
        assert!((mid - 0.6).abs() < 1e-12);
        let r = controller_step(s, 1.0, 0.01, 0.08, 2e-4);
        assert_eq!(r.mode, ValveMode::Closing);
        assert!((r.lambda - (mid + 2e-4 / 0.08)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn lambda_bounded_and_continuous(signs in prop::collection::vec(-1i8..=1, 1..400), dt in 1e-4f64..1e-3) {
            let (ro, rc) = (0.01, 0.035);
            let mut s = ValveState::closed();
            for sg in signs {
                let n = controller_step(s, sg as f64, ro, rc, dt);
                prop_assert!((0.0..=1.0).contains(&n.lambda));
                prop_assert!((n.lambda - s.lambda).abs() <= dt / ro.min(rc) + 1e-12);
                s = n;
            }
        }

        #[test]
        fn transition_time_matches_ramp(ramp in 5e-3f64..0.1, dt in 1e-4f64..1e-3) {
            let mut s = ValveState::closed();
            let mut steps = 0;
            while s.mode != ValveMode::Open {
                s = controller_step(s, -1.0, ramp, ramp, dt);
                steps += 1;
            }
            prop_assert!((steps as f64 * dt - ramp).abs() <= dt + 1e-12);
        }
    }
}
