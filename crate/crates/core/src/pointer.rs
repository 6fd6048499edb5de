//! What the user sees: the pointer at the pen position and a virtual string
//! drawn from the pointer toward the input point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::friction::{FrictionParams, SimState};

/// Display geometry for one tick. The pointer always sits at the simulated pen position.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplayState {
    pub pointer_px: f64,
    /// `C_l·√F_s`; computed even when the string is hidden.
    pub string_len: f64,
    pub string_from: f64,
    pub string_to: f64,
    pub string_visible: bool,
}

/// String length `l = C_l·√F_s` for spring force `F_s`.
pub fn string_length(spring_force: f64, gain: f64) -> Result<f64> {
    if !(spring_force >= 0.0) || !spring_force.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "spring force must be finite and >= 0, got {spring_force}"
        )));
    }
    if !(gain >= 0.0) || !gain.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "string gain must be finite and >= 0, got {gain}"
        )));
    }
    Ok(string_length_unchecked(spring_force, gain))
}

pub(crate) fn string_length_unchecked(spring_force: f64, gain: f64) -> f64 {
    gain * spring_force.sqrt()
}

/// Maps a simulator state to display geometry.
///
/// The string is a straight segment starting at the pointer and pointing at the
/// input position, shown only when `with_string` is set and the device is in
/// contact. It follows the same law in both phases, so it shrinks smoothly as the
/// spring relaxes during slip.
pub fn compose_display(
    state: &SimState,
    params: &FrictionParams,
    with_string: bool,
) -> DisplayState {
    let pointer = state.p;
    let len = string_length_unchecked(state.spring_force(params), params.string_gain);
    let toward = (state.q - pointer).signum();
    let string_to = if state.q == pointer {
        pointer
    } else {
        pointer + toward * len
    };
    DisplayState {
        pointer_px: pointer,
        string_len: len,
        string_from: pointer,
        string_to,
        string_visible: with_string && state.contact,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::friction::Phase;

    fn stuck(p: f64, q: f64) -> SimState {
        SimState {
            phase: Phase::Stick,
            p,
            v: 0.0,
            q,
            t: 0.0,
            contact: true,
        }
    }

    #[test]
    fn zero_force_zero_length() {
        assert_eq!(string_length(0.0, 2000.0).unwrap(), 0.0);
    }

    #[test]
    fn linear_in_gain() {
        for f in [0.01, 0.3, 2.5] {
            let one = string_length(f, 700.0).unwrap();
            let two = string_length(f, 1400.0).unwrap();
            assert!((two - 2.0 * one).abs() <= 1e-12 * two);
        }
    }

    #[test]
    fn negative_force_rejected() {
        assert!(matches!(
            string_length(-0.1, 2000.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(string_length(0.1, -1.0).is_err());
        assert!(string_length(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn hidden_string_keeps_pointer() {
        let params = FrictionParams::default();
        let s = stuck(0.0, 5.0);
        let off = compose_display(&s, &params, false);
        let on = compose_display(&s, &params, true);
        assert!(!off.string_visible);
        assert!(on.string_visible);
        assert_eq!(off.pointer_px, 0.0);
        assert_eq!(off.pointer_px, on.pointer_px);
    }

    #[test]
    fn string_points_at_input() {
        let params = FrictionParams::default();
        for q in [5.0, -5.0] {
            let d = compose_display(&stuck(1.0, q), &params, true);
            let f = params.k * (q - 1.0f64).abs();
            assert!((d.string_len - 2000.0 * f.sqrt()).abs() < 1e-9);
            assert_eq!(d.string_from, 1.0);
            assert!(((d.string_to - d.string_from).abs() - d.string_len).abs() < 1e-9);
            assert_eq!((d.string_to - d.string_from).signum(), (q - 1.0).signum());
        }
    }

    #[test]
    fn no_elongation_no_string() {
        let params = FrictionParams::default();
        for with in [false, true] {
            let d = compose_display(&stuck(3.0, 3.0), &params, with);
            assert_eq!(d.string_len, 0.0);
            assert_eq!(d.string_to, 3.0);
        }
    }

    #[test]
    fn lifted_device_hides_string() {
        let params = FrictionParams::default();
        let s = SimState {
            contact: false,
            ..stuck(0.0, 5.0)
        };
        assert!(!compose_display(&s, &params, true).string_visible);
    }
}
