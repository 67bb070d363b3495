//! Actuator models: continuous-servo pulse commands, the wheel velocities
//! they produce on the mirrored drive pair, differential-drive twist, and
//! the fan line.

use crate::world::SimParams;

/// Full clockwise command pulse.
pub const PULSE_FULL_CW: u32 = 1000;
/// Full counterclockwise command pulse.
pub const PULSE_FULL_CCW: u32 = 3500;
/// Neutral (stop) pulse: midpoint of the two commanded extremes.
pub const PULSE_NEUTRAL: u32 = 2250;
const PULSE_HALF_SPAN: f64 = 1250.0;

/// Servo command pulse width, in the microcontroller's abstract pulse units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServoPulse {
    pub width: u32,
}

impl ServoPulse {
    pub fn new(width: u32) -> Self {
        debug_assert!(width > 0, "pulse width must be positive");
        ServoPulse { width }
    }
}

/// The controller's entire output for one tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActuatorCommand {
    pub left: ServoPulse,
    pub right: ServoPulse,
    pub fan_on: bool,
}

/// Forward speed of each wheel at its ground contact point (m/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelVelocities {
    pub v_left: f64,
    pub v_right: f64,
}

/// Body-frame velocity: forward speed and CCW-positive turn rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyTwist {
    pub linear: f64,
    pub angular: f64,
}

/// The drive maneuvers the controller chooses between.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Maneuver {
    Forward,
    Reverse,
    SpinLeft,
    SpinRight,
    Stop,
}

/// Normalized servo speed in [-1, +1]: -1 is full CW (pulse 1000), +1 is
/// full CCW (pulse 3500), linear in between and saturating outside.
pub fn servo_normalized(pulse: ServoPulse) -> f64 {
    ((pulse.width as f64 - PULSE_NEUTRAL as f64) / PULSE_HALF_SPAN).clamp(-1.0, 1.0)
}

/// Ground-contact wheel speeds for a command. The servos are mounted
/// mirrored, so a CW right servo and a CCW left servo both drive forward.
pub fn wheel_velocities(cmd: &ActuatorCommand, params: &SimParams) -> WheelVelocities {
    let rim_speed = params.wheel_radius * params.servo_max_speed;
    WheelVelocities {
        v_left: servo_normalized(cmd.left) * rim_speed,
        v_right: -servo_normalized(cmd.right) * rim_speed,
    }
}

/// Standard differential-drive kinematics.
pub fn body_twist(wheels: WheelVelocities, wheelbase: f64) -> BodyTwist {
    BodyTwist {
        linear: (wheels.v_left + wheels.v_right) / 2.0,
        angular: (wheels.v_right - wheels.v_left) / wheelbase,
    }
}

/// The fixed pulse pair for each maneuver.
pub fn named_command(maneuver: Maneuver, fan_on: bool) -> ActuatorCommand {
    let (left, right) = match maneuver {
        Maneuver::Forward => (PULSE_FULL_CCW, PULSE_FULL_CW),
        Maneuver::Reverse => (PULSE_FULL_CW, PULSE_FULL_CCW),
        Maneuver::SpinLeft => (PULSE_FULL_CW, PULSE_FULL_CW),
        Maneuver::SpinRight => (PULSE_FULL_CCW, PULSE_FULL_CCW),
        Maneuver::Stop => (PULSE_NEUTRAL, PULSE_NEUTRAL),
    };
    ActuatorCommand {
        left: ServoPulse::new(left),
        right: ServoPulse::new(right),
        fan_on,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn normalized_endpoints() {
        assert_eq!(servo_normalized(ServoPulse::new(1000)), -1.0);
        assert_eq!(servo_normalized(ServoPulse::new(3500)), 1.0);
        assert_eq!(servo_normalized(ServoPulse::new(2250)), 0.0);
    }

    #[test]
    fn forward_command_drives_both_wheels_forward() {
        let params = SimParams::default();
        let cmd = named_command(Maneuver::Forward, false);
        assert_eq!(cmd.left.width, 3500);
        assert_eq!(cmd.right.width, 1000);
        let w = wheel_velocities(&cmd, &params);
        let rim = params.wheel_radius * params.servo_max_speed;
        assert_relative_eq!(w.v_left, rim, max_relative = 1e-12);
        assert_relative_eq!(w.v_right, rim, max_relative = 1e-12);
    }

    #[test]
    fn neutral_command_stops() {
        let params = SimParams::default();
        let w = wheel_velocities(&named_command(Maneuver::Stop, false), &params);
        assert_eq!(w.v_left, 0.0);
        assert_eq!(w.v_right, 0.0);
    }

    #[test]
    fn reverse_mirrors_forward() {
        let params = SimParams::default();
        let fwd = wheel_velocities(&named_command(Maneuver::Forward, false), &params);
        let rev = wheel_velocities(&named_command(Maneuver::Reverse, false), &params);
        assert_eq!(rev.v_left, -fwd.v_left);
        assert_eq!(rev.v_right, -fwd.v_right);
    }

    #[test]
    fn twist_examples() {
        let t = body_twist(WheelVelocities { v_left: 0.2, v_right: 0.2 }, 0.10);
        assert_eq!(t.linear, 0.2);
        assert_eq!(t.angular, 0.0);

        let t = body_twist(WheelVelocities { v_left: -0.2, v_right: 0.2 }, 0.10);
        assert_eq!(t.linear, 0.0);
        assert!(t.angular > 0.0);

        let t = body_twist(WheelVelocities { v_left: 0.0, v_right: 0.2 }, 0.10);
        assert_relative_eq!(t.angular, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn straight_and_spin_commands_are_exact() {
        let params = SimParams::default();
        for m in [Maneuver::Forward, Maneuver::Reverse] {
            let t = body_twist(wheel_velocities(&named_command(m, false), &params), params.wheelbase);
            assert_eq!(t.angular, 0.0, "{m:?} must not turn");
        }
        for m in [Maneuver::SpinLeft, Maneuver::SpinRight] {
            let t = body_twist(wheel_velocities(&named_command(m, false), &params), params.wheelbase);
            assert_eq!(t.linear, 0.0, "{m:?} must not translate");
        }
        // Spin signs: left is CCW-positive.
        let left = body_twist(
            wheel_velocities(&named_command(Maneuver::SpinLeft, false), &params),
            params.wheelbase,
        );
        assert!(left.angular > 0.0);
        let right = body_twist(
            wheel_velocities(&named_command(Maneuver::SpinRight, false), &params),
            params.wheelbase,
        );
        assert!(right.angular < 0.0);
    }

    #[test]
    fn fan_passes_through() {
        assert!(named_command(Maneuver::Stop, true).fan_on);
        assert!(!named_command(Maneuver::Forward, false).fan_on);
    }

    proptest! {
        #[test]
        fn normalized_is_odd_around_neutral(k in 0u32..=1250) {
            let plus = servo_normalized(ServoPulse::new(2250 + k));
            let minus = servo_normalized(ServoPulse::new(2250 - k));
            prop_assert!((plus + minus).abs() < 1e-12);
        }

        #[test]
        fn normalized_saturates(w in 1u32..10_000) {
            let n = servo_normalized(ServoPulse::new(w));
            prop_assert!((-1.0..=1.0).contains(&n));
            if w <= 1000 {
                prop_assert_eq!(n, -1.0);
            }
            if w >= 3500 {
                prop_assert_eq!(n, 1.0);
            }
        }

        #[test]
        fn linear_speed_bounded(left in 1u32..10_000, right in 1u32..10_000, fan in any::<bool>()) {
            let params = SimParams::default();
            let cmd = ActuatorCommand {
                left: ServoPulse::new(left),
                right: ServoPulse::new(right),
                fan_on: fan,
            };
            let t = body_twist(wheel_velocities(&cmd, &params), params.wheelbase);
            let cap = params.wheel_radius * params.servo_max_speed;
            prop_assert!(t.linear.abs() <= cap + 1e-12);
        }
    }
}
