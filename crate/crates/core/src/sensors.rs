//! Sensor models: the three ultrasonic rangefinders (echo timing plus a
//! measured distance-to-voltage calibration curve per sensor) and the
//! LDR + comparator light channel.
//!
//! All functions here are pure: a sensor output depends only on geometry
//! and parameters, never on wall tags or history.

use std::f64::consts::FRAC_PI_2;

use crate::error::{FitError, TableError};
use crate::world::{line_of_sight, normalize_angle, ray_circle, raycast, FireSource, Pose, SimParams, Vec2, WallSegment};

/// Comparator analog output when the LDR voltage is below the reference
/// (flame detected, indicator LED off).
pub const COMPARATOR_LOW_V: f64 = 0.12;
/// Comparator analog output when the LDR voltage is at/above the reference.
pub const COMPARATOR_HIGH_V: f64 = 3.50;

/// Ultrasonic ceiling expressed in the calibration tables' unit.
pub const PING_MAX_CM: f64 = 300.0;

/// Ordered (distance cm, volts) knots. Distances strictly increase and
/// voltages never decrease; both measured curves behave that way.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTable {
    knots: Vec<(f64, f64)>,
}

impl CalibrationTable {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, TableError> {
        if knots.is_empty() {
            return Err(TableError::Empty);
        }
        for (i, &(d, v)) in knots.iter().enumerate() {
            if !d.is_finite() || !v.is_finite() {
                return Err(TableError::Row {
                    row: i,
                    message: "non-finite value".to_string(),
                });
            }
            if i > 0 {
                if d <= knots[i - 1].0 {
                    return Err(TableError::NonIncreasingDistance { row: i });
                }
                if v < knots[i - 1].1 {
                    return Err(TableError::DecreasingVoltage { row: i });
                }
            }
        }
        Ok(CalibrationTable { knots })
    }

    /// Parse the CSV form: a `distance_cm,volts` header then one knot per row.
    pub fn from_csv(text: &str) -> Result<Self, TableError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "distance_cm,volts" => {}
            Some((_, header)) => {
                return Err(TableError::Row {
                    row: 0,
                    message: format!("expected header 'distance_cm,volts', got {header:?}"),
                })
            }
            None => return Err(TableError::Empty),
        }
        let mut knots = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64, TableError> {
                s.and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or(TableError::Row {
                        row: i,
                        message: format!("malformed row {line:?}"),
                    })
            };
            let d = parse(fields.next())?;
            let v = parse(fields.next())?;
            if fields.next().is_some() {
                return Err(TableError::Row {
                    row: i,
                    message: "too many fields".to_string(),
                });
            }
            knots.push((d, v));
        }
        CalibrationTable::new(knots)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// First and last knot distances (cm).
    pub fn span(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    /// Front ultrasonic sensor, as measured.
    pub fn ping_front() -> Self {
        CalibrationTable::new(vec![
            (10.0, 0.14),
            (20.0, 0.16),
            (30.0, 0.18),
            (40.0, 0.20),
            (50.0, 0.23),
            (80.0, 0.30),
            (100.0, 0.34),
            (200.0, 0.62),
        ])
        .expect("builtin table is valid")
    }

    /// Right ultrasonic sensor, as measured.
    pub fn ping_right() -> Self {
        CalibrationTable::new(vec![
            (10.0, 0.15),
            (20.0, 0.18),
            (30.0, 0.19),
            (40.0, 0.21),
            (50.0, 0.24),
            (80.0, 0.30),
            (100.0, 0.36),
            (200.0, 0.61),
        ])
        .expect("builtin table is valid")
    }

    /// Left ultrasonic sensor, as measured.
    pub fn ping_left() -> Self {
        CalibrationTable::new(vec![
            (10.0, 0.16),
            (20.0, 0.19),
            (30.0, 0.20),
            (40.0, 0.22),
            (50.0, 0.24),
            (80.0, 0.30),
            (100.0, 0.36),
            (200.0, 0.58),
        ])
        .expect("builtin table is valid")
    }

    /// LDR divider voltage vs. distance to a full candle flame.
    pub fn ldr() -> Self {
        CalibrationTable::new(vec![
            (10.0, 0.85),
            (20.0, 1.43),
            (30.0, 1.98),
            (40.0, 2.41),
            (50.0, 2.66),
            (80.0, 3.26),
            (100.0, 3.43),
        ])
        .expect("builtin table is valid")
    }

    /// Look up a builtin table by its CLI name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "ping_front" => Some(Self::ping_front()),
            "ping_right" => Some(Self::ping_right()),
            "ping_left" => Some(Self::ping_left()),
            "ldr" => Some(Self::ldr()),
            _ => None,
        }
    }
}

/// The four calibration curves one robot carries.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTables {
    pub front: CalibrationTable,
    pub right: CalibrationTable,
    pub left: CalibrationTable,
    pub ldr: CalibrationTable,
}

impl Default for SensorTables {
    fn default() -> Self {
        SensorTables {
            front: CalibrationTable::ping_front(),
            right: CalibrationTable::ping_right(),
            left: CalibrationTable::ping_left(),
            ldr: CalibrationTable::ldr(),
        }
    }
}

/// Which of the three rangefinders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorId {
    Front,
    Right,
    Left,
}

/// A rangefinder's fixed mounting bearing relative to the robot heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorMount {
    pub id: SensorId,
    pub bearing: f64,
}

impl SensorMount {
    pub fn front() -> Self {
        SensorMount { id: SensorId::Front, bearing: 0.0 }
    }

    pub fn right() -> Self {
        SensorMount { id: SensorId::Right, bearing: -FRAC_PI_2 }
    }

    pub fn left() -> Self {
        SensorMount { id: SensorId::Left, bearing: FRAC_PI_2 }
    }
}

/// One rangefinder sample. `distance_cm`/`echo_time_us` are absent on
/// timeout (nothing within range); `voltage` is always defined, pinned to
/// the 300 cm calibration point on timeout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PingReading {
    pub distance_cm: Option<f64>,
    pub echo_time_us: Option<f64>,
    pub voltage: f64,
}

/// One light-channel sample. `comparator_low == true` means flame detected
/// (indicator LED off).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightReading {
    pub v_ldr: f64,
    pub comparator_low: bool,
    pub v_out: f64,
}

/// Everything the controller sees in one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorFrame {
    pub front: PingReading,
    pub right: PingReading,
    pub left: PingReading,
    pub light: LightReading,
    pub tick: u64,
}

/// Piecewise-linear interpolation through the table knots. Below the first
/// knot the first segment is extended (clamped at 0 V); above the last knot
/// the last segment is extended. A single-knot table is constant.
pub fn interp(table: &CalibrationTable, distance_cm: f64) -> f64 {
    let knots = table.knots();
    let n = knots.len();
    if n == 1 {
        return knots[0].1;
    }
    let seg = if distance_cm <= knots[0].0 {
        (knots[0], knots[1])
    } else if distance_cm >= knots[n - 1].0 {
        (knots[n - 2], knots[n - 1])
    } else {
        let hi = knots.partition_point(|&(d, _)| d < distance_cm);
        (knots[hi - 1], knots[hi])
    };
    let ((d0, v0), (d1, v1)) = seg;
    let slope = (v1 - v0) / (d1 - d0);
    let v = v0 + slope * (distance_cm - d0);
    if distance_cm < knots[0].0 {
        v.max(0.0)
    } else {
        v
    }
}

/// Ordinary least-squares line through the knots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    /// V per cm.
    pub slope: f64,
    /// V at 0 cm.
    pub intercept: f64,
    /// Largest |fit - knot| over the table (V).
    pub max_residual: f64,
}

pub fn fit_line(table: &CalibrationTable) -> Result<LineFit, FitError> {
    let knots = table.knots();
    if knots.len() < 2 {
        return Err(FitError::TooFewKnots);
    }
    let n = knots.len() as f64;
    let mean_d = knots.iter().map(|k| k.0).sum::<f64>() / n;
    let mean_v = knots.iter().map(|k| k.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(d, v) in knots {
        sxx += (d - mean_d) * (d - mean_d);
        sxy += (d - mean_d) * (v - mean_v);
    }
    if sxx == 0.0 {
        return Err(FitError::DegenerateDistances);
    }
    let slope = sxy / sxx;
    let intercept = mean_v - slope * mean_d;
    let max_residual = knots
        .iter()
        .map(|&(d, v)| (v - (slope * d + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(LineFit { slope, intercept, max_residual })
}

/// Round-trip echo time for a target at `distance_cm`, in microseconds.
pub fn echo_time_us(distance_cm: f64, sound_speed: f64) -> f64 {
    2.0 * (distance_cm / 100.0) / sound_speed * 1e6
}

/// Simulate one rangefinder sample: three rays across the beam
/// (bearing - beta, bearing, bearing + beta), nearest hit wins. Walls and
/// candle bodies both echo; flames themselves do not.
pub fn ping_measure(
    pose: &Pose,
    mount: SensorMount,
    walls: &[WallSegment],
    fires: &[FireSource],
    params: &SimParams,
    table: &CalibrationTable,
) -> PingReading {
    let beta = params.ping_beam_half_angle;
    let mut best: Option<f64> = None;
    for offset in [-beta, 0.0, beta] {
        let dir = Vec2::from_angle(pose.heading + mount.bearing + offset);
        if let Some(t) = raycast(pose.position, dir, walls, params.ping_max_range) {
            if best.map_or(true, |b| t < b) {
                best = Some(t);
            }
        }
        for fire in fires {
            if let Some(t) =
                ray_circle(pose.position, dir, fire.position, params.fire_echo_radius)
            {
                if t <= params.ping_max_range && best.map_or(true, |b| t < b) {
                    best = Some(t);
                }
            }
        }
    }
    match best {
        Some(meters) => {
            let cm = meters * 100.0;
            PingReading {
                distance_cm: Some(cm),
                echo_time_us: Some(echo_time_us(cm, params.sound_speed)),
                voltage: interp(table, cm),
            }
        }
        None => PingReading {
            distance_cm: None,
            echo_time_us: None,
            voltage: interp(table, PING_MAX_CM),
        },
    }
}

/// LDR divider voltage given the burning fires the robot can see.
///
/// A fire qualifies if it is burning, within the angular acceptance of the
/// forward-facing LDR, and not occluded. Each qualifying fire contributes a
/// candidate voltage from the calibration curve, pushed toward the dark
/// voltage as the fire dims; the brightest (lowest-voltage) candidate wins.
pub fn ldr_voltage(
    pose: &Pose,
    fires: &[FireSource],
    walls: &[WallSegment],
    params: &SimParams,
    table: &CalibrationTable,
) -> f64 {
    let mut best = params.ldr_dark_voltage;
    for fire in fires {
        if !fire.is_burning() {
            continue;
        }
        let to_fire = fire.position - pose.position;
        let dist = to_fire.length();
        if dist > 0.0 {
            let bearing = normalize_angle(to_fire.y.atan2(to_fire.x) - pose.heading);
            if bearing.abs() > params.ldr_half_angle {
                continue;
            }
        }
        if !line_of_sight(pose.position, fire.position, walls) {
            continue;
        }
        let base = interp(table, dist * 100.0);
        let dim_fraction = 1.0 - fire.intensity / fire.initial_intensity;
        let candidate = base + dim_fraction * (params.ldr_dark_voltage - base);
        if candidate < best {
            best = candidate;
        }
    }
    best
}

/// Ideal comparator: strictly below the reference reads low (flame seen).
pub fn comparator(v_ldr: f64, v_ref: f64) -> LightReading {
    let low = v_ldr < v_ref;
    LightReading {
        v_ldr,
        comparator_low: low,
        v_out: if low { COMPARATOR_LOW_V } else { COMPARATOR_HIGH_V },
    }
}

/// Compose the full per-tick sensor frame.
pub fn sense(
    pose: &Pose,
    fires: &[FireSource],
    walls: &[WallSegment],
    params: &SimParams,
    tables: &SensorTables,
    tick: u64,
) -> SensorFrame {
    SensorFrame {
        front: ping_measure(pose, SensorMount::front(), walls, fires, params, &tables.front),
        right: ping_measure(pose, SensorMount::right(), walls, fires, params, &tables.right),
        left: ping_measure(pose, SensorMount::left(), walls, fires, params, &tables.left),
        light: comparator(ldr_voltage(pose, fires, walls, params, &tables.ldr), params.v_ref),
        tick,
    }
}
