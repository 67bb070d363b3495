//! World geometry: arena walls, fire sources, poses, ray casting and
//! line-of-sight tests. Everything here is immutable value data; the
//! operations are pure functions over it.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::controller::ControllerConfig;
use crate::error::ScenarioError;
use crate::sensors::SensorTables;

/// 2D point/vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product; sign tells winding.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn from_angle(theta: f64) -> Vec2 {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

/// Normalize an angle into `[-PI, PI)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a >= PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    // The remainder above can land exactly on PI for inputs like -PI.
    if a >= PI {
        a = -PI;
    }
    a
}

/// Robot pose: position plus heading (radians, CCW from +x, kept in `[-PI, PI)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec2,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose {
            position: Vec2::new(x, y),
            heading: normalize_angle(heading),
        }
    }

    /// Unit vector along the heading.
    pub fn heading_vec(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }
}

/// A wall: line segment with an optional free-form tag. The tag is carried
/// through load/save and traces but is never read by any physics code.
#[derive(Debug, Clone, PartialEq)]
pub struct WallSegment {
    pub a: Vec2,
    pub b: Vec2,
    pub tag: Option<String>,
}

impl WallSegment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        WallSegment { a, b, tag: None }
    }

    pub fn with_tag(a: Vec2, b: Vec2, tag: impl Into<String>) -> Self {
        WallSegment {
            a,
            b,
            tag: Some(tag.into()),
        }
    }
}

/// A point fire source. `intensity` decays toward zero under the fan;
/// zero intensity means extinguished (emits no light).
#[derive(Debug, Clone, PartialEq)]
pub struct FireSource {
    pub position: Vec2,
    pub intensity: f64,
    pub initial_intensity: f64,
}

impl FireSource {
    pub fn new(x: f64, y: f64, intensity: f64) -> Self {
        FireSource {
            position: Vec2::new(x, y),
            intensity,
            initial_intensity: intensity,
        }
    }

    pub fn is_burning(&self) -> bool {
        self.intensity > 0.0
    }
}

/// Physical and timing parameters of the simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    /// Speed of sound used for echo timing (m/s).
    pub sound_speed: f64,
    /// Ultrasonic ceiling: echoes beyond this range time out (m).
    pub ping_max_range: f64,
    /// Control tick length (s).
    pub dt: f64,
    /// Body radius for wall clearance (m).
    pub robot_radius: f64,
    /// Drive wheel radius (m).
    pub wheel_radius: f64,
    /// Distance between wheel contact points (m).
    pub wheelbase: f64,
    /// Continuous servo speed at full command (rad/s).
    pub servo_max_speed: f64,
    /// Fan reach (m).
    pub fan_range: f64,
    /// Fan cone half-angle (rad).
    pub fan_half_angle: f64,
    /// Fire intensity removed per second of fanning.
    pub extinguish_rate: f64,
    /// Comparator reference voltage (V).
    pub v_ref: f64,
    /// LDR divider voltage with no light at all (V).
    pub ldr_dark_voltage: f64,
    /// LDR angular acceptance half-angle (rad).
    pub ldr_half_angle: f64,
    /// Ultrasonic beam half-angle; rays cast at 0 and +/- this (rad).
    pub ping_beam_half_angle: f64,
    /// Radius of the candle body as an ultrasonic echo target (m).
    pub fire_echo_radius: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            sound_speed: 340.0,
            ping_max_range: 3.0,
            dt: 0.02,
            robot_radius: 0.09,
            wheel_radius: 0.033,
            wheelbase: 0.10,
            servo_max_speed: 2.0 * PI,
            fan_range: 0.4,
            fan_half_angle: 20.0_f64.to_radians(),
            extinguish_rate: 1.0,
            v_ref: 1.47,
            ldr_dark_voltage: 4.0,
            ldr_half_angle: 60.0_f64.to_radians(),
            ping_beam_half_angle: 15.0_f64.to_radians(),
            fire_echo_radius: 0.02,
        }
    }
}

impl SimParams {
    fn validate(&self) -> Result<(), ScenarioError> {
        let positive = [
            ("sound_speed", self.sound_speed),
            ("ping_max_range", self.ping_max_range),
            ("dt", self.dt),
            ("robot_radius", self.robot_radius),
            ("wheel_radius", self.wheel_radius),
            ("wheelbase", self.wheelbase),
            ("servo_max_speed", self.servo_max_speed),
            ("fan_range", self.fan_range),
            ("fan_half_angle", self.fan_half_angle),
            ("extinguish_rate", self.extinguish_rate),
            ("v_ref", self.v_ref),
            ("ldr_dark_voltage", self.ldr_dark_voltage),
            ("ldr_half_angle", self.ldr_half_angle),
            ("ping_beam_half_angle", self.ping_beam_half_angle),
            ("fire_echo_radius", self.fire_echo_radius),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ScenarioError::invalid(
                    format!("params.{name}"),
                    "must be a finite positive number",
                ));
            }
        }
        if self.dt > 0.1 {
            return Err(ScenarioError::invalid("params.dt", "must be <= 0.1 s"));
        }
        Ok(())
    }
}

/// A complete, validated episode description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub walls: Vec<WallSegment>,
    pub fires: Vec<FireSource>,
    pub robot_start: Pose,
    pub params: SimParams,
    pub controller: ControllerConfig,
    pub tables: SensorTables,
    pub seed: u64,
    pub duration_s: f64,
}

/// Smallest nonnegative distance along the ray `origin + t*direction`
/// to any wall segment, or `None` if nothing is hit within `max_range`.
///
/// `direction` must be a unit vector. Rays parallel to a wall (including
/// collinear) do not intersect it: an edge-on segment is infinitely thin.
pub fn raycast(
    origin: Vec2,
    direction: Vec2,
    walls: &[WallSegment],
    max_range: f64,
) -> Option<f64> {
    let mut best: Option<f64> = None;
    for wall in walls {
        if let Some(t) = ray_segment(origin, direction, wall.a, wall.b) {
            if t <= max_range && best.map_or(true, |b| t < b) {
                best = Some(t);
            }
        }
    }
    best
}

/// Parametric ray/segment intersection. Returns the ray parameter `t >= 0`.
fn ray_segment(origin: Vec2, direction: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let seg = b - a;
    let denom = direction.cross(seg);
    if denom == 0.0 {
        return None;
    }
    let to_a = a - origin;
    let t = to_a.cross(seg) / denom;
    let u = to_a.cross(direction) / denom;
    if t >= 0.0 && (0.0..=1.0).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Smallest nonnegative distance along the ray to a circle boundary.
/// A ray starting inside the circle hits the boundary on the way out.
pub fn ray_circle(origin: Vec2, direction: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let oc = origin - center;
    // |oc + t d|^2 = r^2 with |d| = 1.
    let b = oc.dot(direction);
    let c = oc.dot(oc) - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sqrt_disc = disc.sqrt();
    let t_near = -b - sqrt_disc;
    let t_far = -b + sqrt_disc;
    if t_near >= 0.0 {
        Some(t_near)
    } else if t_far >= 0.0 {
        Some(t_far)
    } else {
        None
    }
}

/// True iff the open segment a->b crosses no wall. Coincident endpoints
/// trivially see each other.
pub fn line_of_sight(a: Vec2, b: Vec2, walls: &[WallSegment]) -> bool {
    let delta = b - a;
    let len = delta.length();
    if len == 0.0 {
        return true;
    }
    let dir = delta * (1.0 / len);
    for wall in walls {
        if let Some(t) = ray_segment(a, dir, wall.a, wall.b) {
            if t > 0.0 && t < len {
                return false;
            }
        }
    }
    true
}

/// Distance from a point to a line segment.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let seg = b - a;
    let len2 = seg.dot(seg);
    if len2 == 0.0 {
        return (p - a).length();
    }
    let t = ((p - a).dot(seg) / len2).clamp(0.0, 1.0);
    (p - (a + seg * t)).length()
}

/// Minimum distance from a point to any wall; +inf with no walls.
pub fn wall_clearance(p: Vec2, walls: &[WallSegment]) -> f64 {
    walls
        .iter()
        .map(|w| point_segment_distance(p, w.a, w.b))
        .fold(f64::INFINITY, f64::min)
}

// ---------------------------------------------------------------------------
// Scenario document (JSON)
// ---------------------------------------------------------------------------

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    walls: Vec<WallDoc>,
    fires: Vec<FireDoc>,
    robot: RobotDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<SimParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    controller: Option<ControllerDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tables: Option<TablesDoc>,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_duration")]
    duration_s: f64,
}

fn default_duration() -> f64 {
    60.0
}

#[derive(Deserialize, Serialize)]
#[serde(untagged)]
enum WallDoc {
    Bare([f64; 4]),
    Tagged {
        segment: [f64; 4],
        tag: String,
    },
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct FireDoc {
    x: f64,
    y: f64,
    intensity: f64,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RobotDoc {
    x: f64,
    y: f64,
    heading_deg: f64,
}

/// Controller overrides; any field left out keeps its default.
#[derive(Deserialize, Serialize, Default)]
#[serde(default, deny_unknown_fields)]
struct ControllerDoc {
    front_clear: Option<f64>,
    side_clear: Option<f64>,
    extinguish_distance: Option<f64>,
    scan_budget_ticks: Option<u32>,
    extinguish_confirm_ticks: Option<u32>,
    wander_jitter: Option<bool>,
}

#[derive(Deserialize, Serialize, Default)]
#[serde(default, deny_unknown_fields)]
struct TablesDoc {
    front: Option<Vec<(f64, f64)>>,
    right: Option<Vec<(f64, f64)>>,
    left: Option<Vec<(f64, f64)>>,
    ldr: Option<Vec<(f64, f64)>>,
}

impl Scenario {
    /// Parse and fully validate a scenario document.
    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let doc: ScenarioDoc = serde_json::from_str(text)?;

        let mut walls = Vec::with_capacity(doc.walls.len());
        for (i, w) in doc.walls.iter().enumerate() {
            let ([x1, y1, x2, y2], tag) = match w {
                WallDoc::Bare(coords) => (*coords, None),
                WallDoc::Tagged { segment, tag } => (*segment, Some(tag.clone())),
            };
            let a = Vec2::new(x1, y1);
            let b = Vec2::new(x2, y2);
            if !a.is_finite() || !b.is_finite() {
                return Err(ScenarioError::invalid(
                    format!("walls[{i}]"),
                    "coordinates must be finite",
                ));
            }
            if a == b {
                return Err(ScenarioError::invalid(
                    format!("walls[{i}]"),
                    "zero-length wall",
                ));
            }
            walls.push(WallSegment { a, b, tag });
        }

        let mut fires = Vec::with_capacity(doc.fires.len());
        for (i, f) in doc.fires.iter().enumerate() {
            if !f.x.is_finite() || !f.y.is_finite() {
                return Err(ScenarioError::invalid(
                    format!("fires[{i}]"),
                    "position must be finite",
                ));
            }
            if !(f.intensity > 0.0) || !f.intensity.is_finite() {
                return Err(ScenarioError::invalid(
                    format!("fires[{i}].intensity"),
                    "must be a finite positive number",
                ));
            }
            fires.push(FireSource::new(f.x, f.y, f.intensity));
        }

        let params = doc.params.unwrap_or_default();
        params.validate()?;

        let mut controller = ControllerConfig::defaults_for(&params);
        if let Some(c) = &doc.controller {
            controller.apply_overrides(
                c.front_clear,
                c.side_clear,
                c.extinguish_distance,
                c.scan_budget_ticks,
                c.extinguish_confirm_ticks,
                c.wander_jitter,
            );
        }
        controller.validate().map_err(|(field, msg)| {
            ScenarioError::invalid(format!("controller.{field}"), msg)
        })?;

        let mut tables = SensorTables::default();
        if let Some(t) = doc.tables {
            for (name, knots, slot) in [
                ("front", t.front, &mut tables.front),
                ("right", t.right, &mut tables.right),
                ("left", t.left, &mut tables.left),
                ("ldr", t.ldr, &mut tables.ldr),
            ] {
                if let Some(knots) = knots {
                    *slot = crate::sensors::CalibrationTable::new(knots).map_err(|e| {
                        ScenarioError::invalid(format!("tables.{name}"), e.to_string())
                    })?;
                }
            }
        }

        if !doc.robot.x.is_finite() || !doc.robot.y.is_finite() || !doc.robot.heading_deg.is_finite()
        {
            return Err(ScenarioError::invalid("robot", "fields must be finite"));
        }
        let robot_start = Pose::new(doc.robot.x, doc.robot.y, doc.robot.heading_deg.to_radians());
        if wall_clearance(robot_start.position, &walls) < params.robot_radius {
            return Err(ScenarioError::invalid(
                "robot",
                "start pose is inside a wall (clearance below robot_radius)",
            ));
        }

        if !(doc.duration_s > 0.0) || !doc.duration_s.is_finite() {
            return Err(ScenarioError::invalid(
                "duration_s",
                "must be a finite positive number",
            ));
        }

        Ok(Scenario {
            walls,
            fires,
            robot_start,
            params,
            controller,
            tables,
            seed: doc.seed,
            duration_s: doc.duration_s,
        })
    }

    /// Serialize back to the scenario document format. `from_json` of the
    /// result reproduces an equivalent scenario.
    pub fn to_json(&self) -> String {
        let doc = ScenarioDoc {
            walls: self
                .walls
                .iter()
                .map(|w| match &w.tag {
                    None => WallDoc::Bare([w.a.x, w.a.y, w.b.x, w.b.y]),
                    Some(tag) => WallDoc::Tagged {
                        segment: [w.a.x, w.a.y, w.b.x, w.b.y],
                        tag: tag.clone(),
                    },
                })
                .collect(),
            fires: self
                .fires
                .iter()
                .map(|f| FireDoc {
                    x: f.position.x,
                    y: f.position.y,
                    intensity: f.intensity,
                })
                .collect(),
            robot: RobotDoc {
                x: self.robot_start.position.x,
                y: self.robot_start.position.y,
                heading_deg: self.robot_start.heading.to_degrees(),
            },
            params: Some(self.params.clone()),
            controller: Some(ControllerDoc {
                front_clear: Some(self.controller.front_clear),
                side_clear: Some(self.controller.side_clear),
                extinguish_distance: Some(self.controller.extinguish_distance),
                scan_budget_ticks: Some(self.controller.scan_budget_ticks),
                extinguish_confirm_ticks: Some(self.controller.extinguish_confirm_ticks),
                wander_jitter: Some(self.controller.wander_jitter),
            }),
            tables: Some(TablesDoc {
                front: Some(self.tables.front.knots().to_vec()),
                right: Some(self.tables.right.knots().to_vec()),
                left: Some(self.tables.left.knots().to_vec()),
                ldr: Some(self.tables.ldr.knots().to_vec()),
            }),
            seed: self.seed,
            duration_s: self.duration_s,
        };
        serde_json::to_string_pretty(&doc).expect("scenario serialization cannot fail")
    }
}

/// Load a scenario from a document string.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    Scenario::from_json(text)
}
