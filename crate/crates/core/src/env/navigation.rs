use serde::{Deserialize, Serialize};

use super::{Environment, Randomizable};
use crate::error::{Error, Result};
use crate::types::ControlLimits;

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl From<[f64; 4]> for Rect {
    fn from(r: [f64; 4]) -> Self {
        Self {
            x_min: r[0],
            y_min: r[1],
            x_max: r[2],
            y_max: r[3],
        }
    }
}

impl From<Rect> for [f64; 4] {
    fn from(r: Rect) -> Self {
        [r.x_min, r.y_min, r.x_max, r.y_max]
    }
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    fn lo(&self) -> [f64; 2] {
        [self.x_min, self.y_min]
    }

    fn hi(&self) -> [f64; 2] {
        [self.x_max, self.y_max]
    }

    pub fn inflate(&self, r: f64) -> Self {
        Self::new(self.x_min - r, self.y_min - r, self.x_max + r, self.y_max + r)
    }

    /// Euclidean distance from `p` to the rectangle; zero on or inside it.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        let dx = (self.x_min - p[0]).max(0.0).max(p[0] - self.x_max);
        let dy = (self.y_min - p[1]).max(0.0).max(p[1] - self.y_max);
        dx.hypot(dy)
    }

    /// Strict interior test; the boundary counts as free space.
    pub fn contains_open(&self, p: [f64; 2]) -> bool {
        p[0] > self.x_min && p[0] < self.x_max && p[1] > self.y_min && p[1] < self.y_max
    }

    /// Positive outside, zero on the boundary, negative inside.
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        if self.contains_open(p) {
            -(p[0] - self.x_min)
                .min(self.x_max - p[0])
                .min(p[1] - self.y_min)
                .min(self.y_max - p[1])
        } else {
            self.distance(p)
        }
    }

    fn is_valid(&self) -> bool {
        [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }
}

pub const LAYOUT_VERSION: u32 = 1;

/// Obstacle layout. Serialized as TOML:
///
/// ```toml
/// version = 1
/// workspace = [-2.0, -2.0, 2.0, 2.0]
/// start = [0.0, -0.2]
/// goal = [0.0, 1.5]
/// obstacles = [[-0.8, 0.25, 0.8, 0.4]]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NavigationLayout {
    pub version: u32,
    pub workspace: Rect,
    pub start: [f64; 2],
    pub goal: [f64; 2],
    #[serde(default)]
    pub obstacles: Vec<Rect>,
}

impl NavigationLayout {
    /// A U-shaped wall around the start whose closed side faces the goal and
    /// whose mouth opens away from it.
    pub fn u_trap() -> Self {
        Self {
            version: LAYOUT_VERSION,
            workspace: Rect::new(-2.0, -2.0, 2.0, 2.0),
            start: [0.0, -0.1],
            goal: [0.0, 0.8],
            obstacles: vec![
                Rect::new(-0.3, 0.0, 0.3, 0.15),
                Rect::new(-0.3, -0.1, -0.15, 0.0),
                Rect::new(0.15, -0.1, 0.3, 0.0),
            ],
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let layout: Self = toml::from_str(text).map_err(|e| Error::Layout(e.to_string()))?;
        if layout.version != LAYOUT_VERSION {
            return Err(Error::Layout(format!(
                "unsupported layout version {} (expected {LAYOUT_VERSION})",
                layout.version
            )));
        }
        Ok(layout)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("layout serializes")
    }

    /// Distance from `p` to the closest obstacle or workspace edge.
    pub fn wall_distance(&self, p: [f64; 2]) -> f64 {
        let ws = &self.workspace;
        let edge = (p[0] - ws.x_min)
            .min(ws.x_max - p[0])
            .min(p[1] - ws.y_min)
            .min(ws.y_max - p[1])
            .max(0.0);
        self.obstacles.iter().map(|r| r.distance(p)).fold(edge, f64::min)
    }

    fn check_free(&self, p: [f64; 2], radius: f64, what: &str) -> Result<()> {
        let ws = self.workspace.inflate(-radius);
        if !(p[0] >= ws.x_min && p[0] <= ws.x_max && p[1] >= ws.y_min && p[1] <= ws.y_max) {
            return Err(Error::Layout(format!("{what} {p:?} lies outside the workspace")));
        }
        if let Some(r) = self.obstacles.iter().find(|r| r.inflate(radius).contains_open(p)) {
            return Err(Error::Layout(format!("{what} {p:?} lies inside obstacle {r:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavigationParams {
    /// Weight of the wall-proximity term.
    pub alpha_wall: f64,
    /// Weight of the squared goal distance.
    pub alpha_goal: f64,
    /// Weight of the squared control norm.
    pub alpha_control: f64,
    /// Decay rate of the wall term per unit distance.
    pub wall_sharpness: f64,
    /// Terminal cost is `terminal_weight * alpha_goal * |x_T - goal|^2`.
    pub terminal_weight: f64,
    pub dt: f64,
    pub actuation_gain: f64,
    pub agent_radius: f64,
    pub success_radius: f64,
    pub max_speed: f64,
}

impl Default for NavigationParams {
    fn default() -> Self {
        Self {
            alpha_wall: 1.0,
            alpha_goal: 1.0,
            alpha_control: 0.01,
            wall_sharpness: 10.0,
            terminal_weight: 10.0,
            dt: 0.05,
            actuation_gain: 1.0,
            agent_radius: 0.05,
            success_radius: 0.1,
            max_speed: 1.0,
        }
    }
}

/// Planar point mass under axis-aligned velocity control.
///
/// State is `(x, y, vx, vy)` where the velocity is the displacement actually
/// achieved over the last step divided by `dt`. Motion stops at the first
/// contact with an obstacle (inflated by the agent radius) or the workspace edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Navigation {
    layout: NavigationLayout,
    params: NavigationParams,
    limits: ControlLimits,
    inflated: Vec<Rect>,
}

impl Navigation {
    pub fn new(layout: NavigationLayout, params: NavigationParams) -> Result<Self> {
        if !(params.dt > 0.0) {
            return Err(Error::Config("navigation dt must be positive".into()));
        }
        if !(params.agent_radius >= 0.0) || !(params.success_radius > 0.0) {
            return Err(Error::Config("radii must be non-negative".into()));
        }
        if !layout.workspace.is_valid() || layout.obstacles.iter().any(|r| !r.is_valid()) {
            return Err(Error::Layout("rectangles need x_min < x_max and y_min < y_max".into()));
        }
        layout.check_free(layout.goal, params.agent_radius, "goal")?;
        layout.check_free(layout.start, params.agent_radius, "start")?;
        let limits = ControlLimits::symmetric(2, params.max_speed)?;
        let inflated = layout
            .obstacles
            .iter()
            .map(|r| r.inflate(params.agent_radius))
            .collect();
        Ok(Self {
            layout,
            params,
            limits,
            inflated,
        })
    }

    pub fn layout(&self) -> &NavigationLayout {
        &self.layout
    }

    pub fn params(&self) -> &NavigationParams {
        &self.params
    }

    /// Copy with a different start position (must be free space).
    pub fn with_start(&self, start: [f64; 2]) -> Result<Self> {
        let mut layout = self.layout.clone();
        layout.start = start;
        Self::new(layout, self.params)
    }

    pub fn wall_distance(&self, p: [f64; 2]) -> f64 {
        self.layout.wall_distance(p)
    }

    /// Signed clearance of the agent disc: distance to the nearest inflated
    /// obstacle, negative when overlapping.
    pub fn clearance(&self, p: [f64; 2]) -> f64 {
        self.inflated
            .iter()
            .map(|r| r.signed_distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Moves from `p` by `delta`, stopping at the first contact.
    pub fn advance(&self, p: [f64; 2], delta: [f64; 2]) -> [f64; 2] {
        // (fraction of the segment, axis to snap, face coordinate)
        let mut stop = (1.0_f64, None::<(usize, f64)>);
        let ws = self.layout.workspace.inflate(-self.params.agent_radius);
        for a in 0..2 {
            let (lo, hi) = (ws.lo()[a], ws.hi()[a]);
            if delta[a] > 0.0 && p[a] + delta[a] > hi {
                let tau = ((hi - p[a]) / delta[a]).max(0.0);
                if tau < stop.0 {
                    stop = (tau, Some((a, hi)));
                }
            } else if delta[a] < 0.0 && p[a] + delta[a] < lo {
                let tau = ((lo - p[a]) / delta[a]).max(0.0);
                if tau < stop.0 {
                    stop = (tau, Some((a, lo)));
                }
            }
        }
        for rect in &self.inflated {
            if let Some((tau, axis, face)) = segment_entry(rect, p, delta) {
                if tau < stop.0 {
                    stop = (tau, Some((axis, face)));
                }
            }
        }
        let (tau, snap) = stop;
        let mut out = [p[0] + tau * delta[0], p[1] + tau * delta[1]];
        if let Some((axis, face)) = snap {
            out[axis] = face;
        }
        out
    }
}

/// First entry of the segment `p + s * delta`, `s in [0, 1]`, into the open
/// interior of `rect`: `(s, entering axis, face coordinate)`.
fn segment_entry(rect: &Rect, p: [f64; 2], delta: [f64; 2]) -> Option<(f64, usize, f64)> {
    let (lo, hi) = (rect.lo(), rect.hi());
    let mut enter = f64::NEG_INFINITY;
    let mut exit = f64::INFINITY;
    let mut axis = 0;
    let mut face = 0.0;
    for a in 0..2 {
        if delta[a] == 0.0 {
            if p[a] <= lo[a] || p[a] >= hi[a] {
                return None;
            }
            continue;
        }
        let (t_lo, t_hi) = ((lo[a] - p[a]) / delta[a], (hi[a] - p[a]) / delta[a]);
        let (near, far, near_face) = if t_lo < t_hi {
            (t_lo, t_hi, lo[a])
        } else {
            (t_hi, t_lo, hi[a])
        };
        if near > enter {
            enter = near;
            axis = a;
            face = near_face;
        }
        exit = exit.min(far);
    }
    if enter < exit && exit > 0.0 && enter < 1.0 {
        Some((enter.max(0.0), axis, face))
    } else {
        None
    }
}

impl Environment for Navigation {
    fn state_dim(&self) -> usize {
        4
    }

    fn control_dim(&self) -> usize {
        2
    }

    fn control_limits(&self) -> &ControlLimits {
        &self.limits
    }

    fn dt(&self) -> f64 {
        self.params.dt
    }

    fn step(&self, state: &[f64], control: &[f64], next: &mut [f64]) {
        let scale = self.params.actuation_gain * self.params.dt;
        let p = [state[0], state[1]];
        let q = self.advance(p, [control[0] * scale, control[1] * scale]);
        next[0] = q[0];
        next[1] = q[1];
        next[2] = (q[0] - p[0]) / self.params.dt;
        next[3] = (q[1] - p[1]) / self.params.dt;
    }

    fn running_cost(&self, state: &[f64], control: &[f64]) -> f64 {
        let p = [state[0], state[1]];
        let g = self.layout.goal;
        let pr = &self.params;
        pr.alpha_wall * (-pr.wall_sharpness * self.wall_distance(p)).exp()
            + pr.alpha_goal * ((p[0] - g[0]).powi(2) + (p[1] - g[1]).powi(2))
            + pr.alpha_control * (control[0] * control[0] + control[1] * control[1])
    }

    fn terminal_cost(&self, state: &[f64]) -> f64 {
        let g = self.layout.goal;
        self.params.terminal_weight * self.params.alpha_goal * ((state[0] - g[0]).powi(2) + (state[1] - g[1]).powi(2))
    }

    fn is_success(&self, state: &[f64]) -> bool {
        let g = self.layout.goal;
        (state[0] - g[0]).hypot(state[1] - g[1]) < self.params.success_radius
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![self.layout.start[0], self.layout.start[1], 0.0, 0.0]
    }
}

impl Randomizable for Navigation {
    fn parameter(&self, name: &str) -> Option<f64> {
        match name {
            "actuation_gain" => Some(self.params.actuation_gain),
            "dt" => Some(self.params.dt),
            "wall_sharpness" => Some(self.params.wall_sharpness),
            _ => None,
        }
    }

    fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let mut params = self.params;
        match name {
            "actuation_gain" if value > 0.0 => params.actuation_gain = value,
            "dt" if value > 0.0 => params.dt = value,
            "wall_sharpness" if value >= 0.0 => params.wall_sharpness = value,
            "actuation_gain" | "dt" | "wall_sharpness" => {
                return Err(Error::Environment(format!("{name}={value} is not physical")))
            }
            _ => return Err(Error::Config(format!("unknown parameter `{name}`"))),
        }
        Self::new(self.layout.clone(), params)
    }
}
