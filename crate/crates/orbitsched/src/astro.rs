//! Circular two-body orbit propagation and access geometry.
//!
//! The Earth is modeled as a rotating sphere and the spacecraft as a point on
//! a circular orbit, which keeps every quantity here verifiable by closed
//! form: elevation of the satellite above a ground site, off-nadir angle to
//! an imaging target, and single-axis slew feasibility between pointing
//! vectors. Positions are Earth-centered inertial, kilometers; times are
//! seconds from the scenario epoch, at which the prime meridian is aligned
//! with the inertial x-axis.

use serde::{Deserialize, Serialize};

/// Gravitational parameter of Earth, km^3/s^2.
pub const MU_EARTH_KM3_S2: f64 = 398_600.4418;
/// Mean equatorial radius of Earth, km.
pub const EARTH_RADIUS_KM: f64 = 6378.137;
/// Earth rotation rate, rad/s.
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;

/// Slack, in seconds, granted to slew-time comparisons so that exact-boundary
/// maneuvers (angle/rate == gap) are not rejected by floating-point noise.
const SLEW_TIME_EPS_S: f64 = 1e-9;

/// A 3-vector in km (positions), km/s (velocities), or dimensionless (unit
/// directions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn sub(self, other: Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn unit(self) -> Self {
        let n = self.norm();
        debug_assert!(n > 0.0, "cannot normalize the zero vector");
        self.scale(1.0 / n)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

/// Angle between two vectors in degrees, in [0, 180].
pub fn angle_between_deg(a: Vec3, b: Vec3) -> f64 {
    let c = (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

/// A circular orbit: altitude plus the plane and phase at epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    /// Argument of latitude (angle from the ascending node, in-plane) at epoch.
    pub arg_lat_epoch_deg: f64,
    /// Epoch as seconds since scenario start, normally 0.
    pub epoch: f64,
}

impl Default for OrbitSpec {
    /// 500 km circular polar orbit.
    fn default() -> Self {
        Self {
            altitude_km: 500.0,
            inclination_deg: 90.0,
            raan_deg: 0.0,
            arg_lat_epoch_deg: 0.0,
            epoch: 0.0,
        }
    }
}

impl OrbitSpec {
    pub fn semi_major_axis_km(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude_km
    }

    /// Orbital period 2*pi*sqrt(a^3/mu), seconds.
    pub fn period_s(&self) -> f64 {
        let a = self.semi_major_axis_km();
        2.0 * std::f64::consts::PI * (a.powi(3) / MU_EARTH_KM3_S2).sqrt()
    }

    /// Mean motion, rad/s.
    pub fn mean_motion_rad_s(&self) -> f64 {
        (MU_EARTH_KM3_S2 / self.semi_major_axis_km().powi(3)).sqrt()
    }
}

/// A point fixed to the rotating Earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
    #[serde(default)]
    pub alt_m: f64,
}

impl GeoPoint {
    pub fn new(lat_deg: f64, lon_deg: f64) -> Self {
        Self {
            lat_deg,
            lon_deg,
            alt_m: 0.0,
        }
    }

    /// Earth-fixed position on the spherical Earth, km.
    pub fn ecef_km(&self) -> Vec3 {
        let r = EARTH_RADIUS_KM + self.alt_m / 1000.0;
        let lat = self.lat_deg.to_radians();
        let lon = self.lon_deg.to_radians();
        Vec3::new(
            r * lat.cos() * lon.cos(),
            r * lat.cos() * lon.sin(),
            r * lat.sin(),
        )
    }
}

/// Inertial position and velocity at a time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EciState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub t: f64,
}

/// A unit direction from the spacecraft body toward a target, stamped with
/// the time at which the spacecraft holds it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointingVector {
    pub direction: Vec3,
    pub t: f64,
}

/// Position and velocity on the circular orbit at time `t`.
pub fn propagate(orbit: &OrbitSpec, t: f64) -> EciState {
    let a = orbit.semi_major_axis_km();
    let n = orbit.mean_motion_rad_s();
    let u = orbit.arg_lat_epoch_deg.to_radians() + n * (t - orbit.epoch);
    let inc = orbit.inclination_deg.to_radians();
    let raan = orbit.raan_deg.to_radians();

    let (su, cu) = u.sin_cos();
    let (si, ci) = inc.sin_cos();
    let (so, co) = raan.sin_cos();

    let position = Vec3::new(
        a * (co * cu - so * su * ci),
        a * (so * cu + co * su * ci),
        a * (su * si),
    );
    let velocity = Vec3::new(
        a * n * (-co * su - so * cu * ci),
        a * n * (-so * su + co * cu * ci),
        a * n * (cu * si),
    );
    EciState {
        position,
        velocity,
        t,
    }
}

/// Inertial position of an Earth-fixed point at time `t` (Earth rotation
/// applied, zero rotation at t = 0).
pub fn site_eci_km(site: &GeoPoint, t: f64) -> Vec3 {
    let ecef = site.ecef_km();
    let theta = EARTH_ROTATION_RAD_S * t;
    let (s, c) = theta.sin_cos();
    Vec3::new(c * ecef.x - s * ecef.y, s * ecef.x + c * ecef.y, ecef.z)
}

/// Elevation of the satellite above the site's local horizon, degrees in
/// [-90, 90].
pub fn elevation_angle(sat: &EciState, site: &GeoPoint, t: f64) -> f64 {
    elevation_from_positions(sat.position, site_eci_km(site, t))
}

/// Elevation given both inertial positions directly.
pub fn elevation_from_positions(sat_pos: Vec3, site_pos: Vec3) -> f64 {
    let range = sat_pos.sub(site_pos);
    let up = site_pos.unit();
    (range.unit().dot(up)).clamp(-1.0, 1.0).asin().to_degrees()
}

/// Angle between the nadir direction and the satellite-to-target direction,
/// degrees in [0, 180].
pub fn off_nadir_angle(sat: &EciState, target: &GeoPoint, t: f64) -> f64 {
    off_nadir_from_positions(sat.position, site_eci_km(target, t))
}

/// Off-nadir angle given both inertial positions directly.
pub fn off_nadir_from_positions(sat_pos: Vec3, target_pos: Vec3) -> f64 {
    let nadir = sat_pos.scale(-1.0);
    let to_target = target_pos.sub(sat_pos);
    angle_between_deg(nadir, to_target)
}

/// Unit pointing vector from the satellite toward the target at time `t`.
pub fn pointing_to(orbit: &OrbitSpec, target: &GeoPoint, t: f64) -> PointingVector {
    let sat = propagate(orbit, t);
    let target_pos = site_eci_km(target, t);
    PointingVector {
        direction: target_pos.sub(sat.position).unit(),
        t,
    }
}

/// Whether a single-axis slew from `p1` to `p2` fits in the time between
/// them at the given maximum rate. The boundary case (angle/rate equals the
/// gap exactly) is feasible; a negative gap is not.
pub fn slew_feasible(p1: &PointingVector, p2: &PointingVector, slew_rate_deg_s: f64) -> bool {
    let gap = p2.t - p1.t;
    if gap < 0.0 {
        return false;
    }
    let angle = angle_between_deg(p1.direction, p2.direction);
    angle / slew_rate_deg_s <= gap + SLEW_TIME_EPS_S
}
