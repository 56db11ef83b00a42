//! Properties of air at 298.15 K and sea level, and the fixed reference geometry.

/// Kinematic viscosity of air, m²/s.
pub const NU_AIR: f64 = 1.56e-5;

/// Specific mass of air, kg/m³.
pub const RHO_AIR: f64 = 1.184;

/// Airfoil chord, m.
pub const CHORD: f64 = 1.0;

/// Reference "area" for force coefficients in 2D: the chord times a unit span, m².
pub const REFERENCE_AREA: f64 = 1.0;

pub const RE_MIN: f64 = 2.0e6;
pub const RE_MAX: f64 = 6.0e6;
pub const AOA_MIN_DEG: f64 = -5.0;
pub const AOA_MAX_DEG: f64 = 15.0;

/// Reynolds number from inlet speed with the chord as length scale.
pub fn reynolds_from_speed(u_inf: f64) -> f64 {
    u_inf * CHORD / NU_AIR
}

pub fn speed_from_reynolds(reynolds: f64) -> f64 {
    reynolds * NU_AIR / CHORD
}
