//! NACA 4- and 5-digit airfoil construction and design-space sampling.
//!
//! All lengths are fractions of the chord, which is fixed to 1 m, so they are also
//! metres. The leading edge sits at the origin and the trailing edge at `(1, 0)`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::{self, CHORD};
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Thickness polynomial coefficients; the last one is replaced for a closed trailing edge.
const THICKNESS_COEFFS: [f64; 5] = [0.2969, -0.126, -0.3516, 0.2843, -0.1015];

const BOUND_EPS: f64 = 1e-12;

/// Largest camber-position parameter for which `p = m(1 - sqrt(m/3))` has a root.
pub const MAX_FIVE_DIGIT_POSITION: f64 = 4.0 / 9.0;

/// Upper end of the monotone branch of the max-camber relation.
const MAX_CAMBER_BRACKET_HI: f64 = 4.0 / 3.0;

fn within(v: f64, lo: f64, hi: f64) -> bool {
    v >= lo - BOUND_EPS && v <= hi + BOUND_EPS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Naca4Params {
    /// Maximum camber.
    pub m: f64,
    /// Chordwise position of the maximum camber.
    pub p: f64,
    /// Maximum thickness.
    pub t: f64,
}

impl Naca4Params {
    pub fn new(m: f64, p: f64, t: f64) -> Result<Self> {
        if !within(m, 0.0, 0.07) {
            return Err(Error::Parameter(format!("4-digit max camber {m} outside [0, 0.07]")));
        }
        if !(p == 0.0 || within(p, 0.15, 0.7)) {
            return Err(Error::Parameter(format!(
                "4-digit camber position {p} must be 0 or in [0.15, 0.7]"
            )));
        }
        if !within(t, 0.05, 0.20) {
            return Err(Error::Parameter(format!("thickness {t} outside [0.05, 0.20]")));
        }
        Ok(Naca4Params { m, p, t })
    }

    /// From (possibly non-integer) digits `M`, `P`, `XX`. A zero position digit yields a
    /// symmetric section regardless of `M`.
    pub fn from_digits(m_digit: f64, p_digit: f64, xx: f64) -> Result<Self> {
        let p = 0.1 * p_digit;
        let m = if p == 0.0 { 0.0 } else { 0.01 * m_digit };
        Naca4Params::new(m, p, 0.01 * xx)
    }

    pub fn is_symmetric(&self) -> bool {
        self.m == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Naca5Params {
    /// Design lift coefficient, `0.15 L`.
    pub cl_design: f64,
    /// Chordwise position of the maximum camber, `0.05 P`.
    pub p: f64,
    /// Reflexed (double-cambered) mean line when set.
    pub reflex: bool,
    pub t: f64,
}

impl Naca5Params {
    pub fn new(cl_design: f64, p: f64, reflex: bool, t: f64) -> Result<Self> {
        if !within(cl_design, 0.0, 0.6) {
            return Err(Error::Parameter(format!("design lift {cl_design} outside [0, 0.6]")));
        }
        if !within(p, 0.15, 0.40) {
            return Err(Error::Parameter(format!(
                "5-digit camber position {p} outside [0.15, 0.40]"
            )));
        }
        if !within(t, 0.05, 0.20) {
            return Err(Error::Parameter(format!("thickness {t} outside [0.05, 0.20]")));
        }
        Ok(Naca5Params { cl_design, p, reflex, t })
    }

    pub fn from_digits(l: f64, p_digit: f64, q: bool, xx: f64) -> Result<Self> {
        Naca5Params::new(0.15 * l, 0.05 * p_digit, q, 0.01 * xx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AirfoilParams {
    Four(Naca4Params),
    Five(Naca5Params),
}

impl AirfoilParams {
    pub fn thickness(&self) -> f64 {
        match self {
            AirfoilParams::Four(p) => p.t,
            AirfoilParams::Five(p) => p.t,
        }
    }

    /// Abscissa of the maximum camber; the maximum-thickness station for symmetric sections.
    pub fn max_camber_abscissa(&self) -> f64 {
        match self {
            AirfoilParams::Four(p) if p.m > 0.0 => p.p,
            AirfoilParams::Five(p) if p.cl_design > 0.0 => p.p,
            _ => 0.3,
        }
    }
}

/// Serializable designation as written in case metadata: the series and the raw digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Designation {
    Four { m: f64, p: f64, xx: f64 },
    Five { l: f64, p: f64, q: bool, xx: f64 },
}

impl Designation {
    pub fn series(&self) -> u8 {
        match self {
            Designation::Four { .. } => 4,
            Designation::Five { .. } => 5,
        }
    }

    pub fn digits(&self) -> Vec<f64> {
        match *self {
            Designation::Four { m, p, xx } => vec![m, p, xx],
            Designation::Five { l, p, q, xx } => vec![l, p, if q { 1.0 } else { 0.0 }, xx],
        }
    }

    pub fn from_digits(series: u8, digits: &[f64]) -> Result<Self> {
        match (series, digits) {
            (4, &[m, p, xx]) => Ok(Designation::Four { m, p, xx }),
            (5, &[l, p, q, xx]) => {
                if q != 0.0 && q != 1.0 {
                    return Err(Error::Parameter(format!("reflex digit must be 0 or 1, got {q}")));
                }
                Ok(Designation::Five { l, p, q: q == 1.0, xx })
            }
            (4, _) => Err(Error::Parameter(format!(
                "4-digit designation needs 3 values (M, P, XX), got {}",
                digits.len()
            ))),
            (5, _) => Err(Error::Parameter(format!(
                "5-digit designation needs 4 values (L, P, Q, XX), got {}",
                digits.len()
            ))),
            _ => Err(Error::Parameter(format!("unknown NACA series {series}"))),
        }
    }

    pub fn params(&self) -> Result<AirfoilParams> {
        match *self {
            Designation::Four { m, p, xx } => Naca4Params::from_digits(m, p, xx).map(AirfoilParams::Four),
            Designation::Five { l, p, q, xx } => {
                Naca5Params::from_digits(l, p, q, xx).map(AirfoilParams::Five)
            }
        }
    }
}

impl fmt::Display for Designation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.digits();
        let parts: Vec<String> = d.iter().map(|v| format!("{v:.3}")).collect();
        write!(f, "NACA ({})", parts.join(", "))
    }
}

/// One simulation case: airfoil, inflow speed and angle of attack.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub name: String,
    pub airfoil: Designation,
    /// Inlet speed magnitude, m/s.
    pub u_inf: f64,
    /// Angle of attack, radians.
    pub aoa: f64,
    pub reynolds: f64,
}

impl CaseSpec {
    pub fn new(name: impl Into<String>, airfoil: Designation, u_inf: f64, aoa: f64) -> Self {
        CaseSpec {
            name: name.into(),
            airfoil,
            u_inf,
            aoa,
            reynolds: constants::reynolds_from_speed(u_inf),
        }
    }

    /// Unit inflow direction; the geometry itself is never rotated.
    pub fn inflow_dir(&self) -> Vec2 {
        Vec2::from_angle(self.aoa)
    }

    pub fn inlet_velocity(&self) -> Vec2 {
        self.inflow_dir() * self.u_inf
    }

    pub fn aoa_deg(&self) -> f64 {
        self.aoa.to_degrees()
    }

    /// Name following the dataset convention: speed, angle and digits joined by `_`.
    pub fn conventional_name(airfoil: &Designation, u_inf: f64, aoa_deg: f64) -> String {
        let digits: Vec<String> = airfoil.digits().iter().map(|v| format!("{v:.3}")).collect();
        format!("airFoil2D_SST_{u_inf:.3}_{aoa_deg:.3}_{}", digits.join("_"))
    }
}

/// Half thickness `y_t(x)` of the NACA envelope.
pub fn half_thickness(x: f64, t: f64, closed_te: bool) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("chord fraction {x} outside [0, 1]")));
    }
    if !(t > 0.0) {
        return Err(Error::Parameter(format!("thickness must be positive, got {t}")));
    }
    Ok(half_thickness_unchecked(x, t, closed_te))
}

fn half_thickness_unchecked(x: f64, t: f64, closed_te: bool) -> f64 {
    let [c0, c1, c2, c3, c4] = THICKNESS_COEFFS;
    let (x2, x3) = (x * x, x * x * x);
    let x4 = x2 * x2;
    let poly = if closed_te {
        // Coefficients sum to zero; every bracket vanishes exactly at x = 1.
        c0 * (x.sqrt() - x4) + c1 * (x - x4) + c2 * (x2 - x4) + c3 * (x3 - x4)
    } else {
        c0 * x.sqrt() + c1 * x + c2 * x2 + c3 * x3 + c4 * x4
    };
    t / 0.2 * poly
}

/// Four-digit mean line and its slope at `x`.
pub fn camber_four(x: f64, params: &Naca4Params) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("chord fraction {x} outside [0, 1]")));
    }
    let (m, p) = (params.m, params.p);
    if m == 0.0 {
        return Ok((0.0, 0.0));
    }
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::Parameter(format!(
            "cambered 4-digit section needs 0 < p < 1, got p = {p}"
        )));
    }
    Ok(if x <= p {
        (m * x / (p * p) * (2.0 * p - x), 2.0 * m / (p * p) * (p - x))
    } else {
        let q = 1.0 - p;
        (m * (1.0 - x) / (q * q) * (1.0 + x - 2.0 * p), 2.0 * m / (q * q) * (p - x))
    })
}

fn max_camber_residual(m: f64, p: f64) -> f64 {
    m * (1.0 - (m / 3.0).sqrt()) - p
}

fn check_camber_position(p: f64) -> Result<()> {
    if !(0.0..MAX_FIVE_DIGIT_POSITION).contains(&p) {
        return Err(Error::Domain(format!(
            "camber position {p} outside [0, 4/9): p = m(1 - sqrt(m/3)) has no root"
        )));
    }
    Ok(())
}

/// Newton iteration for `p = m(1 - sqrt(m/3))` from `m0 = 2p`, kept inside the
/// bracket `[p, 4/3]` on which the relation is increasing.
pub fn solve_max_camber_newton(p: f64) -> Result<f64> {
    check_camber_position(p)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    let mut m = (2.0 * p).min(MAX_CAMBER_BRACKET_HI);
    for _ in 0..50 {
        let g = max_camber_residual(m, p);
        if g.abs() < 1e-15 {
            return Ok(m);
        }
        let dg = 1.0 - 1.5 * (m / 3.0).sqrt();
        if !(dg > 0.0) {
            break;
        }
        let next = m - g / dg;
        if !(next >= p && next <= MAX_CAMBER_BRACKET_HI) {
            break;
        }
        if (next - m).abs() <= 1e-16 * m.max(1.0) {
            m = next;
            break;
        }
        m = next;
    }
    if max_camber_residual(m, p).abs() < 1e-13 {
        Ok(m)
    } else {
        Err(Error::Numeric(format!("Newton solve for max camber did not converge at p = {p}")))
    }
}

/// Bisection on `[p, 4/3]`; the residual changes sign on this bracket for every valid `p`.
pub fn solve_max_camber_bisection(p: f64) -> Result<f64> {
    check_camber_position(p)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (p, MAX_CAMBER_BRACKET_HI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = max_camber_residual(mid, p);
        if g == 0.0 {
            return Ok(mid);
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let best = if max_camber_residual(lo, p).abs() <= max_camber_residual(hi, p).abs() {
        lo
    } else {
        hi
    };
    Ok(best)
}

/// Solve `p = m(1 - sqrt(m/3))` for the 5-digit parameter `m`.
pub fn solve_max_camber_m(p: f64) -> Result<f64> {
    solve_max_camber_newton(p).or_else(|e| match e {
        Error::Numeric(_) => solve_max_camber_bisection(p),
        other => Err(other),
    })
}

/// Precomputed constants of a 5-digit mean line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveDigitCamber {
    pub m: f64,
    pub k1: f64,
    /// Only used by reflexed lines.
    pub k2: f64,
    pub reflex: bool,
}

impl FiveDigitCamber {
    pub fn new(params: &Naca5Params) -> Result<Self> {
        let m = solve_max_camber_m(params.p)?;
        let q = (3.0 * m - 7.0 * m * m + 8.0 * m.powi(3) - 4.0 * m.powi(4)) / (m * (1.0 - m)).sqrt()
            - 1.5 * (1.0 - 2.0 * m) * (FRAC_PI_2 - (1.0 - 2.0 * m).asin());
        let k1 = params.cl_design / q;
        let k2 = (3.0 * (m - params.p).powi(2) - m.powi(3)) / (1.0 - m).powi(3);
        Ok(FiveDigitCamber { m, k1, k2, reflex: params.reflex })
    }

    pub fn eval(&self, x: f64) -> (f64, f64) {
        let FiveDigitCamber { m, k1, k2, reflex } = *self;
        if k1 == 0.0 {
            return (0.0, 0.0);
        }
        let m3 = m * m * m;
        if !reflex {
            if x <= m {
                (
                    k1 * (m * m * (3.0 - m) * x - 3.0 * m * x * x + x * x * x),
                    k1 * (m * m * (3.0 - m) - 6.0 * m * x + 3.0 * x * x),
                )
            } else {
                (k1 * m3 * (1.0 - x), -k1 * m3)
            }
        } else {
            let base = m3 * (1.0 - x) - k2 * (1.0 - m).powi(3) * x;
            let base_slope = -m3 - k2 * (1.0 - m).powi(3);
            let d = x - m;
            let w = if x <= m { 1.0 } else { k2 };
            (k1 * (base + w * d * d * d), k1 * (base_slope + 3.0 * w * d * d))
        }
    }
}

/// Five-digit mean line and its slope at `x`.
pub fn camber_five(x: f64, params: &Naca5Params) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("chord fraction {x} outside [0, 1]")));
    }
    Ok(FiveDigitCamber::new(params)?.eval(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Uniform,
    /// Clustered towards both edges: `x = (1 - cos(pi s)) / 2`.
    #[default]
    Cosine,
}

pub const DEFAULT_SURFACE_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct AirfoilGeometry {
    /// Leading edge to trailing edge.
    pub upper: Vec<Vec2>,
    /// Leading edge to trailing edge.
    pub lower: Vec<Vec2>,
    pub camber: Vec<Vec2>,
    pub chord: f64,
    pub closed_te: bool,
}

impl AirfoilGeometry {
    /// Counter-clockwise closed loop starting at the upper trailing-edge point, running over
    /// the upper surface to the leading edge and back along the lower surface. Shared end
    /// points appear once.
    pub fn closed_loop(&self) -> Vec<Vec2> {
        let mut out: Vec<Vec2> = self.upper.iter().rev().copied().collect();
        out.extend_from_slice(&self.lower[1..]);
        if self.closed_te {
            out.pop();
        }
        out
    }

    /// Surface as line segments, including the trailing-edge base for open sections.
    pub fn segments(&self) -> Vec<(Vec2, Vec2)> {
        let lp = self.closed_loop();
        let n = lp.len();
        (0..n).map(|i| (lp[i], lp[(i + 1) % n])).collect()
    }
}

enum Camber {
    Four(Naca4Params),
    Five(FiveDigitCamber),
}

impl Camber {
    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        match self {
            Camber::Four(p) => camber_four(x, p),
            Camber::Five(c) => Ok(c.eval(x)),
        }
    }
}

/// Chord stations in `[0, 1]` with exact end points.
pub fn chord_stations(n_points: usize, spacing: Spacing) -> Vec<f64> {
    let last = (n_points - 1) as f64;
    (0..n_points)
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            if k == n_points - 1 {
                return 1.0;
            }
            let s = k as f64 / last;
            match spacing {
                Spacing::Uniform => s,
                Spacing::Cosine => 0.5 * (1.0 - (PI * s).cos()),
            }
        })
        .collect()
}

pub fn generate_airfoil(
    params: &AirfoilParams,
    n_points: usize,
    spacing: Spacing,
    closed_te: bool,
) -> Result<AirfoilGeometry> {
    if n_points < 16 {
        return Err(Error::Parameter(format!("need at least 16 points per surface, got {n_points}")));
    }
    let camber = match params {
        AirfoilParams::Four(p) => {
            if p.m > 0.0 && p.p == 0.0 {
                return Err(Error::Parameter("cambered 4-digit section with p = 0".into()));
            }
            Camber::Four(*p)
        }
        AirfoilParams::Five(p) => Camber::Five(FiveDigitCamber::new(p)?),
    };
    let t = params.thickness();
    let mut upper = Vec::with_capacity(n_points);
    let mut lower = Vec::with_capacity(n_points);
    let mut line = Vec::with_capacity(n_points);
    for x in chord_stations(n_points, spacing) {
        let yt = half_thickness_unchecked(x, t, closed_te);
        let (yc, slope) = camber.eval(x)?;
        let theta = slope.atan();
        let (s, c) = theta.sin_cos();
        upper.push(Vec2::new((x - yt * s) * CHORD, (yc + yt * c) * CHORD));
        lower.push(Vec2::new((x + yt * s) * CHORD, (yc - yt * c) * CHORD));
        line.push(Vec2::new(x * CHORD, yc * CHORD));
    }
    Ok(AirfoilGeometry { upper, lower, camber: line, chord: CHORD, closed_te })
}

/// Probability of drawing a 5-digit section; the remainder are 4-digit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub five_digit_probability: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { five_digit_probability: 0.5 }
    }
}

/// Draw the `index`-th case of the stream for `seed`. Each index owns an independent
/// ChaCha stream, so any subset can be regenerated without drawing the others.
pub fn sample_case(seed: u64, index: u64, config: &SamplerConfig) -> CaseSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let airfoil = if rng.gen::<f64>() < config.five_digit_probability {
        Designation::Five {
            l: rng.gen_range(0.0..=4.0),
            p: rng.gen_range(3.0..=8.0),
            q: rng.gen_bool(0.5),
            xx: rng.gen_range(5.0..=20.0),
        }
    } else {
        let m = rng.gen_range(0.0..=7.0);
        let p: f64 = rng.gen_range(0.0..=7.0);
        let p = if p < 1.5 { 0.0 } else { p };
        Designation::Four { m, p, xx: rng.gen_range(5.0..=20.0) }
    };
    let reynolds = rng.gen_range(constants::RE_MIN..=constants::RE_MAX);
    let aoa_deg = rng.gen_range(constants::AOA_MIN_DEG..=constants::AOA_MAX_DEG);
    let u_inf = constants::speed_from_reynolds(reynolds);
    CaseSpec {
        name: CaseSpec::conventional_name(&airfoil, u_inf, aoa_deg),
        airfoil,
        u_inf,
        aoa: aoa_deg.to_radians(),
        reynolds,
    }
}

pub fn sample_design_space(seed: u64, n: usize) -> Vec<CaseSpec> {
    sample_design_space_with(seed, n, &SamplerConfig::default())
}

pub fn sample_design_space_with(seed: u64, n: usize, config: &SamplerConfig) -> Vec<CaseSpec> {
    (0..n as u64).map(|i| sample_case(seed, i, config)).collect()
}
