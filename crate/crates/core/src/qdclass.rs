//! Classification of the normalized quadratic differential
//!
//! ```text
//! Q(z) dz^2 = -(z - p1)(z - p2) / ((z - 1)^2 (z + 1)^2) dz^2
//! ```
//!
//! by the positions of its zeros: pole data, normalized heights, type
//! regions, topological type of the domain configuration and the local
//! trajectory structure at the poles.
//!
//! Type regions. With `sigma(z) = |z-1| + |z+1|` and `delta(z) = |z-1| - |z+1|`
//! (elliptic coordinates with foci +-1), the ellipse `L(p1)` and hyperbola
//! branch `H(p1)` through `p1` are the coordinate lines `sigma = sigma(p1)` and
//! `delta = delta(p1)`. The coordinates map each open half-plane onto
//! `(2, inf) x (-2, 2)`, so every component of the complement of `L u H` is a
//! coordinate quadrant and membership reduces to two scalar comparisons:
//!
//! ```text
//! E1+  = {sigma < sigma1, delta < delta1}    E-1+ = {sigma < sigma1, delta > delta1}
//! E1-  = {sigma > sigma1, delta < delta1}    E-1- = {sigma > sigma1, delta > delta1}
//! ```
//!
//! "+" is the inside of the ellipse, the subscript names the nearer pole.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Genericity tolerance: distance below which `p` counts as a pole or the
/// zeros as coincident.
pub const GENERIC_TOL: f64 = 1e-12;
/// Absolute tolerance on sigma, delta and argument comparisons.
pub const REGION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedQD {
    pub p1: Complex64,
    pub p2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Genericity {
    pub p1_off_poles: bool,
    pub p2_off_poles: bool,
    pub distinct: bool,
}

impl Genericity {
    pub fn all(&self) -> bool {
        self.p1_off_poles && self.p2_off_poles && self.distinct
    }
}

fn off_poles(p: Complex64) -> bool {
    (p - 1.0).norm() > GENERIC_TOL && (p + 1.0).norm() > GENERIC_TOL
}

impl NormalizedQD {
    pub fn new(p1: Complex64, p2: Complex64) -> Self {
        NormalizedQD { p1, p2 }
    }

    pub fn genericity(&self) -> Genericity {
        Genericity {
            p1_off_poles: off_poles(self.p1),
            p2_off_poles: off_poles(self.p2),
            distinct: (self.p1 - self.p2).norm() > GENERIC_TOL,
        }
    }

    pub fn is_generic(&self) -> bool {
        self.genericity().all()
    }

    /// `Q(z)` itself.
    pub fn q(&self, z: Complex64) -> Complex64 {
        let d = (z - 1.0) * (z + 1.0);
        -(z - self.p1) * (z - self.p2) / (d * d)
    }

    pub fn conj(&self) -> Self {
        NormalizedQD::new(self.p1.conj(), self.p2.conj())
    }

    /// Image under `z -> -z`, which swaps the roles of the poles.
    pub fn mirror(&self) -> Self {
        NormalizedQD::new(-self.p1, -self.p2)
    }

    pub fn swapped(&self) -> Self {
        NormalizedQD::new(self.p2, self.p1)
    }

    pub fn zero(&self, z: ZeroLabel) -> Complex64 {
        match z {
            ZeroLabel::P1 => self.p1,
            ZeroLabel::P2 => self.p2,
        }
    }
}

pub fn sigma(z: Complex64) -> f64 {
    (z - 1.0).norm() + (z + 1.0).norm()
}

pub fn delta(z: Complex64) -> f64 {
    (z - 1.0).norm() - (z + 1.0).norm()
}

/// Square root on the branch with non-negative imaginary part.
pub fn sqrt_upper(c: Complex64) -> Complex64 {
    let s = c.sqrt();
    if s.im < 0.0 || (s.im == 0.0 && s.re < 0.0) {
        -s
    } else {
        s
    }
}

pub fn is_positive_real(c: Complex64) -> bool {
    c.norm() > 0.0 && c.arg().abs() <= REGION_TOL
}

pub fn is_negative_real(c: Complex64) -> bool {
    c.norm() > 0.0 && c.arg().abs() >= PI - REGION_TOL
}

/// `(C1, Cm1)`, the leading Laurent coefficients at `+1` and `-1` up to the
/// factor `-1/4`.
pub fn leading_coeffs(qd: &NormalizedQD) -> Result<(Complex64, Complex64)> {
    let g = qd.genericity();
    if !(g.p1_off_poles && g.p2_off_poles) {
        return Err(Error::DegenerateParameters(format!(
            "zero at a pole: p1 = {}, p2 = {}",
            qd.p1, qd.p2
        )));
    }
    Ok(((qd.p1 - 1.0) * (qd.p2 - 1.0), (qd.p1 + 1.0) * (qd.p2 + 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spiral {
    Circle,
    Radial,
    Ccw,
    Cw,
}

impl Spiral {
    pub fn from_coeff(c: Complex64) -> Spiral {
        if is_positive_real(c) {
            Spiral::Circle
        } else if is_negative_real(c) {
            Spiral::Radial
        } else if c.arg() < 0.0 {
            Spiral::Ccw
        } else {
            Spiral::Cw
        }
    }

    /// Behaviour after complex conjugation of the differential.
    pub fn reversed(self) -> Spiral {
        match self {
            Spiral::Ccw => Spiral::Cw,
            Spiral::Cw => Spiral::Ccw,
            s => s,
        }
    }

    pub fn is_spiral(self) -> bool {
        matches!(self, Spiral::Ccw | Spiral::Cw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleLocalData {
    #[serde(rename = "C1")]
    pub c1: Complex64,
    #[serde(rename = "Cm1")]
    pub cm1: Complex64,
    pub hplus: f64,
    pub hminus: f64,
    pub h1: f64,
    pub h2: f64,
    pub h: f64,
    pub spiral_plus: Spiral,
    pub spiral_minus: Spiral,
}

pub fn heights(qd: &NormalizedQD) -> Result<PoleLocalData> {
    let (c1, cm1) = leading_coeffs(qd)?;
    let hplus = 0.5 * sqrt_upper(c1).im;
    let hminus = 0.5 * sqrt_upper(cm1).im;
    let h1 = 0.5 * (hplus - hminus);
    let h2 = hminus;
    Ok(PoleLocalData {
        c1,
        cm1,
        hplus,
        hminus,
        h1,
        h2,
        h: h1 + h2,
        spiral_plus: Spiral::from_coeff(c1),
        spiral_minus: Spiral::from_coeff(cm1),
    })
}

/// Local structure at `(+1, -1)`.
pub fn spiral_behavior(qd: &NormalizedQD) -> Result<(Spiral, Spiral)> {
    let (c1, cm1) = leading_coeffs(qd)?;
    Ok((Spiral::from_coeff(c1), Spiral::from_coeff(cm1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    #[serde(rename = "conj")]
    ConjPoint,
    #[serde(rename = "l1+")]
    Ray1Plus,
    #[serde(rename = "l1-")]
    Ray1Minus,
    #[serde(rename = "l-1+")]
    RayM1Plus,
    #[serde(rename = "l-1-")]
    RayM1Minus,
    #[serde(rename = "L+")]
    LPlus,
    #[serde(rename = "L-")]
    LMinus,
    #[serde(rename = "H+")]
    HPlus,
    #[serde(rename = "H-")]
    HMinus,
    #[serde(rename = "E1+")]
    E1Plus,
    #[serde(rename = "E-1+")]
    EM1Plus,
    #[serde(rename = "E1-")]
    E1Minus,
    #[serde(rename = "E-1-")]
    EM1Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionReport {
    /// Most specific label: conjugate point, then rays, then `L`/`H`, then
    /// the open regions.
    pub label: Region,
    /// Every label that applies, in the same order.
    pub memberships: Vec<Region>,
    pub boundary_marker: bool,
    pub sigma: [f64; 2],
    pub delta: [f64; 2],
}

/// Position of `p2` relative to the curves through `p1`.
pub fn region_of(p1: Complex64, p2: Complex64) -> Result<RegionReport> {
    if p1.im.abs() <= REGION_TOL {
        return Err(Error::NotApplicable(
            "region_of needs Im p1 != 0; renumber real zeros first".into(),
        ));
    }
    let (s1, s2) = (sigma(p1), sigma(p2));
    let (d1, d2) = (delta(p1), delta(p2));
    let ds = s2 - s1;
    let dd = d2 - d1;
    let mut m = Vec::new();
    if (p2 - p1.conj()).norm() <= REGION_TOL {
        m.push(Region::ConjPoint);
    }
    let c1 = (p1 - 1.0) * (p2 - 1.0);
    let cm1 = (p1 + 1.0) * (p2 + 1.0);
    if is_positive_real(c1) {
        m.push(Region::Ray1Plus);
    } else if is_negative_real(c1) {
        m.push(Region::Ray1Minus);
    }
    if is_positive_real(cm1) {
        m.push(Region::RayM1Plus);
    } else if is_negative_real(cm1) {
        m.push(Region::RayM1Minus);
    }
    let s_tie = ds.abs() <= REGION_TOL;
    let d_tie = dd.abs() <= REGION_TOL;
    if s_tie {
        m.push(if dd < 0.0 { Region::LPlus } else { Region::LMinus });
    }
    if d_tie {
        m.push(if ds < 0.0 { Region::HPlus } else { Region::HMinus });
    }
    if !s_tie && !d_tie {
        m.push(match (ds < 0.0, dd < 0.0) {
            (true, true) => Region::E1Plus,
            (true, false) => Region::EM1Plus,
            (false, true) => Region::E1Minus,
            (false, false) => Region::EM1Minus,
        });
    }
    let boundary_marker = s_tie || d_tie || m.len() > 1;
    Ok(RegionReport {
        label: m[0],
        memberships: m,
        boundary_marker,
        sigma: [s1, s2],
        delta: [d1, d2],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroLabel {
    #[serde(rename = "p1")]
    P1,
    #[serde(rename = "p2")]
    P2,
}

impl ZeroLabel {
    pub fn other(self) -> ZeroLabel {
        match self {
            ZeroLabel::P1 => ZeroLabel::P2,
            ZeroLabel::P2 => ZeroLabel::P1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Pole {
    pub fn z(self) -> Complex64 {
        match self {
            Pole::Plus => Complex64::new(1.0, 0.0),
            Pole::Minus => Complex64::new(-1.0, 0.0),
        }
    }

    pub fn other(self) -> Pole {
        match self {
            Pole::Plus => Pole::Minus,
            Pole::Minus => Pole::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    B2,
    B3,
}

/// The pole that attracts a single critical trajectory and the zero at the
/// other end of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleTarget {
    pub pole: Pole,
    pub zero: ZeroLabel,
}

/// Where a zero sits when the other zero is at a pole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPosition {
    Interior,
    RightOutside,
    LeftOutside,
    Complex,
}

impl ZeroPosition {
    fn of(p: Complex64) -> ZeroPosition {
        if p.im.abs() > REGION_TOL {
            ZeroPosition::Complex
        } else if p.re > 1.0 {
            ZeroPosition::RightOutside
        } else if p.re < -1.0 {
            ZeroPosition::LeftOutside
        } else {
            ZeroPosition::Interior
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum DegenerateKind {
    P1EqP2Interior,
    P1EqP2RealOutside,
    P1EqP2Complex,
    /// `renumbered` is set when the input had `p1` at the pole.
    P2AtPole {
        pole: Pole,
        p1_kind: ZeroPosition,
        renumbered: bool,
    },
    BothAtPolesSame {
        pole: Pole,
    },
    BothAtPolesOpposite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum TopologicalType {
    #[serde(rename = "ThreeCircles_a")]
    ThreeCirclesA,
    #[serde(rename = "ThreeCircles_b")]
    ThreeCirclesB,
    #[serde(rename = "ThreeCircles_c")]
    ThreeCirclesC,
    TwoCircles {
        second_pole: Pole,
        zero_on_dinf: ZeroLabel,
    },
    /// `p2_pole` is the pole approached by the free critical trajectory
    /// from `p2`; the one from `p1` goes to the other pole.
    #[serde(rename = "OneCircleOneStrip_a")]
    OneCircleOneStripA { p2_pole: Pole },
    #[serde(rename = "OneCircleOneStrip_b1")]
    OneCircleOneStripB1 { zero_on_dinf: ZeroLabel },
    OneCircleTwoStrips {
        orientation: Orientation,
        zero_on_dinf: ZeroLabel,
        single_trajectory_pole_target: PoleTarget,
    },
    Degenerate { kind: DegenerateKind },
}

impl TopologicalType {
    /// Image under `z -> -z`.
    pub fn mirrored(self) -> TopologicalType {
        use TopologicalType::*;
        match self {
            TwoCircles { second_pole, zero_on_dinf } => TwoCircles {
                second_pole: second_pole.other(),
                zero_on_dinf,
            },
            OneCircleOneStripA { p2_pole } => OneCircleOneStripA { p2_pole: p2_pole.other() },
            OneCircleTwoStrips {
                orientation,
                zero_on_dinf,
                single_trajectory_pole_target: t,
            } => OneCircleTwoStrips {
                orientation: match orientation {
                    Orientation::B2 => Orientation::B3,
                    Orientation::B3 => Orientation::B2,
                },
                zero_on_dinf,
                single_trajectory_pole_target: PoleTarget { pole: t.pole.other(), zero: t.zero },
            },
            t => t,
        }
    }

    /// Same type with the zero labels exchanged.
    pub fn relabeled(self) -> TopologicalType {
        use TopologicalType::*;
        match self {
            TwoCircles { second_pole, zero_on_dinf } => TwoCircles {
                second_pole,
                zero_on_dinf: zero_on_dinf.other(),
            },
            OneCircleOneStripA { p2_pole } => OneCircleOneStripA { p2_pole: p2_pole.other() },
            OneCircleOneStripB1 { zero_on_dinf } => OneCircleOneStripB1 {
                zero_on_dinf: zero_on_dinf.other(),
            },
            OneCircleTwoStrips {
                orientation,
                zero_on_dinf,
                single_trajectory_pole_target: t,
            } => OneCircleTwoStrips {
                orientation,
                zero_on_dinf: zero_on_dinf.other(),
                single_trajectory_pole_target: PoleTarget { pole: t.pole, zero: t.zero.other() },
            },
            t => t,
        }
    }

    pub fn name(&self) -> &'static str {
        use TopologicalType::*;
        match self {
            ThreeCirclesA => "ThreeCircles_a",
            ThreeCirclesB => "ThreeCircles_b",
            ThreeCirclesC => "ThreeCircles_c",
            TwoCircles { .. } => "TwoCircles",
            OneCircleOneStripA { .. } => "OneCircleOneStrip_a",
            OneCircleOneStripB1 { .. } => "OneCircleOneStrip_b1",
            OneCircleTwoStrips { .. } => "OneCircleTwoStrips",
            Degenerate { .. } => "Degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    #[serde(flatten)]
    pub topology: TopologicalType,
    pub boundary_marker: bool,
    #[serde(rename = "C1")]
    pub c1: Option<Complex64>,
    #[serde(rename = "Cm1")]
    pub cm1: Option<Complex64>,
    pub heights: Option<PoleLocalData>,
    pub spiral: Option<(Spiral, Spiral)>,
    /// Region of the second zero relative to the first, after renumbering
    /// so the reference zero is non-real. `None` for real pairs.
    pub regions: Option<RegionReport>,
    pub renumbered: bool,
}

pub fn detect_degenerate(qd: &NormalizedQD) -> Option<DegenerateKind> {
    let at = |p: Complex64| -> Option<Pole> {
        if (p - 1.0).norm() <= GENERIC_TOL {
            Some(Pole::Plus)
        } else if (p + 1.0).norm() <= GENERIC_TOL {
            Some(Pole::Minus)
        } else {
            None
        }
    };
    match (at(qd.p1), at(qd.p2)) {
        (Some(a), Some(b)) if a == b => Some(DegenerateKind::BothAtPolesSame { pole: a }),
        (Some(_), Some(_)) => Some(DegenerateKind::BothAtPolesOpposite),
        (None, Some(pole)) => Some(DegenerateKind::P2AtPole {
            pole,
            p1_kind: ZeroPosition::of(qd.p1),
            renumbered: false,
        }),
        (Some(pole), None) => Some(DegenerateKind::P2AtPole {
            pole,
            p1_kind: ZeroPosition::of(qd.p2),
            renumbered: true,
        }),
        (None, None) if (qd.p1 - qd.p2).norm() <= GENERIC_TOL => Some(match ZeroPosition::of(qd.p1) {
            ZeroPosition::Interior => DegenerateKind::P1EqP2Interior,
            ZeroPosition::Complex => DegenerateKind::P1EqP2Complex,
            _ => DegenerateKind::P1EqP2RealOutside,
        }),
        _ => None,
    }
}

/// Domain configuration type of the differential.
pub fn classify(qd: &NormalizedQD) -> Classification {
    if let Some(kind) = detect_degenerate(qd) {
        return Classification {
            topology: TopologicalType::Degenerate { kind },
            boundary_marker: false,
            c1: None,
            cm1: None,
            heights: None,
            spiral: None,
            regions: None,
            renumbered: matches!(kind, DegenerateKind::P2AtPole { renumbered: true, .. }),
        };
    }
    let hd = heights(qd).expect("generic input");
    let (c1, cm1) = (hd.c1, hd.cm1);
    let (p1, p2) = (qd.p1, qd.p2);

    let renumbered = p1.im.abs() <= REGION_TOL && p2.im.abs() > REGION_TOL;
    let regions = if renumbered {
        region_of(p2, p1).ok()
    } else {
        region_of(p1, p2).ok()
    };

    // sigma and delta are symmetric under conjugation, so the zero labels
    // below can be read off the original pair directly
    let ds = sigma(p2) - sigma(p1);
    let dd = delta(p2) - delta(p1);
    let outer = if ds < 0.0 { ZeroLabel::P1 } else { ZeroLabel::P2 };

    let pos1 = is_positive_real(c1);
    let posm1 = is_positive_real(cm1);
    let both_real = p1.im.abs() <= REGION_TOL && p2.im.abs() <= REGION_TOL;
    let mut marker = regions.as_ref().is_some_and(|r| r.boundary_marker);

    let topology = if pos1 && posm1 {
        marker = true;
        if !both_real {
            TopologicalType::ThreeCirclesC
        } else if p1.re.abs() < 1.0 && p2.re.abs() < 1.0 {
            TopologicalType::ThreeCirclesA
        } else {
            TopologicalType::ThreeCirclesB
        }
    } else if pos1 || posm1 {
        marker = true;
        let (second_pole, closer) = if posm1 {
            (Pole::Minus, (p2 + 1.0).norm() < (p1 + 1.0).norm())
        } else {
            (Pole::Plus, (p2 - 1.0).norm() < (p1 - 1.0).norm())
        };
        TopologicalType::TwoCircles {
            second_pole,
            zero_on_dinf: if closer { ZeroLabel::P1 } else { ZeroLabel::P2 },
        }
    } else if ds.abs() <= REGION_TOL {
        marker = true;
        // the zero nearer to +1 in the delta coordinate is attached to +1
        TopologicalType::OneCircleOneStripA {
            p2_pole: if dd < 0.0 { Pole::Plus } else { Pole::Minus },
        }
    } else if dd.abs() <= REGION_TOL && !both_real {
        marker = true;
        TopologicalType::OneCircleOneStripB1 { zero_on_dinf: outer }
    } else {
        let orientation = if hd.hplus > hd.hminus { Orientation::B2 } else { Orientation::B3 };
        let pole = match orientation {
            Orientation::B2 => Pole::Minus,
            Orientation::B3 => Pole::Plus,
        };
        TopologicalType::OneCircleTwoStrips {
            orientation,
            zero_on_dinf: outer,
            single_trajectory_pole_target: PoleTarget { pole, zero: outer.other() },
        }
    };

    Classification {
        topology,
        boundary_marker: marker,
        c1: Some(c1),
        cm1: Some(cm1),
        heights: Some(hd),
        spiral: Some((hd.spiral_plus, hd.spiral_minus)),
        regions,
        renumbered,
    }
}
