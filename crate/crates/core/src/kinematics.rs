//! Two-arm kinematic samples, per-arm homogeneous transforms and the
//! series utilities (normalization, downsampling, grip checks).

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Mul;

use crate::error::{Error, Result};

/// One arm's record: translation, three angles in radians, grip state and
/// grip output voltage.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmSample {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub grip: f64,
    pub grip_voltage: f64,
}

const ARM_FIELDS: [&str; 8] = ["x", "y", "z", "alpha", "beta", "gamma", "grip", "grip_voltage"];

impl ArmSample {
    pub fn to_array(&self) -> [f64; 8] {
        [
            self.x,
            self.y,
            self.z,
            self.alpha,
            self.beta,
            self.gamma,
            self.grip,
            self.grip_voltage,
        ]
    }

    pub fn from_array(v: [f64; 8]) -> Self {
        Self {
            x: v[0],
            y: v[1],
            z: v[2],
            alpha: v[3],
            beta: v[4],
            gamma: v[5],
            grip: v[6],
            grip_voltage: v[7],
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.to_array().iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite(ARM_FIELDS[i])),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KinematicSample {
    pub left: ArmSample,
    pub right: ArmSample,
}

impl KinematicSample {
    /// Left arm fields followed by right arm fields.
    pub fn to_array(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        out[..8].copy_from_slice(&self.left.to_array());
        out[8..].copy_from_slice(&self.right.to_array());
        out
    }

    pub fn from_array(v: [f64; 16]) -> Self {
        let mut l = [0.0; 8];
        let mut r = [0.0; 8];
        l.copy_from_slice(&v[..8]);
        r.copy_from_slice(&v[8..]);
        Self {
            left: ArmSample::from_array(l),
            right: ArmSample::from_array(r),
        }
    }
}

/// 4x4 matrix acting on column vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousTransform(pub [[f64; 4]; 4]);

impl HomogeneousTransform {
    pub const IDENTITY: Self = Self([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    pub fn translation(x: f64, y: f64, z: f64) -> Self {
        let mut m = Self::IDENTITY;
        m.0[0][3] = x;
        m.0[1][3] = y;
        m.0[2][3] = z;
        m
    }

    pub fn rot_x(theta: f64) -> Self {
        let (s, c) = libm::sincos(theta);
        Self([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, c, -s, 0.0],
            [0.0, s, c, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
    }

    pub fn rot_y(theta: f64) -> Self {
        let (s, c) = libm::sincos(theta);
        Self([
            [c, 0.0, s, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [-s, 0.0, c, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
    }

    pub fn rotation(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [
            [m[0][0], m[0][1], m[0][2]],
            [m[1][0], m[1][1], m[1][2]],
            [m[2][0], m[2][1], m[2][2]],
        ]
    }

    pub fn translation_part(&self) -> [f64; 3] {
        [self.0[0][3], self.0[1][3], self.0[2][3]]
    }

    /// Largest entry of `|R^T R - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let r = self.rotation();
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    pub fn rotation_determinant(&self) -> f64 {
        let r = self.rotation();
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Bottom row is `(0, 0, 0, 1)` and the rotation block is orthonormal
    /// with determinant +1, both within `tol`.
    pub fn is_rigid(&self, tol: f64) -> bool {
        self.0[3] == [0.0, 0.0, 0.0, 1.0]
            && self.orthonormality_error() <= tol
            && (self.rotation_determinant() - 1.0).abs() <= tol
    }
}

impl Mul for HomogeneousTransform {
    type Output = HomogeneousTransform;

    fn mul(self, rhs: Self) -> Self {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        HomogeneousTransform(out)
    }
}

/// Right instrument:
/// `Tx(x) Ty(y) Tz(z) Rx(pi/18) Ry(alpha) Rx(beta - 5pi/9) Ry(gamma)`.
pub fn homogeneous_right(arm: &ArmSample) -> Result<HomogeneousTransform> {
    arm.check_finite()?;
    Ok(HomogeneousTransform::translation(arm.x, arm.y, arm.z)
        * HomogeneousTransform::rot_x(PI / 18.0)
        * HomogeneousTransform::rot_y(arm.alpha)
        * HomogeneousTransform::rot_x(arm.beta - 5.0 * PI / 9.0)
        * HomogeneousTransform::rot_y(arm.gamma))
}

/// Left instrument:
/// `Tx(x) Ty(y) Tz(z) Rx(-pi/18) Ry(alpha) Rx(beta + pi/18) Ry(gamma)`.
pub fn homogeneous_left(arm: &ArmSample) -> Result<HomogeneousTransform> {
    arm.check_finite()?;
    Ok(HomogeneousTransform::translation(arm.x, arm.y, arm.z)
        * HomogeneousTransform::rot_x(-PI / 18.0)
        * HomogeneousTransform::rot_y(arm.alpha)
        * HomogeneousTransform::rot_x(arm.beta + PI / 18.0)
        * HomogeneousTransform::rot_y(arm.gamma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GripAnomaly {
    BelowRange,
    AboveRange,
}

/// Grip readings outside `[-6, 0]` per arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GripFlags {
    pub left: Option<GripAnomaly>,
    pub right: Option<GripAnomaly>,
}

impl GripFlags {
    pub fn any(&self) -> bool {
        self.left.is_some() || self.right.is_some()
    }
}

pub const GRIP_CLOSED: f64 = -6.0;
pub const GRIP_OPEN: f64 = 0.0;

pub fn grip_anomaly(grip: f64) -> Option<GripAnomaly> {
    if grip < GRIP_CLOSED {
        Some(GripAnomaly::BelowRange)
    } else if grip > GRIP_OPEN {
        Some(GripAnomaly::AboveRange)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KinematicSeries {
    pub rate_hz: f64,
    pub samples: Vec<KinematicSample>,
    pub anomalies: Vec<GripFlags>,
}

impl KinematicSeries {
    /// Validates rate, non-emptiness and finiteness; anomaly flags start
    /// empty (see [`validate_grip`]).
    pub fn new(rate_hz: f64, samples: Vec<KinematicSample>) -> Result<Self> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(Error::InvalidRate(rate_hz));
        }
        if samples.is_empty() {
            return Err(Error::Empty("kinematic series"));
        }
        for s in &samples {
            s.left.check_finite()?;
            s.right.check_finite()?;
        }
        let anomalies = alloc::vec![GripFlags::default(); samples.len()];
        Ok(Self {
            rate_hz,
            samples,
            anomalies,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn map_dimensions(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let rows: Vec<[f64; 16]> = self.samples.iter().map(KinematicSample::to_array).collect();
        let mut out = rows.clone();
        for d in 0..16 {
            let column: Vec<f64> = rows.iter().map(|r| r[d]).collect();
            for (row, v) in out.iter_mut().zip(f(&column)) {
                row[d] = v;
            }
        }
        Self {
            rate_hz: self.rate_hz,
            samples: out.into_iter().map(KinematicSample::from_array).collect(),
            anomalies: self.anomalies.clone(),
        }
    }
}

/// Per-dimension `2 (v - min) / (max - min) - 1`; constant dimensions map
/// to 0.
pub fn minmax_normalize(series: &KinematicSeries) -> KinematicSeries {
    series.map_dimensions(|col| {
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        col.iter()
            .map(|v| if span > 0.0 { 2.0 * (v - lo) / span - 1.0 } else { 0.0 })
            .collect()
    })
}

/// Per-dimension `(v - mean) / std` with the population standard
/// deviation; constant dimensions map to 0.
pub fn znormalize(series: &KinematicSeries) -> KinematicSeries {
    series.map_dimensions(|col| {
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = libm::sqrt(var);
        col.iter()
            .map(|v| if std > 0.0 { (v - mean) / std } else { 0.0 })
            .collect()
    })
}

/// Keeps every `rate_hz / target_hz`-th sample starting at index 0.
pub fn downsample(series: &KinematicSeries, target_hz: f64) -> Result<KinematicSeries> {
    if !(target_hz.is_finite() && target_hz > 0.0) {
        return Err(Error::InvalidRate(target_hz));
    }
    let ratio = series.rate_hz / target_hz;
    let stride = libm::round(ratio);
    if stride < 1.0 || (ratio - stride).abs() > 1e-9 {
        return Err(Error::NonIntegerStride {
            rate_hz: series.rate_hz,
            target_hz,
        });
    }
    let stride = stride as usize;
    Ok(KinematicSeries {
        rate_hz: target_hz,
        samples: series.samples.iter().step_by(stride).copied().collect(),
        anomalies: series.anomalies.iter().step_by(stride).copied().collect(),
    })
}

/// Flags grip values outside `[-6, 0]` and stores the flags on the series.
pub fn validate_grip(series: &mut KinematicSeries) -> &[GripFlags] {
    series.anomalies = series
        .samples
        .iter()
        .map(|s| GripFlags {
            left: grip_anomaly(s.left.grip),
            right: grip_anomaly(s.right.grip),
        })
        .collect();
    &series.anomalies
}
