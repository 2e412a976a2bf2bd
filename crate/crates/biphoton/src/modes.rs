//! Photon modes (direction, detuning, polarization) and the per-emitter
//! coupling projections that enter the amplitude formulas.

use crate::emitters::{Emitter, EmitterPair};
use crate::{C64, Error, Result};

pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: Vec3) -> Vec3 {
    let n = norm(&a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Propagation direction for polar angle `theta` from z and azimuth `phi`
/// from x.
pub fn direction(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Choice of transverse polarization basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLabel {
    /// `(x, z)` — valid only for propagation along +/-y.
    XzAtY,
    /// Transverse-electric / transverse-magnetic relative to the plane of
    /// incidence spanned by the direction and the y-axis (lens normal).
    TeTm,
    /// The polar/azimuthal pair of the spherical coordinate system.
    Spherical,
}

/// An orthonormal transverse pair for a given propagation direction.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationBasis {
    pub e1: Vec3,
    pub e2: Vec3,
    pub label: BasisLabel,
}

const AXIS_TOL: f64 = 1e-9;

/// Builds the requested transverse basis at direction `(theta, phi)`.
pub fn basis_for(theta: f64, phi: f64, label: BasisLabel) -> Result<PolarizationBasis> {
    let k = direction(theta, phi);
    match label {
        BasisLabel::XzAtY => {
            if k[0].abs() > AXIS_TOL || (1.0 - k[1].abs()) > AXIS_TOL || k[2].abs() > AXIS_TOL {
                return Err(Error::InvalidDirection {
                    theta,
                    phi,
                    msg: "the x/z basis is transverse only for propagation along +/-y".into(),
                });
            }
            Ok(PolarizationBasis {
                e1: [1.0, 0.0, 0.0],
                e2: [0.0, 0.0, 1.0],
                label,
            })
        }
        BasisLabel::Spherical => {
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            Ok(PolarizationBasis {
                e1: [-ct * cp, -ct * sp, st],
                e2: [sp, -cp, 0.0],
                label,
            })
        }
        BasisLabel::TeTm => {
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            // degenerate when the plane of incidence collapses (k along +/-y)
            let d2 = ct * ct + st * st * cp * cp;
            if d2 < AXIS_TOL * AXIS_TOL {
                return Err(Error::DegenerateBasis { theta, phi });
            }
            let te = normalize([ct, 0.0, -st * cp]);
            let tm = normalize([st * st * cp * sp, -d2, st * ct * sp]);
            Ok(PolarizationBasis { e1: te, e2: tm, label })
        }
    }
}

/// A single electromagnetic mode: direction, detuning from the bare
/// transition frequency (units of `gamma0`), and a real transverse
/// polarization unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonMode {
    pub theta: f64,
    pub phi: f64,
    /// `omega - omega0`, in units of `gamma0`.
    pub detuning: f64,
    pub pol: Vec3,
}

impl PhotonMode {
    pub fn new(theta: f64, phi: f64, detuning: f64, pol: Vec3) -> Result<Self> {
        let k = direction(theta, phi);
        if (norm(&pol) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "polarization vector must be unit length, |pol| = {}",
                norm(&pol)
            )));
        }
        if dot(&k, &pol).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "polarization must be transverse, pol.k = {:e}",
                dot(&k, &pol)
            )));
        }
        Ok(PhotonMode { theta, phi, detuning, pol })
    }

    /// Mode propagating along +y (`sign > 0`) or -y, polarized along x or z.
    pub fn along_y(sign: f64, detuning: f64, pol_x: bool) -> Self {
        let phi = if sign >= 0.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            -std::f64::consts::FRAC_PI_2
        };
        PhotonMode {
            theta: std::f64::consts::FRAC_PI_2,
            phi,
            detuning,
            pol: if pol_x { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] },
        }
    }

    pub fn khat(&self) -> Vec3 {
        direction(self.theta, self.phi)
    }

    /// Full frequency in units of `gamma0`, given the pair's `omega0`.
    pub fn omega(&self, omega0_over_gamma0: f64) -> f64 {
        omega0_over_gamma0 + self.detuning
    }
}

/// Reduced conjugated light-matter coupling of one emitter to one mode:
/// `(mu_j . e) exp(-i k . r_j)`, with the scalar frequency prefactor and the
/// quantization-volume factor stripped (they are reattached analytically in
/// the spectral density).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingProjection {
    pub value: C64,
}

/// Coupling projection of `which` emitter onto `mode`. The wavevector
/// magnitude carries the exact mode frequency, so the phase argument is
/// `2 pi n (1 + detuning/omega0) khat . r_j` with positions in wavelength
/// units.
pub fn projection(pair: &EmitterPair, mode: &PhotonMode, which: Emitter) -> CouplingProjection {
    let k = mode.khat();
    let r = pair.position(which);
    let mu = pair.dipole(which);
    let phase = 2.0 * std::f64::consts::PI
        * pair.refractive_index
        * (1.0 + mode.detuning / pair.omega0_over_gamma0)
        * dot(&k, &r);
    let amp = dot(&mu, &mode.pol);
    CouplingProjection {
        value: amp * C64::new(0.0, -phase).exp(),
    }
}
