//! Spectral filtering, frequency-erasing polarization tomography, the lens
//! rotation for off-axis detection, and two-qubit entanglement metrics.
//!
//! One detector (Alice) collects light near +y behind a Lorentzian filter
//! centered on the upper hybrid line; the other (Bob) sits at -y behind a
//! filter on the lower line. Conditioning on one photon at each detector and
//! discarding frequency information leaves a 4x4 polarization density matrix
//! over the ordered basis (xx, xz, zx, zz), from which concurrence, Bell-state
//! fidelity, and purity are computed.

use crate::amplitudes::cgg_steady;
use crate::emitters::{Couplings, EmitterPair};
use crate::integration::{integrate_2d, IntegralResult, QuadratureSpec};
use crate::modes::{basis_for, direction, BasisLabel, PhotonMode};
use crate::{C64, Error, Result};
use nalgebra::{Matrix4, Vector4};

/// The two detection filters: a common linewidth and one center per arm,
/// stored as detunings from the bare transition frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterPair {
    /// Full filter linewidth, units of `gamma0`.
    pub gamma_filter: f64,
    /// Center of Alice's filter (detuning), normally `+V`.
    pub center_a: f64,
    /// Center of Bob's filter (detuning), normally `-V`.
    pub center_b: f64,
}

impl FilterPair {
    /// Filters centered on the two hybrid lines.
    pub fn at_hybrid_lines(couplings: &Couplings, gamma_filter: f64) -> Result<Self> {
        if !(gamma_filter > 0.0) {
            return Err(Error::InvalidParameter("filter linewidth must be > 0".into()));
        }
        Ok(FilterPair {
            gamma_filter,
            center_a: couplings.v,
            center_b: -couplings.v,
        })
    }
}

/// Lorentzian field transmission `(G/2) / ((G/2) + i(omega - center))`,
/// in detuning variables. Unity on resonance, magnitude `1/sqrt(2)` at
/// half-linewidth detuning.
pub fn filter_profile(detuning: f64, center: f64, gamma_filter: f64) -> C64 {
    let hw = gamma_filter / 2.0;
    C64::new(hw, 0.0) / C64::new(hw, detuning - center)
}

/// Detection directions: Alice's is free (forward hemisphere, `khat.y > 0`);
/// Bob's is fixed at -y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionGeometry {
    pub alice_theta: f64,
    pub alice_phi: f64,
}

impl DetectionGeometry {
    pub fn on_axis() -> Self {
        DetectionGeometry {
            alice_theta: std::f64::consts::FRAC_PI_2,
            alice_phi: std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn with_alice(theta: f64, phi: f64) -> Self {
        DetectionGeometry { alice_theta: theta, alice_phi: phi }
    }

    fn is_on_axis(&self) -> bool {
        (self.alice_theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12
            && (self.alice_phi - std::f64::consts::FRAC_PI_2).abs() < 1e-12
    }
}

/// 2x2 orthogonal map from (TE, TM-after-lens) amplitudes to the (x, z)
/// amplitudes Alice measures behind a lens whose axis is +y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensRotation {
    pub r: [[f64; 2]; 2],
}

/// Rotation of Alice's polarization modes by a lens normal to +y, for light
/// arriving from direction `(theta, phi)` with `khat.y > 0`.
///
/// The TE mode is untouched by the lens; the TM mode lands in the xz-plane.
/// Exactly on axis the TE/TM construction degenerates and the measured basis
/// already is (x, z), so the identity is returned.
pub fn lens_rotation(theta: f64, phi: f64) -> Result<LensRotation> {
    let k = direction(theta, phi);
    if DetectionGeometry::with_alice(theta, phi).is_on_axis() {
        return Ok(LensRotation { r: [[1.0, 0.0], [0.0, 1.0]] });
    }
    if k[1] <= 1e-12 {
        return Err(Error::InvalidDirection {
            theta,
            phi,
            msg: "lens detection requires khat.y > 0".into(),
        });
    }
    let (st, ct) = theta.sin_cos();
    let cp = phi.cos();
    let den = (ct * ct + st * st * cp * cp).sqrt();
    if den < 1e-12 {
        // k along +/-y: unreachable given the on-axis special case above,
        // except for directions within 1e-12 of the axis
        return Err(Error::DegenerateBasis { theta, phi });
    }
    Ok(LensRotation {
        r: [[ct / den, st * cp / den], [-st * cp / den, ct / den]],
    })
}

/// Post-selected two-photon polarization density matrix over the ordered
/// basis (xx, xz, zx, zz), plus its pre-normalization trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationDensityMatrix {
    pub m: Matrix4<C64>,
    /// Trace of the unnormalized matrix (the pair-detection weight).
    pub n_factor: f64,
    /// Worst per-element quadrature error estimate, relative to `n_factor`.
    pub max_element_error: f64,
    /// False when some element integral hit the subdivision budget.
    pub converged: bool,
}

const PSD_TOL: f64 = 1e-10;

impl PolarizationDensityMatrix {
    /// Wraps an explicitly built matrix, enforcing Hermiticity, unit trace,
    /// and positive semidefiniteness within `1e-10`.
    pub fn from_matrix(m: Matrix4<C64>, n_factor: f64) -> Result<Self> {
        if !(n_factor > 0.0) {
            return Err(Error::InvalidParameter("n_factor must be > 0".into()));
        }
        let herm_dev = (m - m.adjoint()).norm();
        if herm_dev > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "matrix is not Hermitian: deviation {herm_dev:e}"
            )));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::InvalidParameter(format!("trace must be 1, got {tr}")));
        }
        let min_eig = hermitian_eigenvalues(&m)?
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if min_eig < -PSD_TOL {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min_eig });
        }
        Ok(PolarizationDensityMatrix { m, n_factor, max_element_error: 0.0, converged: true })
    }
}

fn hermitian_eigenvalues(m: &Matrix4<C64>) -> Result<Vector4<f64>> {
    nalgebra::linalg::SymmetricEigen::try_new(*m, f64::EPSILON, 200)
        .map(|e| e.eigenvalues)
        .ok_or(Error::EigenFailed)
}

// Upper-triangle element order over (xx, xz, zx, zz).
const UPPER: [(usize, usize); 10] = [
    (0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3),
];

/// Frequency-erasing tomography of the filtered pair state.
///
/// Each independent element is the 2D spectral integral of
/// `[F_A F_B c]_(rr') * conj([F_A F_B c]_(ss'))` over both detunings; the ten
/// upper-triangle elements are accumulated in a single vector-valued adaptive
/// pass and the rest filled by conjugate symmetry. `N` is the trace before
/// normalization. For off-axis Alice directions the amplitudes are computed
/// in the TE/TM basis and rotated into (x, z) by [`lens_rotation`].
pub fn tomography(
    pair: &EmitterPair,
    couplings: &Couplings,
    filters: &FilterPair,
    geometry: &DetectionGeometry,
    spec: &QuadratureSpec,
) -> Result<PolarizationDensityMatrix> {
    let (th, ph) = (geometry.alice_theta, geometry.alice_phi);
    let (alice_pols, rot) = if geometry.is_on_axis() {
        let b = basis_for(th, ph, BasisLabel::XzAtY)?;
        ([b.e1, b.e2], LensRotation { r: [[1.0, 0.0], [0.0, 1.0]] })
    } else {
        let b = basis_for(th, ph, BasisLabel::TeTm)?;
        ([b.e1, b.e2], lens_rotation(th, ph)?)
    };
    let bob = basis_for(
        std::f64::consts::FRAC_PI_2,
        -std::f64::consts::FRAC_PI_2,
        BasisLabel::XzAtY,
    )?;
    let bob_pols = [bob.e1, bob.e2];

    let g = filters.gamma_filter;
    let v = couplings.v;
    let w = spec
        .window_halfwidth
        .max(50.0 * g.max(1.0).max(v.abs()));
    let (ca, cb) = (filters.center_a, filters.center_b);

    let line_scales: Vec<f64> = {
        let mut s = vec![0.25, 1.0, 4.0, 16.0, 64.0];
        // resolve subradiant/superradiant linewidths when they are narrow
        s.push(couplings.rate_minus / 2.0);
        s.push(couplings.rate_plus / 2.0);
        s
    };
    let filter_scales: Vec<f64> = (0..7).map(|k| g / 2.0 * 4.0_f64.powi(k)).collect();

    let mut outer_bps = Vec::new();
    push_ladder(&mut outer_bps, ca, &filter_scales);
    for c in [-v, 0.0, v] {
        push_ladder(&mut outer_bps, c, &line_scales);
    }

    let amps = |da: f64, db: f64| -> [C64; 4] {
        // Alice blocks for her two basis vectors, Bob for his; then the lens
        // rotation mixes Alice's index
        let mut raw = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, ea) in alice_pols.iter().enumerate() {
            let ma = PhotonMode { theta: th, phi: ph, detuning: da, pol: *ea };
            for (j, eb) in bob_pols.iter().enumerate() {
                let mb = PhotonMode {
                    theta: std::f64::consts::FRAC_PI_2,
                    phi: -std::f64::consts::FRAC_PI_2,
                    detuning: db,
                    pol: *eb,
                };
                raw[i][j] = cgg_steady(pair, couplings, &ma, &mb).value;
            }
        }
        let r = rot.r;
        let mut out = [C64::new(0.0, 0.0); 4];
        for j in 0..2 {
            let cx = raw[0][j] * r[0][0] + raw[1][j] * r[0][1];
            let cz = raw[0][j] * r[1][0] + raw[1][j] * r[1][1];
            out[j] = cx; // (x, bob_j)
            out[2 + j] = cz; // (z, bob_j)
        }
        out
    };

    let result: IntegralResult<[C64; 10]> = integrate_2d(
        |da, db| {
            let c = amps(da, db);
            let fa = filter_profile(da, ca, g).norm_sqr();
            let fb = filter_profile(db, cb, g).norm_sqr();
            let wgt = fa * fb;
            std::array::from_fn(|k| {
                let (i, j) = UPPER[k];
                c[i] * c[j].conj() * wgt
            })
        },
        ca - w,
        ca + w,
        cb - w,
        cb + w,
        &outer_bps,
        |da| {
            let mut bps = Vec::new();
            push_ladder(&mut bps, cb, &filter_scales);
            for c in [-v, 0.0, v, -da] {
                push_ladder(&mut bps, c, &line_scales);
            }
            bps
        },
        spec,
    );

    let mut m = Matrix4::zeros();
    for (k, &(i, j)) in UPPER.iter().enumerate() {
        m[(i, j)] = result.value[k];
        if i != j {
            m[(j, i)] = result.value[k].conj();
        } else {
            m[(i, j)] = C64::new(result.value[k].re, 0.0);
        }
    }
    let n_factor = m.trace().re;
    if !(n_factor > 0.0) || !n_factor.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "unnormalized trace must be positive, got {n_factor:e}"
        )));
    }
    let m = m / C64::new(n_factor, 0.0);
    let eigs = hermitian_eigenvalues(&m)?;
    let min_eig = eigs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min_eig < -PSD_TOL {
        return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min_eig });
    }
    Ok(PolarizationDensityMatrix {
        m,
        n_factor,
        max_element_error: result.abs_error / n_factor,
        converged: result.converged,
    })
}

fn push_ladder(points: &mut Vec<f64>, center: f64, scales: &[f64]) {
    points.push(center);
    for &h in scales {
        points.push(center - h);
        points.push(center + h);
    }
}

/// Two-qubit concurrence of the polarization state.
///
/// The spin-flipped matrix is conjugated by `sigma_y (x) sigma_y`; the
/// eigenvalues of `rho rho~` are obtained from the equivalent Hermitian
/// problem `sqrt(rho) rho~ sqrt(rho)`, whose spectrum is real nonnegative by
/// construction. Eigenvalues below 1e-12 are clamped to zero before the
/// square roots.
pub fn concurrence(rho: &PolarizationDensityMatrix) -> Result<f64> {
    let eig = nalgebra::linalg::SymmetricEigen::try_new(rho.m, f64::EPSILON, 200)
        .ok_or(Error::EigenFailed)?;
    let sqrt_diag = Vector4::from_iterator(
        eig.eigenvalues.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)),
    );
    let sqrt_rho = &eig.eigenvectors * Matrix4::from_diagonal(&sqrt_diag) * eig.eigenvectors.adjoint();
    let rho_tilde = spin_flip(&rho.m);
    let h = &sqrt_rho * rho_tilde * &sqrt_rho;
    let mut lambdas: Vec<f64> = hermitian_eigenvalues(&h)?
        .iter()
        .map(|&l| if l < 1e-12 { 0.0 } else { l })
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let c = lambdas[0].sqrt() - lambdas[1].sqrt() - lambdas[2].sqrt() - lambdas[3].sqrt();
    Ok(c.max(0.0))
}

/// `(sigma_y (x) sigma_y) conj(rho) (sigma_y (x) sigma_y)`.
fn spin_flip(m: &Matrix4<C64>) -> Matrix4<C64> {
    let yy = Matrix4::from_fn(|i, j| {
        // antidiagonal (-1, 1, 1, -1)
        if i + j == 3 {
            C64::new(if i == 0 || i == 3 { -1.0 } else { 1.0 }, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    yy * m.conjugate() * yy
}

fn bell_expectation(rho: &PolarizationDensityMatrix) -> f64 {
    // <psi|rho|psi> with psi = (|xx> - |zz>)/sqrt(2)
    let m = &rho.m;
    0.5 * (m[(0, 0)] + m[(3, 3)] - m[(0, 3)] - m[(3, 0)]).re
}

/// Squared overlap with the Bell state `(|xx> - |zz>)/sqrt(2)`:
/// `|<psi|rho|psi>|^2`.
pub fn fidelity(rho: &PolarizationDensityMatrix) -> f64 {
    let e = bell_expectation(rho);
    e * e
}

/// The conventional (unsquared) overlap `<psi|rho|psi>` with the same Bell
/// state, reported alongside [`fidelity`] for comparison.
pub fn fidelity_unsquared(rho: &PolarizationDensityMatrix) -> f64 {
    bell_expectation(rho)
}

/// `Tr(rho^2)`, between 1/4 (maximally mixed) and 1 (pure).
pub fn purity(rho: &PolarizationDensityMatrix) -> f64 {
    (rho.m * rho.m).trace().re
}
