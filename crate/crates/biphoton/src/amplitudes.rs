//! Closed-form steady-state two-photon probability amplitudes and the joint
//! spectral density built from them.
//!
//! The amplitude for an ordered pair of modes is assembled from six
//! Lorentzian blocks: four single-photon resonances of the hybrid states
//! (symmetric/antisymmetric numerators over the `omega0 +/- V` lines) and two
//! energy-conserving blocks describing pair emission through virtual
//! intermediate states. All stored amplitudes are reduced: the per-photon
//! scalar frequency prefactor and the quantization volume are stripped and
//! reattached analytically inside [`probability_density`], which keeps the
//! numbers O(1) and eliminates the dipole magnitude entirely.

use crate::emitters::{Couplings, Emitter, EmitterPair};
use crate::modes::{projection, PhotonMode, Vec3};
use crate::{C64, Error, Result};

/// The six Lorentzian constituents of the two-photon amplitude for one mode,
/// in reduced units. The `*_zero` blocks depend on the partner mode's
/// detuning through the energy-conservation denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzBlock {
    pub s_plus: C64,
    pub s_minus: C64,
    pub a_plus: C64,
    pub a_minus: C64,
    pub s_zero: C64,
    pub a_zero: C64,
}

/// Evaluates the Lorentzian blocks of `mode`, with `partner_detuning` the
/// detuning of the other photon of the pair.
///
/// Denominators are formed directly in detuning variables: the `+` blocks
/// carry `rate_plus/2 + i(V - detuning)`, the `-` blocks
/// `rate_minus/2 + i(-V - detuning)`, and the zero blocks
/// `1 - i(detuning + partner_detuning)`; every real part is a positive decay
/// rate, so no poles lie on the integration path.
pub fn lorentz_blocks(
    pair: &EmitterPair,
    couplings: &Couplings,
    mode: &PhotonMode,
    partner_detuning: f64,
) -> LorentzBlock {
    let p1 = projection(pair, mode, Emitter::First).value;
    let p2 = projection(pair, mode, Emitter::Second).value;
    let sum = p1 + p2;
    let diff = p1 - p2;
    let den_plus = C64::new(couplings.rate_plus / 2.0, couplings.v - mode.detuning);
    let den_minus = C64::new(couplings.rate_minus / 2.0, -couplings.v - mode.detuning);
    let den_zero = C64::new(1.0, -(mode.detuning + partner_detuning));
    LorentzBlock {
        s_plus: sum / den_plus,
        s_minus: sum / den_minus,
        a_plus: diff / den_plus,
        a_minus: diff / den_minus,
        s_zero: sum / den_zero,
        a_zero: diff / den_zero,
    }
}

/// Reduced two-photon amplitude for an ordered pair of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePairAmplitude {
    pub value: C64,
    /// Double-counting weight: 2 for bitwise-identical modes, else 1.
    pub einstein: f64,
    pub modes: (PhotonMode, PhotonMode),
}

fn einstein_weight(a: &PhotonMode, b: &PhotonMode) -> f64 {
    if a == b {
        2.0
    } else {
        1.0
    }
}

/// Steady-state reduced two-photon amplitude. Manifestly symmetric under
/// simultaneous swap of the two modes.
pub fn cgg_steady(
    pair: &EmitterPair,
    couplings: &Couplings,
    mode_a: &PhotonMode,
    mode_b: &PhotonMode,
) -> ModePairAmplitude {
    let ba = lorentz_blocks(pair, couplings, mode_a, mode_b.detuning);
    let bb = lorentz_blocks(pair, couplings, mode_b, mode_a.detuning);
    let eps = einstein_weight(mode_a, mode_b);
    let s_part = ba.s_minus * (bb.s_plus - bb.s_zero) + bb.s_minus * (ba.s_plus - ba.s_zero);
    let a_part = ba.a_plus * (bb.a_minus - bb.a_zero) + bb.a_plus * (ba.a_minus - ba.a_zero);
    ModePairAmplitude {
        value: (-s_part + a_part) / (2.0 * eps),
        einstein: eps,
        modes: (mode_a.clone(), mode_b.clone()),
    }
}

/// Pre-steady-state amplitude at finite time `t` (units of `1/gamma0`): the
/// same block products, each gated by its `1 - exp(-denominator * t)` factor.
/// Vanishes at `t = 0` and converges exponentially to [`cgg_steady`].
pub fn cgg_time_dependent(
    pair: &EmitterPair,
    couplings: &Couplings,
    mode_a: &PhotonMode,
    mode_b: &PhotonMode,
    t: f64,
) -> C64 {
    let ba = lorentz_blocks(pair, couplings, mode_a, mode_b.detuning);
    let bb = lorentz_blocks(pair, couplings, mode_b, mode_a.detuning);
    let eps = einstein_weight(mode_a, mode_b);
    let gate = |den: C64| C64::new(1.0, 0.0) - (-den * t).exp();
    let den_plus = |m: &PhotonMode| C64::new(couplings.rate_plus / 2.0, couplings.v - m.detuning);
    let den_minus =
        |m: &PhotonMode| C64::new(couplings.rate_minus / 2.0, -couplings.v - m.detuning);
    let den_zero = C64::new(1.0, -(mode_a.detuning + mode_b.detuning));

    let s_part = gate(den_plus(mode_b)) * ba.s_minus * bb.s_plus
        + gate(den_plus(mode_a)) * bb.s_minus * ba.s_plus;
    let a_part = gate(den_minus(mode_b)) * ba.a_plus * bb.a_minus
        + gate(den_minus(mode_a)) * bb.a_plus * ba.a_minus;
    let zero_part = gate(den_zero)
        * (ba.s_minus * bb.s_zero + bb.s_minus * ba.s_zero
            - ba.a_plus * bb.a_zero
            - bb.a_plus * ba.a_zero);
    (-s_part + a_part + zero_part) / (2.0 * eps)
}

/// Spectral weight reattaching the per-photon scalar prefactors to a reduced
/// amplitude: `P = spectral_weight * |c|^2`. In reduced units the weight is
/// `(3 pi / 2)^2 / (2 pi)^6 * ((omega/omega0)(omega'/omega0))^3`, evaluated
/// at the exact mode frequencies.
pub fn spectral_weight(pair: &EmitterPair, detuning_a: f64, detuning_b: f64) -> f64 {
    let fac = {
        let a = 1.5 * std::f64::consts::PI;
        let b = 2.0 * std::f64::consts::PI;
        a * a / b.powi(6)
    };
    let wa = 1.0 + detuning_a / pair.omega0_over_gamma0;
    let wb = 1.0 + detuning_b / pair.omega0_over_gamma0;
    fac * (wa * wb).powi(3)
}

/// Joint spectral probability density of pair emission into the two modes,
/// per unit solid angle squared and per unit wavenumber squared, with the
/// wavenumber in units of `gamma0 / c_medium`.
pub fn probability_density(
    pair: &EmitterPair,
    couplings: &Couplings,
    mode_a: &PhotonMode,
    mode_b: &PhotonMode,
) -> f64 {
    let amp = cgg_steady(pair, couplings, mode_a, mode_b);
    spectral_weight(pair, mode_a.detuning, mode_b.detuning) * amp.value.norm_sqr()
}

/// Same density expressed per vacuum wavenumber squared (`gamma0 / c_vac`
/// units): larger by `n^2`.
pub fn probability_density_vacuum(
    pair: &EmitterPair,
    couplings: &Couplings,
    mode_a: &PhotonMode,
    mode_b: &PhotonMode,
) -> f64 {
    let n = pair.refractive_index;
    n * n * probability_density(pair, couplings, mode_a, mode_b)
}

/// Relative phase between the co-polarized x and z two-photon amplitudes at
/// detection directions +/-y, wrapped to `(-pi, pi]`.
pub fn relative_phase(
    pair: &EmitterPair,
    couplings: &Couplings,
    detuning_a: f64,
    detuning_b: f64,
) -> Result<f64> {
    let cxx = cgg_steady(
        pair,
        couplings,
        &PhotonMode::along_y(1.0, detuning_a, true),
        &PhotonMode::along_y(-1.0, detuning_b, true),
    )
    .value;
    let czz = cgg_steady(
        pair,
        couplings,
        &PhotonMode::along_y(1.0, detuning_a, false),
        &PhotonMode::along_y(-1.0, detuning_b, false),
    )
    .value;
    const FLOOR: f64 = 1e-300;
    if cxx.norm() < FLOOR || czz.norm() < FLOOR {
        return Err(Error::UndefinedPhase(FLOOR));
    }
    let mut d = cxx.arg() - czz.arg();
    if d <= -std::f64::consts::PI {
        d += 2.0 * std::f64::consts::PI;
    } else if d > std::f64::consts::PI {
        d -= 2.0 * std::f64::consts::PI;
    }
    Ok(d)
}

/// Classical point-dipole radiation pattern `sin^2` of the angle between the
/// dipole orientation and the emission direction, normalized to 1.
pub fn dipole_radiation_pattern(orientation: &Vec3, theta: f64, phi: f64) -> f64 {
    let k = crate::modes::direction(theta, phi);
    let n = crate::modes::dot(orientation, orientation).sqrt();
    let c = crate::modes::dot(orientation, &k) / n;
    1.0 - c * c
}
