//! Emitter-pair configuration and the radiative couplings it induces.
//!
//! Two identical two-level emitters sit on the z-axis at `+/- r12/2`, with
//! transition dipole moments confined to the xz-plane at angles `alpha1`,
//! `alpha2` from the x-axis. The electromagnetic vacuum of the host medium
//! induces a coherent dipole-dipole coupling `V` and a dissipative coupling
//! `gamma12`, which split the single-excitation manifold into hybrid states
//! at frequencies `omega0 +/- V` decaying at rates `gamma0 +/- gamma12`.

use crate::{Error, Result};

const SPEED_OF_LIGHT: f64 = 299_792_458.0; // m/s, vacuum

/// Physical parameters of one emitter species plus its host medium.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalPreset {
    /// Label, e.g. "dbatt".
    pub name: String,
    /// Spontaneous emission rate over 2*pi, in Hz.
    pub gamma0_hz: f64,
    /// Vacuum transition wavelength, in meters.
    pub lambda0_vac: f64,
    /// Refractive index of the host medium.
    pub refractive_index: f64,
}

impl PhysicalPreset {
    /// Dibenzanthanthrene molecules in a naphthalene crystal.
    pub fn dbatt() -> Self {
        PhysicalPreset {
            name: "dbatt".into(),
            gamma0_hz: 21.5e6,
            lambda0_vac: 618e-9,
            refractive_index: 1.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0_hz > 0.0) {
            return Err(Error::InvalidParameter("gamma0_hz must be > 0".into()));
        }
        if !(self.lambda0_vac > 0.0) {
            return Err(Error::InvalidParameter("lambda0_nm must be > 0".into()));
        }
        if !(self.refractive_index >= 1.0) {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        Ok(())
    }

    /// Transition frequency in units of the spontaneous emission rate
    /// (both taken over 2*pi, so the ratio is plain).
    pub fn omega0_over_gamma0(&self) -> f64 {
        SPEED_OF_LIGHT / self.lambda0_vac / self.gamma0_hz
    }

    /// Parses a plain-text `key = value` preset config. Recognized keys:
    /// `gamma0_hz`, `lambda0_nm`, `n`, `alpha_dw`; `#` starts a comment.
    /// Unset keys fall back to the built-in dbatt values (alpha_dw = 1).
    /// Returns the preset and the Debye-Waller/Franck-Condon factor.
    pub fn from_config(text: &str) -> Result<(Self, f64)> {
        let mut preset = PhysicalPreset::dbatt();
        preset.name = "config".into();
        let mut alpha_dw = 1.0;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::ConfigParse {
                line: i + 1,
                msg: "expected `key = value`".into(),
            })?;
            let value: f64 = value.trim().parse().map_err(|e| Error::ConfigParse {
                line: i + 1,
                msg: format!("bad number: {e}"),
            })?;
            match key.trim() {
                "gamma0_hz" => preset.gamma0_hz = value,
                "lambda0_nm" => preset.lambda0_vac = value * 1e-9,
                "n" => preset.refractive_index = value,
                "alpha_dw" => alpha_dw = value,
                other => {
                    return Err(Error::ConfigParse {
                        line: i + 1,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        preset.validate()?;
        if !(alpha_dw > 0.0 && alpha_dw <= 1.0) {
            return Err(Error::InvalidParameter("alpha_dw must be in (0, 1]".into()));
        }
        Ok((preset, alpha_dw))
    }
}

/// Which of the two emitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Emitter {
    First,
    Second,
}

/// Geometry and reduced parameters of the interacting pair.
///
/// `r12` is in units of the vacuum transition wavelength; the separation
/// vector is fixed along z. The emitters sit symmetrically about `center`
/// (the origin by default); every observable is independent of `center`,
/// which exists so that origin independence can be exercised directly.
#[derive(Debug, Clone, PartialEq)]
pub struct EmitterPair {
    pub alpha1: f64,
    pub alpha2: f64,
    pub r12: f64,
    pub omega0_over_gamma0: f64,
    pub alpha_dw: f64,
    pub refractive_index: f64,
    pub center: [f64; 3],
}

impl EmitterPair {
    /// Pair with the default transition frequency of the dbatt preset and
    /// `alpha_dw = 1`.
    pub fn new(alpha1: f64, alpha2: f64, r12: f64, refractive_index: f64) -> Result<Self> {
        let preset = PhysicalPreset::dbatt();
        let pair = EmitterPair {
            alpha1,
            alpha2,
            r12,
            omega0_over_gamma0: preset.omega0_over_gamma0(),
            alpha_dw: 1.0,
            refractive_index,
            center: [0.0; 3],
        };
        pair.validate()?;
        Ok(pair)
    }

    pub fn from_preset(
        preset: &PhysicalPreset,
        alpha1: f64,
        alpha2: f64,
        r12: f64,
        alpha_dw: f64,
    ) -> Result<Self> {
        preset.validate()?;
        let pair = EmitterPair {
            alpha1,
            alpha2,
            r12,
            omega0_over_gamma0: preset.omega0_over_gamma0(),
            alpha_dw,
            refractive_index: preset.refractive_index,
            center: [0.0; 3],
        };
        pair.validate()?;
        Ok(pair)
    }

    /// Two perpendicular dipoles (`alpha1 = -alpha2 = pi/4`), dbatt medium.
    pub fn perpendicular(r12: f64) -> Result<Self> {
        Self::new(std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4, r12, 1.5)
    }

    pub fn with_alpha_dw(mut self, alpha_dw: f64) -> Result<Self> {
        self.alpha_dw = alpha_dw;
        self.validate()?;
        Ok(self)
    }

    pub fn with_r12(mut self, r12: f64) -> Result<Self> {
        self.r12 = r12;
        self.validate()?;
        Ok(self)
    }

    /// Translates both emitters rigidly; observables must not change.
    pub fn with_center(mut self, center: [f64; 3]) -> Self {
        self.center = center;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.r12 > 0.0) {
            return Err(Error::InvalidParameter(
                "r12 must be > 0 (dipole-dipole coupling diverges at zero separation)".into(),
            ));
        }
        if !(self.alpha_dw > 0.0 && self.alpha_dw <= 1.0) {
            return Err(Error::InvalidParameter("alpha_dw must be in (0, 1]".into()));
        }
        if !(self.refractive_index >= 1.0) {
            return Err(Error::InvalidParameter("refractive index must be >= 1".into()));
        }
        if !(self.omega0_over_gamma0 > 0.0) {
            return Err(Error::InvalidParameter("omega0/gamma0 must be > 0".into()));
        }
        Ok(())
    }

    /// Dimensionless phase argument `k0 * r12 = 2 pi n (r12 / lambda0)`.
    pub fn k0_r12(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.refractive_index * self.r12
    }

    /// Unit dipole orientation of one emitter (in the xz-plane).
    pub fn dipole(&self, which: Emitter) -> [f64; 3] {
        let a = match which {
            Emitter::First => self.alpha1,
            Emitter::Second => self.alpha2,
        };
        [a.cos(), 0.0, a.sin()]
    }

    /// Emitter position in units of the vacuum wavelength.
    pub fn position(&self, which: Emitter) -> [f64; 3] {
        let half = self.r12 / 2.0;
        let z = match which {
            Emitter::First => half,
            Emitter::Second => -half,
        };
        [self.center[0], self.center[1], self.center[2] + z]
    }
}

/// Radiative couplings and the hybrid-level quantities derived from them,
/// all in units of `gamma0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    /// Coherent dipole-dipole coupling.
    pub v: f64,
    /// Dissipative (correlated-decay) coupling.
    pub gamma12: f64,
    /// Hybrid transition frequency `omega0 + V`.
    pub omega_plus: f64,
    /// Hybrid transition frequency `omega0 - V`.
    pub omega_minus: f64,
    /// Decay rate `gamma0 + gamma12` of the symmetric hybrid state.
    pub rate_plus: f64,
    /// Decay rate `gamma0 - gamma12` of the antisymmetric hybrid state.
    pub rate_minus: f64,
}

fn coupling_terms(alpha1: f64, alpha2: f64, x: f64) -> (f64, f64) {
    let cc = alpha1.cos() * alpha2.cos();
    let q = cc - 2.0 * alpha1.sin() * alpha2.sin();
    let (s, c) = x.sin_cos();
    let v = 0.75 * (-cc * c / x + q * (s / (x * x) + c / (x * x * x)));
    let g12 = 1.5 * (cc * s / x + q * (c / (x * x) - s / (x * x * x)));
    (v, g12)
}

/// Coherent dipole-dipole coupling `V`, in units of `gamma0`.
///
/// Scales linearly with the Debye-Waller/Franck-Condon factor of the pair.
/// Divergent as `r12 -> 0`; zero separation is rejected at construction.
pub fn coherent_coupling(pair: &EmitterPair) -> f64 {
    pair.alpha_dw * coupling_terms(pair.alpha1, pair.alpha2, pair.k0_r12()).0
}

/// Dissipative coupling `gamma12`, in units of `gamma0`. Finite for all
/// separations; `|gamma12| <= 1` for unit dipoles.
pub fn dissipative_coupling(pair: &EmitterPair) -> f64 {
    pair.alpha_dw * coupling_terms(pair.alpha1, pair.alpha2, pair.k0_r12()).1
}

/// Packages both couplings together with the hybrid-level frequencies and
/// decay rates.
pub fn hybrid_levels(pair: &EmitterPair) -> Couplings {
    let v = coherent_coupling(pair);
    let gamma12 = dissipative_coupling(pair);
    Couplings {
        v,
        gamma12,
        omega_plus: pair.omega0_over_gamma0 + v,
        omega_minus: pair.omega0_over_gamma0 - v,
        rate_plus: 1.0 + gamma12,
        rate_minus: 1.0 - gamma12,
    }
}

/// Finds the separation at which the pair with `alpha_dw_new` reproduces the
/// current coherent coupling, to a relative tolerance of 1e-10.
///
/// Scans log-spaced separations over `(1e-4, 10]` wavelengths for a sign
/// change starting from the near field, then bisects on `ln r12`. Errors when
/// the target is unreachable on that interval (e.g. `alpha_dw_new` too small).
pub fn rescale_r12_for_fixed_v(pair: &EmitterPair, alpha_dw_new: f64) -> Result<f64> {
    if !(alpha_dw_new > 0.0 && alpha_dw_new <= 1.0) {
        return Err(Error::InvalidParameter("alpha_dw must be in (0, 1]".into()));
    }
    let target = coherent_coupling(pair);
    let two_pi_n = 2.0 * std::f64::consts::PI * pair.refractive_index;
    let f = |ln_r: f64| {
        alpha_dw_new * coupling_terms(pair.alpha1, pair.alpha2, two_pi_n * ln_r.exp()).0 - target
    };
    let (lo, hi) = (1e-4_f64, 10.0_f64);
    let n_scan = 4096;
    let (mut a, mut fa) = (lo.ln(), f(lo.ln()));
    if fa == 0.0 {
        return Ok(lo);
    }
    let mut bracket = None;
    for i in 1..=n_scan {
        let b = lo.ln() + (hi.ln() - lo.ln()) * i as f64 / n_scan as f64;
        let fb = f(b);
        if fb == 0.0 {
            return Ok(b.exp());
        }
        if fa.signum() != fb.signum() {
            bracket = Some((a, b, fa));
            break;
        }
        a = b;
        fa = fb;
    }
    let (mut a, mut b, fa) = bracket.ok_or(Error::NoRoot {
        target,
        alpha_dw: alpha_dw_new,
        lo,
        hi,
    })?;
    let mut fa = fa;
    // bisection on ln r12; 80 halvings take the bracket far below 1e-10 relative
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m.exp());
        }
        if fa.signum() == fm.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if (b - a).abs() < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn perp(r12: f64) -> EmitterPair {
        EmitterPair::perpendicular(r12).unwrap()
    }

    #[test]
    fn published_coupling_anchors() {
        // frozen by independent evaluation of the coupling formulas
        let v = coherent_coupling(&perp(0.05));
        assert!((v - 11.169678141563010).abs() < 1e-12, "V = {v}");
        assert!((v - 11.17).abs() < 0.05 * 0.005 * 11.17 + 0.01); // 11.17 +- 0.5%
        let v75 = coherent_coupling(&perp(0.075));
        assert!((v75 - 3.481026604948463).abs() < 1e-12);
        assert!((v75 - 3.5).abs() / 3.5 < 0.03);
    }

    #[test]
    fn dissipative_coupling_values() {
        let g = dissipative_coupling(&perp(0.075));
        assert!((g - (-2.410311456032765e-2)).abs() < 1e-14, "g12 = {g}");
        let g = dissipative_coupling(&perp(0.05));
        assert!((g - (-1.092826857946755e-2)).abs() < 1e-14);
    }

    #[test]
    fn small_separation_limits() {
        // parallel dipoles: gamma12 -> gamma0; perpendicular: -> 0
        let par = EmitterPair::new(0.0, 0.0, 1e-3, 1.5).unwrap();
        assert!((dissipative_coupling(&par) - 1.0).abs() < 1e-4);
        assert!(dissipative_coupling(&perp(1e-3)).abs() < 1e-4);
    }

    #[test]
    fn linear_in_alpha_dw() {
        for &c in &[0.1, 0.35, 0.5, 0.9] {
            let base = perp(0.06);
            let scaled = base.clone().with_alpha_dw(c).unwrap();
            assert!((coherent_coupling(&scaled) - c * coherent_coupling(&base)).abs() < 1e-12);
            assert!((dissipative_coupling(&scaled) - c * dissipative_coupling(&base)).abs() < 1e-12);
        }
        // alpha_dw = 0 itself is out of range, but the limit is zero coupling
        let tiny = perp(0.05).with_alpha_dw(1e-12).unwrap();
        assert!(coherent_coupling(&tiny).abs() < 1e-10);
        // half the factor, half the coupling
        let half = perp(0.05).with_alpha_dw(0.5).unwrap();
        assert!((coherent_coupling(&half) - 5.584839070781505).abs() < 1e-12);
    }

    #[test]
    fn exchange_symmetry() {
        for &(a1, a2, r) in &[(0.3, 1.1, 0.07), (-0.8, 0.2, 0.4), (1.2, -1.4, 2.3)] {
            let p = EmitterPair::new(a1, a2, r, 1.5).unwrap();
            let q = EmitterPair::new(a2, a1, r, 1.5).unwrap();
            assert!((coherent_coupling(&p) - coherent_coupling(&q)).abs() < 1e-14);
            assert!((dissipative_coupling(&p) - dissipative_coupling(&q)).abs() < 1e-14);
        }
    }

    #[test]
    fn perpendicular_dissipative_suppression() {
        // |gamma12| < 0.12 over the full near-field range for perpendicular dipoles
        for i in 0..=200 {
            let r = 0.03 + (1.0 - 0.03) * i as f64 / 200.0;
            let g = dissipative_coupling(&perp(r));
            assert!(g.abs() < 0.12, "gamma12({r}) = {g}");
        }
    }

    #[test]
    fn far_field_decay() {
        for &r in &[10.0, 30.0, 100.0] {
            assert!(coherent_coupling(&perp(r)).abs() < 1.0 / r);
            assert!(dissipative_coupling(&perp(r)).abs() < 1.0 / r);
        }
    }

    #[test]
    fn hybrid_level_splitting() {
        let c = hybrid_levels(&perp(0.075));
        let split = c.omega_plus - c.omega_minus;
        assert!((split - 2.0 * c.v).abs() < 1e-8 * split.abs());
        assert!((split - 7.0).abs() / 7.0 < 0.03);
        assert!((c.rate_plus - (1.0 + c.gamma12)).abs() < 1e-15);

        // uncoupled limit: alpha_dw -> 0 collapses the splitting
        let un = hybrid_levels(&perp(0.075).with_alpha_dw(1e-14).unwrap());
        assert!((un.omega_plus - un.omega_minus).abs() < 1e-9);
        assert!((un.rate_plus - 1.0).abs() < 1e-13 && (un.rate_minus - 1.0).abs() < 1e-13);

        // subradiant limit for parallel dipoles at small separation
        let par = hybrid_levels(&EmitterPair::new(0.0, 0.0, 1e-3, 1.5).unwrap());
        assert!(par.rate_minus.abs() < 1e-4);
    }

    #[test]
    fn rescale_identity_and_half() {
        let p = perp(0.05);
        let same = rescale_r12_for_fixed_v(&p, p.alpha_dw).unwrap();
        assert!((same - 0.05).abs() < 1e-10);

        let r_half = rescale_r12_for_fixed_v(&p, 0.5).unwrap();
        assert!((r_half - 0.039491573156339).abs() < 1e-9, "r' = {r_half}");
        assert!(r_half < 0.05);
        let scaled = p.clone().with_r12(r_half).unwrap().with_alpha_dw(0.5).unwrap();
        assert!((coherent_coupling(&scaled) - coherent_coupling(&p)).abs() < 1e-9);
    }

    #[test]
    fn rescale_no_root_for_tiny_factor() {
        let p = perp(0.05);
        assert!(matches!(
            rescale_r12_for_fixed_v(&p, 1e-12),
            Err(Error::NoRoot { .. })
        ));
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(EmitterPair::new(FRAC_PI_4, -FRAC_PI_4, 0.0, 1.5).is_err());
        assert!(EmitterPair::new(FRAC_PI_4, -FRAC_PI_4, -0.1, 1.5).is_err());
        assert!(perp(0.05).with_alpha_dw(0.0).is_err());
        assert!(perp(0.05).with_alpha_dw(1.5).is_err());
    }

    #[test]
    fn preset_config_roundtrip() {
        let (preset, adw) = PhysicalPreset::from_config(
            "# a comment\n gamma0_hz = 21.5e6\nlambda0_nm=618\nn = 1.5\nalpha_dw = 0.9\n",
        )
        .unwrap();
        assert_eq!(adw, 0.9);
        assert!((preset.omega0_over_gamma0() - 2.256284022e7).abs() / 2.256284022e7 < 1e-9);
        assert!(PhysicalPreset::from_config("bogus = 1\n").is_err());
        assert!(PhysicalPreset::from_config("gamma0_hz\n").is_err());

        let dbatt = PhysicalPreset::dbatt();
        assert_eq!(dbatt.refractive_index, 1.5);
        assert_eq!(dbatt.lambda0_vac, 618e-9);
    }

    #[test]
    fn geometry_accessors() {
        let p = perp(0.075);
        assert!((p.k0_r12() - 2.0 * PI * 1.5 * 0.075).abs() < 1e-15);
        let d1 = p.dipole(Emitter::First);
        let d2 = p.dipole(Emitter::Second);
        assert!((d1[0] * d2[0] + d1[1] * d2[1] + d1[2] * d2[2]).abs() < 1e-15);
        let r1 = p.position(Emitter::First);
        let r2 = p.position(Emitter::Second);
        assert_eq!(r1[2] - r2[2], 0.075);
        let shifted = p.with_center([1.0, 2.0, 3.0]);
        assert_eq!(shifted.position(Emitter::First), [1.0, 2.0, 3.0 + 0.0375]);
    }
}
