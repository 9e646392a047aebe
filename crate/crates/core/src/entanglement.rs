//! Concurrence of the post-selected state: the general Wootters formula and
//! per-channel closed forms.

use std::fmt;

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::channels::{evolve_ab, singlet_ab, ChannelKind};
use crate::density::DensityMatrix4;
use crate::error::{Error, Result};
use crate::protocol::{deform, slocc, DeformationSpec};

const NEGATIVE_EIGEN_TOL: f64 = 1e-10;
const EIGEN_DROP: f64 = 1e-13;
const DEGENERATE_SPEC: f64 = 1e-14;
const REAL_TOL: f64 = 1e-12;

/// A concurrence in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ConcurrenceValue(f64);

impl ConcurrenceValue {
    /// Applies the `max{0, ·}` rule (and caps rounding overshoot at 1).
    pub fn new(raw: f64) -> Self {
        Self(raw.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for ConcurrenceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn spin_flip() -> Matrix4<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    // σy ⊗ σy
    Matrix4::new(z, z, z, -o, z, z, o, z, z, o, z, z, -o, z, z, z)
}

/// Wootters concurrence `max{0, s₁ - s₂ - s₃ - s₄}`.
///
/// The `sᵢ` are the square roots of the eigenvalues of `ρ(σy⊗σy)ρ*(σy⊗σy)`.
/// They are obtained as singular values of `Wᵀ(σy⊗σy)W` with `ρ = WW†`,
/// which avoids square roots of tiny, noisy eigenvalues.
pub fn wootters(rho: &DensityMatrix4) -> Result<ConcurrenceValue> {
    let eig = SymmetricEigen::new(*rho.matrix());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -NEGATIVE_EIGEN_TOL {
        return Err(Error::Contract(format!("density matrix has eigenvalue {min:e}")));
    }
    let kept: Vec<usize> = (0..4).filter(|&i| eig.eigenvalues[i] > EIGEN_DROP).collect();
    if kept.is_empty() {
        return Err(Error::Contract("density matrix has no positive eigenvalue".into()));
    }
    let w = DMatrix::from_fn(4, kept.len(), |r, c| {
        let k = kept[c];
        eig.eigenvectors[(r, k)] * Complex64::new(eig.eigenvalues[k].sqrt(), 0.0)
    });
    let sigma = DMatrix::from_fn(4, 4, |r, c| spin_flip()[(r, c)]);
    let tau = w.transpose() * sigma * &w;
    let mut s: Vec<f64> = tau.singular_values().iter().copied().collect();
    s.resize(4, 0.0);
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(ConcurrenceValue::new(s[0] - s[1] - s[2] - s[3]))
}

/// Concurrence, success probability and state produced by the full
/// evolve/deform/sLOCC pipeline.
#[derive(Clone, Debug)]
pub struct Recovery {
    pub concurrence: ConcurrenceValue,
    pub probability: f64,
    pub rho_lr: DensityMatrix4,
}

/// Runs the protocol on the singlet after noise of strength `p`.
pub fn simulate(kind: ChannelKind, spec: &DeformationSpec, p: f64) -> Result<Recovery> {
    let evolved = evolve_ab(&singlet_ab(spec.statistics()), kind, p)?;
    let outcome = slocc(&deform(&evolved, spec)?)?;
    Ok(Recovery {
        concurrence: wootters(outcome.rho_lr())?,
        probability: outcome.probability(),
        rho_lr: outcome.rho_lr().clone(),
    })
}

/// Closed-form curves for one channel and one deformation.
///
/// With `X = |lr' - ηl'r|²` and `Y = |lr' + ηl'r|²`, the post-selected state
/// is a mixture of the singlet (weight ∝ `X·w₋`) and triplet components
/// (total weight ∝ `Y·w₊`), where `(w₋, w₊)` is `(1-p, p)` for ADC,
/// `(1-p/2, p/2)` for PDC and `(1-3p/4, 3p/4)` for DEP.
#[derive(Clone, Copy, Debug)]
pub struct ClosedForms {
    kind: ChannelKind,
    spec: DeformationSpec,
    x: f64,
    y: f64,
}

impl ClosedForms {
    pub fn new(kind: ChannelKind, spec: &DeformationSpec) -> Result<Self> {
        let a = spec.l() * spec.rp();
        let b = spec.lp() * spec.r() * spec.eta();
        let x = (a - b).norm_sqr();
        let y = (a + b).norm_sqr();
        if x + y < DEGENERATE_SPEC {
            return Err(Error::Domain(
                "lr' = l'r = 0: the deformed state leaves the post-selected sector".into(),
            ));
        }
        Ok(Self { kind, spec: *spec, x, y })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// Mixing weights `(w₋, w₊)` of the singlet and triplet parts.
    fn raw_weights(&self, p: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("disturbance probability {p} outside [0, 1]")));
        }
        Ok(match self.kind {
            ChannelKind::Adc => (1.0 - p, p),
            ChannelKind::Pdc => (1.0 - p / 2.0, p / 2.0),
            ChannelKind::Dep => (1.0 - 0.75 * p, 0.75 * p),
        })
    }

    /// Weights with the limiting direction substituted wherever `mass`
    /// vanishes (one weight is then zero), so the curves stay continuous.
    fn limit_weights(&self, p: f64, mass: impl Fn(f64, f64) -> f64) -> Result<(f64, f64)> {
        let (wm, wp) = self.raw_weights(p)?;
        if mass(wm, wp) > 0.0 {
            Ok((wm, wp))
        } else if wm == 0.0 {
            Ok((1.0, 0.0))
        } else {
            Ok((0.0, 1.0))
        }
    }

    /// Weights for quantities of the post-selected state.
    fn weights(&self, p: f64) -> Result<(f64, f64)> {
        self.limit_weights(p, |wm, wp| self.x * wm + self.y * wp)
    }

    pub fn concurrence(&self, p: f64) -> Result<ConcurrenceValue> {
        let (wm, wp) = self.weights(p)?;
        let singlet = self.x * wm;
        let triplet = self.y * wp;
        let den = singlet + triplet;
        let c = match self.kind {
            ChannelKind::Adc => singlet / den,
            ChannelKind::Pdc => (singlet - triplet).abs() / den,
            ChannelKind::Dep => (singlet - triplet) / den,
        };
        Ok(ConcurrenceValue::new(c))
    }

    /// `P_LR = (X·w₋ + Y·w₊) / (C₁²·w₋ + C₂²·w₊)`.
    pub fn probability(&self, p: f64) -> Result<f64> {
        // only a vanishing deformed state needs the limit; a vanishing
        // numerator alone is a genuine zero
        let (wm, wp) =
            self.limit_weights(p, |wm, wp| self.spec.c1_sqr() * wm + self.spec.c2_sqr() * wp)?;
        let num = self.x * wm + self.y * wp;
        let den = self.spec.c1_sqr() * wm + self.spec.c2_sqr() * wp;
        Ok((num / den).clamp(0.0, 1.0))
    }

    /// Concurrence reached once the disturbance saturates at `p = 1`.
    pub fn asymptotic(&self) -> Result<ConcurrenceValue> {
        for z in [self.spec.l(), self.spec.r(), self.spec.lp(), self.spec.rp()] {
            if z.im.abs() > REAL_TOL {
                return Err(Error::Domain(
                    "the asymptotic concurrence is defined for real coefficients".into(),
                ));
            }
        }
        let (x, y) = (self.x, self.y);
        let c = match self.kind {
            ChannelKind::Adc => {
                if y < DEGENERATE_SPEC {
                    1.0
                } else {
                    0.0
                }
            }
            ChannelKind::Pdc => (x - y).abs() / (x + y),
            ChannelKind::Dep => (x - 3.0 * y) / (x + 3.0 * y),
        };
        Ok(ConcurrenceValue::new(c))
    }
}

pub fn concurrence_closed(
    kind: ChannelKind,
    spec: &DeformationSpec,
    p: f64,
) -> Result<ConcurrenceValue> {
    ClosedForms::new(kind, spec)?.concurrence(p)
}

pub fn success_probability_closed(kind: ChannelKind, spec: &DeformationSpec, p: f64) -> Result<f64> {
    ClosedForms::new(kind, spec)?.probability(p)
}

/// Long-time concurrence; requires real coefficients.
pub fn c_infinity(kind: ChannelKind, spec: &DeformationSpec) -> Result<ConcurrenceValue> {
    ClosedForms::new(kind, spec)?.asymptotic()
}

/// Gain over doing nothing: `C(spec) - C(separated)` at the same `p`.
pub fn delta_c(kind: ChannelKind, spec: &DeformationSpec, p: f64) -> Result<f64> {
    let with = concurrence_closed(kind, spec, p)?.value();
    let without = concurrence_closed(kind, &DeformationSpec::identity(spec.statistics()), p)?.value();
    Ok(with - without)
}

/// Boson/fermion exchange: flips the statistics and the sign of `r`, which
/// leaves `X` and `Y` unchanged.
pub fn statistics_dual(spec: &DeformationSpec) -> DeformationSpec {
    spec.with_coefficients(spec.l(), -spec.r(), spec.lp(), spec.rp())
        .expect("sign flip keeps normalization")
        .with_statistics(spec.statistics().flipped())
}

/// The same curves written for real coefficients in terms of
/// `S = (lr')² + (l'r)²` and `Π = ll'rr'`.
pub mod real_form {
    use super::*;

    fn parts(spec: &DeformationSpec) -> Result<(f64, f64, f64, f64)> {
        for z in [spec.l(), spec.r(), spec.lp(), spec.rp()] {
            if z.im.abs() > REAL_TOL {
                return Err(Error::Domain("real form needs real coefficients".into()));
            }
        }
        let (l, r, lp, rp) = (spec.l().re, spec.r().re, spec.lp().re, spec.rp().re);
        let s = (l * rp).powi(2) + (lp * r).powi(2);
        let pi = l * lp * r * rp;
        let ov = (l * lp + r * rp).powi(2);
        Ok((s, pi, ov, spec.eta()))
    }

    pub fn adc_concurrence(spec: &DeformationSpec, p: f64) -> Result<f64> {
        let (s, pi, _, eta) = parts(spec)?;
        let a = (1.0 - p) * (s - 2.0 * eta * pi);
        Ok(a / (a + p * (s + 2.0 * eta * pi)))
    }

    pub fn pdc_concurrence(spec: &DeformationSpec, p: f64) -> Result<f64> {
        let (s, pi, _, eta) = parts(spec)?;
        let la = (1.0 - p / 2.0) * (s - 2.0 * eta * pi);
        let lb = (p / 2.0) * (s + 2.0 * eta * pi);
        Ok((la - lb).abs() / (la + lb))
    }

    pub fn dep_concurrence(spec: &DeformationSpec, p: f64) -> Result<f64> {
        let (s, pi, _, eta) = parts(spec)?;
        let la = (1.0 - 3.0 * p / 4.0) * (s - 2.0 * eta * pi);
        let lj = (p / 4.0) * (s + 2.0 * eta * pi);
        Ok(((la - 3.0 * lj) / (la + 3.0 * lj)).max(0.0))
    }

    pub fn success_probability(kind: ChannelKind, spec: &DeformationSpec, p: f64) -> Result<f64> {
        let (s, pi, ov, eta) = parts(spec)?;
        let (wm, wp) = match kind {
            ChannelKind::Adc => (1.0 - p, p),
            ChannelKind::Pdc => (1.0 - p / 2.0, p / 2.0),
            ChannelKind::Dep => (1.0 - 3.0 * p / 4.0, 3.0 * p / 4.0),
        };
        let num = wm * (s - 2.0 * eta * pi) + wp * (s + 2.0 * eta * pi);
        let den = wm * (1.0 - eta * ov) + wp * (1.0 + eta * ov);
        Ok(num / den)
    }

    /// Fermionic long-time values `2Π/S` (PDC) and `-(S-4Π)/(2(S-Π))` (DEP).
    pub fn fermion_c_infinity(kind: ChannelKind, spec: &DeformationSpec) -> Result<f64> {
        let (s, pi, _, _) = parts(spec)?;
        match kind {
            ChannelKind::Pdc => Ok(2.0 * pi / s),
            ChannelKind::Dep => Ok((-(s - 4.0 * pi) / (2.0 * (s - pi))).max(0.0)),
            ChannelKind::Adc => Err(Error::Domain("no real-form ADC limit".into())),
        }
    }
}
