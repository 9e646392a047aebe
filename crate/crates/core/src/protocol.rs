//! Spatial deformation, sLOCC post-selection and the indistinguishability
//! measure.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::channels::check_ab_support;
use crate::density::DensityMatrix4;
use crate::error::{Error, Result};
use crate::nolabel::{
    apply_sp_map, basis_index, pair_basis, tp_inner, EnsembleState, Mode, SpMap, Spin, Slot,
    Statistics,
};

const NORM_TOL: f64 = 1e-12;
const ZERO_PROBABILITY: f64 = 1e-14;
const OFF_SECTOR_TOL: f64 = 1e-12;

/// Where the deformation sends the two initially separated wave functions:
/// `ψ₁ = l|L⟩ + r|R⟩` (from `A`) and `ψ₂ = lp|L⟩ + rp|R⟩` (from `B`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformationSpec {
    l: Complex64,
    r: Complex64,
    lp: Complex64,
    rp: Complex64,
    statistics: Statistics,
}

impl DeformationSpec {
    pub fn new(
        l: Complex64,
        r: Complex64,
        lp: Complex64,
        rp: Complex64,
        statistics: Statistics,
    ) -> Result<Self> {
        let n1 = l.norm_sqr() + r.norm_sqr();
        let n2 = lp.norm_sqr() + rp.norm_sqr();
        if (n1 - 1.0).abs() > NORM_TOL || (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!(
                "deformed wave functions must be normalized (|l|²+|r|² = {n1}, |l'|²+|r'|² = {n2})"
            )));
        }
        Ok(Self { l, r, lp, rp, statistics })
    }

    /// Real coefficients.
    pub fn real(l: f64, r: f64, lp: f64, rp: f64, statistics: Statistics) -> Result<Self> {
        let c = |x| Complex64::new(x, 0.0);
        Self::new(c(l), c(r), c(lp), c(rp), statistics)
    }

    /// `A → L`, `B → R`: the particles stay distinguishable.
    pub fn identity(statistics: Statistics) -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0, statistics).expect("identity spec is normalized")
    }

    /// One-parameter family with `l = rp = √a` and `|r| = |lp| = √(1-a)`.
    /// For bosons `r` carries a minus sign so that `a = 1/2` is the fully
    /// indistinguishable configuration `l = r' = l' = -r`.
    pub fn family(statistics: Statistics, a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::Domain(format!("family parameter {a} outside [0, 1]")));
        }
        let s = a.sqrt();
        let c = (1.0 - a).sqrt();
        let r = match statistics {
            Statistics::Fermion => c,
            Statistics::Boson => -c,
        };
        Self::real(s, r, c, s, statistics)
    }

    pub fn l(&self) -> Complex64 {
        self.l
    }

    pub fn r(&self) -> Complex64 {
        self.r
    }

    pub fn lp(&self) -> Complex64 {
        self.lp
    }

    pub fn rp(&self) -> Complex64 {
        self.rp
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn eta(&self) -> f64 {
        self.statistics.eta()
    }

    /// Same coefficients, other statistics.
    pub fn with_statistics(&self, statistics: Statistics) -> Self {
        Self { statistics, ..*self }
    }

    /// Same statistics, coefficients replaced (validated).
    pub fn with_coefficients(
        &self,
        l: Complex64,
        r: Complex64,
        lp: Complex64,
        rp: Complex64,
    ) -> Result<Self> {
        Self::new(l, r, lp, rp, self.statistics)
    }

    /// Spatial overlap `⟨ψ₁|ψ₂⟩`.
    pub fn overlap(&self) -> Complex64 {
        self.l.conj() * self.lp + self.r.conj() * self.rp
    }

    /// Squared norm of the deformed singlet, `1 - η|⟨ψ₁|ψ₂⟩|²`.
    pub fn c1_sqr(&self) -> f64 {
        1.0 - self.eta() * self.overlap().norm_sqr()
    }

    /// Squared norm of the deformed triplets, `1 + η|⟨ψ₁|ψ₂⟩|²`.
    pub fn c2_sqr(&self) -> f64 {
        1.0 + self.eta() * self.overlap().norm_sqr()
    }

    /// Single-particle map: `A ↦ ψ₁`, `B ↦ ψ₂` for each spin, identity on `L`, `R`.
    pub fn single_particle_map(&self) -> SpMap {
        let mut m = SpMap::identity();
        for spin in Spin::ALL {
            let a = basis_index(Mode::A, spin);
            let b = basis_index(Mode::B, spin);
            let l = basis_index(Mode::L, spin);
            let r = basis_index(Mode::R, spin);
            m[(a, a)] = Complex64::new(0.0, 0.0);
            m[(b, b)] = Complex64::new(0.0, 0.0);
            m[(l, a)] = self.l;
            m[(r, a)] = self.r;
            m[(l, b)] = self.lp;
            m[(r, b)] = self.rp;
        }
        m
    }
}

/// Result of the localized projection onto one particle in `L` and one in `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct SloccOutcome {
    rho_lr: DensityMatrix4,
    probability: f64,
}

impl SloccOutcome {
    /// Post-selected state in the basis `{L↑R↑, L↑R↓, L↓R↑, L↓R↓}`.
    pub fn rho_lr(&self) -> &DensityMatrix4 {
        &self.rho_lr
    }

    pub fn probability(&self) -> f64 {
        self.probability
    }
}

/// Deforms a state of one particle in `A` and one in `B`.
///
/// Every component is mapped slot-wise and renormalized; weights become
/// `wᵢ·normᵢ² / Σ wⱼ·normⱼ²`. Components annihilated by the map (fermions
/// pushed into the same wave function with parallel spins) drop out.
pub fn deform(state: &EnsembleState, spec: &DeformationSpec) -> Result<EnsembleState> {
    if state.statistics() != spec.statistics {
        return Err(Error::Contract(format!(
            "state is {} but the deformation is for {}",
            state.statistics(),
            spec.statistics
        )));
    }
    check_ab_support(state)?;
    let map = spec.single_particle_map();
    let mapped = state
        .components()
        .iter()
        .map(|(w, k)| (*w, apply_sp_map(k, &map, Slot::Both)))
        .collect();
    EnsembleState::from_unnormalized(state.statistics(), mapped)
}

fn check_lr_support(state: &EnsembleState) -> Result<()> {
    for (_, k) in state.components() {
        for term in k.terms() {
            for ket in [&term.first, &term.second] {
                for mode in [Mode::A, Mode::B] {
                    for spin in Spin::ALL {
                        if (term.coeff * ket.amplitude(mode, spin)).norm() > OFF_SECTOR_TOL {
                            return Err(Error::Contract(format!(
                                "state has weight on mode {mode:?}; sLOCC expects L, R only"
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Projects onto `Π_LR = Σ|Lσ, Rτ⟩⟨Lσ, Rτ|` and renormalizes.
pub fn slocc(state: &EnsembleState) -> Result<SloccOutcome> {
    check_lr_support(state)?;
    let basis = pair_basis(state.statistics(), Mode::L, Mode::R);
    let mut rho = Matrix4::<Complex64>::zeros();
    let mut probability = 0.0;
    for (w, k) in state.components() {
        let mut v = [Complex64::new(0.0, 0.0); 4];
        for (vi, b) in v.iter_mut().zip(&basis) {
            *vi = tp_inner(b, k)?;
        }
        for i in 0..4 {
            probability += w * v[i].norm_sqr();
            for j in 0..4 {
                rho[(i, j)] += v[i] * v[j].conj() * *w;
            }
        }
    }
    if probability.is_nan() || probability < ZERO_PROBABILITY {
        return Err(Error::PostSelectionImpossible { probability });
    }
    let rho_lr = DensityMatrix4::new(rho / Complex64::new(probability, 0.0))?;
    Ok(SloccOutcome { rho_lr, probability: probability.min(1.0) })
}

fn binary_entropy(x: f64) -> f64 {
    let h = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    h(x) + h(1.0 - x)
}

/// Entropic spatial indistinguishability, 0 for separated and 1 for
/// maximally overlapping wave functions.
pub fn indistinguishability(spec: &DeformationSpec) -> Result<f64> {
    let x = spec.l.norm_sqr() * spec.rp.norm_sqr();
    let y = spec.lp.norm_sqr() * spec.r.norm_sqr();
    let z = x + y;
    if z < ZERO_PROBABILITY {
        return Err(Error::Domain(
            "both particles end up in the same region; indistinguishability is undefined".into(),
        ));
    }
    Ok(binary_entropy(x / z).clamp(0.0, 1.0))
}

/// Member of [`DeformationSpec::family`] with the requested
/// indistinguishability, found by bisection on `a ∈ [1/2, 1]`.
pub fn spec_for_target_i(target: f64, statistics: Statistics) -> Result<DeformationSpec> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::Domain(format!("target indistinguishability {target} outside [0, 1]")));
    }
    if target == 1.0 {
        return DeformationSpec::family(statistics, 0.5);
    }
    if target == 0.0 {
        return DeformationSpec::family(statistics, 1.0);
    }
    // I decreases from 1 at a = 1/2 to 0 at a = 1
    let i_of = |a: f64| DeformationSpec::family(statistics, a).and_then(|s| indistinguishability(&s));
    let (mut lo, mut hi) = (0.5_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if i_of(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = if (i_of(lo)? - target).abs() <= (i_of(hi)? - target).abs() { lo } else { hi };
    DeformationSpec::family(statistics, a)
}
