//! Identical-particle kets in the no-label formalism.
//!
//! A two-particle state `|φ1;φ2⟩` is kept as a weighted sum of product terms
//! and is never split into a labeled tensor product. Inner products carry the
//! exchange term weighted by the statistics parameter η:
//!
//! ```text
//! ⟨φ'1;φ'2|φ1;φ2⟩ = ⟨φ'1|φ1⟩⟨φ'2|φ2⟩ + η ⟨φ'1|φ2⟩⟨φ'2|φ1⟩
//! ```
//!
//! Single particles live in a fixed 8-dimensional space: four orthonormal
//! spatial modes `{A, B, L, R}` times a pseudo-spin 1/2.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2, SMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dimension of the single-particle space (4 modes x 2 spins).
pub const SP_DIM: usize = 8;

/// Squared norms below this are treated as an annihilated state.
pub const ZERO_NORM_SQR: f64 = 1e-14;

/// Amplitudes below this are dropped when terms are coalesced.
const COALESCE_DROP: f64 = 1e-14;

/// Tolerance on unit norms and unit total weight.
const UNIT_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Orthonormal spatial modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    A,
    B,
    L,
    R,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::A, Mode::B, Mode::L, Mode::R];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Pseudo-spin 1/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const ALL: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Index of `|mode, spin⟩` in the 8-dimensional single-particle basis.
pub fn basis_index(mode: Mode, spin: Spin) -> usize {
    mode.index() * 2 + spin.index()
}

/// Linear map on the single-particle space.
pub type SpMap = SMatrix<Complex64, SP_DIM, SP_DIM>;

/// Builds a map acting as the given 2x2 spin operator on each listed mode
/// and as the identity on every other mode.
pub fn localized_spin_map(ops: &[(Mode, Matrix2<Complex64>)]) -> SpMap {
    let mut m = SpMap::identity();
    for (mode, op) in ops {
        let base = mode.index() * 2;
        for r in 0..2 {
            for c in 0..2 {
                m[(base + r, base + c)] = op[(r, c)];
            }
        }
    }
    m
}

/// Particle statistics; η = +1 for bosons and -1 for fermions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    pub fn eta(self) -> f64 {
        match self {
            Statistics::Boson => 1.0,
            Statistics::Fermion => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Statistics::Boson => Statistics::Fermion,
            Statistics::Fermion => Statistics::Boson,
        }
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistics::Boson => write!(f, "boson"),
            Statistics::Fermion => write!(f, "fermion"),
        }
    }
}

impl FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "boson" | "bosons" | "b" => Ok(Statistics::Boson),
            "fermion" | "fermions" | "f" => Ok(Statistics::Fermion),
            other => Err(Error::Domain(format!(
                "unknown statistics '{other}' (expected fermion or boson)"
            ))),
        }
    }
}

/// A single-particle ket over the `(mode, spin)` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingleParticleKet {
    amps: [Complex64; SP_DIM],
}

impl SingleParticleKet {
    pub fn zero() -> Self {
        Self { amps: [ZERO; SP_DIM] }
    }

    pub fn basis(mode: Mode, spin: Spin) -> Self {
        let mut k = Self::zero();
        k.amps[basis_index(mode, spin)] = ONE;
        k
    }

    pub fn from_amplitudes(amps: [Complex64; SP_DIM]) -> Self {
        Self { amps }
    }

    /// `(Σ c_m |m⟩) ⊗ |spin⟩` for a spatial wave function given mode by mode.
    pub fn spatial(coeffs: &[(Mode, Complex64)], spin: Spin) -> Self {
        let mut k = Self::zero();
        for &(mode, c) in coeffs {
            k.amps[basis_index(mode, spin)] += c;
        }
        k
    }

    pub fn amplitude(&self, mode: Mode, spin: Spin) -> Complex64 {
        self.amps[basis_index(mode, spin)]
    }

    pub fn amplitudes(&self) -> &[Complex64; SP_DIM] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut amps = self.amps;
        amps.iter_mut().for_each(|a| *a *= c);
        Self { amps }
    }

    pub fn mapped(&self, m: &SpMap) -> Self {
        let mut amps = [ZERO; SP_DIM];
        for (r, out) in amps.iter_mut().enumerate() {
            *out = (0..SP_DIM).map(|c| m[(r, c)] * self.amps[c]).sum();
        }
        Self { amps }
    }
}

impl Add for SingleParticleKet {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let mut amps = self.amps;
        amps.iter_mut().zip(rhs.amps).for_each(|(a, b)| *a += b);
        Self { amps }
    }
}

/// `⟨a|b⟩`: conjugate-linear in `a`, linear in `b`.
pub fn sp_inner(a: &SingleParticleKet, b: &SingleParticleKet) -> Complex64 {
    a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum()
}

/// One product term `coeff |first; second⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub first: SingleParticleKet,
    pub second: SingleParticleKet,
}

/// A two-particle state of identical particles as a sum of product terms.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoParticleKet {
    statistics: Statistics,
    terms: Vec<Term>,
}

impl TwoParticleKet {
    pub fn zero(statistics: Statistics) -> Self {
        Self { statistics, terms: Vec::new() }
    }

    pub fn product(
        statistics: Statistics,
        first: SingleParticleKet,
        second: SingleParticleKet,
    ) -> Self {
        Self { statistics, terms: vec![Term { coeff: ONE, first, second }] }
    }

    pub fn from_terms(statistics: Statistics, terms: Vec<Term>) -> Self {
        Self { statistics, terms }
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn push(&mut self, coeff: Complex64, first: SingleParticleKet, second: SingleParticleKet) {
        self.terms.push(Term { coeff, first, second });
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coeff: t.coeff * c, ..t.clone() })
            .collect();
        Self { statistics: self.statistics, terms }
    }

    /// Formal sum of two kets with the same statistics.
    pub fn plus(&self, other: &TwoParticleKet) -> Result<Self> {
        check_same_statistics(self.statistics, other.statistics)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self { statistics: self.statistics, terms })
    }

    /// The ket with the slots of every term exchanged. As a state this
    /// equals η times the original.
    pub fn swapped(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { coeff: t.coeff, first: t.second, second: t.first })
            .collect();
        Self { statistics: self.statistics, terms }
    }

    pub fn norm_sqr(&self) -> f64 {
        inner_unchecked(self, self).re
    }

    /// Expands every term in the single-particle basis, orders each pair
    /// canonically via `|e_j;e_i⟩ = η|e_i;e_j⟩`, merges equal basis pairs and
    /// drops negligible amplitudes. Fermionic doubly occupied pairs vanish.
    pub fn coalesced(&self) -> Self {
        let eta = self.statistics.eta();
        let mut acc = [[ZERO; SP_DIM]; SP_DIM];
        for t in &self.terms {
            for (i, a) in t.first.amps.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                for (j, b) in t.second.amps.iter().enumerate() {
                    if *b == ZERO {
                        continue;
                    }
                    let c = t.coeff * a * b;
                    if i <= j {
                        acc[i][j] += c;
                    } else {
                        acc[j][i] += c * eta;
                    }
                }
            }
        }
        let mut terms = Vec::new();
        for (i, row) in acc.iter().enumerate() {
            for (j, c) in row.iter().enumerate().skip(i) {
                if i == j && self.statistics == Statistics::Fermion {
                    continue;
                }
                if c.norm() >= COALESCE_DROP {
                    terms.push(Term {
                        coeff: *c,
                        first: basis_ket(i),
                        second: basis_ket(j),
                    });
                }
            }
        }
        Self { statistics: self.statistics, terms }
    }
}

fn basis_ket(i: usize) -> SingleParticleKet {
    let mut k = SingleParticleKet::zero();
    k.amps[i] = ONE;
    k
}

fn check_same_statistics(a: Statistics, b: Statistics) -> Result<()> {
    if a != b {
        return Err(Error::Contract(format!(
            "inner product between {a} and {b} states"
        )));
    }
    Ok(())
}

fn inner_unchecked(x: &TwoParticleKet, y: &TwoParticleKet) -> Complex64 {
    let eta = x.statistics.eta();
    let mut sum = ZERO;
    for tx in &x.terms {
        for ty in &y.terms {
            let direct = sp_inner(&tx.first, &ty.first) * sp_inner(&tx.second, &ty.second);
            let exchange = sp_inner(&tx.first, &ty.second) * sp_inner(&tx.second, &ty.first);
            sum += tx.coeff.conj() * ty.coeff * (direct + exchange * eta);
        }
    }
    sum
}

/// No-label inner product `⟨x|y⟩`, extended sesquilinearly over terms.
pub fn tp_inner(x: &TwoParticleKet, y: &TwoParticleKet) -> Result<Complex64> {
    check_same_statistics(x.statistics, y.statistics)?;
    Ok(inner_unchecked(x, y))
}

/// Returns the normalized ket together with the original squared norm.
pub fn normalize_ket(x: &TwoParticleKet) -> Result<(TwoParticleKet, f64)> {
    let norm_sqr = x.norm_sqr();
    if norm_sqr.is_nan() || norm_sqr < ZERO_NORM_SQR {
        return Err(Error::ZeroNormState { norm_sqr });
    }
    let k = x.scaled(Complex64::new(1.0 / norm_sqr.sqrt(), 0.0));
    Ok((k, norm_sqr))
}

/// Which slot(s) of each product term a single-particle map acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Both,
    First,
    Second,
}

/// Applies `m` term-wise to the selected slot(s) and coalesces the result.
/// The output is in general unnormalized.
pub fn apply_sp_map(x: &TwoParticleKet, m: &SpMap, slot: Slot) -> TwoParticleKet {
    let terms = x
        .terms
        .iter()
        .map(|t| {
            let (first, second) = match slot {
                Slot::Both => (t.first.mapped(m), t.second.mapped(m)),
                Slot::First => (t.first.mapped(m), t.second),
                Slot::Second => (t.first, t.second.mapped(m)),
            };
            Term { coeff: t.coeff, first, second }
        })
        .collect();
    TwoParticleKet { statistics: x.statistics, terms }.coalesced()
}

/// The four Bell states of two spins sitting in two distinct modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bell {
    /// `(|↑,↓⟩ - |↓,↑⟩)/√2`, the singlet.
    OneMinus,
    /// `(|↑,↓⟩ + |↓,↑⟩)/√2`
    OnePlus,
    /// `(|↑,↑⟩ + |↓,↓⟩)/√2`
    TwoPlus,
    /// `(|↑,↑⟩ - |↓,↓⟩)/√2`
    TwoMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::OnePlus, Bell::OneMinus, Bell::TwoPlus, Bell::TwoMinus];
}

/// Bell state with one particle in `left` and one in `right`.
pub fn bell_ket(statistics: Statistics, left: Mode, right: Mode, which: Bell) -> TwoParticleKet {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let (pairs, sign) = match which {
        Bell::OneMinus => ([(Spin::Up, Spin::Down), (Spin::Down, Spin::Up)], -1.0),
        Bell::OnePlus => ([(Spin::Up, Spin::Down), (Spin::Down, Spin::Up)], 1.0),
        Bell::TwoPlus => ([(Spin::Up, Spin::Up), (Spin::Down, Spin::Down)], 1.0),
        Bell::TwoMinus => ([(Spin::Up, Spin::Up), (Spin::Down, Spin::Down)], -1.0),
    };
    let mut k = TwoParticleKet::zero(statistics);
    k.push(
        h,
        SingleParticleKet::basis(left, pairs[0].0),
        SingleParticleKet::basis(right, pairs[0].1),
    );
    k.push(
        h * sign,
        SingleParticleKet::basis(left, pairs[1].0),
        SingleParticleKet::basis(right, pairs[1].1),
    );
    k
}

/// The product basis `{|Xσ, Yτ⟩}` in the order ↑↑, ↑↓, ↓↑, ↓↓.
pub fn pair_basis(statistics: Statistics, left: Mode, right: Mode) -> [TwoParticleKet; 4] {
    let b = |s, t| {
        TwoParticleKet::product(
            statistics,
            SingleParticleKet::basis(left, s),
            SingleParticleKet::basis(right, t),
        )
    };
    [
        b(Spin::Up, Spin::Up),
        b(Spin::Up, Spin::Down),
        b(Spin::Down, Spin::Up),
        b(Spin::Down, Spin::Down),
    ]
}

/// A probabilistic mixture of normalized two-particle kets.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleState {
    statistics: Statistics,
    components: Vec<(f64, TwoParticleKet)>,
}

impl EnsembleState {
    /// Validated constructor: weights in `[0, 1]` summing to one and unit-norm
    /// components of matching statistics.
    pub fn new(statistics: Statistics, components: Vec<(f64, TwoParticleKet)>) -> Result<Self> {
        let mut total = 0.0;
        for (w, k) in &components {
            check_same_statistics(statistics, k.statistics)?;
            if !(0.0..=1.0 + UNIT_TOL).contains(w) {
                return Err(Error::Contract(format!("ensemble weight {w} outside [0, 1]")));
            }
            let n = k.norm_sqr();
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::Contract(format!("ensemble component has norm^2 {n}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > UNIT_TOL {
            return Err(Error::Contract(format!("ensemble weights sum to {total}")));
        }
        Ok(Self { statistics, components })
    }

    /// The pure state `|k⟩⟨k| / ⟨k|k⟩`.
    pub fn pure(k: &TwoParticleKet) -> Result<Self> {
        let (n, _) = normalize_ket(k)?;
        Ok(Self { statistics: k.statistics, components: vec![(1.0, n)] })
    }

    /// Normalized mixture `Σ w_i |k_i⟩⟨k_i| / Σ w_j ⟨k_j|k_j⟩` built from
    /// unnormalized kets. Annihilated components are dropped; the whole state
    /// being annihilated is a [`Error::ZeroNormState`].
    pub fn from_unnormalized(
        statistics: Statistics,
        weighted: Vec<(f64, TwoParticleKet)>,
    ) -> Result<Self> {
        let mut parts = Vec::with_capacity(weighted.len());
        let mut total = 0.0;
        for (w, k) in weighted {
            check_same_statistics(statistics, k.statistics)?;
            let n = k.norm_sqr();
            let mass = w * n;
            if w <= 0.0 || n < ZERO_NORM_SQR || mass <= 0.0 {
                continue;
            }
            let (unit, _) = normalize_ket(&k)?;
            total += mass;
            parts.push((mass, unit));
        }
        if total.is_nan() || total < ZERO_NORM_SQR {
            return Err(Error::ZeroNormState { norm_sqr: total });
        }
        for (w, _) in &mut parts {
            *w /= total;
        }
        Ok(Self { statistics, components: parts })
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn components(&self) -> &[(f64, TwoParticleKet)] {
        &self.components
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|(w, _)| w).sum()
    }

    /// Matrix elements `⟨b_i|ρ|b_j⟩` on the given kets.
    pub fn matrix_in(&self, basis: &[TwoParticleKet]) -> Result<DMatrix<Complex64>> {
        let n = basis.len();
        let mut m = DMatrix::zeros(n, n);
        for (w, k) in &self.components {
            let amps = basis
                .iter()
                .map(|b| tp_inner(b, k))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += amps[i] * amps[j].conj() * *w;
                }
            }
        }
        Ok(m)
    }

    /// `Σ_k ⟨b_k|ρ|b_k⟩`, the weight carried by an orthonormal set.
    pub fn population_in(&self, basis: &[TwoParticleKet]) -> Result<f64> {
        let mut p = 0.0;
        for (w, k) in &self.components {
            for b in basis {
                p += w * tp_inner(b, k)?.norm_sqr();
            }
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ket(mode: Mode, spin: Spin) -> SingleParticleKet {
        SingleParticleKet::basis(mode, spin)
    }

    fn lr_wave(l: Complex64, r: Complex64, spin: Spin) -> SingleParticleKet {
        SingleParticleKet::spatial(&[(Mode::L, l), (Mode::R, r)], spin)
    }

    #[test]
    fn sp_inner_basis_cases() {
        assert_eq!(sp_inner(&ket(Mode::A, Spin::Up), &ket(Mode::A, Spin::Up)), c(1.0, 0.0));
        assert_eq!(sp_inner(&ket(Mode::A, Spin::Up), &ket(Mode::B, Spin::Up)), c(0.0, 0.0));
        assert_eq!(sp_inner(&ket(Mode::A, Spin::Up), &ket(Mode::A, Spin::Down)), c(0.0, 0.0));
    }

    #[test]
    fn sp_inner_of_lr_expansions() {
        let (l, r, lp, rp) = (c(0.6, 0.1), c(0.2, -0.3), c(-0.5, 0.4), c(0.1, 0.7));
        let psi1 = lr_wave(l, r, Spin::Up);
        let psi2 = lr_wave(lp, rp, Spin::Up);
        let expected = l.conj() * lp + r.conj() * rp;
        assert!((sp_inner(&psi1, &psi2) - expected).norm() < 1e-15);
    }

    #[test]
    fn separated_pair_has_unit_norm() {
        for stats in [Statistics::Boson, Statistics::Fermion] {
            let k = TwoParticleKet::product(stats, ket(Mode::A, Spin::Up), ket(Mode::B, Spin::Down));
            assert!((tp_inner(&k, &k).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn overlapping_pair_norms_match_c1_c2() {
        let s = 0.5f64.sqrt();
        let (l, r, lp, rp) = (c(0.8f64.sqrt(), 0.0), c(0.2f64.sqrt(), 0.0), c(s, 0.0), c(0.0, s));
        for stats in [Statistics::Boson, Statistics::Fermion] {
            let eta = stats.eta();
            let o = (l.conj() * lp + r.conj() * rp).norm_sqr();
            let up_up = TwoParticleKet::product(stats, lr_wave(l, r, Spin::Up), lr_wave(lp, rp, Spin::Up));
            let c2 = 1.0 + eta * o;
            assert!((up_up.norm_sqr() - c2).abs() < 1e-14);

            let mut singlet = TwoParticleKet::zero(stats);
            singlet.push(c(s, 0.0), lr_wave(l, r, Spin::Up), lr_wave(lp, rp, Spin::Down));
            singlet.push(c(-s, 0.0), lr_wave(l, r, Spin::Down), lr_wave(lp, rp, Spin::Up));
            let c1 = 1.0 - eta * o;
            assert!((singlet.norm_sqr() - c1).abs() < 1e-14);
            let (n, norm_sqr) = normalize_ket(&singlet).unwrap();
            assert!((norm_sqr - c1).abs() < 1e-14);
            assert!((n.norm_sqr() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_statistics_is_a_contract_violation() {
        let a = TwoParticleKet::product(Statistics::Boson, ket(Mode::A, Spin::Up), ket(Mode::B, Spin::Up));
        let b = TwoParticleKet::product(Statistics::Fermion, ket(Mode::A, Spin::Up), ket(Mode::B, Spin::Up));
        assert!(matches!(tp_inner(&a, &b), Err(Error::Contract(_))));
    }

    #[test]
    fn pauli_exclusion_gives_zero_norm() {
        let psi = lr_wave(c(0.6, 0.0), c(0.8, 0.0), Spin::Up);
        let k = TwoParticleKet::product(Statistics::Fermion, psi, psi);
        assert!(k.norm_sqr().abs() < 1e-15);
        assert!(matches!(normalize_ket(&k), Err(Error::ZeroNormState { .. })));
        assert!(k.coalesced().terms().is_empty());
    }

    #[test]
    fn normalize_keeps_normalized_ket() {
        let k = TwoParticleKet::product(Statistics::Fermion, ket(Mode::A, Spin::Up), ket(Mode::B, Spin::Down));
        let (n, norm_sqr) = normalize_ket(&k).unwrap();
        assert_eq!(norm_sqr, 1.0);
        assert_eq!(n, k);
    }

    #[test]
    fn identity_map_leaves_ket_unchanged() {
        let k = bell_ket(Statistics::Fermion, Mode::A, Mode::B, Bell::OneMinus);
        let m = apply_sp_map(&k, &SpMap::identity(), Slot::Both);
        let diff = m.plus(&k.scaled(c(-1.0, 0.0))).unwrap();
        assert!(diff.norm_sqr() < 1e-28);
        assert_eq!(m.terms().len(), 2);
    }

    #[test]
    fn relabeling_map_moves_modes() {
        let mut m = SpMap::zeros();
        for s in Spin::ALL {
            m[(basis_index(Mode::L, s), basis_index(Mode::A, s))] = c(1.0, 0.0);
            m[(basis_index(Mode::R, s), basis_index(Mode::B, s))] = c(1.0, 0.0);
        }
        let k = TwoParticleKet::product(Statistics::Boson, ket(Mode::A, Spin::Up), ket(Mode::B, Spin::Down));
        let out = apply_sp_map(&k, &m, Slot::Both);
        let target = TwoParticleKet::product(Statistics::Boson, ket(Mode::L, Spin::Up), ket(Mode::R, Spin::Down));
        assert!((tp_inner(&target, &out).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn deformation_map_produces_overlapping_product() {
        let (l, r, lp, rp) = (c(0.6, 0.0), c(0.0, 0.8), c(0.8, 0.0), c(0.6, 0.0));
        let mut m = SpMap::identity();
        for s in Spin::ALL {
            let a = basis_index(Mode::A, s);
            let b = basis_index(Mode::B, s);
            m[(a, a)] = c(0.0, 0.0);
            m[(b, b)] = c(0.0, 0.0);
            m[(basis_index(Mode::L, s), a)] = l;
            m[(basis_index(Mode::R, s), a)] = r;
            m[(basis_index(Mode::L, s), b)] = lp;
            m[(basis_index(Mode::R, s), b)] = rp;
        }
        for stats in [Statistics::Boson, Statistics::Fermion] {
            let k = TwoParticleKet::product(stats, ket(Mode::A, Spin::Up), ket(Mode::B, Spin::Down));
            let out = apply_sp_map(&k, &m, Slot::Both);
            let expected = TwoParticleKet::product(stats, lr_wave(l, r, Spin::Up), lr_wave(lp, rp, Spin::Down));
            let diff = out.plus(&expected.scaled(c(-1.0, 0.0))).unwrap();
            assert!(diff.norm_sqr() < 1e-28);
        }
    }

    #[test]
    fn single_slot_map_touches_one_side() {
        let flip = Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let m = localized_spin_map(&[(Mode::A, flip), (Mode::B, flip)]);
        let k = TwoParticleKet::product(Statistics::Boson, ket(Mode::A, Spin::Up), ket(Mode::B, Spin::Up));
        let first = apply_sp_map(&k, &m, Slot::First);
        let target = TwoParticleKet::product(Statistics::Boson, ket(Mode::A, Spin::Down), ket(Mode::B, Spin::Up));
        assert!((tp_inner(&target, &first).unwrap().norm() - 1.0).abs() < 1e-15);
        let second = apply_sp_map(&k, &m, Slot::Second);
        let target = TwoParticleKet::product(Statistics::Boson, ket(Mode::A, Spin::Up), ket(Mode::B, Spin::Down));
        assert!((tp_inner(&target, &second).unwrap().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ensemble_validation() {
        let k = bell_ket(Statistics::Fermion, Mode::A, Mode::B, Bell::OneMinus);
        assert!(EnsembleState::new(Statistics::Fermion, vec![(1.0, k.clone())]).is_ok());
        assert!(EnsembleState::new(Statistics::Fermion, vec![(0.7, k.clone())]).is_err());
        assert!(EnsembleState::new(Statistics::Fermion, vec![(1.0, k.scaled(c(2.0, 0.0)))]).is_err());
        assert!(EnsembleState::new(Statistics::Boson, vec![(1.0, k)]).is_err());
    }

    #[test]
    fn from_unnormalized_reweights_by_norm() {
        let a = TwoParticleKet::product(Statistics::Boson, ket(Mode::A, Spin::Up), ket(Mode::B, Spin::Up));
        let b = TwoParticleKet::product(Statistics::Boson, ket(Mode::A, Spin::Down), ket(Mode::B, Spin::Down));
        let e = EnsembleState::from_unnormalized(
            Statistics::Boson,
            vec![(0.5, a.scaled(c(2.0, 0.0))), (0.5, b), (0.3, TwoParticleKet::zero(Statistics::Boson))],
        )
        .unwrap();
        assert_eq!(e.components().len(), 2);
        assert!((e.components()[0].0 - 0.8).abs() < 1e-15);
        assert!((e.total_weight() - 1.0).abs() < 1e-15);
        let dead = EnsembleState::from_unnormalized(Statistics::Boson, vec![(1.0, TwoParticleKet::zero(Statistics::Boson))]);
        assert!(matches!(dead, Err(Error::ZeroNormState { .. })));
    }

    fn arb_sp() -> impl Strategy<Value = SingleParticleKet> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), SP_DIM).prop_map(|v| {
            let mut amps = [ZERO; SP_DIM];
            for (a, (re, im)) in amps.iter_mut().zip(v) {
                *a = c(re, im);
            }
            SingleParticleKet::from_amplitudes(amps)
        })
    }

    fn arb_ket(stats: Statistics) -> impl Strategy<Value = TwoParticleKet> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, arb_sp(), arb_sp()), 1..4).prop_map(
            move |ts| {
                let terms = ts
                    .into_iter()
                    .map(|(re, im, first, second)| Term { coeff: c(re, im), first, second })
                    .collect();
                TwoParticleKet::from_terms(stats, terms)
            },
        )
    }

    fn arb_pair() -> impl Strategy<Value = (TwoParticleKet, TwoParticleKet)> {
        prop_oneof![Just(Statistics::Boson), Just(Statistics::Fermion)]
            .prop_flat_map(|s| (arb_ket(s), arb_ket(s)))
    }

    proptest! {
        #[test]
        fn exchange_statistics((x, y) in arb_pair()) {
            let eta = x.statistics().eta();
            let lhs = tp_inner(&x.swapped(), &y).unwrap();
            let rhs = tp_inner(&x, &y).unwrap() * eta;
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }

        #[test]
        fn inner_product_is_positive((x, _y) in arb_pair()) {
            let v = tp_inner(&x, &x).unwrap();
            prop_assert!(v.re >= -1e-12);
            prop_assert!(v.im.abs() <= 1e-12);
        }

        #[test]
        fn coalescing_preserves_the_state((x, y) in arb_pair()) {
            let before = tp_inner(&y, &x).unwrap();
            let after = tp_inner(&y, &x.coalesced()).unwrap();
            prop_assert!((before - after).norm() <= 1e-11);
        }

        #[test]
        fn inner_product_is_sesquilinear((x, y) in arb_pair(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let a = c(re, im);
            let lin = tp_inner(&x, &y.scaled(a)).unwrap() - tp_inner(&x, &y).unwrap() * a;
            let anti = tp_inner(&x.scaled(a), &y).unwrap() - tp_inner(&x, &y).unwrap() * a.conj();
            prop_assert!(lin.norm() <= 1e-11);
            prop_assert!(anti.norm() <= 1e-11);
        }
    }
}
