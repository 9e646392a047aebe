//! Brute-force cross-check in first quantization.
//!
//! Particles carry labels here: a two-particle state is a vector in the
//! 64-dimensional space `(4 modes × 2 spins)⊗²`, explicitly symmetrized or
//! antisymmetrized. Noise, deformation and projection are dense matrices
//! acting on it, and the concurrence comes from hand-written Jacobi
//! eigen/singular value routines. Nothing below calls into the no-label
//! machinery, the Kraus builders or the Wootters routine of the main path.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channels::{p_numeric, ChannelKind, LorentzianBath};
use crate::error::{Error, Result};
use crate::nolabel::{Mode, SingleParticleKet, Spin, Statistics};
use crate::protocol::DeformationSpec;

const DIM1: usize = 8;
const DIM2: usize = DIM1 * DIM1;
const ZERO_PROBABILITY: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn eta(s: Statistics) -> f64 {
    match s {
        Statistics::Boson => 1.0,
        Statistics::Fermion => -1.0,
    }
}

// spin-major ordering, deliberately different from the main path
fn slot(mode: Mode, spin: Spin) -> usize {
    let m = match mode {
        Mode::A => 0,
        Mode::B => 1,
        Mode::L => 2,
        Mode::R => 3,
    };
    let s = match spin {
        Spin::Up => 0,
        Spin::Down => 1,
    };
    s * 4 + m
}

const MODES: [Mode; 4] = [Mode::A, Mode::B, Mode::L, Mode::R];
const SPINS: [Spin; 2] = [Spin::Up, Spin::Down];

/// Labeled two-particle amplitudes, particle 1 index major.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledVector(DVector<Complex64>);

impl LabeledVector {
    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.norm_squared()
    }
}

/// `⟨a|b⟩` in the labeled space.
pub fn labeled_inner(a: &LabeledVector, b: &LabeledVector) -> Complex64 {
    a.0.dotc(&b.0)
}

fn one_particle(k: &SingleParticleKet) -> DVector<Complex64> {
    let mut v = DVector::zeros(DIM1);
    for mode in MODES {
        for spin in SPINS {
            v[slot(mode, spin)] = k.amplitude(mode, spin);
        }
    }
    v
}

/// `|φ₁⟩⊗|φ₂⟩ + η|φ₂⟩⊗|φ₁⟩`, unnormalized.
pub fn symmetrize(phi1: &SingleParticleKet, phi2: &SingleParticleKet, statistics: Statistics) -> LabeledVector {
    let a = one_particle(phi1);
    let b = one_particle(phi2);
    LabeledVector(a.kronecker(&b) + b.kronecker(&a) * re(eta(statistics)))
}

/// 64×64 labeled density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDensity(DMatrix<Complex64>);

impl LabeledDensity {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Largest entry of `Sρ - ρ` with `S` the projector on the symmetric
    /// (bosons) or antisymmetric (fermions) sector.
    pub fn sector_defect(&self, statistics: Statistics) -> f64 {
        let s = sector_projector(statistics);
        (&s * &self.0 - &self.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `⟨X σ, Y τ|ρ|X σ', Y τ'⟩` on normalized symmetrized pair states,
    /// in the order ↑↑, ↑↓, ↓↑, ↓↓.
    pub fn pair_block(&self, statistics: Statistics, left: Mode, right: Mode) -> DMatrix<Complex64> {
        let kets: Vec<DVector<Complex64>> = pair_states(statistics, left, right);
        DMatrix::from_fn(4, 4, |i, j| kets[i].dotc(&(&self.0 * &kets[j])) * re(0.5))
    }
}

fn pair_states(statistics: Statistics, left: Mode, right: Mode) -> Vec<DVector<Complex64>> {
    let mut out = Vec::with_capacity(4);
    for s in SPINS {
        for t in SPINS {
            let a = SingleParticleKet::basis(left, s);
            let b = SingleParticleKet::basis(right, t);
            out.push(symmetrize(&a, &b, statistics).0);
        }
    }
    out
}

fn swap_operator() -> DMatrix<Complex64> {
    let mut s = DMatrix::zeros(DIM2, DIM2);
    for i in 0..DIM1 {
        for j in 0..DIM1 {
            s[(j * DIM1 + i, i * DIM1 + j)] = ONE;
        }
    }
    s
}

/// `(1 + η·SWAP)/2`
pub fn sector_projector(statistics: Statistics) -> DMatrix<Complex64> {
    (DMatrix::identity(DIM2, DIM2) + swap_operator() * re(eta(statistics))) * re(0.5)
}

/// Mode-conditioned spin action on one particle: `Σ_m |m⟩⟨m| ⊗ S_m`,
/// identity on modes not listed.
fn conditioned(ops: &[(Mode, [[Complex64; 2]; 2])]) -> DMatrix<Complex64> {
    let mut o = DMatrix::identity(DIM1, DIM1);
    for (mode, m) in ops {
        for (a, sa) in SPINS.iter().enumerate() {
            for (b, sb) in SPINS.iter().enumerate() {
                o[(slot(*mode, *sa), slot(*mode, *sb))] = m[a][b];
            }
        }
    }
    o
}

fn local_kraus(kind: ChannelKind, p: f64) -> Vec<[[Complex64; 2]; 2]> {
    let e0 = [[ONE, ZERO], [ZERO, re((1.0 - p).sqrt())]];
    let e1 = match kind {
        ChannelKind::Adc => [[ZERO, re(p.sqrt())], [ZERO, ZERO]],
        _ => [[ZERO, ZERO], [ZERO, re(p.sqrt())]],
    };
    vec![e0, e1]
}

fn paulis() -> [[[Complex64; 2]; 2]; 4] {
    let i = Complex64::new(0.0, 1.0);
    [
        [[ONE, ZERO], [ZERO, ONE]],
        [[ZERO, ONE], [ONE, ZERO]],
        [[ZERO, -i], [i, ZERO]],
        [[ONE, ZERO], [ZERO, -ONE]],
    ]
}

/// Labeled Kraus operators `O ⊗ O` for the two localized environments.
pub fn labeled_kraus(kind: ChannelKind, p: f64) -> Result<Vec<DMatrix<Complex64>>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("disturbance probability {p} outside [0, 1]")));
    }
    let mut out = Vec::new();
    match kind {
        ChannelKind::Adc | ChannelKind::Pdc => {
            let ks = local_kraus(kind, p);
            for ea in &ks {
                for eb in &ks {
                    let o = conditioned(&[(Mode::A, *ea), (Mode::B, *eb)]);
                    out.push(o.kronecker(&o));
                }
            }
        }
        ChannelKind::Dep => {
            let s = paulis();
            for a in 0..4 {
                for b in 0..4 {
                    let w = if a == 0 && b == 0 { 1.0 - 15.0 * p / 16.0 } else { p / 16.0 };
                    let o = conditioned(&[(Mode::A, s[a]), (Mode::B, s[b])]);
                    out.push(o.kronecker(&o) * re(w.sqrt()));
                }
            }
        }
    }
    Ok(out)
}

/// Single-particle deformation matrix: `A → l L + r R`, `B → l' L + r' R`
/// on each spin, identity on `L` and `R`.
pub fn deformation_matrix(spec: &DeformationSpec) -> DMatrix<Complex64> {
    let mut d = DMatrix::zeros(DIM1, DIM1);
    for spin in SPINS {
        d[(slot(Mode::L, spin), slot(Mode::L, spin))] = ONE;
        d[(slot(Mode::R, spin), slot(Mode::R, spin))] = ONE;
        d[(slot(Mode::L, spin), slot(Mode::A, spin))] = spec.l();
        d[(slot(Mode::R, spin), slot(Mode::A, spin))] = spec.r();
        d[(slot(Mode::L, spin), slot(Mode::B, spin))] = spec.lp();
        d[(slot(Mode::R, spin), slot(Mode::B, spin))] = spec.rp();
    }
    d
}

/// Normalized symmetrized singlet on `A`, `B`.
pub fn singlet(statistics: Statistics) -> LabeledVector {
    let up_down = symmetrize(
        &SingleParticleKet::basis(Mode::A, Spin::Up),
        &SingleParticleKet::basis(Mode::B, Spin::Down),
        statistics,
    );
    let down_up = symmetrize(
        &SingleParticleKet::basis(Mode::A, Spin::Down),
        &SingleParticleKet::basis(Mode::B, Spin::Up),
        statistics,
    );
    let v = up_down.0 - down_up.0;
    let n = v.norm();
    LabeledVector(v / re(n))
}

/// Ensemble of labeled vectors (unnormalized, weights folded in).
fn density_of(branches: &[DVector<Complex64>]) -> DMatrix<Complex64> {
    let mut rho = DMatrix::zeros(DIM2, DIM2);
    for v in branches {
        rho += v * v.adjoint();
    }
    rho
}

/// Noisy evolution followed by the deformation, renormalized. Returns the
/// labeled state and the norm it had before renormalization.
pub fn evolve_and_deform(
    kind: ChannelKind,
    spec: &DeformationSpec,
    p: f64,
) -> Result<(LabeledDensity, f64)> {
    let psi = singlet(spec.statistics()).0;
    let d = deformation_matrix(spec);
    let dd = d.kronecker(&d);
    let branches: Vec<DVector<Complex64>> =
        labeled_kraus(kind, p)?.iter().map(|k| &dd * (k * &psi)).collect();
    let rho = density_of(&branches);
    let norm = rho.trace().re;
    if norm < ZERO_PROBABILITY {
        return Err(Error::ZeroNormState { norm_sqr: norm });
    }
    Ok((LabeledDensity(rho / re(norm)), norm))
}

/// Noisy evolution only (no deformation), for channel-level comparisons.
pub fn evolve(kind: ChannelKind, statistics: Statistics, p: f64) -> Result<LabeledDensity> {
    let psi = singlet(statistics).0;
    let branches: Vec<DVector<Complex64>> =
        labeled_kraus(kind, p)?.iter().map(|k| k * &psi).collect();
    Ok(LabeledDensity(density_of(&branches)))
}

/// Probability of one particle in `L` and one in `R`, and the normalized
/// 4×4 spin state found there.
pub fn post_select(rho: &LabeledDensity, statistics: Statistics) -> Result<(DMatrix<Complex64>, f64)> {
    // Π = P_L⊗P_R + P_R⊗P_L is diagonal in the labeled product basis
    let mut weight = 0.0;
    for s in SPINS {
        for t in SPINS {
            let l = slot(Mode::L, s);
            let r = slot(Mode::R, t);
            weight += rho.matrix()[(l * DIM1 + r, l * DIM1 + r)].re;
            weight += rho.matrix()[(r * DIM1 + l, r * DIM1 + l)].re;
        }
    }
    let probability = weight / rho.trace();
    if probability.is_nan() || probability < ZERO_PROBABILITY {
        return Err(Error::PostSelectionImpossible { probability });
    }
    let block = rho.pair_block(statistics, Mode::L, Mode::R) / re(probability * rho.trace());
    Ok((block, probability))
}

/// Cyclic Jacobi diagonalization of a real symmetric matrix.
/// Returns eigenvalues and eigenvectors (as columns).
fn jacobi_eigen(mut m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            return Ok(((0..n).map(|i| m[(i, i)]).collect(), v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let mpq = m[(p, q)];
                if mpq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * mpq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (a, b) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * a - s * b;
                    m[(k, q)] = s * a + c * b;
                }
                for k in 0..n {
                    let (a, b) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * a - s * b;
                    m[(q, k)] = s * a + c * b;
                }
                for k in 0..n {
                    let (a, b) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * a - s * b;
                    v[(k, q)] = s * a + c * b;
                }
            }
        }
    }
    Err(Error::Numerical("Jacobi eigenvalue sweep did not converge".into()))
}

/// One-sided (Hestenes) Jacobi: singular values as column norms after
/// pairwise orthogonalization.
fn hestenes_singular_values(mut a: DMatrix<Complex64>) -> Result<Vec<f64>> {
    let n = a.ncols();
    let floor = 1e-15 * a.norm_squared();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                // orthogonality to rounding; the floor stops tiny columns cycling
                if g <= 1e-13 * (alpha * beta).sqrt() || g <= floor || g <= 1e-300 {
                    continue;
                }
                rotated = true;
                let phase = gamma / re(g);
                let zeta = (beta - alpha) / (2.0 * g);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..a.nrows() {
                    let x = a[(k, p)];
                    let y = a[(k, q)] * phase.conj();
                    a[(k, p)] = x * re(c) - y * re(s);
                    a[(k, q)] = x * re(s) + y * re(c);
                }
            }
        }
        if !rotated {
            let mut s: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
            s.sort_by(|x, y| y.total_cmp(x));
            return Ok(s);
        }
    }
    Err(Error::Numerical("one-sided Jacobi did not converge".into()))
}

/// Wootters concurrence computed with the Jacobi routines above.
pub fn wootters_jacobi(rho: &DMatrix<Complex64>) -> Result<f64> {
    if rho.shape() != (4, 4) {
        return Err(Error::Contract("expected a 4x4 matrix".into()));
    }
    // Hermitian A + iB as the real symmetric [[A, -B], [B, A]]
    let h = (rho + rho.adjoint()) * re(0.5);
    let emb = DMatrix::from_fn(8, 8, |r, c| {
        let z = h[(r % 4, c % 4)];
        match (r / 4, c / 4) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    });
    let (vals, vecs) = jacobi_eigen(emb)?;
    if let Some(min) = vals.iter().copied().reduce(f64::min) {
        if min < -1e-10 {
            return Err(Error::Contract(format!("density matrix has eigenvalue {min:e}")));
        }
    }
    // every complex eigenvector shows up twice, so Σ λ w w† = 2ρ
    let mut w = DMatrix::zeros(4, 8);
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 1e-13 {
            continue;
        }
        let f = (lam / 2.0).sqrt();
        for r in 0..4 {
            w[(r, k)] = Complex64::new(vecs[(r, k)], vecs[(r + 4, k)]) * re(f);
        }
    }
    let mut flip = DMatrix::zeros(4, 4);
    flip[(0, 3)] = -ONE;
    flip[(1, 2)] = ONE;
    flip[(2, 1)] = ONE;
    flip[(3, 0)] = -ONE;
    let tau = w.transpose() * flip * &w;
    let s = hestenes_singular_values(tau)?;
    Ok((s[0] - s[1] - s[2] - s[3]).max(0.0))
}

/// Concurrence and success probability from the labeled pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult {
    pub concurrence: f64,
    pub probability: f64,
}

pub fn oracle_pipeline_at_p(kind: ChannelKind, spec: &DeformationSpec, p: f64) -> Result<OracleResult> {
    let (rho, _) = evolve_and_deform(kind, spec, p)?;
    let (block, probability) = post_select(&rho, spec.statistics())?;
    Ok(OracleResult { concurrence: wootters_jacobi(&block)?, probability })
}

/// Full labeled pipeline at time `t`, with `p(t)` from the memory-kernel solver.
pub fn oracle_pipeline(
    kind: ChannelKind,
    bath: &LorentzianBath,
    t: f64,
    spec: &DeformationSpec,
) -> Result<OracleResult> {
    oracle_pipeline_at_p(kind, spec, p_numeric(t, bath)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fermions_in_the_same_state_vanish() {
        let k = SingleParticleKet::basis(Mode::L, Spin::Up);
        assert_eq!(symmetrize(&k, &k, Statistics::Fermion).norm_sqr(), 0.0);
        assert_eq!(symmetrize(&k, &k, Statistics::Boson).norm_sqr(), 4.0);
    }

    #[test]
    fn bosonic_symmetrization_is_the_plain_sum() {
        let a = SingleParticleKet::basis(Mode::A, Spin::Up);
        let b = SingleParticleKet::basis(Mode::B, Spin::Down);
        let v = symmetrize(&a, &b, Statistics::Boson);
        let i = slot(Mode::A, Spin::Up);
        let j = slot(Mode::B, Spin::Down);
        assert_eq!(v.amplitudes()[i * DIM1 + j], ONE);
        assert_eq!(v.amplitudes()[j * DIM1 + i], ONE);
        assert_eq!(v.norm_sqr(), 2.0);
    }

    #[test]
    fn kraus_sets_are_complete_on_the_ab_sector() {
        let psi = singlet(Statistics::Fermion);
        for kind in [ChannelKind::Adc, ChannelKind::Pdc, ChannelKind::Dep] {
            let rho = evolve(kind, Statistics::Fermion, 0.37).unwrap();
            assert!((rho.trace() - 1.0).abs() < 1e-13, "{kind}");
        }
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn separated_adc_decays_linearly() {
        let spec = DeformationSpec::identity(Statistics::Boson);
        for p in [0.0, 0.3, 0.9] {
            let r = oracle_pipeline_at_p(ChannelKind::Adc, &spec, p).unwrap();
            assert!((r.concurrence - (1.0 - p)).abs() < 1e-12);
            assert!((r.probability - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_wootters_on_werner_states() {
        for p in [0.0, 0.2, 0.5, 0.8] {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let v = DVector::from_vec(vec![ZERO, re(s), re(-s), ZERO]);
            let rho = &v * v.adjoint() * re(1.0 - p) + DMatrix::identity(4, 4) * re(p / 4.0);
            let cval = wootters_jacobi(&rho).unwrap();
            assert!((cval - (1.0 - 1.5 * p).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_wootters_handles_complex_states() {
        // (|↑↑⟩ + i|↓↓⟩)/√2 is maximally entangled
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = DVector::from_vec(vec![re(s), ZERO, ZERO, c(0.0, s)]);
        assert!((wootters_jacobi(&(&v * v.adjoint())).unwrap() - 1.0).abs() < 1e-12);
        // product state
        let v = DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8), ZERO, ZERO]);
        assert!(wootters_jacobi(&(&v * v.adjoint())).unwrap() < 1e-12);
    }

    #[test]
    fn hestenes_matches_known_singular_values() {
        let m = DMatrix::from_row_slice(2, 2, &[re(3.0), ZERO, c(0.0, 4.0), re(5.0)]);
        let s = hestenes_singular_values(m.clone()).unwrap();
        let expected = m.singular_values();
        assert!((s[0] - expected.max()).abs() < 1e-12 && (s[1] - expected.min()).abs() < 1e-12);
    }

    fn arb_sp() -> impl Strategy<Value = SingleParticleKet> {
        proptest::array::uniform8((-1.0..1.0f64, -1.0..1.0f64)).prop_map(|a| {
            let mut amps = [ZERO; 8];
            for (z, (x, y)) in amps.iter_mut().zip(a) {
                *z = c(x, y);
            }
            SingleParticleKet::from_amplitudes(amps)
        })
    }

    proptest! {
        #[test]
        fn labeled_inner_is_twice_the_no_label_rule(
            a in arb_sp(), b in arb_sp(), x in arb_sp(), y in arb_sp(), boson in any::<bool>()
        ) {
            let stats = if boson { Statistics::Boson } else { Statistics::Fermion };
            let lhs = labeled_inner(&symmetrize(&a, &b, stats), &symmetrize(&x, &y, stats));
            let e = re(eta(stats));
            let ip = |u: &SingleParticleKet, v: &SingleParticleKet| -> Complex64 {
                u.amplitudes().iter().zip(v.amplitudes()).map(|(p, q)| p.conj() * q).sum()
            };
            let rule = ip(&a, &x) * ip(&b, &y) + e * ip(&a, &y) * ip(&b, &x);
            prop_assert!((lhs - rule * re(2.0)).norm() <= 1e-12);
        }
    }
}
