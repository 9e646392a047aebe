//! Time-dependent local noise driven by a Lorentzian bath.
//!
//! Each qubit couples to its own reservoir with spectral density
//! `J(ω) = (γ/2π) λ² / ((ω-ω0)² + λ²)`. The decay amplitude `q(t)` obeys the
//! memory-kernel equation `q' = -∫ f(t-s) q(s) ds` with `f(τ) = (γλ/2) e^{-λτ}`
//! and the disturbance probability is `p(t) = 1 - q(t)²`. The same `p(t)`
//! parameterizes the amplitude-damping, phase-damping and depolarizing
//! channels.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::nolabel::{
    apply_sp_map, bell_ket, localized_spin_map, pair_basis, Bell, EnsembleState, Mode, Slot,
    Statistics,
};
use crate::ode::{self, Tolerances};

const SOLVER_TOL: Tolerances = Tolerances { abs: 1e-9, rel: 1e-9 };
const SUPPORT_TOL: f64 = 1e-10;

/// Lorentzian reservoir: coupling `gamma`, spectral width `lambda`, and the
/// qubit transition frequency `omega0` (kept for completeness; the dynamics
/// only depend on `ω - ω0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianBath {
    gamma: f64,
    lambda: f64,
    omega0: f64,
}

impl LorentzianBath {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        Self::with_omega0(gamma, lambda, 0.0)
    }

    pub fn with_omega0(gamma: f64, lambda: f64, omega0: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { gamma, lambda, omega0 })
    }

    /// Weak coupling preset, `λ = 5γ`.
    pub fn markovian(gamma: f64) -> Result<Self> {
        Self::new(gamma, 5.0 * gamma)
    }

    /// Strong coupling preset, `λ = 0.01γ`.
    pub fn non_markovian(gamma: f64) -> Result<Self> {
        Self::new(gamma, 0.01 * gamma)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// `d² = 2γλ - λ²`; negative in the weak-coupling regime.
    pub fn d_squared(&self) -> f64 {
        2.0 * self.gamma * self.lambda - self.lambda * self.lambda
    }

    /// `τ_R ≈ 1/γ`
    pub fn relaxation_time(&self) -> f64 {
        1.0 / self.gamma
    }

    /// `τ_B ≈ 1/λ`
    pub fn correlation_time(&self) -> f64 {
        1.0 / self.lambda
    }

    /// `γ < λ/2`: monotone decay. Otherwise the dynamics shows revivals.
    pub fn is_markovian(&self) -> bool {
        self.gamma < self.lambda / 2.0
    }

    pub fn spectral_density(&self, omega: f64) -> f64 {
        let dw = omega - self.omega0;
        self.gamma / (2.0 * std::f64::consts::PI) * self.lambda.powi(2)
            / (dw * dw + self.lambda.powi(2))
    }

    /// Bath correlation function `f(τ) = (γλ/2) e^{-λ|τ|}`.
    pub fn kernel(&self, tau: f64) -> f64 {
        0.5 * self.gamma * self.lambda * (-self.lambda * tau.abs()).exp()
    }

    /// Closed-form decay amplitude `q(t) = e^{-λt/2}[cos(dt/2) + (λ/d) sin(dt/2)]`,
    /// continued to cosh/sinh when `d²` is negative.
    pub fn decay_amplitude(&self, t: f64) -> f64 {
        let lam = self.lambda;
        let d2 = self.d_squared();
        let half = 0.5 * lam * t;
        if d2 >= 0.0 {
            let x = 0.5 * d2.sqrt() * t;
            let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
            (-half).exp() * (x.cos() + half * sinc)
        } else {
            let d = (-d2).sqrt();
            let x = 0.5 * d * t;
            if x < 1e-8 {
                return (-half).exp() * (1.0 + half * (1.0 + x * x / 6.0));
            }
            // e^{-λt/2} cosh x and e^{-λt/2} sinh x without overflow
            let up = (x - half).exp();
            let down = (-x - half).exp();
            0.5 * (up + down) + lam / d * 0.5 * (up - down)
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

fn probability_from_amplitude(q: f64) -> f64 {
    (1.0 - q * q).clamp(0.0, 1.0)
}

/// Disturbance probability `p(t)` from the closed form.
pub fn p_analytic(t: f64, bath: &LorentzianBath) -> Result<f64> {
    check_time(t)?;
    Ok(probability_from_amplitude(bath.decay_amplitude(t)))
}

/// Disturbance probability `p(t)` from integrating the memory-kernel
/// equation. The exponential kernel is embedded exactly with
/// `z(t) = ∫ e^{-λ(t-s)} q(s) ds`, giving `q' = -(γλ/2) z`, `z' = q - λz`.
pub fn p_numeric(t: f64, bath: &LorentzianBath) -> Result<f64> {
    Ok(p_numeric_grid(&[t], bath)?[0])
}

/// [`p_numeric`] on an ascending grid of times, in one pass.
pub fn p_numeric_grid(ts: &[f64], bath: &LorentzianBath) -> Result<Vec<f64>> {
    for &t in ts {
        check_time(t)?;
    }
    let g = bath.gamma;
    let lam = bath.lambda;
    let rhs = |_t: f64, y: &[f64; 2]| [-0.5 * g * lam * y[1], y[0] - lam * y[1]];
    let states = ode::integrate(rhs, [1.0, 0.0], ts, SOLVER_TOL)?;
    Ok(states.iter().map(|y| probability_from_amplitude(y[0])).collect())
}

/// The three noise models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    /// Amplitude damping.
    Adc,
    /// Phase damping.
    Pdc,
    /// Two-qubit depolarizing (white noise).
    Dep,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [ChannelKind::Adc, ChannelKind::Pdc, ChannelKind::Dep];
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChannelKind::Adc => "adc",
            ChannelKind::Pdc => "pdc",
            ChannelKind::Dep => "dep",
        };
        f.write_str(s)
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adc" | "amplitude-damping" => Ok(ChannelKind::Adc),
            "pdc" | "phase-damping" => Ok(ChannelKind::Pdc),
            "dep" | "depolarizing" => Ok(ChannelKind::Dep),
            other => Err(Error::Domain(format!(
                "unknown channel '{other}' (expected adc, pdc or dep)"
            ))),
        }
    }
}

/// Whether a Kraus set acts on one spin or on the two-spin space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arity {
    SingleQubit,
    TwoQubit,
}

impl Arity {
    pub fn dim(self) -> usize {
        match self {
            Arity::SingleQubit => 2,
            Arity::TwoQubit => 4,
        }
    }
}

/// Operator-sum representation of a channel.
#[derive(Clone, Debug)]
pub struct KrausSet {
    arity: Arity,
    operators: Vec<DMatrix<Complex64>>,
}

impl KrausSet {
    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn operators(&self) -> &[DMatrix<Complex64>] {
        &self.operators
    }

    /// Largest entry of `Σ E†E - 1`.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.arity.dim();
        let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
        for e in &self.operators {
            sum += e.adjoint() * e;
        }
        sum -= DMatrix::identity(dim, dim);
        sum.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `ρ ↦ Σ E ρ E†`.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let dim = self.arity.dim();
        if rho.shape() != (dim, dim) {
            return Err(Error::Contract(format!(
                "density matrix is {:?}, channel acts on dimension {dim}",
                rho.shape()
            )));
        }
        let mut out = DMatrix::zeros(dim, dim);
        for e in &self.operators {
            out += e * rho * e.adjoint();
        }
        Ok(out)
    }

    /// Two independent copies, `{E_i ⊗ E_j}`.
    pub fn tensor_square(&self) -> Result<KrausSet> {
        if self.arity != Arity::SingleQubit {
            return Err(Error::Contract("tensor square of a two-qubit Kraus set".into()));
        }
        let mut operators = Vec::with_capacity(self.operators.len().pow(2));
        for a in &self.operators {
            for b in &self.operators {
                operators.push(a.kronecker(b));
            }
        }
        Ok(KrausSet { arity: Arity::TwoQubit, operators })
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("disturbance probability {p} outside [0, 1]")));
    }
    Ok(())
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Single-qubit Kraus pair in the `{↑, ↓}` basis.
fn local_pair(kind: ChannelKind, p: f64) -> [Matrix2<Complex64>; 2] {
    let keep = re((1.0 - p).sqrt());
    let e0 = Matrix2::new(re(1.0), re(0.0), re(0.0), keep);
    let e1 = match kind {
        ChannelKind::Adc => Matrix2::new(re(0.0), re(p.sqrt()), re(0.0), re(0.0)),
        _ => Matrix2::new(re(0.0), re(0.0), re(0.0), re(p.sqrt())),
    };
    [e0, e1]
}

fn pauli() -> [Matrix2<Complex64>; 4] {
    let z = re(0.0);
    let o = re(1.0);
    let i = Complex64::new(0.0, 1.0);
    [
        Matrix2::new(o, z, z, o),
        Matrix2::new(z, o, o, z),
        Matrix2::new(z, -i, i, z),
        Matrix2::new(o, z, z, -o),
    ]
}

fn to_dynamic(m: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
}

/// Kraus operators for a channel at disturbance probability `p`.
///
/// ADC and PDC are single-qubit sets. DEP is the two-qubit map
/// `ρ ↦ (1-p)ρ + p·1/4`, realized with the sixteen Pauli products
/// (`√(1-15p/16)·1⊗1` and `√(p/16)·σ_i⊗σ_j` otherwise).
pub fn kraus_set(kind: ChannelKind, p: f64) -> Result<KrausSet> {
    check_probability(p)?;
    match kind {
        ChannelKind::Adc | ChannelKind::Pdc => Ok(KrausSet {
            arity: Arity::SingleQubit,
            operators: local_pair(kind, p).iter().map(to_dynamic).collect(),
        }),
        ChannelKind::Dep => {
            let sigma = pauli();
            let mut operators = Vec::with_capacity(16);
            for (a, sa) in sigma.iter().enumerate() {
                for (b, sb) in sigma.iter().enumerate() {
                    let w = if a == 0 && b == 0 { 1.0 - 15.0 * p / 16.0 } else { p / 16.0 };
                    operators.push(to_dynamic(sa).kronecker(&to_dynamic(sb)) * re(w.sqrt()));
                }
            }
            Ok(KrausSet { arity: Arity::TwoQubit, operators })
        }
    }
}

/// The singlet `|1_-⟩` on regions `A`, `B`.
pub fn singlet_ab(statistics: Statistics) -> EnsembleState {
    EnsembleState::pure(&bell_ket(statistics, Mode::A, Mode::B, Bell::OneMinus))
        .expect("singlet is normalizable")
}

/// Checks that every component has exactly one particle in `A` and one in `B`.
pub(crate) fn check_ab_support(state: &EnsembleState) -> Result<()> {
    let basis = pair_basis(state.statistics(), Mode::A, Mode::B);
    for (w, k) in state.components() {
        let single = EnsembleState::new(state.statistics(), vec![(1.0, k.clone())])?;
        let pop = single.population_in(&basis)?;
        if (pop - 1.0).abs() > SUPPORT_TOL {
            return Err(Error::Contract(format!(
                "component with weight {w} is not one particle per region A, B \
                 (population {pop})"
            )));
        }
    }
    Ok(())
}

/// Noisy evolution of a state of two separated qubits in `A` and `B`.
///
/// ADC and PDC act through every product `E_i^A ⊗ E_j^B` of the localized
/// single-qubit Kraus operators; DEP mixes in the maximally mixed state of
/// the `A, B` sector with probability `p`.
pub fn evolve_ab(rho0: &EnsembleState, kind: ChannelKind, p: f64) -> Result<EnsembleState> {
    check_probability(p)?;
    check_ab_support(rho0)?;
    let stats = rho0.statistics();
    let mut out = Vec::new();
    match kind {
        ChannelKind::Adc | ChannelKind::Pdc => {
            let ops = local_pair(kind, p);
            for ea in &ops {
                for eb in &ops {
                    let map = localized_spin_map(&[(Mode::A, *ea), (Mode::B, *eb)]);
                    for (w, k) in rho0.components() {
                        out.push((*w, apply_sp_map(k, &map, Slot::Both)));
                    }
                }
            }
        }
        ChannelKind::Dep => {
            for (w, k) in rho0.components() {
                out.push(((1.0 - p) * w, k.clone()));
            }
            for k in pair_basis(stats, Mode::A, Mode::B) {
                out.push((0.25 * p, k));
            }
        }
    }
    EnsembleState::from_unnormalized(stats, out)
}
