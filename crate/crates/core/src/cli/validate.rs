//! Seeded comparison of the closed forms against the labeled oracle.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{p_analytic, p_numeric, ChannelKind, LorentzianBath};
use crate::entanglement::ClosedForms;
use crate::error::{Error, Result};
use crate::nolabel::Statistics;
use crate::oracle::oracle_pipeline;
use crate::protocol::DeformationSpec;

use super::sweep::format_g12;

/// Deviation allowed between oracle and closed forms.
pub const THRESHOLD: f64 = 1e-9;
/// Deviation allowed between the two routes to `p(t)`.
pub const P_THRESHOLD: f64 = 1e-6;

/// One random draw.
#[derive(Clone, Debug)]
pub struct Case {
    pub kind: ChannelKind,
    pub bath: LorentzianBath,
    pub gamma_t: f64,
    pub spec: DeformationSpec,
}

fn random_phase(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Random complex deformation, redrawn until both `lr' ± ηl'r` are clear of zero.
pub fn random_spec(rng: &mut ChaCha8Rng, statistics: Statistics) -> DeformationSpec {
    loop {
        let a: f64 = rng.gen();
        let b: f64 = rng.gen();
        let spec = DeformationSpec::new(
            random_phase(rng) * a.sqrt(),
            random_phase(rng) * (1.0 - a).sqrt(),
            random_phase(rng) * b.sqrt(),
            random_phase(rng) * (1.0 - b).sqrt(),
            statistics,
        )
        .expect("normalized by construction");
        let s = spec.l() * spec.rp();
        let t = spec.lp() * spec.r() * spec.eta();
        if (s - t).norm_sqr() > 1e-6 && (s + t).norm_sqr() > 1e-6 {
            return spec;
        }
    }
}

/// Draws `n` cases deterministically from `seed`.
pub fn draw_cases(seed: u64, n: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let kind = ChannelKind::ALL[rng.gen_range(0..3)];
            let statistics = if rng.gen_bool(0.5) { Statistics::Boson } else { Statistics::Fermion };
            let bath = if rng.gen_bool(0.5) {
                LorentzianBath::markovian(1.0)
            } else {
                LorentzianBath::non_markovian(1.0)
            }
            .expect("preset baths are valid");
            let gamma_t = rng.gen_range(0.0..10.0);
            let spec = random_spec(&mut rng, statistics);
            Case { kind, bath, gamma_t, spec }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub seed: u64,
    pub cases: usize,
    pub max_delta_concurrence: f64,
    pub max_delta_probability: f64,
    pub max_delta_p: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.max_delta_concurrence <= THRESHOLD
            && self.max_delta_probability <= THRESHOLD
            && self.max_delta_p <= P_THRESHOLD
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed={} cases={}", self.seed, self.cases);
        let _ = writeln!(s, "max_abs_delta_concurrence={}", format_g12(self.max_delta_concurrence));
        let _ = writeln!(s, "max_abs_delta_probability={}", format_g12(self.max_delta_probability));
        let _ = writeln!(s, "max_abs_delta_p_numeric_vs_analytic={}", format_g12(self.max_delta_p));
        let _ = writeln!(s, "threshold={} p_threshold={}", format_g12(THRESHOLD), format_g12(P_THRESHOLD));
        let _ = writeln!(s, "status={}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

fn check_case(case: &Case) -> Result<(f64, f64, f64)> {
    let t = case.gamma_t / case.bath.gamma();
    let p = p_numeric(t, &case.bath)?;
    let oracle = oracle_pipeline(case.kind, &case.bath, t, &case.spec)?;
    let closed = ClosedForms::new(case.kind, &case.spec)?;
    let dc = (oracle.concurrence - closed.concurrence(p)?.value()).abs();
    let dp = (oracle.probability - closed.probability(p)?).abs();
    let dpt = (p - p_analytic(t, &case.bath)?).abs();
    Ok((dc, dp, dpt))
}

/// Runs the oracle on `n_cases` seeded draws and records the worst deviations.
pub fn run_validate(seed: u64, n_cases: usize) -> Result<Report> {
    if n_cases == 0 {
        return Err(Error::Domain("validation needs at least one case".into()));
    }
    let cases = draw_cases(seed, n_cases);
    let devs = cases.par_iter().map(check_case).collect::<Result<Vec<_>>>()?;
    let fold = |f: fn(&(f64, f64, f64)) -> f64| devs.iter().map(f).fold(0.0, f64::max);
    Ok(Report {
        seed,
        cases: n_cases,
        max_delta_concurrence: fold(|d| d.0),
        max_delta_probability: fold(|d| d.1),
        max_delta_p: fold(|d| d.2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_reproducible() {
        let a = draw_cases(3, 5);
        let b = draw_cases(3, 5);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.spec, y.spec);
            assert_eq!(x.gamma_t, y.gamma_t);
            assert_eq!(x.kind, y.kind);
        }
    }

    #[test]
    fn zero_cases_is_rejected() {
        assert!(matches!(run_validate(1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn small_run_passes() {
        let r = run_validate(11, 6).unwrap();
        assert!(r.passed(), "{}", r.render());
        assert_eq!(r.render(), run_validate(11, 6).unwrap().render());
    }
}
