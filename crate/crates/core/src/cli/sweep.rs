//! Parameter sweeps over `(I, γt)` and the figure presets built on them.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channels::{p_analytic, ChannelKind, LorentzianBath};
use crate::entanglement::{concurrence_closed, delta_c, success_probability_closed};
use crate::error::{Error, Result};
use crate::nolabel::Statistics;
use crate::protocol::spec_for_target_i;

pub const CSV_HEADER: &str = "gamma_t,p,I,statistics,channel,concurrence,delta_c,probability";

/// Indistinguishability values plotted when none are given.
pub const DEFAULT_I_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Bath regime of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    /// `λ = 5γ`
    Markovian,
    /// `λ = 0.01γ`
    NonMarkovian,
    Custom { lambda: f64 },
}

impl Regime {
    pub fn bath(self, gamma: f64) -> Result<LorentzianBath> {
        match self {
            Regime::Markovian => LorentzianBath::markovian(gamma),
            Regime::NonMarkovian => LorentzianBath::non_markovian(gamma),
            Regime::Custom { lambda } => LorentzianBath::new(gamma, lambda),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::Markovian => "markovian",
            Regime::NonMarkovian => "nonmarkovian",
            Regime::Custom { .. } => "custom",
        }
    }
}

/// Column a figure is about. Every CSV carries all of them; this only
/// selects what the gnuplot helper draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Concurrence,
    DeltaC,
    Probability,
    POfT,
}

impl Quantity {
    fn column(self) -> usize {
        match self {
            Quantity::POfT => 2,
            Quantity::Concurrence => 6,
            Quantity::DeltaC => 7,
            Quantity::Probability => 8,
        }
    }

    fn axis_label(self) -> &'static str {
        match self {
            Quantity::POfT => "p(t)",
            Quantity::Concurrence => "C",
            Quantity::DeltaC => "Delta C",
            Quantity::Probability => "P_LR",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::Concurrence => "concurrence",
            Quantity::DeltaC => "delta_c",
            Quantity::Probability => "probability",
            Quantity::POfT => "p_of_t",
        })
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "concurrence" | "c" => Ok(Quantity::Concurrence),
            "delta_c" | "gain" => Ok(Quantity::DeltaC),
            "probability" | "p_lr" => Ok(Quantity::Probability),
            "p_of_t" | "p" => Ok(Quantity::POfT),
            other => Err(Error::Domain(format!("unknown quantity '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub kind: ChannelKind,
    pub gamma: f64,
    pub regime: Regime,
    pub i_values: Vec<f64>,
    pub statistics: Statistics,
    /// Largest `γt`.
    pub t_max: f64,
    pub n_points: usize,
    pub quantity: Quantity,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<LorentzianBath> {
        if self.n_points < 2 {
            return Err(Error::Domain(format!("need at least 2 time points, got {}", self.n_points)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Domain(format!("t_max must be positive, got {}", self.t_max)));
        }
        if let Some(bad) = self.i_values.iter().find(|i| !(0.0..=1.0).contains(*i)) {
            return Err(Error::Domain(format!("indistinguishability {bad} outside [0, 1]")));
        }
        self.regime.bath(self.gamma)
    }

    pub fn gamma_t_grid(&self) -> Vec<f64> {
        let n = self.n_points - 1;
        (0..=n).map(|k| self.t_max * k as f64 / n as f64).collect()
    }
}

/// One CSV row; `None` cells are written empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub gamma_t: f64,
    pub p: f64,
    pub indist: f64,
    pub statistics: Statistics,
    pub kind: ChannelKind,
    pub concurrence: Option<f64>,
    pub delta_c: Option<f64>,
    pub probability: Option<f64>,
}

impl Row {
    pub fn to_csv(&self) -> String {
        let cell = |x: Option<f64>| x.map(format_g12).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            format_g12(self.gamma_t),
            format_g12(self.p),
            format_g12(self.indist),
            self.statistics,
            self.kind,
            cell(self.concurrence),
            cell(self.delta_c),
            cell(self.probability),
        )
    }
}

/// Closed-form record at one point.
pub fn evaluate_point(
    kind: ChannelKind,
    bath: &LorentzianBath,
    gamma_t: f64,
    indist: f64,
    statistics: Statistics,
) -> Result<Row> {
    let p = p_analytic(gamma_t / bath.gamma(), bath)?;
    let spec = spec_for_target_i(indist, statistics)?;
    let ok = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Domain(_)) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(Row {
        gamma_t,
        p,
        indist,
        statistics,
        kind,
        concurrence: ok(concurrence_closed(kind, &spec, p).map(|c| c.value()))?,
        delta_c: ok(delta_c(kind, &spec, p))?,
        probability: ok(success_probability_closed(kind, &spec, p))?,
    })
}

/// Rows ordered by `I` (outer) then `γt` (inner). Points are computed in
/// parallel; collection keeps the order.
pub fn sweep_rows(config: &SweepConfig) -> Result<Vec<Row>> {
    let bath = config.validate()?;
    let ts = config.gamma_t_grid();
    let points: Vec<(f64, f64)> =
        config.i_values.iter().flat_map(|&i| ts.iter().map(move |&t| (i, t))).collect();
    points
        .par_iter()
        .map(|&(i, t)| evaluate_point(config.kind, &bath, t, i, config.statistics))
        .collect()
}

/// Full CSV text (header plus rows, LF line endings).
pub fn sweep_csv(config: &SweepConfig) -> Result<String> {
    let rows = sweep_rows(config)?;
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    Ok(out)
}

/// `%.12g`: 12 significant digits, trailing zeros removed, exponent form
/// outside `[1e-4, 1e12)`.
pub fn format_g12(x: f64) -> String {
    const SIG: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A figure: one channel and quantity, with a Markovian and a
/// non-Markovian panel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FigurePreset {
    pub id: &'static str,
    pub kind: ChannelKind,
    pub quantity: Quantity,
}

pub const FIGURES: [FigurePreset; 9] = [
    FigurePreset { id: "fig2", kind: ChannelKind::Adc, quantity: Quantity::Concurrence },
    FigurePreset { id: "fig3", kind: ChannelKind::Adc, quantity: Quantity::DeltaC },
    FigurePreset { id: "fig4", kind: ChannelKind::Adc, quantity: Quantity::Probability },
    FigurePreset { id: "fig5", kind: ChannelKind::Pdc, quantity: Quantity::Concurrence },
    FigurePreset { id: "fig6", kind: ChannelKind::Pdc, quantity: Quantity::DeltaC },
    FigurePreset { id: "fig7", kind: ChannelKind::Pdc, quantity: Quantity::Probability },
    FigurePreset { id: "fig8", kind: ChannelKind::Dep, quantity: Quantity::Concurrence },
    FigurePreset { id: "fig9", kind: ChannelKind::Dep, quantity: Quantity::DeltaC },
    FigurePreset { id: "fig10", kind: ChannelKind::Dep, quantity: Quantity::Probability },
];

/// `γt` range per panel: the non-Markovian panel is long enough to show
/// the first revivals (period of `q²` is about `44/γ` at `λ = 0.01γ`).
pub const MARKOVIAN_T_MAX: f64 = 10.0;
pub const NON_MARKOVIAN_T_MAX: f64 = 100.0;
pub const FIGURE_POINTS: usize = 501;

impl FigurePreset {
    pub fn find(id: &str) -> Result<Self> {
        FIGURES.iter().copied().find(|f| f.id == id).ok_or_else(|| {
            let ids: Vec<&str> = FIGURES.iter().map(|f| f.id).collect();
            Error::Domain(format!("unknown figure '{id}' (available: {})", ids.join(", ")))
        })
    }

    /// Markovian then non-Markovian panel.
    pub fn panels(&self, gamma: f64, statistics: Statistics, i_values: &[f64], n_points: usize) -> [SweepConfig; 2] {
        let make = |regime, t_max| SweepConfig {
            kind: self.kind,
            gamma,
            regime,
            i_values: i_values.to_vec(),
            statistics,
            t_max,
            n_points,
            quantity: self.quantity,
        };
        [make(Regime::Markovian, MARKOVIAN_T_MAX), make(Regime::NonMarkovian, NON_MARKOVIAN_T_MAX)]
    }
}

/// gnuplot script drawing one curve per `I` from a sweep CSV.
pub fn gnuplot_script(csv_path: &str, config: &SweepConfig) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key outside right\n");
    s.push_str("set xlabel 'gamma t'\n");
    s.push_str(&format!("set ylabel '{}'\n", config.quantity.axis_label()));
    s.push_str(&format!(
        "set title '{} {} {}'\n",
        config.kind,
        config.regime.label(),
        config.statistics
    ));
    let col = config.quantity.column();
    let curves: Vec<String> = config
        .i_values
        .iter()
        .map(|i| {
            format!(
                "'{csv_path}' using 1:(abs($3-{i})<1e-12 ? ${col} : 1/0) skip 1 with lines title 'I={}'",
                format_g12(*i)
            )
        })
        .collect();
    if !curves.is_empty() {
        s.push_str("plot ");
        s.push_str(&curves.join(", \\\n     "));
        s.push('\n');
    }
    s
}
