//! Figure presets. Parameters are in units of Γ and copied from the figure captions.

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};

/// (Δ, Ω, δ) per panel.
pub const FIG2: [(f64, f64, f64); 4] = [
    (0.3, 0.02, 0.01),
    (0.3, 1.0, 0.01),
    (5.0, 1.0, 0.01),
    (1.0, 1.0, 10.0),
];
pub const FIG2_LAMBDA: f64 = 25.0;

pub const FIG3: [(f64, f64, f64); 4] = [
    (0.3, 0.02, 0.01),
    (10.0, 1.0, 0.01),
    (10.0, 0.02, 0.2),
    (10.0, 1.0, 0.2),
];
pub const FIG3_LAMBDA: f64 = 1.0;

pub const FIG5: [(f64, f64, f64); 4] = [
    (0.3, 0.02, 0.01),
    (3.5, 0.4, 0.01),
    (10.0, 0.02, 0.08),
    (0.3, 0.02, 0.14),
];
pub const FIG5_LAMBDA: f64 = 0.05;
pub const FIG5_T_END: f64 = 50.0;

pub const FIG7: [(f64, f64, f64); 6] = [
    (0.0, 0.5, 40.0),
    (0.5, 0.2, 10.0),
    (10.0, 2.0, 60.0),
    (0.1, 0.2, 5.0),
    (10.0, 0.2, 60.0),
    (1.0, 0.5, 10.0),
];
pub const FIG7_LAMBDA: f64 = 10.0;

pub const FIG8: [(f64, f64, f64); 6] = [
    (2.0, 0.2, 15.0),
    (0.04, 0.06, 0.4),
    (0.0, 0.2, 10.0),
    (0.05, 0.1, 1.8),
    (20.0, 1.0, 5.0),
    (0.5, 0.2, 2.5),
];
pub const FIG8_LAMBDA: f64 = 0.8;

pub const OMEGA0: f64 = 1.3;
pub const OMEGA_L: f64 = 1.0;
pub const SPIN_BOSON_MASS: f64 = 5.0;

pub const FIGURES: [u32; 8] = [2, 3, 4, 5, 6, 7, 8, 9];

/// One panel of a figure; most panels have a single variant, Figs. 6 and 9
/// compare two.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub id: String,
    pub variants: Vec<(Option<&'static str>, ScenarioConfig)>,
}

impl Panel {
    fn single(id: String, config: ScenarioConfig) -> Self {
        Panel {
            id,
            variants: vec![(None, config)],
        }
    }

    /// File stem for a variant, e.g. `fig6a_minus_infinity`.
    pub fn stem(&self, variant: Option<&str>) -> String {
        match variant {
            Some(v) => format!("fig{}_{v}", self.id),
            None => format!("fig{}", self.id),
        }
    }
}

fn lorentzian(
    name: String,
    lambda: f64,
    (detuning, drive, delta): (f64, f64, f64),
    t_end: f64,
    methods: &[&str],
) -> ScenarioConfig {
    ScenarioConfig {
        name: Some(name),
        model: Some("lorentzian".into()),
        gamma: Some(1.0),
        lambda: Some(lambda),
        delta: Some(delta),
        detuning: Some(detuning),
        drive: Some(drive),
        initial: Some("excited".into()),
        t_end: Some(t_end),
        n_steps: Some(crate::config::DEFAULT_N_STEPS),
        methods: Some(methods.iter().map(|m| m.to_string()).collect()),
        lower_limit: Some("minus_infinity".into()),
        ..ScenarioConfig::default()
    }
}

const LETTERS: [char; 6] = ['a', 'b', 'c', 'd', 'e', 'f'];
const COMPARE: [&str; 3] = ["exact", "tcl", "nz"];
const SECULAR: [&str; 3] = ["exact", "tcl", "tcl_secular"];

/// The three parameter sets reused by Figs. 4, 6 and 9: 2(a), 3(a), 5(a).
fn reused() -> [(f64, (f64, f64, f64), f64); 3] {
    [
        (FIG2_LAMBDA, FIG2[0], 10.0),
        (FIG3_LAMBDA, FIG3[0], 10.0),
        (FIG5_LAMBDA, FIG5[0], FIG5_T_END),
    ]
}

pub fn figure(fig: u32) -> Result<Vec<Panel>> {
    let simple = |lambda: f64, params: &[(f64, f64, f64)], t_end: f64, methods: &[&str]| {
        params
            .iter()
            .zip(LETTERS)
            .map(|(&p, c)| {
                let id = format!("{fig}{c}");
                Panel::single(
                    id.clone(),
                    lorentzian(format!("fig{id}"), lambda, p, t_end, methods),
                )
            })
            .collect::<Vec<_>>()
    };
    Ok(match fig {
        2 => simple(FIG2_LAMBDA, &FIG2, 10.0, &COMPARE),
        3 => simple(FIG3_LAMBDA, &FIG3, 10.0, &COMPARE),
        5 => simple(FIG5_LAMBDA, &FIG5, FIG5_T_END, &COMPARE),
        7 => simple(FIG7_LAMBDA, &FIG7, 10.0, &SECULAR),
        8 => simple(FIG8_LAMBDA, &FIG8, 10.0, &SECULAR),
        4 => reused()
            .into_iter()
            .zip(LETTERS)
            .map(|((lambda, p, _), c)| {
                let id = format!("4{c}");
                Panel::single(
                    id.clone(),
                    lorentzian(format!("fig{id}"), lambda, p, 10.0, &COMPARE),
                )
            })
            .collect(),
        6 => reused()
            .into_iter()
            .zip(LETTERS)
            .map(|((lambda, p, _), c)| {
                let id = format!("6{c}");
                let base = ScenarioConfig {
                    omega0: Some(OMEGA0),
                    omega_l: Some(OMEGA_L),
                    ..lorentzian(format!("fig{id}"), lambda, p, 10.0, &["exact"])
                };
                let cut = ScenarioConfig {
                    name: Some(format!("fig{id}_minus_omega_l")),
                    lower_limit: Some("minus_omega_l".into()),
                    ..base.clone()
                };
                let full = ScenarioConfig {
                    name: Some(format!("fig{id}_minus_infinity")),
                    ..base
                };
                Panel {
                    id,
                    variants: vec![(Some("minus_omega_l"), cut), (Some("minus_infinity"), full)],
                }
            })
            .collect(),
        9 => reused()
            .into_iter()
            .zip(LETTERS)
            .map(|((lambda, p, t_end), c)| {
                let id = format!("9{c}");
                let lz = ScenarioConfig {
                    name: Some(format!("fig{id}_lorentzian")),
                    ..lorentzian(String::new(), lambda, p, t_end, &["exact"])
                };
                let sb = ScenarioConfig {
                    name: Some(format!("fig{id}_spin_boson")),
                    model: Some("spin_boson".into()),
                    mass: Some(SPIN_BOSON_MASS),
                    omega0: Some(OMEGA0),
                    omega_l: Some(OMEGA_L),
                    delta: None,
                    lower_limit: Some("minus_omega_l".into()),
                    ..lz.clone()
                };
                Panel {
                    id,
                    variants: vec![(Some("lorentzian"), lz), (Some("spin_boson"), sb)],
                }
            })
            .collect(),
        other => {
            return Err(CliError::config(
                "figure",
                format!("unknown figure {other} (2-9)"),
            ))
        }
    })
}

/// Accepts `fig2`, `2`, `fig2a` or `2a`.
pub fn resolve(id: &str) -> Result<Vec<Panel>> {
    let bare = id.trim().trim_start_matches("fig");
    let unknown = || CliError::config("figure", format!("unknown figure id `{id}`"));
    let digits: String = bare.chars().take_while(|c| c.is_ascii_digit()).collect();
    let fig: u32 = digits.parse().map_err(|_| unknown())?;
    let panels = figure(fig).map_err(|_| unknown())?;
    let suffix = &bare[digits.len()..];
    if suffix.is_empty() {
        return Ok(panels);
    }
    let wanted = format!("{fig}{suffix}");
    panels
        .into_iter()
        .find(|p| p.id == wanted)
        .map(|p| vec![p])
        .ok_or_else(unknown)
}
