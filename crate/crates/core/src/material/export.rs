//! Syntactic material cards and the plain-text evaluation report.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{HockettSherby, MechanicalProperties};
use crate::{CoreError, Result};

/// Poisson ratio written into every card; a uniaxial test cannot measure it.
pub const POISSON_RATIO: f64 = 0.3;
const TABLE_ROWS: usize = 50;
const TABLE_START: f64 = 1e-4;

/// Card content as read back from a card item's graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardData {
    pub name: String,
    pub properties: MechanicalProperties<f64>,
    pub model: Option<HockettSherby<f64>>,
    /// Largest plastic strain in the fitted data.
    pub max_plastic_strain: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CardTemplate {
    HsAnalytic,
    TabulatedPlasticity,
}

impl CardTemplate {
    pub fn id(self) -> &'static str {
        match self {
            CardTemplate::HsAnalytic => "hs-analytic",
            CardTemplate::TabulatedPlasticity => "tabulated-plasticity",
        }
    }

    pub fn filename(self, card: &str) -> String {
        let stem: String = card
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        format!("{stem}.{}.inp", self.id())
    }
}

impl FromStr for CardTemplate {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hs-analytic" => Ok(CardTemplate::HsAnalytic),
            "tabulated-plasticity" => Ok(CardTemplate::TabulatedPlasticity),
            other => Err(CoreError::Invalid(format!("unknown card template '{other}'"))),
        }
    }
}

/// `%g`-style formatting with 6 significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-4..6).contains(&exp) {
        trim(format!("{v:.*}", (5 - exp) as usize))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa.to_string()), exp.abs())
    }
}

fn header(out: &mut String, card: &CardData, template: CardTemplate) {
    let _ = writeln!(out, "** material card {} ({})", card.name, template.id());
    let _ = writeln!(out, "** assumption: Poisson ratio {POISSON_RATIO} (not measured)");
    let _ = writeln!(out, "*MATERIAL, NAME={}", card.name);
    let _ = writeln!(out, "*ELASTIC");
    let _ = writeln!(out, "{}, {}", format_sig6(card.properties.e), format_sig6(POISSON_RATIO));
}

/// Renders a card. Output depends only on the card content.
pub fn export_card(card: &CardData, template: CardTemplate) -> Result<String> {
    let model = card
        .model
        .as_ref()
        .ok_or_else(|| CoreError::Invalid(format!("template {} needs a Hockett-Sherby block", template.id())))?;
    let mut out = String::new();
    header(&mut out, card, template);
    match template {
        CardTemplate::HsAnalytic => {
            let _ = writeln!(out, "*HOCKETT_SHERBY");
            let _ = writeln!(
                out,
                "{}, {}, {}, {}",
                format_sig6(model.sigma_i),
                format_sig6(model.sigma_sat),
                format_sig6(model.a),
                format_sig6(model.p)
            );
        }
        CardTemplate::TabulatedPlasticity => {
            let top = card
                .max_plastic_strain
                .filter(|m| *m > TABLE_START)
                .ok_or_else(|| CoreError::Invalid("card lacks a plastic strain range above 1e-4".into()))?;
            let _ = writeln!(out, "*PLASTIC");
            for i in 0..TABLE_ROWS {
                let ep = TABLE_START + (top - TABLE_START) * i as f64 / (TABLE_ROWS - 1) as f64;
                let _ = writeln!(out, "{}, {}", format_sig6(model.flow_stress(ep)), format_sig6(ep));
            }
        }
    }
    Ok(out)
}

/// Human-readable summary of an evaluation.
pub fn report(source: &str, props: &MechanicalProperties<f64>, model: Option<&HockettSherby<f64>>, settings: &[(String, String)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Tensile test evaluation of {source}");
    let _ = writeln!(out);
    let _ = writeln!(out, "Young's modulus E      {} MPa", format_sig6(props.e));
    let _ = writeln!(out, "Yield strength Rp0.2   {} MPa", format_sig6(props.rp02));
    let _ = writeln!(out, "Tensile strength Rm    {} MPa", format_sig6(props.rm));
    let _ = writeln!(out, "Uniform elongation Ag  {}", format_sig6(props.ag));
    match model {
        Some(m) => {
            let _ = writeln!(out);
            let _ = writeln!(out, "Hockett-Sherby fit");
            let _ = writeln!(out, "  sigma_i    {} MPa", format_sig6(m.sigma_i));
            let _ = writeln!(out, "  sigma_sat  {} MPa", format_sig6(m.sigma_sat));
            let _ = writeln!(out, "  a          {}", format_sig6(m.a));
            let _ = writeln!(out, "  p          {}", format_sig6(m.p));
            let _ = writeln!(out, "  rms        {} MPa", format_sig6(m.rms));
        }
        None => {
            let _ = writeln!(out, "\nNo plastic region to fit.");
        }
    }
    if !settings.is_empty() {
        let _ = writeln!(out, "\nSettings");
        for (k, v) in settings {
            let _ = writeln!(out, "  {k} = {v}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn card(model: bool) -> CardData {
        CardData {
            name: "DX56D".into(),
            properties: MechanicalProperties { e: 210345.678, rp02: 151.2345, rm: 297.5, ag: 0.2 },
            model: model.then(|| HockettSherby { sigma_i: 150.0, sigma_sat: 320.5, a: 8.0, p: 0.7, rms: 0.1 }),
            max_plastic_strain: Some(0.18),
        }
    }

    #[test]
    fn sig6() {
        assert_eq!(format_sig6(210345.678), "210346");
        assert_eq!(format_sig6(0.3), "0.3");
        assert_eq!(format_sig6(1234567.0), "1.23457e+06");
        assert_eq!(format_sig6(0.0001), "0.0001");
        assert_eq!(format_sig6(0.00001234), "1.234e-05");
        assert_eq!(format_sig6(-2.5), "-2.5");
        assert_eq!(format_sig6(999999.5), "1e+06");
    }

    #[test]
    fn hs_analytic_golden() {
        let text = export_card(&card(true), CardTemplate::HsAnalytic).unwrap();
        let expected = "** material card DX56D (hs-analytic)\n\
                        ** assumption: Poisson ratio 0.3 (not measured)\n\
                        *MATERIAL, NAME=DX56D\n\
                        *ELASTIC\n\
                        210346, 0.3\n\
                        *HOCKETT_SHERBY\n\
                        150, 320.5, 8, 0.7\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn tabulated_has_fifty_rows() {
        let text = export_card(&card(true), CardTemplate::TabulatedPlasticity).unwrap();
        let rows: Vec<&str> = text.lines().skip_while(|l| *l != "*PLASTIC").skip(1).collect();
        assert_eq!(rows.len(), 50);
        assert!(rows[0].ends_with(", 0.0001"));
        assert!(rows[49].ends_with(", 0.18"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn missing_model_block() {
        assert!(export_card(&card(false), CardTemplate::HsAnalytic).is_err());
        assert!("abaqus".parse::<CardTemplate>().is_err());
        assert_eq!("hs-analytic".parse::<CardTemplate>().unwrap(), CardTemplate::HsAnalytic);
    }
}
