//! Unit table with QUDT IRIs and exact SI factors.
//!
//! Multipliers are kept as integer ratios so that decimal prefixes divide
//! instead of multiplying by an inexact `0.001`.

use std::collections::BTreeMap;

use matspace_rdf::Iri;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

const SEED: &str = include_str!("../data/units.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub symbol: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    pub iri: Iri,
    pub label: String,
    /// SI multiplier numerator.
    pub num: u64,
    /// SI multiplier denominator.
    pub den: u64,
    /// SI offset, non-zero only for affine units.
    pub offset: f64,
    /// Reference dimension tag; conversions require equal tags.
    pub dimension: String,
}

impl Unit {
    pub fn multiplier(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Converts `value` between two units of the same dimension.
///
/// Computes `((value * m_from + o_from) - o_to) / m_to` with the multiplier
/// ratio reduced first, so pure scalings cost one multiply and one divide.
pub fn convert_unit<F: Float>(value: F, from: &Unit, to: &Unit) -> Result<F> {
    if from.dimension != to.dimension {
        return Err(CoreError::IncompatibleUnits {
            from: from.symbol.clone(),
            to: to.symbol.clone(),
        });
    }
    let cast = |x: u128| F::from(x).expect("factor fits the scalar type");
    if from.offset == 0.0 && to.offset == 0.0 {
        let mut n = from.num as u128 * to.den as u128;
        let mut d = from.den as u128 * to.num as u128;
        let g = gcd(n, d);
        n /= g;
        d /= g;
        return Ok(match (n, d) {
            (1, 1) => value,
            (n, 1) => value * cast(n),
            (1, d) => value / cast(d),
            (n, d) => value * cast(n) / cast(d),
        });
    }
    let offset = |o: f64| F::from(o).expect("offset fits the scalar type");
    let si = value * cast(from.num as u128) / cast(from.den as u128) + offset(from.offset);
    Ok((si - offset(to.offset)) * cast(to.den as u128) / cast(to.num as u128))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Symbol and IRI lookup over a set of units.
#[derive(Debug, Clone)]
pub struct UnitTable {
    units: Vec<Unit>,
    by_symbol: BTreeMap<String, usize>,
    by_iri: BTreeMap<Iri, usize>,
}

impl UnitTable {
    pub fn from_units(units: Vec<Unit>) -> Result<Self> {
        let mut by_symbol = BTreeMap::new();
        let mut by_iri = BTreeMap::new();
        for (i, u) in units.iter().enumerate() {
            if u.num == 0 || u.den == 0 {
                return Err(CoreError::Invalid(format!("unit {} has a zero multiplier", u.symbol)));
            }
            for s in std::iter::once(&u.symbol).chain(&u.aliases) {
                if by_symbol.insert(s.clone(), i).is_some() {
                    return Err(CoreError::Conflict(format!("unit symbol {s} defined twice")));
                }
            }
            if by_iri.insert(u.iri.clone(), i).is_some() {
                return Err(CoreError::Conflict(format!("unit IRI {} defined twice", u.iri)));
            }
        }
        Ok(UnitTable { units, by_symbol, by_iri })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_units(serde_json::from_str(text)?)
    }

    /// The built-in table of common mechanical-testing units.
    pub fn seeded() -> Self {
        Self::from_json(SEED).expect("seed unit table is valid")
    }

    pub fn by_symbol(&self, symbol: &str) -> Result<&Unit> {
        self.by_symbol
            .get(symbol.trim())
            .map(|&i| &self.units[i])
            .ok_or_else(|| CoreError::UnknownUnit(symbol.to_string()))
    }

    pub fn by_iri(&self, iri: &Iri) -> Option<&Unit> {
        self.by_iri.get(iri).map(|&i| &self.units[i])
    }

    pub fn contains_iri(&self, iri: &Iri) -> bool {
        self.by_iri.contains_key(iri)
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn convert<F: Float>(&self, value: F, from: &str, to: &str) -> Result<F> {
        convert_unit(value, self.by_symbol(from)?, self.by_symbol(to)?)
    }
}

impl Default for UnitTable {
    fn default() -> Self {
        Self::seeded()
    }
}
