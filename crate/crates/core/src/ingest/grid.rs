use super::{GridLayout, RawColumn, RawMeta, RawRecord};
use crate::{CoreError, Result};

/// A rectangular matrix of cell texts, e.g. a spreadsheet rendered to CSV.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Grid {
    pub rows: Vec<Vec<String>>,
}

impl Grid {
    pub fn new(rows: Vec<Vec<String>>) -> Self {
        Grid { rows }
    }

    pub fn from_delimited(text: &str, delimiter: char) -> Result<Self> {
        let delimiter = u8::try_from(delimiter)
            .ok()
            .filter(u8::is_ascii)
            .ok_or_else(|| CoreError::Invalid("delimiter must be ASCII".into()))?;
        let mut reader = ::csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .delimiter(delimiter)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for r in reader.records() {
            let r = r.map_err(|e| CoreError::Parse(e.to_string()))?;
            rows.push(r.iter().map(str::to_string).collect());
        }
        Ok(Grid { rows })
    }

    pub fn cell(&self, addr: CellAddress) -> Result<&str> {
        self.rows
            .get(addr.row)
            .and_then(|r| r.get(addr.col))
            .map(String::as_str)
            .ok_or_else(|| CoreError::Parse(format!("cell {addr} is outside the grid")))
    }
}

/// Zero-based cell coordinates parsed from spreadsheet notation (`B3`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellAddress {
    pub row: usize,
    pub col: usize,
}

impl CellAddress {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().to_ascii_uppercase();
        let split = t.find(|c: char| c.is_ascii_digit()).unwrap_or(t.len());
        let (letters, digits) = t.split_at(split);
        let bad = || CoreError::Invalid(format!("bad cell address '{text}'"));
        if letters.is_empty() || digits.is_empty() || !letters.chars().all(|c| c.is_ascii_uppercase()) {
            return Err(bad());
        }
        let col = letters.bytes().fold(0usize, |acc, b| acc * 26 + (b - b'A' + 1) as usize) - 1;
        let row: usize = digits.parse().map_err(|_| bad())?;
        if row == 0 {
            return Err(bad());
        }
        Ok(CellAddress { row: row - 1, col })
    }
}

impl std::fmt::Display for CellAddress {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut letters = Vec::new();
        let mut c = self.col + 1;
        while c > 0 {
            letters.push(b'A' + ((c - 1) % 26) as u8);
            c = (c - 1) / 26;
        }
        letters.reverse();
        write!(f, "{}{}", String::from_utf8_lossy(&letters), self.row + 1)
    }
}

/// Reads metadata from addressed cells and a table from one range whose
/// first row names the columns.
pub fn parse_grid(grid: &Grid, layout: &GridLayout) -> Result<RawRecord> {
    let mut record = RawRecord::default();
    for m in &layout.metadata {
        let addr = CellAddress::parse(&m.cell)?;
        let value = grid.cell(addr)?.trim();
        if value.is_empty() {
            return Err(CoreError::Parse(format!("mandatory cell {addr} for '{}' is empty", m.key)));
        }
        record.metadata.push(RawMeta {
            key: m.key.clone(),
            value: value.to_string(),
            unit: m.unit.clone(),
        });
    }
    if let Some(range) = &layout.table {
        let (a, b) = range
            .split_once(':')
            .ok_or_else(|| CoreError::Invalid(format!("bad range '{range}'")))?;
        let (a, b) = (CellAddress::parse(a)?, CellAddress::parse(b)?);
        if b.row <= a.row || b.col < a.col {
            return Err(CoreError::Invalid(format!("range '{range}' needs a header row and one data row")));
        }
        for col in a.col..=b.col {
            let name = grid.cell(CellAddress { row: a.row, col })?.trim().to_string();
            let mut values = Vec::with_capacity(b.row - a.row);
            for row in a.row + 1..=b.row {
                let addr = CellAddress { row, col };
                let cell = grid.cell(addr)?;
                let (v, _) = super::parse_number(cell, layout.decimal)
                    .ok_or_else(|| CoreError::Parse(format!("non-numeric cell {addr}: '{cell}'")))?;
                values.push(v);
            }
            record.columns.push(RawColumn { name, unit: None, values });
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::GridMeta;

    fn grid() -> Grid {
        Grid::from_delimited("Specimen,,\nMaterial,DX56D,\n,,\n,,\nstrain,stress,force\n0.0,0.0,0.0\n0.001,210.0,6523.0\n", ',').unwrap()
    }

    #[test]
    fn addresses() {
        assert_eq!(CellAddress::parse("B3").unwrap(), CellAddress { row: 2, col: 1 });
        assert_eq!(CellAddress::parse("AA1").unwrap().col, 26);
        assert_eq!(CellAddress::parse("AA1").unwrap().to_string(), "AA1");
        assert!(CellAddress::parse("3B").is_err());
        assert!(CellAddress::parse("A0").is_err());
    }

    #[test]
    fn metadata_and_range() {
        let layout = GridLayout {
            metadata: vec![GridMeta { key: "Material".into(), cell: "B2".into(), unit: None }],
            table: Some("A5:C7".into()),
            delimiter: ',',
            decimal: '.',
        };
        let r = parse_grid(&grid(), &layout).unwrap();
        assert_eq!(r.metadata[0].value, "DX56D");
        assert_eq!(r.columns.len(), 3);
        assert!(r.columns.iter().all(|c| c.values.len() == 2));
        assert_eq!(r.columns[2].name, "force");
    }

    #[test]
    fn out_of_bounds_and_empty() {
        let far = GridLayout {
            metadata: vec![GridMeta { key: "x".into(), cell: "ZZ99".into(), unit: None }],
            ..GridLayout::default()
        };
        assert!(parse_grid(&grid(), &far).is_err());
        let empty = GridLayout {
            metadata: vec![GridMeta { key: "x".into(), cell: "C1".into(), unit: None }],
            ..GridLayout::default()
        };
        assert!(parse_grid(&grid(), &empty).is_err());
    }
}
