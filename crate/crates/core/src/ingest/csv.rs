use super::{CsvDialect, RawColumn, RawMeta, RawRecord, TableMode};
use crate::{CoreError, Result};

/// Parses a metadata block of `key[,value[,unit]]` rows, optionally followed
/// by a blank line and a numeric column table.
pub fn parse_csv(bytes: &[u8], dialect: &CsvDialect) -> Result<RawRecord> {
    let text = std::str::from_utf8(bytes).map_err(|e| CoreError::Parse(format!("not UTF-8: {e}")))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();

    let boundary = match dialect.table {
        TableMode::Absent => None,
        _ => lines.iter().position(|l| l.trim().is_empty()).filter(|&i| {
            // a trailing blank line is not a table separator
            lines[i..].iter().any(|l| !l.trim().is_empty())
        }),
    };
    if dialect.table == TableMode::Required && boundary.is_none() {
        return Err(CoreError::Parse("header/metadata boundary not found".into()));
    }
    let (meta_lines, table_lines) = match boundary {
        Some(i) => (&lines[..i], &lines[i + 1..]),
        None => (&lines[..], &lines[lines.len()..]),
    };

    let mut record = RawRecord::default();
    let meta_rows = split_rows(meta_lines, dialect)?;
    for (n, row) in meta_rows.into_iter().enumerate().skip(dialect.metadata_header_rows) {
        if row.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let mut fields = row.into_iter();
        let key = fields.next().unwrap_or_default().trim().to_string();
        let value = fields.next().unwrap_or_default().trim().to_string();
        let unit = fields.next().map(|u| u.trim().to_string()).filter(|u| !u.is_empty());
        if fields.any(|extra| !extra.trim().is_empty()) {
            return Err(CoreError::Parse(format!("metadata row {} has more than three fields", n + 1)));
        }
        if key.is_empty() {
            return Err(CoreError::Parse(format!("metadata row {} has an empty key", n + 1)));
        }
        if !dialect.allow_repeated_keys && record.metadata.iter().any(|m| m.key == key) {
            return Err(CoreError::Parse(format!("repeated metadata key '{key}'")));
        }
        record.metadata.push(RawMeta { key, value, unit });
    }

    if boundary.is_some() {
        record.columns = parse_table(table_lines, dialect)?;
    }
    Ok(record)
}

fn split_rows(lines: &[&str], dialect: &CsvDialect) -> Result<Vec<Vec<String>>> {
    let joined = lines.join("\n");
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(ascii(dialect.delimiter, "delimiter")?)
        .quote(ascii(dialect.quote, "quote")?)
        .from_reader(joined.as_bytes());
    let mut rows = Vec::new();
    for r in reader.records() {
        let r = r.map_err(|e| CoreError::Parse(e.to_string()))?;
        rows.push(r.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

fn ascii(c: char, what: &str) -> Result<u8> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| CoreError::Invalid(format!("{what} must be an ASCII character")))
}

fn parse_table(lines: &[&str], dialect: &CsvDialect) -> Result<Vec<RawColumn>> {
    let rows: Vec<Vec<String>> = split_rows(lines, dialect)?
        .into_iter()
        .filter(|r| !r.iter().all(|f| f.trim().is_empty()))
        .collect();
    if dialect.table_header_rows == 0 || rows.len() < dialect.table_header_rows {
        return Err(CoreError::Parse("table header missing".into()));
    }
    let names: Vec<String> = rows[0].iter().map(|s| s.trim().to_string()).collect();
    let width = names.len();
    let units: Vec<Option<String>> = if dialect.table_header_rows >= 2 {
        rows[1].iter().map(|u| Some(u.trim().to_string()).filter(|u| !u.is_empty())).collect()
    } else {
        vec![None; width]
    };
    if units.len() != width {
        return Err(CoreError::Parse("table unit row width differs from the header".into()));
    }
    let mut values = vec![Vec::new(); width];
    for (n, row) in rows.iter().enumerate().skip(dialect.table_header_rows) {
        if row.len() != width {
            return Err(CoreError::Parse(format!(
                "ragged table row {}: {} fields, expected {width}",
                n + 1,
                row.len()
            )));
        }
        for (col, cell) in row.iter().enumerate() {
            let v = super::parse_number(cell.trim(), dialect.decimal).ok_or_else(|| {
                CoreError::Parse(format!("non-numeric cell '{}' in column '{}'", cell.trim(), names[col]))
            })?;
            values[col].push(v.0);
        }
    }
    if values.first().is_some_and(Vec::is_empty) {
        return Err(CoreError::Parse("table has no data rows".into()));
    }
    Ok(names
        .into_iter()
        .zip(units)
        .zip(values)
        .map(|((name, unit), values)| RawColumn { name, unit, values })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tab() -> CsvDialect {
        CsvDialect {
            delimiter: '\t',
            table_header_rows: 2,
            ..CsvDialect::default()
        }
    }

    const SAMPLE: &str = "\"Werkstoff\"\t\"DX56D\"\n\"Probendicke\"\t\"1.55\"\t\"mm\"\n\"Bemerkung\"\t\"\"\n\n\"strain\"\t\"stress\"\n\"1\"\t\"MPa\"\n0.0\t0.0\n0.001\t210.0\n";

    #[test]
    fn metadata_and_table() {
        let r = parse_csv(SAMPLE.as_bytes(), &tab()).unwrap();
        assert_eq!(r.metadata.len(), 3);
        assert_eq!(r.metadata[1], RawMeta { key: "Probendicke".into(), value: "1.55".into(), unit: Some("mm".into()) });
        assert_eq!(r.metadata[0].unit, None);
        assert_eq!(r.metadata[2].value, "");
        assert_eq!(r.columns.len(), 2);
        assert_eq!(r.columns[1].values, vec![0.0, 210.0]);
        assert_eq!(r.columns[1].unit.as_deref(), Some("MPa"));
    }

    #[test]
    fn crlf_equals_lf() {
        let crlf = SAMPLE.replace('\n', "\r\n");
        assert_eq!(parse_csv(crlf.as_bytes(), &tab()).unwrap(), parse_csv(SAMPLE.as_bytes(), &tab()).unwrap());
    }

    #[test]
    fn errors() {
        let ragged = "a\t1\n\nx\ty\n1\n";
        let d = CsvDialect { delimiter: '\t', ..CsvDialect::default() };
        assert!(parse_csv(ragged.as_bytes(), &d).is_err());
        let text = "a\t1\n\nx\ty\n1\tfoo\n";
        assert!(parse_csv(text.as_bytes(), &d).is_err());
        let required = CsvDialect { table: TableMode::Required, ..d.clone() };
        assert!(parse_csv(b"a\t1\nb\t2\n", &required).is_err());
        assert!(parse_csv(b"a\t1\na\t2\n", &d).is_err());
        let repeat = CsvDialect { allow_repeated_keys: true, ..d };
        assert_eq!(parse_csv(b"a\t1\na\t2\n", &repeat).unwrap().metadata.len(), 2);
    }

    #[test]
    fn caption_row_and_decimal_comma() {
        let d = CsvDialect { metadata_header_rows: 1, ..CsvDialect::default() };
        let r = parse_csv(b"Name,Value,\nID,1.0,\nBrinell Hardness,106.89333758774,HBW\n", &d).unwrap();
        assert_eq!(r.metadata.len(), 2);
        assert_eq!(r.metadata[0].unit, None);
        let comma = CsvDialect { delimiter: ';', decimal: ',', ..CsvDialect::default() };
        let r = parse_csv(b"a;1\n\nx\n1,5\n", &comma).unwrap();
        assert_eq!(r.columns[0].values, vec![1.5]);
    }

    #[test]
    fn synthetic_series() {
        let mut text = String::from("k,v\n\nstrain,stress\n");
        for i in 0..1000 {
            text.push_str(&format!("{},{}\n", i as f64 * 1e-4, i as f64 * 0.3));
        }
        let r = parse_csv(text.as_bytes(), &CsvDialect::default()).unwrap();
        assert_eq!(r.columns.len(), 2);
        assert!(r.columns.iter().all(|c| c.values.len() == 1000));
    }
}
