//! The `dsms:` namespace and IRI schemes for items, graphs and columns.

use matspace_rdf::Iri;

pub const DSMS: &str = "dsms://ns#";

pub const KITEM: &str = "dsms://ns#KItem";
pub const KTYPE: &str = "dsms://ns#ktype";
pub const HAS_METADATUM: &str = "dsms://ns#hasMetadatum";
pub const VALUE: &str = "dsms://ns#value";
pub const ORIGINAL_KEY: &str = "dsms://ns#originalKey";
pub const ORIGINAL_UNIT: &str = "dsms://ns#originalUnit";
pub const TERM_VALUE: &str = "dsms://ns#termValue";
pub const HAS_COLUMN: &str = "dsms://ns#hasColumn";
pub const COLUMN_NAME: &str = "dsms://ns#columnName";
pub const ACCESS_URL: &str = "dsms://ns#accessUrl";
pub const ROW_INDEX: &str = "dsms://ns#rowIndex";
pub const IS_RELATED_TO: &str = "dsms://ns#isRelatedTo";
pub const IS_INPUT_FOR: &str = "dsms://ns#isInputFor";
pub const HAS_ANNOTATION: &str = "dsms://ns#hasAnnotation";
pub const FORMAT: &str = "dsms://ns#format";
pub const ORIGIN: &str = "dsms://ns#origin";
pub const FORM_ORIGIN: &str = "dsms://ns#Form";
pub const INGEST_ORIGIN: &str = "dsms://ns#Ingest";
pub const CONNECTOR_ORIGIN: &str = "dsms://ns#Connector";
pub const APP_ORIGIN: &str = "dsms://ns#App";
pub const HAS_ATTACHMENT: &str = "dsms://ns#hasAttachment";
pub const TARGET: &str = "dsms://ns#target";
pub const FORM_VERSION: &str = "dsms://ns#formVersion";
pub const VOCABULARY_TERM: &str = "dsms://ns#VocabularyTerm";
pub const EXTERNAL_REFERENCE: &str = "dsms://ns#ExternalReference";
pub const EXTERNAL_ID: &str = "dsms://ns#externalId";
pub const RESOURCE_URL: &str = "dsms://ns#ResourceUrl";
pub const HOCKETT_SHERBY: &str = "dsms://ns#HockettSherby";
pub const HAS_MODEL: &str = "dsms://ns#hasModel";
pub const HAS_PARAMETER: &str = "dsms://ns#hasParameter";
pub const PARAMETER_NAME: &str = "dsms://ns#parameterName";
pub const MEDIA_TYPE: &str = "dsms://ns#MediaType";
pub const SETTINGS: &str = "dsms://ns#Settings";
pub const SETTING: &str = "dsms://ns#setting";
pub const ATTACHMENT: &str = "dsms://ns#Attachment";
pub const FILENAME: &str = "dsms://ns#filename";
pub const CHECKSUM: &str = "dsms://ns#checksum";
pub const RUN_STATUS: &str = "dsms://ns#runStatus";
pub const FAILED: &str = "dsms://ns#Failed";
pub const PLACEHOLDER: &str = "dsms://ns#placeholder/";

pub const MEDIA_TYPE_NS: &str = "dsms://mediatype/";
pub const VOCABULARY_GRAPH: &str = "dsms://graph/vocabulary";
pub const PROVENANCE_GRAPH: &str = "dsms://graph/provenance";

pub fn iri(value: &str) -> Iri {
    Iri::new(value).expect("namespace constants are valid IRIs")
}

/// Node and graph IRI of a k-item.
pub fn kitem_iri(id: &str) -> Iri {
    iri(&format!("dsms://kitem/{id}"))
}

/// Extracts the item id from a k-item IRI.
pub fn kitem_id(iri: &Iri) -> Option<&str> {
    iri.as_str().strip_prefix("dsms://kitem/").filter(|rest| !rest.contains('/'))
}

/// Graph holding the per-row expansion of one container column.
pub fn column_graph(id: &str, column: &str) -> Iri {
    iri(&format!("dsms://kitem/{id}/column/{}", encode_segment(column)))
}

/// Entity IRI of one attachment of an item.
pub fn attachment_iri(id: &str, filename: &str) -> Iri {
    iri(&format!("dsms://kitem/{id}/attachment/{}", encode_segment(filename)))
}

pub fn access_url(id: &str, column: &str) -> String {
    format!("container://{id}/{column}")
}

/// Splits a `container://<id>/<name>` URL.
pub fn parse_access_url(url: &str) -> Option<(&str, &str)> {
    url.strip_prefix("container://")?.split_once('/')
}

pub fn activity_iri(run_id: &str) -> Iri {
    iri(&format!("dsms://activity/{run_id}"))
}

pub fn app_iri(app_id: &str) -> Iri {
    iri(&format!("dsms://app/{app_id}"))
}

pub fn settings_iri(run_id: &str) -> Iri {
    iri(&format!("dsms://activity/{run_id}/settings"))
}

pub fn ktype_iri(ktype: &str) -> Iri {
    iri(&format!("dsms://ktype/{}", encode_segment(ktype)))
}

/// Node placeholder for template graphs.
pub fn placeholder(key: &str) -> Iri {
    iri(&format!("{PLACEHOLDER}{}", encode_segment(key)))
}

/// Key named by a placeholder IRI, percent-decoded.
pub fn placeholder_key(iri: &Iri) -> Option<String> {
    iri.as_str().strip_prefix(PLACEHOLDER).map(decode_segment)
}

/// Percent-encodes characters that are not safe in an IRI path segment.
pub fn encode_segment(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if c.is_alphanumeric() || matches!(c, '-' | '_' | '.' | '~') {
            out.push(c);
        } else {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        }
    }
    out
}

pub fn decode_segment(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() && bytes[i + 1].is_ascii_hexdigit() && bytes[i + 2].is_ascii_hexdigit() {
            let b = u8::from_str_radix(&s[i + 1..i + 3], 16).expect("two hex digits");
            out.push(b);
            i += 3;
            continue;
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_round_trip() {
        for s in ["Prüfer", "Datum/Uhrzeit", "a b", "Messlänge Standardweg", "x%y", "end%"] {
            assert_eq!(decode_segment(&encode_segment(s)), s);
        }
        assert_eq!(encode_segment("Prüfer"), "Prüfer");
        assert_eq!(encode_segment("a b"), "a%20b");
    }

    #[test]
    fn placeholder_keys() {
        assert_eq!(placeholder_key(&placeholder("__item__")).as_deref(), Some("__item__"));
        assert_eq!(placeholder_key(&placeholder("Datum/Uhrzeit")).as_deref(), Some("Datum/Uhrzeit"));
        let raw = Iri::new("dsms://ns#placeholder/Pr%C3%BCfer").unwrap();
        assert_eq!(placeholder_key(&raw).as_deref(), Some("Prüfer"));
    }

    #[test]
    fn item_iris() {
        let i = kitem_iri("abc");
        assert_eq!(kitem_id(&i), Some("abc"));
        assert_eq!(kitem_id(&attachment_iri("abc", "t.csv")), None);
        assert_eq!(parse_access_url(&access_url("abc", "force")), Some(("abc", "force")));
    }
}
