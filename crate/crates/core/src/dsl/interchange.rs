use crate::model::RegisterDocument;

/// Renders the register as pretty-printed JSON. Top-level keys follow the
/// model's field order.
pub fn export_interchange(doc: &RegisterDocument) -> String {
    let mut out = serde_json::to_string_pretty(doc).expect("register serializes to JSON");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_level_keys_in_order() {
        let doc = RegisterDocument::blank("TM");
        let text = export_interchange(&doc);
        let keys: Vec<&str> = text
            .lines()
            .filter_map(|l| l.strip_prefix("  \""))
            .filter_map(|l| l.split('"').next())
            .collect();
        assert_eq!(keys.first(), Some(&"project"));
        assert_eq!(keys.last(), Some(&"alias_map"));
        assert_eq!(keys.len(), 22);
    }
}
