use std::collections::{BTreeMap, HashMap};

use serde_json::{Map, Value};

use crate::model::RegisterDocument;

/// Single-valued sections, compared as a whole.
const SINGLETONS: &[&str] = &["project", "phase", "soi", "mission", "investment_decision"];
/// Entity lists, compared by `id`.
const LISTS: &[&str] = &[
    "sos_elements",
    "stakeholders",
    "contexts",
    "sessions",
    "statements",
    "core_values",
    "qualities",
    "evrs",
    "threats",
    "controls",
    "dispositions",
    "functional_requirements",
    "design_concepts",
    "personas",
    "attestations",
    "feedback",
];
const ALIASES: &str = "alias_map";

/// One entity that changed; `before`/`after` hold its content.
#[derive(Debug, Clone, PartialEq)]
pub struct Change {
    pub id: String,
    pub before: Option<Value>,
    pub after: Option<Value>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KindChanges {
    pub added: Vec<Change>,
    pub removed: Vec<Change>,
    pub modified: Vec<Change>,
    /// Entities kept in both versions appear in a different order.
    pub reordered: bool,
    /// Id order in the older version.
    pub old_order: Vec<String>,
}

impl KindChanges {
    fn is_empty(&self) -> bool {
        self.added.is_empty()
            && self.removed.is_empty()
            && self.modified.is_empty()
            && !self.reordered
    }
}

/// Id-keyed differences between two register versions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChangeSet {
    /// Keyed by interchange section name, e.g. `evrs`.
    pub kinds: BTreeMap<&'static str, KindChanges>,
    /// A core value was added, so priorities must be revisited.
    pub new_core_values_require_reprioritization: bool,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    fn ids(&self, kind: &str, pick: fn(&KindChanges) -> &Vec<Change>) -> Vec<&str> {
        self.kinds
            .get(kind)
            .map(|k| pick(k).iter().map(|c| c.id.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn added(&self, kind: &str) -> Vec<&str> {
        self.ids(kind, |k| &k.added)
    }

    pub fn removed(&self, kind: &str) -> Vec<&str> {
        self.ids(kind, |k| &k.removed)
    }

    pub fn modified(&self, kind: &str) -> Vec<&str> {
        self.ids(kind, |k| &k.modified)
    }

    /// `added.evrs: 1.1.4`-style lines in section order.
    pub fn lines(&self) -> Vec<String> {
        let order = SINGLETONS.iter().chain(LISTS).chain([&ALIASES]);
        let mut out = Vec::new();
        for kind in order {
            let Some(k) = self.kinds.get(kind) else {
                continue;
            };
            for (label, changes) in [
                ("added", &k.added),
                ("removed", &k.removed),
                ("modified", &k.modified),
            ] {
                for c in changes {
                    out.push(format!("{label}.{kind}: {}", c.id));
                }
            }
            if k.reordered {
                out.push(format!("reordered.{kind}"));
            }
        }
        out
    }
}

fn to_object(doc: &RegisterDocument) -> Map<String, Value> {
    match serde_json::to_value(doc).expect("register serializes to JSON") {
        Value::Object(map) => map,
        _ => unreachable!("register serializes to an object"),
    }
}

fn id_of(entity: &Value) -> String {
    match entity.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => String::new(),
    }
}

fn diff_list(old: &[Value], new: &[Value]) -> KindChanges {
    let old_ix: HashMap<String, &Value> = old.iter().map(|v| (id_of(v), v)).collect();
    let new_ix: HashMap<String, &Value> = new.iter().map(|v| (id_of(v), v)).collect();
    let mut k = KindChanges::default();
    for v in new {
        let id = id_of(v);
        match old_ix.get(&id) {
            None => k.added.push(Change {
                id,
                before: None,
                after: Some(v.clone()),
            }),
            Some(before) if *before != v => k.modified.push(Change {
                id,
                before: Some((*before).clone()),
                after: Some(v.clone()),
            }),
            Some(_) => {}
        }
    }
    for v in old {
        let id = id_of(v);
        if !new_ix.contains_key(&id) {
            k.removed.push(Change {
                id,
                before: Some(v.clone()),
                after: None,
            });
        }
    }
    let kept_old: Vec<String> = old
        .iter()
        .map(id_of)
        .filter(|id| new_ix.contains_key(id))
        .collect();
    let kept_new: Vec<String> = new
        .iter()
        .map(id_of)
        .filter(|id| old_ix.contains_key(id))
        .collect();
    k.reordered = kept_old != kept_new;
    k.old_order = old.iter().map(id_of).collect();
    k
}

/// Compares two registers entity by entity. Renamed entities show up as
/// modified because identity is the id, not the name.
pub fn diff_registers(old: &RegisterDocument, new: &RegisterDocument) -> ChangeSet {
    let (a, b) = (to_object(old), to_object(new));
    let mut cs = ChangeSet::default();
    for &kind in SINGLETONS {
        let (before, after) = (&a[kind], &b[kind]);
        if before != after {
            let (before, after) = (Some(before.clone()), Some(after.clone()));
            let change = Change {
                id: kind.to_string(),
                before: before.filter(|v| !v.is_null()),
                after: after.filter(|v| !v.is_null()),
            };
            let mut k = KindChanges::default();
            match (&change.before, &change.after) {
                (None, _) => k.added.push(change),
                (_, None) => k.removed.push(change),
                _ => k.modified.push(change),
            }
            cs.kinds.insert(kind, k);
        }
    }
    let empty = Vec::new();
    for &kind in LISTS {
        let old_list = a[kind].as_array().unwrap_or(&empty);
        let new_list = b[kind].as_array().unwrap_or(&empty);
        let k = diff_list(old_list, new_list);
        if !k.is_empty() {
            cs.kinds.insert(kind, k);
        }
    }
    let alias_entries = |m: &Map<String, Value>| -> Vec<Value> {
        m[ALIASES]
            .as_object()
            .map(|o| {
                o.iter()
                    .map(|(alias, canonical)| serde_json::json!({"id": alias, "to": canonical}))
                    .collect()
            })
            .unwrap_or_default()
    };
    let k = diff_list(&alias_entries(&a), &alias_entries(&b));
    if !k.is_empty() {
        cs.kinds.insert(ALIASES, k);
    }
    cs.new_core_values_require_reprioritization = !cs.added("core_values").is_empty();
    cs
}

/// Undoes `changes` on the newer document, giving back the older one.
pub fn revert(
    new: &RegisterDocument,
    changes: &ChangeSet,
) -> Result<RegisterDocument, serde_json::Error> {
    let mut doc = to_object(new);
    for (&kind, k) in &changes.kinds {
        if SINGLETONS.contains(&kind) {
            let before = k
                .added
                .iter()
                .chain(&k.removed)
                .chain(&k.modified)
                .next()
                .and_then(|c| c.before.clone())
                .unwrap_or(Value::Null);
            doc.insert(kind.to_string(), before);
        } else if kind == ALIASES {
            let map = doc[ALIASES]
                .as_object_mut()
                .expect("alias map is an object");
            for c in &k.added {
                map.remove(&c.id);
            }
            for c in k.removed.iter().chain(&k.modified) {
                let to = c.before.as_ref().and_then(|v| v.get("to")).cloned();
                map.insert(c.id.clone(), to.unwrap_or(Value::Null));
            }
        } else {
            let list = doc[kind].as_array_mut().expect("entity list is an array");
            list.retain(|v| !k.added.iter().any(|c| c.id == id_of(v)));
            for v in list.iter_mut() {
                if let Some(c) = k.modified.iter().find(|c| c.id == id_of(v)) {
                    *v = c.before.clone().unwrap_or(Value::Null);
                }
            }
            let mut items: Vec<Value> = std::mem::take(list);
            items.extend(k.removed.iter().filter_map(|c| c.before.clone()));
            let position: HashMap<&str, usize> = k
                .old_order
                .iter()
                .enumerate()
                .map(|(i, id)| (id.as_str(), i))
                .collect();
            items.sort_by_key(|v| position.get(id_of(v).as_str()).copied());
            *doc[kind].as_array_mut().expect("entity list is an array") = items;
        }
    }
    serde_json::from_value(Value::Object(doc))
}
