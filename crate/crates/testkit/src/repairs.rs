//! Violate-and-repair edits for the structural rules.

/// Replaces the first occurrence of `from`, which must be present.
pub fn edit(text: &str, from: &str, to: &str) -> String {
    assert!(text.contains(from), "`{from}` not found");
    text.replacen(from, to, 1)
}

const FEEDBACK: &str =
    "feedback FB1\n  date 2024-01-10\n  source stakeholder S1\n  text \"Booking works.\"\nend\n";
const MARKET: &str =
    "feedback FB2\n  date 2024-01-11\n  source market\n  text \"Competitor launched.\"\nend\n";
const PRIVACY: &str = "corevalue 2 \"privacy\" rank 2\nend\n";
const PRIVACY_QUALITY: &str =
    "quality 2.1 \"confidentiality\" of 2 direction supports\n  source stakeholder\nend\n";
const HIGH_EVR: &str = "evr 1.1.6 \"Encrypt health records at rest\" of 1.1\n  kind technical\n  threshold \"unencrypted records\" exactly \"0\" \"Health data\"\n  risk high\n  legal \"GDPR\"\n  likelihood unlikely\n  demand 3 \"Health data\"\nend\n";
const HIGH_THREAT: &str = "threat 1.1.6-T1 of 1.1.6\n  description \"Backups copied unencrypted\"\n  realistic false\nend\n";
const VALUE_EXPERT: &str = "attestation A9\n  subject rule VBE-C09\n  signatory \"K. Braun\" value_expert\n  date 2023-03-20\n  says \"Clusters reviewed.\"\n  consent false\nend\n";
const PERSONA: &str = "persona P1 \"Anna, daughter of a patient\"\n  represents S3\n  kind indirect\n  narrative \"Anna books appointments for her father and worries about the cost.\"\nend\n";

/// A register edit that makes one structural rule fire, and the edit
/// that repairs it again.
pub struct RepairCase {
    pub rule: &'static str,
    pub violate: fn(&str) -> String,
    /// Subjects of the diagnostics the violation produces.
    pub expected: &'static [&'static str],
    pub repair: fn(&str) -> String,
}

/// One case per structural rule, applied to the text of `tm_clean.evr`.
pub fn repair_cases() -> Vec<RepairCase> {
    vec![
        RepairCase {
            rule: "VBE-C01",
            violate: |t| {
                edit(
                    t,
                    "personal_data true\n  in_scope true\n  enabling_access true",
                    "personal_data false\n  in_scope false\n  enabling_access true",
                )
            },
            expected: &["cloud"],
            repair: |t| {
                edit(
                    t,
                    "in_scope false\n  enabling_access true",
                    "in_scope true\n  enabling_access true",
                )
            },
        },
        RepairCase {
            rule: "VBE-C02",
            violate: |t| {
                edit(
                    t,
                    "in_scope true\n  enabling_access true",
                    "in_scope true\n  enabling_access false",
                )
            },
            expected: &["cloud"],
            repair: |t| {
                edit(
                    t,
                    "in_scope true\n  enabling_access false",
                    "in_scope true\n  enabling_access true",
                )
            },
        },
        RepairCase {
            rule: "VBE-C03",
            violate: |t| edit(t, "  region DE\nend\n\nsos", "  region DE FR\nend\n\nsos"),
            expected: &["register"],
            repair: |t| {
                format!(
                    "{t}\nstakeholder S5 \"French patients\"\n  kind direct\n  region FR\nend\n"
                )
            },
        },
        RepairCase {
            rule: "VBE-C04",
            violate: |t| {
                edit(
                    t,
                    "  expectation \"Symptoms are shared only with the matching service\"\n",
                    "",
                )
            },
            expected: &["C1"],
            repair: |t| {
                edit(
                    t,
                    "  type \"symptoms\" \"specialty\"\n",
                    "  type \"symptoms\" \"specialty\"\n  expectation \"Kept private\"\n",
                )
            },
        },
        RepairCase {
            rule: "VBE-C05",
            violate: |t| edit(t, "phase design", "phase deployment"),
            expected: &["register"],
            repair: |t| {
                format!("{t}\ncontext C2 \"Live use\"\n  captured post_deployment\n  expectation \"As designed\"\nend\n")
            },
        },
        RepairCase {
            rule: "VBE-C06",
            violate: |t| edit(t, "  subject S1 \"accompanying relative\"\n", ""),
            expected: &["C1"],
            repair: |t| {
                edit(
                    t,
                    "  type \"symptoms\"",
                    "  subject S1\n  type \"symptoms\"",
                )
            },
        },
        RepairCase {
            rule: "VBE-C07",
            violate: |t| format!("{t}\n{PRIVACY}"),
            expected: &["2"],
            repair: |t| format!("{t}\n{PRIVACY_QUALITY}"),
        },
        RepairCase {
            rule: "VBE-C08",
            violate: |t| edit(t, "\"K. Braun\" value_expert", "\"K. Braun\" engineer"),
            expected: &["register"],
            repair: |t| format!("{t}\n{VALUE_EXPERT}"),
        },
        RepairCase {
            rule: "VBE-C14b",
            violate: |t| {
                edit(t, "  threshold \"readability grade\" at_most \"8\" \"Understandable without legal training\"\n", "")
            },
            expected: &["1.1.3"],
            repair: |t| {
                edit(t, "in plain language\" of 1.1\n", "in plain language\" of 1.1\n  threshold \"readability grade\" at_most \"8\" \"Plain\"\n")
            },
        },
        RepairCase {
            rule: "VBE-C15",
            violate: |t| edit(t, PERSONA, ""),
            expected: &["register"],
            repair: |t| format!("{t}\n{PERSONA}"),
        },
        RepairCase {
            rule: "VBE-C16",
            violate: |t| {
                edit(t, "threat 1.1.3-T1 of 1.1.3\n  description \"Agreement is rewritten in legal jargon\"\n  realistic false\nend\n", "")
            },
            expected: &["1.1.3"],
            repair: |t| format!("{t}\nthreat 1.1.3-T1 of 1.1.3\n  realistic false\nend\n"),
        },
        RepairCase {
            rule: "VBE-C17",
            violate: |t| format!("{}\n{MARKET}", edit(t, "phase design", "phase deployment")),
            expected: &["register"],
            repair: |t| format!("{t}\n{FEEDBACK}"),
        },
        RepairCase {
            rule: "VBE-C18",
            violate: |t| {
                edit(
                    t,
                    "threat 1.1.1-T1",
                    &format!("{HIGH_EVR}\nthreat 1.1.1-T1"),
                )
            },
            expected: &["1.1.6"],
            repair: |t| format!("{t}\n{HIGH_THREAT}"),
        },
        RepairCase {
            rule: "VBE-C19",
            violate: |t| edit(t, "  participant S1 S2 S3 S4\n", ""),
            expected: &["register"],
            repair: |t| edit(t, "session E1\n", "session E1\n  participant S1\n"),
        },
        RepairCase {
            rule: "VBE-R01",
            violate: |t| {
                edit(
                    t,
                    "personal_data false\n  in_scope false",
                    "personal_data true\n  in_scope false",
                )
            },
            expected: &["video"],
            repair: |t| {
                edit(
                    t,
                    "personal_data true\n  in_scope false",
                    "personal_data true\n  in_scope true",
                )
            },
        },
        RepairCase {
            rule: "VBE-R02",
            violate: |t| {
                edit(
                    &edit(
                        t,
                        "  kind indirect\n  description \"Family",
                        "  kind direct\n  description \"Family",
                    ),
                    "  kind indirect\n  description \"Insurers",
                    "  kind direct\n  description \"Insurers",
                )
                .replace(PERSONA, "")
            },
            expected: &["register"],
            repair: |t| format!("{t}\nstakeholder S9 \"Neighbours\"\n  kind indirect\nend\n"),
        },
        RepairCase {
            rule: "VBE-R03",
            violate: |t| edit(t, "captured pre_design", "captured post_deployment"),
            expected: &["register"],
            repair: |t| {
                format!("{t}\ncontext C2 \"Planned use\"\n  captured pre_design\n  element \"app\"\n  subject S1\n  expectation \"Private\"\nend\n")
            },
        },
        RepairCase {
            rule: "VBE-R05a",
            violate: |t| {
                edit(
                    t,
                    "lens utilitarian virtue duty cultural",
                    "lens utilitarian virtue cultural",
                )
            },
            expected: &["E1"],
            repair: |t| {
                edit(
                    t,
                    "lens utilitarian virtue cultural",
                    "lens utilitarian virtue duty cultural",
                )
            },
        },
        RepairCase {
            rule: "VBE-R05b",
            violate: |t| edit(t, " cultural \"Ordoliberal social market ethics\"", ""),
            expected: &["register"],
            repair: |t| {
                edit(
                    t,
                    "lens utilitarian virtue duty\n",
                    "lens utilitarian virtue duty cultural \"Ordoliberal social market ethics\"\n",
                )
            },
        },
        RepairCase {
            rule: "VBE-R06",
            violate: |t| edit(t, "  value \"privacy\"\n", ""),
            expected: &["ST3"],
            repair: |t| {
                edit(t, "  text \"My health details stay between me and the doctor.\"\n", "  text \"My health details stay between me and the doctor.\"\n  value \"privacy\"\n")
            },
        },
        RepairCase {
            rule: "VBE-R08",
            violate: |t| edit(t, "phase design", "phase deployment"),
            expected: &["register"],
            repair: |t| format!("{t}\n{MARKET}"),
        },
        RepairCase {
            rule: "VBE-R09",
            violate: |t| {
                let t = edit(
                    t,
                    "corevalue 1 \"equality\" rank 1",
                    "corevalue 1 \"equality\" rank 2",
                );
                let t = edit(
                    &t,
                    "subject priority 1\n  signatory \"M. Weber\"",
                    "subject priority 2\n  signatory \"M. Weber\"",
                );
                let t = edit(&t, "  featuring 1\n", "  featuring 2\n");
                edit(&t, "quality 1.1 ", &format!("corevalue 2 \"convenience\" rank 1\nend\n\n{PRIVACY_QUALITY}\nquality 1.1 ").replace("confidentiality", "easy booking"))
            },
            expected: &["1"],
            repair: |t| {
                format!("{t}\nattestation A10\n  subject rule VBE-R09\n  signatory \"M. Weber\" executive\n  date 2023-04-04\n  says \"Convenience comes first by law-compatible choice.\"\n  consent false\nend\n")
            },
        },
        RepairCase {
            rule: "VBE-R11",
            violate: |t| edit(t, "source conceptual_investigation", "source stakeholder"),
            expected: &["1"],
            repair: |t| {
                edit(
                    t,
                    "direction undermines\n  source stakeholder",
                    "direction undermines\n  source conceptual_investigation",
                )
            },
        },
        RepairCase {
            rule: "VBE-R12",
            violate: |t| format!("{t}\n{PRIVACY}\n{PRIVACY_QUALITY}"),
            expected: &["2.1"],
            repair: |t| {
                format!("{t}\nevr 2.1.1 \"Encrypt messages\" of 2.1\n  kind technical\n  risk low\nend\n")
            },
        },
        RepairCase {
            rule: "VBE-R13",
            violate: |t| edit(t, "  risk high\n  legal", "  risk low\n  legal"),
            expected: &["1.1.2"],
            repair: |t| edit(t, "  risk low\n  legal", "  risk high\n  legal"),
        },
        RepairCase {
            rule: "VBE-R14",
            violate: |t| edit(t, "  functional F1\n", ""),
            expected: &["register"],
            repair: |t| {
                edit(
                    t,
                    "  ethical 1.1.2-C1 1.1.1\n",
                    "  ethical 1.1.2-C1 1.1.1\n  functional F1\n",
                )
            },
        },
    ]
}
