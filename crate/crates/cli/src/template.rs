use evrforge::dsl::quote;

const TEMPLATE: &str = r#"# Ethical value register. Lines starting with # are comments.
# Replace the examples below; `evrforge check` reports what is still missing.
register @NAME@ version "0.1" phase design

# The system of interest and where it will be deployed.
soi @NAME@
  operation "Describe how the system is used and by whom."
  region EU
end

# A partner system the system of interest depends on.
sos hosting "Hosting provider"
  cooperation acknowledged
  tier 1
  personal_data true
  in_scope true
  enabling_access true
end

stakeholder S1 "Users"
  kind direct
  description "People who use the system"
  region EU
end

stakeholder S2 "Relatives of users"
  kind indirect
  description "People affected without using the system"
  region EU
end

context C1 "Typical use"
  captured pre_design
  element "app" "backend"
  flow "app" "backend" "profile"
  subject S1
  type "profile"
  expectation "Profile data stays with the operator"
end

# Every session asks the utilitarian, virtue and duty questions, plus a
# cultural lens for the deployment region.
session E1
  date 2024-01-15
  participant S1 S2
  lens utilitarian virtue duty cultural "Regional ethical tradition"
end

statement ST1
  in E1
  from S1
  lens duty
  polarity positive
  text "I decide who sees my profile."
  value "privacy"
end

corevalue 1 "privacy" rank 1
  scores 4 4 4 3 4
  supported_by ST1
end

quality 1.1 "confidentiality" of 1 direction supports
  source stakeholder
end

quality 1.2 "profiling" of 1 direction undermines
  source conceptual_investigation
end

evr 1.1.1 "Encrypt profile data at rest" of 1.1
  kind technical
  threshold "unencrypted records" exactly "0" "Profiles are personal data"
  risk high
  legal "GDPR"
  likelihood unlikely
  demand 3 "Disclosure would breach data protection law"
end

threat 1.1.1-T1 of 1.1.1
  description "Backups are stored unencrypted"
  realistic true
end

control 1.1.1-C1 for 1.1.1-T1
  description "Encrypt backups with managed keys"
  rigor 3
  form functional
  status implemented
  implemented_by D1
end

disposition D1 "Encrypted storage"
  component "backend"
  implements 1.1.1-C1
end

funcreq F1 "Users can edit their profile"
end

concept HC1 "Private profile editing"
  ethical 1.1.1-C1
  functional F1
end

persona P1 "A relative"
  represents S2
  kind indirect
  narrative "Worries about what the system knows about the family."
end

attestation A1
  subject priority 1
  signatory "Executive name" executive
  date 2024-02-01
  says "Privacy is our first priority."
  consent false
end

attestation A2
  subject priority 1
  signatory "Representative name" stakeholder_rep
  date 2024-02-01
  says "Users agree with this priority."
  consent true
end

attestation A3
  subject mission
  signatory "Executive name" executive
  date 2024-02-02
  says "We stand behind the mission."
  consent false
end

attestation A4
  subject decision
  signatory "Executive name" executive
  date 2024-02-02
  says "We invest."
  consent false
end

attestation A5
  subject risk 1.1.1-C1
  signatory "Engineer name" engineer
  date 2024-03-01
  says "Control implemented and tested."
  consent false
end

mission "We build a system that keeps its users' data private."
  featuring 1
  signed_by A3
end

decision go
  rationale "Privacy can be protected at acceptable cost."
  signed_by A4
end

# Post-deployment feedback; required once the register reaches deployment.
feedback FB1
  date 2024-06-01
  source stakeholder S1
  text "Profile settings are easy to find."
end

# Value names that stand for a core value when tallying statements.
alias "confidentiality" to "privacy"
"#;

/// A commented register that parses cleanly, with one example block per
/// kind.
pub fn init_template(project_name: &str) -> String {
    TEMPLATE.replace("@NAME@", &quote(project_name))
}
