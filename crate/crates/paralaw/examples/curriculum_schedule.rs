//! Materialize per-epoch training sets under the staged negation schedule.

use paralaw::curriculum::{materialize, plan_default_ja};
use paralaw::negation::{augment_lawfulness, builtin_rules, Label, LabeledStatement, Provenance};
use paralaw::Language;
use std::collections::BTreeSet;

fn main() {
    let rules = builtin_rules(Language::Ja);
    let originals: Vec<LabeledStatement> = rules
        .iter()
        .map(|r| {
            LabeledStatement::original(
                &format!("これは{}という文。", r.pattern),
                Language::Ja,
                Label::Lawful,
            )
        })
        .collect();
    let augmented = augment_lawfulness(&originals, &rules);
    let negations = &augmented.statements[originals.len()..];

    let plan = plan_default_ja(2);
    let epochs = materialize(&plan, &originals, negations, 13).expect("materialize");
    for epoch in &epochs {
        let ranks: BTreeSet<usize> = epoch
            .records
            .iter()
            .filter_map(|r| match r.provenance {
                Provenance::Negated(rank) => Some(rank),
                Provenance::Original => None,
            })
            .collect();
        println!(
            "phase {} epoch {}: {} records, negation ranks {ranks:?}",
            epoch.phase,
            epoch.epoch,
            epoch.records.len()
        );
    }
}
