//! Negation-augment lawfulness statements and split train/validation.

use paralaw::negation::{
    augment_lawfulness, builtin_rules, split_train_validation, Label, LabeledStatement,
};
use paralaw::Language;

fn main() {
    let originals = vec![
        LabeledStatement::original(
            "A person who has become subject to bankruptcy may not act as a guardian.",
            Language::En,
            Label::Lawful,
        ),
        LabeledStatement::original(
            "The family court can appoint a supervisor.",
            Language::En,
            Label::Lawful,
        ),
        LabeledStatement::original("契約の解除は相手方に通知できる。", Language::Ja, Label::Lawful),
        LabeledStatement::original("後見人は財産を管理しなければならない。", Language::Ja, Label::Lawful),
    ];

    let en_rules = builtin_rules(Language::En);
    let ja_rules = builtin_rules(Language::Ja);
    let mut all = Vec::new();
    for lang in [Language::En, Language::Ja] {
        let subset: Vec<_> = originals.iter().filter(|s| s.language == lang).cloned().collect();
        let rules = if lang == Language::En { &en_rules } else { &ja_rules };
        let augmented = augment_lawfulness(&subset, rules);
        println!("{lang}: {} statements, {} skipped", augmented.statements.len(), augmented.skipped);
        all.extend(augmented.statements);
    }
    for s in &all {
        println!("[{:?} via {:?}] {}", s.label, s.provenance, s.text);
    }

    let (train, valid) = split_train_validation(&all, 0.25, 7);
    println!("split: {} train / {} validation", train.len(), valid.len());
}
