use std::collections::{BTreeMap, BTreeSet};

use camm_core::inventory::{
    algorithm_intersection, build_inventory, check_policy, mosca_check, scan_text, select_opportunistic, AlgorithmId,
    Annotations, CryptoInventory, Family, Finding, KbEntry, KnowledgeBase, MoscaParameters, Policy, Ruleset,
    Selection, StrengthLabel,
};
use chrono::NaiveDate;
use proptest::prelude::*;

const NAMES: [&str; 6] = ["MD5", "SHA-1", "SHA-256", "RSA-1024", "RSA-2048", "AES-128"];

fn small_kb() -> KnowledgeBase {
    let e = |canonical: &str, family, label, bits, qr, key_bits| KbEntry {
        canonical: canonical.into(),
        family,
        label,
        classical_bits: bits,
        quantum_resistant: qr,
        aliases: vec![],
        key_bits,
        primitives: vec![],
        note: None,
    };
    KnowledgeBase::new(vec![
        e("MD5", Family::Hash, StrengthLabel::Broken, None, false, None),
        e("SHA-1", Family::Hash, StrengthLabel::Broken, Some(63), false, None),
        e("SHA-256", Family::Hash, StrengthLabel::Strong, Some(128), true, None),
        e("RSA-1024", Family::Signature, StrengthLabel::Weak, Some(80), false, Some(1024)),
        e("RSA-2048", Family::Signature, StrengthLabel::Acceptable, Some(112), false, Some(2048)),
        // Same rank as SHA-256: exercises the name tie-break.
        e("AES-128", Family::Cipher, StrengthLabel::Strong, Some(128), false, None),
    ])
    .unwrap()
}

fn subset(kb: &KnowledgeBase, mask: u8) -> BTreeSet<AlgorithmId> {
    (0..6).filter(|i| mask & (1 << i) != 0).map(|i| kb.resolve(NAMES[i]).unwrap()).collect()
}

fn policies() -> Vec<Option<Policy>> {
    let p = |f: fn(&mut Policy)| {
        let mut policy = Policy { name: "p".into(), ..Default::default() };
        f(&mut policy);
        Some(policy)
    };
    vec![
        None,
        p(|_| {}),
        p(|p| p.forbidden = BTreeSet::from(["md5".to_string(), "AES-128".to_string()])),
        p(|p| p.min_strength_label = Some(StrengthLabel::Acceptable)),
        p(|p| p.min_key_bits = BTreeMap::from([(Family::Signature, 2048)])),
        p(|p| p.require_quantum_resistant = true),
    ]
}

/// Enumerate every admissible common algorithm, rank them by (label, bits)
/// and pick the best, breaking ties by the smaller name.
fn brute_select(kb: &KnowledgeBase, a: &BTreeSet<AlgorithmId>, b: &BTreeSet<AlgorithmId>, policy: Option<&Policy>) -> Option<String> {
    let mut best: Option<(StrengthLabel, u32, String)> = None;
    for name in NAMES {
        let id = kb.resolve(name).unwrap();
        if !a.contains(&id) || !b.contains(&id) {
            continue;
        }
        let e = kb.lookup(name).unwrap();
        if let Some(p) = policy {
            let forbidden = p.forbidden.iter().any(|f| f.eq_ignore_ascii_case(name));
            let short = matches!((p.min_key_bits.get(&e.family), e.key_bits), (Some(m), Some(k)) if k < *m);
            let weak = p.min_strength_label.is_some_and(|m| e.label < m);
            let classical = p.require_quantum_resistant && !e.quantum_resistant;
            if forbidden || short || weak || classical {
                continue;
            }
        }
        let cand = (e.label, e.classical_bits.unwrap_or(0), name.to_string());
        best = match best {
            None => Some(cand),
            Some(cur) => {
                let better = (cand.0, cand.1) > (cur.0, cur.1) || ((cand.0, cand.1) == (cur.0, cur.1) && cand.2 < cur.2);
                Some(if better { cand } else { cur })
            }
        };
    }
    best.map(|b| b.2)
}

#[test]
fn selection_matches_brute_force_exhaustively() {
    let kb = small_kb();
    let policies = policies();
    for ma in 0u8..64 {
        for mb in 0u8..64 {
            let (a, b) = (subset(&kb, ma), subset(&kb, mb));
            for p in &policies {
                let got = select_opportunistic(&a, &b, p.as_ref(), &kb).unwrap();
                let want = brute_select(&kb, &a, &b, p.as_ref());
                assert_eq!(got.algorithm().map(|x| x.canonical.clone()), want, "{ma:06b} {mb:06b} {p:?}");
                if want.is_none() {
                    assert_eq!(got, Selection::NoneAvailable);
                }
            }
        }
    }
}

fn masks() -> impl Strategy<Value = u8> {
    0u8..64
}

proptest! {
    #[test]
    fn intersection_laws(a in masks(), b in masks(), c in masks()) {
        let kb = small_kb();
        let (sa, sb, sc) = (subset(&kb, a), subset(&kb, b), subset(&kb, c));
        let ab = algorithm_intersection(&[sa.clone(), sb.clone()]).unwrap();
        prop_assert_eq!(&ab, &algorithm_intersection(&[sb.clone(), sa.clone()]).unwrap());
        let left = algorithm_intersection(&[ab.clone(), sc.clone()]).unwrap();
        let bc = algorithm_intersection(&[sb.clone(), sc.clone()]).unwrap();
        prop_assert_eq!(&left, &algorithm_intersection(&[sa.clone(), bc]).unwrap());
        prop_assert_eq!(&left, &algorithm_intersection(&[sa.clone(), sb, sc]).unwrap());
        prop_assert_eq!(ab, subset(&kb, a & b));
        prop_assert_eq!(algorithm_intersection(std::slice::from_ref(&sa)).unwrap(), sa);
    }

    #[test]
    fn forbidding_more_never_hides_violations(extra in prop::collection::btree_set(prop::sample::select(NAMES.to_vec()), 0..6), present in masks()) {
        let kb = small_kb();
        let inv = CryptoInventory {
            entries: build_inventory(&findings(&kb, present), &Annotations::new(), &kb).unwrap().entries.into_iter().map(|mut e| { e.confirmed = true; e }).collect(),
        };
        let day = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
        let base = Policy { name: "p".into(), forbidden: BTreeSet::from(["MD5".to_string()]), ..Default::default() };
        let mut wider = base.clone();
        wider.forbidden.extend(extra.iter().map(|s| s.to_string()));
        let before = check_policy(&inv, &base, day);
        let after = check_policy(&inv, &wider, day);
        prop_assert!(before.iter().all(|v| after.contains(v)));
        prop_assert_eq!(after.len(), inv.entries.iter().filter(|e| wider.forbids(&e.algorithm)).count());
    }

    #[test]
    fn inventory_json_round_trip(present in masks()) {
        let kb = small_kb();
        let inv = build_inventory(&findings(&kb, present), &Annotations::new(), &kb).unwrap();
        prop_assert_eq!(inv.entries.len(), present.count_ones() as usize);
        let text = inv.to_json();
        let back = CryptoInventory::from_json(&text).unwrap();
        prop_assert_eq!(&back, &inv);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn mosca_pass_iff_positive_margin(x in 0u32..100, y in 0u32..100, z in 0u32..200) {
        let out = mosca_check(&MoscaParameters::new(x.into(), y.into(), z.into()).unwrap());
        prop_assert_eq!(out.pass, x + y < z);
        prop_assert_eq!(out.margin_years, f64::from(z) - f64::from(x + y));
        prop_assert_eq!(out.pass, out.margin_years > 0.0);
    }

    #[test]
    fn scan_positions_point_at_matches(text in "[ -~\n]{0,200}", insert in prop::sample::select(vec!["MD5", "sha256", "TLS_AES_128_GCM_SHA256", "RSA-4096", "Kyber768"])) {
        let doc = format!("{text} {insert} {text}");
        let found = scan_text("f", &doc, &Ruleset::builtin());
        prop_assert!(!found.is_empty());
        let lines: Vec<&str> = doc.lines().collect();
        let mut spans: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for f in &found {
            let line: Vec<char> = lines[f.line - 1].chars().collect();
            let len = f.matched_text.chars().count();
            let at: String = line[f.column - 1..f.column - 1 + len].iter().collect();
            prop_assert_eq!(&at, &f.matched_text);
            spans.entry(f.line).or_default().push((f.column, f.column + len));
        }
        for list in spans.values_mut() {
            list.sort();
            for w in list.windows(2) {
                prop_assert!(!(w[1].0 >= w[0].0 && w[1].1 <= w[0].1), "contained match kept: {:?}", w);
            }
        }
        prop_assert_eq!(scan_text("f", &doc, &Ruleset::builtin()), found);
    }
}

fn findings(kb: &KnowledgeBase, mask: u8) -> Vec<Finding> {
    subset(kb, mask)
        .into_iter()
        .enumerate()
        .map(|(i, algorithm)| Finding {
            matched_text: algorithm.canonical.clone(),
            algorithm,
            path: "src/x".into(),
            line: i + 1,
            column: 1,
            rule_id: "r".into(),
        })
        .collect()
}
