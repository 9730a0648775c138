//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! PASS/FAIL lines always reach the console.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use chrono::{NaiveDate, TimeZone, Utc};
use kpi_forge::dataset::{self, CorpusStats, Cutoffs, LiteMapping, Split};
use kpi_forge::edgar::FilingRef;
use kpi_forge::evalkit::{cumulative_macro_f1, EvalTally, Field, PredictedEntity};
use kpi_forge::granularity::collapse;
use kpi_forge::ixbrl::{parse_document, resolve_value};
use kpi_forge::linkbase::EdgeRecord;
use kpi_forge::taxonomy::{build_master, EdgeCounts, MasterTaxonomy, Scope};
use kpi_forge::{jsonl, pipeline, Decimal, Entity, FormType, Paragraph, Rational64, TaxonomyKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fixtures, random_forest, simulate_collapse, store, tag, ARTIFACTS};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

fn listing_round_trip() -> Check {
    let dir = store().join("0001018840/0001018840-24-000019");
    let html = std::fs::read(dir.join("primary.htm")).map_err(|e| e.to_string())?;
    let meta: FilingRef = serde_json::from_str(std::fs::read_to_string(dir.join("meta.json-lines")).unwrap().trim()).unwrap();
    let started = Instant::now();
    let parsed = parse_document(&html, &meta).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let p = parsed
        .paragraphs
        .iter()
        .find(|p| p.text.starts_with("Includes the U.S."))
        .ok_or("listing paragraph not extracted")?;

    let expected: Paragraph =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("listing_record.json")).unwrap()).unwrap();
    ensure(p == &expected, format!("record differs: {p:?}"))?;
    ensure(p.entities.len() == 3, "entity count")?;
    let values: Vec<Decimal> = p.entities.iter().map(|e| e.value).collect();
    ensure(
        values == [3_300_000_000u64, 2_800_000_000, 2_700_000_000].map(Decimal::from),
        format!("values {values:?}"),
    )?;
    ensure(p.entities.iter().all(|e| e.label == "us-gaap:Revenues" && e.unit == "USD"), "labels/units")?;
    let e0 = &p.entities[0];
    ensure((e0.start_char, e0.end_char) == (74, 77), "first span")?;
    ensure((e0.period_start, e0.period_end) == (date("2023-01-29"), date("2024-02-03")), "first period")?;
    ensure(p.filing_date == 1_711_991_312_000 && p.quarter_ending == "20240203", "filing metadata")?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("exact match in {elapsed:?}"))
}

fn value_resolution() -> Check {
    let a = resolve_value("866", 3, true, None).map_err(|e| e.to_string())?;
    let b = resolve_value("1,260", 3, true, None).map_err(|e| e.to_string())?;
    ensure(a == Decimal::from(-866_000), format!("866 -> {a}"))?;
    ensure(b == Decimal::from(-1_260_000), format!("1,260 -> {b}"))?;
    Ok(format!("{a}, {b}"))
}

fn collapse_oracle() -> Check {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC011_A95E);
    let mut compared = 0;
    for i in 0..1000 {
        let tax = random_forest(&mut rng, 50);
        for n in 0..=10 {
            let got = collapse(&tax, n).map_err(|e| e.to_string())?.mapping;
            ensure(got == simulate_collapse(&tax, n), format!("forest {i}, level {n} disagrees"))?;
            compared += 1;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(10), format!("took {elapsed:?}"))?;
    Ok(format!("{compared}/{compared} agree in {elapsed:?}"))
}

fn fixture_master(kind: TaxonomyKind) -> Result<MasterTaxonomy, String> {
    let work = tempfile::tempdir().unwrap();
    let edges = work.path().join("edges.jsonl");
    pipeline::linkbase(&store(), kind, &edges).map_err(|e| e.to_string())?;
    pipeline::build_taxonomy(&edges, kind, &Scope::Merged, &work.path().join("master.jsonl")).map_err(|e| e.to_string())
}

fn collapse_anchors() -> Check {
    let tax = fixture_master(TaxonomyKind::Presentation)?;
    let golden: BTreeMap<String, serde_json::Value> =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("golden/collapse_anchors.json")).unwrap()).unwrap();
    let mut found = Vec::new();
    for (t, expect) in &golden {
        let target = expect["collapsed_tag"].as_str().unwrap();
        let level = (0..=10u32)
            .find(|&n| collapse(&tax, n).unwrap().mapping.get(&tag(t)).map(|m| m.as_str()) == Some(target))
            .ok_or(format!("{t} never maps to {target}"))?;
        ensure(
            u64::from(level) == expect["level"].as_u64().unwrap(),
            format!("{t} reaches {target} at level {level}, golden says {}", expect["level"]),
        )?;
        found.push(format!("{} -> {} at n={level}", tag(t).local_name(), tag(target).local_name()));
    }
    Ok(found.join("; "))
}

fn random_records(rng: &mut ChaCha8Rng) -> Vec<EdgeRecord> {
    let nodes = rng.gen_range(2..10);
    let mut out = Vec::new();
    for i in 0..rng.gen_range(0..30) {
        let p = rng.gen_range(0..nodes);
        let c = rng.gen_range(0..nodes);
        if p == c {
            continue;
        }
        for k in 0..rng.gen_range(1..4) {
            // Reversed pairs are frequent, so many multisets start cyclic.
            let (p, c) = if rng.gen_bool(0.3) { (c, p) } else { (p, c) };
            out.push(EdgeRecord {
                parent: tag(&format!("t:N{p}")),
                child: tag(&format!("t:N{c}")),
                kind: TaxonomyKind::Presentation,
                accession: format!("f{i}-{k}"),
                cik: None,
            });
        }
    }
    out
}

fn taxonomy_laws() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7A40);
    for i in 0..500 {
        let records = random_records(&mut rng);
        let built = build_master(&records, TaxonomyKind::Presentation).map_err(|e| e.to_string())?;
        let mut shuffled = records.clone();
        shuffled.shuffle(&mut rng);
        ensure(
            build_master(&shuffled, TaxonomyKind::Presentation).unwrap() == built,
            format!("multiset {i}: order dependent"),
        )?;
        let cut = rng.gen_range(0..=records.len());
        let merged = EdgeCounts::from_records(&shuffled[..cut])
            .unwrap()
            .merge(&EdgeCounts::from_records(&shuffled[cut..]).unwrap())
            .unwrap();
        ensure(
            MasterTaxonomy::from_counts(&merged, TaxonomyKind::Presentation) == built,
            format!("multiset {i}: merge differs"),
        )?;
        ensure(built.find_cycle().is_none(), format!("multiset {i}: cycle"))?;
    }
    Ok("500 multisets: order-independent, merge-equal, acyclic".into())
}

fn entity(label: &str, start: usize, value: i64) -> Entity {
    Entity {
        start_char: start,
        end_char: start + 1,
        label: label.into(),
        period_start: date("2023-01-01"),
        period_end: date("2023-12-31"),
        unit: "USD".into(),
        value: Decimal::from(value),
    }
}

fn paragraph(company: &str, accession: &str, filed: &str, labels: &[&str]) -> Paragraph {
    Paragraph {
        form_type: FormType::TenQ,
        accession_number: accession.into(),
        filing_date: Utc
            .from_utc_datetime(&date(filed).and_hms_opt(16, 0, 0).unwrap())
            .timestamp_millis(),
        quarter_ending: "20231231".into(),
        company_name: company.into(),
        text: format!("Paragraph {accession} reports figures."),
        entities: labels.iter().enumerate().map(|(i, l)| entity(l, i * 2, i as i64)).collect(),
    }
}

fn lite_filter() -> Check {
    const R: &str = "us-gaap:Revenues";
    const E: &str = "us-gaap:NetIncomeLoss";
    const S: &str = "us-gaap:EarningsPerShareBasic";
    const X: &str = "us-gaap:Assets";
    const Y: &str = "us-gaap:Liabilities";
    let cases: [(&[&str], bool); 10] = [
        (&[R, R, R], true),     // 3/3
        (&[R, E, X], true),     // 2/3
        (&[R, X], false),       // 1/2, boundary
        (&[R, E, X, Y], false), // 2/4, boundary
        (&[R, X, Y], false),    // 1/3
        (&[X], false),          // 0/1
        (&[S], true),           // 1/1
        (&[R, E, S, X], true),  // 3/4
        (&[], false),           // no entities
        (&[X, Y, R, E, S, S], true), // 4/6
    ];
    let data: Vec<Paragraph> = cases
        .iter()
        .enumerate()
        .map(|(i, (labels, _))| paragraph("L", &format!("p{i}"), "2023-01-01", labels))
        .collect();
    let kept: Vec<String> = dataset::build_lite(data, &LiteMapping::default(), 0.5)
        .map(|p| p.accession_number)
        .collect();
    let expected: Vec<String> = cases
        .iter()
        .enumerate()
        .filter(|(_, (_, keep))| *keep)
        .map(|(i, _)| format!("p{i}"))
        .collect();
    ensure(kept == expected, format!("kept {kept:?}, expected {expected:?}"))?;
    Ok(format!("kept {}", kept.join(",")))
}

fn split_corpus() -> Vec<Paragraph> {
    let filings: &[(&str, &[&str])] = &[
        ("ALPHA", &["2022-03-01", "2023-05-01", "2023-12-01", "2024-02-01", "2024-04-01", "2024-05-20"]),
        ("BETA", &["2021-08-01", "2023-10-31", "2024-01-10"]),
        ("GAMMA", &["2024-01-15", "2024-04-15"]),
        ("DELTA", &["2020-05-05", "2022-05-05", "2023-07-07"]),
        ("EPSILON", &["2023-11-15", "2024-02-15", "2024-05-15", "2024-06-01"]),
        ("ZETA", &["2019-02-02", "2023-11-02", "2023-11-02", "2024-03-03", "2024-07-01"]),
    ];
    let mut out = Vec::new();
    for (company, dates) in filings {
        for (i, d) in dates.iter().enumerate() {
            let acc = format!("{company}-{i}");
            out.push(paragraph(company, &acc, d, &["us-gaap:Revenues"]));
            out.push(paragraph(company, &acc, d, &["us-gaap:NetIncomeLoss"]));
        }
    }
    out
}

fn split_properties() -> Check {
    let data = split_corpus();
    let cutoffs = Cutoffs::default();
    let first = dataset::split(&data, &cutoffs, 42).map_err(|e| e.to_string())?;
    for _ in 0..5 {
        ensure(dataset::split(&data, &cutoffs, 42).unwrap() == first, "(d) seeded run differs")?;
    }
    let lookup = first.lookup();
    let mut per_company: BTreeMap<&str, BTreeMap<Split, Vec<NaiveDate>>> = BTreeMap::new();
    let mut first_filing: BTreeMap<&str, NaiveDate> = BTreeMap::new();
    for p in &data {
        let day = p.filing_day();
        let e = first_filing.entry(&p.company_name).or_insert(day);
        *e = (*e).min(day);
    }
    for p in &data {
        let day = p.filing_day();
        let Some(split) = lookup.get(p.accession_number.as_str()) else {
            ensure(day > cutoffs.test_end, format!("{} unassigned", p.accession_number))?;
            continue;
        };
        if day <= cutoffs.train_end {
            ensure(*split == Split::Train, format!("(a) {} not in train", p.accession_number))?;
        }
        if first_filing[p.company_name.as_str()] > cutoffs.train_end {
            ensure(*split == Split::Test, format!("(b) {} not in test", p.accession_number))?;
        }
        per_company.entry(&p.company_name).or_default().entry(*split).or_default().push(day);
    }
    for (company, splits) in &per_company {
        if let (Some(dev), Some(test)) = (splits.get(&Split::Dev), splits.get(&Split::Test)) {
            let (last_dev, first_test) = (dev.iter().max().unwrap(), test.iter().min().unwrap());
            ensure(last_dev < first_test, format!("(c) {company}: dev {last_dev} vs test {first_test}"))?;
        }
    }
    let alpha: Vec<Split> = (0..6).map(|i| lookup[format!("ALPHA-{i}").as_str()]).collect();
    ensure(
        alpha == [Split::Train, Split::Train, Split::Dev, Split::Dev, Split::Test, Split::Test],
        format!("ALPHA {alpha:?}"),
    )?;
    let c = first.counts();
    Ok(format!(
        "train {} / dev {} / test {} filings, {} excluded",
        c.get(&Split::Train).unwrap_or(&0),
        c.get(&Split::Dev).unwrap_or(&0),
        c.get(&Split::Test).unwrap_or(&0),
        first.excluded.len()
    ))
}

fn pred(e: &Entity) -> PredictedEntity {
    PredictedEntity {
        label: Some(e.label.clone()),
        period_start: Some(e.period_start.to_string()),
        period_end: Some(e.period_end.to_string()),
        unit: Some(e.unit.clone()),
        value: Some(e.value),
    }
}

fn metric_hand_checks() -> Check {
    let r = Rational64::new;
    let gold = [entity("revenues", 0, 1), entity("eps", 2, 2), entity("ebit", 4, 3)];
    let mut wrong = pred(&gold[2]);
    wrong.label = Some("earnings".into());
    let mut t = EvalTally::default();
    t.add_document(&gold, &[pred(&gold[0]), pred(&gold[1]), wrong]);
    let label = t.report::<Rational64>().per_field[&Field::Label];
    ensure(label.f1 == r(2, 3), format!("micro F1 {}", label.f1))?;

    let two = [entity("revenues", 0, 1), entity("eps", 2, 2)];
    let mut t = EvalTally::default();
    t.add_document(&two, &[pred(&two[0])]);
    let macro_f1 = t.report::<Rational64>().label_macro_f1;
    ensure(macro_f1 == r(1, 2), format!("macro F1 {macro_f1}"))?;

    let f1: BTreeMap<String, Rational64> = [("a".into(), r(1, 1)), ("b".into(), r(0, 1))].into();
    let freq: BTreeMap<String, u64> = [("a".into(), 10), ("b".into(), 5)].into();
    let curve: Vec<(u64, Rational64)> = cumulative_macro_f1(&f1, &freq)
        .iter()
        .map(|c| (c.cumulative_support, c.macro_f1))
        .collect();
    ensure(curve == [(10, r(1, 1)), (15, r(1, 2))], format!("curve {curve:?}"))?;

    let mut t = EvalTally::default();
    t.add_document(&gold, &gold.iter().map(pred).collect::<Vec<_>>());
    let rep = t.report::<Rational64>();
    ensure(
        rep.per_field.values().all(|s| s.precision == r(1, 1) && s.recall == r(1, 1) && s.f1 == r(1, 1)),
        "perfect fixture below 1",
    )?;
    ensure(rep.label_macro_f1 == r(1, 1) && rep.entity_exact_match == r(1, 1), "perfect EM/macro")?;
    Ok("2/3, 1/2, (10,1) (15,1/2), perfect = 1".into())
}

fn stats_identity() -> Check {
    let work = tempfile::tempdir().unwrap();
    common::run_fixture_pipeline(work.path()).map_err(|e| e.to_string())?;
    let corpora = [
        "paragraphs.jsonl",
        "remapped.jsonl",
        "splits/train.jsonl",
        "splits/dev.jsonl",
        "splits/test.jsonl",
        "lite/train.jsonl",
        "lite/dev.jsonl",
        "lite/test.jsonl",
    ];
    for name in corpora {
        let data: Vec<Paragraph> = jsonl::read(&work.path().join(name)).map_err(|e| e.to_string())?;
        let s: CorpusStats<f64> = dataset::compute_stats(&data);
        let entities: usize = data.iter().map(|p| p.entities.len()).sum();
        ensure(s.n_entities == entities as u64, format!("{name}: entity count"))?;
        ensure(
            (s.avg_tags * s.n_paragraphs as f64 - s.n_entities as f64).abs() < 1e-9,
            format!("{name}: avg_tags x paragraphs"),
        )?;
        if s.avg_tags > 0.0 {
            ensure(
                (s.words_per_tag - s.avg_words / s.avg_tags).abs() < 1e-9,
                format!("{name}: words/tags"),
            )?;
        }
        let exact: CorpusStats<Rational64> = dataset::compute_stats(&data);
        ensure(
            exact.avg_tags * Rational64::from(exact.n_paragraphs as i64) == Rational64::from(exact.n_entities as i64),
            format!("{name}: exact identity"),
        )?;
    }
    Ok(format!("{} fixture corpora", corpora.len()))
}

fn determinism() -> Check {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    common::run_fixture_pipeline(a.path()).map_err(|e| e.to_string())?;
    common::run_fixture_pipeline(b.path()).map_err(|e| e.to_string())?;
    let mut bytes = 0;
    for name in ARTIFACTS {
        let x = std::fs::read(a.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        let y = std::fs::read(b.path().join(name)).map_err(|e| format!("{name}: {e}"))?;
        ensure(x == y, format!("{name} differs between runs"))?;
        bytes += x.len();
    }
    Ok(format!("{} artifacts, {bytes} bytes identical", ARTIFACTS.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("listing record round trip", listing_round_trip),
        ("value resolution", value_resolution),
        ("collapse matches simulation", collapse_oracle),
        ("collapse anchors", collapse_anchors),
        ("master taxonomy laws", taxonomy_laws),
        ("lite filter", lite_filter),
        ("split properties", split_properties),
        ("metric hand checks", metric_hand_checks),
        ("stats identities", stats_identity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {:>2} {name}: panicked", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
