use metalmap::atlas::{assemble_map, export_map, genre_background, import_map, Provenance};
use metalmap::corpus::{BandRecord, ManifestLine};
use metalmap::doom::{self, Dimension, RatingTable};
use metalmap::gridify::{assign_cells, choose_level};
use metalmap::{EmbedParams, FeatureKind, Layout2D, Metric};
use proptest::prelude::*;

const GENRES: [&str; 6] = ["Black Metal", "Death Metal", "Thrash Metal", "Heavy Metal", "Doom Metal", "Ambient"];

fn record(i: usize, genre: usize) -> BandRecord {
    BandRecord::from_line(ManifestLine {
        id: format!("b{i:03}"),
        name: format!("Band \u{f6}{i}"),
        genre: GENRES[genre].into(),
        themes: vec!["night".into()],
        label: (!i.is_multiple_of(3)).then(|| "Label".to_string()),
        status: if i.is_multiple_of(5) { "unknown" } else { "active" }.into(),
        country: None,
        logo: format!("b{i:03}.png"),
    })
    .unwrap()
}

fn points() -> impl Strategy<Value = Vec<([f64; 2], usize)>> {
    prop::collection::vec(((-1e3f64..1e3, -1e3f64..1e3), 0usize..GENRES.len()), 1..40)
        .prop_map(|v| v.into_iter().map(|((x, y), g)| ([x, y], g)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn map_round_trip(pts in points(), seed in any::<u64>(), bg in any::<bool>()) {
        let records: Vec<BandRecord> = pts.iter().enumerate().map(|(i, &(_, g))| record(i, g)).collect();
        let layout = Layout2D::new(
            records.iter().map(|r| r.id.clone()).collect(),
            pts.iter().map(|p| p.0).collect(),
        ).unwrap();
        let grid = assign_cells(&layout, choose_level(layout.len(), 0.5).unwrap()).unwrap();
        let params = EmbedParams::<f64> { seed, a: Some(1.58), b: Some(0.9), ..Default::default() };
        let prov = Provenance::new(FeatureKind::Histogram, Metric::L1, &params, &grid).unwrap();
        let background = bg.then(|| {
            let primary: Vec<Option<String>> = records.iter().map(|r| r.genres.first().cloned()).collect();
            genre_background(&layout, &primary, 8, 3).unwrap()
        });
        let doc = assemble_map("prop", &records, &layout, &grid, prov, background).unwrap();
        let bytes = export_map(&doc).unwrap();
        prop_assert_eq!(import_map(&bytes).unwrap(), doc);
    }

    #[test]
    fn background_ignores_item_order(pts in points(), k in 1usize..6, rot in 0usize..40) {
        let ids: Vec<String> = (0..pts.len()).map(|i| format!("p{i:02}")).collect();
        let primary: Vec<Option<String>> = pts.iter().map(|p| Some(GENRES[p.1].to_lowercase())).collect();
        let layout = Layout2D::new(ids.clone(), pts.iter().map(|p| p.0).collect()).unwrap();
        let a = genre_background(&layout, &primary, 12, k).unwrap();

        let shift = rot % pts.len();
        let mut idx: Vec<usize> = (0..pts.len()).collect();
        idx.rotate_left(shift);
        idx.reverse();
        let layout2 = Layout2D::new(
            idx.iter().map(|&i| ids[i].clone()).collect(),
            idx.iter().map(|&i| pts[i].0).collect(),
        ).unwrap();
        let primary2: Vec<Option<String>> = idx.iter().map(|&i| primary[i].clone()).collect();
        prop_assert_eq!(genre_background(&layout2, &primary2, 12, k).unwrap(), a);
    }
}

type Cell = (String, String, Dimension, i64);

fn table_cells(raters: usize, logos: usize, scores: &[i64]) -> Vec<Cell> {
    let mut cells = Vec::new();
    let mut it = scores.iter().cycle();
    for r in 0..raters {
        for l in 0..logos {
            for d in Dimension::ALL {
                cells.push((format!("r{r}"), format!("l{l}"), d, *it.next().unwrap()));
            }
        }
    }
    cells
}

fn ratings() -> impl Strategy<Value = (usize, usize, Vec<i64>)> {
    (2usize..5, 4usize..8, prop::collection::vec(1i64..=5, 1..200))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statistics_ignore_row_order((raters, logos, scores) in ratings(), seed in any::<u64>()) {
        let cells = table_cells(raters, logos, &scores);
        let mut shuffled = cells.clone();
        let mut rng = metalmap_testkit::SplitMix(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.below(i + 1));
        }
        let a = RatingTable::from_cells(cells).unwrap();
        let b = RatingTable::from_cells(shuffled).unwrap();
        prop_assert_eq!(doom::rating_report(&a).unwrap(), doom::rating_report(&b).unwrap());
    }

    #[test]
    fn sd_zero_iff_unanimous((raters, logos, scores) in ratings()) {
        let t = RatingTable::from_cells(table_cells(raters, logos, &scores)).unwrap();
        for (li, logo) in t.logos().iter().enumerate() {
            for s in doom::logo_profile(&t, logo).unwrap() {
                let first = t.score(0, li, s.dimension);
                let unanimous = (0..raters).all(|r| t.score(r, li, s.dimension) == first);
                prop_assert_eq!(s.sd == 0.0, unanimous);
            }
        }
    }

    #[test]
    fn ranking_is_shift_invariant(
        raters in 2usize..5,
        logos in 1usize..8,
        scores in prop::collection::vec(2i64..=4, 1..200),
        up in any::<bool>(),
    ) {
        // scores in 2..=4 never clamp under a unit shift
        let cells = table_cells(raters, logos, &scores);
        let delta = if up { 1 } else { -1 };
        let shifted: Vec<Cell> = cells.iter().cloned().map(|(r, l, d, s)| (r, l, d, s + delta)).collect();
        let a = doom::disagreement_ranking(&RatingTable::from_cells(cells).unwrap()).unwrap();
        let b = doom::disagreement_ranking(&RatingTable::from_cells(shifted).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn bc_matches_moment_oracle((raters, logos, scores) in ratings()) {
        let t = RatingTable::from_cells(table_cells(raters, logos, &scores)).unwrap();
        for s in doom::dimension_spread(&t).unwrap() {
            let means: Vec<f64> = (0..logos)
                .map(|l| (0..raters).map(|r| t.score(r, l, s.dimension) as f64).sum::<f64>() / raters as f64)
                .collect();
            let oracle = metalmap_testkit::bimodality_kstat(&means);
            match (s.bimodality_coefficient, oracle) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-9, "{} vs {}", x, y),
                (None, None) => {}
                (x, y) => prop_assert!(false, "definedness differs: {:?} vs {:?}", x, y),
            }
            prop_assert!((s.discriminability - metalmap_testkit::sample_variance(&means)).abs() < 1e-9);
        }
    }
}

#[test]
fn disagreement_matches_spreadsheet_recomputation() {
    let text = metalmap_testkit::read_fixture("ratings_mixed.csv");
    let t = doom::load_ratings(text.as_bytes()).unwrap();
    // recompute from the raw rows: per (logo, dim) sample sd, then mean over dims
    let mut cols: std::collections::BTreeMap<(String, String), Vec<f64>> = Default::default();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        cols.entry((f[1].into(), f[2].into())).or_default().push(f[3].parse().unwrap());
    }
    let mut scores: std::collections::BTreeMap<String, f64> = Default::default();
    for ((logo, _), xs) in &cols {
        *scores.entry(logo.clone()).or_default() += metalmap_testkit::sample_variance(xs).sqrt() / 18.0;
    }
    let mut expected: Vec<(String, f64)> = scores.into_iter().collect();
    expected.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let ours = doom::disagreement_ranking(&t).unwrap();
    assert_eq!(ours.len(), 3);
    for (o, e) in ours.iter().zip(&expected) {
        assert_eq!(o.logo, e.0);
        assert!((o.score - e.1).abs() < 1e-12);
    }
    assert_eq!(ours[0].logo, "logoB");
    assert_eq!(ours[2].logo, "logoC");
}

#[test]
fn rater_deviation_hand_case() {
    // logo 1: a=1 b=2 c=3; logo 2: a=5 b=5 c=2, on every dimension
    let scores = [("a", 1, 5), ("b", 2, 5), ("c", 3, 2)];
    let mut cells = Vec::new();
    for (r, s1, s2) in scores {
        for d in Dimension::ALL {
            cells.push((r.to_string(), "L1".to_string(), d, s1));
            cells.push((r.to_string(), "L2".to_string(), d, s2));
        }
    }
    let t = RatingTable::from_cells(cells).unwrap();
    // a: |1 - 2.5| = 1.5 and |5 - 3.5| = 1.5
    // c: |3 - 1.5| = 1.5 and |2 - 5| = 3
    // b: |2 - 2| = 0 and |5 - 3.5| = 1.5
    for (rater, want) in [("a", 1.5), ("b", 0.75), ("c", 2.25)] {
        for (_, v) in doom::rater_deviation(&t, rater).unwrap() {
            assert!((v - want).abs() < 1e-12, "{rater}: {v}");
        }
    }
}

#[test]
fn spread_fixtures_against_oracle() {
    let split: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { 5.0 }).collect();
    let even: Vec<f64> = (0..20).map(|i| 1.0 + (i % 5) as f64).collect();
    let equal = vec![3.0; 20];
    let disc = |xs: &[f64]| metalmap_testkit::sample_variance(xs);
    let bc = |xs: &[f64]| doom::bimodality_coefficient(xs);

    assert_eq!(disc(&equal), 0.0);
    assert_eq!(bc(&equal), None);
    assert!(bc(&split).unwrap() > doom::BIMODAL_THRESHOLD);
    assert!(bc(&even).unwrap() < doom::BIMODAL_THRESHOLD);
    for xs in [&split, &even] {
        assert!((bc(xs).unwrap() - metalmap_testkit::bimodality_kstat(xs).unwrap()).abs() < 1e-9);
        assert!((doom::sample_variance(xs) - disc(xs)).abs() < 1e-12);
    }
    // the 50/50 split at the scale ends has the largest variance of the three
    assert!(disc(&split) > disc(&even) && disc(&even) > disc(&equal));
}
