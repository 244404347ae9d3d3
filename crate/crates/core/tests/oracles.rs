use metalmap::embed::{fuzzy_union, optimize_layout, smooth_knn};
use metalmap::features::{color_histogram, FeatureKind, FeatureSet, RasterImage};
use metalmap::gridify::{assign_cells, choose_level, hilbert_d2xy, hilbert_xy2d, quantize_points};
use metalmap::metrics::{knn_graph, Metric};
use metalmap::{EmbedParams, Layout2D};
use metalmap_testkit::{fuzzy_cross_entropy, histogram_oracle, hilbert_enumerate, naive_euclidean, naive_knn, SplitMix};

fn random_image(rng: &mut SplitMix, w: u32, h: u32) -> RasterImage {
    let pixels = (0..w * h * 4).map(|_| (rng.next_u64() & 0xff) as u8).collect();
    RasterImage::new(w, h, pixels).unwrap()
}

#[test]
fn histogram_matches_hash_oracle() {
    let mut rng = SplitMix(41);
    for bins in [2, 4, 8] {
        for _ in 0..10 {
            let img = random_image(&mut rng, 17, 9);
            let ours: Vec<f64> = color_histogram(&img, bins).unwrap();
            let oracle = histogram_oracle(img.pixels(), bins);
            assert_eq!(ours.len(), oracle.len());
            for (a, b) in ours.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((ours.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn knn_matches_brute_force() {
    let mut rng = SplitMix(5);
    let pts: Vec<Vec<f64>> = (0..60)
        .map(|_| (0..4).map(|_| (rng.below(5)) as f64).collect())
        .collect();
    let mut set = FeatureSet::new(FeatureKind::Latent, 4).unwrap();
    for (i, p) in pts.iter().enumerate() {
        set.insert(format!("p{i:02}"), p.clone()).unwrap();
    }
    let dist: Vec<Vec<f64>> = pts.iter().map(|u| pts.iter().map(|v| naive_euclidean(u, v)).collect()).collect();
    let oracle = naive_knn(&dist, 7);
    let graph = knn_graph(&set, Metric::Euclidean, 7).unwrap();
    for (row, want) in graph.neighbors.iter().zip(&oracle) {
        let got: Vec<usize> = row.iter().map(|&(j, _)| j).collect();
        let exp: Vec<usize> = want.iter().map(|&(j, _)| j).collect();
        assert_eq!(got, exp);
    }
}

#[test]
fn hilbert_matches_recursive_construction() {
    for r in 1..=6 {
        for (d, &(x, y)) in hilbert_enumerate(r).iter().enumerate() {
            assert_eq!(hilbert_d2xy(r, d as u64).unwrap(), (x, y));
            assert_eq!(hilbert_xy2d(r, x, y).unwrap(), d as u64);
        }
    }
}

#[test]
fn grid_prefix_indices_are_monotone() {
    let mut rng = SplitMix(77);
    let n = 500;
    let layout = Layout2D::new(
        (0..n).map(|i| format!("i{i:04}")).collect(),
        (0..n).map(|_| [rng.unit() * 3.0, rng.unit().powi(3)]).collect(),
    )
    .unwrap();
    let r = choose_level(n, 0.5).unwrap();
    let grid = assign_cells(&layout, r).unwrap();
    let quant = quantize_points(&layout, r).unwrap();
    let mut order: Vec<(u64, &str)> = quant
        .iter()
        .zip(&layout.ids)
        .map(|(&(x, y), id)| (hilbert_xy2d(r, x, y).unwrap(), id.as_str()))
        .collect();
    order.sort();
    let mut last = 0;
    let mut wrapped = false;
    for (target, id) in order {
        let (gx, gy) = grid.cells[id];
        let got = hilbert_xy2d(r, gx, gy).unwrap();
        if got < target {
            wrapped = true;
        }
        if !wrapped {
            assert!(got >= target && got >= last);
            last = got;
        }
    }
}

#[test]
fn sgd_lowers_sampled_cross_entropy() {
    let mut rng = SplitMix(19);
    let mut set = FeatureSet::new(FeatureKind::Latent, 3).unwrap();
    for c in 0..3 {
        for i in 0..40 {
            let v = (0..3).map(|a| if a == c { 8.0 } else { 0.0 } + rng.unit()).collect();
            set.insert(format!("c{c}-{i:02}"), v).unwrap();
        }
    }
    let params = EmbedParams::<f64> { k: 10, n_epochs: 200, seed: 4, ..Default::default() }.resolved().unwrap();
    let fuzzy = fuzzy_union(&smooth_knn(&knn_graph(&set, Metric::Euclidean, 10).unwrap()).unwrap());
    let start = optimize_layout(&fuzzy, &EmbedParams { initial_lr: 0.0, n_epochs: 1, ..params.clone() }).unwrap();
    let end = optimize_layout(&fuzzy, &params).unwrap();

    let n = fuzzy.n();
    let mut pairs: Vec<(usize, usize, f64)> = fuzzy.edges.clone();
    for _ in 0..pairs.len() {
        let (i, j) = (rng.below(n), rng.below(n));
        if i != j {
            pairs.push((i, j, fuzzy.weight(i, j)));
        }
    }
    let (a, b) = (params.a.unwrap(), params.b.unwrap());
    let before = fuzzy_cross_entropy(&start.coords, &pairs, a, b);
    let after = fuzzy_cross_entropy(&end.coords, &pairs, a, b);
    assert!(after < 0.7 * before, "{before} -> {after}");
}
