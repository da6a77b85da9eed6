use proptest::prelude::*;

use distrvfl::classifier::{self, ClassifierKind, ClassifierMatrix};
use distrvfl::data::{self, Dataset, SplitMode, SplitSpec};
use distrvfl::hdc::{self, BipolarHypervector, Hypervector, InverseMode};
use distrvfl::hrr::{self, CompressedClassifier};
use distrvfl::rvfl;
use distrvfl::sim::{self, AgentNetwork};
use distrvfl::SeedSpec;

fn real_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, dim)
}

fn pair(max_dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_dim).prop_flat_map(|d| (real_vec(d), real_vec(d)))
}

fn triple(max_dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1..=max_dim).prop_flat_map(|d| (real_vec(d), real_vec(d), real_vec(d)))
}

fn bipolar(dim: usize) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), dim)
}

fn hv(v: &[f64]) -> Hypervector {
    Hypervector::new(v.to_vec()).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #[test]
    fn convolution_commutes((x, y) in pair(80)) {
        let a = hdc::circ_convolve(&hv(&x), &hv(&y)).unwrap();
        let b = hdc::circ_convolve(&hv(&y), &hv(&x)).unwrap();
        prop_assert!(close(a.as_slice(), b.as_slice(), 1e-9));
    }

    #[test]
    fn convolution_distributes_over_sum((x, y, z) in triple(80)) {
        let sum: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a + b).collect();
        let lhs = hdc::circ_convolve(&hv(&x), &hv(&sum)).unwrap();
        let xy = hdc::circ_convolve(&hv(&x), &hv(&y)).unwrap();
        let xz = hdc::circ_convolve(&hv(&x), &hv(&z)).unwrap();
        let rhs = hdc::superpose([&xy, &xz]).unwrap();
        prop_assert!(close(lhs.as_slice(), rhs.as_slice(), 1e-8));
    }

    #[test]
    fn spectral_and_dispatching_paths_agree((x, y) in pair(40)) {
        let a = hdc::circ_convolve(&hv(&x), &hv(&y)).unwrap();
        let b = hdc::circ_convolve_spectral(&hv(&x), &hv(&y)).unwrap();
        prop_assert!(close(a.as_slice(), b.as_slice(), 1e-9));
    }

    #[test]
    fn clip_is_idempotent_and_bounded(x in real_vec(30), kappa in 1u32..20) {
        let once = hdc::clip(&hv(&x), kappa).unwrap();
        let twice = hdc::clip(&once, kappa).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.as_slice().iter().all(|v| v.abs() <= f64::from(kappa)));
    }

    #[test]
    fn binding_is_self_inverse((x, y) in (1usize..64).prop_flat_map(|d| (bipolar(d), bipolar(d)))) {
        let x = BipolarHypervector::new(x).unwrap();
        let y = BipolarHypervector::new(y).unwrap();
        let xx = hdc::bind_elementwise(&x, &x).unwrap();
        prop_assert!(xx.as_slice().iter().all(|&v| v == 1));
        let back = hdc::bind_elementwise(&hdc::bind_elementwise(&x, &y).unwrap(), &y).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn involution_is_an_involution(x in (1usize..50).prop_flat_map(real_vec)) {
        let once = hdc::inverse(&hv(&x), InverseMode::Involution).unwrap();
        let twice = hdc::inverse(&once, InverseMode::Involution).unwrap();
        prop_assert_eq!(twice.as_slice(), x.as_slice());
    }

    #[test]
    fn thermometer_prefix_grows_with_value(a in 0.0f64..=1.0, b in 0.0f64..=1.0, dim in 1usize..200) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(rvfl::thermometer_level(lo, dim).unwrap() <= rvfl::thermometer_level(hi, dim).unwrap());
    }

    #[test]
    fn wire_format_round_trips(agent in any::<u64>(), classes in 1usize..5, dim in 2usize..40, exact in any::<bool>()) {
        let mode = if exact { InverseMode::Exact } else { InverseMode::Involution };
        let w = ClassifierMatrix::from_weights(
            nalgebra::DMatrix::from_fn(classes, dim, |i, j| ((i * 31 + j * 7) % 11) as f64 - 5.0),
            ClassifierKind::Rls,
        ).unwrap();
        // Exact keys may be singular for tiny D; skip those draws.
        let Ok(keys) = hrr::generate_keys_with_mode(agent, classes, dim, mode) else { return Ok(()) };
        let c = hrr::compress(&w, &keys).unwrap();
        let bytes = c.encode();
        prop_assert_eq!(bytes.len(), hrr::HEADER_LEN + 8 * dim);
        prop_assert_eq!(CompressedClassifier::decode(&bytes, ClassifierKind::Rls).unwrap(), c);
    }

    #[test]
    fn prediction_ignores_positive_scaling(scale in 0.01f64..100.0, h in real_vec(12)) {
        let w = ClassifierMatrix::from_weights(
            nalgebra::DMatrix::from_fn(4, 12, |i, j| ((i + 3 * j) % 5) as f64 - 2.0 + 0.1 * i as f64),
            ClassifierKind::Rls,
        ).unwrap();
        prop_assert_eq!(
            classifier::predict(&w, &h).unwrap(),
            classifier::predict(&w.scaled(scale).unwrap(), &h).unwrap()
        );
    }

    #[test]
    fn partition_covers_disjointly(m in 1usize..400, n in 1usize..40, seed in any::<u64>()) {
        prop_assume!(m >= n);
        let p = sim::partition(m, n, &SeedSpec::new(seed)).unwrap();
        let sizes: Vec<usize> = p.shards.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all = p.shards.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..m).collect::<Vec<_>>());
    }

    #[test]
    fn aggregation_is_order_independent(seed in any::<u64>(), n in 2usize..7) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let locals: Vec<ClassifierMatrix> = (0..n)
            .map(|_| ClassifierMatrix::from_weights(
                nalgebra::DMatrix::from_fn(3, 16, |_, _| rng.random_range(-1.0..1.0)),
                ClassifierKind::Rls,
            ).unwrap())
            .collect();
        let ids: Vec<u64> = (0..n as u64).map(|i| i * 13 + 5).collect();
        let forward = sim::exchange_and_aggregate(
            &AgentNetwork::fully_connected(ids.clone()).unwrap(), &locals, false).unwrap();
        let rev_ids: Vec<u64> = ids.iter().rev().copied().collect();
        let rev_locals: Vec<ClassifierMatrix> = locals.iter().rev().cloned().collect();
        let backward = sim::exchange_and_aggregate(
            &AgentNetwork::fully_connected(rev_ids).unwrap(), &rev_locals, false).unwrap();
        for i in 0..n {
            prop_assert_eq!(&forward.aggregated[i], &backward.aggregated[n - 1 - i]);
        }
    }
}

fn small_dataset(rows: &[[f64; 3]], labels: &[usize]) -> Dataset {
    Dataset::new(
        "t",
        3,
        rows.iter().flatten().copied().collect(),
        labels.to_vec(),
        vec!["a".into(), "b".into()],
    )
    .unwrap()
}

proptest! {
    #[test]
    fn normalize_is_idempotent(rows in prop::collection::vec(prop::array::uniform3(-50.0f64..50.0), 2..30)) {
        let labels: Vec<usize> = (0..rows.len()).map(|i| i % 2).collect();
        let ds = small_dataset(&rows, &labels);
        let once = data::normalize(&ds);
        let twice = data::normalize(&once);
        prop_assert!(close(once.samples(), twice.samples(), 1e-12));
        prop_assert!(once.samples().iter().all(|v| (0.0..=1.0).contains(v)));
        // Re-applying the stored ranges is also a no-op on the training rows.
        let ranges = ds.compute_ranges();
        let again = once.apply_ranges(&once.compute_ranges()).unwrap().0;
        prop_assert!(close(once.samples(), again.samples(), 1e-12));
        let (reapplied, clamped) = ds.apply_ranges(&ranges).unwrap();
        prop_assert_eq!(clamped, 0);
        prop_assert!(close(reapplied.samples(), once.samples(), 0.0));
    }

    #[test]
    fn kfold_split_is_deterministic_and_covering(m in 8usize..120, k in 2usize..6, seed in any::<u64>()) {
        let rows: Vec<[f64; 3]> = (0..m).map(|i| [i as f64, 0.0, 1.0]).collect();
        let labels: Vec<usize> = (0..m).map(|i| i % 2).collect();
        let ds = small_dataset(&rows, &labels);
        let spec = SplitSpec { mode: SplitMode::Kfold { k }, stratified: true, seed: SeedSpec::new(seed) };
        let a = data::split(&ds, &spec).unwrap();
        prop_assert_eq!(&a, &data::split(&ds, &spec).unwrap());
        let mut tests: Vec<usize> = a.folds.iter().flat_map(|f| f.test.iter().copied()).collect();
        tests.sort_unstable();
        prop_assert_eq!(tests, (0..m).collect::<Vec<_>>());
        for f in &a.folds {
            prop_assert_eq!(f.train.len() + f.test.len(), m);
            prop_assert!(f.train.iter().all(|i| f.test.binary_search(i).is_err()));
        }
    }

    #[test]
    fn label_reindexing_is_a_bijection(raw in prop::collection::vec(prop::sample::select(vec!["x", "y", "z", "7"]), 2..40)) {
        let distinct: std::collections::BTreeSet<&str> = raw.iter().copied().collect();
        prop_assume!(distinct.len() >= 2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let body: String = raw.iter().enumerate().map(|(i, l)| format!("{i},{l}\n")).collect();
        std::fs::write(&path, body).unwrap();
        let ds = data::load_csv(&path, &data::LabelColumn::default(), false).unwrap();
        prop_assert_eq!(ds.classes(), distinct.len());
        for (i, l) in raw.iter().enumerate() {
            prop_assert_eq!(ds.class_names()[ds.labels()[i]].as_str(), *l);
        }
    }
}
