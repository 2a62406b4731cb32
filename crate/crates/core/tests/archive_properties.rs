use pga_map_elites::archive::{build_cvt, AddOutcome, BdPoint, CvtArchive, DeepEntry, DeepGridArchive};
use pga_map_elites::neuro::ParamVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn centroids() -> Vec<BdPoint> {
    build_cvt(2, 16, 400, 3).unwrap()
}

fn nearest(centroids: &[BdPoint], bd: &[f64]) -> usize {
    let d = |c: &BdPoint| c.iter().zip(bd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let mut best = 0;
    for (i, c) in centroids.iter().enumerate() {
        if d(c) < d(&centroids[best]) {
            best = i;
        }
    }
    best
}

fn insertion() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0f64..=1.0, 0.0f64..=1.0, prop_oneof![9 => -10.0f64..10.0, 1 => Just(f64::NAN)])
}

proptest! {
    #[test]
    fn elites_only_improve(ops in prop::collection::vec(insertion(), 1..200)) {
        let cents = centroids();
        let mut archive = CvtArchive::new(cents.clone());
        let mut best = vec![f64::NEG_INFINITY; cents.len()];
        let mut nan = 0;
        for (i, &(x, y, f)) in ops.iter().enumerate() {
            let bd = BdPoint::new(vec![x, y]).unwrap();
            let cell = nearest(&cents, &bd);
            prop_assert_eq!(archive.cell_index(&bd), cell);
            let outcome = archive.try_add(ParamVector::new(vec![i as f64]), f, bd, i as u64);
            let expected = if f.is_nan() {
                nan += 1;
                AddOutcome::Rejected
            } else if best[cell] == f64::NEG_INFINITY {
                AddOutcome::NewCell
            } else if f > best[cell] {
                AddOutcome::Improved
            } else {
                AddOutcome::Rejected
            };
            prop_assert_eq!(outcome, expected);
            if expected.is_addition() {
                best[cell] = f;
            }
        }
        let occupied = best.iter().filter(|b| b.is_finite()).count();
        prop_assert_eq!(archive.len(), occupied);
        prop_assert!((archive.coverage() - occupied as f64 / cents.len() as f64).abs() < 1e-15);
        prop_assert_eq!(archive.non_finite_rejections(), nan);
        for (cell, elite) in archive.iter() {
            prop_assert_eq!(elite.fitness, best[cell]);
            prop_assert_eq!(archive.cell_index(&elite.bd), cell);
        }
    }

    #[test]
    fn dump_load_roundtrip(ops in prop::collection::vec(insertion(), 0..60), len in 1usize..5) {
        let mut archive = CvtArchive::new(centroids());
        for (i, &(x, y, f)) in ops.iter().enumerate() {
            let genotype = ParamVector::new((0..len).map(|k| f * k as f64 + i as f64).collect());
            archive.try_add(genotype, f, BdPoint::new(vec![x, y]).unwrap(), i as u64);
        }
        let dir = tempfile::tempdir().unwrap();
        archive.dump(dir.path()).unwrap();
        let loaded = CvtArchive::load(dir.path()).unwrap();
        prop_assert_eq!(loaded.len(), archive.len());
        for ((c1, e1), (c2, e2)) in archive.iter().zip(loaded.iter()) {
            prop_assert_eq!(c1, c2);
            prop_assert_eq!(e1.fitness.to_bits(), e2.fitness.to_bits());
            prop_assert_eq!(&e1.genotype, &e2.genotype);
            prop_assert_eq!(&e1.bd, &e2.bd);
        }
    }

    #[test]
    fn deep_cells_never_exceed_depth(ops in prop::collection::vec(insertion(), 1..300), depth in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut deep = DeepGridArchive::new(centroids(), depth);
        let mut finite = 0;
        for &(x, y, f) in &ops {
            let entry = DeepEntry { genotype: ParamVector::zeros(1), fitness: f, bd: BdPoint::new(vec![x, y]).unwrap() };
            let outcome = deep.add(entry, &mut rng);
            prop_assert_eq!(outcome == AddOutcome::Rejected, f.is_nan());
            finite += usize::from(!f.is_nan());
        }
        let total: usize = (0..deep.n_cells()).map(|i| deep.cell(i).len()).sum();
        prop_assert!((0..deep.n_cells()).all(|i| deep.cell(i).len() <= depth));
        prop_assert!(total <= finite);
        let best = deep.best_archive();
        for (cell, elite) in best.iter() {
            let max = deep.cell(cell).entries().iter().map(|e| e.fitness).fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(elite.fitness, max);
        }
    }
}
