use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tacdss::anfis::AnfisModel;
use tacdss::cart::{grow, TreeNode};
use tacdss::data::{generate, input_variables, output_variable, split, GenerateOptions, Normalization, Observations, Sample, FIELD_RANGES};
use tacdss::fuzzy::{MembershipFunction, MfShape};
use tacdss::mamdani_learn::wang_mendel;
use tacdss::model_file::ModelFile;
use tacdss::pipeline::{train_model, ModelKind, TrainConfig};

fn shape() -> impl Strategy<Value = MfShape> {
    prop::sample::select(MfShape::ALL.to_vec())
}

fn leaves<'a>(t: &'a TreeNode, x: &[f64], out: &mut Vec<&'a TreeNode>) {
    match t {
        TreeNode::Leaf { .. } => out.push(t),
        TreeNode::Internal {
            split_variable,
            threshold,
            left,
            right,
            ..
        } => leaves(if x[*split_variable] <= *threshold { left } else { right }, x, out),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalization_roundtrip(r in prop::array::uniform5(0.0f64..1.0)) {
        let row: [f64; 5] = std::array::from_fn(|i| FIELD_RANGES[i].0 + r[i] * (FIELD_RANGES[i].1 - FIELD_RANGES[i].0));
        let n = Normalization::default();
        let s = Sample::from_row(row);
        let back = n.denormalize(&n.normalize(&s)).row();
        for i in 0..5 {
            prop_assert!((back[i] - row[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn generated_samples_in_range(seed in any::<u64>(), n in 1usize..200, jitter in any::<bool>()) {
        let d = generate(seed, n, GenerateOptions { jitter, grid: false }).unwrap();
        prop_assert_eq!(d.len(), n);
        for s in &d.samples {
            prop_assert!(s.validate().is_ok());
        }
        prop_assert_eq!(d, generate(seed, n, GenerateOptions { jitter, grid: false }).unwrap());
    }

    #[test]
    fn split_partitions(seed in any::<u64>(), n in 2usize..300, f in 0.05f64..0.95) {
        let d = generate(1, n, GenerateOptions::default()).unwrap();
        let (a, b) = split(&d, f, seed).unwrap();
        prop_assert_eq!(a.len(), (f * n as f64).round() as usize);
        let mut all: Vec<[u64; 5]> = a.samples.iter().chain(&b.samples).map(|s| s.row().map(f64::to_bits)).collect();
        let mut orig: Vec<[u64; 5]> = d.samples.iter().map(|s| s.row().map(f64::to_bits)).collect();
        all.sort();
        orig.sort();
        prop_assert_eq!(all, orig);
    }

    #[test]
    fn membership_degrees_bounded(s in shape(), count in 2usize..6, x in -0.5f64..1.5) {
        for mf in s.partition(0.0, 1.0, count) {
            let m = mf.eval(x);
            prop_assert!((0.0..=1.0).contains(&m));
        }
    }

    #[test]
    fn set_center_moves_center(s in shape(), c in 0.0f64..1.0) {
        let mut mf: MembershipFunction = s.partition(0.0, 1.0, 3)[1].clone();
        mf.set_center(c);
        prop_assert!((mf.center() - c).abs() < 1e-12);
    }

    #[test]
    fn normalized_strengths_sum_to_one(s in shape(), x in prop::array::uniform4(0.0f64..1.0)) {
        let m = AnfisModel::new(input_variables(s, 3).unwrap()).unwrap();
        let (_, t) = m.forward(&x).unwrap();
        prop_assert!((t.normalized.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wang_mendel_rules_are_distinct(seed in any::<u64>(), n in 1usize..100) {
        let data = generate(seed, n, GenerateOptions::default()).unwrap().observations();
        let m = wang_mendel(&data, input_variables(MfShape::Triangle, 3).unwrap(), output_variable(MfShape::Triangle, 3).unwrap()).unwrap();
        let mut keys: Vec<&Vec<usize>> = m.rules().iter().map(|r| &r.antecedent).collect();
        keys.sort();
        keys.dedup();
        prop_assert_eq!(keys.len(), m.rules().len());
        prop_assert!(m.rules().len() <= 81);
    }

    #[test]
    fn tree_predicts_leaf_mean(seed in any::<u64>(), n in 2usize..80, min_leaf in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] + (4.0 * r[1]).cos() + rng.gen::<f64>()).collect();
        let data = Observations::new(x, y).unwrap();
        let tree = grow(&data, min_leaf).unwrap();
        let root_sse = { let m = data.y.iter().sum::<f64>() / n as f64; data.y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() };
        let tree_sse: f64 = data.iter().map(|(x, y)| (tree.predict(x) - y).powi(2)).sum();
        prop_assert!(tree_sse <= root_sse + 1e-12);
        // group training targets by leaf and compare with the stored prediction
        let mut groups: Vec<(&TreeNode, Vec<f64>)> = Vec::new();
        for (x, y) in data.iter() {
            let mut l = Vec::new();
            leaves(&tree, x, &mut l);
            let key = l[0];
            match groups.iter_mut().find(|g| std::ptr::eq(g.0, key)) {
                Some(g) => g.1.push(y),
                None => groups.push((key, vec![y])),
            }
        }
        for (leaf, ys) in groups {
            let mean = ys.iter().sum::<f64>() / ys.len() as f64;
            let TreeNode::Leaf { prediction, sample_count, .. } = leaf else { unreachable!() };
            prop_assert!((prediction - mean).abs() < 1e-12);
            prop_assert_eq!(*sample_count, ys.len());
        }
    }
}

#[test]
fn saved_models_predict_like_in_memory() {
    let data = generate(11, 200, GenerateOptions::default()).unwrap();
    let (tr, te) = split(&data, 0.8, 2).unwrap();
    let mut cfg = TrainConfig::default();
    cfg.anfis.train.epochs = 3;
    cfg.mamdani.ga.population = 8;
    cfg.mamdani.ga.generations = 5;
    cfg.mlp.hidden_units = 6;
    cfg.mlp.epochs = 60;
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for kind in ModelKind::ALL {
        let t = train_model(kind, &tr, &te, &cfg, 4).unwrap();
        let path = dir.path().join(format!("{kind}.json"));
        t.file.save(&path).unwrap();
        let loaded = ModelFile::load(&path).unwrap();
        for _ in 0..100 {
            let x: [f64; 4] = std::array::from_fn(|i| rng.gen_range(FIELD_RANGES[i].0..=FIELD_RANGES[i].1));
            let (a, b) = (t.file.predict(&x).unwrap(), loaded.predict(&x).unwrap());
            assert!((a - b).abs() <= 1e-12, "{kind}: {a} vs {b}");
        }
    }
}
