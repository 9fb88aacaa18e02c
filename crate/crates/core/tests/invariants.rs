use std::collections::HashMap;

use eca_infodyn_core::bits::PackedBits;
use eca_infodyn_core::info::{te_matrix_histogram, window_columns};
use eca_infodyn_core::{
    mean_te, te_matrix, transfer_entropy, Configuration, RuleCode, SpacetimeField, Symmetry, TeConfig,
};
use proptest::prelude::*;

/// Ring step written directly from the neighborhood definition.
fn naive_step(cells: &[bool], rule: u8) -> Vec<bool> {
    let w = cells.len();
    (0..w)
        .map(|i| {
            let l = cells[(i + w - 1) % w] as u8;
            let c = cells[i] as u8;
            let r = cells[(i + 1) % w] as u8;
            (rule >> (4 * l + 2 * c + r)) & 1 == 1
        })
        .collect()
}

fn entropy<K: std::hash::Hash + Eq>(samples: impl Iterator<Item = K>) -> f64 {
    let mut counts: HashMap<K, usize> = HashMap::new();
    let mut n = 0usize;
    for s in samples {
        *counts.entry(s).or_default() += 1;
        n += 1;
    }
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

/// TE as H(X', Xk) - H(Xk) - H(X', Xk, Yl) + H(Xk, Yl) over tuples.
fn oracle_te(target: &[bool], source: &[bool], k: usize, l: usize) -> f64 {
    let m = k.max(l);
    let times = || m - 1..target.len() - 1;
    let xk = |t: usize| target[t + 1 - k..=t].to_vec();
    let yl = |t: usize| source[t + 1 - l..=t].to_vec();
    entropy(times().map(|t| (target[t + 1], xk(t))))
        - entropy(times().map(xk))
        - entropy(times().map(|t| (target[t + 1], xk(t), yl(t))))
        + entropy(times().map(|t| (xk(t), yl(t))))
}

fn symmetry() -> impl Strategy<Value = Symmetry> {
    (0usize..4).prop_map(|i| Symmetry::from_index(i).unwrap())
}

fn ring(min: usize, max: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(any::<bool>(), min..=max).prop_map(|c| Configuration::from_bools(&c).unwrap())
}

proptest! {
    #[test]
    fn step_matches_naive_ring(rule in any::<u8>(), cells in prop::collection::vec(any::<bool>(), 3..=140)) {
        let cfg = Configuration::from_bools(&cells).unwrap();
        let next = cfg.step(RuleCode::new(rule)).unwrap();
        prop_assert_eq!(next.to_bools(), naive_step(&cells, rule));
    }

    #[test]
    fn evolve_commutes_with_symmetries(rule in any::<u8>(), x in ring(8, 8), s in symmetry()) {
        let rule = RuleCode::new(rule);
        let direct = SpacetimeField::evolve(&x, rule, 8, 0).unwrap().transform(s);
        let mirrored = SpacetimeField::evolve(&x.transform(s), rule.transform(s), 8, 0).unwrap();
        prop_assert_eq!(direct.rows(), mirrored.rows());
    }

    #[test]
    fn symmetry_group_laws(rule in any::<u8>(), a in symmetry(), b in symmetry()) {
        let rule = RuleCode::new(rule);
        prop_assert_eq!(rule.transform(a).transform(b), rule.transform(a.compose(b)));
        prop_assert_eq!(rule.transform(a).transform(a), rule);
        prop_assert_eq!(rule.transform(a).representative(), rule.representative());
    }

    #[test]
    fn te_matches_tuple_oracle(
        pair in prop::collection::vec(any::<(bool, bool)>(), 2..60),
        k in 1usize..=3,
        l in 1usize..=3,
    ) {
        let (target, source): (Vec<bool>, Vec<bool>) = pair.into_iter().unzip();
        prop_assume!(target.len() > k.max(l));
        let cfg = TeConfig::new(k, l).unwrap();
        let te = transfer_entropy(&target, &source, &cfg).unwrap();
        let expected = oracle_te(&target, &source, k, l);
        prop_assert!((te - expected).abs() < 1e-12, "te {} oracle {}", te, expected);
    }

    #[test]
    fn te_invariant_under_relabeling(
        pair in prop::collection::vec(any::<(bool, bool)>(), 3..80),
        flip_target in any::<bool>(),
        flip_source in any::<bool>(),
    ) {
        let (target, source): (Vec<bool>, Vec<bool>) = pair.into_iter().unzip();
        let cfg = TeConfig::default();
        let flipped_t: Vec<bool> = target.iter().map(|&b| b ^ flip_target).collect();
        let flipped_s: Vec<bool> = source.iter().map(|&b| b ^ flip_source).collect();
        let a = transfer_entropy(&target, &source, &cfg).unwrap();
        let b = transfer_entropy(&flipped_t, &flipped_s, &cfg).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn patch_te_exact_under_symmetries(rule in any::<u8>(), x in ring(9, 24), s in symmetry()) {
        let cfg = TeConfig::default();
        let field = SpacetimeField::evolve(&x, RuleCode::new(rule), 30, 10).unwrap();
        let m = te_matrix(&field, &cfg).unwrap();
        let t = te_matrix(&field.transform(s), &cfg).unwrap();
        let w = field.width();
        let map = |i: usize| if s.reflects() { w - 1 - i } else { i };
        for src in 0..w {
            for dst in 0..w {
                prop_assert_eq!(m.get(src, dst).to_bits(), t.get(map(src), map(dst)).to_bits());
            }
        }
        prop_assert_eq!(mean_te(&m), mean_te(&t));
    }

    #[test]
    fn te_matrix_permutation_equivariant(
        rule in any::<u8>(),
        x in ring(6, 16),
        seed in any::<u64>(),
        k in 1usize..=3,
        l in 1usize..=2,
    ) {
        let cfg = TeConfig::new(k, l).unwrap();
        let field = SpacetimeField::evolve(&x, RuleCode::new(rule), 40, 5).unwrap();
        let cols = window_columns(&field);
        let w = cols.len();
        // Fisher-Yates driven by a splitmix sequence.
        let mut perm: Vec<usize> = (0..w).collect();
        let mut z = seed;
        for i in (1..w).rev() {
            z = eca_infodyn_core::seed::splitmix64(z);
            perm.swap(i, (z % (i as u64 + 1)) as usize);
        }
        let shuffled: Vec<PackedBits> = perm.iter().map(|&p| cols[p].clone()).collect();
        let m = te_matrix_histogram(&cols, &cfg);
        let p = te_matrix_histogram(&shuffled, &cfg);
        for a in 0..w {
            for b in 0..w {
                prop_assert_eq!(p.get(a, b).to_bits(), m.get(perm[a], perm[b]).to_bits());
            }
        }
        prop_assert_eq!(mean_te(&m), mean_te(&p));
        // The all-pairs path agrees with the histogram path.
        let fast = te_matrix(&field, &cfg).unwrap();
        prop_assert_eq!(fast.values(), m.values());
    }
}

#[test]
fn copy_process_carries_one_bit() {
    // Target copies the source with a one-step lag; the source is a de Bruijn
    // cycle so every (x_t, y_t) pair is equally frequent.
    let cycle = [false, false, false, true, false, true, true, true];
    let source: Vec<bool> = cycle.iter().copied().cycle().take(8 * 64 + 1).collect();
    let mut target = vec![cycle[7]];
    target.extend_from_slice(&source[..source.len() - 1]);
    let te = transfer_entropy(&target, &source, &TeConfig::default()).unwrap();
    assert!((te - 1.0).abs() < 1e-12, "{te}");
}
