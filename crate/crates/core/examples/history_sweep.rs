//! Single-cell threshold and high-TE set for a range of history lengths.
//!
//! Usage: `cargo run --release --example history_sweep -- [k_max] [l_max]`

use eca_infodyn_core::classify::{compute_te_threshold, single_cell_pass, ExperimentConfig};
use eca_infodyn_core::labels::wolfram_labels;
use eca_infodyn_core::{representatives, TeConfig};

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("integer")).collect();
    let k_max = args.first().copied().unwrap_or(6);
    let l_max = args.get(1).copied().unwrap_or(2);
    let labels = wolfram_labels();
    let reps = representatives();
    for l in 1..=l_max {
        for k in 1..=k_max {
            let cfg = ExperimentConfig {
                te: TeConfig::new(k, l).expect("valid history"),
                ..Default::default()
            };
            let singles = single_cell_pass(&reps, &cfg).expect("single-cell pass");
            let theta = compute_te_threshold(&singles, &labels).expect("threshold");
            let above: Vec<u8> = singles
                .iter()
                .filter(|s| s.te1.bits() > theta)
                .map(|s| s.representative.code())
                .collect();
            println!("k={k} l={l} theta={theta:.5} above={above:?}");
        }
    }
}
