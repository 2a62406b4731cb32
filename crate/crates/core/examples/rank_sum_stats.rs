//! Wilcoxon rank-sum tests with Bonferroni correction, as used to compare
//! final QD-scores across replications.
//!
//! `cargo run --release --example rank_sum_stats`

use pga_map_elites::metrics::{bonferroni, rank_sum_exact_p, rank_sum_normal_p, wilcoxon_rank_sum, wilcoxon_rank_sum_alt, Alternative};

fn main() {
    let a = [1.0, 2.0, 3.0];
    let b = [10.0, 11.0, 12.0];
    println!("{{1,2,3}} vs {{10,11,12}}: two-sided p = {}", wilcoxon_rank_sum(&a, &b));

    let pga = [5721.0, 5454.0, 5531.0, 5601.0, 5042.0];
    let me = [4914.0, 2089.0, 3366.0, 3573.0, 3111.0];
    let td3 = [3800.0, 5100.0, 4200.0, 4950.0, 5600.0];
    println!("PGA > ME one-sided p = {:.4}", wilcoxon_rank_sum_alt(&pga, &me, Alternative::Greater));
    println!(
        "exact {:.4} vs normal approximation {:.4}",
        rank_sum_exact_p(&pga, &me, Alternative::TwoSided),
        rank_sum_normal_p(&pga, &me, Alternative::TwoSided)
    );
    let raw = [wilcoxon_rank_sum(&pga, &me), wilcoxon_rank_sum(&pga, &td3)];
    let adjusted = bonferroni(&raw, raw.len());
    for (name, (r, a)) in ["PGA vs ME", "PGA vs TD3"].iter().zip(raw.iter().zip(&adjusted)) {
        println!("{name}: raw p {r:.4}, Bonferroni p {a:.4}");
    }
}
