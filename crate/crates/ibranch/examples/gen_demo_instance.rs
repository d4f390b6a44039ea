//! Regenerates the bundled knapsack-like demo instance:
//!
//! ```text
//! cargo run -p ibranch --example gen_demo_instance > data/knap30.mps
//! ```
//!
//! 30 binary items, three capacity rows, maximization written as
//! minimization of the negated values.

use ibranch::instance::{write_mps, MipInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let n = 30;
    let goods = 20; // items with value and positive weights
    let m = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6B6E6170); // "knap"
    let quarter = |v: f64| (v * 4.0).round() / 4.0;
    // Goods carry value (negated into the minimized objective); the
    // remaining items are capacity providers with a purchase cost and
    // negative weights, so selections interact across rows.
    let objective: Vec<f64> = (0..n)
        .map(|j| {
            if j < goods {
                -quarter(rng.random_range(5.0..25.0))
            } else {
                quarter(rng.random_range(2.0..10.0))
            }
        })
        .collect();
    // Sparse membership so the influence models see different structure;
    // every item lands in at least one row.
    let mut membership = vec![Vec::new(); m];
    for j in 0..n {
        let mut hit = false;
        for (k, row) in membership.iter_mut().enumerate() {
            let p = if j < goods { 0.55 } else { 0.5 };
            if rng.random_bool(p) || (k == m - 1 && !hit) {
                row.push(j);
                hit = true;
            }
        }
    }
    let mut rows = Vec::with_capacity(m);
    let mut row_upper = Vec::with_capacity(m);
    for members in &membership {
        let row: Vec<(usize, f64)> = members
            .iter()
            .map(|&j| {
                let w = if j < goods {
                    quarter(rng.random_range(3.0..12.0))
                } else {
                    -quarter(rng.random_range(2.0..8.0))
                };
                (j, w)
            })
            .collect();
        let load: f64 = row.iter().map(|&(_, w)| w.max(0.0)).sum();
        row_upper.push((load * 0.35).round());
        rows.push(row);
    }
    let inst = MipInstance {
        name: "knap30".into(),
        objective,
        rows,
        row_lower: vec![f64::NEG_INFINITY; m],
        row_upper,
        var_lower: vec![0.0; n],
        var_upper: vec![1.0; n],
        integer: vec![true; n],
    };
    inst.validate().expect("demo instance is well formed");
    print!("{}", write_mps(&inst));
}
