//! Timing probe for the two partition-function routes.

use num_rational::BigRational;
use planetree::plane_tree::{partition_function_direct, partition_function_pairs};
use planetree::{ExactDistribution, Scalar};
use std::time::Instant;

fn main() {
    let ternary = ExactDistribution::finite(vec![
        BigRational::from_ratio(2, 3),
        BigRational::from_ratio(0, 1),
        BigRational::from_ratio(0, 1),
        BigRational::from_ratio(1, 3),
    ])
    .unwrap();
    for k in 1..=6usize {
        let t0 = Instant::now();
        let pairs = partition_function_pairs(k, &ternary).unwrap();
        println!("k={k}: pairs {pairs} in {:?}", t0.elapsed());
        let t1 = Instant::now();
        let direct = partition_function_direct(k, &ternary).unwrap();
        println!(
            "k={k}: direct {direct} in {:?} (equal: {})",
            t1.elapsed(),
            direct == pairs
        );
    }
}
