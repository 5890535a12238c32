//! Timing probe for the two bounded-diameter generators.

use planetree::enumeration::{for_each_diameter_bounded_code, TreeGenerator};
use std::time::Instant;

fn main() {
    for max_d in 2..=3usize {
        let t0 = Instant::now();
        let mut streamed = 0usize;
        for_each_diameter_bounded_code(&[0, 2], &[1, 3], max_d, &mut |_, _, _| streamed += 1);
        println!("d={max_d}: streaming {streamed} codes in {:?}", t0.elapsed());
        let t1 = Instant::now();
        let mut gen = TreeGenerator::new(Some(vec![0, 2]), 64, max_d);
        let reference = gen.generate_rooted(Some(&[1, 3]), 64, max_d).len();
        println!("d={max_d}: memoized  {reference} codes in {:?}", t1.elapsed());
    }
}
