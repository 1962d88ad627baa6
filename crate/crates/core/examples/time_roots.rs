use pgroupgen::descend::{immediate_descendants, DescendOptions, DescendantRecord};
use std::time::Instant;

fn main() {
    let p: u32 = std::env::args().nth(1).map_or(7, |s| s.parse().unwrap());
    for d in 2..=4 {
        let root = DescendantRecord::root(p, d).unwrap();
        let t = Instant::now();
        let opts = DescendOptions { max_exponent: 5, point_cap: u64::MAX, ..Default::default() };
        let kids = immediate_descendants(&root, Some(0), &opts).unwrap();
        println!("d={d}: {} children in {:.2}s", kids.len(), t.elapsed().as_secs_f64());
    }
}
