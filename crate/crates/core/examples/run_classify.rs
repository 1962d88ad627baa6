use pgroupgen::classify::{classify, verify, ClassifyOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let p: u32 = args.next().map_or(5, |s| s.parse().unwrap());
    let max: usize = args.next().map_or(5, |s| s.parse().unwrap());
    let opts = ClassifyOptions { max_exponent: max, heavy_ok: true, ..Default::default() };
    let cat = classify(p, &opts).unwrap();
    for (name, t) in &cat.timings {
        println!("{name}: {t:.2}s");
    }
    println!("counts {:?}", cat.counts());
    print!("{}", verify(&cat).unwrap().to_text());
}
