use blockmerge::simulator::{chi_square_two_sample, clt_report, run, Backend, SimConfig};

const ALPHA: f64 = 1e-4;

fn pair(n: usize, samples: u64, seed: u64) -> (blockmerge::simulator::SimSummary, blockmerge::simulator::SimSummary) {
    let full = run(&SimConfig::new(n, samples, seed, Backend::FullPermutation)).unwrap();
    let chain = run(&SimConfig::new(n, samples, seed + 1, Backend::SizeChain)).unwrap();
    (full, chain)
}

#[test]
fn size_two_backends_agree() {
    let (full, chain) = pair(2, 50_000, 10);
    assert!(!chi_square_two_sample(&full, &chain).unwrap().rejects(ALPHA));
}

#[test]
fn size_fifty_backends_agree() {
    let (full, chain) = pair(50, 40_000, 20);
    assert!(!chi_square_two_sample(&full, &chain).unwrap().rejects(ALPHA));
    let a = clt_report(&full, None, None, None).unwrap();
    let b = clt_report(&chain, None, None, None).unwrap();
    let se = ((a.variance + b.variance) / 40_000.0).sqrt();
    assert!((a.mean - b.mean).abs() < 4.0 * se, "{} vs {}", a.mean, b.mean);
    assert!((a.variance / b.variance - 1.0).abs() < 0.05);
}
