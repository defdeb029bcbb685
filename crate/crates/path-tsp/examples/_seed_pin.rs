use num_rational::BigRational;
use num_traits::Zero;
use path_tsp::instance::{Instance, MetricKind};
use path_tsp::lp::FractionalSolution;
use path_tsp::ratio::rat;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn path_mix(inst: &Instance, salt: u64, paths: usize) -> FractionalSolution {
    let idx = inst.edge_index();
    let n = inst.n();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(salt);
    let denom = 8u64;
    let mut left = denom;
    let mut x = vec![BigRational::zero(); idx.m()];
    for i in 0..paths {
        let w = if i == paths - 1 { left } else { rng.gen_range(1..=1 + left - (paths - 1 - i) as u64) };
        left -= w;
        let prefix_len = rng.gen_range(0..n / 2);
        let mut mid: Vec<usize> = (1..n - 1).collect();
        let (_, rest) = mid.split_at_mut(prefix_len);
        rest.shuffle(&mut rng);
        let mut order = vec![0];
        order.extend(mid.iter().copied());
        order.push(n - 1);
        let wr = rat(w as i64, denom as i64);
        for pair in order.windows(2) { x[idx.id(pair[0], pair[1])] += &wr; }
        if left == 0 { break; }
    }
    FractionalSolution { value: inst.vector_cost(&x), x }
}

fn main() {
    for n in [8usize, 10] {
        for seed in 0..60u64 {
            let inst = Instance::random(seed, n, MetricKind::Euclidean).unwrap();
            let idx = inst.edge_index();
            let sol = path_mix(&inst, seed * 1000 + n as u64, 3 + (seed % 3) as usize);
            let chain = path_tsp::cuts::narrow_cuts(&sol, &inst).unwrap();
            let dist = path_tsp::decompose::decompose(&sol.x, &inst).unwrap();
            let Ok(ens) = path_tsp::decompose::round_distribution(&dist, &rat(1, 64), &inst) else { continue };
            let thr = path_tsp::reassembly::prefix_thresholds(&chain, ens.r, &ens.epsilon).unwrap();
            let (out, tr, _) = path_tsp::reassembly::reassemble(&ens, &chain, &thr, idx).unwrap();
            path_tsp::reassembly::verify_structure(&out, &ens.x, &chain, &thr, idx).unwrap();
            let mut local = std::collections::BTreeSet::new();
            for r in &tr.records { local.insert(format!("{:?}", r.kind)); }
            if local.contains("MergeLevels") || local.contains("RestoreCut") {
                println!("n={n} seed={seed}: {local:?}");
            }
        }
    }
}
