use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_verify::aig::Aig;
use spectral_verify::atree::enumerate_cuts;
use spectral_verify::exec::Exec;
use spectral_verify::genbench::{generate, Family};
use spectral_verify::netlist::spec::parse_spec;
use spectral_verify::pipeline::{verify_batch, VerifyOptions};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn simulation(c: &mut Criterion) {
    let g = Aig::from_netlist(&generate(Family::CsaMult, 32).netlist);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let words = 256;
    let patterns: Vec<Vec<u64>> = (0..g.num_pis()).map(|_| (0..words).map(|_| rng.gen()).collect()).collect();
    let mut group = c.benchmark_group("simulate_csa32");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| g.simulate_with(&patterns, exec).unwrap())
        });
    }
    group.finish();
}

fn cuts(c: &mut Criterion) {
    let g = Aig::from_netlist(&generate(Family::BoothRadix4Mult, 32).netlist);
    let mut group = c.benchmark_group("cuts_booth32");
    for (name, exec) in POLICIES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| b.iter(|| enumerate_cuts(&g, exec)));
    }
    group.finish();
}

fn batch(c: &mut Criterion) {
    let jobs: Vec<_> = [Family::CsaMult, Family::ArrayMult, Family::BoothRadix4Mult, Family::Mac]
        .into_iter()
        .flat_map(|f| [8, 12].map(move |n| (f, n)))
        .map(|(f, n)| {
            let net = generate(f, n).netlist;
            let spec = parse_spec(f.spec()).unwrap().resolve(&net).unwrap();
            (Aig::from_netlist(&net), spec)
        })
        .collect();
    let mut group = c.benchmark_group("verify_batch");
    group.sample_size(10);
    for (name, exec) in POLICIES {
        // Inner loops stay sequential so only the batch level differs.
        let opts = VerifyOptions { exec: Exec::Sequential, ..Default::default() };
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| verify_batch(&jobs, &opts, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, simulation, cuts, batch);
criterion_main!(benches);
