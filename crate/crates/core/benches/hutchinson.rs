use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ultrafractal::ifs::{attractor_net, build_ifs_unital, hausdorff_scale, verify_ultrametric, IfsSystem};
use ultrafractal::par::Exec;
use ultrafractal::tree::rational;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn system(height: &str, exec: Exec) -> IfsSystem {
    build_ifs_unital(height.parse().unwrap(), rational(1, 2))
        .unwrap()
        .with_exec(exec)
}

fn nets(c: &mut Criterion) {
    let mut g = c.benchmark_group("attractor_net");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, "inf/10"), &exec, |b, &exec| {
            // fresh system per iteration so morphism memos start cold
            b.iter(|| attractor_net(&system("inf", exec), 10).unwrap().len())
        });
    }
    g.finish();
}

fn hausdorff(c: &mut Criterion) {
    let mut g = c.benchmark_group("hausdorff");
    for (name, exec) in MODES {
        let s = system("inf", exec);
        let a = attractor_net(&s, 9).unwrap();
        let b = attractor_net(&s, 11).unwrap();
        g.bench_function(BenchmarkId::new(name, "inf/9-vs-11"), |bch| {
            bch.iter(|| hausdorff_scale(&s, &a, &b).unwrap())
        });
    }
    g.finish();
}

fn ultrametric(c: &mut Criterion) {
    let mut g = c.benchmark_group("ultrametric_triples");
    g.sample_size(10);
    for (name, exec) in MODES {
        let s = system("2", exec);
        let net = attractor_net(&s, 8).unwrap();
        g.bench_function(BenchmarkId::new(name, format!("2/{}pts", net.len())), |b| {
            b.iter(|| verify_ultrametric(&s, &net).unwrap().passed())
        });
    }
    g.finish();
}

criterion_group!(benches, nets, hausdorff, ultrametric);
criterion_main!(benches);
