use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kmlat::gf::field_of_order;
use kmlat::groups::{find_subgroup_of_type_with, GroupType};
use kmlat::kmaction::{zp_sweep, KMParams};
use kmlat::par::Exec;
use kmlat::serretree::dihedral_obstruction_search_with;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn dihedral(c: &mut Criterion) {
    let f = field_of_order(2).unwrap();
    let mut g = c.benchmark_group("dihedral_search_w2");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| dihedral_obstruction_search_with(exec, f, 2).unwrap())
        });
    }
    g.finish();
}

fn zp(c: &mut Criterion) {
    let params = KMParams::new(2, field_of_order(3).unwrap()).unwrap();
    let mut g = c.benchmark_group("zp_sweep_q3");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| zp_sweep(exec, &params, 2).unwrap()));
    }
    g.finish();
}

fn subgroup_search(c: &mut Criterion) {
    let f = field_of_order(29).unwrap();
    let mut g = c.benchmark_group("find_sl2_5_q29");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| find_subgroup_of_type_with(exec, f, GroupType::Sl25).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, dihedral, zp, subgroup_search);
criterion_main!(benches);
