use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use reebcut::cut_binding::{extension_test, BindingChart, ExtensionSettings};
use reebcut::disc_calculus::{contact_audit, AuditGrid};
use reebcut::invariants::{hopf_fixture, linking_on_s3};
use reebcut::isotopy_flow::{polar_points, return_map_report, FlowSettings};
use reebcut::{Exec, Hamiltonian};
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn bench_contact_audit(c: &mut Criterion) {
    let ham = Hamiltonian::angular_collar(2, 0.7, 0.2).unwrap();
    let grid = AuditGrid { n_s: 16, n_r: 64, n_theta: 64 };
    let mut g = c.benchmark_group("contact_audit");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| contact_audit(black_box(&ham), grid, exec).unwrap()));
    }
    g.finish();
}

fn bench_return_map(c: &mut Criterion) {
    let ham = Hamiltonian::angular_collar(2, 0.7, 0.2).unwrap();
    let pts = polar_points(4, 8, 0.9);
    let mut g = c.benchmark_group("return_map_report");
    g.sample_size(10);
    for (name, exec) in MODES {
        let flow = FlowSettings { exec, ..FlowSettings::with_steps(500) };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| return_map_report(black_box(&ham), &pts, &[0.3, 0.6], 8, &flow).unwrap())
        });
    }
    g.finish();
}

fn bench_extension(c: &mut Criterion) {
    let ham = Hamiltonian::rigid_rotation(2, 1, 3).unwrap();
    let chart = BindingChart::with_default_collar(2).unwrap();
    let mut g = c.benchmark_group("extension_test");
    g.sample_size(20);
    for (name, exec) in MODES {
        let st = ExtensionSettings { exec, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| extension_test(black_box(&ham), &chart, &st).unwrap()));
    }
    g.finish();
}

fn bench_linking(c: &mut Criterion) {
    let (a, b) = hopf_fixture(1024);
    let mut g = c.benchmark_group("gauss_linking");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |bn| bn.iter(|| linking_on_s3(black_box(&a), &b, 1e-3, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_contact_audit, bench_return_map, bench_extension, bench_linking);
criterion_main!(benches);
