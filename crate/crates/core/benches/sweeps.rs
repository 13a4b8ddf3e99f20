use criterion::{criterion_group, criterion_main, Criterion};
use nlsb::coupled::{gaussian_data, perturbed_data, run_full, SimConfig};
use nlsb::parallel::{par_map, seq_map};
use nlsb::Grid1D;

fn sweep_config() -> SimConfig {
    let grid = Grid1D::new(8.0, 401).unwrap();
    SimConfig {
        dt: 1e-3,
        t_final: 0.1,
        output_every: 100,
        ..SimConfig::default().with_grid(grid)
    }
}

fn final_mass(cfg: &SimConfig, delta: f64) -> f64 {
    let wave = cfg.reference_wave().unwrap();
    let (g, gv) = gaussian_data(&cfg.grid, 1.0);
    let (u0, v0) = perturbed_data(&wave, delta, &g, &gv);
    run_full(cfg, &u0, &v0).unwrap().records.last().unwrap().mass
}

fn delta_sweep(c: &mut Criterion) {
    let cfg = sweep_config();
    let deltas = [0.0, 0.025, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8];
    let mut group = c.benchmark_group("delta_sweep");
    group.sample_size(10);
    group.bench_function("par_map", |b| b.iter(|| par_map(&deltas, |&d| final_mass(&cfg, d))));
    group.bench_function("seq_map", |b| b.iter(|| seq_map(&deltas, |&d| final_mass(&cfg, d))));
    group.finish();
}

criterion_group!(benches, delta_sweep);
criterion_main!(benches);
