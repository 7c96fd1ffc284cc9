use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use erhoq::backend::{trotter_circuit, StateVector};
use erhoq::dmqmc::{run, DmqmcOptions, DmqmcParams};
use erhoq::estimator::{bootstrap_errors, evaluate, EvolutionJob, TimeGrid};
use erhoq::spin::{HamiltonianParams, Lattice, Schedule};
use erhoq::Execution;

const MODES: [(&str, Execution); 2] = [("serial", Execution::Serial), ("parallel", Execution::Parallel)];

fn chain() -> (Lattice, Schedule) {
    let h0 = HamiltonianParams::new(1.0, 1.0, 0.0).unwrap();
    let h1 = HamiltonianParams::new(1.0, -1.0, 0.0).unwrap();
    (Lattice::periodic_chain(5).unwrap(), Schedule::quench(h0, h1))
}

fn params() -> DmqmcParams {
    DmqmcParams { beta: 1.0, delta_beta: 0.04, n_initial: 5000, seed: 1 }
}

fn dmqmc(c: &mut Criterion) {
    let (lat, schedule) = chain();
    let mut g = c.benchmark_group("dmqmc_run");
    g.sample_size(20);
    for (name, exec) in MODES {
        let opts = DmqmcOptions { execution: exec, ..DmqmcOptions::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run(&params(), &schedule.initial, &lat, &opts).unwrap())
        });
    }
    g.finish();
}

fn estimator(c: &mut Criterion) {
    let (lat, schedule) = chain();
    let pop = run(&params(), &schedule.initial, &lat, &DmqmcOptions::default()).unwrap();
    let job = EvolutionJob::new(pop, schedule, TimeGrid::up_to(3.0, 0.1).unwrap(), 0.1).unwrap();
    let eval = evaluate(&job).unwrap();

    let mut g = c.benchmark_group("evaluate");
    g.sample_size(20);
    for (name, exec) in MODES {
        let job = job.clone().with_execution(exec);
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| evaluate(&job).unwrap()));
    }
    g.finish();

    let mut g = c.benchmark_group("bootstrap_1000");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| bootstrap_errors(&eval, 1000, 7, exec).unwrap())
        });
    }
    g.finish();
}

fn statevector(c: &mut Criterion) {
    let n = 18;
    let lat = Lattice::periodic_chain(n).unwrap();
    let p = HamiltonianParams::new(1.0, -1.0, 0.3).unwrap();
    let circuit = trotter_circuit(&p, &lat, 0.1, 0.1).unwrap();
    let mut g = c.benchmark_group("statevector_trotter_step_n18");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let mut s = StateVector::zero(n).with_execution(exec);
                s.apply_circuit(&circuit);
                s
            })
        });
    }
    g.finish();
}

criterion_group!(benches, dmqmc, estimator, statevector);
criterion_main!(benches);
