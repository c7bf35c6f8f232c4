//! Rough wall-time probe for the master-equation integrator at protocol size.
//!
//! Run with `--release` to see the profile the batch tools should assume:
//! `cargo run --release -p magnon-gkp --example bench_integrate`.

use std::time::Instant;

use magnon_gkp::dynamics::{integrate, IntegratorSettings, LindbladModel};
use magnon_gkp::hilbert::FockSpace;
use magnon_gkp::params::{derive, half_lattice_time, DeviceConfig};
use magnon_gkp::protocol::ProtocolState;

fn main() {
    let model = derive(&DeviceConfig::reference()).unwrap();
    let t1 = half_lattice_time(model.chi, model.r);
    for dim in [60usize, 100, 140] {
        let space = FockSpace::new(dim).unwrap();
        let lindblad = LindbladModel::magnon_qubit(space, &model, 0.0);
        let rho = match ProtocolState::ground_register(space, true) {
            ProtocolState::Mixed(r) => r,
            _ => unreachable!(),
        };
        let steps = 100usize;
        let duration = t1 * steps as f64 / 2000.0;
        let settings = IntegratorSettings::with_max_dt(t1 / 2000.0);
        let start = Instant::now();
        let run = integrate(&lindblad, &rho, duration, &settings).unwrap();
        let dt = start.elapsed().as_secs_f64();
        println!(
            "dim {dim:3}  {} steps in {dt:7.3} s  ({:.1} ms/step; full 2·t1 round ≈ {:.0} s)",
            run.steps,
            1e3 * dt / run.steps as f64,
            dt / run.steps as f64 * 4000.0
        );
    }
}
