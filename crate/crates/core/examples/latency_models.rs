//! Serialization latency and throughput of the three interconnects.
use esn_chip::dataflow::{latency_local_rings, Topology, TopologySpec};

fn main() -> esn_chip::Result<()> {
    println!("local rings (32 rows, 128 neurons, kappa 10, 4 outputs): {} cycles", latency_local_rings(32, 128, 10, 4)?);
    for kind in Topology::ALL {
        let spec = TopologySpec { kind, ..TopologySpec::default() };
        let r = spec.throughput()?;
        println!(
            "{kind:12} serialization {:5} compute {:3} -> {:8.0} samples/s at 50 MHz",
            r.serialization_cycles, r.compute_cycles, r.samples_per_sec
        );
    }
    println!("\nMH-Tree vs reservoir size:");
    for n_r in [64, 128, 256, 512] {
        let spec = TopologySpec {
            n_r,
            sigma: esn_chip::dataflow::default_sigma(n_r),
            ..TopologySpec::default()
        };
        println!("  n_r={n_r:3} sigma={} -> {:.0} samples/s", spec.sigma, spec.throughput()?.samples_per_sec);
    }
    Ok(())
}
