use excursion_risk::cl_model::ClParams;
use excursion_risk::kernels::KernelCache;
use std::time::Instant;

fn main() {
    let p = ClParams::new(5.5, 2.0, 0.5).unwrap();
    let t0 = Instant::now();
    let k = KernelCache::new(p).unwrap();
    println!("cache build: {:?}", t0.elapsed());
    let cap = k.d1_quantile(1.0 - 1e-11);
    println!("cap(1e-11) = {cap}");

    for nodes in [450usize, 900] {
        let t = Instant::now();
        let masses =
            excursion_risk::parisian_apps::debug_chain_masses(&k, 5.0 * cap, cap, nodes, nodes, 5);
        println!("nodes={nodes}: masses {masses:?} ({:?})", t.elapsed());
    }

    for nodes in [450usize, 900] {
        let t = Instant::now();
        let vals = excursion_risk::parisian_apps::debug_peak_regions(&k, 0.6, 1.0, nodes, 6);
        println!("nodes={nodes}: peak P_n {vals:?} ({:?})", t.elapsed());
    }

    for nodes in [450usize, 900] {
        let vals = excursion_risk::parisian_apps::debug_occupation_cdfs(&k, 3.0, 1.0, nodes, 6);
        println!("nodes={nodes}: F_n(3,1) {vals:?}");
    }
}
