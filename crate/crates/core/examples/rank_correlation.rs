//! Spatial percentiles and Kendall's tau-b on small vectors.

use envvuln::stats::{kendall_tau, spatial_percentile};

fn main() {
    let density = [Some(120.0), Some(3400.0), None, Some(880.0), Some(880.0)];
    println!("values      {density:?}");
    println!("percentiles {:?}", spatial_percentile(&density));

    let elderly = [Some(12.0), Some(18.0), Some(25.0), Some(21.0), Some(9.0), Some(18.0)];
    let mortality = [Some(5.1), Some(6.0), Some(7.9), Some(6.4), Some(4.2), None];
    match kendall_tau(&elderly, &mortality) {
        Ok(tau) => println!("tau(elderly, mortality) = {tau:.4}"),
        Err(e) => println!("no correlation: {e}"),
    }
    let flat = [Some(1.0); 6];
    println!("constant vector: {:?}", kendall_tau(&flat, &mortality));
}
