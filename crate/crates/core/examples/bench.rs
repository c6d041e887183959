use std::time::Instant;
fn main() {
    use radharm::{spectral, eigen::EigenConfig, space::ModelSpace};
    let space = ModelSpace::hyperbolic(3).unwrap();
    let ecfg = EigenConfig::default();
    let t0 = Instant::now();
    let pdata = spectral::build_calibrated(&space, 60.0, 4096, &ecfg).unwrap();
    println!("build_calibrated(60, 4096): {:.2?} c0={:.8} resid={:.2e}", t0.elapsed(), pdata.c0().unwrap(), pdata.calibration_residual().unwrap());
    let t1 = Instant::now();
    let f = radharm::transform::RadialFunction::gaussian(&space, 1.0, 60.0, 32).unwrap();
    let fh = radharm::transform::spherical_ft(&f, &pdata, &ecfg).unwrap();
    println!("one forward transform: {:.2?} (grid {} x {})", t1.elapsed(), pdata.grid().len(), f.grid().len());
    let t2 = Instant::now();
    let back = radharm::transform::inverse_ft(&pdata, &fh, &[0.0, 1.0, 2.0]).unwrap();
    println!("inverse at 3 radii: {:.2?}  f(1)={:.9}", t2.elapsed(), back[1].re);
}
