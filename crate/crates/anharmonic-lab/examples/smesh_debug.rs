use anharmonic_lab::approximant::*;
use anharmonic_lab::mesh::{mesh_energy, MeshConfig};
use anharmonic_lab::quadrature::QuadratureSpec;
use anharmonic_lab::variational::*;

fn main() {
    let quad = QuadratureSpec::default();
    let r0 = optimize(0, 1, 1.0, &quad, 7, &[]).unwrap();
    let m1 = mesh_energy(&MeshConfig::one_dim(1.0), 1).unwrap().energy;
    println!("(0,1): A={:.6} B={:.6} E={:.12} rel={:.2e}", r0.params.a, r0.params.b, r0.e_var, (r0.e_var - m1)/m1);
    let lower = vec![r0.params.clone()];
    let (a0, b0) = ab_interpolation(1.0, 1, 1);
    println!("guess A0={a0:.6} B0={b0:.6}");
    let m3 = mesh_energy(&MeshConfig::one_dim(1.0), 3).unwrap().energy;
    // objective trace на a grid around the guess
    let obj = |a: f64, b: f64| -> (f64, f64) {
        match orthogonalize(1, 1, 1.0, a, b, &lower, &quad) {
            Ok((c, _)) => {
                let mut pr = ApproximantParams::new(1, 1, 1.0, a, b);
                pr.node_poly = c.clone();
                match Approximant::new(pr) {
                    Ok(apx) => (rayleigh(&apx, 400, quad.scale_for(b)), c[0]),
                    Err(_) => (f64::INFINITY, c[0]),
                }
            }
            Err(_) => (f64::INFINITY, f64::NAN),
        }
    };
    for (a, b) in [(a0, b0), (a0*1.2, b0), (a0, b0*1.2), (-4.0, 3.0), (-5.0, 3.2)] {
        let (e, a2) = obj(a, b);
        println!("A={a:.4} B={b:.4}: E={e:.10} (mesh3={m3:.10}) a2={a2:.6}");
    }
    match optimize(1, 1, 1.0, &quad, 7, &lower) {
        Ok(r) => println!("optimize: A={:.6} B={:.6} a2={:.6} E={:.12} rel={:.2e}",
            r.params.a, r.params.b, r.params.node_poly[0], r.e_var, (r.e_var - m3)/m3),
        Err(e) => println!("optimize err {e}"),
    }
}
