use anharmonic_lab::dd::Dd;

fn main() {
    // replicate laguerre Newton for N=12, alpha=-1/2, smallest root
    let n = 12usize;
    let alpha = -0.5f64;
    let x0 = 0.050361889117292405f64; // f64 Jacobi guess
    let a_dd = Dd::from_f64(alpha);
    let bcoef: Vec<Dd> = (0..=n)
        .map(|k| {
            let kf = Dd::from_f64(k as f64);
            kf.mul(kf.add(a_dd)).sqrt()
        })
        .collect();
    let dfac = Dd::from_f64(n as f64).mul(Dd::from_f64(n as f64).add(a_dd)).sqrt();
    let pair = |x: Dd| -> (Dd, Dd) {
        let mut pm = Dd::ZERO;
        let mut p = Dd::ONE;
        for k in 0..n {
            let ak = Dd::from_f64(2.0 * k as f64 + alpha + 1.0);
            let next = x.sub(ak).mul(p).sub(bcoef[k].mul(pm)).div(bcoef[k + 1]);
            pm = p;
            p = next;
        }
        (p, pm)
    };
    let mut x = Dd::from_f64(x0);
    for it in 0..8 {
        let (p, pm) = pair(x);
        let dp = Dd::from_f64(n as f64).mul(p).sub(dfac.mul(pm)).div(x);
        let step = p.div(dp);
        x = x.sub(step);
        println!("it {it}: p={:.3e} step={:.3e} x={:.17e}+{:.3e}", p.to_f64(), step.to_f64(), x.hi, x.lo);
    }
}
