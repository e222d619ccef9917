use snbumps::groundstate::*;
fn main() {
    let gs = solve_ground_state(1e-10, 30.0, 3000).unwrap();
    let r = gs.radii(); let u = gs.u_values(); let p = gs.psi_values();
    let h = r[1]-r[0]; let n = r.len();
    let mut worst = (0.0f64, 0usize);
    for i in 2..n-2 {
        let s = r[i];
        let d1 = (-p[i+2]+8.0*p[i+1]-8.0*p[i-1]+p[i-2])/(12.0*h);
        let d2 = (-p[i+2]+16.0*p[i+1]-30.0*p[i]+16.0*p[i-1]-p[i-2])/(12.0*h*h);
        let res = (d2 + 2.0/s*d1 + 0.5*u[i]*u[i]).abs();
        if res > worst.0 { worst = (res, i); }
    }
    println!("worst psi residual {:.3e} at i={} s={}", worst.0, worst.1, r[worst.1]);
    for j in worst.1.saturating_sub(3)..(worst.1+4).min(n) {
        println!("  s={:.4} psi={:.12e}", r[j], p[j]);
    }
}
