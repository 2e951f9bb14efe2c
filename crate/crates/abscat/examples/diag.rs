use abscat::fields::{FluxAssignment, ScalarField};
use abscat::gauges::*;
use abscat::geometry::{ConvexRegion, Obstacle, Vec2};

fn main() {
    let obs = Obstacle::new(
        ConvexRegion::disc(Vec2::ZERO, 1.0),
        vec![Vec2::new(3.0, 0.5)],
    )
    .unwrap();
    let b = ScalarField::gaussian(Vec2::new(0.5, 0.5), 0.6, 1.0);
    let phi = FluxAssignment(vec![0.7, -0.3]);
    let ac = coulomb_gauge(&b, &phi, &obs).unwrap();
    let aw = cone_gauge(&b, &phi, &obs, Vec2::new(0.0, 1.0), 0.6).unwrap();
    for l in 0..2 {
        println!("cone circ err[{l}] = {:.3e}", aw.circulation(&obs, l).unwrap() - phi.0[l]);
        println!("coul circ err[{l}] = {:.3e}", ac.circulation(&obs, l).unwrap() - phi.0[l]);
    }
    // gradient test diagnostics
    let x0 = Vec2::new(4.0, 0.0);
    let x = Vec2::new(-3.0, -2.0);
    let h = 1e-4;
    let lam = |p: Vec2| gauge_function(&ac, &aw, &obs, x0, p, 1e-11).unwrap();
    let gx = (lam(x + Vec2::new(h, 0.0)) - lam(x - Vec2::new(h, 0.0))) / (2.0 * h);
    let gy = (lam(x + Vec2::new(0.0, h)) - lam(x - Vec2::new(0.0, h))) / (2.0 * h);
    let d = ac.eval(x).unwrap() - aw.eval(x).unwrap();
    println!("grad λ = ({gx:.8}, {gy:.8}) vs diff = ({:.8}, {:.8})", d.x, d.y);
    let (up, down) = gauge_function_two_paths(&ac, &aw, &obs, x0, x, 1e-11).unwrap();
    println!("two paths: {up:.10} vs {down:.10}  (Δ = {:.3e})", up - down);
}
