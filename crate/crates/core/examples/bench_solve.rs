use gl_core::*;
use gl_core::vortices::{assign_degrees, detect_vortices};
use std::time::Instant;

fn report(tag: &str, r: &SolveResult, eps: EpsParam) {
    let vs = assign_degrees(&r.field, detect_vortices(&r.field, eps, 0.5));
    println!(
        "{tag}: E={:.8} conv={} gn={:.2e} nv={}",
        r.report.e_eps, r.converged, r.grad_norm, vs.len()
    );
    for v in &vs {
        println!(
            "   pos=({:+.4},{:+.4}) deg={:?} minmod={:.3} core_r={:.3} loop_r={:?}",
            v.center[0], v.center[1], v.degree, v.min_modulus, v.core_radius, v.degree_loop_radius
        );
    }
}

fn main() {
    let grid = make_grid(GridSpec::Square { half_width: 1.0, n: 129 }).unwrap();
    let opts = SolveOptions { grad_tol: 1e-6, max_iters: 400_000, ..Default::default() };

    // Standard GL reference: delta = 0, D = 2.
    let params0 = AnisotropyParams::new(0.0).unwrap();
    let mut current = default_competitor(&grid, -2, EpsParam::new(0.2).unwrap()).unwrap();
    for e in [0.2, 0.1, 0.05] {
        let eps = EpsParam::new(e).unwrap();
        let t0 = Instant::now();
        let r = minimize(&current, &params0, eps, &opts).unwrap();
        println!("--- delta=0 eps={e} ({:.1}s)", t0.elapsed().as_secs_f64());
        report("d0", &r, eps);
        current = r.field;
    }

    // delta=0.1: direct 2-vortex init at the migrated positions, eps=0.05.
    let params = AnisotropyParams::new(0.1).unwrap();
    let eps = EpsParam::new(0.05).unwrap();
    let init = init_competitor(&grid, -2, eps, &[[0.71875, 0.0], [-0.71875, 0.0]]).unwrap();
    let t0 = Instant::now();
    let r = minimize(&init, &params, eps, &opts).unwrap();
    println!("--- delta=0.1 eps=0.05 direct 2-vortex init ({:.1}s)", t0.elapsed().as_secs_f64());
    report("d01-direct", &r, eps);
}
