use solimg::bdg::{solve_wavenumbers, zero_mode_state, SolitonBox, ZeroModeKind};
use solimg::grid::PixelGrid;
use solimg::imagestats::{build_image_statistics, FluctuationModel, ThermalOccupation};
use solimg::inference::gaussian_fisher;
use solimg::meanfield::{fisher_box, fisher_pixelized_poisson};
use solimg::profiles::DarkSolitonParams;

fn main() {
    let grid = PixelGrid::symmetric(0.7, 9.8).unwrap();
    let p = DarkSolitonParams::new(100.0, 0.0, 0.0).unwrap();
    let px = fisher_pixelized_poisson(&p, &grid, 0.0).unwrap();
    let bx = fisher_box(&p, &grid, 10.0).unwrap();
    println!("homogeneous first sum  F' = {:.4}", px.first_sum);
    println!("gaussian correction    F' = {:.4}", px.gaussian_correction);
    println!("box (matched N)        F' = {:.4}  (enh {:.4})", bx.report.fisher, bx.enhancement);
    for (label, kind) in [
        ("zeta=1.0", ZeroModeKind::Squeezed { zeta: 1.0 }),
        ("zeta=1.5", ZeroModeKind::Squeezed { zeta: 1.5 }),
        ("tau=0.2 ", ZeroModeKind::Thermal { tau: 0.2 }),
    ] {
        let family = |q: f64| {
            let b = SolitonBox::new(100.0, 10.0, q)?;
            let modes = solve_wavenumbers(&b, 70)?;
            let state = zero_mode_state(kind, &b)?;
            let model = FluctuationModel::new(modes, state, ThermalOccupation::zero_temperature())?;
            build_image_statistics(&model, &grid)
        };
        let g = gaussian_fisher(family, 0.0, 1e-3).unwrap();
        println!(
            "bogoliubov {label}       F' = {:.4}  (quad {:.4}, logdet {:.4}, trace {:.4}, fd {:.2e}, cond {:.2e})",
            g.report.fisher, g.quadratic_term, g.logdet_term, g.trace_term, g.fd_shift, g.condition_number
        );
    }
}
