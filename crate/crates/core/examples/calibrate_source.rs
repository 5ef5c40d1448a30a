//! Maintenance helper: regenerates the committed golden numbers.
//!
//! Prints the z-axis Sellmeier offset that makes the 46.15 um grating
//! exactly degenerate at 1570 nm, the resulting refractive indices, and
//! the crystal length calibrated to the 17.3 nm signal marginal. Run it
//! after touching the Sellmeier data and update `data/ktp_sellmeier.toml`
//! and `configs/ktp_1570.toml` if the numbers move.
//!
//! ```text
//! cargo run --example calibrate_source
//! ```

use homspec_core::grid::make_grid;
use homspec_core::sellmeier::SellmeierFile;
use homspec_core::source::{
    calibrate_crystal_length, marginal_fwhm_nm, phase_mismatch, CrystalSpec, PumpShape, PumpSpec,
};
use homspec_core::units::wavelength_to_frequency;

fn main() {
    let data = format!(
        "{}/../../data/ktp_sellmeier.toml",
        env!("CARGO_MANIFEST_DIR")
    );
    let file = SellmeierFile::load(&data).expect("sellmeier data");
    let y = file.axis("y").unwrap().clone();
    let z = file.axis("z").unwrap().clone();

    let crystal = |length_mm: f64| CrystalSpec {
        length_mm,
        poling_period_um: 46.15,
        sellmeier_pump: y.clone(),
        sellmeier_signal: z.clone(),
        sellmeier_idler: y.clone(),
    };

    let nu_d = wavelength_to_frequency(1570.0).unwrap();
    let dk = phase_mismatch(&crystal(1.0), nu_d, nu_d).unwrap();
    println!("n_y(785)  = {:.6}", y.refractive_index(785.0).unwrap());
    println!("n_y(1570) = {:.6}", y.refractive_index(1570.0).unwrap());
    println!("n_z(1570) = {:.6}", z.refractive_index(1570.0).unwrap());
    println!("dk at degeneracy = {dk:+.3e} rad/um (should be ~0 with the shipped offset)");

    let pump = PumpSpec {
        center_lambda_nm: 785.0,
        fwhm_lambda_nm: 5.3,
        shape: PumpShape::Gaussian,
    };
    for n in [256usize, 512] {
        let grid = make_grid(nu_d, 20.0, n).unwrap();
        let length = calibrate_crystal_length(&pump, &crystal(1.0), &grid, 17.3).unwrap();
        let check = marginal_fwhm_nm(&pump, &crystal(length), &grid, None).unwrap();
        println!("{n}x{n} grid: L = {length:.6} mm (marginal check {check:.4} nm)");
    }
}
