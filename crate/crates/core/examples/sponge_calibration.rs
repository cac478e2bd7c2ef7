//! Reflection of the absorbing layer against its thickness and strength,
//! measured on a 1D wave chain (units: wavelength 1, speed 1).

use hydrosem::solver::sponge_reflection_1d;

fn main() {
    println!("thickness  strength  reflection");
    for thickness in [2.0, 5.0, 10.0] {
        for strength in [1.0, 2.0, 4.0, 8.0, 16.0] {
            println!("{thickness:9.1}  {strength:8.1}  {:.2e}", sponge_reflection_1d(thickness, strength));
        }
    }
}
