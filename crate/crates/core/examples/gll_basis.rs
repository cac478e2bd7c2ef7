//! Gauss–Lobatto–Legendre nodes, weights and the nodal derivative matrix.
//!
//! `cargo run --example gll_basis -- 4`

use hydrosem::basis::{diff_matrix, gll_rule};

fn main() -> hydrosem::Result<()> {
    let order: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(4);
    let rule = gll_rule(order)?;
    println!("order {order}: {} points", rule.len());
    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
        println!("  node {x:+.15}  weight {w:.15}");
    }
    println!("∫ x² dx = {:.15} (exact 2/3)", rule.integrate(|x| x * x));
    let d = diff_matrix(&rule);
    println!("derivative matrix:");
    for i in 0..d.size() {
        let row: Vec<String> = d.row(i).iter().map(|v| format!("{v:+8.4}")).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
