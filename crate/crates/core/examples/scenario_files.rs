//! Scenario configuration: export a preset, edit it as text, parse it back
//! and report every problem in an invalid file.

use hydrosem::scenario::{export_preset, parse_config, preset};

fn main() -> hydrosem::Result<()> {
    let text = export_preset("sim3")?;
    println!("{text}");
    let parsed = parse_config(&text)?;
    assert_eq!(parsed, preset("sim3")?);
    let broken = text.replace("px = 6", "px = 99").replace("t_end = 60", "t_end = soon");
    match parse_config(&broken) {
        Ok(_) => println!("unexpectedly valid"),
        Err(errors) => println!("invalid file:\n{errors}"),
    }
    Ok(())
}
