//! gnuplot scripts next to the CSV files they plot. Each script renders a
//! PNG of the same name when run from the output directory.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

fn preamble(name: &str, width: u32, height: u32) -> String {
    format!(
        "set terminal pngcairo size {width},{height}\n\
         set output '{name}.png'\n\
         set datafile separator ','\n\
         set key top right\n\
         set grid\n"
    )
}

pub fn write_script(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(format!("{name}.gp"));
    std::fs::write(&path, body).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// `r` and `φ` against `x`.
pub fn reference(fields: &str) -> String {
    let mut s = preamble("reference", 900, 500);
    let _ = write!(
        s,
        "set xlabel 'x'\n\
         plot '{fields}' skip 1 using 1:2 with lines title 'r', \\\n\
         \x20    '' skip 1 using 1:4 with lines title 'phi'\n"
    );
    s
}

/// `|u|` and the long wave at one time. `spiked` adds the reconstructed
/// field with its spike at `x = 0`.
pub fn fields(name: &str, fields: &str, spiked: Option<&str>) -> String {
    let mut s = preamble(name, 900, 800);
    let _ = write!(
        s,
        "set multiplot layout 2,1\n\
         set xlabel 'x'\n\
         plot '{fields}' skip 1 using 1:(sqrt($2**2 + $3**2)) with lines title '|u|'\n"
    );
    match spiked {
        Some(sp) => {
            let _ = write!(
                s,
                "plot '{fields}' skip 1 using 1:4 with lines title 'v tilde', \\\n\
                 \x20    '{sp}' skip 1 using 1:2 with lines title 'v'\n"
            );
        }
        None => {
            let _ = writeln!(s, "plot '{fields}' skip 1 using 1:4 with lines title 'v'");
        }
    }
    s.push_str("unset multiplot\n");
    s
}

/// One panel per named column of a table whose first column is `t`.
pub fn time_series(name: &str, file: &str, header: &[&str]) -> String {
    let cols = header.len() - 1;
    let mut s = preamble(name, 900, 260 * cols as u32);
    let _ = writeln!(s, "set multiplot layout {cols},1\nset xlabel 't'");
    for (j, h) in header.iter().enumerate().skip(1) {
        let _ = writeln!(s, "plot '{file}' skip 1 using 1:{} with lines title '{h}'", j + 1);
    }
    s.push_str("unset multiplot\n");
    s
}

/// Overlay of the full run from perturbed data and the linearized
/// prediction: modulus of the short wave on top, long wave below.
pub fn overlay(name: &str, file: &str, t: f64) -> String {
    let mut s = preamble(name, 900, 800);
    let _ = write!(
        s,
        "set multiplot layout 2,1 title 't = {t}'\n\
         set xlabel 'x'\n\
         plot '{file}' skip 1 using 1:2 with lines lw 2 title '|u| perturbed data', \\\n\
         \x20    '' skip 1 using 1:3 with lines dt 2 title '|u| reference + linearized'\n\
         plot '{file}' skip 1 using 1:4 with lines lw 2 title 'v perturbed data', \\\n\
         \x20    '' skip 1 using 1:5 with lines dt 2 title 'v reference + linearized'\n\
         unset multiplot\n"
    );
    s
}
