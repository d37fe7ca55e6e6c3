//! Escape basins of `u'' = x u - 2 u^3` on a coarse grid of initial data.

use cornerflow::shooting::classify_region;

fn main() -> cornerflow::Result<()> {
    let raster = classify_region((-1.5, 1.5), (-1.5, 1.5), (31, 61), 20.0, 1e-3)?;
    // one text row per v0 value, top row largest
    for j in (0..raster.v0_values.len()).rev() {
        let row: String = (0..raster.u0_values.len())
            .map(|i| match raster.cell(i, j).verdict.sign() {
                1 => '#',
                -1 => '.',
                _ => 'o',
            })
            .collect();
        println!("{row}");
    }
    println!("'#' escapes to +inf, '.' to -inf");
    Ok(())
}
