//! The grid right-shift semigroup on sampled H-valued functions, plus the
//! CSV interchange format.
//!
//! Run with: cargo run --example grid_shift

use phi::{read_grid_csv, shift_evolution, write_grid_csv, GridFunction};

fn main() {
    // Three-component samples on the grid t = 0, 0.5, 1.0, ...
    let samples: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            let t = i as f64 * 0.5;
            vec![(-t).exp(), (0.7 * t).sin(), 1.0]
        })
        .collect();
    let f = GridFunction::new(0.5, samples);
    println!("f has {} samples of dimension {}", f.len(), f.value_dim());

    // (U(s) f)(t) = f(t + s): drop the leading samples.
    let g = shift_evolution(&f, 1.0).expect("grid aligned");
    println!(
        "after U(1.0): {} samples, first = {:?}",
        g.len(),
        g.samples()[0]
    );

    // Semigroup law holds exactly on the grid.
    let a = shift_evolution(&shift_evolution(&f, 0.5).unwrap(), 1.0).unwrap();
    let b = shift_evolution(&f, 1.5).unwrap();
    println!("U(1.0) U(0.5) f == U(1.5) f: {}", a == b);

    // Misaligned shifts are rejected rather than interpolated.
    println!(
        "U(0.3) f: {:?}",
        shift_evolution(&f, 0.3).err().map(|e| e.to_string())
    );

    // CSV round trip.
    let path = std::env::temp_dir().join("phi-grid-example.csv");
    write_grid_csv(&f, &path).expect("writable");
    let back = read_grid_csv(&path).expect("readable");
    println!("csv round trip preserves the function: {}", back == f);
    println!("wrote {}", path.display());
}
