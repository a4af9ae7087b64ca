//! Write and read instances in the text and binary formats.

use cqk::instances::{gen_cqk, gen_simplex, Family, GeneratorSpec};
use cqk::io::{read_path, write_path, Format, InstanceFile};

fn main() -> cqk::Result<()> {
    let dir = std::env::temp_dir();
    let knapsack: InstanceFile = gen_cqk(&GeneratorSpec::new(Family::CqkWeaklyCorrelated, 1000, 4))?.into();
    let simplex: InstanceFile = gen_simplex(&GeneratorSpec::new(Family::SimplexN0m3, 1000, 4), 1.0)?.into();
    for (name, inst) in [("knapsack", &knapsack), ("simplex", &simplex)] {
        for (ext, format) in [("txt", Format::Text), ("bin", Format::Binary)] {
            let path = dir.join(format!("cqk-example-{name}.{ext}"));
            write_path(inst, &path, format)?;
            let back = read_path(&path)?;
            let bytes = std::fs::metadata(&path)?.len();
            println!("{name} {ext}: {bytes} bytes, identical after reload: {}", &back == inst);
            std::fs::remove_file(&path)?;
        }
    }
    Ok(())
}
