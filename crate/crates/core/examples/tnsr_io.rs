//! Writing and reading tensors and key=value manifests.

use multiway::io::{read_tensor, write_tensor, Manifest};
use multiway::tensor::DenseTensor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("multiway-tnsr-io");
    std::fs::create_dir_all(&dir)?;

    let t = DenseTensor::from_fn(&[2, 3, 4], |i| (i[0] * 100 + i[1] * 10 + i[2]) as f64);
    let path = dir.join("t.tnsr");
    write_tensor(&path, &t)?;
    let back = read_tensor(&path)?;
    assert_eq!(back, t);
    println!("{} bytes for dims {:?}", std::fs::metadata(&path)?.len(), back.dims());

    let mut m = Manifest::new();
    m.set("dims", "2,3,4").set("scale", 0.1 + 0.2);
    m.write(dir.join("manifest.txt"))?;
    let m = Manifest::read(dir.join("manifest.txt"))?;
    println!("dims {:?}, scale {}", m.get_usize_list("dims")?, m.get_f64("scale")?);
    Ok(())
}
