//! Reads the shipped partition files, reports validation results, and
//! writes a generated partition back out in the same format.

use caccioppoli::partition::io::PartitionFile;
use caccioppoli::sequences::gen_inscribed_polygon;
use caccioppoli::{LabelSet, Partition};

fn main() -> caccioppoli::Result<()> {
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/data");
    for name in ["remark_n4", "split_square", "triple_phase", "tjunction", "truncated"] {
        let path = format!("{data}/{name}.json");
        match PartitionFile::read(&path) {
            Ok(file) => {
                let report = file.validate();
                println!("{name}: {report}");
            }
            Err(e) => println!("{name}: {e}"),
        }
    }

    let z = LabelSet::scalar(&[0.0, 1.0])?;
    let u: Partition = gen_inscribed_polygon(5, 0.5)?.into();
    let text = PartitionFile::from_parts(&z, &u).to_json();
    let (z2, u2) = PartitionFile::parse(&text)?.into_parts()?;
    println!("pentagon round trip: labels equal {}, partition equal {}", z == z2, u == u2);
    println!("written as {} bytes of JSON, {} cells", text.len(), u.cell_count());
    Ok(())
}
