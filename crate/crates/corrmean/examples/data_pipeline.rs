//! The data plumbing end to end: synthesizing labeled Gaussian-mixture
//! rows, partitioning them IID and by label shards, holding out a test
//! split, and round-tripping through the two on-disk formats (CSV with a
//! trailing integer label, and the big-endian IDX image/label pair).
//!
//! Run with: cargo run --example data_pipeline

use std::io::Write;

use corrmean::data::{
    load_csv, load_idx, split_holdout, split_iid, split_noniid, synth_gaussian_mixture, Dataset,
};

fn label_histogram(part: &Dataset, classes: usize) -> Vec<usize> {
    let mut counts = vec![0usize; classes];
    for &label in part.labels() {
        counts[label] += 1;
    }
    counts
}

fn main() -> corrmean::Result<()> {
    let data = synth_gaussian_mixture(120, 6, 3, 5.0, 8)?;
    println!(
        "mixture: {} rows, {} features, {} classes",
        data.len(),
        data.dim(),
        data.class_count()
    );

    let (train, test) = split_holdout(&data, 0.25, 8)?;
    println!("holdout: {} train rows, {} test rows", train.len(), test.len());

    println!();
    println!("IID split across 4 nodes (every node sees every class):");
    for (i, part) in split_iid(&train, 4, 8)?.iter().enumerate() {
        println!("  node {i}: label counts {:?}", label_histogram(part, 3));
    }
    println!("label-sharded split (two sorted shards per node):");
    for (i, part) in split_noniid(&train, 4, 8)?.iter().enumerate() {
        println!("  node {i}: label counts {:?}", label_histogram(part, 3));
    }

    // CSV round trip: feature columns then an integer label column.
    let dir = std::env::temp_dir();
    let csv_path = dir.join("corrmean_example.csv");
    {
        let mut f = std::fs::File::create(&csv_path)?;
        writeln!(f, "f0,f1,f2,f3,f4,f5,label")?;
        for (row, label) in data.rows().iter().zip(data.labels()) {
            let cells: Vec<String> = row.values().iter().map(|v| format!("{v}")).collect();
            writeln!(f, "{},{label}", cells.join(","))?;
        }
    }
    let reloaded = load_csv(&csv_path)?;
    println!();
    println!(
        "CSV round trip: {} rows, first label {}, first feature {:+.4}",
        reloaded.len(),
        reloaded.labels()[0],
        reloaded.rows()[0].values()[0]
    );

    // IDX round trip: 4 tiny 2x3 "images" with byte pixels.
    let images_path = dir.join("corrmean_example_images.idx");
    let labels_path = dir.join("corrmean_example_labels.idx");
    let pixels: [u8; 24] = [
        0, 51, 102, 153, 204, 255, 255, 204, 153, 102, 51, 0, 10, 20, 30, 40, 50, 60, 70, 80, 90,
        100, 110, 120,
    ];
    {
        let mut f = std::fs::File::create(&images_path)?;
        f.write_all(&2051u32.to_be_bytes())?;
        f.write_all(&4u32.to_be_bytes())?;
        f.write_all(&2u32.to_be_bytes())?;
        f.write_all(&3u32.to_be_bytes())?;
        f.write_all(&pixels)?;
        let mut f = std::fs::File::create(&labels_path)?;
        f.write_all(&2049u32.to_be_bytes())?;
        f.write_all(&4u32.to_be_bytes())?;
        f.write_all(&[0, 1, 2, 1])?;
    }
    let idx = load_idx(&images_path, &labels_path)?;
    println!(
        "IDX round trip: {} rows of dim {} (pixels scaled to [0,1]), labels {:?}",
        idx.len(),
        idx.dim(),
        idx.labels()
    );
    println!("  first row: {:?}", idx.rows()[0].values());

    for path in [&csv_path, &images_path, &labels_path] {
        let _ = std::fs::remove_file(path);
    }
    Ok(())
}
