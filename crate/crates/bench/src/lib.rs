//! Deterministic inputs for the styletree benchmarks.

#![allow(clippy::needless_range_loop)]

use styletree_core::pipeline::extract_grid;
use styletree_core::rng::SplitMix64;
use styletree_core::synth::{render_image, SynthCategory};
use styletree_core::{
    CategoryMatrix, FeatureBank, FeatureTable, IntensityGrid, SampleFeatures, SamplingMode, SynthSpec, Texture,
};

pub fn textures() -> Vec<SynthCategory> {
    vec![
        SynthCategory {
            name: "checker".into(),
            texture: Texture::Checker { cell: 16 },
        },
        SynthCategory {
            name: "stripes".into(),
            texture: Texture::Stripes { frequency: 0.05 },
        },
    ]
}

/// One rendered texture image of the given size.
pub fn image(size: usize) -> IntensityGrid {
    let spec = SynthSpec::new(textures(), 1, size, 1);
    render_image(&spec, &spec.categories[0], 0)
}

/// Random symmetric distance matrix with a zero diagonal.
pub fn distance_matrix(n: usize, seed: u64) -> CategoryMatrix {
    let mut rng = SplitMix64::new(seed);
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = 0.1 + (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            values[i][j] = d;
            values[j][i] = d;
        }
    }
    CategoryMatrix::new((0..n).map(|i| format!("c{i:03}")).collect(), values).expect("square matrix")
}

/// Feature table of `per_category` tile-sampled images per texture.
pub fn feature_table(per_category: usize, size: usize) -> FeatureTable {
    let spec = SynthSpec::new(textures(), per_category, size, 3);
    let bank = FeatureBank::v1();
    let samples = spec
        .categories
        .iter()
        .flat_map(|c| (0..per_category).map(move |i| (c, i)))
        .map(|(c, i)| SampleFeatures {
            id: format!("{}/{i:03}", c.name),
            category: c.name.clone(),
            patches: extract_grid(&render_image(&spec, c, i), SamplingMode::Tiles16, bank).expect("tiles"),
        })
        .collect();
    FeatureTable::new("v1", samples).expect("consistent table")
}
