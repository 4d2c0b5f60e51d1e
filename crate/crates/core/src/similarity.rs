//! Class-to-class distance matrix, its normalisation and the similarity
//! transform.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Square matrix of reals indexed by category, `values[row][col]`.
#[derive(Clone, Debug, PartialEq)]
pub struct CategoryMatrix {
    pub categories: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl CategoryMatrix {
    pub fn new(categories: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = categories.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::Contract(format!("matrix is not {n}x{n}")));
        }
        Ok(CategoryMatrix { categories, values })
    }

    pub fn zeros(categories: Vec<String>) -> Self {
        let n = categories.len();
        CategoryMatrix {
            categories,
            values: vec![vec![0.0; n]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row][col]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        CategoryMatrix {
            categories: self.categories.clone(),
            values: self.values.iter().map(|r| r.iter().map(|&v| f(v)).collect()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.len();
        CategoryMatrix {
            categories: self.categories.clone(),
            values: (0..n).map(|i| (0..n).map(|j| self.values[j][i]).collect()).collect(),
        }
    }

    /// Largest `|m[i][j] - m[j][i]|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.values[i][j] - self.values[j][i]).abs());
            }
        }
        worst
    }

    /// Elementwise mean of equally shaped matrices.
    pub fn mean_of(matrices: &[CategoryMatrix]) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Aggregation("no matrices to average".into()))?;
        if matrices.iter().any(|m| m.categories != first.categories) {
            return Err(Error::Aggregation("matrices cover different categories".into()));
        }
        let n = first.len();
        let k = matrices.len() as f64;
        let mut values = vec![vec![0.0; n]; n];
        for m in matrices {
            for (row, src) in values.iter_mut().zip(&m.values) {
                for (v, s) in row.iter_mut().zip(src) {
                    *v += s;
                }
            }
        }
        values.iter_mut().flatten().for_each(|v| *v /= k);
        Ok(CategoryMatrix {
            categories: first.categories.clone(),
            values,
        })
    }
}

/// One image's distance to every category, as produced by the model.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageDistances {
    pub category: usize,
    pub distances: Vec<f64>,
}

/// `M[A][Q]`: mean over images `i` of category `Q` of `D_{i,A}`.
pub fn build_matrix(categories: &[String], images: &[ImageDistances]) -> Result<CategoryMatrix> {
    let n = categories.len();
    let mut sums = vec![vec![0.0; n]; n];
    let mut counts = vec![0usize; n];
    for image in images {
        if image.category >= n || image.distances.len() != n {
            return Err(Error::Aggregation(format!(
                "image distances do not cover the {n} categories"
            )));
        }
        counts[image.category] += 1;
        for (a, &d) in image.distances.iter().enumerate() {
            sums[a][image.category] += d;
        }
    }
    if let Some(q) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Aggregation(format!(
            "category '{}' has no images",
            categories[q]
        )));
    }
    for row in &mut sums {
        for (v, &c) in row.iter_mut().zip(&counts) {
            *v /= c as f64;
        }
    }
    CategoryMatrix::new(categories.to_vec(), sums)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    /// Divide each row by its diagonal, then min-max rescale the row onto `[0, 1]`.
    #[default]
    RatioRescale,
    /// Divide each row by its diagonal and clamp to `[0, 1]`.
    PaperLiteral,
}

impl Normalization {
    pub fn tag(&self) -> &'static str {
        match self {
            Normalization::RatioRescale => "ratio-rescale",
            Normalization::PaperLiteral => "paper-literal",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio-rescale" => Ok(Normalization::RatioRescale),
            "paper-literal" => Ok(Normalization::PaperLiteral),
            other => Err(Error::Config(format!(
                "unknown normalization '{other}' (expected ratio-rescale or paper-literal)"
            ))),
        }
    }
}

pub fn normalize(m: &CategoryMatrix, strategy: Normalization) -> Result<CategoryMatrix> {
    let mut values = Vec::with_capacity(m.len());
    for (a, row) in m.values.iter().enumerate() {
        let own = row[a];
        // also rejects NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(own > 0.0) {
            return Err(Error::Normalization(format!(
                "self-distance of '{}' is {own}, must be positive",
                m.categories[a]
            )));
        }
        let ratios: Vec<f64> = row.iter().map(|v| v / own).collect();
        let out = match strategy {
            Normalization::PaperLiteral => ratios.iter().map(|r| r.clamp(0.0, 1.0)).collect(),
            Normalization::RatioRescale => {
                let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if hi > lo {
                    ratios.iter().map(|r| (r - lo) / (hi - lo)).collect()
                } else {
                    vec![0.0; ratios.len()]
                }
            }
        };
        values.push(out);
    }
    CategoryMatrix::new(m.categories.clone(), values)
}

/// `S = 1 - d`.
pub fn to_similarity(d: &CategoryMatrix) -> CategoryMatrix {
    d.map(|v| 1.0 - v)
}

/// `(d + d^T) / 2` with a zero diagonal.
pub fn symmetrize(d: &CategoryMatrix) -> CategoryMatrix {
    let n = d.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                values[i][j] = (d.values[i][j] + d.values[j][i]) / 2.0;
            }
        }
    }
    CategoryMatrix {
        categories: d.categories.clone(),
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cats(n: usize) -> Vec<String> {
        ["a", "b", "c", "d"][..n].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn matrix_is_mean_over_images_of_column_category() {
        let images = vec![
            ImageDistances {
                category: 1,
                distances: vec![2.0, 9.0],
            },
            ImageDistances {
                category: 1,
                distances: vec![4.0, 1.0],
            },
            ImageDistances {
                category: 0,
                distances: vec![5.0, 6.0],
            },
        ];
        let m = build_matrix(&cats(2), &images).unwrap();
        assert_eq!(m.values, vec![vec![5.0, 3.0], vec![6.0, 5.0]]);
    }

    #[test]
    fn duplicated_images_do_not_change_matrix() {
        let images = vec![
            ImageDistances {
                category: 0,
                distances: vec![1.0, 3.0],
            },
            ImageDistances {
                category: 1,
                distances: vec![7.0, 2.0],
            },
        ];
        let doubled: Vec<_> = images.iter().chain(&images).cloned().collect();
        assert_eq!(
            build_matrix(&cats(2), &images).unwrap(),
            build_matrix(&cats(2), &doubled).unwrap()
        );
    }

    #[test]
    fn empty_category_fails() {
        let images = vec![ImageDistances {
            category: 0,
            distances: vec![1.0, 3.0],
        }];
        assert!(matches!(build_matrix(&cats(2), &images), Err(Error::Aggregation(_))));
    }

    #[test]
    fn ratio_rescale_example() {
        let m = CategoryMatrix::new(
            cats(3),
            vec![vec![0.5, 1.0, 2.0], vec![3.0, 3.0, 3.0], vec![4.0, 2.0, 1.0]],
        )
        .unwrap();
        let d = normalize(&m, Normalization::RatioRescale).unwrap();
        assert_eq!(d.values[0][0], 0.0);
        assert!((d.values[0][1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.values[0][2], 1.0);
        assert_eq!(d.values[1], vec![0.0; 3]);
        assert_eq!(d.values[2][2], 0.0);
    }

    #[test]
    fn paper_literal_clamps() {
        let m = CategoryMatrix::new(cats(2), vec![vec![2.0, 3.0], vec![1.0, 4.0]]).unwrap();
        let d = normalize(&m, Normalization::PaperLiteral).unwrap();
        assert_eq!(d.values, vec![vec![1.0, 1.0], vec![0.25, 1.0]]);
    }

    #[test]
    fn zero_self_distance_is_named() {
        let m = CategoryMatrix::new(cats(2), vec![vec![1.0, 3.0], vec![1.0, 0.0]]).unwrap();
        let err = normalize(&m, Normalization::RatioRescale).unwrap_err();
        assert!(err.to_string().contains("'b'"));
    }

    #[test]
    fn similarity_and_symmetry() {
        let d = CategoryMatrix::new(cats(2), vec![vec![0.1, 0.2], vec![0.4, 0.0]]).unwrap();
        let s = to_similarity(&d);
        assert_eq!(s.values[1][1], 1.0);
        assert_eq!(s.values[1][0] + d.values[1][0], 1.0);
        let sym = symmetrize(&d);
        assert!((sym.values[0][1] - 0.3).abs() < 1e-15);
        assert_eq!(sym.values[0][0], 0.0);
        assert_eq!(sym.asymmetry(), 0.0);
        assert_eq!(symmetrize(&sym), sym);
    }

    #[test]
    fn mean_of_matrices() {
        let a = CategoryMatrix::new(cats(2), vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = a.map(|v| v * 3.0);
        assert_eq!(
            CategoryMatrix::mean_of(&[a, b]).unwrap().values,
            vec![vec![2.0, 4.0], vec![6.0, 8.0]]
        );
    }

    proptest! {
        #[test]
        fn normalization_is_scale_invariant_and_bounded(
            raw in proptest::collection::vec(0.01f64..100.0, 16),
            scale in prop_oneof![Just(2.0), Just(0.5), Just(4.0), Just(0.125)],
        ) {
            let rows: Vec<Vec<f64>> = raw.chunks(4).map(|c| c.to_vec()).collect();
            let m = CategoryMatrix::new(cats(4), rows).unwrap();
            for strategy in [Normalization::RatioRescale, Normalization::PaperLiteral] {
                let d = normalize(&m, strategy).unwrap();
                // power-of-two scaling is exact in binary floating point
                let scaled = normalize(&m.map(|v| v * scale), strategy).unwrap();
                prop_assert_eq!(&d, &scaled);
                for v in d.values.iter().flatten() {
                    prop_assert!((0.0..=1.0).contains(v));
                }
                for v in to_similarity(&d).values.iter().flatten() {
                    prop_assert!((0.0..=1.0).contains(v));
                }
            }
        }
    }
}
