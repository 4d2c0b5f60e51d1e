//! Fisher-weighted nearest-distance classification.
//!
//! Training rescales every descriptor onto `[0, 100]` using the training
//! minimum and maximum, scores each descriptor with the Fisher discriminant
//! ratio, keeps the top 15%, and stores every training patch projected onto
//! the surviving descriptors. A patch's distance to a category is its
//! minimum weighted squared distance to any training patch of that category;
//! an image's distance is the mean over its patches.

use crate::error::{Error, Result};

/// Percentage of descriptors kept after Fisher scoring.
pub const SELECTED_PERCENT: usize = 15;
/// Score given to descriptors with zero within-class variance but nonzero
/// between-class variance.
pub const FISHER_CAP: f64 = 1e6;
pub const RESCALED_MAX: f64 = 100.0;

/// `ceil(0.15 * bank_size)`.
pub fn selection_size(bank_size: usize) -> usize {
    (SELECTED_PERCENT * bank_size).div_ceil(100)
}

/// Maps `v` from `[min, max]` onto `[0, 100]`, clamped; 0 for a degenerate range.
#[inline]
pub fn rescale_value(v: f64, min: f64, max: f64) -> f64 {
    if max > min {
        (RESCALED_MAX * (v - min) / (max - min)).clamp(0.0, RESCALED_MAX)
    } else {
        0.0
    }
}

/// Fisher discriminant score per feature: between-class variance of the
/// class means over the mean within-class (n-1) variance.
///
/// `groups[c]` holds the feature vectors of category `c`.
pub fn fisher_scores(groups: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
    if groups.len() < 2 {
        return Err(Error::Training(format!(
            "Fisher scoring needs at least 2 categories, got {}",
            groups.len()
        )));
    }
    if let Some((c, g)) = groups.iter().enumerate().find(|(_, g)| g.len() < 2) {
        return Err(Error::Training(format!(
            "category #{c} has {} training vectors, at least 2 are required",
            g.len()
        )));
    }
    let dims = groups[0][0].len();
    if groups.iter().flatten().any(|v| v.len() != dims) {
        return Err(Error::Contract("training vectors differ in length".into()));
    }

    let c = groups.len() as f64;
    let mut means = vec![vec![0.0; dims]; groups.len()];
    let mut vars = vec![vec![0.0; dims]; groups.len()];
    for (g, group) in groups.iter().enumerate() {
        let n = group.len() as f64;
        for v in group {
            for (m, x) in means[g].iter_mut().zip(v) {
                *m += x;
            }
        }
        means[g].iter_mut().for_each(|m| *m /= n);
        for v in group {
            for ((s, x), m) in vars[g].iter_mut().zip(v).zip(&means[g]) {
                *s += (x - m).powi(2);
            }
        }
        vars[g].iter_mut().for_each(|s| *s /= n - 1.0);
    }

    Ok((0..dims)
        .map(|f| {
            let grand = means.iter().map(|m| m[f]).sum::<f64>() / c;
            let between = means.iter().map(|m| (m[f] - grand).powi(2)).sum::<f64>() / (c - 1.0);
            let within = vars.iter().map(|v| v[f]).sum::<f64>() / c;
            if within > 0.0 {
                between / within
            } else if between > 0.0 {
                FISHER_CAP
            } else {
                0.0
            }
        })
        .collect())
}

/// Indices of the `ceil(0.15 * n)` best scores, ties broken by lower index,
/// returned in ascending index order.
pub fn select(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(selection_size(scores.len()));
    order.sort_unstable();
    order
}

/// `sum_f w_f (a_f - b_f)^2`.
pub fn wnd_distance(a: &[f64], b: &[f64], weights: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() != weights.len() {
        return Err(Error::Contract(format!(
            "distance between vectors of length {} and {} with {} weights",
            a.len(),
            b.len(),
            weights.len()
        )));
    }
    Ok(weighted_sq(a, b, weights))
}

#[inline]
fn weighted_sq(a: &[f64], b: &[f64], weights: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(weights)
        .map(|((x, y), w)| w * (x - y) * (x - y))
        .sum()
}

/// One training image: its sample id, category index and raw patch vectors.
#[derive(Clone, Copy, Debug)]
pub struct LabeledImage<'a> {
    pub id: &'a str,
    pub category: usize,
    pub patches: &'a [Vec<f64>],
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    categories: Vec<String>,
    train_min: Vec<f64>,
    train_max: Vec<f64>,
    fisher: Vec<f64>,
    selected: Vec<usize>,
    weights: Vec<f64>,
    /// `training[c]`: rescaled, selected vectors of category `c`.
    training: Vec<Vec<Vec<f64>>>,
    /// Sample id each training vector came from, parallel to `training`.
    sources: Vec<Vec<String>>,
    patches_per_image: usize,
}

/// Image-level prediction with the distance to every category.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub category: usize,
    pub distances: Vec<f64>,
}

impl TrainedModel {
    /// Trains on `images`. `categories` must be strictly increasing; their
    /// order is the tie-break order for predictions.
    pub fn train(categories: Vec<String>, images: &[LabeledImage<'_>], patches_per_image: usize) -> Result<Self> {
        if categories.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract("categories must be sorted and distinct".into()));
        }
        let dims = images
            .iter()
            .flat_map(|i| i.patches.first())
            .map(Vec::len)
            .next()
            .ok_or_else(|| Error::Training("no training patches".into()))?;
        for image in images {
            if image.category >= categories.len() {
                return Err(Error::Contract(format!("{}: category index out of range", image.id)));
            }
            if image.patches.len() != patches_per_image {
                return Err(Error::Contract(format!(
                    "{}: {} patches, expected {patches_per_image}",
                    image.id,
                    image.patches.len()
                )));
            }
            if image.patches.iter().any(|p| p.len() != dims) {
                return Err(Error::Contract(format!(
                    "{}: feature vectors differ in length",
                    image.id
                )));
            }
        }

        let mut train_min = vec![f64::INFINITY; dims];
        let mut train_max = vec![f64::NEG_INFINITY; dims];
        for patch in images.iter().flat_map(|i| i.patches) {
            for (f, &v) in patch.iter().enumerate() {
                train_min[f] = train_min[f].min(v);
                train_max[f] = train_max[f].max(v);
            }
        }

        let mut rescaled: Vec<Vec<Vec<f64>>> = vec![Vec::new(); categories.len()];
        let mut sources: Vec<Vec<String>> = vec![Vec::new(); categories.len()];
        for image in images {
            for patch in image.patches {
                rescaled[image.category].push(
                    patch
                        .iter()
                        .enumerate()
                        .map(|(f, &v)| rescale_value(v, train_min[f], train_max[f]))
                        .collect(),
                );
                sources[image.category].push(image.id.to_string());
            }
        }
        if categories.len() < 2 {
            return Err(Error::Training(format!(
                "training needs at least 2 categories, got {}",
                categories.len()
            )));
        }
        if let Some(c) = rescaled.iter().position(|g| g.len() < 2) {
            return Err(Error::Training(format!(
                "category '{}' has {} training patches, at least 2 are required",
                categories[c],
                rescaled[c].len()
            )));
        }

        let fisher = fisher_scores(&rescaled)?;
        let selected = select(&fisher);
        let weights = selected.iter().map(|&f| fisher[f]).collect();
        let training = rescaled
            .into_iter()
            .map(|group| {
                group
                    .into_iter()
                    .map(|v| selected.iter().map(|&f| v[f]).collect())
                    .collect()
            })
            .collect();

        Ok(TrainedModel {
            categories,
            train_min,
            train_max,
            fisher,
            selected,
            weights,
            training,
            sources,
            patches_per_image,
        })
    }

    /// Reassembles a model from stored parts, checking every invariant.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        categories: Vec<String>,
        train_min: Vec<f64>,
        train_max: Vec<f64>,
        fisher: Vec<f64>,
        selected: Vec<usize>,
        training: Vec<Vec<Vec<f64>>>,
        sources: Vec<Vec<String>>,
        patches_per_image: usize,
    ) -> Result<Self> {
        let dims = fisher.len();
        let bad = |msg: &str| Err(Error::Contract(format!("stored model: {msg}")));
        if train_min.len() != dims || train_max.len() != dims {
            return bad("range length differs from score length");
        }
        if selected.len() != selection_size(dims) || selected.windows(2).any(|w| w[0] >= w[1]) {
            return bad("selected indices must be strictly increasing with the standard count");
        }
        if selected.iter().any(|&f| f >= dims) {
            return bad("selected index out of range");
        }
        if training.len() != categories.len() || sources.len() != categories.len() {
            return bad("training groups do not match categories");
        }
        for (group, src) in training.iter().zip(&sources) {
            if group.len() != src.len() {
                return bad("sources do not match training vectors");
            }
            if group
                .iter()
                .any(|v| v.len() != selected.len() || v.iter().any(|x| !(0.0..=RESCALED_MAX).contains(x)))
            {
                return bad("training vector has wrong length or leaves [0, 100]");
            }
        }
        let weights = selected.iter().map(|&f| fisher[f]).collect();
        Ok(TrainedModel {
            categories,
            train_min,
            train_max,
            fisher,
            selected,
            weights,
            training,
            sources,
            patches_per_image,
        })
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn train_min(&self) -> &[f64] {
        &self.train_min
    }

    pub fn train_max(&self) -> &[f64] {
        &self.train_max
    }

    pub fn fisher(&self) -> &[f64] {
        &self.fisher
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn training(&self) -> &[Vec<Vec<f64>>] {
        &self.training
    }

    pub fn sources(&self) -> &[Vec<String>] {
        &self.sources
    }

    pub fn patches_per_image(&self) -> usize {
        self.patches_per_image
    }

    /// Copy of the model with every Fisher weight multiplied by `factor`.
    pub fn with_scaled_weights(&self, factor: f64) -> Self {
        let mut m = self.clone();
        m.fisher.iter_mut().for_each(|w| *w *= factor);
        m.weights.iter_mut().for_each(|w| *w *= factor);
        m
    }

    /// Every descriptor of `raw` rescaled with the training ranges.
    pub fn rescale(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.train_min.len() {
            return Err(Error::Contract(format!(
                "feature vector has {} values, model expects {}",
                raw.len(),
                self.train_min.len()
            )));
        }
        Ok(raw
            .iter()
            .zip(self.train_min.iter().zip(&self.train_max))
            .map(|(&v, (&lo, &hi))| rescale_value(v, lo, hi))
            .collect())
    }

    /// Rescaled values of the selected descriptors only.
    pub fn project(&self, raw: &[f64]) -> Result<Vec<f64>> {
        if raw.len() != self.train_min.len() {
            return Err(Error::Contract(format!(
                "feature vector has {} values, model expects {}",
                raw.len(),
                self.train_min.len()
            )));
        }
        Ok(self
            .selected
            .iter()
            .map(|&f| rescale_value(raw[f], self.train_min[f], self.train_max[f]))
            .collect())
    }

    /// `d_{x,A}`: minimum weighted distance from a projected patch to the
    /// training patches of `category`.
    pub fn patch_class_distance(&self, patch: &[f64], category: usize) -> Result<f64> {
        let group = self
            .training
            .get(category)
            .ok_or_else(|| Error::Contract(format!("category index {category} out of range")))?;
        if group.is_empty() {
            return Err(Error::Training(format!(
                "category '{}' has no training patches",
                self.categories[category]
            )));
        }
        if patch.len() != self.weights.len() {
            return Err(Error::Contract(format!(
                "projected patch has {} values, model selects {}",
                patch.len(),
                self.weights.len()
            )));
        }
        Ok(group
            .iter()
            .map(|t| weighted_sq(patch, t, &self.weights))
            .fold(f64::INFINITY, f64::min))
    }

    /// `D_{I,A}`: mean of the per-patch distances of a projected image.
    pub fn image_class_distance(&self, patches: &[Vec<f64>], category: usize) -> Result<f64> {
        if patches.len() != self.patches_per_image {
            return Err(Error::Contract(format!(
                "image has {} patches, model expects {}",
                patches.len(),
                self.patches_per_image
            )));
        }
        let mut total = 0.0;
        for p in patches {
            total += self.patch_class_distance(p, category)?;
        }
        Ok(total / self.patches_per_image as f64)
    }

    /// Distances of a projected image to every category.
    pub fn image_distances(&self, patches: &[Vec<f64>]) -> Result<Vec<f64>> {
        (0..self.categories.len())
            .map(|c| self.image_class_distance(patches, c))
            .collect()
    }

    /// Category of minimum distance for raw patch vectors of one image.
    pub fn predict(&self, raw_patches: &[Vec<f64>]) -> Result<Prediction> {
        let projected = raw_patches
            .iter()
            .map(|p| self.project(p))
            .collect::<Result<Vec<_>>>()?;
        let distances = self.image_distances(&projected)?;
        Ok(Prediction {
            category: argmin(&distances),
            distances,
        })
    }

    /// Nearest category of a single projected patch.
    pub fn predict_patch(&self, patch: &[f64]) -> Result<usize> {
        let distances = (0..self.categories.len())
            .map(|c| self.patch_class_distance(patch, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(argmin(&distances))
    }
}

/// First index of the minimum; categories are sorted, so ties resolve to the
/// lexicographically first name.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn selection_counts() {
        assert_eq!(selection_size(4024), 604);
        assert_eq!(selection_size(256), 39);
        assert_eq!(selection_size(100), 15);
        assert_eq!(selection_size(1), 1);
    }

    #[test]
    fn rescale_endpoints() {
        assert_eq!(rescale_value(2.0, 2.0, 7.0), 0.0);
        assert_eq!(rescale_value(7.0, 2.0, 7.0), 100.0);
        assert_eq!(rescale_value(-3.0, 2.0, 7.0), 0.0);
        assert_eq!(rescale_value(99.0, 2.0, 7.0), 100.0);
        assert_eq!(rescale_value(123.0, 7.0, 7.0), 0.0);
    }

    #[test]
    fn fisher_hand_example() {
        let s = fisher_scores(&[vec![vec![0.0], vec![2.0]], vec![vec![4.0], vec![6.0]]]).unwrap();
        assert_eq!(s, vec![4.0]);
    }

    #[test]
    fn fisher_degenerate_cases() {
        let constant = fisher_scores(&[vec![vec![3.0], vec![3.0]], vec![vec![3.0], vec![3.0]]]).unwrap();
        assert_eq!(constant, vec![0.0]);
        let perfect = fisher_scores(&[vec![vec![0.0], vec![0.0]], vec![vec![1.0], vec![1.0]]]).unwrap();
        assert_eq!(perfect, vec![FISHER_CAP]);
    }

    #[test]
    fn fisher_needs_two_per_category() {
        let err = fisher_scores(&[vec![vec![0.0]], vec![vec![4.0], vec![6.0]]]).unwrap_err();
        assert!(matches!(err, Error::Training(_)));
        assert!(matches!(
            fisher_scores(&[vec![vec![0.0], vec![1.0]]]),
            Err(Error::Training(_))
        ));
    }

    #[test]
    fn select_ties_prefer_low_index() {
        assert_eq!(select(&[1.0; 256]), (0..39).collect::<Vec<_>>());
        let mut scores = vec![0.0; 20];
        scores[17] = 5.0;
        scores[3] = 5.0;
        scores[9] = 2.0;
        // ceil(0.15 * 20) = 3
        assert_eq!(select(&scores), vec![3, 9, 17]);
    }

    #[test]
    fn distance_examples() {
        assert_eq!(wnd_distance(&[0.0, 0.0], &[1.0, 1.0], &[1.0, 2.0]).unwrap(), 3.0);
        assert_eq!(wnd_distance(&[4.0, 2.0], &[4.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(
            wnd_distance(&[0.0], &[1.0, 1.0], &[1.0]),
            Err(Error::Contract(_))
        ));
    }

    fn toy_model() -> TrainedModel {
        // category 0 patches {(0,), (10,)}, category 1 patches {(50,), (60,)}
        TrainedModel::from_parts(
            names(2),
            vec![0.0],
            vec![100.0],
            vec![1.0],
            vec![0],
            vec![vec![vec![0.0], vec![10.0]], vec![vec![50.0], vec![60.0]]],
            vec![vec!["a".into(), "b".into()], vec!["c".into(), "d".into()]],
            2,
        )
        .unwrap()
    }

    #[test]
    fn patch_distance_is_nearest() {
        let m = toy_model();
        assert_eq!(m.patch_class_distance(&[4.0], 0).unwrap(), 16.0);
        assert_eq!(m.patch_class_distance(&[10.0], 0).unwrap(), 0.0);
        assert_eq!(m.patch_class_distance(&[40.0], 1).unwrap(), 100.0);
    }

    #[test]
    fn image_distance_is_patch_mean() {
        let m = toy_model();
        assert_eq!(
            m.image_class_distance(&[vec![4.0], vec![8.0]], 0).unwrap(),
            (16.0 + 4.0) / 2.0
        );
        assert!(matches!(
            m.image_class_distance(&[vec![4.0]], 0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn sixteen_patch_mean() {
        let m = TrainedModel::from_parts(
            names(2),
            vec![0.0],
            vec![100.0],
            vec![1.0],
            vec![0],
            vec![vec![vec![0.0], vec![0.0]], vec![vec![50.0], vec![60.0]]],
            vec![vec!["a".into(), "b".into()], vec!["c".into(), "d".into()]],
            16,
        )
        .unwrap();
        // patch values sqrt(1)..sqrt(16) give distances 1..16 to category 0
        let patches: Vec<Vec<f64>> = (1..=16).map(|k| vec![(k as f64).sqrt()]).collect();
        let d = m.image_class_distance(&patches, 0).unwrap();
        assert!((d - 8.5).abs() < 1e-12);
    }

    #[test]
    fn identical_categories_tie_to_first() {
        let patches = vec![vec![1.0, 2.0], vec![3.0, 1.0]];
        let images = [
            LabeledImage {
                id: "a1",
                category: 0,
                patches: &patches,
            },
            LabeledImage {
                id: "b1",
                category: 1,
                patches: &patches,
            },
        ];
        let m = TrainedModel::train(vec!["alpha".into(), "beta".into()], &images, 2).unwrap();
        assert_eq!(m.predict(&patches).unwrap().category, 0);
    }

    #[test]
    fn train_rejects_unsorted_categories() {
        let err = TrainedModel::train(vec!["b".into(), "a".into()], &[], 16).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn train_names_undersized_category() {
        let p1 = vec![vec![0.0, 1.0]];
        let p2 = vec![vec![2.0, 1.0]];
        let p3 = vec![vec![4.0, 1.0]];
        let images = [
            LabeledImage {
                id: "x",
                category: 0,
                patches: &p1,
            },
            LabeledImage {
                id: "y",
                category: 1,
                patches: &p2,
            },
            LabeledImage {
                id: "z",
                category: 1,
                patches: &p3,
            },
        ];
        let err = TrainedModel::train(vec!["lonely".into(), "pair".into()], &images, 1).unwrap_err();
        assert!(err.to_string().contains("lonely"), "{err}");
    }

    fn random_images(
        seed: u64,
        categories: usize,
        per_category: usize,
        patches: usize,
        dims: usize,
    ) -> Vec<(usize, Vec<Vec<f64>>)> {
        let mut state = seed;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        (0..categories * per_category)
            .map(|i| {
                let c = i / per_category;
                let v = (0..patches)
                    .map(|_| {
                        (0..dims)
                            .map(|f| next() * 10.0 + if f == 0 { c as f64 * 3.0 } else { 0.0 })
                            .collect()
                    })
                    .collect();
                (c, v)
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn weight_scaling_preserves_rankings(seed in any::<u64>(), factor in 0.01f64..100.0) {
            let data = random_images(seed, 3, 3, 4, 12);
            let ids: Vec<String> = (0..data.len()).map(|i| format!("s{i}")).collect();
            let images: Vec<_> = data.iter().zip(&ids).map(|((c, p), id)| LabeledImage { id, category: *c, patches: p }).collect();
            let model = TrainedModel::train(names(3), &images, 4).unwrap();
            let scaled = model.with_scaled_weights(factor);
            let probe = random_images(seed ^ 0xdead_beef, 3, 1, 4, 12);
            for (_, patches) in &probe {
                let a = model.predict(patches).unwrap();
                let b = scaled.predict(patches).unwrap();
                prop_assert_eq!(a.category, b.category);
                for (x, y) in a.distances.iter().zip(&b.distances) {
                    prop_assert!((x * factor - y).abs() <= 1e-9 * y.abs().max(1.0));
                }
            }
        }

        #[test]
        fn adding_a_patch_never_increases_distance(seed in any::<u64>()) {
            let data = random_images(seed, 2, 3, 2, 6);
            let ids: Vec<String> = (0..data.len()).map(|i| format!("s{i}")).collect();
            let images: Vec<_> = data.iter().zip(&ids).map(|((c, p), id)| LabeledImage { id, category: *c, patches: p }).collect();
            let model = TrainedModel::train(names(2), &images, 2).unwrap();
            let mut training = model.training().to_vec();
            let mut sources = model.sources().to_vec();
            let extra: Vec<f64> = (0..model.selected().len()).map(|i| ((seed >> (i % 60)) % 100) as f64).collect();
            training[0].push(extra);
            sources[0].push("extra".into());
            let grown = TrainedModel::from_parts(
                model.categories().to_vec(), model.train_min().to_vec(), model.train_max().to_vec(),
                model.fisher().to_vec(), model.selected().to_vec(), training, sources, 2,
            ).unwrap();
            for (_, patches) in random_images(seed.rotate_left(7), 2, 2, 1, 6) {
                let x = model.project(&patches[0]).unwrap();
                prop_assert!(grown.patch_class_distance(&x, 0).unwrap() <= model.patch_class_distance(&x, 0).unwrap());
            }
        }

        #[test]
        fn selection_cardinality(n in 1usize..5000) {
            let scores: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64).collect();
            let sel = select(&scores);
            prop_assert_eq!(sel.len(), (15 * n).div_ceil(100));
            prop_assert!(sel.windows(2).all(|w| w[0] < w[1]));
            let cutoff = sel.iter().map(|&i| scores[i]).fold(f64::INFINITY, f64::min);
            prop_assert!((0..n).filter(|i| !sel.contains(i)).all(|i| scores[i] <= cutoff));
        }
    }
}
