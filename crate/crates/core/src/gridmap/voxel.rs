//! 3D labeled voxel stacks and their collapse onto a 2D semantic grid.

use serde::{Deserialize, Serialize};

use super::{ClassConfig, Label, SemanticGrid};
use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics<T> {
    None,
    /// Probability-like weights over the canonical class order.
    Categorical(Vec<T>),
    /// Raw feature vector, compared to class embeddings by cosine similarity.
    Embedding(Vec<T>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Voxel<T> {
    pub occupied: bool,
    pub semantics: Semantics<T>,
}

impl<T> Voxel<T> {
    pub fn empty() -> Self {
        Voxel { occupied: false, semantics: Semantics::None }
    }
}

/// Dense voxel block, `x` fastest then `y` then `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoxelStack<T> {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub resolution: T,
    pub voxels: Vec<Voxel<T>>,
}

impl<T: Real> VoxelStack<T> {
    pub fn new(nx: usize, ny: usize, nz: usize, resolution: T) -> Self {
        VoxelStack { nx, ny, nz, resolution, voxels: vec![Voxel::empty(); nx * ny * nz] }
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.nx * (y + self.ny * z)
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> &Voxel<T> {
        &self.voxels[self.index(x, y, z)]
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, voxel: Voxel<T>) {
        let i = self.index(x, y, z);
        self.voxels[i] = voxel;
    }

    /// Height of the voxel centre above the stack base.
    pub fn height(&self, z: usize) -> T {
        (T::from_usize_lossy(z) + T::lit(0.5)) * self.resolution
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::Config("voxel stack dimensions must be positive".into()));
        }
        if !(self.resolution > T::zero()) {
            return Err(Error::Config("voxel resolution must be positive".into()));
        }
        if self.voxels.len() != self.nx * self.ny * self.nz {
            return Err(Error::Config(format!(
                "voxel payload has {} entries, expected {}",
                self.voxels.len(),
                self.nx * self.ny * self.nz
            )));
        }
        Ok(())
    }
}

/// Most probable class of a categorical vector; ties go to the lowest class index.
pub fn assign_label_categorical<T: Real>(probs: &[T], config: &ClassConfig<T>) -> Result<Label> {
    if probs.len() != config.num_classes() {
        return Err(Error::Config(format!(
            "categorical vector has {} entries, configuration has {} classes",
            probs.len(),
            config.num_classes()
        )));
    }
    if probs.iter().any(|p| !(*p >= T::zero()) || !p.is_finite()) {
        return Err(Error::Degenerate("categorical vector has negative or non-finite entries".into()));
    }
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    if probs[best] == T::zero() {
        return Err(Error::Degenerate("categorical vector is all zero".into()));
    }
    Ok(config.label_at(best).expect("index within class count"))
}

/// Index of the class embedding with the largest cosine similarity to `feature`.
/// Ties go to the lowest index.
pub fn assign_label_embedding<T: Real>(feature: &[T], class_embeddings: &[Vec<T>]) -> Result<usize> {
    if class_embeddings.is_empty() {
        return Err(Error::Config("no class embeddings".into()));
    }
    let norm = |v: &[T]| v.iter().map(|a| *a * *a).sum::<T>().sqrt();
    let nf = norm(feature);
    if !(nf > T::zero()) {
        return Err(Error::Degenerate("feature embedding has zero norm".into()));
    }
    let mut best: Option<(usize, T)> = None;
    for (k, emb) in class_embeddings.iter().enumerate() {
        if emb.len() != feature.len() {
            return Err(Error::Config(format!(
                "class embedding {k} has length {}, feature has {}",
                emb.len(),
                feature.len()
            )));
        }
        let ne = norm(emb);
        if !(ne > T::zero()) {
            return Err(Error::Degenerate(format!("class embedding {k} has zero norm")));
        }
        let dot: T = feature.iter().zip(emb).map(|(a, b)| *a * *b).sum();
        let cos = dot / (nf * ne);
        if best.map_or(true, |(_, c)| cos > c) {
            best = Some((k, cos));
        }
    }
    Ok(best.expect("non-empty").0)
}

fn voxel_label<T: Real>(
    voxel: &Voxel<T>,
    config: &ClassConfig<T>,
    class_embeddings: Option<&[Vec<T>]>,
) -> Result<Option<Label>> {
    match &voxel.semantics {
        Semantics::None => Ok(None),
        Semantics::Categorical(p) => assign_label_categorical(p, config).map(Some),
        Semantics::Embedding(f) => {
            let emb = class_embeddings
                .ok_or_else(|| Error::Config("embedding voxels require class embeddings".into()))?;
            if emb.len() != config.num_classes() {
                return Err(Error::Config(format!(
                    "{} class embeddings given, configuration has {} classes",
                    emb.len(),
                    config.num_classes()
                )));
            }
            let k = assign_label_embedding(f, emb)?;
            Ok(config.label_at(k))
        }
    }
}

/// Collapses a voxel stack onto a 2D grid (labels only, no distance field).
///
/// Per column: an occupied voxel above the height threshold makes an obstacle;
/// otherwise a task class wins over an impeding environment class, which wins
/// over everything else. Within a tier the highest voxel decides.
pub fn collapse_voxels<T: Real>(
    stack: &VoxelStack<T>,
    config: &ClassConfig<T>,
    class_embeddings: Option<&[Vec<T>]>,
) -> Result<SemanticGrid<T>> {
    stack.validate().map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("empty or malformed voxel stack: {m}")),
        e => e,
    })?;
    config.validate()?;
    let mut labels = Vec::with_capacity(stack.nx * stack.ny);
    for y in 0..stack.ny {
        for x in 0..stack.nx {
            let mut obstacle = false;
            let mut task = None;
            let mut impeding = None;
            let mut other = None;
            // scanning bottom-up lets higher voxels overwrite lower ones in their tier
            for z in 0..stack.nz {
                let v = stack.get(x, y, z);
                if !v.occupied {
                    continue;
                }
                if stack.height(z) > config.obstacle_height_threshold {
                    obstacle = true;
                    break;
                }
                match voxel_label(v, config, class_embeddings)? {
                    Some(l @ Label::Task(_)) => task = Some(l),
                    Some(l) if config.is_impeding(l) => impeding = Some(l),
                    Some(l) => other = Some(l),
                    None => {}
                }
            }
            let label = if obstacle {
                Label::Obstacle
            } else {
                task.or(impeding).or(other).unwrap_or(Label::Free)
            };
            labels.push(label);
        }
    }
    SemanticGrid::new(stack.nx, stack.ny, stack.resolution, config.clone(), labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::EnvClass;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn terrain_config() -> ClassConfig<f64> {
        ClassConfig {
            task_classes: vec![],
            environment_classes: vec![
                EnvClass::new("grass", false),
                EnvClass::new("path", false),
                EnvClass::new("mud", true),
            ],
            free_class: "floor".into(),
            obstacle_height_threshold: 1.5,
        }
    }

    fn field_config() -> ClassConfig<f64> {
        ClassConfig {
            task_classes: vec!["animal".into()],
            environment_classes: vec![EnvClass::new("pebbles", true), EnvClass::new("grass", false)],
            free_class: "floor".into(),
            obstacle_height_threshold: 1.5,
        }
    }

    #[test]
    fn categorical_argmax() {
        let c = terrain_config();
        let path = c.label_by_name("path").unwrap();
        assert_eq!(assign_label_categorical(&[0.1, 0.7, 0.2, 0.0], &c).unwrap(), path);
        assert_eq!(assign_label_categorical(&[0.2, 1.4, 0.4, 0.0], &c).unwrap(), path);
        assert_eq!(
            assign_label_categorical(&[0.5, 0.5, 0.0, 0.0], &c).unwrap(),
            c.label_by_name("grass").unwrap()
        );
    }

    #[test]
    fn categorical_errors() {
        let c = terrain_config();
        assert!(matches!(assign_label_categorical(&[0.5, 0.5], &c), Err(Error::Config(_))));
        assert!(matches!(assign_label_categorical(&[0.0; 4], &c), Err(Error::Degenerate(_))));
        assert!(matches!(assign_label_categorical(&[-0.1, 0.2, 0.0, 0.0], &c), Err(Error::Degenerate(_))));
    }

    #[test]
    fn embedding_self_and_scaled() {
        let emb = vec![vec![1.0, 0.0, 0.0], vec![0.3, 0.9, 0.1], vec![-0.2, 0.1, 0.8]];
        for (k, e) in emb.iter().enumerate() {
            assert_eq!(assign_label_embedding(e, &emb).unwrap(), k);
            let scaled: Vec<f64> = e.iter().map(|v| 3.0 * v).collect();
            assert_eq!(assign_label_embedding(&scaled, &emb).unwrap(), k);
        }
        assert!(matches!(assign_label_embedding(&[0.0, 0.0, 0.0], &emb), Err(Error::Degenerate(_))));
    }

    #[test]
    fn embedding_matches_exhaustive_cosine() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let emb: Vec<Vec<f64>> = (0..4).map(|_| (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let f: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cos = |a: &[f64], b: &[f64]| {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                d / (a.iter().map(|x| x * x).sum::<f64>().sqrt() * b.iter().map(|x| x * x).sum::<f64>().sqrt())
            };
            let mut best = 0;
            for k in 1..4 {
                if cos(&f, &emb[k]) > cos(&f, &emb[best]) {
                    best = k;
                }
            }
            assert_eq!(assign_label_embedding(&f, &emb).unwrap(), best);
        }
    }

    fn cat(c: &ClassConfig<f64>, name: &str) -> Voxel<f64> {
        let mut p = vec![0.0; c.num_classes()];
        let l = c.label_by_name(name).unwrap();
        let idx = (0..c.num_classes()).find(|&i| c.label_at(i) == Some(l)).unwrap();
        p[idx] = 1.0;
        Voxel { occupied: true, semantics: Semantics::Categorical(p) }
    }

    #[test]
    fn precedence_rule() {
        let c = field_config();
        // occupied voxel centred at 2.0 m with a 1.5 m threshold
        let mut tall = VoxelStack::new(1, 1, 4, 0.8);
        tall.set(0, 0, 0, cat(&c, "animal"));
        tall.set(0, 0, 2, Voxel { occupied: true, semantics: Semantics::None });
        assert_eq!(tall.height(2), 2.0);
        assert_eq!(collapse_voxels(&tall, &c, None).unwrap().label(0, 0), Label::Obstacle);

        let mut s = VoxelStack::new(2, 1, 3, 0.4);
        s.set(0, 0, 0, cat(&c, "floor"));
        s.set(0, 0, 1, cat(&c, "pebbles"));
        s.set(0, 0, 2, cat(&c, "animal"));
        s.set(1, 0, 0, cat(&c, "floor"));
        let g = collapse_voxels(&s, &c, None).unwrap();
        assert_eq!(g.label(0, 0), Label::Task(0));
        assert_eq!(g.label(1, 0), Label::Free);
    }

    #[test]
    fn impeding_beats_non_impeding_and_highest_wins_in_tier() {
        let c = field_config();
        let mut s = VoxelStack::new(2, 1, 2, 0.5);
        s.set(0, 0, 0, cat(&c, "pebbles"));
        s.set(0, 0, 1, cat(&c, "grass"));
        s.set(1, 0, 0, cat(&c, "floor"));
        s.set(1, 0, 1, cat(&c, "grass"));
        let g = collapse_voxels(&s, &c, None).unwrap();
        assert_eq!(g.label(0, 0), c.label_by_name("pebbles").unwrap());
        assert_eq!(g.label(1, 0), c.label_by_name("grass").unwrap());
    }

    #[test]
    fn embedding_voxels_need_class_embeddings() {
        let c = field_config();
        let mut s = VoxelStack::new(1, 1, 1, 0.5);
        s.set(0, 0, 0, Voxel { occupied: true, semantics: Semantics::Embedding(vec![0.0, 1.0]) });
        assert!(collapse_voxels(&s, &c, None).is_err());
        let emb = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![-1.0, 0.0]];
        let g = collapse_voxels(&s, &c, Some(&emb)).unwrap();
        assert_eq!(g.label(0, 0), c.label_at(1).unwrap());
    }

    #[test]
    fn empty_stack_is_an_error() {
        let s: VoxelStack<f64> = VoxelStack::new(0, 0, 0, 0.5);
        assert!(collapse_voxels(&s, &field_config(), None).is_err());
    }
}
