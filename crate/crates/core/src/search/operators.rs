use rand::Rng;

/// Allowed values per gene.
pub type Choices = [Vec<usize>];

/// Default per-gene replacement probability: one over the number of genes with a real choice.
pub fn default_rate(choices: &Choices) -> f64 {
    let mutable = choices.iter().filter(|c| c.len() > 1).count();
    1.0 / mutable.max(1) as f64
}

/// Replaces each gene with probability `rate` by a uniform draw from its choices (which may
/// coincide with the current value). If nothing changed, one randomly chosen mutable gene is
/// forced to a different value.
pub fn mutate<R: Rng>(genome: &[usize], choices: &Choices, rate: f64, rng: &mut R) -> Vec<usize> {
    let mut out = genome.to_vec();
    for (g, c) in out.iter_mut().zip(choices) {
        if c.len() > 1 && rng.gen::<f64>() < rate {
            *g = c[rng.gen_range(0..c.len())];
        }
    }
    if out == genome {
        let mutable: Vec<usize> = (0..choices.len()).filter(|&i| choices[i].len() > 1).collect();
        if let Some(&i) = pick(&mutable, rng) {
            let c = &choices[i];
            let current = c.iter().position(|&v| v == genome[i]);
            let mut j = rng.gen_range(0..c.len() - usize::from(current.is_some()));
            if let Some(p) = current {
                if j >= p {
                    j += 1;
                }
            }
            out[i] = c[j];
        }
    }
    out
}

fn pick<'a, T, R: Rng>(v: &'a [T], rng: &mut R) -> Option<&'a T> {
    if v.is_empty() {
        None
    } else {
        Some(&v[rng.gen_range(0..v.len())])
    }
}

/// Uniform per-gene crossover producing two complementary children.
pub fn uniform_crossover<R: Rng>(a: &[usize], b: &[usize], rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    for i in 0..a.len() {
        if rng.gen::<bool>() {
            std::mem::swap(&mut x[i], &mut y[i]);
        }
    }
    (x, y)
}

/// A genome with every gene drawn uniformly.
pub fn random_genome<R: Rng>(choices: &Choices, rng: &mut R) -> Vec<usize> {
    choices.iter().map(|c| c[rng.gen_range(0..c.len())]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space() -> Vec<Vec<usize>> {
        vec![vec![0, 1, 2], vec![3], vec![4, 5]]
    }

    #[test]
    fn zero_rate_changes_exactly_one_gene() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = vec![1, 3, 5];
        for _ in 0..200 {
            let m = mutate(&g, &space(), 0.0, &mut rng);
            assert_eq!(m.iter().zip(&g).filter(|(a, b)| a != b).count(), 1);
            assert_eq!(m[1], 3);
        }
    }

    #[test]
    fn full_rate_never_returns_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = vec![0, 3, 4];
        for _ in 0..200 {
            let m = mutate(&g, &space(), 1.0, &mut rng);
            assert_ne!(m, g);
            assert!(space().iter().zip(&m).all(|(c, v)| c.contains(v)));
        }
    }

    #[test]
    fn crossover_preserves_genes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (x, y) = uniform_crossover(&[1, 2, 3, 4], &[5, 6, 7, 8], &mut rng);
        for i in 0..4 {
            let mut pair = [x[i], y[i]];
            pair.sort_unstable();
            assert_eq!(pair, [i + 1, i + 5]);
        }
    }
}
