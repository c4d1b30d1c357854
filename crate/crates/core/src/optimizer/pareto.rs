use alloc::vec::Vec;

use super::objectives::ObjectiveVector;

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    let (ka, kb) = (a.minimization_key(), b.minimization_key());
    ka.iter().zip(&kb).all(|(x, y)| x <= y) && ka.iter().zip(&kb).any(|(x, y)| x < y)
}

/// Indices of the non-dominated vectors, ascending.
///
/// After a lexicographic sort a vector can only be dominated by one placed
/// before it, and domination is transitive, so comparing against the front
/// built so far is enough.
pub fn pareto_front(points: &[ObjectiveVector]) -> Vec<usize> {
    let keys: Vec<[f64; 4]> = points.iter().map(ObjectiveVector::minimization_key).collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        keys[i].iter().zip(&keys[j]).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&f| dominates(&points[f], &points[i])) {
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(a: f64, b: f64, c: f64, k: f64) -> ObjectiveVector {
        ObjectiveVector { max_reflection_db: a, mean_insertion_db: b, worst_crosstalk_db: c, k_z: k }
    }

    #[test]
    fn small_cases() {
        assert_eq!(pareto_front(&[v(-10.0, -0.1, -30.0, 150.0)]), [0]);
        let pts = [v(-10.0, -0.1, -30.0, 150.0), v(-12.0, -0.1, -30.0, 150.0)];
        assert_eq!(pareto_front(&pts), [1]);
        // insertion compared by magnitude
        assert!(dominates(&v(0.0, -0.1, 0.0, 1.0), &v(0.0, -0.2, 0.0, 1.0)));
        // larger k_z is better
        assert!(dominates(&v(0.0, 0.0, 0.0, 2.0), &v(0.0, 0.0, 0.0, 1.0)));
        assert!(!dominates(&pts[0], &pts[0]));
    }

    #[test]
    fn matches_pairwise_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<ObjectiveVector> = (0..1000)
            .map(|_| {
                // coarse values force ties
                let q = |rng: &mut ChaCha8Rng, s: f64| (rng.gen_range(0.0..10.0f64)).round() * s;
                v(-q(&mut rng, 1.0), -q(&mut rng, 0.1), -q(&mut rng, 3.0), 150.0 + q(&mut rng, 1.0))
            })
            .collect();
        let brute: Vec<usize> = (0..pts.len()).filter(|&i| !(0..pts.len()).any(|j| dominates(&pts[j], &pts[i]))).collect();
        assert_eq!(pareto_front(&pts), brute);

        let mut doubled = pts.clone();
        doubled.extend(pts.iter().rev().cloned());
        let front: Vec<[u64; 4]> = {
            let mut f: Vec<[u64; 4]> = pareto_front(&doubled).iter().map(|&i| doubled[i].minimization_key().map(f64::to_bits)).collect();
            f.sort();
            f.dedup();
            f
        };
        let mut base: Vec<[u64; 4]> = brute.iter().map(|&i| pts[i].minimization_key().map(f64::to_bits)).collect();
        base.sort();
        base.dedup();
        assert_eq!(front, base);
    }
}
