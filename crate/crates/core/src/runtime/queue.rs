/// Orders pending Reflex actions by deadline; equal deadlines keep insertion
/// order.
pub fn reflex_queue_process<A>(mut pending: Vec<(A, f64)>) -> Vec<(A, f64)> {
    pending.sort_by(|a, b| a.1.total_cmp(&b.1));
    pending
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deadline_order_with_stable_ties() {
        let out = reflex_queue_process(vec![("c", 30.0), ("a", 10.0), ("b", 20.0)]);
        assert_eq!(out.iter().map(|p| p.1).collect::<Vec<_>>(), [10.0, 20.0, 30.0]);
        let out = reflex_queue_process(vec![("x", 5.0), ("y", 5.0), ("z", 1.0), ("w", 5.0)]);
        assert_eq!(out.iter().map(|p| p.0).collect::<Vec<_>>(), ["z", "x", "y", "w"]);
    }

    #[test]
    fn agrees_with_reference_stable_sort() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let pending: Vec<(usize, f64)> = (0..1000).map(|i| (i, rng.random_range(0..50) as f64)).collect();
        // insertion sort as the reference: stable by construction
        let mut reference: Vec<(usize, f64)> = Vec::new();
        for item in &pending {
            let pos = reference.iter().position(|r| r.1 > item.1).unwrap_or(reference.len());
            reference.insert(pos, *item);
        }
        assert_eq!(reflex_queue_process(pending), reference);
    }
}
