use rayon::prelude::*;

use crate::circle_map::CircleMap;
use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, split_unit, CompensatedSum, Real};

/// Largest preimage tree walked by [`preimage_average`].
pub const PREIMAGE_CAP: u64 = 1 << 24;
// the tree is split into independent subtrees at this many nodes
const FRONTIER: u64 = 256;

/// `K⁻ⁿ Σ_{y ∈ f⁻ⁿ(z)} φ(y)`, by walking the full preimage tree.
///
/// The sum converges to `μ(φ)` geometrically in `n`, which makes it a
/// brute-force check on the spectral eigenmeasure. Subtrees are summed in a
/// fixed order, so the result does not depend on the thread count.
pub fn preimage_average<T: Real>(
    map: &CircleMap<T>,
    phi: impl Fn(T) -> T + Sync,
    depth: u32,
    anchor: T,
) -> Result<T> {
    let k = map.degree() as u64;
    let leaves = k
        .checked_pow(depth)
        .filter(|&c| c <= PREIMAGE_CAP)
        .ok_or(Error::CapExceeded {
            required: k.checked_pow(depth).unwrap_or(u64::MAX),
            cap: PREIMAGE_CAP,
        })?;
    let z = split_unit(anchor).1;

    let mut frontier = vec![z];
    let mut level = 0;
    while level < depth && (frontier.len() as u64) < FRONTIER {
        frontier = frontier.iter().flat_map(|&w| map.preimages(w)).collect();
        level += 1;
    }
    let remaining = depth - level;
    let partial: Vec<T> = frontier
        .par_iter()
        .map(|&w| {
            let mut acc = CompensatedSum::new();
            walk(map, &phi, w, remaining, &mut acc);
            acc.value()
        })
        .collect();
    Ok(compensated_sum(partial) / T::from_u64(leaves).unwrap())
}

fn walk<T: Real>(map: &CircleMap<T>, phi: &impl Fn(T) -> T, z: T, depth: u32, acc: &mut CompensatedSum<T>) {
    if depth == 0 {
        acc.add(phi(z));
        return;
    }
    for j in 0..map.degree() as i64 {
        let y = map.inverse_lift(j, z).1;
        walk(map, phi, y, depth - 1, acc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_observable_averages_to_one() {
        let m = CircleMap::<f64>::trig_doubling(0.01).unwrap();
        assert_eq!(preimage_average(&m, |_| 1.0, 12, 0.37).unwrap(), 1.0);
    }

    #[test]
    fn linear_map_log_derivative() {
        let m = CircleMap::<f64>::linear(2).unwrap();
        let h = m.log_derivative();
        let v = preimage_average(&m, |x| h.value(x), 10, 0.3).unwrap();
        assert_eq!(v, 2f64.ln());
    }

    #[test]
    fn preimages_map_back_to_anchor() {
        let m = CircleMap::<f64>::blaschke(0.1).unwrap();
        let z = 0.42;
        let pre = m.preimages(z);
        assert_eq!(pre.len(), 2);
        for y in pre {
            let back = m.apply(y);
            assert!((back - z).abs() < 1e-14);
        }
    }

    #[test]
    fn cap() {
        let m = CircleMap::<f64>::linear(2).unwrap();
        assert!(matches!(
            preimage_average(&m, |_| 1.0, 25, 0.0),
            Err(Error::CapExceeded { .. })
        ));
    }
}
