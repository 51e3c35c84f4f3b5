//! Set specifications accepted by the simulator:
//! `progression:u,step,len`, `random:density[,seed]`, `greedy[:a2,a1,a0]`,
//! `list:x1,x2,…`, or a path to a whitespace-separated file of elements.

use quaddiff::poly::QuadraticPoly;
use quaddiff::rng::SplitMix64;
use quaddiff::sets::{greedy_difference_free, IntegerSet};

pub fn parse_set_spec(
    spec: &str,
    n: u64,
    default_poly: &QuadraticPoly,
    seed: u64,
) -> Result<IntegerSet, String> {
    if let Some(rest) = spec.strip_prefix("progression:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 3 {
            return Err(format!("progression spec needs u,step,len: {spec:?}"));
        }
        let u: u64 = parts[0].trim().parse().map_err(|e| format!("bad offset: {e}"))?;
        let step: u64 = parts[1].trim().parse().map_err(|e| format!("bad step: {e}"))?;
        let len: u64 = parts[2].trim().parse().map_err(|e| format!("bad length: {e}"))?;
        if step == 0 || len == 0 {
            return Err("progression step and length must be positive".into());
        }
        let elements: Vec<u64> = (1..=len).map(|m| u + m * step).collect();
        IntegerSet::new(n, elements).map_err(|e| e.to_string())
    } else if let Some(rest) = spec.strip_prefix("random:") {
        let parts: Vec<&str> = rest.split(',').collect();
        let density: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|e| format!("bad density: {e}"))?;
        if !(0.0..=1.0).contains(&density) {
            return Err("density must lie in [0, 1]".into());
        }
        let seed = if parts.len() > 1 {
            parts[1].trim().parse().map_err(|e| format!("bad seed: {e}"))?
        } else {
            seed
        };
        let mut rng = SplitMix64::new(seed);
        let elements: Vec<u64> = (1..=n).filter(|_| rng.next_f64() < density).collect();
        IntegerSet::new(n, elements).map_err(|e| e.to_string())
    } else if spec == "greedy" || spec.starts_with("greedy:") {
        let poly = match spec.strip_prefix("greedy:") {
            Some(rest) if !rest.is_empty() => rest.parse::<QuadraticPoly>()?,
            _ => *default_poly,
        };
        greedy_difference_free(&poly, n).map_err(|e| e.to_string())
    } else if let Some(rest) = spec.strip_prefix("list:") {
        let elements: Result<Vec<u64>, _> = rest
            .split(',')
            .map(|p| p.trim().parse::<u64>())
            .collect();
        let elements = elements.map_err(|e| format!("bad list element: {e}"))?;
        IntegerSet::new(n, elements).map_err(|e| e.to_string())
    } else {
        // Treat as a file of whitespace-separated elements.
        let text = std::fs::read_to_string(spec)
            .map_err(|e| format!("cannot read set file {spec:?}: {e}"))?;
        let elements: Result<Vec<u64>, _> =
            text.split_whitespace().map(|p| p.parse::<u64>()).collect();
        let elements = elements.map_err(|e| format!("bad element in {spec:?}: {e}"))?;
        IntegerSet::new(n, elements).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> QuadraticPoly {
        "1,0,0".parse().unwrap()
    }

    #[test]
    fn progression_spec() {
        let s = parse_set_spec("progression:0,4,10", 64, &sq(), 1).unwrap();
        assert_eq!(s.elements(), &[4, 8, 12, 16, 20, 24, 28, 32, 36, 40]);
    }

    #[test]
    fn random_spec_is_seed_stable() {
        let a = parse_set_spec("random:0.3,99", 100, &sq(), 1).unwrap();
        let b = parse_set_spec("random:0.3", 100, &sq(), 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn greedy_spec() {
        let s = parse_set_spec("greedy", 10, &sq(), 1).unwrap();
        assert_eq!(s.elements(), &[1, 3, 6, 8]);
        let t = parse_set_spec("greedy:1,0,0", 10, &"1,1,0".parse().unwrap(), 1).unwrap();
        assert_eq!(t.elements(), &[1, 3, 6, 8]);
    }

    #[test]
    fn list_and_errors() {
        let s = parse_set_spec("list:5,2,9", 10, &sq(), 1).unwrap();
        assert_eq!(s.elements(), &[2, 5, 9]);
        assert!(parse_set_spec("list:0", 10, &sq(), 1).is_err());
        assert!(parse_set_spec("progression:1,2", 10, &sq(), 1).is_err());
        assert!(parse_set_spec("/nonexistent/path", 10, &sq(), 1).is_err());
    }
}
