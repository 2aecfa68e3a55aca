use crate::error::{Error, Result};

/// Ordered decomposition of `{1, …, N}` into consecutive intervals.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Composition {
    pub n: usize,
    /// Interval sizes, left to right.
    pub parts: Vec<usize>,
}

impl Composition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Blocks as 1-based inclusive index lists.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut start = 1;
        self.parts
            .iter()
            .map(|&p| {
                let b: Vec<usize> = (start..start + p).collect();
                start += p;
                b
            })
            .collect()
    }
}

/// All `2^{N−1}` compositions of `N`, ordered by number of blocks then
/// lexicographically; `max_part` drops blocks longer than the bound.
pub fn enumerate_compositions(n: usize, max_part: Option<usize>) -> Result<Vec<Composition>> {
    if n == 0 {
        return Err(Error::InvalidInput("compositions need N >= 1".into()));
    }
    let cap = max_part.unwrap_or(n);
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
    while let Some((used, parts)) = stack.pop() {
        if used == n {
            out.push(Composition { n, parts });
            continue;
        }
        for p in 1..=cap.min(n - used) {
            let mut next = parts.clone();
            next.push(p);
            stack.push((used + p, next));
        }
    }
    out.sort_by(|a, b| a.parts.len().cmp(&b.parts.len()).then_with(|| b.parts.cmp(&a.parts)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        let c1 = enumerate_compositions(1, None).unwrap();
        assert_eq!(c1.len(), 1);
        assert_eq!(c1[0].blocks(), vec![vec![1]]);
        let c2 = enumerate_compositions(2, None).unwrap();
        assert_eq!(c2.iter().map(|c| c.parts.clone()).collect::<Vec<_>>(), vec![vec![2], vec![1, 1]]);
        let c3 = enumerate_compositions(3, Some(2)).unwrap();
        let parts: Vec<Vec<usize>> = c3.iter().map(|c| c.parts.clone()).collect();
        assert_eq!(parts, vec![vec![2, 1], vec![1, 2], vec![1, 1, 1]]);
        assert!(enumerate_compositions(0, None).is_err());
    }

    #[test]
    fn counts() {
        let mut fib = vec![1u64, 1];
        for i in 2..20 {
            fib.push(fib[i - 1] + fib[i - 2]);
        }
        for n in 1..=12 {
            assert_eq!(enumerate_compositions(n, None).unwrap().len(), 1 << (n - 1));
            // Fibonacci(N+1) with F(1) = F(2) = 1
            assert_eq!(enumerate_compositions(n, Some(2)).unwrap().len() as u64, fib[n]);
        }
    }
}
