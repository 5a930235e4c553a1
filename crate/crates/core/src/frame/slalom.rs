//! Coding `g`-bounded sequences as binary sequences with exactly one 1 in
//! each block `[G(n-1), G(n))`, where `G(n) = n + 1 + sum_{k<=n} g(k)`.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SlalomError {
    #[error("f({n}) = {value} exceeds the bound {bound}")]
    Unbounded { n: usize, value: u64, bound: u64 },
    #[error("f has {f} entries but g has {g}")]
    Length { f: usize, g: usize },
    #[error("block {0} does not contain exactly one 1")]
    Block(usize),
    #[error("bit string has length {got}, expected {expected}")]
    BitLength { got: usize, expected: u64 },
}

/// `G(0), G(1), ...` for the bound `g`.
pub fn slalom_block_ends(g: &[u64]) -> Vec<u64> {
    g.iter()
        .scan(0u64, |end, &gk| {
            *end += gk + 1;
            Some(*end)
        })
        .collect()
}

pub fn slalom_encode(f: &[u64], g: &[u64]) -> Result<Vec<bool>, SlalomError> {
    if f.len() != g.len() {
        return Err(SlalomError::Length { f: f.len(), g: g.len() });
    }
    let mut r = Vec::with_capacity(slalom_block_ends(g).last().copied().unwrap_or(0) as usize);
    for (n, (&v, &bound)) in f.iter().zip(g).enumerate() {
        if v > bound {
            return Err(SlalomError::Unbounded { n, value: v, bound });
        }
        r.extend((0..=bound).map(|m| m == v));
    }
    Ok(r)
}

pub fn slalom_decode(r: &[bool], g: &[u64]) -> Result<Vec<u64>, SlalomError> {
    let expected = slalom_block_ends(g).last().copied().unwrap_or(0);
    if r.len() as u64 != expected {
        return Err(SlalomError::BitLength { got: r.len(), expected });
    }
    let mut start = 0usize;
    let mut f = Vec::with_capacity(g.len());
    for (n, &bound) in g.iter().enumerate() {
        let block = &r[start..start + bound as usize + 1];
        let mut ones = block.iter().enumerate().filter(|(_, &b)| b).map(|(m, _)| m as u64);
        match (ones.next(), ones.next()) {
            (Some(m), None) => f.push(m),
            _ => return Err(SlalomError::Block(n)),
        }
        start += bound as usize + 1;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let r = slalom_encode(&[1, 0], &[1, 1]).unwrap();
        assert_eq!(r, vec![false, true, true, false]);
        assert_eq!(slalom_decode(&r, &[1, 1]).unwrap(), vec![1, 0]);
        assert_eq!(slalom_block_ends(&[2, 0, 3]), vec![3, 4, 8]);
        let zeros = slalom_encode(&[0, 0, 0], &[2, 0, 3]).unwrap();
        let ones: Vec<usize> = zeros.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        assert_eq!(ones, vec![0, 3, 4]);
        assert!(matches!(slalom_encode(&[2], &[1]), Err(SlalomError::Unbounded { .. })));
        assert_eq!(slalom_decode(&[true, true], &[1]), Err(SlalomError::Block(0)));
    }
}
