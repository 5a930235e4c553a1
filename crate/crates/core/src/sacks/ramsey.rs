//! Homogenization of colorings of products of Sacks columns.

use std::collections::BTreeSet;


use super::{embed_binary_tree, SacksColumn, SacksError};
use crate::exactnum::{BigNat, SizeDescriptor, DEFAULT_BIT_BUDGET};

/// Largest abstract cube dimension the homogenizer will enumerate.
const MAX_CUBE_DIM: u64 = 26;
/// Largest number of color evaluations per coded point at `j >= 2`.
const MAX_TUPLES: u64 = 1 << 16;

/// `f(1, n, c) = n c`, `f(j+1, n, c) = n c^(2^(j f(j, n, c)))`.
pub fn ramsey_f(j: u64, n: &BigNat, c: &BigNat) -> SizeDescriptor {
    assert!(j >= 1, "f is defined for j >= 1");
    let mut f = SizeDescriptor::exact(n * c);
    for i in 1..j {
        let exp = SizeDescriptor::pow2(&f.mul_nat(&BigNat::from(i)), DEFAULT_BIT_BUDGET);
        f = SizeDescriptor::power(c, &exp, n, DEFAULT_BIT_BUDGET);
    }
    f
}

fn ramsey_f_u64(j: u64, n: u64, c: u64) -> Option<u64> {
    ramsey_f(j, &BigNat::from(n), &BigNat::from(c)).to_u64()
}

/// Homogenizes a coloring of `(2^D)^j` for `D = f(j, n, c)`.
///
/// Points of the abstract cube are codes whose bit `i` is the choice at
/// level `i`. Returns per-coordinate sets of splitting size `n` on which the
/// coloring is constant, with that color.
pub fn homogenize_cube<F>(j: usize, n: u64, c: u64, color: &F) -> Result<(Vec<Vec<u64>>, u64), SacksError>
where
    F: Fn(&[u64]) -> u64 + Sync,
{
    if j == 0 || n == 0 || c == 0 {
        return Err(SacksError::Precondition("need j, n, c >= 1".into()));
    }
    let dim = ramsey_f_u64(j as u64, n, c)
        .filter(|&d| d <= MAX_CUBE_DIM)
        .ok_or_else(|| SacksError::Budget(format!("f({j}, {n}, {c}) exceeds dimension {MAX_CUBE_DIM}")))?;
    let sets = homogenize_rec(j, n, c, dim as u32, color)?;
    let probe: Vec<u64> = sets.iter().map(|s| s[0]).collect();
    let hue = color(&probe);
    Ok((sets, hue))
}

type Coloring<'a> = dyn Fn(&[u64]) -> u64 + Sync + 'a;

fn homogenize_rec(j: usize, n: u64, c: u64, dim: u32, color: &Coloring<'_>) -> Result<Vec<Vec<u64>>, SacksError> {
    if j == 1 {
        let colors: Vec<u64> = (0..c).collect();
        return Ok(vec![homogenize_one(n as u32, &colors, 0, 0, dim, &|x| color(&[x]))]);
    }
    let p = ramsey_f_u64(j as u64 - 1, n, c).expect("smaller than dim") as u32;
    let tuple_bits = (j as u64 - 1) * p as u64;
    if tuple_bits >= 64 || 1u64 << tuple_bits > MAX_TUPLES {
        return Err(SacksError::Budget(format!("2^{tuple_bits} tuples per point")));
    }
    let tuples = 1u64 << tuple_bits;
    let radix = c as u128;
    // the color of the last coordinate is the whole induced coloring on T^(j-1)
    let code_of = |last: u64| -> u128 {
        let mut code: u128 = 0;
        let mut buf = vec![0u64; j];
        buf[j - 1] = last;
        for t in (0..tuples).rev() {
            for (i, slot) in buf.iter_mut().take(j - 1).enumerate() {
                *slot = t >> (i as u32 * p) & ((1u64 << p) - 1);
            }
            code = code * radix + color(&buf) as u128;
        }
        code
    };
    let codes: Vec<u128> = crate::par::map_range(1u64 << dim, |x| code_of(x));
    let present: Vec<u128> = codes.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let index = |x: u64| present.binary_search(&codes[x as usize]).expect("present") as u64;
    let colors: Vec<u64> = (0..present.len() as u64).collect();
    let last = homogenize_one(n as u32, &colors, 0, 0, dim, &index);
    let fixed = last[0];
    let restricted = |pts: &[u64]| -> u64 {
        let mut buf = pts.to_vec();
        buf.push(fixed);
        color(&buf)
    };
    let mut sets = homogenize_rec(j - 1, n, c, p, &restricted)?;
    sets.push(last);
    Ok(sets)
}

/// The single-coordinate case, by induction on the set of colors still in play.
fn homogenize_one(n: u32, colors: &[u64], start: u32, prefix: u64, dim: u32, color: &(dyn Fn(u64) -> u64 + Sync)) -> Vec<u64> {
    let cone = |eta: u64| prefix | eta << start;
    if colors.len() <= 1 {
        return (0..1u64 << n).map(cone).collect();
    }
    let inner = start + n;
    let free = dim - inner;
    let mut picks = Vec::with_capacity(1 << n);
    for eta in 0..1u64 << n {
        let base = cone(eta);
        let seen: BTreeSet<u64> = crate::par::map_range(1u64 << free, |x| color(base | x << inner))
            .into_iter()
            .collect();
        if seen.len() < colors.len() {
            let sub: Vec<u64> = seen.into_iter().collect();
            return homogenize_one(n, &sub, inner, base, dim, color);
        }
        let x = crate::par::find_first(1u64 << free, |x| color(base | x << inner) == colors[0])
            .expect("every color of the set occurs in this cone");
        picks.push(base | x << inner);
    }
    picks
}

/// Shrinks each column so that `coloring` is constant on their product and
/// every column keeps splitting size at least `n`.
///
/// Each column needs splitting size at least `f(j, n, c)` where `j` is the
/// number of columns.
pub fn homogenize_columns<F>(columns: &[SacksColumn], n: u64, c: u64, coloring: &F) -> Result<(Vec<SacksColumn>, u64), SacksError>
where
    F: Fn(&[u64]) -> u64 + Sync,
{
    let j = columns.len();
    if j == 0 {
        return Err(SacksError::Precondition("no columns".into()));
    }
    let dim = ramsey_f_u64(j as u64, n, c)
        .filter(|&d| d <= MAX_CUBE_DIM)
        .ok_or_else(|| SacksError::Budget("cube dimension too large".into()))?;
    for col in columns {
        if (col.splitting_size() as u64) < dim {
            return Err(SacksError::Precondition(format!(
                "column splitting size {} is below f = {dim}",
                col.splitting_size()
            )));
        }
    }
    let maps: Vec<Vec<u64>> = columns
        .iter()
        .map(|col| embed_binary_tree(col.branches(), col.interval().len, dim as u32))
        .collect();
    let abstract_color = |pts: &[u64]| -> u64 {
        let real: Vec<u64> = pts.iter().zip(&maps).map(|(&a, m)| m[a as usize]).collect();
        coloring(&real)
    };
    let (sets, hue) = homogenize_cube(j, n, c, &abstract_color)?;
    let out = sets
        .iter()
        .zip(columns)
        .zip(&maps)
        .map(|((set, col), m)| SacksColumn::new(col.interval(), set.iter().map(|&a| m[a as usize])))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((out, hue))
}

/// Whether `coloring` takes the single value `hue` on the product of `columns`.
pub fn is_constant_on<F>(columns: &[SacksColumn], hue: u64, coloring: &F) -> bool
where
    F: Fn(&[u64]) -> u64,
{
    let sizes: Vec<usize> = columns.iter().map(|c| c.len()).collect();
    let total: usize = sizes.iter().product();
    let mut buf = vec![0u64; columns.len()];
    (0..total).all(|mut idx| {
        for (i, col) in columns.iter().enumerate() {
            buf[i] = col.branches()[idx % sizes[i]];
            idx /= sizes[i];
        }
        coloring(&buf) == hue
    })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::IndexInterval;

    #[test]
    fn ramsey_f_values() {
        let b = |x: u64| BigNat::from(x);
        assert_eq!(ramsey_f(1, &b(2), &b(3)).to_u64(), Some(6));
        // f(2, 1, 2) = 1 * 2^(2^2) = 16
        assert_eq!(ramsey_f(2, &b(1), &b(2)).to_u64(), Some(16));
        assert!(ramsey_f(3, &b(2), &b(2)).is_tower());
    }

    #[test]
    fn one_column_parity_coloring() {
        let col = SacksColumn::full(IndexInterval::new(0, 4)).unwrap();
        let parity = |x: &[u64]| (x[0].count_ones() % 2) as u64;
        let (out, hue) = homogenize_columns(&[col], 2, 2, &parity).unwrap();
        assert!(out[0].splitting_size() >= 2);
        assert!(is_constant_on(&out, hue, &parity));
    }

    #[test]
    fn two_columns() {
        let a = SacksColumn::full(IndexInterval::new(0, 16)).unwrap();
        let b = SacksColumn::full(IndexInterval::new(16, 16)).unwrap();
        let col = |x: &[u64]| ((x[0] ^ x[1]).count_ones() % 2) as u64;
        let (out, hue) = homogenize_columns(&[a, b], 1, 2, &col).unwrap();
        assert!(out.iter().all(|c| c.splitting_size() >= 1));
        assert!(is_constant_on(&out, hue, &col));
    }
}
