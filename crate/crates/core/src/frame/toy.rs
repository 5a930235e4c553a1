//! Small frames with declared parameter tables.

use std::sync::Arc;

use crate::exactnum::{BigNat, Rational};
use crate::interval::IndexInterval;
use crate::sacks::maxwidth;
use crate::subatoms::{CountingFamily, NmFamily};

use super::{Frame, FrameError, FrameLevel, FrameMode, TypeFamilies};

/// Declared parameters of one toy level. Unset fields follow the construction.
#[derive(Debug, Clone)]
pub struct ToyLevel {
    pub sacks_len: u32,
    pub j_count: u32,
    pub big_b: u64,
    /// `B(u)` at the subatomic sublevels, feeding the recursion for `b(u)`.
    pub sub_big_b: u64,
    pub sacks_arity: Option<u64>,
    pub mu_param: Option<u64>,
    pub maxposs_below: Option<BigNat>,
    pub families: TypeFamilies,
}

impl Frame {
    /// Builds a toy frame, deriving stacked Sacks intervals, `b(u)` and any
    /// undeclared `maxposs(<level)` from the construction's recursions.
    pub fn toy(levels: Vec<ToyLevel>) -> Result<Frame, FrameError> {
        let mut out: Vec<FrameLevel> = Vec::with_capacity(levels.len());
        let mut start = 0u64;
        let mut prev_b: Option<BigNat> = None;
        for (l, t) in levels.into_iter().enumerate() {
            let l = l as u64;
            let maxposs_below = match t.maxposs_below {
                Some(m) => m,
                None if l == 0 => BigNat::from(1u32),
                None => {
                    let prev = out.last().expect("earlier level");
                    let shift = prev.sacks.len as u64 * maxwidth(l - 1);
                    let step = num_traits::pow(prev.families.max_poss(), maxwidth(l) as usize);
                    (&prev.maxposs_below << shift as usize) * num_traits::pow(step, prev.j_count as usize)
                }
            };
            let mut sub_b = Vec::with_capacity(t.j_count as usize);
            for _ in 0..t.j_count {
                let big = BigNat::from(t.sub_big_b);
                let b = match &prev_b {
                    None => big,
                    Some(p) => big * (p + 1u32) + 1u32,
                };
                prev_b = Some(b.clone());
                sub_b.push(b);
            }
            out.push(FrameLevel {
                sacks: IndexInterval::new(start, t.sacks_len),
                j_count: t.j_count,
                big_b: t.big_b,
                sacks_arity: t.sacks_arity.unwrap_or(maxwidth(l)),
                mu_param: t.mu_param.unwrap_or(maxwidth(l)),
                maxposs_below,
                sub_b,
                families: t.families,
            });
            start += t.sacks_len as u64;
        }
        Frame::new(out, FrameMode::Toy)
    }
}

/// Shape of a uniform toy frame.
#[derive(Debug, Clone)]
pub struct ToyConfig {
    pub height: u64,
    pub sacks_len: u32,
    pub j_count: u32,
    pub big_b: u64,
    pub sub_big_b: u64,
    pub sacks_arity: u64,
    pub mu_param: u64,
    /// Declared `maxposs(<level)` for every level; `None` follows the recursion.
    pub maxposs: Option<u64>,
    /// `|I|` and `b` of the lim-inf family.
    pub nm_len: u32,
    pub nm_b: u64,
    /// POSS size, log base and divisor of the counting norm used at lim-sup indices.
    pub ls_poss: u64,
    pub ls_base: u64,
    pub ls_divisor: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        ToyConfig {
            height: 6,
            sacks_len: 2,
            j_count: 9,
            big_b: 2,
            sub_big_b: 2,
            sacks_arity: 1,
            mu_param: 1,
            maxposs: Some(2),
            nm_len: 3,
            nm_b: 2,
            ls_poss: 8,
            ls_base: 2,
            ls_divisor: 1,
        }
    }
}

/// A frame with the same parameters at every level.
pub fn uniform_frame(cfg: &ToyConfig) -> Result<Frame, FrameError> {
    let nm = NmFamily::unchecked(IndexInterval::new(0, cfg.nm_len), cfg.nm_b)?;
    let ls = CountingFamily::new(cfg.ls_poss, cfg.ls_base, Rational::from_integer(cfg.ls_divisor.into()))?;
    let families = TypeFamilies { nm: Arc::new(nm), nn: Arc::new(ls.clone()), cn: Arc::new(ls) };
    let levels = (0..cfg.height)
        .map(|_| ToyLevel {
            sacks_len: cfg.sacks_len,
            j_count: cfg.j_count,
            big_b: cfg.big_b,
            sub_big_b: cfg.sub_big_b,
            sacks_arity: Some(cfg.sacks_arity),
            mu_param: Some(cfg.mu_param),
            maxposs_below: cfg.maxposs.map(BigNat::from),
            families: families.clone(),
        })
        .collect();
    Frame::toy(levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Sublevel;

    #[test]
    fn uniform_frame_shape() {
        let f = uniform_frame(&ToyConfig::default()).unwrap();
        assert_eq!(f.height(), 6);
        assert_eq!(f.sacks_interval(1, 3).unwrap(), IndexInterval::new(2, 4));
        assert_eq!(f.small_b(Sublevel::subatomic(0, 0)).unwrap(), BigNat::from(2u32));
        assert_eq!(f.small_b(Sublevel::subatomic(0, 1)).unwrap(), BigNat::from(7u32));
        let reqs = f.requirements().unwrap();
        assert!(reqs.iter().any(|r| r.name == "b strictly increasing" && r.holds));
    }

    #[test]
    fn recursion_maxposs() {
        let cfg = ToyConfig { maxposs: None, height: 2, j_count: 1, ..ToyConfig::default() };
        let f = uniform_frame(&cfg).unwrap();
        // level 0: 1 * 2^(2*0) * 8^1
        assert_eq!(f.level(1).unwrap().maxposs_below, BigNat::from(8u32));
        assert!(f.requirements().unwrap().iter().filter(|r| r.name == "maxposs follows the recursion").all(|r| r.holds));
    }
}
