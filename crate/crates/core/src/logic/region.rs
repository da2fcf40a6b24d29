use crate::dsl::{BinOp, Expr};
use crate::value::{Domain, Type, Valuation, Value};

use super::{Env, Formula};

/// An inclusive range of ordinals.
pub type Interval = (i64, i64);

/// A set of points over declared variables, kept in a canonical union of
/// disjoint boxes.
///
/// The canonical form splits on the first variable into maximal runs of
/// values whose remaining slices are identical, then recurses. Two regions
/// over the same variables are equal as sets iff they are equal as values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Region {
    vars: Vec<(String, Domain)>,
    boxes: Vec<Vec<Interval>>,
}

impl Region {
    pub fn empty(env: &Env) -> Region {
        Region {
            vars: env.iter().map(|(n, d)| (n.to_string(), d)).collect(),
            boxes: Vec::new(),
        }
    }

    /// Builds the region from a membership bitmap laid out in lexicographic
    /// order over `env` (first variable most significant).
    pub fn from_bitmap(env: &Env, bits: &[bool]) -> Region {
        let dims: Vec<Interval> = env.iter().map(|(_, d)| d.bounds()).collect();
        debug_assert_eq!(bits.len() as u64, env.product_size());
        Region {
            vars: env.iter().map(|(n, d)| (n.to_string(), d)).collect(),
            boxes: build(bits, &dims),
        }
    }

    /// Builds the region holding exactly the given points (ordinal tuples).
    pub fn from_points<'a>(env: &Env, points: impl IntoIterator<Item = &'a [i64]>) -> Region {
        let mut bits = vec![false; env.product_size() as usize];
        for p in points {
            bits[env.index_of(p) as usize] = true;
        }
        Region::from_bitmap(env, &bits)
    }

    /// The single box `b`, one interval per variable of `env`.
    pub fn from_box(env: &Env, b: Vec<Interval>) -> Region {
        debug_assert_eq!(b.len(), env.len());
        let mut r = Region::empty(env);
        if b.iter().all(|&(lo, hi)| lo <= hi) {
            r.boxes.push(b);
        }
        r
    }

    pub fn vars(&self) -> impl Iterator<Item = (&str, Domain)> {
        self.vars.iter().map(|(n, d)| (n.as_str(), *d))
    }

    pub fn env(&self) -> Env {
        Env::from_pairs(self.vars.iter().cloned())
    }

    pub fn boxes(&self) -> &[Vec<Interval>] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn contains(&self, point: &[i64]) -> bool {
        self.boxes
            .iter()
            .any(|b| b.iter().zip(point).all(|(&(lo, hi), &x)| lo <= x && x <= hi))
    }

    /// Membership of a valuation that binds (at least) the region's
    /// variables.
    pub fn contains_valuation(&self, v: &Valuation) -> bool {
        let point: Option<Vec<i64>> = self.vars.iter().map(|(n, _)| v.get(n).map(Value::ordinal)).collect();
        point.is_some_and(|p| self.contains(&p))
    }

    pub fn count(&self) -> u64 {
        self.boxes
            .iter()
            .map(|b| b.iter().map(|&(lo, hi)| (hi - lo + 1) as u64).product::<u64>())
            .sum()
    }

    /// Lexicographically smallest point.
    pub fn min_point(&self) -> Option<Vec<i64>> {
        // boxes are emitted in lexicographic order of their lower corners
        self.boxes.first().map(|b| b.iter().map(|&(lo, _)| lo).collect())
    }

    /// All points in lexicographic order.
    pub fn points(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for b in &self.boxes {
            let mut cur: Vec<i64> = b.iter().map(|&(lo, _)| lo).collect();
            if b.is_empty() {
                out.push(cur);
                continue;
            }
            'odo: loop {
                out.push(cur.clone());
                for k in (0..b.len()).rev() {
                    if cur[k] < b[k].1 {
                        cur[k] += 1;
                        continue 'odo;
                    }
                    cur[k] = b[k].0;
                }
                break;
            }
        }
        out.sort();
        out
    }

    pub fn valuation_of(&self, point: &[i64]) -> Valuation {
        self.vars
            .iter()
            .zip(point)
            .map(|((n, d), &o)| (n.clone(), Value::from_ordinal(d.ty(), o)))
            .collect()
    }

    /// The region as a quantifier-free formula in interval form.
    ///
    /// Integer intervals print as `lo <= x && x <= hi` (or `x == v` for a
    /// single value), leaving out a bound that coincides with the domain's;
    /// a boolean restricted to one value prints as `x` or `!x`, and a
    /// variable left unconstrained is omitted.
    pub fn to_formula(&self) -> Formula {
        let mut disjuncts: Vec<Formula> = self
            .boxes
            .iter()
            .map(|b| {
                let mut atoms: Vec<Formula> = Vec::new();
                for ((name, dom), &(lo, hi)) in self.vars.iter().zip(b) {
                    let x = Expr::var(name.clone());
                    match dom.ty() {
                        Type::Bool if lo == 0 && hi == 1 => {}
                        Type::Bool if lo == 1 => atoms.push(Formula::Atom(x)),
                        Type::Bool => atoms.push(Formula::Atom(Expr::not(x))),
                        Type::Int if lo == hi => atoms.push(Formula::Atom(Expr::binary(BinOp::Eq, x, Expr::Int(lo)))),
                        Type::Int => {
                            let (dlo, dhi) = dom.bounds();
                            if lo > dlo {
                                atoms.push(Formula::Atom(Expr::binary(BinOp::Le, Expr::Int(lo), x.clone())));
                            }
                            if hi < dhi {
                                atoms.push(Formula::Atom(Expr::binary(BinOp::Le, x, Expr::Int(hi))));
                            }
                        }
                    }
                }
                match atoms.len() {
                    0 => Formula::Const(true),
                    1 => atoms.pop().expect("one atom"),
                    _ => Formula::And(atoms),
                }
            })
            .collect();
        match disjuncts.len() {
            0 => Formula::Const(false),
            1 => disjuncts.pop().expect("one box"),
            _ => Formula::Or(disjuncts),
        }
    }
}

fn build(bits: &[bool], dims: &[Interval]) -> Vec<Vec<Interval>> {
    let Some((&(lo, hi), rest)) = dims.split_first() else {
        return if bits[0] { vec![Vec::new()] } else { Vec::new() };
    };
    let n = (hi - lo + 1) as usize;
    let stride = bits.len() / n;
    let mut out = Vec::new();
    let mut run: Option<(i64, i64, Vec<Vec<Interval>>)> = None;
    let flush = |run: Option<(i64, i64, Vec<Vec<Interval>>)>, out: &mut Vec<Vec<Interval>>| {
        if let Some((s, e, sub)) = run {
            for b in sub {
                let mut full = Vec::with_capacity(b.len() + 1);
                full.push((s, e));
                full.extend(b);
                out.push(full);
            }
        }
    };
    for k in 0..n {
        let slice = &bits[k * stride..(k + 1) * stride];
        let sub = if slice.iter().any(|&b| b) { build(slice, rest) } else { Vec::new() };
        let v = lo + k as i64;
        match &mut run {
            Some((_, end, cur)) if !sub.is_empty() && *cur == sub => *end = v,
            _ => {
                flush(run.take(), &mut out);
                if !sub.is_empty() {
                    run = Some((v, v, sub));
                }
            }
        }
    }
    flush(run, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable_intervals() {
        let env = Env::new().with("x", Domain::int(0, 9));
        let bits: Vec<bool> = (0..10).map(|x| x <= 2 || x == 5 || x >= 8).collect();
        let r = Region::from_bitmap(&env, &bits);
        assert_eq!(r.boxes(), &[vec![(0, 2)], vec![(5, 5)], vec![(8, 9)]]);
        assert_eq!(r.to_formula().to_string(), "x <= 2 || x == 5 || 8 <= x");
        assert_eq!(r.count(), 6);
        assert_eq!(r.min_point(), Some(vec![0]));
    }

    #[test]
    fn boxes_merge_identical_slices() {
        let env = Env::new().with("a", Domain::int(0, 3)).with("b", Domain::Bool);
        // b is free for a in {0,1}; only b=true for a=3
        let bits = vec![true, true, true, true, false, false, false, true];
        let r = Region::from_bitmap(&env, &bits);
        assert_eq!(r.boxes(), &[vec![(0, 1), (0, 1)], vec![(3, 3), (1, 1)]]);
        assert_eq!(r.to_formula().to_string(), "a <= 1 || a == 3 && b");
        let pts = r.points();
        assert_eq!(pts.len(), 5);
        assert!(r.contains(&[3, 1]) && !r.contains(&[3, 0]) && !r.contains(&[2, 1]));
    }

    #[test]
    fn empty_and_full() {
        let env = Env::new().with("b", Domain::Bool);
        assert_eq!(Region::from_bitmap(&env, &[false, false]).to_formula(), Formula::Const(false));
        assert_eq!(Region::from_bitmap(&env, &[true, true]).to_formula(), Formula::Const(true));
    }
}
