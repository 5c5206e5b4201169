//! Random interval expression trees checked against a 128-bit reference.
//!
//! Each leaf is an interval together with one member; the reference evaluates
//! the same tree on the members, and every node's interval must contain the
//! node's reference value.

use astro_float::{BigFloat, Consts, RoundingMode};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use t3_core::interval::{ratio, IntervalValue as I};

const PREC: usize = 128;
const RM: RoundingMode = RoundingMode::ToEven;
/// Relative accuracy credited to the reference itself.
const REF_TOL_EXP: i32 = -100;

struct Node {
    iv: I,
    reference: BigFloat,
}

struct Ctx {
    rng: ChaCha8Rng,
    consts: Consts,
    checks: u64,
    violations: Vec<String>,
}

fn bf(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PREC)
}

fn inside(ctx: &mut Ctx, n: &Node, what: &str) {
    ctx.checks += 1;
    let r = &n.reference;
    let tol = r.abs().mul(&bf(2f64.powi(REF_TOL_EXP)), PREC, RM);
    let below = r.add(&tol, PREC, RM) < bf(n.iv.lo());
    let above = r.sub(&tol, PREC, RM) > bf(n.iv.hi());
    if below || above || r.is_nan() {
        ctx.violations.push(format!("{what}: {:?} excludes {r}", n.iv));
    }
}

fn leaf(ctx: &mut Ctx) -> Node {
    let rng = &mut ctx.rng;
    match rng.gen_range(0..4) {
        0 => {
            let x = rng.gen_range(-10.0..10.0);
            Node { iv: I::point(x), reference: bf(x) }
        }
        1 => {
            let lo: f64 = 10f64.powf(rng.gen_range(-3.0..3.0)) * if rng.gen_bool(0.3) { -1.0 } else { 1.0 };
            let hi = lo + lo.abs() * rng.gen_range(0.0..0.5);
            let x = lo + (hi - lo) * rng.gen_range(0.0..=1.0);
            Node { iv: I::new(lo, hi).expect("ordered"), reference: bf(x.clamp(lo, hi)) }
        }
        2 => {
            let n = rng.gen_range(-50..=50);
            Node { iv: I::from_integer(n), reference: bf(n as f64) }
        }
        _ => {
            let (n, d) = (rng.gen_range(-40i64..=40), rng.gen_range(1i64..=40));
            let exact = bf(n as f64).div(&bf(d as f64), PREC, RM);
            Node { iv: I::from_ratio(ratio(n, d)), reference: exact }
        }
    }
}

/// x^(p/q) as the q-th root of x^p. Built from correctly rounded primitives so that
/// exact powers stay exact; the general `pow` escalates precision without bound on them.
fn rational_power(x: &BigFloat, p: i64, q: i64, consts: &mut Consts) -> BigFloat {
    let mut r = bf(1.0);
    for _ in 0..p.abs() {
        r = r.mul(x, PREC, RM);
    }
    if p < 0 {
        r = bf(1.0).div(&r, PREC, RM);
    }
    match q {
        1 => r,
        2 => r.sqrt(PREC, RM),
        3 => r.cbrt(PREC, RM),
        4 => r.sqrt(PREC, RM).sqrt(PREC, RM),
        _ => r.pow(&bf(1.0).div(&bf(q as f64), PREC, RM), PREC, RM, consts),
    }
}

fn tree(ctx: &mut Ctx, depth: u32) -> Node {
    if depth == 0 || ctx.rng.gen_bool(0.25) {
        let n = leaf(ctx);
        inside(ctx, &n, "leaf");
        return n;
    }
    let a = tree(ctx, depth - 1);
    let op = ctx.rng.gen_range(0..100);
    let node = if op < 10 && a.iv.lo() >= 0.0 {
        let iv = a.iv.sqrt().expect("non-negative");
        Node { iv, reference: a.reference.sqrt(PREC, RM) }
    } else if op < 14 && a.iv.lo() > 0.0 && a.iv.hi() < 1e6 {
        let (p, q) = loop {
            let p = ctx.rng.gen_range(-3i64..=3);
            if p != 0 {
                break (p, ctx.rng.gen_range(1i64..=4));
            }
        };
        let iv = a.iv.pow_ratio(ratio(p, q)).expect("positive base");
        Node { iv, reference: rational_power(&a.reference, p, q, &mut ctx.consts) }
    } else if op < 20 {
        Node { iv: a.iv.square(), reference: a.reference.mul(&a.reference, PREC, RM) }
    } else {
        let b = tree(ctx, depth - 1);
        match op % 5 {
            0 => Node { iv: a.iv + b.iv, reference: a.reference.add(&b.reference, PREC, RM) },
            1 => Node { iv: a.iv - b.iv, reference: a.reference.sub(&b.reference, PREC, RM) },
            2 if !b.iv.contains_zero() => {
                let iv = a.iv.try_div(b.iv).expect("divisor excludes zero");
                Node { iv, reference: a.reference.div(&b.reference, PREC, RM) }
            }
            3 => {
                let reference = if a.reference >= b.reference { a.reference.clone() } else { b.reference.clone() };
                Node { iv: a.iv.max(b.iv), reference }
            }
            _ => Node { iv: a.iv * b.iv, reference: a.reference.mul(&b.reference, PREC, RM) },
        }
    };
    inside(ctx, &node, "node");
    node
}

pub struct FuzzReport {
    pub trees: u64,
    pub checks: u64,
    pub violations: Vec<String>,
}

/// Evaluates `trees` random trees of depth at most 4, split into seeded chunks.
pub fn run(seed: u64, trees: u64) -> FuzzReport {
    const CHUNK: u64 = 10_000;
    let chunks = trees.div_ceil(CHUNK);
    let parts: Vec<(u64, Vec<String>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut ctx = Ctx { rng, consts: Consts::new().expect("constant cache"), checks: 0, violations: Vec::new() };
            for _ in 0..CHUNK.min(trees - c * CHUNK) {
                tree(&mut ctx, 4);
            }
            (ctx.checks, ctx.violations)
        })
        .collect();
    let checks = parts.iter().map(|p| p.0).sum();
    let violations = parts.into_iter().flat_map(|p| p.1).collect();
    FuzzReport { trees, checks, violations }
}
