//! Named constants evaluated as a dependency DAG.

mod delta;
mod export;
pub mod formulas;

use std::collections::{HashMap, HashSet};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interval::{ratio, IntervalValue as I};
use formulas as f;

pub use delta::{max_admissible_delta, Criterion, DeltaStar};
pub use export::{LedgerRow, DEFAULT_EXPORT_DELTAS};
pub use formulas::{ChristoffelBound, InverseBound, OmegaReading};

/// Switches between the carried variants of the δ-parametric chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerConfig {
    pub inverse: InverseBound,
    pub christoffel: ChristoffelBound,
}

/// A literal quoted alongside a computed constant.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Annotation {
    pub label: &'static str,
    pub value: f64,
}

type EvalFn = fn(&Ledger, f64) -> Result<I>;

#[derive(Clone)]
pub struct ConstantNode {
    pub name: &'static str,
    pub formula: &'static str,
    pub deps: &'static [&'static str],
    pub delta_parametric: bool,
    pub citation: &'static str,
    pub annotations: &'static [Annotation],
    eval: EvalFn,
}

/// Annotations within this relative distance of the computed value count as
/// rounded statements of it rather than discrepancies.
pub const ANNOTATION_REL_TOL: f64 = 1e-2;

impl ConstantNode {
    /// True when some quoted literal disagrees with the computed enclosure.
    pub fn discrepancy(&self, value: &I) -> bool {
        self.annotations.iter().any(|a| !annotation_consistent(a.value, value))
    }
}

pub fn annotation_consistent(literal: f64, value: &I) -> bool {
    let lo = value.lo() * (1.0 - ANNOTATION_REL_TOL);
    let hi = value.hi() * (1.0 + ANNOTATION_REL_TOL);
    lo.min(hi) <= literal && literal <= lo.max(hi)
}

/// Constants named in the index that have no closed form and are left out.
pub const EXCLUDED: &[(&str, &str)] = &[(
    "C_Step3",
    "listed in the index of constants without a defining formula",
)];

pub struct Ledger {
    config: LedgerConfig,
    nodes: Vec<ConstantNode>,
    index: HashMap<&'static str, usize>,
    cache: RwLock<HashMap<(&'static str, u64), I>>,
}

impl Default for Ledger {
    fn default() -> Self {
        Self::new(LedgerConfig::default())
    }
}

impl Ledger {
    pub fn new(config: LedgerConfig) -> Self {
        let nodes = registry();
        let index = nodes.iter().enumerate().map(|(i, n)| (n.name, i)).collect();
        let ledger = Self {
            config,
            nodes,
            index,
            cache: RwLock::new(HashMap::new()),
        };
        ledger.check_acyclic().expect("constant registry is acyclic");
        ledger
    }

    pub fn config(&self) -> LedgerConfig {
        self.config
    }

    pub fn nodes(&self) -> &[ConstantNode] {
        &self.nodes
    }

    pub fn node(&self, name: &str) -> Result<&ConstantNode> {
        self.index
            .get(name)
            .map(|&i| &self.nodes[i])
            .ok_or_else(|| Error::UnknownConstant(name.to_string()))
    }

    /// Evaluate a constant; `delta` must be given exactly for δ-parametric nodes.
    pub fn eval(&self, name: &str, delta: Option<f64>) -> Result<I> {
        let node = self.node(name)?;
        let d = match (node.delta_parametric, delta) {
            (true, Some(d)) => {
                f::check_delta(node.name, d)?;
                d
            }
            (true, None) => return Err(Error::MissingDelta(name.to_string())),
            (false, Some(_)) => return Err(Error::UnexpectedDelta(name.to_string())),
            (false, None) => 0.0,
        };
        let key = (node.name, d.to_bits());
        if let Some(v) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = (node.eval)(self, d)?;
        self.cache.write().expect("cache lock").insert(key, v);
        Ok(v)
    }

    fn d(&self, name: &str, delta: f64) -> Result<I> {
        self.eval(name, Some(delta))
    }

    fn c(&self, name: &str) -> Result<I> {
        self.eval(name, None)
    }

    pub fn metric_comparison(&self, delta: f64) -> Result<f::MetricComparison> {
        f::metric_comparison_constants(delta, self.config.inverse, self.config.christoffel)
    }

    /// Verify that every dependency exists and the graph has no cycle.
    pub fn check_acyclic(&self) -> Result<()> {
        for node in &self.nodes {
            for dep in node.deps {
                self.node(dep)?;
            }
        }
        let mut done = HashSet::new();
        let mut active = HashSet::new();
        for node in &self.nodes {
            self.visit(node.name, &mut active, &mut done)?;
        }
        Ok(())
    }

    fn visit(&self, name: &'static str, active: &mut HashSet<&'static str>, done: &mut HashSet<&'static str>) -> Result<()> {
        if done.contains(name) {
            return Ok(());
        }
        if !active.insert(name) {
            return Err(Error::Cycle(name.to_string()));
        }
        for dep in self.node(name)?.deps {
            self.visit(self.node(dep)?.name, active, done)?;
        }
        active.remove(name);
        done.insert(name);
        Ok(())
    }

    /// Hash of the registry text and configuration; stable across runs.
    pub fn version_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update(serde_json::to_vec(&self.config).expect("config serializes"));
        for n in &self.nodes {
            h.update(n.name.as_bytes());
            h.update([0]);
            h.update(n.formula.as_bytes());
            h.update([0]);
            h.update(n.deps.join(",").as_bytes());
            h.update([n.delta_parametric as u8]);
            h.update(n.citation.as_bytes());
            for a in n.annotations {
                h.update(a.label.as_bytes());
                h.update(a.value.to_le_bytes());
            }
        }
        format!("{:x}", h.finalize())
    }
}

macro_rules! node {
    ($name:expr, $formula:expr, [$($dep:expr),*], $param:expr, $cite:expr, $ann:expr, $eval:expr) => {
        ConstantNode {
            name: $name,
            formula: $formula,
            deps: &[$($dep),*],
            delta_parametric: $param,
            citation: $cite,
            annotations: $ann,
            eval: $eval,
        }
    };
}

const NONE: &[Annotation] = &[];

fn registry() -> Vec<ConstantNode> {
    vec![
        node!("omega_3", "pi^(3/2)/Gamma(5/2) = 4pi/3", [], false,
            "volume of the unit ball in R^3", NONE,
            |_, _| f::omega(3)),
        node!("C_mu_L2", "T2 = 1", [], false,
            "distribution function bound, strong (2,2) part: T2 = 1", NONE,
            |_, _| Ok(I::ONE)),
        node!("C_mu_Tg", "2^(n+2), n = 3", [], false,
            "distribution bound for the good part: mu_Tg(t/2) <= 2^(n+2)/t ||f||_1", NONE,
            |_, _| Ok(f::c_mu_tg(3))),
        node!("C_Newtonian_D3", "n(n+5)/omega_n, n = 3", ["omega_3"], false,
            "second derivative bound for the Newtonian potential: n(n+5)/omega_n", NONE,
            |l, _| I::from_integer(24).try_div(l.c("omega_3")?)),
        node!("C_IntegralBound_CZ", "2 n^2 (n+5), n = 3", [], false,
            "integral bound in the Calderon-Zygmund proof: 2 n^2 (n+5)", NONE,
            |_, _| Ok(f::c_integral_bound_cz(3))),
        node!("C_FStar_measure", "omega_n n^(n/2), n = 3", ["omega_3"], false,
            "measure bound |F*| <= omega_n n^(n/2) |Upsilon|", NONE,
            |l, _| Ok(l.c("omega_3")? * I::from_integer(3).pow_ratio(ratio(3, 2))?)),
        node!("C_mu_Tb", "4 C_IntegralBound_CZ + C_FStar_measure", ["C_IntegralBound_CZ", "C_FStar_measure"], false,
            "distribution bound for the bad part: (4 C + C_F*)/t ||f||_1", NONE,
            |l, _| Ok(I::from_integer(4) * l.c("C_IntegralBound_CZ")? + l.c("C_FStar_measure")?)),
        node!("T1", "C_mu_Tg + C_mu_Tb = 2^(n+2) + 4 C_IntegralBound_CZ + C_FStar_measure", ["C_mu_Tg", "C_mu_Tb"], false,
            "weak (1,1) distribution function bound T1", NONE,
            |l, _| Ok(l.c("C_mu_Tg")? + l.c("C_mu_Tb")?)),
        node!("C_Marcinkiewicz_4_3", "2 (p(r-q)/((p-q)(r-p)))^(1/p), p = 4/3, q = 1, r = 2", [], false,
            "Marcinkiewicz interpolation theorem", NONE,
            |_, _| f::c_marcinkiewicz(ratio(4, 3), ratio(1, 1), ratio(2, 1))),
        node!("C_Marcinkiewicz_3_2", "2 (p(r-q)/((p-q)(r-p)))^(1/p), p = 3/2, q = 1, r = 2", [], false,
            "Marcinkiewicz interpolation theorem", NONE,
            |_, _| f::c_marcinkiewicz(ratio(3, 2), ratio(1, 1), ratio(2, 1))),
        node!("C_CalderonZygmund_3_2", "1", [], false,
            "Calderon-Zygmund estimate: C = 1 if p = 2", NONE,
            |_, _| f::c_calderon_zygmund(3, ratio(2, 1))),
        node!("C_CalderonZygmund_3_4", "C_Marcinkiewicz_4_3 T1^(1/2) C_mu_L2^(1/2) (conjugate exponent 4/3)",
            ["C_Marcinkiewicz_4_3", "T1", "C_mu_L2"], false,
            "Calderon-Zygmund estimate for n = 3, p = 4, via the conjugate exponent",
            &[Annotation { label: "remark value", value: 193.0 }, Annotation { label: "index value", value: 293.519 }],
            |l, _| Ok(l.c("C_Marcinkiewicz_4_3")? * l.c("T1")?.sqrt()? * l.c("C_mu_L2")?.sqrt()?)),
        node!("C_Poincare_Qtilde", "(|Q~|/omega_3)^(1/3) = (81/(4 pi))^(1/3)", ["omega_3"], false,
            "Poincare inequality with Omega = Q~ = [-1,2]^3", NONE,
            |l, _| I::from_integer(27).try_div(l.c("omega_3")?)?.pow_ratio(ratio(1, 3))),
        node!("C_grad_hessian_3_4", "n^2 C_CalderonZygmund_3_4 (n C_Poincare_Qtilde + 1), n = 3",
            ["C_CalderonZygmund_3_4", "C_Poincare_Qtilde"], false,
            "D + D^2 regularity estimate on Q~, p = 4", NONE,
            |l, _| Ok(f::c_grad_plus_hessian_from(3, l.c("C_CalderonZygmund_3_4")?, l.c("C_Poincare_Qtilde")?))),
        node!("C_grad_hessian_3_2", "n^2 C_CalderonZygmund_3_2 (n C_Poincare_Qtilde + 1), n = 3",
            ["C_CalderonZygmund_3_2", "C_Poincare_Qtilde"], false,
            "D + D^2 regularity estimate on Q~, p = 2", NONE,
            |l, _| Ok(f::c_grad_plus_hessian_from(3, l.c("C_CalderonZygmund_3_2")?, l.c("C_Poincare_Qtilde")?))),
        node!("C_Sobolev_K32", "K(3,2) with omega_2 read as the surface measure 4 pi of the unit 2-sphere", [], false,
            "Sobolev embedding constant K(n,q)", NONE,
            |_, _| f::k_sobolev(3, ratio(2, 1), OmegaReading::SphereSurface)),
        node!("C_Sobolev_K32_ball", "K(3,2) with omega_2 read as the unit disc area pi", [], false,
            "Sobolev embedding constant K(n,q), alternative reading of omega_(n-1)", NONE,
            |_, _| f::k_sobolev(3, ratio(2, 1), OmegaReading::BallVolume)),
        node!("C_Sobolev_cube", "13.25 (tabulated)", [], false,
            "Sobolev embedding on [0,1]^3, imported from page 15, table 6 of the cited source",
            &[Annotation { label: "tabulated value", value: 13.25 }],
            |_, _| Ok(f::c_sobolev_cube())),
        node!("C_Holder_Q_Qtilde", "27^(1/4 - 1/6) = 27^(1/12)", [], false,
            "Hoelder constant for L^6 -> L^4 on [-1,2]^3",
            &[Annotation { label: "index value 27^(3/4)", value: 11.844_666_116_358_89 }],
            |_, _| f::c_holder_q_qtilde()),
        node!("C_Morrey", "max(omega_3^(-1/4), (12 pi/17)^(3/4))", ["omega_3"], false,
            "Morrey inequality, reduced to periodic functions", NONE,
            |_, _| f::c_morrey()),
        node!("C_Jost", "sqrt(17)", [], false,
            "imported estimate for weak solutions of Delta u = f", NONE,
            |_, _| f::c_jost()),
        node!("C_eigen", "4 pi^2", [], false,
            "smallest nonzero eigenvalue of the flat Laplacian on T^3",
            NONE,
            |_, _| Ok(f::c_eigen())),
        node!("b1", "10/sqrt(3)", [], false, "smootherstep cutoff estimate b1", NONE,
            |_, _| Ok(f::cutoff_derivative_bounds()?.b1)),
        node!("b2", "60(2 sqrt(3) - 3)", [], false, "smootherstep cutoff estimate b2", NONE,
            |_, _| Ok(f::cutoff_derivative_bounds()?.b2)),
        node!("b3", "20(5 sqrt(3) - 6)", [], false, "smootherstep cutoff estimate b3", NONE,
            |_, _| Ok(f::cutoff_derivative_bounds()?.b3)),
        node!("C_Laplacian_chi", "3 b1", ["b1"], false, "bound on the Laplacian of the cutoff", NONE,
            |l, _| Ok(I::from_integer(3) * l.c("b1")?)),
        node!("C_D_chi", "sqrt(3) b2", ["b2"], false, "bound on the derivative of the cutoff", NONE,
            |l, _| Ok(I::from_integer(3).sqrt()? * l.c("b2")?)),
        node!("C_D2_chi", "3 b3", ["b3"], false, "bound on the second derivative of the cutoff", NONE,
            |l, _| Ok(I::from_integer(3) * l.c("b3")?)),
        node!("C_Schauder",
            "27(1 + C3 C_Laplacian_chi + (2 + 54*27 sqrt(17)) C3 C_Holder_Q_Qtilde C_D2_chi C_Sobolev_K32), C3 = C_grad_hessian_3_4",
            ["C_grad_hessian_3_4", "C_Laplacian_chi", "C_Holder_Q_Qtilde", "C_D2_chi", "C_Sobolev_K32"], false,
            "explicit constant for the Schauder estimate on T^3", NONE,
            |l, _| f::c_schauder_from(
                l.c("C_grad_hessian_3_4")?,
                l.c("C_Laplacian_chi")?,
                l.c("C_Holder_Q_Qtilde")?,
                l.c("C_D2_chi")?,
                l.c("C_Sobolev_K32")?,
            )),
        node!("C_flat_injectivity",
            "(1/(4 pi^2)) C_Schauder C_Sobolev_cube (1 + 27 sqrt(17)) + C_Schauder (1 + 27 C_Sobolev_cube)",
            ["C_Schauder", "C_Sobolev_cube"], false,
            "injectivity estimate for the flat metric, C1", NONE,
            |l, _| f::c_flat_injectivity_from(l.c("C_Schauder")?, l.c("C_Sobolev_cube")?)),
        // δ-parametric chain, p = 4
        node!("C_det_lo", "(1-d)^3 - 2 d^3 - 3(1+d) d^2", [], true, "determinant estimate, lower", NONE,
            |_, d| Ok(f::c_det_lo(I::point(d)))),
        node!("C_det_hi", "(1+d)^3 + 2 d^3 + 3(1+d) d^2", [], true, "determinant estimate, upper", NONE,
            |_, d| Ok(f::c_det_hi(I::point(d)))),
        node!("C_inv_stated", "2 d", [], true, "inverse metric bound as stated: ||g^-1 - g_flat||_C1 <= 2 d", NONE,
            |_, d| Ok(f::c_inv_stated(I::point(d)))),
        node!("C_inv_derived", "6 d + 36 d^3", [], true, "inverse metric bound as obtained in its proof", NONE,
            |_, d| Ok(f::c_inv_derived(I::point(d)))),
        node!("C_inv", "C_inv_stated or C_inv_derived, per configuration", ["C_inv_stated", "C_inv_derived"], true,
            "plumbing", NONE,
            |l, d| match l.config.inverse {
                InverseBound::Stated => l.d("C_inv_stated", d),
                InverseBound::Derived => l.d("C_inv_derived", d),
            }),
        node!("C_cov_lo", "(1 - 3 d)^(1/2)", [], true, "covector comparison, lower", NONE,
            |_, d| f::c_cov_lo(I::point(d))),
        node!("C_cov_hi", "(1 + 3 d)^(1/2)", [], true, "covector comparison, upper", NONE,
            |_, d| f::c_cov_hi(I::point(d))),
        node!("C_2tensor_lo", "sqrt(1 - 9(2 + 2d) 2d)", [], true, "covariant 2-tensor comparison, lower", NONE,
            |_, d| f::c_2tensor_lo(I::point(d))),
        node!("C_2tensor_hi", "sqrt(1 + 9(2 + 2d) 2d)", [], true, "covariant 2-tensor comparison, upper", NONE,
            |_, d| f::c_2tensor_hi(I::point(d))),
        node!("C_Christoffel_quadratic", "3^2 d^2", [], true, "Christoffel symbol bound as stated", NONE,
            |_, d| Ok(f::c_christoffel_quadratic(I::point(d)))),
        node!("C_Christoffel_linear", "(3/2)(1 + C_inv) 3 d", ["C_inv"], true,
            "first-order bound from the triangle inequality chain of the Christoffel formula", NONE,
            |l, d| Ok(f::c_christoffel_linear(I::point(d), l.d("C_inv", d)?))),
        node!("C_Christoffel", "C_Christoffel_quadratic or C_Christoffel_linear, per configuration",
            ["C_Christoffel_quadratic", "C_Christoffel_linear"], true, "plumbing", NONE,
            |l, d| match l.config.christoffel {
                ChristoffelBound::Quadratic => l.d("C_Christoffel_quadratic", d),
                ChristoffelBound::Linear => l.d("C_Christoffel_linear", d),
            }),
        node!("C_W1p_lo", "C_cov_lo C_det_lo^(1/8)", ["C_cov_lo", "C_det_lo"], true,
            "W^{1,p} norm comparison, lower", NONE,
            |l, d| f::c_w1p_lo_from(l.d("C_cov_lo", d)?, l.d("C_det_lo", d)?)),
        node!("C_W1p_hi", "C_cov_hi C_det_hi^(1/8)", ["C_cov_hi", "C_det_hi"], true,
            "W^{1,p} norm comparison, upper", NONE,
            |l, d| f::c_w1p_hi_from(l.d("C_cov_hi", d)?, l.d("C_det_hi", d)?)),
        node!("C_W2p_lo", "min(C_W1p_lo - 3 sqrt(3) C_Christoffel b, b), b = C_2tensor_lo C_det_lo^(1/8)",
            ["C_W1p_lo", "C_Christoffel", "C_2tensor_lo", "C_det_lo"], true,
            "W^{2,p} norm comparison, lower (C11)", NONE,
            |l, d| f::c_w2p_lo_from(l.d("C_W1p_lo", d)?, l.d("C_Christoffel", d)?, l.d("C_2tensor_lo", d)?, l.d("C_det_lo", d)?)),
        node!("C_W2p_hi", "C_W1p_hi (1 + 3 sqrt(3) C_Christoffel) C_2tensor_hi C_det_hi^(1/8)",
            ["C_W1p_hi", "C_Christoffel", "C_2tensor_hi", "C_det_hi"], true,
            "W^{2,p} norm comparison, upper (C10)", NONE,
            |l, d| f::c_w2p_hi_from(l.d("C_W1p_hi", d)?, l.d("C_Christoffel", d)?, l.d("C_2tensor_hi", d)?, l.d("C_det_hi", d)?)),
        node!("C_Laplacian_comparison",
            "3((C_det_hi^(1/8) - 1)(1 + C_inv) + C_inv) + 9 sqrt(3) (1 + C_inv) C_Christoffel C_det_hi^(1/8)",
            ["C_det_hi", "C_inv", "C_Christoffel"], true,
            "Laplacian comparison bound, absorbed term (C14)", NONE,
            |l, d| f::c_laplacian_comparison_from(f::det_hi_root_excess(I::point(d))?, l.d("C_inv", d)?, l.d("C_Christoffel", d)?)),
        node!("C_nonflat_injectivity", "C_W2p_hi C_flat_injectivity / (1 - C_flat_injectivity C_Laplacian_comparison)",
            ["C_W2p_hi", "C_flat_injectivity", "C_Laplacian_comparison"], true,
            "injectivity estimate for perturbed metrics (C4)", NONE,
            |l, d| f::c_nonflat_injectivity_from(d, l.c("C_flat_injectivity")?, l.d("C_W2p_hi", d)?, l.d("C_Laplacian_comparison", d)?)),
        node!("C_one_form_injectivity", "C_Morrey C_cov_hi C_nonflat_injectivity / C_W2p_lo",
            ["C_Morrey", "C_cov_hi", "C_nonflat_injectivity", "C_W2p_lo"], true,
            "1-form injectivity estimate", NONE,
            |l, d| f::c_one_form_injectivity_from(l.c("C_Morrey")?, l.d("C_cov_hi", d)?, l.d("C_nonflat_injectivity", d)?, l.d("C_W2p_lo", d)?)),
        node!("epsilon_one_form", "C_cov_lo - C_one_form_injectivity (3 + 9 C_inv) C_Christoffel C_det_hi^(1/8)",
            ["C_cov_lo", "C_one_form_injectivity", "C_inv", "C_Christoffel", "C_det_hi"], true,
            "lower bound for the pointwise norm of the harmonic 1-form", NONE,
            |l, d| f::epsilon_one_form_from(l.d("C_cov_lo", d)?, l.d("C_one_form_injectivity", d)?, l.d("C_inv", d)?, l.d("C_Christoffel", d)?, l.d("C_det_hi", d)?)),
        node!("delta_star_absorption", "certified bracket of sup{d : C_flat_injectivity C_Laplacian_comparison(d) < 1}",
            ["C_flat_injectivity", "C_Laplacian_comparison"], false,
            "admissible perturbation size for the absorption argument, stated below 3e-14",
            NONE,
            |l, _| Ok(max_admissible_delta(l, Criterion::Absorption)?.bracket())),
        node!("delta_star_one_form", "certified bracket of sup{d < delta_star_absorption : epsilon_one_form(d) > 0}",
            ["delta_star_absorption", "epsilon_one_form"], false,
            "admissible perturbation size for the nowhere-vanishing 1-form", NONE,
            |l, _| Ok(max_admissible_delta(l, Criterion::OneForm)?.bracket())),
    ]
}
