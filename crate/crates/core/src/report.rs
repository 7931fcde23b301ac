//! Machine-readable reports. Serialization goes through `serde_json::Value`,
//! whose maps are ordered by key, so identical inputs give identical bytes.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::exponents::{self, argmin_leaf, evaluate_exponents, Exponent};
use crate::feasibility::{
    check_point, compile_requirements, find_feasible_point, maximize_margin, weights_point, FeasibilityResult,
    MarginResult, Requirements,
};
use crate::lemma::{self, AdmissibleLambda, LemmaParams, TraceSummary};
use crate::minplus::{Weight, WeightVector};
use crate::rational::Rational;
use crate::sim::{SimConfig, SimSummary};

pub const TOOL: &str = "fsi-decay";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Whether a command produced a positive verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Success, feasible, bound holds.
    Positive,
    /// Infeasible, violated, bound fails.
    Negative,
}

impl Outcome {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Positive
        } else {
            Self::Negative
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Self::Positive => 0,
            Self::Negative => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub input: Value,
    pub result: Value,
    pub provenance: Value,
}

impl Report {
    fn new(command: &str, input: Value, result: Value) -> Self {
        Self { command: command.to_string(), input, result, provenance: provenance() }
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn render(&self) -> String {
        let v = serde_json::to_value(self).expect("reports serialize");
        let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
        s.push('\n');
        s
    }
}

pub fn provenance() -> Value {
    json!({
        "tool": TOOL,
        "version": VERSION,
        "ledger_hash": exponents::ledger_hash(),
        "leaf_counts": {
            "alpha": Exponent::Alpha.leaf_count(),
            "kappa": Exponent::Kappa.leaf_count(),
            "epsilon": Exponent::Epsilon.leaf_count(),
        },
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn named(point: &[Rational]) -> Value {
    let mut w = WeightVector::zero();
    for (slot, v) in w.0.iter_mut().zip(point) {
        *slot = v.clone();
    }
    to_value(&w)
}

pub fn exponents_report(w: &WeightVector) -> (Report, Outcome) {
    let t = evaluate_exponents(w);
    let argmin: serde_json::Map<String, Value> =
        Exponent::ALL.iter().map(|&e| (e.name().to_string(), to_value(&argmin_leaf(e, w)))).collect();
    let result = json!({
        "alpha": t.alpha,
        "kappa": t.kappa,
        "epsilon": t.epsilon,
        "argmin": argmin,
    });
    (Report::new("exponents", json!({ "weights": w }), result), Outcome::Positive)
}

pub fn verify_weights_report(w: &WeightVector) -> (Report, Outcome) {
    let sys = compile_requirements(&Requirements::default());
    let chk = check_point(&sys, &weights_point(&sys, w, None));
    let failing: Vec<Value> = chk.failing().map(|r| json!({ "tag": r.tag, "margin": r.margin })).collect();
    let binding: Vec<&str> = match &chk.min_analytic_margin {
        Some(m) => sys.rows.iter().zip(&chk.rows).filter(|(c, r)| c.analytic && r.margin == *m).map(|(c, _)| c.tag.as_str()).collect(),
        None => Vec::new(),
    };
    let result = json!({
        "feasible": chk.feasible,
        "rows": chk.rows.len(),
        "failing": failing,
        "min_analytic_margin": chk.min_analytic_margin,
        "binding": binding,
        "exponents": evaluate_exponents(w),
    });
    (Report::new("verify-weights", json!({ "weights": w }), result), Outcome::from_bool(chk.feasible))
}

pub fn search_weights_report(req: &Requirements, maximize: bool) -> Result<(Report, Outcome)> {
    let input = json!({
        "alpha_min": req.alpha_min,
        "kappa_min": req.kappa_min,
        "epsilon_min": req.epsilon_min,
        "maximize_margin": maximize,
    });
    let (result, ok) = if maximize {
        let sys = compile_requirements(&Requirements { margin: true, ..req.clone() });
        match maximize_margin(&sys)? {
            MarginResult::Optimal { margin, point } => {
                let plain = compile_requirements(&Requirements { margin: false, ..req.clone() });
                let chk = check_point(&plain, &point[..Weight::ALL.len()]);
                let w = named(&point);
                // The strict system is feasible exactly when the best margin is positive.
                let feasible = margin.is_positive();
                (
                    json!({
                        "outcome": "optimal",
                        "feasible": feasible,
                        "margin": margin,
                        "weights": w,
                        "min_analytic_margin": chk.min_analytic_margin,
                    }),
                    feasible,
                )
            }
            MarginResult::Unbounded => (json!({ "outcome": "unbounded" }), true),
            MarginResult::Infeasible { certificate } => {
                (json!({ "outcome": "infeasible", "certificate": certificate }), false)
            }
        }
    } else {
        let sys = compile_requirements(req);
        match find_feasible_point(&sys)? {
            FeasibilityResult::Witness(p) => {
                let chk = check_point(&sys, &p);
                (
                    json!({
                        "outcome": "feasible",
                        "weights": named(&p),
                        "min_analytic_margin": chk.min_analytic_margin,
                    }),
                    true,
                )
            }
            FeasibilityResult::Certificate(c) => (json!({ "outcome": "infeasible", "certificate": c }), false),
        }
    };
    Ok((Report::new("search-weights", input, result), Outcome::from_bool(ok)))
}

/// Inputs for the lemma command after defaults are resolved.
pub struct LemmaRun {
    pub params: LemmaParams,
    /// Present when `λ` was searched for rather than given.
    pub admissible: Option<std::result::Result<AdmissibleLambda, String>>,
    pub trace: Option<TraceSummary>,
}

pub fn lemma_report(run: &LemmaRun) -> (Report, Outcome) {
    let rep = lemma::lemma_report(&run.params);
    let mut ok = rep.ok();
    let lambda_star = match &run.admissible {
        None => Value::Null,
        Some(Ok(a)) => json!({ "exponent": a.exponent, "lambda": a.lambda }),
        Some(Err(msg)) => {
            ok = false;
            json!({ "error": msg })
        }
    };
    if let Some(t) = &run.trace {
        ok &= t.bound_holds;
    }
    let result = json!({
        "a": rep.a,
        "A": rep.big_a,
        "eps_threshold": rep.eps_threshold,
        "lambda": run.params.lambda,
        "epsilon": run.params.epsilon,
        "lambda_star": lambda_star,
        "below_threshold": rep.below_threshold,
        "gamma_check": rep.gamma_check,
        "barriers": rep.barriers,
        "trace": run.trace,
        "ok": ok,
    });
    let input = to_value(&run.params.shape);
    (Report::new("lemma", input, result), Outcome::from_bool(ok))
}

/// Largest per-step relative energy defect accepted as a pass.
pub const ENERGY_IDENTITY_TOL: f64 = 1e-10;

pub fn simulate_report(config: &SimConfig, summary: &SimSummary) -> (Report, Outcome) {
    let ok = summary.e_id_monotone && summary.identity_defect <= ENERGY_IDENTITY_TOL;
    let mut result = to_value(summary);
    result["energy_law_holds"] = json!(ok);
    (Report::new("simulate", to_value(config), result), Outcome::from_bool(ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::reference_weights;

    #[test]
    fn keys_are_sorted_and_rationals_are_strings() {
        let (r, o) = exponents_report(&reference_weights());
        assert_eq!(o, Outcome::Positive);
        let s = r.render();
        let a = s.find("\"command\"").unwrap();
        let b = s.find("\"input\"").unwrap();
        let c = s.find("\"provenance\"").unwrap();
        let d = s.find("\"result\"").unwrap();
        assert!(a < b && b < c && c < d);
        assert!(s.contains("\"alpha\": \"5/3\""));
        assert!(s.contains("\"kappa\": \"11/3\""));
        assert!(s.contains("\"epsilon\": \"2/3\""));
        assert_eq!(s, exponents_report(&reference_weights()).0.render());
    }

    #[test]
    fn zero_weights_fail_alpha_term3() {
        let (r, o) = verify_weights_report(&WeightVector::zero());
        assert_eq!(o, Outcome::Negative);
        assert_eq!(r.result["failing"][0]["tag"], "alpha/term3");
        assert_eq!(r.result["feasible"], false);
    }

    #[test]
    fn reference_binding_rows() {
        let (r, o) = verify_weights_report(&reference_weights());
        assert_eq!(o, Outcome::Positive);
        assert_eq!(r.result["min_analytic_margin"], "2/3");
        let binding: Vec<&str> = r.result["binding"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        assert_eq!(binding, ["alpha/term3", "kappa/term4.3", "epsilon/term11.3"]);
    }

    #[test]
    fn impossible_requirements_give_certificate() {
        let req = Requirements { alpha_min: Rational::int(100), ..Requirements::default() };
        let (r, o) = search_weights_report(&req, false).unwrap();
        assert_eq!(o, Outcome::Negative);
        assert_eq!(r.result["outcome"], "infeasible");
        let (r, o) = search_weights_report(&req, true).unwrap();
        assert_eq!(o, Outcome::Negative);
        assert_eq!(r.result["feasible"], false);
        assert!(r.result["margin"].as_str().unwrap().starts_with('-'));
    }
}
