//! Flat, serialisable listing of every named constant with its definition.

use super::{AssumptionConstants, DerivedConstants, TheoremConstants};
use crate::numeric::LogVal;
use serde::{Deserialize, Serialize};

/// One named constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub name: String,
    /// Value when it fits in `f64`.
    pub value: Option<f64>,
    /// `log10` of the value (always present).
    pub log10: f64,
    /// Defining formula.
    pub definition: String,
}

/// Every constant of a bounds computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub inputs: AssumptionConstants,
    pub entries: Vec<ReportEntry>,
    pub warnings: Vec<String>,
}

impl BoundsReport {
    /// Builds the listing; theorem constants are included when available.
    pub fn new(ac: &AssumptionConstants, dc: &DerivedConstants, tc: Option<&TheoremConstants>) -> Self {
        let mut entries = Vec::new();
        let mut push = |name: &str, v: LogVal, def: &str| {
            entries.push(ReportEntry {
                name: name.to_string(),
                value: v.finite(),
                log10: v.log10(),
                definition: def.to_string(),
            });
        };
        let f = LogVal::new;
        let dis = &dc.dissipativity;
        push("K_H", f(dc.k_h), "2^{2r} K_G + K_F");
        push("L_h", f(dc.l_h), "L_G + L_F E[(1+2|X|)^{ρ−1}] + 1");
        push("a_F", f(dis.a_f), "a/2");
        push("b_F", dis.b_f, "(a/2 + b) R_F^{r̄+2} + K_F² E[(1+|X|)^{2ρ}]/(2a)");
        push("R_F", f(dis.r_f), "max{(4b/a)^{1/(2r−r̄)}, 2^{1/(2r)}}");
        push("a_h", f(dis.a_h), "2^q K_G E[(1+|X|)^ρ]");
        push("b_h", dis.b_h, "3(2^{q+1} K_G E[(1+|X|)^ρ]/min{1, a_F})^{q+2} + b_F");
        push("R", f(dc.big_r), "max{1, (3^{q−1} L_G/a)^{1/(2r−q+1)}, (2b/a)^{1/(2r−r̄)}}");
        push("L_R", dc.l_r, "L_h (1 + 2R)^{2r}");
        for (i, l) in dc.lambda_max_by_p.iter().enumerate() {
            push(
                &format!("lambda_{}_max", i + 1),
                *l,
                "min{1, min{(a_F/K_F)², (a_F/K_F)^{2/(2p−1)}}/(9 C(2p,p)² K_F² E[(1+|X|)^{2pρ}]²), 1/a_F, 1/(4a_F²)}",
            );
        }
        push("lambda_max", dc.lambda_max, "λ_{4r+2,max}");
        push("lambda_max_relaxed", f(dc.lambda_max_relaxed), "min{1, a_F²/(16 K_F⁴), 1/a_F, 1/(4a_F²)}");
        let fm = &dc.first_moment;
        push("M_0", fm.m0, "(2^{q+2} K_G E[(1+|X|)^{2ρ}]/min{1, a_F})^{1/(2r−q+1)}");
        push("kappa", fm.kappa, "M_0^{2r}/(2(1 + M_0^{2r}))");
        push("c_0", fm.c0, "second-moment constant of the iterates");
        for h in &dc.higher_moments {
            let p = h.p;
            push(&format!("c_3({p})"), h.c3, "C(2p,p)² 2^{2p(q+1)} p(2p−1) K_G^{2p} (1+K_F)^{2p} E[(1+|X|)^{2pρ}]");
            push(&format!("M_1({p})"), h.m1, "(4p b_F + 2^{q+2} p K_G E[(1+|X|)^ρ] + 2c_3(p))/min{1, a_F}");
            push(&format!("kappa_bar({p})"), h.kappa_bar, "M_1^{2r}/(2(1 + M_1^{2r}))");
            push(&format!("c_4({p})"), h.c4, "first higher-moment cascade, drift part");
            push(&format!("c_5({p})"), h.c5, "c_4(p) + 2^{2p−2} p(2p−1) (d/β) c_4(p−1) + 2^{2p−4} (2p(2p−1))^{p+1} (d/β)^p");
            push(&format!("M_2({p})"), h.m2, "(2^{2p−1} p(2p−1) (d/β)/(a_F κ̄(p)))^{1/2}");
            push(&format!("c_0_bar({p})"), h.c0_bar, "c_5(p) + 2^{2p−2} p(2p−1) (d/β) M_2(p)^{2p−2}");
            push(&format!("M_3({p})"), h.m3, "second higher-moment cascade radius");
            push(&format!("kappa_tilde({p})"), h.kappa_tilde, "M_3^{2r}/(2(1 + M_3^{2r}))");
            push(&format!("c_6({p})"), h.c6, "second higher-moment cascade, drift part");
            push(&format!("c_7({p})"), h.c7, "c_6(p) + 2^{2p−2} p(2p−1) (d/β) c_6(p−1) + 2^{2p−4} (2p(2p−1))^{p+1} (d/β)^p");
            push(&format!("M_4({p})"), h.m4, "(2^{2p−1} p(2p−1) (d/β)/(a_F κ̃(p)))^{1/2}");
            push(&format!("c_0_tilde({p})"), h.c0_tilde, "c_7(p) + 2^{2p−2} p(2p−1) (d/β) M_4(p)^{2p−2}");
            push(&format!("kappa_sharp({p})"), h.kappa_sharp, "min{κ̄(p), κ̃(p)}");
            push(&format!("c_sharp({p})"), h.c_sharp, "max{c̄_0(p), c̃_0(p)}");
        }
        for dr in [&dc.drift2, &dc.drift4] {
            let p = dr.p;
            push(&format!("M_V({p})"), dr.m_v, "(1/3 + 4b_h/(3a_h) + 4d/(3a_hβ) + 4(p−2)/(3a_hβ))^{1/2}");
            push(&format!("c_V1({p})"), f(dr.c_v1), "a_h p/4");
            push(&format!("c_V2({p})"), dr.c_v2, "(3/4) a_h p v_p(M_V(p))");
        }
        let c = &dc.contraction;
        push("c_dot_0", c.c_dot0, "2(4c_{V,2}(2)(1 + c_{V,1}(2))/c_{V,1}(2) − 1)^{1/2}");
        push("c_dot_1", c.c_dot1, "2(2c_{V,2}(2)/c_{V,1}(2) − 1)^{1/2}");
        push("phi_bar", c.phi_bar, "(√(8βπ/L_R) ċ_0 exp((ċ_0 √(βL_R/8) + √(8/(βL_R)))²))^{−1}");
        push("epsilon", c.eps, "1 ∧ (4c_{V,2}(2) √(2βπ/L_R) ∫_0^{ċ_1} exp((s√(βL_R/8) + √(8/(βL_R)))²) ds)^{−1}");
        push("c_dot", c.c_dot, "min{φ̄, c_{V,1}(2), 4c_{V,2}(2) ε c_{V,1}(2)}/2");
        push("c_hat", c.c_hat, "2(1 + ċ_0) exp(βL_R ċ_0²/8 + 2ċ_0)/ε");
        if let Some(t) = tc {
            push("C_bar_0_1", t.cb01, "64 K_H⁴ E[(1+|X|)^{4ρ}]");
            push("C_bar_1_1", t.cb11, "C̄_{0,1}(1 + c♯_{4r+2}(1 + 2/(a_F κ♯_{4r+2}))) + 32d(d+2)/β²");
            push("C_bar_0", t.cb0, "W2 one-step interpolation error, transient part");
            push("C_bar_1", t.cb1, "W2 one-step interpolation error, stationary part");
            push("C_bar_2", t.cb2, "e^{m/4} ĉ (1 + 4/m)(C̄_0 + 12), m = min{ċ, a_F κ♯_2/2, a_h}");
            push("C_bar_3", t.cb3, "2(ĉ/ċ) e^{ċ/2}(C̄_1 + 12c♯_2(1 + 2/(a_F κ♯_2)) + 9v_4(M_V(4)) + 15)");
            push("C_bar_4", t.cb4, "e^{m/8} √ĉ (1 + 8/m)(C̄_0^{1/2} + 2√2)");
            push("C_bar_5", t.cb5, "4(√ĉ/ċ) e^{ċ/4}(C̄_1^{1/2} + 2√2 (c♯_2(1 + 2/(a_F κ♯_2)))^{1/2} + (3v_4(M_V(4)))^{1/2} + 3√2)");
            push("C_bar_6", t.cb6, "K_H E[(1+|X|)^ρ]");
            push("C_bar_7", t.cb7, "L_h (1 + 4R_{θ*})^{2r}");
            push("R_theta_star", f(t.r_theta_star), "max{√(b_h/a_h), √(2d/(βL_h))}");
            push("C_0", t.c0, "min{ċ, a_F κ♯_2/2, a_h}/4");
            push("C_1", t.c1, "2^{4r+1} e^{m/4}[C̄_0^{1/2} + C̄_2 + ĉ(2 + ∫V_2 dπ_β)]");
            push("C_2", t.c2, "C̄_1^{1/2} + C̄_3");
            push("C_3", t.c3, "min{ċ, a_F κ♯_2/2, a_h}/8");
            push("C_4", t.c4, "2^{2r+1} e^{m/8}[C̄_0^{1/2} + C̄_4 + √ĉ (2 + ∫V_2 dπ_β)^{1/2}]");
            push("C_5", t.c5, "C̄_1^{1/2} + C̄_5");
            push("C_6", t.c6, "C_3");
            push("C_7", t.c7, "excess-risk transient constant");
            push("C_8", t.c8, "excess-risk discretisation constant");
            entries.push(ReportEntry {
                name: "C_9".into(),
                value: Some(t.c9),
                log10: t.c9.abs().log10(),
                definition: "d/2 ln(C̄_7 e/a_h (β b_h/d + 1)) + ln 2".into(),
            });
        }
        let mut warnings = dc.warnings.clone();
        if tc.is_none() {
            warnings.push("target-measure moments not supplied; theorem constants omitted".into());
        }
        Self { inputs: ac.clone(), entries, warnings }
    }

    /// Looks up an entry by name.
    pub fn get(&self, name: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}
