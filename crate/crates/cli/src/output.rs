//! Fixed-column CSV tables. Every number goes through `format_sig`.

use fdp_core::envelopes::EnvelopeResult;
use fdp_core::numeric::format_sig;
use fdp_core::thresholds::ThresholdResult;

pub const ENVELOPE_HEADER: &str = "t,gamma_bar,v,count_bound";
pub const THRESHOLD_HEADER: &str = "method,t,rejected,z,alpha";
pub const ESTIMATE_HEADER: &str = "quantity,t,value";
pub const COMPARISON_HEADER: &str = "quantity,reported,computed,agrees";

fn opt(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

/// One row per knot of Γ̄; `v` is left empty for the exact envelope.
pub fn envelope_csv(env: &EnvelopeResult) -> String {
    let mut out = String::from(ENVELOPE_HEADER);
    out.push('\n');
    for (&t, &g) in env.gamma_bar.knots().iter().zip(env.gamma_bar.values()) {
        let v = env.v_fn.as_ref().map(|f| f.eval(t));
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_sig(t),
            format_sig(g),
            opt(v),
            format_sig(env.count_bound.eval(t))
        ));
    }
    out
}

pub fn threshold_csv(results: &[ThresholdResult]) -> String {
    let mut out = String::from(THRESHOLD_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.method.as_str(),
            format_sig(r.t),
            r.rejected.map(|n| n.to_string()).unwrap_or_default(),
            opt(r.z),
            opt(r.alpha)
        ));
    }
    out
}

/// A `quantity,t,value` row; `t` is empty for scalars.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EstimateRow {
    pub quantity: String,
    pub t: Option<f64>,
    pub value: f64,
}

pub fn estimate_csv(rows: &[EstimateRow]) -> String {
    let mut out = String::from(ESTIMATE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.quantity, opt(r.t), format_sig(r.value)));
    }
    out
}

/// A computed quantity next to a previously reported value.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub reported: f64,
    pub computed: f64,
    pub agrees: bool,
}

pub fn comparison_csv(rows: &[Comparison]) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.quantity,
            format_sig(r.reported),
            format_sig(r.computed),
            r.agrees
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use fdp_core::thresholds::ThresholdMethod;

    #[test]
    fn threshold_rows() {
        let r = ThresholdResult::new(ThresholdMethod::MinimumRate, 0.324)
            .with_alpha(0.05)
            .with_z(1.0 / 9.0)
            .left_limit()
            .count(&[0.1, 0.324, 0.5]);
        assert_eq!(threshold_csv(&[r]), "method,t,rejected,z,alpha\nminimum-rate,0.324,1,0.1111111111,0.05\n");
        let bare = ThresholdResult::new(ThresholdMethod::Oracle, 0.25);
        assert!(threshold_csv(&[bare]).ends_with("oracle,0.25,,,\n"));
    }

    #[test]
    fn estimate_rows() {
        let rows = vec![
            EstimateRow { quantity: "a".into(), t: None, value: 0.5 },
            EstimateRow { quantity: "f_hat".into(), t: Some(0.1), value: 2.0 / 3.0 },
        ];
        assert_eq!(estimate_csv(&rows), "quantity,t,value\na,,0.5\nf_hat,0.1,0.6666666667\n");
    }
}
