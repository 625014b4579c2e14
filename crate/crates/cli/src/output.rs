//! Result rendering. Every emitter is a pure function of its inputs so
//! identical runs produce byte-identical artifacts. The first line of
//! every artifact is a `# seed: N` comment making it self-describing.

use ppdrsim_core::scenario::{MetricsReport, ScenarioState};
use ppdrsim_core::sweep::BerPoint;

/// Formats with 10 significant digits, in the style of `%.10g`: fixed
/// notation for moderate exponents, scientific otherwise, trailing
/// zeros trimmed.
pub fn fmt_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.9e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("numeric exponent");
    if !(-4..10).contains(&exp) {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (9 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    }
}

pub const BER_CSV_HEADER: &str = "protocol,ebn0_db,trials,bits,bit_errors,ber,stderr";

pub fn ber_csv(seed: u64, points: &[BerPoint]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# seed: {seed}\n"));
    out.push_str(BER_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            p.protocol.name(),
            fmt_sig10(p.ebn0_db),
            p.trials,
            p.bits,
            p.bit_errors,
            fmt_sig10(p.ber),
            fmt_sig10(p.stderr),
        ));
    }
    out
}

pub fn ber_jsonl(seed: u64, points: &[BerPoint]) -> Result<String, serde_json::Error> {
    let mut out = String::new();
    out.push_str(&format!("# seed: {seed}\n"));
    for p in points {
        out.push_str(&serde_json::to_string(p)?);
        out.push('\n');
    }
    Ok(out)
}

/// One record per user per step, then a single summary record.
pub fn scenario_jsonl(
    seed: u64,
    states: &[ScenarioState],
    report: &MetricsReport,
) -> Result<String, serde_json::Error> {
    let mut out = String::new();
    out.push_str(&format!("# seed: {seed}\n"));
    for state in states {
        for user in &state.users {
            let record = serde_json::json!({
                "record": "step",
                "step": state.step,
                "user": user.id,
                "class": user.class,
                "connectivity": user.connectivity,
                "serving": user.serving,
                "bearer": user.bearer_kind,
                "granted_rate": user.granted_rate,
            });
            out.push_str(&serde_json::to_string(&record)?);
            out.push('\n');
        }
    }
    let mut summary = serde_json::to_value(report)?;
    summary["record"] = serde_json::Value::String("summary".to_string());
    out.push_str(&serde_json::to_string(&summary)?);
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ppdrsim_core::relay::RelayProtocol;

    #[test]
    fn sig10_fixed_range() {
        assert_eq!(fmt_sig10(0.0), "0");
        assert_eq!(fmt_sig10(2.0), "2");
        assert_eq!(fmt_sig10(-2.5), "-2.5");
        assert_eq!(fmt_sig10(0.1), "0.1");
        assert_eq!(fmt_sig10(0.0786496035251426), "0.07864960353");
        assert_eq!(fmt_sig10(1234567890.0), "1234567890");
    }

    #[test]
    fn sig10_scientific_range() {
        assert_eq!(fmt_sig10(3.87210821552e-6), "3.872108216e-6");
        assert_eq!(fmt_sig10(1.5e12), "1.5e12");
        assert_eq!(fmt_sig10(-4.2e-7), "-4.2e-7");
    }

    #[test]
    fn sig10_boundary_rounding() {
        // Rounds up across the fixed/scientific boundary without losing
        // digits.
        assert_eq!(fmt_sig10(9.9999999999e-5), "0.0001");
        assert_eq!(fmt_sig10(0.000190907774076), "0.0001909077741");
    }

    #[test]
    fn csv_header_is_exact() {
        let points = [BerPoint::from_counts(
            RelayProtocol::AmplifyForward,
            0.0,
            10,
            1000,
            79,
        )];
        let csv = ber_csv(42, &points);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# seed: 42"));
        assert_eq!(
            lines.next(),
            Some("protocol,ebn0_db,trials,bits,bit_errors,ber,stderr")
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("af,0,10,1000,79,0.079,"), "{row}");
    }
}
