//! Sweep rows as plot-ready CSV: header line, LF endings, empty cells for
//! values a row does not have.

use sdmm_core::sim::SweepRow;

pub const HEADER: &str = "ucb,scheme,c,m,r_th,act_mean,act_std,feasible_frac,trials,seed";

/// Six significant digits, plain decimal notation. Whole numbers above the
/// six-digit range print exactly rather than padded with false precision.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (5 - exp).max(0) as usize;
    format!("{:.*}", decimals, x)
}

fn opt_sig6(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

/// Thresholds are counts: print whole values without a decimal tail.
fn count_or_sig6(x: Option<f64>) -> String {
    match x {
        None => String::new(),
        Some(v) if v.fract() == 0.0 => format!("{}", v as u64),
        Some(v) => sig6(v),
    }
}

pub fn render(rows: &[SweepRow]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for row in rows {
        let cells = [
            row.ucb.to_string(),
            row.scheme.to_string(),
            row.clusters.map(|c| c.to_string()).unwrap_or_default(),
            row.m.map(|m| m.to_string()).unwrap_or_default(),
            count_or_sig6(row.r_th),
            opt_sig6(row.act_mean),
            opt_sig6(row.act_std),
            sig6(row.feasible_frac),
            row.trials.to_string(),
            row.seed.to_string(),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_keeps_six_significant_digits() {
        assert_eq!(sig6(1.121202895), "1.12120");
        assert_eq!(sig6(0.578638095), "0.578638");
        assert_eq!(sig6(34516.53), "34516.5");
        assert_eq!(sig6(0.000123456789), "0.000123457");
        assert_eq!(sig6(0.0), "0.00000");
        assert_eq!(sig6(1.0), "1.00000");
    }

    #[test]
    fn rows_render_with_empty_cells_for_missing_values() {
        let rows = vec![SweepRow {
            ucb: 72000,
            scheme: "rateless",
            clusters: Some(3),
            m: None,
            r_th: Some(34516.5),
            act_mean: Some(1.0101708),
            act_std: Some(0.05),
            feasible_frac: 1.0,
            trials: 1000,
            seed: 7,
        }];
        let text = render(&rows);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(HEADER));
        assert_eq!(
            lines.next(),
            Some("72000,rateless,3,,34516.5,1.01017,0.0500000,1.00000,1000,7")
        );
        assert_eq!(lines.next(), None);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn infeasible_rows_leave_act_fields_empty() {
        let rows = vec![SweepRow {
            ucb: 10,
            scheme: "sbp",
            clusters: None,
            m: None,
            r_th: None,
            act_mean: None,
            act_std: None,
            feasible_frac: 0.0,
            trials: 100,
            seed: 1,
        }];
        assert_eq!(
            render(&rows).lines().nth(1),
            Some("10,sbp,,,,,,0.00000,100,1")
        );
    }
}
