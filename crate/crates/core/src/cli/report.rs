//! Plain-text rendering of a [`ReportDocument`].

use std::fmt::Write;

use super::analyze::ReportDocument;

/// Smallest p-value printed as a number.
pub const P_FLOOR: f64 = 2.2e-16;

const LEGEND: &str = "Signif. codes:  0 `***' 0.001 `**' 0.01 `*' 0.05 `.'  0.1 ` ' 1";

/// Four significant digits, floored at [`P_FLOOR`].
pub fn format_p(p: f64) -> String {
    if p < P_FLOOR {
        return format!("< {P_FLOOR:e}");
    }
    if p >= 0.1 {
        return format!("{p:.4}");
    }
    if p >= 1e-4 {
        let decimals = 3 - p.log10().floor() as i32;
        return format!("{p:.*}", decimals as usize);
    }
    let s = format!("{p:.3e}");
    let (mantissa, exp) = s.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

pub fn significance_code(p: f64) -> &'static str {
    match p {
        p if p < 0.001 => "***",
        p if p < 0.01 => "**",
        p if p < 0.05 => "*",
        p if p < 0.1 => ".",
        _ => " ",
    }
}

fn format_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.2}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "Inf".into()
    } else {
        "-Inf".into()
    }
}

fn width(header: &str, cells: &[&str]) -> usize {
    cells.iter().map(|c| c.len()).chain([header.len()]).max().unwrap_or(0)
}

/// The ANOVA block, the random-effects line and, when present, the post hoc
/// p-value matrix.
pub fn render_text(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let (response, factor) = doc
        .provenance
        .source
        .as_ref()
        .map_or(("value", "group"), |s| (s.columns.value.as_str(), s.columns.group.as_str()));
    let _ = writeln!(out, "Call:\n{response} ~ {factor}\n");
    render_anova(doc, &mut out);

    let per_group = doc
        .tau_summary
        .per_group
        .iter()
        .map(|t| format!("{t:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(
        out,
        "\nAverage random-effects standard error of {:.3} ({per_group})",
        doc.tau_summary.mean
    );

    if doc.posthoc.is_some() {
        let _ = writeln!(out, "\n{}\n\nPost hoc test (p-values)\n", "-".repeat(70));
        render_posthoc(doc, &mut out);
    }
    if !doc.warnings.is_empty() {
        let _ = writeln!(out, "\nWarnings:");
        for w in &doc.warnings {
            let _ = writeln!(out, "  {w}");
        }
    }
    out
}

fn render_anova(doc: &ReportDocument, out: &mut String) {
    let t = &doc.anova;
    let labels = ["Intra-group", "Inter-groups", "Total"];
    let ss = [format_num(t.sse), format_num(t.ssf), format_num(t.total())];
    let df = [t.df_sse.to_string(), t.df_ssf.to_string()];
    let ms = [format_num(t.mean_square_intra), format_num(t.mean_square_inter)];
    let f = format_num(t.f_stat);
    let p = format_p(t.p_value);

    let wl = width("", &labels);
    let wss = width("Sum Square", &ss.each_ref().map(String::as_str));
    let wdf = width("DF", &df.each_ref().map(String::as_str));
    let wms = width("Mean Square", &ms.each_ref().map(String::as_str));
    let wf = width("F-Snedecor", &[&f]);
    let wp = width("p-value", &[&p]);

    let row = |out: &mut String, cells: [&str; 7]| {
        let _ = writeln!(
            out,
            "{:<wl$} {:>wss$} {:>wdf$} {:>wms$} {:>wf$} {:>wp$} {:<3}",
            cells[0], cells[1], cells[2], cells[3], cells[4], cells[5], cells[6]
        );
    };
    row(out, ["", "Sum Square", "DF", "Mean Square", "F-Snedecor", "p-value", ""]);
    row(out, [labels[0], &ss[0], &df[0], &ms[0], &f, &p, significance_code(t.p_value)]);
    row(out, [labels[1], &ss[1], &df[1], &ms[1], "", "", ""]);
    row(out, [labels[2], &ss[2], "", "", "", "", ""]);
    let _ = writeln!(out, "---\n{LEGEND}");
}

fn render_posthoc(doc: &ReportDocument, out: &mut String) {
    let Some(table) = &doc.posthoc else { return };
    let groups: Vec<&str> = doc.groups.iter().map(|g| g.group_id.as_str()).collect();
    let k = groups.len();
    let cell = |i: usize, j: usize| {
        table
            .pair(groups[i], groups[j])
            .map(|c| (format_p(c.p_value), c.p_value))
    };

    let wl = groups[..k - 1].iter().map(|g| g.len()).max().unwrap_or(0);
    let widths: Vec<usize> = (0..k)
        .map(|j| {
            (0..j)
                .filter_map(|i| cell(i, j).map(|(s, _)| s.len()))
                .chain([groups[j].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();

    let mut header = format!("{:<wl$}", "");
    for (g, w) in groups.iter().zip(&widths) {
        let _ = write!(header, " {g:>w$}");
    }
    let _ = writeln!(out, "{header}    ");

    for (i, name) in groups[..k - 1].iter().enumerate() {
        let mut line = format!("{name:<wl$}");
        let mut row_min = f64::INFINITY;
        for (j, w) in widths.iter().enumerate() {
            let text = if j > i {
                cell(i, j).map_or_else(String::new, |(s, p)| {
                    row_min = row_min.min(p);
                    s
                })
            } else {
                String::new()
            };
            let _ = write!(line, " {text:>w$}");
        }
        let _ = writeln!(out, "{line} {:<3}", significance_code(row_min));
    }
    let _ = writeln!(out, "---\n{LEGEND}");
}
