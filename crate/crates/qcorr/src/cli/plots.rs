//! Gnuplot scripts emitted next to the figure CSVs. The binary never
//! renders images itself, so every artifact stays plain text and diff-able.
//!
//! Family overlay files share the curve schema:
//! parameter,R,D,discord,cc,concurrence,chsh (columns 1..7).

pub(crate) const FIG1: &str = r#"# discord vs geometric discord with family overlays
set datafile separator ","
set xlabel "geometric discord D"
set ylabel "discord (bits)"
set key top left
set xrange [0:0.55]
plot \
  "fig1.csv" skip 1 using 2:3 with points pt 2 ps 0.4 title "mixed samples", \
  "fig1_werner.csv" skip 1 using 3:4 with lines lw 2 dashtype 3 title "werner", \
  "fig1_mems.csv" skip 1 using 3:4 with lines lw 2 dashtype 2 title "mems", \
  x with lines dashtype 4 title "discord = D"
"#;

pub(crate) fn fig2_script(targets: &[f64], pure_analytic: bool) -> String {
    let mut s = String::from(
        r#"# geometric discord density, all vs ppt states, fixed-R inset
set datafile separator ","
set multiplot
set xlabel "geometric discord D"
set ylabel "density"
set key top right
plot \
  "fig2.csv" skip 1 using 1:3 with lines lw 2 title "all states", \
  "fig2.csv" skip 1 using 1:5 with lines lw 2 dashtype 2 title "ppt states""#,
    );
    if pure_analytic {
        s.push_str(
            ", \\\n  \"fig2_pure_analytic.csv\" skip 1 using 1:2 with lines dashtype 3 title \"pure analytic\"",
        );
    }
    s.push_str(
        "\nset origin 0.45, 0.42\nset size 0.5, 0.5\nset xlabel \"D\"\nset ylabel \"\"\nset key off\nplot \\\n",
    );
    let inset: Vec<String> = targets
        .iter()
        .map(|t| {
            format!(
                "  \"fig2_inset.csv\" skip 1 using (column(1) == {t} ? $2 : NaN):4 with lines title \"R = {t}\""
            )
        })
        .collect();
    s.push_str(&inset.join(", \\\n"));
    s.push_str("\nunset multiplot\n");
    s
}

pub(crate) const FIG3: &str = r#"# geometric discord vs participation ratio with envelope overlays
set datafile separator ","
set xlabel "participation ratio R"
set ylabel "geometric discord D"
set key top right
plot \
  "fig3.csv" skip 1 using 2:3 with points pt 2 ps 0.4 title "mixed samples", \
  "fig3_werner.csv" skip 1 using 2:3 with lines lw 2 title "werner", \
  "fig3_mems.csv" skip 1 using 2:3 with lines lw 2 dashtype 2 title "mems"
"#;

pub(crate) const FIG4: &str = r#"# binned mean geometric discord vs participation ratio
set datafile separator ","
set xlabel "participation ratio R"
set ylabel "mean geometric discord"
set key top right
# pure states (R = 1) have analytic mean D = 0.2
plot \
  "fig4.csv" skip 1 using 1:3:4 with yerrorbars pt 0 notitle, \
  "fig4.csv" skip 1 using 1:3 with lines lw 2 title "all states", \
  "fig4.csv" skip 1 using 1:6 with lines lw 2 dashtype 2 title "ppt states"
"#;

pub(crate) const FIG5: &str = r#"# discord density, all vs ppt states, classical-correlations inset
set datafile separator ","
set multiplot
set xlabel "discord (bits)"
set ylabel "density"
set key top right
plot \
  "fig5.csv" skip 1 using 1:3 with lines lw 2 title "all states", \
  "fig5.csv" skip 1 using 1:5 with lines lw 2 dashtype 2 title "ppt states"
set origin 0.45, 0.42
set size 0.5, 0.5
set xlabel "classical correlations (bits)"
set ylabel ""
set key off
plot "fig5_cc.csv" skip 1 using 1:3 with lines lw 2
unset multiplot
"#;

pub(crate) const FIG6: &str = r#"# discord vs participation ratio with family overlays and mean inset
set datafile separator ","
set multiplot
set xlabel "participation ratio R"
set ylabel "discord (bits)"
set key top right
plot \
  "fig6.csv" skip 1 using 2:3 with points pt 2 ps 0.4 title "mixed samples", \
  "fig6_werner.csv" skip 1 using 2:4 with lines lw 2 title "werner", \
  "fig6_mems.csv" skip 1 using 2:4 with lines lw 2 dashtype 2 title "mems"
set origin 0.45, 0.42
set size 0.5, 0.5
set xlabel "R"
set ylabel "mean discord"
set key off
plot \
  "fig6_mean.csv" skip 1 using 1:3 with lines lw 2, \
  1 / (3 * log(2)) with lines dashtype 3
unset multiplot
"#;

pub(crate) const FIG7: &str = r#"# chsh maximum vs geometric discord with bounding family curves
set datafile separator ","
set xlabel "geometric discord D"
set ylabel "chsh maximum"
set key top left
plot \
  "fig7.csv" skip 1 using 2:3 with points pt 2 ps 0.4 title "mixed samples", \
  "fig7_werner.csv" skip 1 using 3:7 with lines lw 2 title "werner (lower)", \
  "fig7_mnms.csv" skip 1 using 3:7 with lines lw 2 dashtype 2 title "mnms (upper)", \
  2 with lines dashtype 3 title "local bound", \
  2 * sqrt(2) with lines dashtype 4 title "tsirelson bound"
"#;
