//! Static SVG scatter rendering of diagram CSVs.
//!
//! Degree-0 points draw as red circles and degree-1 points as blue squares,
//! over unit axes and the diagonal reference line. Output bytes depend only
//! on the input CSV and the requested size.

use std::fmt::Write as _;
use std::path::Path;

use vinepd::io::read_diagram_csv;
use vinepd::persistence::{Degree, PersistenceDiagram};

use crate::CliError;

const MARGIN: f64 = 48.0;

pub fn cmd_plot(input: &Path, output: &Path, size: u32) -> Result<(), CliError> {
    if size < 96 {
        return Err(CliError::Usage("--size must be at least 96".to_string()));
    }
    if !input.exists() {
        return Err(CliError::MissingInput(format!(
            "diagram {} does not exist",
            input.display()
        )));
    }
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Other(format!("cannot read {}: {e}", input.display())))?;
    let pd = read_diagram_csv(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", input.display())))?;
    let svg = render_svg(&pd, size as f64);
    if let Some(parent) = output.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Other(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(output, svg)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", output.display())))?;
    Ok(())
}

pub fn render_svg(pd: &PersistenceDiagram, size: f64) -> String {
    let span = size - 2.0 * MARGIN;
    // Values are unit-normalized upstream; birth on x, death on y.
    let x = |v: f64| MARGIN + v * span;
    let y = |v: f64| size - MARGIN - v * span;
    let px = |v: f64| format!("{v:.2}");

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" viewBox=\"0 0 {0} {0}\">",
        px(size)
    );
    let _ = writeln!(
        svg,
        "  <!-- {} points, scale {}, {} filtration -->",
        pd.points.len(),
        pd.scale_index,
        pd.filtration
    );

    // Axes with quarter ticks.
    let axis_style = "stroke=\"#333333\" stroke-width=\"1\"";
    let _ = writeln!(
        svg,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {axis_style}/>",
        px(x(0.0)),
        px(y(0.0)),
        px(x(1.0)),
        px(y(0.0))
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {axis_style}/>",
        px(x(0.0)),
        px(y(0.0)),
        px(x(0.0)),
        px(y(1.0))
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            svg,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {axis_style}/>",
            px(x(tick)),
            px(y(0.0)),
            px(x(tick)),
            px(y(0.0) + 5.0)
        );
        let _ = writeln!(
            svg,
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {axis_style}/>",
            px(x(0.0) - 5.0),
            px(y(tick)),
            px(x(0.0)),
            px(y(tick))
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{tick}</text>",
            px(x(tick)),
            px(y(0.0) + 18.0)
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{tick}</text>",
            px(x(0.0) - 8.0),
            px(y(tick) + 4.0)
        );
    }
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">birth</text>",
        px(size / 2.0),
        px(size - 12.0)
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">death</text>",
        px(14.0),
        px(size / 2.0),
        px(size / 2.0)
    );

    // Diagonal reference line.
    let _ = writeln!(
        svg,
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>",
        px(x(0.0)),
        px(y(0.0)),
        px(x(1.0)),
        px(y(1.0))
    );

    for p in &pd.points {
        match p.degree {
            Degree::Zero => {
                let _ = writeln!(
                    svg,
                    "  <circle class=\"h0\" cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"red\" fill-opacity=\"0.75\"/>",
                    px(x(p.birth)),
                    px(y(p.death))
                );
            }
            Degree::One => {
                let _ = writeln!(
                    svg,
                    "  <rect class=\"h1\" x=\"{}\" y=\"{}\" width=\"7\" height=\"7\" fill=\"blue\" fill-opacity=\"0.75\"/>",
                    px(x(p.birth) - 3.5),
                    px(y(p.death) - 3.5)
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}
