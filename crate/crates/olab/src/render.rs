//! Text, SVG and JSON renderings of grid scenarios.

use std::fmt::Write;

use serde_json::{json, Value};

use crate::coverage::CoverageConfig;
use crate::grid::{CellSet, ChainMode, DomainReport, GridScenario, GridSpacetime};

/// Domain depth of a cell: how many available columns contain it.
fn depth(report: &DomainReport, i: usize) -> usize {
    report.columns.iter().filter(|(_, s)| s.as_ref().is_some_and(|s| s[i])).count()
}

/// One character per cell, latest row first: `#` hole, `A` region, a digit
/// for the number of domains holding the cell, `.` for none.
pub fn ascii_layers(g: &GridSpacetime, a: &CellSet, report: &DomainReport) -> String {
    let p = g.params();
    let mut out = String::new();
    for t in (0..p.height as i64).rev() {
        for x in 0..p.width as i64 {
            let ch = match g.index_of(x, t) {
                None => '#',
                Some(i) if a[i] => 'A',
                Some(i) => match depth(report, i) {
                    0 => '.',
                    d => char::from_digit(d as u32, 10).unwrap_or('+'),
                },
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}

pub fn ascii_legend(report: &DomainReport) -> String {
    let names: Vec<&str> = report.columns.iter().filter(|(_, s)| s.is_some()).map(|(n, _)| n.as_str()).collect();
    format!("digits: number of domains holding the cell, out of {} ({})\n", names.len(), names.join(", "))
}

const CELL: i64 = 24;

/// Cells as squares, shaded by domain depth, with dashed past cones from
/// each cell of `u`.
pub fn svg(g: &GridSpacetime, a: &CellSet, u: &CellSet, report: &DomainReport) -> String {
    let p = g.params();
    let (w, h) = (p.width as i64 * CELL, p.height as i64 * CELL);
    let cols = report.columns.iter().filter(|(_, s)| s.is_some()).count().max(1);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    for t in 0..p.height as i64 {
        for x in 0..p.width as i64 {
            let (px, py) = (x * CELL, h - (t + 1) * CELL);
            let fill = match g.index_of(x, t) {
                None => "#333333".to_string(),
                Some(i) if a[i] => "#d9534f".to_string(),
                Some(i) => {
                    let shade = 255 - (depth(report, i) * 150 / cols) as u32;
                    format!("#{shade:02x}{shade:02x}ff")
                }
            };
            let _ = writeln!(
                s,
                r##"  <rect x="{px}" y="{py}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#999999" stroke-width="1"/>"##
            );
        }
    }
    let slope = p.down_slope as i64;
    for i in (0..u.len()).filter(|&i| u[i]) {
        let (x, t) = g.cell(i);
        let (cx, cy) = (x * CELL + CELL / 2, h - t * CELL - CELL / 2);
        for dir in [-1, 1] {
            // Run `t` rows down, moving `t / slope` columns sideways.
            let ex = cx + dir * t * CELL / slope;
            let ey = cy + t * CELL;
            let _ = writeln!(
                s,
                r##"  <line x1="{cx}" y1="{cy}" x2="{ex}" y2="{ey}" stroke="#000000" stroke-width="1.5" stroke-dasharray="4 3"/>"##
            );
        }
        let _ = writeln!(s, r##"  <circle cx="{cx}" cy="{cy}" r="4" fill="#000000"/>"##);
    }
    s.push_str("</svg>\n");
    s
}

pub fn bounds_json(cfg: &CoverageConfig) -> Value {
    json!({
        "max_target_path_len": cfg.max_target_path_len.map_or(json!("2*|opens|"), |n| json!(n)),
        "max_refinement_len": cfg.max_refinement_len.map_or(json!("(len+1)*(|steps|+1)"), |n| json!(n)),
        "budget": cfg.budget,
    })
}

/// Full scenario report: grid, regions, chain covers of `U` and domains.
pub fn scenario_json(s: &GridScenario, cfg: &CoverageConfig, report: &DomainReport) -> Value {
    let g = &s.grid;
    let cells = |set: &CellSet| g.coords(set).into_iter().map(|(x, t)| [x, t]).collect::<Vec<_>>();
    let chain_cover = |mode: ChainMode| {
        let c = g.chain_cover_minus(&s.a, &s.u, mode);
        json!({
            "mode": mode.name(),
            "holds": c.holds,
            "outside_past": c.outside_past,
            "witness": c.witness.map(|w| w.cells.iter().map(|&i| { let (x, t) = g.cell(i); [x, t] }).collect::<Vec<_>>()),
        })
    };
    json!({
        "bounds": bounds_json(cfg),
        "scenario": s.name,
        "grid": g.to_json(),
        "regions": { "A": cells(&s.a), "U": cells(&s.u) },
        "chain_cover": [chain_cover(ChainMode::Causal), chain_cover(ChainMode::Chronological)],
        "report": report.to_json(g),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::grid_scenario;

    #[test]
    fn ascii_marks_holes_and_region() {
        let s = grid_scenario("CONE_CUT").unwrap();
        let r = s.grid.domains_all(&s.a, &CoverageConfig::default());
        let art = ascii_layers(&s.grid, &s.a, &r);
        let rows: Vec<&str> = art.lines().collect();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[4], ".AAAAA.");
        assert_eq!(&rows[3][2..5], "###");
        let svg = svg(&s.grid, &s.a, &s.u, &r);
        assert!(svg.contains("stroke-dasharray"));
    }
}
