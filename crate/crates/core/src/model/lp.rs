//! CPLEX LP text export.

use std::fmt::Write;

use super::{MilpModel, Relation, VarKind};

const LINE_WIDTH: usize = 78;

/// Renders `model` as LP text. Output depends only on the model, so two
/// exports of the same model are byte-identical.
pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {} routing model", model.variant);
    let _ = writeln!(out, "\\ instance {}", model.instance_digest);
    out.push_str("Minimize\n");
    write_row(&mut out, "obj", &model.objective, model, None);
    out.push_str("Subject To\n");
    for c in &model.constraints {
        let op = match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        write_row(&mut out, &c.name, &c.terms, model, Some((op, c.rhs)));
    }
    out.push_str("Bounds\n");
    for var in model.variables.iter().filter(|v| v.kind == VarKind::Continuous) {
        let _ = writeln!(out, " {} <= {} <= {}", num(var.lower), var.name, num(var.upper));
    }
    out.push_str("Binaries\n");
    let mut line = String::new();
    for var in model.variables.iter().filter(|v| v.kind == VarKind::Binary) {
        if !line.is_empty() && line.len() + var.name.len() + 1 > LINE_WIDTH {
            let _ = writeln!(out, "{line}");
            line.clear();
        }
        line.push(' ');
        line.push_str(&var.name);
    }
    if !line.is_empty() {
        let _ = writeln!(out, "{line}");
    }
    out.push_str("End\n");
    out
}

fn write_row(out: &mut String, name: &str, terms: &[(usize, f64)], model: &MilpModel, rel: Option<(&str, f64)>) {
    let mut line = format!(" {name}:");
    let mut pieces: Vec<String> = Vec::with_capacity(terms.len() + 1);
    for (n, &(var, coef)) in terms.iter().enumerate() {
        let var_name = &model.variables[var].name;
        let sign = if coef < 0.0 {
            "-"
        } else if n == 0 {
            ""
        } else {
            "+"
        };
        let mag = coef.abs();
        let body = if mag == 1.0 { var_name.clone() } else { format!("{} {var_name}", num(mag)) };
        pieces.push(if sign.is_empty() { body } else { format!("{sign} {body}") });
    }
    if pieces.is_empty() {
        // LP rows need at least one variable
        pieces.push(format!("0 {}", model.variables[0].name));
    }
    if let Some((op, rhs)) = rel {
        pieces.push(format!("{op} {}", num(rhs)));
    }
    for piece in pieces {
        if line.len() + piece.len() + 1 > LINE_WIDTH {
            let _ = writeln!(out, "{line}");
            line = String::from("  ");
        }
        line.push(' ');
        line.push_str(&piece);
    }
    let _ = writeln!(out, "{line}");
}

/// Shortest round-trip decimal; never exponent notation.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}
