//! Feasibility of a model once its binaries are fixed.
//!
//! With every `x` and `z` set, each row involves at most two arrival times
//! with opposite unit coefficients, so what remains is a system of difference
//! constraints. It is feasible iff its constraint graph has no negative cycle.

use super::{MilpModel, Relation, VarKind};
use crate::error::{Error, Result};

/// Whether the continuous variables can be chosen so that every row and bound
/// holds, with binaries read from `values` (continuous entries are ignored).
/// Errors if a row is not a difference constraint after fixing.
pub fn completes(model: &MilpModel, values: &[f64], tol: f64) -> Result<bool> {
    let mut slot = vec![usize::MAX; model.variables.len()];
    let mut n = 1;
    // edge (u, w, d) encodes s_w - s_u <= d; slot 0 is the constant zero
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (i, var) in model.variables.iter().enumerate() {
        if var.kind == VarKind::Continuous {
            slot[i] = n;
            edges.push((0, n, var.upper));
            edges.push((n, 0, -var.lower));
            n += 1;
        }
    }
    for row in &model.constraints {
        let mut rhs = row.rhs;
        let mut terms = Vec::with_capacity(2);
        for &(v, a) in &row.terms {
            if slot[v] == usize::MAX {
                rhs -= a * values[v];
            } else {
                terms.push((slot[v], a));
            }
        }
        let senses: &[f64] = match row.relation {
            Relation::Le => &[1.0],
            Relation::Ge => &[-1.0],
            Relation::Eq => &[1.0, -1.0],
        };
        for &s in senses {
            let b = s * rhs;
            match terms[..] {
                [] if b < -tol => return Ok(false),
                [] => {}
                [(p, a)] => {
                    let a = s * a;
                    if a > 0.0 {
                        edges.push((0, p, b / a));
                    } else {
                        edges.push((p, 0, -b / a));
                    }
                }
                [(p, a), (q, c)] if (a + c).abs() <= 1e-12 * a.abs() => {
                    // a (s_p - s_q) <= b
                    let a = s * a;
                    if a > 0.0 {
                        edges.push((q, p, b / a));
                    } else {
                        edges.push((p, q, -b / a));
                    }
                }
                _ => {
                    return Err(Error::Parameter(format!(
                        "row {} is not a difference constraint with binaries fixed",
                        row.name
                    )))
                }
            }
        }
    }
    // Bellman-Ford from a virtual source at distance 0 to every slot
    let mut dist = vec![0.0f64; n];
    for _ in 0..=n {
        let mut changed = false;
        for &(u, w, d) in &edges {
            if dist[u] + d < dist[w] - tol {
                dist[w] = dist[u] + d;
                changed = true;
            }
        }
        if !changed {
            return Ok(true);
        }
    }
    Ok(false)
}
