use std::fmt::Write;

use super::{LinearForm, LinearProgram};

fn write_form(out: &mut String, form: &LinearForm, names: &dyn Fn(usize) -> String) {
    if form.is_empty() {
        out.push_str(" 0 ");
        out.push_str(&names(0));
        return;
    }
    for (k, &(v, c)) in form.iter().enumerate() {
        let sign = if c < 0.0 { '-' } else { '+' };
        if k == 0 && sign == '+' {
            let _ = write!(out, " {:?} {}", c.abs(), names(v));
        } else {
            let _ = write!(out, " {sign} {:?} {}", c.abs(), names(v));
        }
    }
}

/// Renders the program in CPLEX LP text format. `names` maps a variable
/// index to an identifier (letters, digits, `_`); it must be injective.
pub fn write_cplex_lp(lp: &LinearProgram, names: &dyn Fn(usize) -> String) -> String {
    let mut out = String::new();
    out.push_str("\\ generated by pwa-lyap\nMinimize\n obj:");
    write_form(&mut out, lp.objective(), names);
    out.push_str("\nSubject To\n");
    for (i, c) in lp.constraints().iter().enumerate() {
        let _ = write!(out, " c{i}:");
        write_form(&mut out, &c.form, names);
        let _ = writeln!(out, " {} {:?}", c.relation.symbol(), c.rhs);
    }
    out.push_str("Bounds\n");
    for (v, lb) in lp.lower_bounds().iter().enumerate() {
        match lb {
            Some(l) => {
                let _ = writeln!(out, " {} >= {:?}", names(v), l);
            }
            None => {
                let _ = writeln!(out, " {} free", names(v));
            }
        }
    }
    out.push_str("End\n");
    out
}
