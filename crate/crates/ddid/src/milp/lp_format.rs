//! LP-format model files and engine solution files.
//!
//! The writer targets the widely shared subset of the CPLEX/Gurobi LP text
//! format (sections `Minimize`/`Maximize`, `Subject To`, `Bounds`,
//! `Binaries`, `End`; objective constants as bare numeric terms). Names that
//! the format cannot carry are mangled through a deterministic, reversible
//! map recomputable from the model alone, so the solution parser can undo it.
//!
//! [`parse_solution_file`] accepts the two common open-source conventions:
//! HiGHS `--solution_file` output (`name value` pairs under a `# Columns`
//! header) and CBC `solution` files (`index name value reduced-cost` rows
//! after a one-line status banner). Values for variables absent from the file
//! default to 0 with a warning; the objective is recomputed from the parsed
//! values against the model, which also makes objective constants engine
//! independent.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::MilpError;
use crate::milp::model::{
    Cmp, MilpModel, MilpSolution, ObjSense, SolveStatus, VarId, VarKind,
};

/// Reserved words that may not be used verbatim as LP names.
const RESERVED: &[&str] = &[
    "minimize", "maximize", "min", "max", "subject", "st", "s.t.", "such", "bounds", "bound",
    "binary", "binaries", "bin", "general", "generals", "gen", "end", "free", "inf", "infinity",
];

fn char_ok(c: char, first: bool) -> bool {
    if first {
        c.is_ascii_alphabetic() || c == '_'
    } else {
        c.is_ascii_alphanumeric() || c == '_'
    }
}

fn name_ok(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else { return false };
    if !char_ok(first, true) || !chars.all(|c| char_ok(c, false)) {
        return false;
    }
    // `e`/`E` followed by digits reads as a number in some parsers.
    let rest = &name[1..];
    if (first == 'e' || first == 'E') && !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
    {
        return false;
    }
    !RESERVED.contains(&name.to_ascii_lowercase().as_str())
}

fn sanitize(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 1);
    for (i, c) in name.chars().enumerate() {
        if char_ok(c, i == 0) {
            out.push(c);
        } else if i == 0 && char_ok(c, false) {
            out.push('v');
            out.push(c);
        } else {
            out.push('_');
        }
    }
    if out.is_empty() {
        out.push('v');
    }
    out
}

/// Deterministic, collision-free file names for the model's variables, in
/// variable order. Writer and solution parser both derive the map from the
/// model, which makes the mangling reversible without a side channel.
pub fn file_names(model: &MilpModel) -> Vec<String> {
    let mut used: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::with_capacity(model.num_vars());
    for (i, v) in model.variables.iter().enumerate() {
        let mut candidate =
            if name_ok(&v.name) { v.name.clone() } else { sanitize(&v.name) };
        if !name_ok(&candidate) {
            candidate = format!("v{i}");
        }
        while used.contains_key(&candidate) {
            candidate = format!("{candidate}_{i}");
        }
        used.insert(candidate.clone(), i);
        out.push(candidate);
    }
    out
}

fn push_terms(line: &mut String, terms: &[(VarId, f64)], names: &[String]) {
    let mut first = true;
    for (VarId(i), c) in terms {
        if *c == 0.0 {
            continue;
        }
        if first {
            if *c < 0.0 {
                let _ = write!(line, "- {} {}", fmt_f64(-c), names[*i]);
            } else {
                let _ = write!(line, "{} {}", fmt_f64(*c), names[*i]);
            }
            first = false;
        } else if *c < 0.0 {
            let _ = write!(line, " - {} {}", fmt_f64(-c), names[*i]);
        } else {
            let _ = write!(line, " + {} {}", fmt_f64(*c), names[*i]);
        }
    }
    if first {
        line.push('0');
    }
}

fn fmt_f64(v: f64) -> String {
    // Shortest representation that round-trips the double.
    format!("{v}")
}

/// Emit the model as LP-format text.
pub fn emit_model_file(model: &MilpModel) -> Result<String, MilpError> {
    model.validate()?;
    let names = file_names(model);
    let mut out = String::new();
    let _ = writeln!(out, "\\ model: {}", model.name);
    for (i, v) in model.variables.iter().enumerate() {
        if names[i] != v.name {
            let _ = writeln!(out, "\\ name-map: {} {}", names[i], v.name.escape_default());
        }
    }
    out.push_str(match model.obj_sense {
        ObjSense::Min => "Minimize\n",
        ObjSense::Max => "Maximize\n",
    });
    let mut obj = String::from(" obj: ");
    push_terms(&mut obj, &model.obj_terms, &names);
    if model.obj_constant != 0.0 {
        if model.obj_constant < 0.0 {
            let _ = write!(obj, " - {}", fmt_f64(-model.obj_constant));
        } else {
            let _ = write!(obj, " + {}", fmt_f64(model.obj_constant));
        }
    }
    out.push_str(&obj);
    out.push('\n');
    out.push_str("Subject To\n");
    for (ci, c) in model.constraints.iter().enumerate() {
        let label = if c.name.is_empty() || !name_ok(&c.name) {
            format!("c{ci}")
        } else {
            c.name.clone()
        };
        let mut line = format!(" {label}: ");
        push_terms(&mut line, &c.terms, &names);
        let sense = match c.sense {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        };
        let _ = write!(line, " {} {}", sense, fmt_f64(c.rhs));
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("Bounds\n");
    for (i, v) in model.variables.iter().enumerate() {
        if v.kind == VarKind::Binary && v.lo == 0.0 && v.hi == 1.0 {
            continue;
        }
        let line = match (v.lo.is_finite(), v.hi.is_finite()) {
            (true, true) => {
                format!(" {} <= {} <= {}", fmt_f64(v.lo), names[i], fmt_f64(v.hi))
            }
            (true, false) => format!(" {} >= {}", names[i], fmt_f64(v.lo)),
            (false, true) => format!(" {} <= {}", names[i], fmt_f64(v.hi)),
            (false, false) => format!(" {} free", names[i]),
        };
        out.push_str(&line);
        out.push('\n');
    }
    let binaries: Vec<&str> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(i, _)| names[i].as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(16) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

/// Parse LP-format text back into a model. Used for writer round-trip checks
/// and for loading hand-written models in the CLI.
pub fn read_lp(text: &str) -> Result<MilpModel, MilpError> {
    #[derive(PartialEq)]
    enum Section {
        Preamble,
        Objective,
        Constraints,
        Bounds,
        Binaries,
        Done,
    }
    let mut sense = ObjSense::Min;
    let mut section = Section::Preamble;
    let mut obj_text = String::new();
    let mut constraint_text: Vec<String> = Vec::new();
    let mut bound_lines: Vec<String> = Vec::new();
    let mut binary_names: Vec<String> = Vec::new();

    for raw in text.lines() {
        let line = match raw.find('\\') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lower = trimmed.to_ascii_lowercase();
        let header = match lower.as_str() {
            "minimize" | "min" | "minimise" => Some((Section::Objective, Some(ObjSense::Min))),
            "maximize" | "max" | "maximise" => Some((Section::Objective, Some(ObjSense::Max))),
            "subject to" | "such that" | "st" | "s.t." => Some((Section::Constraints, None)),
            "bounds" | "bound" => Some((Section::Bounds, None)),
            "binaries" | "binary" | "bin" => Some((Section::Binaries, None)),
            "general" | "generals" | "gen" => Some((Section::Binaries, None)),
            "end" => Some((Section::Done, None)),
            _ => None,
        };
        if let Some((next, s)) = header {
            if let Some(s) = s {
                sense = s;
            }
            section = next;
            continue;
        }
        match section {
            Section::Objective => {
                obj_text.push(' ');
                obj_text.push_str(trimmed);
            }
            Section::Constraints => {
                // A new row starts with a label; continuation lines attach to
                // the previous row.
                if trimmed.contains(':') || constraint_text.is_empty() {
                    constraint_text.push(trimmed.to_string());
                } else {
                    let last = constraint_text.last_mut().unwrap();
                    last.push(' ');
                    last.push_str(trimmed);
                }
            }
            Section::Bounds => bound_lines.push(trimmed.to_string()),
            Section::Binaries => {
                binary_names.extend(trimmed.split_whitespace().map(str::to_string))
            }
            Section::Preamble | Section::Done => {}
        }
    }

    let mut model = MilpModel::new("lp-file", sense);
    let mut ensure_var = |model: &mut MilpModel, name: &str| -> VarId {
        match model.var_by_name(name) {
            Some(id) => id,
            None => model.add_var(name.to_string(), f64::NEG_INFINITY, f64::INFINITY),
        }
    };

    // Objective: strip the label, then parse a linear expression.
    let obj_body = match obj_text.find(':') {
        Some(pos) => obj_text[pos + 1..].to_string(),
        None => obj_text,
    };
    let (terms, constant) = parse_expression(&obj_body, &mut model, &mut ensure_var)?;
    model.obj_terms = terms;
    model.obj_constant = constant;

    for row in &constraint_text {
        let (label, body) = match row.find(':') {
            Some(pos) => (row[..pos].trim().to_string(), &row[pos + 1..]),
            None => (String::new(), row.as_str()),
        };
        let (sense, split) = if let Some(p) = body.find("<=") {
            (Cmp::Le, (body[..p].to_string(), body[p + 2..].to_string()))
        } else if let Some(p) = body.find(">=") {
            (Cmp::Ge, (body[..p].to_string(), body[p + 2..].to_string()))
        } else if let Some(p) = body.find('=') {
            (Cmp::Eq, (body[..p].to_string(), body[p + 1..].to_string()))
        } else {
            return Err(MilpError::ParseSolution(format!("constraint without sense: {row}")));
        };
        let (terms, constant) = parse_expression(&split.0, &mut model, &mut ensure_var)?;
        let rhs: f64 = split
            .1
            .trim()
            .parse()
            .map_err(|_| MilpError::ParseSolution(format!("bad rhs in row: {row}")))?;
        model.add_constr(label, terms, sense, rhs - constant);
    }

    for line in &bound_lines {
        parse_bound_line(line, &mut model, &mut ensure_var)?;
    }
    for name in &binary_names {
        let id = ensure_var(&mut model, name);
        let v = &mut model.variables[id.0];
        v.kind = VarKind::Binary;
        if !v.lo.is_finite() {
            v.lo = 0.0;
        }
        if !v.hi.is_finite() {
            v.hi = 1.0;
        }
    }
    // Unbounded-below continuous variables default to 0 per LP conventions.
    for v in &mut model.variables {
        if v.kind == VarKind::Continuous && v.lo == f64::NEG_INFINITY && !v.hi.is_finite() {
            // Only variables that never appeared in Bounds: LP default is lo = 0.
            if !v.name.starts_with("__free") {
                v.lo = 0.0;
            }
        }
    }
    Ok(model)
}

fn parse_expression(
    body: &str,
    model: &mut MilpModel,
    ensure_var: &mut impl FnMut(&mut MilpModel, &str) -> VarId,
) -> Result<(Vec<(VarId, f64)>, f64), MilpError> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    let mut sign = 1.0;
    let mut pending: Option<f64> = None;
    for token in body.replace('+', " + ").replace('-', " - ").split_whitespace() {
        match token {
            "+" => {
                if let Some(c) = pending.take() {
                    constant += sign * c;
                }
                sign = 1.0;
            }
            "-" => {
                if let Some(c) = pending.take() {
                    constant += sign * c;
                }
                sign = -1.0;
            }
            tok => {
                if let Ok(num) = tok.parse::<f64>() {
                    match pending.take() {
                        // Two numbers in a row: the first was a constant.
                        Some(c) => {
                            constant += sign * c;
                            pending = Some(num);
                        }
                        None => pending = Some(num),
                    }
                } else {
                    let coeff = pending.take().unwrap_or(1.0);
                    let id = ensure_var(model, tok);
                    terms.push((id, sign * coeff));
                    sign = 1.0;
                }
            }
        }
    }
    if let Some(c) = pending.take() {
        constant += sign * c;
    }
    Ok((terms, constant))
}

fn parse_bound_line(
    line: &str,
    model: &mut MilpModel,
    ensure_var: &mut impl FnMut(&mut MilpModel, &str) -> VarId,
) -> Result<(), MilpError> {
    let parse_num = |tok: &str| -> Option<f64> {
        match tok.to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
            "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
            _ => tok.parse().ok(),
        }
    };
    let tokens: Vec<&str> = line.split_whitespace().collect();
    match tokens.as_slice() {
        [name, kw] if kw.eq_ignore_ascii_case("free") => {
            let id = ensure_var(model, name);
            model.variables[id.0].lo = f64::NEG_INFINITY;
            model.variables[id.0].hi = f64::INFINITY;
            Ok(())
        }
        [lo, le1, name, le2, hi] if *le1 == "<=" && *le2 == "<=" => {
            let id = ensure_var(model, name);
            model.variables[id.0].lo =
                parse_num(lo).ok_or_else(|| MilpError::ParseSolution(line.to_string()))?;
            model.variables[id.0].hi =
                parse_num(hi).ok_or_else(|| MilpError::ParseSolution(line.to_string()))?;
            Ok(())
        }
        [name, op, num] => {
            let id = ensure_var(model, name);
            let v = parse_num(num).ok_or_else(|| MilpError::ParseSolution(line.to_string()))?;
            match *op {
                "<=" => model.variables[id.0].hi = v,
                ">=" => model.variables[id.0].lo = v,
                "=" => {
                    model.variables[id.0].lo = v;
                    model.variables[id.0].hi = v;
                }
                _ => return Err(MilpError::ParseSolution(format!("bad bound line: {line}"))),
            }
            Ok(())
        }
        _ => Err(MilpError::ParseSolution(format!("bad bound line: {line}"))),
    }
}

/// Parse an engine solution file against the model it solves.
///
/// Variables not mentioned in the file default to 0 with a warning. The
/// objective is recomputed from the parsed values, so objective constants and
/// engine-side scaling cannot skew it.
pub fn parse_solution_file(model: &MilpModel, text: &str) -> Result<MilpSolution, MilpError> {
    let names = file_names(model);
    let index_of: HashMap<&str, usize> =
        names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let original_of: HashMap<&str, usize> =
        model.variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();

    let mut status: Option<SolveStatus> = None;
    let mut parsed: HashMap<usize, f64> = HashMap::new();
    let mut in_rows_section = false;

    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with('#') {
            // HiGHS section markers: "# Columns n", "# Rows m", "# Basis"...
            in_rows_section = !lower.starts_with("# columns");
            continue;
        }
        if status.is_none() {
            if lower.contains("infeasible") {
                status = Some(SolveStatus::Infeasible);
                continue;
            } else if lower.contains("unbounded") {
                status = Some(SolveStatus::Unbounded);
                continue;
            } else if lower.contains("optimal") {
                status = Some(SolveStatus::Optimal);
                continue;
            } else if lower.contains("stopped") || lower.contains("limit") {
                status = Some(SolveStatus::FeasibleAtLimit);
                continue;
            }
        }
        if in_rows_section {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let pair: Option<(&str, f64)> = match tokens.as_slice() {
            // HiGHS columns section: `name value`
            [name, value] => value.parse().ok().map(|v| (*name, v)),
            // CBC rows: `index name value reduced_cost`
            [idx, name, value, _rc] if idx.parse::<usize>().is_ok() => {
                value.parse().ok().map(|v| (*name, v))
            }
            _ => None,
        };
        if let Some((name, value)) = pair {
            let idx = index_of.get(name).or_else(|| original_of.get(name));
            if let Some(&i) = idx {
                parsed.insert(i, value);
            }
        }
    }

    let status = status.unwrap_or(SolveStatus::Error);
    if !status.has_solution() {
        return Ok(MilpSolution {
            status,
            objective: f64::NAN,
            best_bound: f64::NAN,
            values: HashMap::new(),
            values_by_index: Vec::new(),
            wall_time_s: 0.0,
            nodes: None,
            warnings: Vec::new(),
        });
    }

    let mut warnings = Vec::new();
    let mut values_by_index = vec![0.0; model.num_vars()];
    for (i, v) in model.variables.iter().enumerate() {
        match parsed.get(&i) {
            Some(x) => values_by_index[i] = *x,
            None => warnings.push(format!("variable {} missing from solution file; defaulting to 0", v.name)),
        }
    }
    let objective = model.objective_at(&values_by_index);
    let values = model
        .variables
        .iter()
        .zip(&values_by_index)
        .map(|(v, x)| (v.name.clone(), *x))
        .collect();
    Ok(MilpSolution {
        status,
        objective,
        best_bound: objective,
        values,
        values_by_index,
        wall_time_s: 0.0,
        nodes: None,
        warnings,
    })
}

/// Render a solution in the HiGHS text convention; used by tests to exercise
/// the emit → solve → parse round trip without an external binary.
pub fn format_solution_file(model: &MilpModel, solution: &MilpSolution) -> String {
    let names = file_names(model);
    let mut out = String::from("Model status\nOptimal\n\n# Primal solution values\nFeasible\n");
    let _ = writeln!(out, "Objective {}", fmt_f64(solution.objective));
    let _ = writeln!(out, "# Columns {}", model.num_vars());
    for (i, name) in names.iter().enumerate() {
        let _ = writeln!(out, "{} {}", name, fmt_f64(solution.values_by_index[i]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::model::ObjSense;

    fn toy_model() -> MilpModel {
        let mut m = MilpModel::new("toy", ObjSense::Min);
        let x = m.add_var("x", 0.0, 2.5);
        let b = m.add_binary("b");
        m.set_obj(x, 1.5);
        m.set_obj(b, -2.0);
        m.obj_constant = 7.25;
        m.add_constr("cap", vec![(x, 1.0), (b, 3.0)], Cmp::Le, 4.0);
        m.add_constr("floor", vec![(x, 2.0)], Cmp::Ge, 1.0);
        m
    }

    #[test]
    fn model_round_trips_through_lp_text() {
        let m = toy_model();
        let text = emit_model_file(&m).unwrap();
        let back = read_lp(&text).unwrap();
        assert_eq!(back.variables.len(), 2);
        assert_eq!(back.constraints.len(), 2);
        assert_eq!(back.obj_constant, m.obj_constant);
        let bx = back.var_by_name("x").unwrap();
        assert_eq!(back.variables[bx.0].hi, 2.5);
        let bb = back.var_by_name("b").unwrap();
        assert_eq!(back.variables[bb.0].kind, VarKind::Binary);
        // Same objective on the same point.
        assert!((back.objective_at(&[1.0, 1.0]) - m.objective_at(&[1.0, 1.0])).abs() < 1e-12);
    }

    #[test]
    fn zero_constraint_model_emits_bounds_only() {
        let mut m = MilpModel::new("empty", ObjSense::Min);
        let x = m.add_var("x", -1.0, 1.0);
        m.set_obj(x, 1.0);
        let text = emit_model_file(&m).unwrap();
        assert!(text.contains("Bounds"));
        let back = read_lp(&text).unwrap();
        assert!(back.constraints.is_empty());
        assert_eq!(back.variables[0].lo, -1.0);
    }

    #[test]
    fn constant_objective_survives_round_trip() {
        let mut m = MilpModel::new("const", ObjSense::Max);
        m.add_var("x", 0.0, 1.0);
        m.obj_constant = -3.5;
        let text = emit_model_file(&m).unwrap();
        let back = read_lp(&text).unwrap();
        assert_eq!(back.obj_constant, -3.5);
        assert_eq!(back.obj_sense, ObjSense::Max);
    }

    #[test]
    fn illegal_names_are_mangled_reversibly() {
        let mut m = MilpModel::new("mangle", ObjSense::Min);
        m.add_var("2bad name", 0.0, 1.0);
        m.add_var("e12", 0.0, 1.0);
        m.add_var("free", 0.0, 1.0);
        let names = file_names(&m);
        assert_eq!(names.len(), 3);
        for n in &names {
            assert!(name_ok(n), "mangled name {n} still illegal");
        }
        // Distinct and recomputable.
        let again = file_names(&m);
        assert_eq!(names, again);
        assert_eq!(names.iter().collect::<std::collections::HashSet<_>>().len(), 3);
        // Solution values flow back to the original names.
        let sol_text = format!(
            "Model status\nOptimal\n# Columns 3\n{} 1\n{} 0.25\n{} 0\n",
            names[0], names[1], names[2]
        );
        let sol = parse_solution_file(&m, &sol_text).unwrap();
        assert_eq!(sol.values["2bad name"], 1.0);
        assert_eq!(sol.values["e12"], 0.25);
    }

    #[test]
    fn missing_variable_defaults_to_zero_with_warning() {
        let m = toy_model();
        let sol = parse_solution_file(&m, "Optimal - objective value 1.0\n0 x 1.0 0\n").unwrap();
        assert_eq!(sol.values["x"], 1.0);
        assert_eq!(sol.values["b"], 0.0);
        assert_eq!(sol.warnings.len(), 1);
        // Objective recomputed from values: 1.5*1 - 2*0 + 7.25.
        assert!((sol.objective - 8.75).abs() < 1e-12);
    }

    #[test]
    fn cbc_style_banner_maps_statuses() {
        let m = toy_model();
        let inf = parse_solution_file(&m, "Infeasible - objective value 0\n").unwrap();
        assert_eq!(inf.status, SolveStatus::Infeasible);
        let stopped =
            parse_solution_file(&m, "Stopped on time limit - objective value 3\n0 x 2 0\n")
                .unwrap();
        assert_eq!(stopped.status, SolveStatus::FeasibleAtLimit);
    }
}
