//! Trace CSV: columns `n, r_n, s_n, bound_n` plus `dist_n` when a
//! reference solution is known. Absent values are written as empty
//! fields; floats use the shortest round-trip exponent form.

use vikit_core::IterationTrace;

fn fmt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_trace(trace: &IterationTrace, with_distance: bool) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["n", "r_n", "s_n", "bound_n"];
    if with_distance {
        header.push("dist_n");
    }
    w.write_record(&header)
        .expect("writing to a Vec cannot fail");
    for r in &trace.records {
        let mut row = vec![
            r.n.to_string(),
            fmt(Some(r.natural_residual)),
            fmt(r.operator_residual),
            fmt(r.shortcut_bound),
        ];
        if with_distance {
            row.push(fmt(r.distance));
        }
        w.write_record(&row).expect("writing to a Vec cannot fail");
    }
    w.into_inner().expect("flushing a Vec cannot fail")
}

/// Grid solutions from the brute-force oracle, one point per row.
pub fn write_points(points: &[Vec<f64>], dim: usize) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    w.write_record(&header)
        .expect("writing to a Vec cannot fail");
    for p in points {
        w.write_record(p.iter().map(|v| format!("{v:e}")))
            .expect("writing to a Vec cannot fail");
    }
    w.into_inner().expect("flushing a Vec cannot fail")
}
