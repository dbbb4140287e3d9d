//! Text exports of nodal displacement fields.

use std::fmt::Write;

use super::Field;
use crate::mesh::Mesh;
use crate::scalar::Scalar;

/// CSV with header `x,y,ux,uy`, one row per vertex, 17 significant digits.
pub fn nodal_csv<T: Scalar>(mesh: &Mesh<T>, u: &Field<T>) -> String {
    let mut out = String::from("x,y,ux,uy\n");
    for (v, p) in mesh.vertices().iter().enumerate() {
        let d = u.at(v);
        let f = |x: T| x.to_f64_lossy();
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", f(p[0]), f(p[1]), f(d[0]), f(d[1])).unwrap();
    }
    out
}

/// Legacy ASCII VTK unstructured grid with a `displacement` point vector.
pub fn vtk_legacy<T: Scalar>(mesh: &Mesh<T>, u: &Field<T>) -> String {
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\ndisplacement\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {nv} double").unwrap();
    for p in mesh.vertices() {
        writeln!(out, "{:.16e} {:.16e} 0", p[0].to_f64_lossy(), p[1].to_f64_lossy()).unwrap();
    }
    writeln!(out, "CELLS {nt} {}", 4 * nt).unwrap();
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(out, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        out.push_str("5\n");
    }
    writeln!(out, "POINT_DATA {nv}\nVECTORS displacement double").unwrap();
    for v in 0..nv {
        let d = u.at(v);
        writeln!(out, "{:.16e} {:.16e} 0", d[0].to_f64_lossy(), d[1].to_f64_lossy()).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::FeSpace;
    use crate::mesh::generate_rect_mesh;

    #[test]
    fn csv_round_trips_values() {
        let m = generate_rect_mesh(0.0f64, 1.0, 0.0, 1.0, 2).unwrap();
        let s = FeSpace::new(&m);
        let u = s.interpolate(|x| [0.1 + x[0] / 3.0, -x[1]]);
        let csv = nodal_csv(&m, &u);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,y,ux,uy"));
        for (v, l) in lines.enumerate() {
            let f: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            assert_eq!([f[0], f[1]], m.vertices()[v]);
            assert_eq!([f[2], f[3]], u.at(v));
        }
    }

    #[test]
    fn vtk_has_expected_sections() {
        let m = generate_rect_mesh(0.0f64, 1.0, 0.0, 1.0, 1).unwrap();
        let u = FeSpace::new(&m).zero_field();
        let vtk = vtk_legacy(&m, &u);
        assert!(vtk.contains("POINTS 4 double"));
        assert!(vtk.contains("CELLS 2 8"));
        assert!(vtk.contains("VECTORS displacement double"));
    }
}
