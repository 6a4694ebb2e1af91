//! Brute-force reference implementations of the limiter formulas.

use smuas::Mesh;

/// Gradient of the linear interpolant on cell `c` by Cramer's rule.
pub fn oracle_gradient(mesh: &Mesh, c: usize, u: &[f64]) -> [f64; 2] {
    let v = mesh.cells()[c].vertices;
    let p = v.map(|k| mesh.vertices()[k]);
    let (a, b) = (
        [p[1][0] - p[0][0], p[1][1] - p[0][1]],
        [p[2][0] - p[0][0], p[2][1] - p[0][1]],
    );
    let (du1, du2) = (u[v[1]] - u[v[0]], u[v[2]] - u[v[0]]);
    let det = a[0] * b[1] - a[1] * b[0];
    [(du1 * b[1] - du2 * a[1]) / det, (a[0] * du2 - b[0] * du1) / det]
}

/// Smallest incident cell containing `x_i + δ (x_i - x_j)` for small `δ`,
/// by barycentric coordinates.
pub fn oracle_upwind(mesh: &Mesh, i: usize, j: usize) -> Option<usize> {
    let xi = mesh.vertices()[i];
    let xj = mesh.vertices()[j];
    let delta = 1e-3;
    let x = [xi[0] + delta * (xi[0] - xj[0]), xi[1] + delta * (xi[1] - xj[1])];
    let mut cells: Vec<usize> = (0..mesh.num_cells())
        .filter(|&c| mesh.cells()[c].vertices.contains(&i))
        .collect();
    cells.sort_unstable();
    cells.into_iter().find(|&c| {
        let p = mesh.cell_points(c);
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let l1 = ((x[0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (x[1] - p[0][1])) / det;
        let l2 = ((p[1][0] - p[0][0]) * (x[1] - p[0][1]) - (x[0] - p[0][0]) * (p[1][1] - p[0][1])) / det;
        let tol = -1e-12;
        l1 >= tol && l2 >= tol && 1.0 - l1 - l2 >= tol
    })
}

/// Limiters by direct evaluation of the defining formulas on dense data.
/// Returns `alpha[i][j]` for every mesh edge in both orientations.
pub fn oracle_alpha(mesh: &Mesh, a: &[Vec<f64>], u: &[f64], dirichlet: &[bool]) -> Vec<Vec<Option<f64>>> {
    let n = mesh.num_vertices();
    let plus = |x: f64| if x > 0.0 { x } else { 0.0 };
    let minus = |x: f64| if x < 0.0 { x } else { 0.0 };
    let mut neighbours = vec![Vec::new(); n];
    for e in mesh.edges() {
        let [p, q] = e.endpoints;
        neighbours[p].push(q);
        neighbours[q].push(p);
    }
    let mut r_plus = vec![1.0; n];
    let mut r_minus = vec![1.0; n];
    for i in 0..n {
        if dirichlet[i] {
            continue;
        }
        let (mut pp, mut pm, mut qp, mut qm) = (0.0, 0.0, 0.0, 0.0);
        for &j in &neighbours[i] {
            let d = [a[i][j], 0.0, a[j][i]]
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            let s = a[i][j].abs().max(a[j][i]);
            let u_ij = match oracle_upwind(mesh, i, j) {
                Some(c) => {
                    let g = oracle_gradient(mesh, c, u);
                    let (xi, xj) = (mesh.vertices()[i], mesh.vertices()[j]);
                    u[i] + g[0] * (xi[0] - xj[0]) + g[1] * (xi[1] - xj[1])
                }
                None => u[i],
            };
            pp += d.abs() * (plus(u[i] - u[j]) + plus(u[i] - u_ij));
            pm += d.abs() * (minus(u[i] - u[j]) + minus(u[i] - u_ij));
            qp += s * (plus(u[j] - u[i]) + plus(u_ij - u[i]));
            qm += s * (minus(u[j] - u[i]) + minus(u_ij - u[i]));
        }
        if pp != 0.0 {
            r_plus[i] = f64::min(1.0, qp / pp);
        }
        if pm != 0.0 {
            r_minus[i] = f64::min(1.0, qm / pm);
        }
    }
    let mut alpha = vec![vec![None; n]; n];
    for i in 0..n {
        for &j in &neighbours[i] {
            alpha[i][j] = Some(if u[i] > u[j] {
                r_plus[i]
            } else if u[i] < u[j] {
                r_minus[i]
            } else {
                1.0
            });
        }
    }
    alpha
}
