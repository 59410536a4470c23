//! Independent oracles for the acceptance suite: covariance and analytic
//! 3x3 symmetric eigenvalues, brute-force radius queries, and brute-force
//! connected components. Nothing here touches the library's spatial or
//! linear-algebra code paths.

use terrafuse::cloud::Point;

/// Covariance of a point set over its own mean, divided by n.
pub fn covariance(pts: &[Point]) -> [[f64; 3]; 3] {
    let n = pts.len() as f64;
    let mut mean = [0.0; 3];
    for p in pts {
        mean[0] += p.x;
        mean[1] += p.y;
        mean[2] += p.z;
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut c = [[0.0; 3]; 3];
    for p in pts {
        let d = [p.x - mean[0], p.y - mean[1], p.z - mean[2]];
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] += d[i] * d[j] / n;
            }
        }
    }
    c
}

/// Eigenvalues of a symmetric 3x3 matrix, descending, via the trigonometric
/// solution of the characteristic polynomial.
pub fn sym_eigenvalues(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if p1 == 0.0 {
        let mut d = [a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return d;
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let e2 = 3.0 * q - e1 - e3;
    [e1, e2, e3]
}

/// Matrix-vector product for the 3x3 residual checks.
pub fn matvec(a: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += a[i][j] * v[j];
        }
    }
    out
}

fn dist2(a: &Point, b: [f64; 3], two_d: bool) -> f64 {
    let mut d = (a.x - b[0]).powi(2) + (a.y - b[1]).powi(2);
    if !two_d {
        d += (a.z - b[2]).powi(2);
    }
    d
}

/// All ids with distance <= r to q, sorted. `two_d` ignores z.
pub fn brute_radius(pts: &[Point], q: [f64; 3], r: f64, two_d: bool) -> Vec<usize> {
    (0..pts.len())
        .filter(|&i| dist2(&pts[i], q, two_d) <= r * r)
        .collect()
}

/// Brute-force connected components over `member_ids` with 3D linking
/// distance <= link; returns sorted ids of members in components of size
/// >= min_size.
pub fn brute_components(pts: &[Point], member_ids: &[usize], link: f64, min_size: usize) -> Vec<usize> {
    let n = member_ids.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        let mut i = i;
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..n {
        for b in a + 1..n {
            let p = &pts[member_ids[a]];
            let qp = &pts[member_ids[b]];
            let d2 = (p.x - qp.x).powi(2) + (p.y - qp.y).powi(2) + (p.z - qp.z).powi(2);
            if d2 <= link * link {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut size = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        size[r] += 1;
    }
    let mut out: Vec<usize> = (0..n)
        .filter(|&i| {
            let r = find(&mut parent, i);
            size[r] >= min_size
        })
        .map(|i| member_ids[i])
        .collect();
    out.sort_unstable();
    out
}
