//! Exact ray tracing among hard disks, the Birkhoff bounce map, and periodic
//! orbits located by extremizing the polygon length.

use serde::{Deserialize, Serialize};

use super::PhasePoint;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disk {
    pub fn point_at(&self, phi: f64) -> [f64; 2] {
        [self.center[0] + self.radius * phi.cos(), self.center[1] + self.radius * phi.sin()]
    }

    pub fn normal_at(&self, phi: f64) -> [f64; 2] {
        [phi.cos(), phi.sin()]
    }

    /// Counter-clockwise unit tangent.
    pub fn tangent_at(&self, phi: f64) -> [f64; 2] {
        [-phi.sin(), phi.cos()]
    }

    pub fn angle_of(&self, x: [f64; 2]) -> f64 {
        (x[1] - self.center[1]).atan2(x[0] - self.center[0])
    }

    fn contains(&self, x: [f64; 2]) -> bool {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        dx * dx + dy * dy < self.radius * self.radius * (1.0 - 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskConfiguration {
    pub disks: Vec<Disk>,
}

/// The symmetric three-disk system: centers on an equilateral triangle of
/// side `center_distance`, disks 2 and 3 on a horizontal line.
pub fn three_disk(center_distance: f64, radius: f64) -> Result<DiskConfiguration> {
    let rho = center_distance / 3f64.sqrt();
    // written out so that disks 2 and 3 share their y coordinate exactly
    let centers = [[0.0, rho], [-0.5 * center_distance, -0.5 * rho], [0.5 * center_distance, -0.5 * rho]];
    DiskConfiguration::new(centers.iter().map(|&center| Disk { center, radius }).collect())
}

pub(crate) struct Hit {
    pub disk: usize,
    pub distance: f64,
    pub point: [f64; 2],
    pub normal: [f64; 2],
}

impl DiskConfiguration {
    pub fn new(disks: Vec<Disk>) -> Result<Self> {
        for (i, d) in disks.iter().enumerate() {
            if !(d.radius > 0.0) || !d.center.iter().all(|c| c.is_finite()) {
                return Err(Error::Parameter(format!("disk #{i} malformed: {d:?}")));
            }
        }
        for i in 0..disks.len() {
            for j in i + 1..disks.len() {
                let (a, b) = (&disks[i], &disks[j]);
                let dist = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]);
                if dist <= a.radius + b.radius {
                    return Err(Error::Parameter(format!("disks #{i} and #{j} overlap")));
                }
                for (k, c) in disks.iter().enumerate() {
                    if k == i || k == j {
                        continue;
                    }
                    let gap = segment_distance(c.center, a.center, b.center);
                    if gap <= c.radius + a.radius.max(b.radius) {
                        return Err(Error::Parameter(format!(
                            "no-eclipse condition violated: disk #{k} shadows the pair ({i}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(DiskConfiguration { disks })
    }

    pub fn support_radius(&self) -> f64 {
        self.disks
            .iter()
            .map(|d| d.center[0].hypot(d.center[1]) + d.radius)
            .fold(0.0, f64::max)
    }

    /// Disk containing `x` in its interior, if any.
    pub fn inside(&self, x: [f64; 2]) -> Option<usize> {
        self.disks.iter().position(|d| d.contains(x))
    }

    /// First disk hit by the ray `x + s v` with `s > 0` (`v` unit).
    pub(crate) fn next_hit(&self, x: [f64; 2], v: [f64; 2]) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        for (k, d) in self.disks.iter().enumerate() {
            let dx = x[0] - d.center[0];
            let dy = x[1] - d.center[1];
            let b = v[0] * dx + v[1] * dy;
            let c = dx * dx + dy * dy - d.radius * d.radius;
            let disc = b * b - c;
            if disc < 0.0 {
                continue;
            }
            let s = -b - disc.sqrt();
            if s <= 1e-10 * d.radius {
                continue;
            }
            if best.as_ref().map_or(true, |h| s < h.distance) {
                let p = [x[0] + s * v[0], x[1] + s * v[1]];
                let n = [(p[0] - d.center[0]) / d.radius, (p[1] - d.center[1]) / d.radius];
                best = Some(Hit { disk: k, distance: s, point: p, normal: n });
            }
        }
        best
    }

    /// Birkhoff map from disk `disk` at `(phi, eta)` (eta = sine of the
    /// outgoing angle to the normal, unit speed) to the next bounce.
    pub fn bounce_map(&self, disk: usize, phi: f64, eta: f64) -> Result<BirkhoffBounce> {
        if !(eta.abs() < 1.0) {
            return Err(Error::Domain(format!("|eta| = {} must be < 1", eta.abs())));
        }
        let d = &self.disks[disk];
        let x = d.point_at(phi);
        let t = d.tangent_at(phi);
        let n = d.normal_at(phi);
        let cn = (1.0 - eta * eta).sqrt();
        let v = [eta * t[0] + cn * n[0], eta * t[1] + cn * n[1]];
        let hit = self.next_hit(x, v).ok_or(Error::Escape { time: f64::INFINITY })?;
        let target = &self.disks[hit.disk];
        let phi1 = target.angle_of(hit.point);
        let t1 = target.tangent_at(phi1);
        let vn = v[0] * hit.normal[0] + v[1] * hit.normal[1];
        if vn.abs() < 1e-9 {
            return Err(Error::Tangency { time: hit.distance });
        }
        Ok(BirkhoffBounce {
            disk: hit.disk,
            phi: phi1,
            eta: v[0] * t1[0] + v[1] * t1[1],
            length: hit.distance,
        })
    }

    /// Jacobian of the bounce map in the symplectic coordinates
    /// `(s = radius * phi, eta)`, by central differences.
    pub fn bounce_jacobian(&self, disk: usize, phi: f64, eta: f64) -> Result<[[f64; 2]; 2]> {
        let a0 = self.disks[disk].radius;
        let base = self.bounce_map(disk, phi, eta)?;
        let a1 = self.disks[base.disk].radius;
        let hs = 1e-6;
        let mut jac = [[0.0; 2]; 2];
        for col in 0..2 {
            let (dp, de) = if col == 0 { (hs / a0, 0.0) } else { (0.0, hs) };
            let plus = self.bounce_map(disk, phi + dp, eta + de)?;
            let minus = self.bounce_map(disk, phi - dp, eta - de)?;
            if plus.disk != base.disk || minus.disk != base.disk {
                return Err(Error::Numeric("bounce jacobian straddles a block boundary".into()));
            }
            jac[0][col] = a1 * wrap_angle(plus.phi - minus.phi) / (2.0 * hs);
            jac[1][col] = (plus.eta - minus.eta) / (2.0 * hs);
        }
        Ok(jac)
    }

    /// Periodic orbit with the given cyclic itinerary of disk indices.
    pub fn periodic_orbit(&self, itinerary: &[usize], speed: f64) -> Result<PeriodicOrbit> {
        let n = itinerary.len();
        if n < 2 {
            return Err(Error::Parameter("itinerary needs at least two bounces".into()));
        }
        for k in 0..n {
            let (a, b) = (itinerary[k], itinerary[(k + 1) % n]);
            if a == b || a >= self.disks.len() || b >= self.disks.len() {
                return Err(Error::Parameter(format!("inadmissible itinerary {itinerary:?}")));
            }
        }
        // Start each bounce facing the midpoint of its two neighbours.
        let mut phi: Vec<f64> = (0..n)
            .map(|k| {
                let prev = self.disks[itinerary[(k + n - 1) % n]].center;
                let next = self.disks[itinerary[(k + 1) % n]].center;
                let c = self.disks[itinerary[k]].center;
                let m = [0.5 * (prev[0] + next[0]) - c[0], 0.5 * (prev[1] + next[1]) - c[1]];
                m[1].atan2(m[0])
            })
            .collect();
        let mut converged = false;
        for _ in 0..100 {
            let g = self.length_gradient(itinerary, &phi);
            let gnorm = g.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if gnorm < 1e-14 {
                converged = true;
                break;
            }
            let hess = self.length_hessian(itinerary, &phi);
            let step = solve_dense(hess, g.iter().map(|x| -x).collect())
                .ok_or_else(|| Error::Numeric("singular length hessian".into()))?;
            let smax = step.iter().map(|x| x.abs()).fold(0.0, f64::max);
            let scale = if smax > 0.2 { 0.2 / smax } else { 1.0 };
            for (p, s) in phi.iter_mut().zip(&step) {
                *p += scale * s;
            }
            if smax * scale < 1e-15 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!("periodic orbit {itinerary:?} did not converge")));
        }
        let pts: Vec<[f64; 2]> = (0..n).map(|k| self.disks[itinerary[k]].point_at(phi[k])).collect();
        let mut points = Vec::with_capacity(n);
        let mut length = 0.0;
        for k in 0..n {
            let a = pts[k];
            let b = pts[(k + 1) % n];
            let l = (b[0] - a[0]).hypot(b[1] - a[1]);
            length += l;
            let u = [(b[0] - a[0]) / l, (b[1] - a[1]) / l];
            let nk = self.disks[itinerary[k]].normal_at(phi[k]);
            if u[0] * nk[0] + u[1] * nk[1] <= 0.0 {
                return Err(Error::Numeric(format!("orbit {itinerary:?} leaves through a disk")));
            }
            points.push(PhasePoint::new(a, [speed * u[0], speed * u[1]]));
        }
        // the polygon must be an actual orbit: each chord hits the next disk first
        for k in 0..n {
            let v = [points[k].xi[0] / speed, points[k].xi[1] / speed];
            match self.next_hit(points[k].x, v) {
                Some(h) if h.disk == itinerary[(k + 1) % n] => {}
                _ => return Err(Error::Numeric(format!("orbit {itinerary:?} is shadowed"))),
            }
        }
        let mut monodromy = [[1.0, 0.0], [0.0, 1.0]];
        for k in 0..n {
            let eta = {
                let t = self.disks[itinerary[k]].tangent_at(phi[k]);
                (points[k].xi[0] * t[0] + points[k].xi[1] * t[1]) / speed
            };
            let j = self.bounce_jacobian(itinerary[k], phi[k], eta)?;
            monodromy = mat2_mul(j, monodromy);
        }
        let tr = monodromy[0][0] + monodromy[1][1];
        let det = monodromy[0][0] * monodromy[1][1] - monodromy[0][1] * monodromy[1][0];
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let expansion = (tr / 2.0).abs() + disc;
        Ok(PeriodicOrbit { itinerary: itinerary.to_vec(), angles: phi, points, length, expansion })
    }

    fn length_gradient(&self, it: &[usize], phi: &[f64]) -> Vec<f64> {
        let n = it.len();
        let pts: Vec<[f64; 2]> = (0..n).map(|k| self.disks[it[k]].point_at(phi[k])).collect();
        let unit = |a: [f64; 2], b: [f64; 2]| {
            let l = (b[0] - a[0]).hypot(b[1] - a[1]);
            [(b[0] - a[0]) / l, (b[1] - a[1]) / l]
        };
        (0..n)
            .map(|k| {
                let d = &self.disks[it[k]];
                let t = d.tangent_at(phi[k]);
                let u_in = unit(pts[(k + n - 1) % n], pts[k]);
                let u_out = unit(pts[k], pts[(k + 1) % n]);
                d.radius * (t[0] * (u_in[0] - u_out[0]) + t[1] * (u_in[1] - u_out[1]))
            })
            .collect()
    }

    fn length_hessian(&self, it: &[usize], phi: &[f64]) -> Vec<Vec<f64>> {
        let n = it.len();
        let e = 1e-6;
        let mut h = vec![vec![0.0; n]; n];
        for j in 0..n {
            let mut p = phi.to_vec();
            let mut m = phi.to_vec();
            p[j] += e;
            m[j] -= e;
            let gp = self.length_gradient(it, &p);
            let gm = self.length_gradient(it, &m);
            for i in 0..n {
                h[i][j] = (gp[i] - gm[i]) / (2.0 * e);
            }
        }
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (h[i][j] + h[j][i]);
                h[i][j] = s;
                h[j][i] = s;
            }
        }
        h
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BirkhoffBounce {
    pub disk: usize,
    pub phi: f64,
    pub eta: f64,
    /// Chord length travelled.
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub itinerary: Vec<usize>,
    /// Bounce angles on each disk.
    pub angles: Vec<f64>,
    /// Post-reflection phase points at each bounce.
    pub points: Vec<PhasePoint>,
    pub length: f64,
    /// Modulus of the expanding monodromy eigenvalue.
    pub expansion: f64,
}

/// All primitive cyclic itineraries of length `n` with no immediate
/// repetition, one representative per cyclic class (lexicographically least
/// rotation).
pub fn prime_itineraries(alphabet: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut word = vec![0usize; n];
    fn rec(word: &mut Vec<usize>, pos: usize, alphabet: usize, out: &mut Vec<Vec<usize>>) {
        let n = word.len();
        if pos == n {
            if word[n - 1] == word[0] {
                return;
            }
            let is_min = (1..n).all(|r| {
                let rot: Vec<usize> = (0..n).map(|k| word[(k + r) % n]).collect();
                rot > *word
            });
            if is_min {
                out.push(word.clone());
            }
            return;
        }
        for a in 0..alphabet {
            if pos > 0 && word[pos - 1] == a {
                continue;
            }
            word[pos] = a;
            rec(word, pos + 1, alphabet, out);
        }
    }
    if n >= 2 {
        rec(&mut word, 0, alphabet, &mut out);
    }
    out
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let mut r = a % tau;
    if r > std::f64::consts::PI {
        r -= tau;
    } else if r < -std::f64::consts::PI {
        r += tau;
    }
    r
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1])).clamp(0.0, 1.0);
    let q = [a[0] + t * ab[0] - p[0], a[1] + t * ab[1] - p[1]];
    q[0].hypot(q[1])
}

fn mat2_mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Gaussian elimination with partial pivoting for the small Newton systems.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-300 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cycle_matches_center_line_geometry() {
        let sys = three_disk(6.0, 1.0).unwrap();
        let orbit = sys.periodic_orbit(&[1, 2], 1.0).unwrap();
        assert!((orbit.length - 2.0 * (6.0 - 2.0)).abs() < 1e-12);
        // Λ = 1 + 2L/a + sqrt(...) for the two-disk orbit, L = d - 2a
        let l: f64 = 4.0;
        let lam = 1.0 + l + (l * (l + 2.0)).sqrt();
        assert!((orbit.expansion - lam * lam).abs() / (lam * lam) < 1e-6, "{} vs {}", orbit.expansion, lam * lam);
    }

    #[test]
    fn itinerary_count_matches_necklace_formula() {
        // prime cycles of the 3-disk pruned alphabet: 3, 2, 3, 6, 9 for n = 2..6
        let counts: Vec<usize> = (2..=6).map(|n| prime_itineraries(3, n).len()).collect();
        assert_eq!(counts, vec![3, 2, 3, 6, 9]);
    }

    #[test]
    fn overlapping_disks_are_rejected() {
        let bad = DiskConfiguration::new(vec![
            Disk { center: [0.0, 0.0], radius: 1.0 },
            Disk { center: [1.5, 0.0], radius: 1.0 },
        ]);
        assert!(matches!(bad, Err(Error::Parameter(_))));
        assert!(three_disk(2.2, 1.0).is_err());
        assert!(three_disk(2.5, 1.0).is_ok());
    }
}
