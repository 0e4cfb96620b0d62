use crate::network::Fracture;
use crate::scalar::Real;

/// Default overlap tolerance for disc–disc intersection, in metres.
pub const DEFAULT_INTERSECTION_EPS: f64 = 1e-9;

/// Overlap length of the two discs' chords on their planes' line of
/// intersection, or `None` when the planes are (nearly) parallel or either
/// disc misses the line.
pub fn chord_overlap<T: Real>(f1: &Fracture<T>, f2: &Fracture<T>) -> Option<T> {
    let n1 = f1.normal;
    let n2 = f2.normal;
    let dir = n1.cross(n2);
    let s2 = dir.norm_squared();
    if s2.sqrt() < T::lit(1e-12) {
        return None;
    }
    let c = n1.dot(n2);
    let h1 = n1.dot(f1.center);
    let h2 = n2.dot(f2.center);
    let point = (n1 * (h1 - h2 * c) + n2 * (h2 - h1 * c)) / s2;
    let d = dir / s2.sqrt();

    let interval = |f: &Fracture<T>| -> Option<(T, T)> {
        let rel = f.center - point;
        let t = rel.dot(d);
        let dist2 = (rel - d * t).norm_squared();
        let r2 = f.radius * f.radius;
        if dist2 > r2 {
            return None;
        }
        let half = (r2 - dist2).sqrt();
        Some((t - half, t + half))
    };

    let (a0, a1) = interval(f1)?;
    let (b0, b1) = interval(f2)?;
    Some(a1.min(b1) - a0.max(b0))
}

/// Exact intersection test between two circular discs.
///
/// True iff the chord intervals of both discs on the common line overlap by
/// more than `eps`. Parallel and coplanar discs never intersect.
pub fn discs_intersect<T: Real>(f1: &Fracture<T>, f2: &Fracture<T>, eps: T) -> bool {
    matches!(chord_overlap(f1, f2), Some(len) if len > eps)
}
