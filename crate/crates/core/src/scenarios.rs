//! Small hand-built networks on the desk-scale domain (25 m cube centred at
//! the origin, 5 m base cells) used by tests and examples.

use crate::geometry::Vec3;
use crate::network::{aperture_from_radius, Fracture, FractureNetwork, GenerationParams};
use crate::scalar::Real;

fn disc<T: Real>(c: [f64; 3], n: [f64; 3], r: f64) -> Fracture<T> {
    let r = T::lit(r);
    Fracture::new(
        0,
        Vec3::new(T::lit(c[0]), T::lit(c[1]), T::lit(c[2])),
        Vec3::new(T::lit(n[0]), T::lit(n[1]), T::lit(n[2])),
        r,
        aperture_from_radius(r),
    )
}

fn desk<T: Real>(fractures: Vec<Fracture<T>>) -> FractureNetwork<T> {
    let mut params = GenerationParams::desk_defaults();
    params.n_fractures = fractures.len();
    FractureNetwork::from_fractures(fractures, params)
}

/// Three discs A-B-C: A touches `x = min`, C touches `x = max`, A and C are
/// coplanar and disjoint, B crosses both.
pub fn chain_network<T: Real>() -> FractureNetwork<T> {
    desk(vec![
        disc([-9.0, 0.0, 0.0], [0.0, 0.0, 1.0], 4.0),
        disc([0.0, 0.0, 0.0], [0.0, 1.0, 0.0], 6.0),
        disc([9.0, 0.0, 0.0], [0.0, 0.0, 1.0], 4.0),
    ])
}

/// One disc spanning the whole domain in the plane `z = 0.3`.
pub fn through_fracture<T: Real>() -> FractureNetwork<T> {
    desk(vec![disc([0.0, 0.0, 0.3], [0.0, 0.0, 1.0], 20.0)])
}

/// Two parallel unit discs 0.4 m apart inside the cell `[0, 2.5]^3`.
pub fn parallel_pair<T: Real>() -> FractureNetwork<T> {
    desk(vec![
        disc([1.25, 1.25, 0.5], [0.0, 0.0, 1.0], 1.0),
        disc([1.25, 1.25, 0.9], [0.0, 0.0, 1.0], 1.0),
    ])
}

/// Two coplanar discs reaching opposite `x` faces, separated by the gap
/// `x in [0.1, 2.6]`. The DFN does not percolate; 2.5 m cells bridge the
/// gap, 1.25 m and finer cells do not.
pub fn bridged_gap<T: Real>() -> FractureNetwork<T> {
    desk(vec![
        disc([-6.9, 0.0, 0.3], [0.0, 0.0, 1.0], 7.0),
        disc([9.6, 0.0, 0.3], [0.0, 0.0, 1.0], 7.0),
    ])
}
