//! Symmetric quadrature rules on the reference triangle, in barycentric
//! coordinates with weights summing to one (multiply by the area).

/// Degree-2 rule with three interior points.
pub const TRI_DEG2: [([f64; 3], f64); 3] = [
    ([2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 1.0 / 3.0),
    ([1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], 1.0 / 3.0),
];

const A4: f64 = 0.445948490915965;
const B4: f64 = 0.108103018168070;
const W4A: f64 = 0.223381589678011;
const C4: f64 = 0.091576213509771;
const D4: f64 = 0.816847572980459;
const W4C: f64 = 0.109951743655322;

/// Degree-4 rule with six interior points (Dunavant).
pub const TRI_DEG4: [([f64; 3], f64); 6] = [
    ([A4, A4, B4], W4A),
    ([A4, B4, A4], W4A),
    ([B4, A4, A4], W4A),
    ([C4, C4, D4], W4C),
    ([C4, D4, C4], W4C),
    ([D4, C4, C4], W4C),
];
