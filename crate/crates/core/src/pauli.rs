//! Small fixed-size Pauli algebra used to assemble block matrices.

use faer::c64;

pub type M2 = [[c64; 2]; 2];
pub type M4 = [[c64; 4]; 4];

const O: c64 = c64 { re: 0.0, im: 0.0 };
const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

pub const S0: M2 = [[ONE, O], [O, ONE]];
pub const SX: M2 = [[O, ONE], [ONE, O]];
pub const SY: M2 = [[O, c64 { re: 0.0, im: -1.0 }], [I, O]];
pub const SZ: M2 = [[ONE, O], [O, c64 { re: -1.0, im: 0.0 }]];

pub fn scale(a: M2, s: c64) -> M2 {
    let mut out = a;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    out
}

pub fn add(a: M2, b: M2) -> M2 {
    let mut out = a;
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v += b[r][c];
        }
    }
    out
}

/// `outer ⊗ inner`, with the outer factor selecting the 2×2 block.
pub fn kron(outer: M2, inner: M2) -> M4 {
    let mut out = [[O; 4]; 4];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    out[2 * a + c][2 * b + d] = outer[a][b] * inner[c][d];
                }
            }
        }
    }
    out
}

pub fn add4(a: M4, b: M4) -> M4 {
    let mut out = a;
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v += b[r][c];
        }
    }
    out
}
