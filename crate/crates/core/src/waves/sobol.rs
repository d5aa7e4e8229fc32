//! Three-dimensional Sobol points with Joe-Kuo direction numbers, indexed
//! directly (natural order, no Gray code), so any index is random-access.

const BITS: usize = 32;

const fn directions(s: usize, a: u32, m: &[u32]) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    let mut i = 0;
    while i < BITS {
        if i < s {
            v[i] = m[i] << (31 - i);
        } else {
            let j = i - s;
            let mut x = v[j] ^ (v[j] >> s);
            let mut k = 0;
            while k + 1 < s {
                if (a >> k) & 1 != 0 {
                    x ^= v[j + 1 + k];
                }
                k += 1;
            }
            v[i] = x;
        }
        i += 1;
    }
    v
}

const fn van_der_corput() -> [u32; BITS] {
    let mut v = [0u32; BITS];
    let mut i = 0;
    while i < BITS {
        v[i] = 1 << (31 - i);
        i += 1;
    }
    v
}

const DIRECTIONS: [[u32; BITS]; 3] = [
    van_der_corput(),
    directions(1, 0, &[1]),
    directions(2, 1, &[1, 3]),
];

/// The Sobol point with the given index in `[0, 1)^3`.
pub fn sobol3(index: u32) -> [f64; 3] {
    let mut out = [0u32; 3];
    let mut bits = index;
    let mut k = 0;
    while bits != 0 {
        if bits & 1 != 0 {
            for (o, dirs) in out.iter_mut().zip(&DIRECTIONS) {
                *o ^= dirs[k];
            }
        }
        bits >>= 1;
        k += 1;
    }
    out.map(|x| x as f64 / 4_294_967_296.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points() {
        assert_eq!(sobol3(0), [0.0; 3]);
        assert_eq!(sobol3(1), [0.5; 3]);
        assert_eq!(sobol3(2), [0.25, 0.75, 0.75]);
        assert_eq!(sobol3(3), [0.75, 0.25, 0.25]);
    }

    #[test]
    fn second_dimension_direction_numbers() {
        // m_k for x + 1: 1, 3, 5, 15, 17, 51
        let m: Vec<u32> = (0..6).map(|i| DIRECTIONS[1][i] >> (31 - i)).collect();
        assert_eq!(m, vec![1, 3, 5, 15, 17, 51]);
        // m_k for x^2 + x + 1 from (1, 3): 1, 3, 3, 9, 29
        let m: Vec<u32> = (0..5).map(|i| DIRECTIONS[2][i] >> (31 - i)).collect();
        assert_eq!(m, vec![1, 3, 3, 9, 29]);
    }
}
