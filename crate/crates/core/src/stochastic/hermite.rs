use num_traits::Num;

/// `H_k(x; σ)` from the recurrence `H_{k+1} = x H_k - k σ H_{k-1}`,
/// `H_0 = 1`, `H_1 = x`.
///
/// These are the Taylor coefficients of `exp(t x - σ t^2 / 2)`. Only ring
/// operations are used, so exact rational arithmetic works as well.
pub fn hermite<T: Num + Clone>(k: usize, x: T, sigma: T) -> T {
    let mut prev = T::one();
    if k == 0 {
        return prev;
    }
    let mut cur = x.clone();
    let mut j = T::one();
    for _ in 1..k {
        let next = x.clone() * cur.clone() - j.clone() * sigma.clone() * prev;
        prev = cur;
        cur = next;
        j = j + T::one();
    }
    cur
}

/// `[H_0, ..., H_kmax]` at one point.
pub fn hermite_all<T: Num + Clone>(kmax: usize, x: T, sigma: T) -> Vec<T> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(T::one());
    if kmax == 0 {
        return out;
    }
    out.push(x.clone());
    let mut j = T::one();
    for k in 1..kmax {
        let next = x.clone() * out[k].clone() - j.clone() * sigma.clone() * out[k - 1].clone();
        out.push(next);
        j = j + T::one();
    }
    out
}
