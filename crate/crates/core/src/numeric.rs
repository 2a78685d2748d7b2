//! Small floating-point helpers shared by the recurrence solvers.

/// Neumaier's compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Compensated dot product `sum_k a[k] * b[k]`, four interleaved lanes.
///
/// The products are rounded once each; only the accumulation is compensated.
pub fn cdot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut lanes = [CompensatedSum::new(); 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        lanes[0].add(a[k] * b[k]);
        lanes[1].add(a[k + 1] * b[k + 1]);
        lanes[2].add(a[k + 2] * b[k + 2]);
        lanes[3].add(a[k + 3] * b[k + 3]);
    }
    let mut total = CompensatedSum::new();
    for k in 4 * chunks..a.len() {
        total.add(a[k] * b[k]);
    }
    for lane in &lanes {
        total.add(lane.sum);
        total.add(lane.carry);
    }
    total.value()
}

/// Pairwise (cascade) summation; used for order-independent reductions over replicates.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Renders `x` like C's `%.17g`: 17 significant digits, enough to round-trip any `f64`.
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
