//! Independent oracles shared by integration tests.
#![allow(dead_code)]

/// Double-double number `hi + lo`, |lo| <= ulp(hi)/2.
#[derive(Clone, Copy, Debug)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.224_646_799_147_353_2e-16 };

    pub fn from(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn div_f(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = (self.hi - p - e + self.lo) / d;
        let (hi, lo) = two_sum(q1, r);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// cos(x) for |x| <= 2 by Taylor series in double-double arithmetic.
pub fn cos_dd(x: Dd) -> Dd {
    let x2 = x.mul(x);
    let mut term = Dd::from(1.0);
    let mut sum = Dd::from(1.0);
    for k in 1..40 {
        term = term.mul(x2).neg().div_f(((2 * k - 1) * (2 * k)) as f64);
        sum = sum.add(term);
        if term.hi.abs() < 1e-40 {
            break;
        }
    }
    sum
}

/// ceil(n · cos(π t / 2T)) evaluated in double-double. Values within 1e-25
/// of an integer are taken as that integer (the exact rational cases).
pub fn masked_count_oracle(n: usize, t: usize, total: usize) -> usize {
    let x = Dd::PI.mul(Dd::from(t as f64)).div_f(2.0 * total as f64);
    let v = cos_dd(x).mul(Dd::from(n as f64));
    let r = v.hi.round();
    let frac = Dd::from(r).neg().add(v);
    if frac.to_f64().abs() < 1e-25 {
        return r as usize;
    }
    let c = v.hi.ceil();
    // v.hi may sit exactly on an integer while lo pushes the value below it.
    if v.hi == c && v.lo < 0.0 {
        c as usize
    } else if v.hi == c {
        c as usize + usize::from(v.lo > 0.0)
    } else {
        c as usize
    }
}
