//! Butcher tableaus for explicit RK and additive IMEX-RK pairs, with
//! dense-output coefficients and load-time validation.

use crate::error::{Error, Result};

/// Paired explicit/implicit Butcher tableau.
#[derive(Debug, Clone, PartialEq)]
pub struct IMEXTableau {
    pub name: String,
    pub s: usize,
    pub a: Vec<Vec<f64>>,
    pub c: Vec<f64>,
    pub b: Vec<f64>,
    pub a_tilde: Vec<Vec<f64>>,
    pub c_tilde: Vec<f64>,
    pub b_tilde: Vec<f64>,
    /// Dense-output matrix (s x p*), if published for the scheme.
    pub bstar: Option<Vec<Vec<f64>>>,
    pub order: usize,
    pub dense_order: usize,
}

pub const NAMES: [&str; 6] = ["rk2", "rk3", "rk4", "ark2", "ark3", "ark4"];

fn row_sums(a: &[Vec<f64>]) -> Vec<f64> {
    a.iter().map(|r| r.iter().sum()).collect()
}

fn square(rows: &[&[f64]], s: usize) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            let mut v = r.to_vec();
            v.resize(s, 0.0);
            v
        })
        .collect()
}

impl IMEXTableau {
    fn build(name: &str, a: Vec<Vec<f64>>, b: Vec<f64>, a_tilde: Vec<Vec<f64>>, bstar: Option<Vec<Vec<f64>>>, order: usize) -> Self {
        let s = b.len();
        let dense_order = bstar.as_ref().map(|m| m[0].len()).unwrap_or(0);
        Self {
            name: name.to_string(),
            s,
            c: row_sums(&a),
            c_tilde: row_sums(&a_tilde),
            b_tilde: b.clone(),
            a,
            b,
            a_tilde,
            bstar,
            order,
            dense_order,
        }
    }

    fn explicit(name: &str, rows: &[&[f64]], b: &[f64], order: usize) -> Self {
        let s = b.len();
        let a = square(rows, s);
        Self::build(name, a, b.to_vec(), vec![vec![0.0; s]; s], None, order)
    }

    /// True when the implicit tableau is identically zero.
    pub fn is_explicit(&self) -> bool {
        self.a_tilde.iter().all(|r| r.iter().all(|&v| v == 0.0))
    }

    /// Same explicit part with the implicit coefficients set to zero.
    pub fn with_implicit_zeroed(&self) -> Self {
        let mut t = self.clone();
        t.a_tilde = vec![vec![0.0; self.s]; self.s];
        t.c_tilde = vec![0.0; self.s];
        t.name = format!("{}-explicit", self.name);
        t
    }

    /// Display name, e.g. "ARK2".
    pub fn label(&self) -> String {
        self.name.to_uppercase()
    }

    /// Dense-output weights B*_i(θ) = Σ_j b*_ij θ^j, or `None` when the
    /// scheme has no published dense output.
    pub fn dense_weights(&self, theta: f64) -> Result<Option<Vec<f64>>> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::Range(theta));
        }
        Ok(self.bstar.as_ref().map(|m| {
            m.iter()
                .map(|row| {
                    let mut p = 0.0;
                    let mut th = 1.0;
                    for v in row {
                        th *= theta;
                        p += v * th;
                    }
                    p
                })
                .collect()
        }))
    }

    /// Checks every structural invariant and order condition; returns the
    /// list of violated conditions as an error.
    pub fn validate(&self) -> Result<()> {
        let mut bad: Vec<String> = Vec::new();
        let s = self.s;
        let tol = 1e-14;
        let otol = 1e-13;
        let dims_ok = self.a.len() == s
            && self.a_tilde.len() == s
            && self.a.iter().chain(self.a_tilde.iter()).all(|r| r.len() == s)
            && self.c.len() == s
            && self.c_tilde.len() == s
            && self.b_tilde.len() == s;
        if !dims_ok {
            return Err(Error::Tableau { name: self.name.clone(), reason: "inconsistent dimensions".into() });
        }
        for i in 0..s {
            for j in i..s {
                if self.a[i][j] != 0.0 {
                    bad.push(format!("a[{i}][{j}] not strictly lower triangular"));
                }
            }
            for j in i + 1..s {
                if self.a_tilde[i][j] != 0.0 {
                    bad.push(format!("a_tilde[{i}][{j}] not lower triangular"));
                }
            }
            let rs: f64 = self.a[i].iter().sum();
            if (rs - self.c[i]).abs() > tol {
                bad.push(format!("row sum of a[{i}] != c"));
            }
            let rst: f64 = self.a_tilde[i].iter().sum();
            if (rst - self.c_tilde[i]).abs() > tol {
                bad.push(format!("row sum of a_tilde[{i}] != c_tilde"));
            }
            if !self.is_explicit() && (self.c[i] - self.c_tilde[i]).abs() > tol {
                bad.push(format!("c[{i}] != c_tilde[{i}]"));
            }
            if self.b[i] != self.b_tilde[i] {
                bad.push(format!("b[{i}] != b_tilde[{i}]"));
            }
        }
        if (self.b.iter().sum::<f64>() - 1.0).abs() > tol {
            bad.push("sum of b != 1".into());
        }
        if (self.b_tilde.iter().sum::<f64>() - 1.0).abs() > tol {
            bad.push("sum of b_tilde != 1".into());
        }

        let b = &self.b;
        let c = &self.c;
        let mats: Vec<&Vec<Vec<f64>>> = if self.is_explicit() { vec![&self.a] } else { vec![&self.a, &self.a_tilde] };
        let mv = |m: &Vec<Vec<f64>>, v: &[f64]| -> Vec<f64> { m.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect() };
        let wsum = |w: &[f64], v: &[f64]| -> f64 { w.iter().zip(v).map(|(x, y)| x * y).sum() };
        let c2: Vec<f64> = c.iter().map(|v| v * v).collect();
        let c3: Vec<f64> = c.iter().map(|v| v * v * v).collect();
        let mut check = |label: String, val: f64, want: f64| {
            if (val - want).abs() > otol {
                bad.push(format!("order condition {label}: {val:.16e} != {want}"));
            }
        };
        if self.order >= 2 {
            check("sum b c".into(), wsum(b, c), 0.5);
        }
        if self.order >= 3 {
            check("sum b c^2".into(), wsum(b, &c2), 1.0 / 3.0);
            for (k, x) in mats.iter().enumerate() {
                check(format!("sum b X{k} c"), wsum(b, &mv(x, c)), 1.0 / 6.0);
            }
        }
        if self.order >= 4 {
            check("sum b c^3".into(), wsum(b, &c3), 0.25);
            for (k, x) in mats.iter().enumerate() {
                let xc = mv(x, c);
                let cxc: Vec<f64> = c.iter().zip(&xc).map(|(p, q)| p * q).collect();
                check(format!("sum b c X{k} c"), wsum(b, &cxc), 0.125);
                check(format!("sum b X{k} c^2"), wsum(b, &mv(x, &c2)), 1.0 / 12.0);
                for (l, y) in mats.iter().enumerate() {
                    check(format!("sum b X{k} X{l} c"), wsum(b, &mv(x, &mv(y, c))), 1.0 / 24.0);
                }
            }
        }

        if let Some(bs) = &self.bstar {
            let p = self.dense_order;
            if bs.len() != s || bs.iter().any(|r| r.len() != p) {
                bad.push("bstar has wrong shape".into());
            } else {
                for i in 0..s {
                    let e: f64 = bs[i].iter().sum();
                    if (e - b[i]).abs() > tol {
                        bad.push(format!("B*_{i}(1) != b_{i}"));
                    }
                }
                // Σ_i B*_i(θ) c_i^k / ... matched power by power in θ.
                let col = |j: usize| -> Vec<f64> { bs.iter().map(|r| r[j]).collect() };
                for j in 0..p {
                    let cj = col(j);
                    let want = if j == 0 { 1.0 } else { 0.0 };
                    if (cj.iter().sum::<f64>() - want).abs() > otol {
                        bad.push(format!("dense condition sum b*_(.,{}) != {want}", j + 1));
                    }
                    if p >= 2 {
                        let want = if j == 1 { 0.5 } else { 0.0 };
                        if (wsum(&cj, c) - want).abs() > otol {
                            bad.push(format!("dense condition sum b*_(.,{}) c != {want}", j + 1));
                        }
                    }
                    if p >= 3 {
                        let want = if j == 2 { 1.0 / 3.0 } else { 0.0 };
                        if (wsum(&cj, &c2) - want).abs() > otol {
                            bad.push(format!("dense condition sum b*_(.,{}) c^2 != {want}", j + 1));
                        }
                        for (k, x) in mats.iter().enumerate() {
                            let want = if j == 2 { 1.0 / 6.0 } else { 0.0 };
                            if (wsum(&cj, &mv(x, c)) - want).abs() > otol {
                                bad.push(format!("dense condition sum b*_(.,{}) X{k} c != {want}", j + 1));
                            }
                        }
                    }
                }
            }
        }

        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Tableau { name: self.name.clone(), reason: bad.join("; ") })
        }
    }
}

fn rk2() -> IMEXTableau {
    IMEXTableau::explicit("rk2", &[&[], &[1.0]], &[0.5, 0.5], 2)
}

fn rk3() -> IMEXTableau {
    IMEXTableau::explicit("rk3", &[&[], &[0.5], &[-1.0, 2.0]], &[1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], 3)
}

fn rk4() -> IMEXTableau {
    IMEXTableau::explicit("rk4", &[&[], &[0.5], &[0.0, 0.5], &[0.0, 0.0, 1.0]], &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0], 4)
}

fn ark2() -> IMEXTableau {
    let s2 = std::f64::consts::SQRT_2;
    let g = 1.0 - 1.0 / s2;
    let d = 1.0 / (2.0 * s2);
    let a = square(&[&[], &[2.0 - s2], &[0.5, 0.5]], 3);
    let at = square(&[&[], &[g, g], &[d, d, g]], 3);
    let b = vec![d, d, g];
    let bstar = vec![vec![1.0 / s2, -d], vec![1.0 / s2, -d], vec![1.0 - s2, 1.0 / s2]];
    IMEXTableau::build("ark2", a, b, at, Some(bstar), 2)
}

fn ark3() -> IMEXTableau {
    let g = 1767732205903.0 / 4055673282236.0;
    let a = square(
        &[
            &[],
            &[1767732205903.0 / 2027836641118.0],
            &[5535828885825.0 / 10492691773637.0, 788022342437.0 / 10882634858940.0],
            &[6485989280629.0 / 16251701735622.0, -4246266847089.0 / 9704473918619.0, 10755448449292.0 / 10357097424841.0],
        ],
        4,
    );
    let b = vec![1471266399579.0 / 7840856788654.0, -4482444167858.0 / 7529755066697.0, 11266239266428.0 / 11593286722821.0, g];
    let at = square(
        &[&[], &[g, g], &[2746238789719.0 / 10658868560708.0, -640167445237.0 / 6845629431997.0, g], &[b[0], b[1], b[2], g]],
        4,
    );
    let bstar = vec![
        vec![4655552711362.0 / 22874653954995.0, -215264564351.0 / 13552729205753.0],
        vec![-18682724506714.0 / 9892148508045.0, 17870216137069.0 / 13817060693119.0],
        vec![34259539580243.0 / 13192909600954.0, -28141676662227.0 / 17317692491321.0],
        vec![584795268549.0 / 6622622206610.0, 2508943948391.0 / 7218656332882.0],
    ];
    IMEXTableau::build("ark3", a, b, at, Some(bstar), 3)
}

fn ark4() -> IMEXTableau {
    let a = square(
        &[
            &[],
            &[0.5],
            &[13861.0 / 62500.0, 6889.0 / 62500.0],
            &[-116923316275.0 / 2393684061468.0, -2731218467317.0 / 15368042101831.0, 9408046702089.0 / 11113171139209.0],
            &[
                -451086348788.0 / 2902428689909.0,
                -2682348792572.0 / 7519795681897.0,
                12662868775082.0 / 11960479115383.0,
                3355817975965.0 / 11060851509271.0,
            ],
            &[
                647845179188.0 / 3216320057751.0,
                73281519250.0 / 8382639484533.0,
                552539513391.0 / 3454668386233.0,
                3354512671639.0 / 8306763924573.0,
                4040.0 / 17871.0,
            ],
        ],
        6,
    );
    let b = vec![82889.0 / 524892.0, 0.0, 15625.0 / 83664.0, 69875.0 / 102672.0, -2260.0 / 8211.0, 0.25];
    let at = square(
        &[
            &[],
            &[0.25, 0.25],
            &[8611.0 / 62500.0, -1743.0 / 31250.0, 0.25],
            &[5012029.0 / 34652500.0, -654441.0 / 2922500.0, 174375.0 / 388108.0, 0.25],
            &[15267082809.0 / 155376265600.0, -71443401.0 / 120774400.0, 730878875.0 / 902184768.0, 2285395.0 / 8070912.0, 0.25],
            &[b[0], b[1], b[2], b[3], b[4], 0.25],
        ],
        6,
    );
    let bstar = vec![
        vec![6943876665148.0 / 7220017795957.0, -54480133.0 / 30881146.0, 6818779379841.0 / 7100303317025.0],
        vec![0.0, 0.0, 0.0],
        vec![7640104374378.0 / 9702883013639.0, -11436875.0 / 14766696.0, 2173542590792.0 / 12501825683035.0],
        vec![-20649996744609.0 / 7521556579894.0, 174696575.0 / 18121608.0, -31592104683404.0 / 5083833661969.0],
        vec![8854892464581.0 / 2390941311638.0, -12120380.0 / 966161.0, 61146701046299.0 / 7138195549469.0],
        vec![-11397109935349.0 / 6675773540249.0, 3843.0 / 706.0, -17219254887155.0 / 4939391667607.0],
    ];
    IMEXTableau::build("ark4", a, b, at, Some(bstar), 4)
}

/// Looks up and validates a registered tableau by (case-insensitive) name.
pub fn tableau(name: &str) -> Result<IMEXTableau> {
    let t = match name.to_ascii_lowercase().as_str() {
        "rk2" => rk2(),
        "rk3" => rk3(),
        "rk4" => rk4(),
        "ark2" => ark2(),
        "ark3" => ark3(),
        "ark4" => ark4(),
        other => {
            return Err(Error::Tableau { name: other.to_string(), reason: format!("unknown scheme; expected one of {}", NAMES.join(", ")) })
        }
    };
    t.validate()?;
    Ok(t)
}
