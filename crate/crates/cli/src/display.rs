//! Number formatting shared by the subcommands.

use equinet::Matrix;

/// Human mode rounds to six significant digits; exact mode prints 17.
#[derive(Clone, Copy, Debug, Default)]
pub struct Style {
    pub exact: bool,
}

impl Style {
    pub fn num(&self, x: f64) -> String {
        // Drop the sign of negative zero.
        let x = x + 0.0;
        if self.exact {
            return format!("{x:.16e}");
        }
        let r: f64 = format!("{x:.5e}").parse::<f64>().unwrap_or(x) + 0.0;
        if r == 0.0 || (1e-4..1e7).contains(&r.abs()) {
            format!("{r}")
        } else {
            format!("{r:e}")
        }
    }

    pub fn tuple(&self, v: &[f64]) -> String {
        let parts: Vec<String> = v.iter().map(|&x| self.num(x)).collect();
        format!("({})", parts.join(", "))
    }

    pub fn matrix(&self, m: &Matrix) -> String {
        let mut out = String::new();
        for i in 0..m.rows() {
            let row: Vec<String> = m.row(i).iter().map(|&x| self.num(x)).collect();
            out.push_str("  ");
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// `(+1, -1, ...)` for sign-valued vectors.
pub fn signs(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:+}")).collect();
    format!("({})", parts.join(", "))
}
