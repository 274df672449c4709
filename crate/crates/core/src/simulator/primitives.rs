use std::fmt;
use std::str::FromStr;

use super::{DenseState, Layout};
use crate::linalg::{self, CMatrix};
use crate::weyl::{self, Dimension, Part, WeylLabel};
use crate::{Error, Result};

/// One global control operation.
///
/// In the two-chain layout every homogeneous primitive acts on the data
/// chain only; `CzInterchain` couples data site `j` with ancilla `j`, and
/// `FourierSelect` acts on the listed sites of both chains.
#[derive(Clone, Debug, PartialEq)]
pub enum GlobalPrimitive {
    /// `prod_j F_j^{-1}`, or `prod_j F_j` when `dagger` is set.
    FourierAll { dagger: bool },
    CzChain,
    /// `P(eps) = (x) X(-eps) Z(eps)`.
    Pulse { strength: u32 },
    /// `prod_j exp(-i beta/2 (X(u)Z(v) + h.c.)_j)`.
    HamPulse { beta: f64, u: u32, v: u32 },
    /// `prod_j F_j^{-1} * CZ_CHAIN`.
    TStep,
    TInv,
    CzInterchain,
    /// Fourier layer on 1-based data positions and their ancillas.
    FourierSelect { sites: Vec<usize>, dagger: bool },
    MeasureAncilla,
}

impl GlobalPrimitive {
    pub fn is_homogeneous(&self) -> bool {
        !matches!(
            self,
            GlobalPrimitive::FourierSelect { .. } | GlobalPrimitive::MeasureAncilla
        )
    }

    pub fn inverse(&self, d: u32) -> Result<GlobalPrimitive> {
        use GlobalPrimitive::*;
        Ok(match self {
            FourierAll { dagger } => FourierAll { dagger: !dagger },
            Pulse { strength } => Pulse {
                strength: (d - strength % d) % d,
            },
            HamPulse { beta, u, v } => HamPulse {
                beta: -beta,
                u: *u,
                v: *v,
            },
            TStep => TInv,
            TInv => TStep,
            FourierSelect { sites, dagger } => FourierSelect {
                sites: sites.clone(),
                dagger: !dagger,
            },
            CzChain | CzInterchain | MeasureAncilla => {
                return Err(Error::Validation(format!("{self} has no primitive inverse")))
            }
        })
    }
}

impl fmt::Display for GlobalPrimitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GlobalPrimitive::*;
        match self {
            FourierAll { dagger: false } => write!(f, "F_ALL"),
            FourierAll { dagger: true } => write!(f, "F_ALL dagger"),
            CzChain => write!(f, "CZ_CHAIN"),
            Pulse { strength } => write!(f, "PULSE eps={strength}"),
            HamPulse { beta, u, v } => write!(f, "HAM beta={beta:?} u={u} v={v}"),
            TStep => write!(f, "T"),
            TInv => write!(f, "T_INV"),
            CzInterchain => write!(f, "CZ_INTERCHAIN"),
            FourierSelect { sites, dagger } => {
                let list: Vec<String> = sites.iter().map(|s| s.to_string()).collect();
                write!(f, "F_SELECT sites={}", list.join(","))?;
                if *dagger {
                    write!(f, " dagger")?;
                }
                Ok(())
            }
            MeasureAncilla => write!(f, "MEASURE_ANCILLA"),
        }
    }
}

fn field<'a>(parts: &[&'a str], key: &str) -> std::result::Result<&'a str, String> {
    parts
        .iter()
        .find_map(|p| p.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| format!("missing `{key}=`"))
}

fn num<T: FromStr>(s: &str, key: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("bad value for `{key}`: {s}"))
}

impl FromStr for GlobalPrimitive {
    type Err = String;

    fn from_str(line: &str) -> std::result::Result<Self, String> {
        use GlobalPrimitive::*;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let Some((&head, rest)) = parts.split_first() else {
            return Err("empty primitive".into());
        };
        let dagger = rest.contains(&"dagger");
        let known = |allowed: &[&str]| -> std::result::Result<(), String> {
            for p in rest {
                let key = p.split('=').next().unwrap_or("");
                if !allowed.contains(&key) {
                    return Err(format!("unexpected token `{p}` for {head}"));
                }
            }
            Ok(())
        };
        let prim = match head {
            "F_ALL" => {
                known(&["dagger"])?;
                FourierAll { dagger }
            }
            "CZ_CHAIN" => {
                known(&[])?;
                CzChain
            }
            "PULSE" => {
                known(&["eps"])?;
                Pulse {
                    strength: num(field(rest, "eps")?, "eps")?,
                }
            }
            "HAM" => {
                known(&["beta", "u", "v"])?;
                let beta: f64 = num(field(rest, "beta")?, "beta")?;
                if !beta.is_finite() {
                    return Err(format!("non-finite beta {beta}"));
                }
                HamPulse {
                    beta,
                    u: num(field(rest, "u")?, "u")?,
                    v: num(field(rest, "v")?, "v")?,
                }
            }
            "T" => {
                known(&[])?;
                TStep
            }
            "T_INV" => {
                known(&[])?;
                TInv
            }
            "CZ_INTERCHAIN" => {
                known(&[])?;
                CzInterchain
            }
            "F_SELECT" => {
                known(&["sites", "dagger"])?;
                let sites = field(rest, "sites")?
                    .split(',')
                    .map(|s| num::<usize>(s, "sites"))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                if sites.is_empty() || sites.contains(&0) {
                    return Err("sites are 1-based and non-empty".into());
                }
                FourierSelect { sites, dagger }
            }
            "MEASURE_ANCILLA" => {
                known(&[])?;
                MeasureAncilla
            }
            other => return Err(format!("unknown primitive `{other}`")),
        };
        Ok(prim)
    }
}

/// `F = (1/sqrt d) sum_{r,s} zeta^{rs} |r><s|`, or its adjoint.
pub fn fourier_matrix(d: u32, dagger: bool) -> CMatrix {
    let n = d as usize;
    let scale = 1.0 / (d as f64).sqrt();
    let sign = if dagger { -1 } else { 1 };
    CMatrix::from_fn(n, n, |r, s| {
        weyl::zeta_int(d, sign * (r as i64) * (s as i64)) * scale
    })
}

/// Single-site matrix of `P(eps)`: `X(-eps) Z(eps)`.
pub fn pulse_matrix(d: u32, strength: u32) -> CMatrix {
    let e = strength as i64;
    weyl::weyl_matrix(Dimension::Finite(d), WeylLabel::new(d, -e, e))
        .expect("finite dimension")
}

/// Single-site factor `exp(-i beta/2 (X(u)Z(v) + h.c.))`.
pub fn ham_matrix(d: u32, beta: f64, u: u32, v: u32) -> CMatrix {
    let label = WeylLabel::new(d, u as i64, v as i64);
    let sym = weyl::hermitian_basis_matrix(Dimension::Finite(d), label, Part::Symmetric)
        .expect("symmetric element always exists")
        .matrix;
    linalg::expm_i_hermitian(&sym, -beta / 2.0)
}

fn data_sites(state: &DenseState) -> std::ops::Range<usize> {
    0..state.n
}

fn require_two_chains(state: &DenseState, what: &str) -> Result<()> {
    if state.layout != Layout::DataPlusAncilla {
        return Err(Error::Validation(format!(
            "{what} needs the data-plus-ancilla layout"
        )));
    }
    Ok(())
}

fn apply_each(state: &mut DenseState, sites: impl Iterator<Item = usize>, m: &CMatrix) -> Result<()> {
    for s in sites {
        state.apply_site(s, m)?;
    }
    Ok(())
}

fn cz_chain(state: &mut DenseState, sign: i64) {
    let n = state.n;
    state.apply_diagonal_phase(|s| {
        sign * (0..n.saturating_sub(1))
            .map(|j| s[j] as i64 * s[j + 1] as i64)
            .sum::<i64>()
    });
}

pub(super) fn apply(state: &mut DenseState, prim: &GlobalPrimitive) -> Result<()> {
    use GlobalPrimitive::*;
    let d = state.d;
    match prim {
        FourierAll { dagger } => {
            apply_each(state, data_sites(state), &fourier_matrix(d, !dagger))?;
        }
        CzChain => cz_chain(state, 1),
        Pulse { strength } => {
            apply_each(state, data_sites(state), &pulse_matrix(d, strength % d))?;
        }
        HamPulse { beta, u, v } => {
            apply_each(state, data_sites(state), &ham_matrix(d, *beta, *u, *v))?;
        }
        TStep => {
            cz_chain(state, 1);
            apply_each(state, data_sites(state), &fourier_matrix(d, true))?;
        }
        TInv => {
            apply_each(state, data_sites(state), &fourier_matrix(d, false))?;
            cz_chain(state, -1);
        }
        CzInterchain => {
            require_two_chains(state, "CZ_INTERCHAIN")?;
            let n = state.n;
            state.apply_diagonal_phase(|s| (0..n).map(|j| s[j] as i64 * s[n + j] as i64).sum());
        }
        FourierSelect { sites, dagger } => {
            let n = state.n;
            if let Some(&bad) = sites.iter().find(|&&l| l == 0 || l > n) {
                return Err(Error::Domain(format!("F_SELECT site {bad} outside 1..={n}")));
            }
            let m = fourier_matrix(d, !dagger);
            for &l in sites {
                state.apply_site(l - 1, &m)?;
                if state.layout == Layout::DataPlusAncilla {
                    state.apply_site(n + l - 1, &m)?;
                }
            }
        }
        MeasureAncilla => {
            return Err(Error::Validation(
                "MEASURE_ANCILLA is not unitary; sample with `measure` instead".into(),
            ))
        }
    }
    Ok(())
}
