//! `--state` mini-language.
//!
//! ```text
//! fock:n0=4,n1=4        occupations by mode (n-1=2 for k = -1)
//! dicke:N=32,K=8        |N-K, K> over modes 0 and 1
//! twin:N=8              |N/2, N/2>
//! multi:N=8,M=2         M-notch state
//! yrast:N=8,K=4,g=0.08  interacting yrast state (optional kmax=..)
//! ```

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Serialize;
use yrast::basis::FockState;
use yrast::hamiltonian::{
    converged_yrast, find_yrast, Backend, CutoffOptions, ModelParams, YrastOptions,
};
use yrast::wavefunction::{multi_soliton_state, ManyBodyState};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StateSpec {
    Fock(Vec<(i32, u32)>),
    Dicke {
        n: usize,
        k: usize,
    },
    Twin {
        n: usize,
    },
    Multi {
        n: usize,
        notches: u32,
    },
    Yrast {
        n: usize,
        k: i64,
        g: f64,
        kmax: Option<usize>,
    },
}

fn fields(body: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("expected key=value, got `{part}`")))?;
        if out
            .insert(key.trim().to_owned(), value.trim().to_owned())
            .is_some()
        {
            return Err(CliError::usage(format!("repeated key `{key}`")));
        }
    }
    Ok(out)
}

fn take<T: FromStr>(map: &mut BTreeMap<String, String>, keys: &[&str]) -> CliResult<Option<T>> {
    for key in keys {
        if let Some(v) = map.remove(*key) {
            return v
                .parse()
                .map(Some)
                .map_err(|_| CliError::usage(format!("cannot parse {key}=`{v}`")));
        }
    }
    Ok(None)
}

fn need<T: FromStr>(map: &mut BTreeMap<String, String>, keys: &[&str]) -> CliResult<T> {
    take(map, keys)?.ok_or_else(|| CliError::usage(format!("missing `{}`", keys[0])))
}

fn finish(map: BTreeMap<String, String>) -> CliResult<()> {
    match map.keys().next() {
        Some(k) => Err(CliError::usage(format!("unknown key `{k}`"))),
        None => Ok(()),
    }
}

impl FromStr for StateSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| CliError::usage(format!("state spec `{s}` lacks a `kind:` prefix")))?;
        let mut map = fields(body)?;
        let spec = match kind.trim() {
            "fock" => {
                let mut modes = Vec::new();
                for (key, value) in std::mem::take(&mut map) {
                    let k: i32 = key
                        .strip_prefix('n')
                        .and_then(|m| m.parse().ok())
                        .ok_or_else(|| {
                            CliError::usage(format!("fock keys look like n0, n-1; got `{key}`"))
                        })?;
                    let c: u32 = value
                        .parse()
                        .map_err(|_| CliError::usage(format!("bad occupation `{value}`")))?;
                    modes.push((k, c));
                }
                if modes.iter().map(|m| m.1).sum::<u32>() == 0 {
                    return Err(CliError::usage("fock state has no particles"));
                }
                StateSpec::Fock(modes)
            }
            "dicke" => StateSpec::Dicke {
                n: need(&mut map, &["N", "n"])?,
                k: need(&mut map, &["K", "k"])?,
            },
            "twin" => StateSpec::Twin {
                n: need(&mut map, &["N", "n"])?,
            },
            "multi" => StateSpec::Multi {
                n: need(&mut map, &["N", "n"])?,
                notches: need(&mut map, &["M", "m"])?,
            },
            "yrast" => StateSpec::Yrast {
                n: need(&mut map, &["N", "n"])?,
                k: need(&mut map, &["K", "k"])?,
                g: need(&mut map, &["g"])?,
                kmax: take(&mut map, &["kmax"])?,
            },
            other => return Err(CliError::usage(format!("unknown state kind `{other}`"))),
        };
        finish(map)?;
        Ok(spec)
    }
}

/// Diagnostics of an interacting state built on the fly.
#[derive(Clone, Debug, Serialize)]
pub struct YrastInfo {
    pub energy: f64,
    pub residual: f64,
    pub kmax: usize,
    pub dimension: usize,
}

pub struct Resolved {
    pub state: ManyBodyState,
    pub yrast: Option<YrastInfo>,
}

impl StateSpec {
    pub fn resolve(&self, l: f64, seed: u64) -> CliResult<Resolved> {
        let fock = |s: FockState| -> CliResult<Resolved> {
            Ok(Resolved {
                state: ManyBodyState::from_fock(&s)?,
                yrast: None,
            })
        };
        match *self {
            StateSpec::Fock(ref modes) => fock(FockState::new(modes.iter().copied())),
            StateSpec::Dicke { n, k } => {
                if k > n {
                    return Err(CliError::usage(format!(
                        "dicke needs K <= N, got K={k}, N={n}"
                    )));
                }
                fock(FockState::two_mode(0, (n - k) as u32, 1, k as u32))
            }
            StateSpec::Twin { n } => {
                if n % 2 != 0 {
                    return Err(CliError::usage(format!("twin needs even N, got {n}")));
                }
                fock(FockState::two_mode(0, (n / 2) as u32, 1, (n / 2) as u32))
            }
            StateSpec::Multi { n, notches } => fock(multi_soliton_state(n, notches)?),
            StateSpec::Yrast { n, k, g, kmax } => {
                let yrast = YrastOptions {
                    seed,
                    backend: Backend::Lanczos,
                    check_degeneracy: false,
                    ..Default::default()
                };
                let (result, kmax) = match kmax {
                    Some(kmax) => (
                        find_yrast(&ModelParams::new(n, k, kmax, g, l), &yrast)?,
                        kmax,
                    ),
                    None => {
                        let c = converged_yrast(
                            &ModelParams::new(n, k, 0, g, l),
                            &CutoffOptions {
                                yrast,
                                ..Default::default()
                            },
                        )?;
                        (c.result, c.kmax)
                    }
                };
                Ok(Resolved {
                    state: ManyBodyState::from_vector(&result.state)?,
                    yrast: Some(YrastInfo {
                        energy: result.energy,
                        residual: result.residual,
                        kmax,
                        dimension: result.state.len(),
                    }),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_examples() {
        assert_eq!(
            "fock:n0=4,n1=4".parse::<StateSpec>().unwrap(),
            StateSpec::Fock(vec![(0, 4), (1, 4)])
        );
        assert_eq!(
            "fock:n-1=2, n1=2".parse::<StateSpec>().unwrap(),
            StateSpec::Fock(vec![(-1, 2), (1, 2)])
        );
        assert_eq!(
            "yrast:N=8,K=4,g=0.08".parse::<StateSpec>().unwrap(),
            StateSpec::Yrast {
                n: 8,
                k: 4,
                g: 0.08,
                kmax: None
            }
        );
        assert_eq!(
            "multi:N=8,M=2".parse::<StateSpec>().unwrap(),
            StateSpec::Multi { n: 8, notches: 2 }
        );
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "n0=4",
            "fock:",
            "fock:x=1",
            "yrast:N=8,K=4",
            "dicke:N=8,K=2,q=1",
            "twin:N=a",
            "foo:N=1",
        ] {
            assert!(bad.parse::<StateSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn resolves_two_mode_states() {
        let r = "dicke:N=6,K=2"
            .parse::<StateSpec>()
            .unwrap()
            .resolve(1.0, 0)
            .unwrap();
        assert_eq!(r.state.as_fock().unwrap(), &FockState::two_mode(0, 4, 1, 2));
        assert!("twin:N=5"
            .parse::<StateSpec>()
            .unwrap()
            .resolve(1.0, 0)
            .is_err());
        let y = "yrast:N=4,K=2,g=0.1,kmax=2"
            .parse::<StateSpec>()
            .unwrap()
            .resolve(1.0, 0)
            .unwrap();
        assert_eq!(y.yrast.unwrap().kmax, 2);
    }
}
