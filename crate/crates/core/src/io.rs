//! JSON descriptions of instances and schedules.
//!
//! Instance files: `{"dim": 64, "kind": "grover", "marked": [3, 7]}` or
//! `{"dim": 8, "kind": "general", "eigenpairs": [...]}`; a `"general"`
//! description may instead give `"rank"` (plus optional `"spectrum"`) and a
//! `"seed"` to draw random orthonormal eigenvectors reproducibly.
//!
//! Schedule files: `{"kind": "linear" | "double_step" | "smooth_bump" |
//! "table", "E_F": -1.0, "points": [[s, f], ...]}`.
//!
//! Unknown keys are rejected; identical files build identical objects.

use ndarray::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{self, C64};
use crate::operators::{
    assemble_instance, build_general_lowrank_final, build_uniform_initial, SearchInstance,
};
use crate::schedules::{
    double_step_schedule, linear_schedule, piecewise_table, smooth_bump_schedule, Schedule,
};
use crate::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenpairSpec {
    pub value: f64,
    pub vector_re: Vec<f64>,
    #[serde(default)]
    pub vector_im: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub dim: usize,
    /// "grover" or "general".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marked: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenpairs: Option<Vec<EigenpairSpec>>,
    /// Random-instance rank, for "general" without explicit eigenpairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// Eigenvalues for the random instance; defaults to all -1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl InstanceSpec {
    pub fn grover(dim: usize, marked: Vec<usize>) -> Self {
        InstanceSpec {
            dim,
            kind: "grover".into(),
            marked: Some(marked),
            eigenpairs: None,
            rank: None,
            spectrum: None,
            seed: None,
        }
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::BadSpec {
            reason: format!("{}: {e}", path.display()),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::BadSpec {
            reason: format!("{}: {e}", path.display()),
        })
    }

    /// Assemble the described instance. Deterministic given the spec.
    pub fn build(&self) -> Result<SearchInstance> {
        match self.kind.as_str() {
            "grover" => {
                let marked = self.marked.as_ref().ok_or_else(|| Error::BadSpec {
                    reason: "kind \"grover\" needs \"marked\"".into(),
                })?;
                SearchInstance::gus(self.dim, marked)
            }
            "general" => {
                let pairs: Vec<(f64, Array1<C64>)> = if let Some(eigenpairs) = &self.eigenpairs {
                    eigenpairs
                        .iter()
                        .map(|p| self.eigenpair_to_vector(p))
                        .collect::<Result<_>>()?
                } else if let Some(rank) = self.rank {
                    self.random_eigenpairs(rank)?
                } else {
                    return Err(Error::BadSpec {
                        reason: "kind \"general\" needs \"eigenpairs\" or \"rank\"".into(),
                    });
                };
                let h_f = build_general_lowrank_final(self.dim, &pairs)?;
                let (h_i, _) = build_uniform_initial(self.dim)?;
                assemble_instance(h_i, h_f)
            }
            other => Err(Error::BadSpec {
                reason: format!("unknown instance kind {other:?}"),
            }),
        }
    }

    fn eigenpair_to_vector(&self, p: &EigenpairSpec) -> Result<(f64, Array1<C64>)> {
        if p.vector_re.len() != self.dim {
            return Err(Error::DimensionMismatch {
                len: p.vector_re.len(),
                dim: self.dim,
            });
        }
        if let Some(im) = &p.vector_im {
            if im.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    len: im.len(),
                    dim: self.dim,
                });
            }
        }
        let v = Array1::from_shape_fn(self.dim, |i| {
            C64::new(
                p.vector_re[i],
                p.vector_im.as_ref().map(|im| im[i]).unwrap_or(0.0),
            )
        });
        Ok((p.value, v))
    }

    fn random_eigenpairs(&self, rank: usize) -> Result<Vec<(f64, Array1<C64>)>> {
        if rank == 0 || rank >= self.dim {
            return Err(Error::BadSpec {
                reason: format!("random rank {rank} must be in 1..dim"),
            });
        }
        let spectrum: Vec<f64> = match &self.spectrum {
            Some(s) => {
                if s.len() != rank {
                    return Err(Error::BadSpec {
                        reason: format!("spectrum has {} values for rank {rank}", s.len()),
                    });
                }
                s.clone()
            }
            None => vec![-1.0; rank],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(0));
        let mut vectors: Vec<Array1<C64>> = Vec::with_capacity(rank);
        for _ in 0..rank {
            let mut v = Array1::from_shape_fn(self.dim, |_| {
                C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            // Gram-Schmidt against what we already have, twice.
            for _ in 0..2 {
                for u in &vectors {
                    let c = linalg::inner_c(u, &v);
                    v = v - u.mapv(|z| z * c);
                }
            }
            let nrm = linalg::norm2_c(&v);
            vectors.push(v.mapv(|z| z / nrm));
        }
        Ok(spectrum.into_iter().zip(vectors).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    /// "linear", "double_step", "smooth_bump", or "table".
    pub kind: String,
    /// Final ground energy for "double_step".
    #[serde(rename = "E_F", default, skip_serializing_if = "Option::is_none")]
    pub e_f: Option<f64>,
    /// Breakpoints for "table".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<(f64, f64)>>,
}

impl ScheduleSpec {
    pub fn linear() -> Self {
        ScheduleSpec {
            kind: "linear".into(),
            e_f: None,
            points: None,
        }
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::BadSpec {
            reason: format!("{}: {e}", path.display()),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::BadSpec {
            reason: format!("{}: {e}", path.display()),
        })
    }

    pub fn build(&self) -> Result<Schedule> {
        match self.kind.as_str() {
            "linear" => Ok(linear_schedule()),
            "double_step" => {
                let e_f = self.e_f.ok_or_else(|| Error::BadSpec {
                    reason: "kind \"double_step\" needs \"E_F\"".into(),
                })?;
                double_step_schedule(e_f)
            }
            "smooth_bump" => Ok(smooth_bump_schedule()),
            "table" => {
                let points = self.points.clone().ok_or_else(|| Error::BadSpec {
                    reason: "kind \"table\" needs \"points\"".into(),
                })?;
                piecewise_table(points)
            }
            other => Err(Error::BadSpec {
                reason: format!("unknown schedule kind {other:?}"),
            }),
        }
    }
}

/// A file-based evolution request:
/// `{"instance": "inst.json", "schedule": "sched.json", "tau": 8.0,
///   "steps": 512, "mode": "reduced"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveRequest {
    pub instance: std::path::PathBuf,
    pub schedule: std::path::PathBuf,
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// "full" (default), "reduced", or "double_step".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

impl EvolveRequest {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::BadSpec {
            reason: format!("{}: {e}", path.display()),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::BadSpec {
            reason: format!("{}: {e}", path.display()),
        })
    }
}

/// Serializable snapshot of an evolution result (the state itself is not
/// persisted).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolutionRecord {
    pub tau: f64,
    pub mode: String,
    pub success_probability: f64,
    pub success_amplitude: f64,
    pub survival: f64,
    pub range_overlap: f64,
    pub step_count: usize,
    pub norm_drift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    pub degraded: bool,
}

impl EvolutionRecord {
    pub fn new(mode: &str, r: &crate::evolution::EvolutionResult) -> Self {
        EvolutionRecord {
            tau: r.tau,
            mode: mode.to_string(),
            success_probability: r.success_probability,
            success_amplitude: r.success_amplitude,
            survival: r.survival,
            range_overlap: r.range_overlap,
            step_count: r.step_count,
            norm_drift: r.norm_drift,
            error_estimate: r.error_estimate,
            degraded: r.degraded,
        }
    }
}

/// Fixed-width decimal formatting used for all CSV output (17 significant
/// digits, enough to round-trip f64 exactly).
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}
