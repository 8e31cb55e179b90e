//! From parsed config to runnable protocol pieces.
//!
//! The engine always works at the logical input dimension: when a config
//! restricts the physical input to a support (an ordered list of levels),
//! the input is reduced to those levels before synthesis, and level s of the
//! reduced state rides column s of the receiver frame.

use qtel_core::{
    epr_product_resource, injection_resource, maximally_entangled_resource, random_state,
    resource_from_matrix, ComplexMatrix, ComplexVector, Error, PhaseTensor, ResourceMatrix,
    Result, StateVector, SupportInjection, Transport,
};

use crate::config::{
    parse_complex, ConfigFile, InputSection, PhasesSection, ResourceSection, RunSection,
};

/// Probability weight an input may leak outside its declared support.
pub const SUPPORT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScenarioMode {
    Exhaustive,
    Sampled { count: usize },
    Session { transport: Transport },
}

/// A fully validated, runnable scenario.
pub struct Scenario {
    pub name: String,
    /// Logical input dimension the protocol carries.
    pub n1: usize,
    pub resource: ResourceMatrix,
    pub phases: PhaseTensor,
    pub input: StateVector,
    pub mode: ScenarioMode,
    /// Seed driving seeded inputs, sampling and sessions.
    pub seed: u64,
}

fn validate_support(support: &[usize], physical_dim: usize) -> Result<()> {
    if support.is_empty() {
        return Err(Error::Validation("support must name at least one level".into()));
    }
    let mut seen = vec![false; physical_dim];
    for &level in support {
        if level == 0 || level > physical_dim {
            return Err(Error::Validation(format!(
                "support level {level} outside 1..={physical_dim}"
            )));
        }
        if seen[level - 1] {
            return Err(Error::Validation(format!("support level {level} repeats")));
        }
        seen[level - 1] = true;
    }
    Ok(())
}

fn build_resource(section: &ResourceSection) -> Result<ResourceMatrix> {
    match section {
        ResourceSection::Maximal { dim } => maximally_entangled_resource(*dim),
        ResourceSection::EprProduct { pairs } => epr_product_resource(*pairs),
        ResourceSection::Injection {
            dim_receiver,
            targets,
        } => {
            let injection = SupportInjection::new(targets.clone(), *dim_receiver)?;
            injection_resource(targets.len(), *dim_receiver, &injection)
        }
        ResourceSection::Matrix { rows } => {
            if rows.is_empty() {
                return Err(Error::Validation("matrix resource has no rows".into()));
            }
            let cols = rows[0].len();
            let mut m = ComplexMatrix::zeros(rows.len(), cols);
            for (r, row) in rows.iter().enumerate() {
                if row.len() != cols {
                    return Err(Error::Validation(format!(
                        "row {} has {} entries, expected {cols}",
                        r + 1,
                        row.len()
                    )));
                }
                for (c, entry) in row.iter().enumerate() {
                    m.set(r, c, parse_complex(entry)?);
                }
            }
            resource_from_matrix(m)
        }
    }
}

fn build_input(section: &InputSection, seed: u64) -> Result<StateVector> {
    match section {
        InputSection::Seeded { dim, support } => match support {
            Some(levels) => {
                validate_support(levels, *dim)?;
                random_state(levels.len(), seed)
            }
            None => random_state(*dim, seed),
        },
        InputSection::Amplitudes { values, support } => {
            let mut amps = Vec::with_capacity(values.len());
            for v in values {
                amps.push(parse_complex(v)?);
            }
            let physical = StateVector::new(ComplexVector::from_vec(amps))?;
            match support {
                Some(levels) => {
                    validate_support(levels, physical.dim())?;
                    let outside = physical.weight_outside(levels);
                    if outside > SUPPORT_TOL {
                        return Err(Error::Validation(format!(
                            "input carries weight {outside:.3e} outside its support"
                        )));
                    }
                    let reduced = ComplexVector::from_vec(
                        levels.iter().map(|&l| physical.amplitude(l - 1)).collect(),
                    );
                    StateVector::new(reduced.normalized()?)
                }
                None => Ok(physical),
            }
        }
        InputSection::Basis { dim, level, support } => {
            let physical = StateVector::basis(*dim, *level)?;
            match support {
                Some(levels) => {
                    validate_support(levels, *dim)?;
                    let slot = levels
                        .iter()
                        .position(|&l| l == *level)
                        .ok_or_else(|| {
                            Error::Validation(format!(
                                "basis level {level} is not in the support"
                            ))
                        })?;
                    StateVector::basis(levels.len(), slot + 1)
                }
                None => Ok(physical),
            }
        }
    }
}

fn build_phases(section: &PhasesSection, n1: usize, n2: usize) -> Result<PhaseTensor> {
    match section {
        PhasesSection::Fourier => PhaseTensor::fourier(n1, n2),
        PhasesSection::Explicit { values } => {
            let mut parsed = Vec::with_capacity(values.len());
            for v in values {
                parsed.push(parse_complex(v)?);
            }
            PhaseTensor::new(n1, n2, parsed)
        }
    }
}

/// Parses `memory` or `tcp:<host:port>`.
pub fn parse_transport(text: &str) -> Result<Transport> {
    if text == "memory" {
        return Ok(Transport::Memory);
    }
    if let Some(rest) = text.strip_prefix("tcp:") {
        let (host, port) = rest.rsplit_once(':').ok_or_else(|| {
            Error::Validation(format!("expected tcp:<host:port>, got {text:?}"))
        })?;
        if host.is_empty() {
            return Err(Error::Validation("empty tcp host".into()));
        }
        let port: u16 = port
            .parse()
            .map_err(|_| Error::Validation(format!("bad tcp port in {text:?}")))?;
        return Ok(Transport::Tcp {
            host: host.to_string(),
            port,
        });
    }
    Err(Error::Validation(format!(
        "unknown transport {text:?}; use memory or tcp:<host:port>"
    )))
}

/// Assembles a scenario. `seed_override` and `transport_override` come from
/// the command line and win over config values.
pub fn assemble(
    config: &ConfigFile,
    seed_override: Option<u64>,
    transport_override: Option<Transport>,
) -> Result<Scenario> {
    let resource = build_resource(&config.resource)?;
    let n2 = resource.dim_sender();
    let n3 = resource.dim_receiver();

    let config_seed = match &config.run {
        RunSection::Sampled { seed, .. } | RunSection::Session { seed, .. } => *seed,
        RunSection::Exhaustive => None,
    };
    let seed = seed_override.or(config_seed).unwrap_or(0);

    let input = build_input(&config.input, seed)?;
    let n1 = input.dim();

    if let Some(dims) = config.dims {
        if dims != [n1, n2, n3] {
            return Err(Error::Validation(format!(
                "declared dims {dims:?} do not match assembled ({n1}, {n2}, {n3})"
            )));
        }
    }
    if n3 < n1 {
        return Err(Error::Validation(format!(
            "receiver dimension {n3} cannot carry a dim-{n1} input"
        )));
    }
    if n2 < n1 {
        return Err(Error::Validation(format!(
            "resource sender dimension {n2} cannot carry a dim-{n1} input"
        )));
    }

    let phases = build_phases(&config.phases, n1, n2)?;

    let mode = match &config.run {
        RunSection::Exhaustive => ScenarioMode::Exhaustive,
        RunSection::Sampled { count, .. } => ScenarioMode::Sampled { count: *count },
        RunSection::Session { transport, .. } => {
            let t = match (&transport_override, transport) {
                (Some(t), _) => t.clone(),
                (None, Some(text)) => parse_transport(text)?,
                (None, None) => Transport::Memory,
            };
            ScenarioMode::Session { transport: t }
        }
    };

    Ok(Scenario {
        name: config.name.clone(),
        n1,
        resource,
        phases,
        input,
        mode,
        seed,
    })
}
