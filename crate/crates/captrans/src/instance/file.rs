//! Instance files: a self-describing TOML schema whose field names follow
//! the conventional symbols for this problem family (d, r, ep, CI, FTM, ...).
//!
//! Values that vary per machine accept either a scalar (applies everywhere),
//! or a table keyed by machine id or technology id. Arrays indexed by period
//! start at period 1 and must cover the simulated horizon.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CostSchedule, Horizon, Instance, Item, Machine, MachinePool, ModelOptions};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A value that is either uniform or keyed by machine/technology/item id.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum Spread {
    Scalar(f64),
    ById(BTreeMap<String, f64>),
}

/// A per-maintenance-slot value: scalar broadcast or explicit array.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum SlotValue {
    Scalar(f64),
    PerSlot(Vec<f64>),
}

/// Slot values, optionally keyed by machine/technology id.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum SlotSpread {
    Uniform(SlotValue),
    ById(BTreeMap<String, SlotValue>),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum ShiftCosts {
    Scalar(f64),
    PerLevel(Vec<f64>),
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    schema: u32,
    horizon: HorizonSection,
    #[serde(default)]
    options: OptionsSection,
    technologies: Vec<TechnologySection>,
    machines: Vec<MachineSection>,
    items: Vec<ItemSection>,
    costs: CostsSection,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct HorizonSection {
    periods: usize,
    #[serde(default)]
    simulated_periods: Option<usize>,
    l: f64,
    #[serde(default = "default_allowed_shifts")]
    allowed_shifts: Vec<u8>,
    #[serde(default)]
    s0: u8,
}

fn default_allowed_shifts() -> Vec<u8> {
    vec![0, 1, 2, 3]
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct OptionsSection {
    #[serde(default = "default_true")]
    maintenance: bool,
    #[serde(default)]
    single_shift: bool,
    #[serde(default = "default_true")]
    increasing_tax: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct TechnologySection {
    id: String,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct MachineSection {
    id: String,
    technology: String,
    #[serde(default = "default_pool")]
    pool: String,
    #[serde(default)]
    s0: u8,
    v: f64,
    mu: f64,
    #[serde(rename = "FTM")]
    ftm: f64,
    #[serde(rename = "RMT")]
    rmt: SlotValue,
    #[serde(rename = "O")]
    workers: f64,
    #[serde(rename = "RL0", default)]
    rl0: f64,
}

fn default_pool() -> String {
    "candidate".to_string()
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ItemSection {
    id: String,
    d: Vec<f64>,
    #[serde(rename = "I0", default)]
    i0: f64,
    eh: f64,
    r: Spread,
    ep: Spread,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct CostsSection {
    discount_rate: f64,
    #[serde(rename = "CI")]
    ci: Spread,
    #[serde(rename = "CP")]
    cp: BTreeMap<String, Spread>,
    #[serde(rename = "CM")]
    cm: SlotSpread,
    #[serde(rename = "CL")]
    cl: Spread,
    #[serde(rename = "CA")]
    ca: Spread,
    #[serde(rename = "CF")]
    cf: Spread,
    #[serde(rename = "CO")]
    co: ShiftCosts,
    #[serde(rename = "CC")]
    cc: ShiftCosts,
    #[serde(rename = "CH")]
    ch: Spread,
    #[serde(rename = "CT")]
    ct: Vec<f64>,
    alpha: Spread,
}

struct Resolver<'a> {
    machines: &'a [MachineSection],
    errors: Vec<String>,
}

impl<'a> Resolver<'a> {
    /// One value per machine; map keys may be machine ids or technology ids.
    fn per_machine(&mut self, field: &str, spread: &Spread) -> Vec<f64> {
        match spread {
            Spread::Scalar(v) => vec![*v; self.machines.len()],
            Spread::ById(map) => {
                for key in map.keys() {
                    let known = self
                        .machines
                        .iter()
                        .any(|m| &m.id == key || &m.technology == key);
                    if !known {
                        self.errors
                            .push(format!("{field}: unknown machine or technology id '{key}'"));
                    }
                }
                self.machines
                    .iter()
                    .map(|m| {
                        map.get(&m.id)
                            .or_else(|| map.get(&m.technology))
                            .copied()
                            .unwrap_or_else(|| {
                                self.errors
                                    .push(format!("{field}: no value for machine '{}'", m.id));
                                0.0
                            })
                    })
                    .collect()
            }
        }
    }

    fn slots(&mut self, field: &str, value: &SlotValue, machine: &MachineSection) -> Vec<f64> {
        let bound = slot_bound(machine);
        match value {
            SlotValue::Scalar(v) => vec![*v; bound],
            SlotValue::PerSlot(values) => {
                if values.len() != bound {
                    self.errors.push(format!(
                        "{field}: machine '{}' needs {} slot entries, got {}",
                        machine.id,
                        bound,
                        values.len()
                    ));
                }
                values.clone()
            }
        }
    }

    fn per_machine_slots(&mut self, field: &str, spread: &SlotSpread) -> Vec<Vec<f64>> {
        match spread {
            SlotSpread::Uniform(v) => {
                let machines = self.machines;
                machines
                    .iter()
                    .map(|m| self.slots(field, v, m))
                    .collect()
            }
            SlotSpread::ById(map) => {
                for key in map.keys() {
                    let known = self
                        .machines
                        .iter()
                        .any(|m| &m.id == key || &m.technology == key);
                    if !known {
                        self.errors
                            .push(format!("{field}: unknown machine or technology id '{key}'"));
                    }
                }
                let machines = self.machines;
                machines
                    .iter()
                    .map(|m| {
                        let value = map
                            .get(&m.id)
                            .or_else(|| map.get(&m.technology))
                            .cloned()
                            .unwrap_or_else(|| {
                                self.errors
                                    .push(format!("{field}: no value for machine '{}'", m.id));
                                SlotValue::Scalar(0.0)
                            });
                        self.slots(field, &value, m)
                    })
                    .collect()
            }
        }
    }
}

fn slot_bound(machine: &MachineSection) -> usize {
    if machine.ftm > 0.0 && machine.v > 0.0 {
        (((machine.v / machine.ftm) - 1e-9).ceil() as usize).max(1)
    } else {
        1
    }
}

fn shift_costs(field: &str, value: &ShiftCosts, errors: &mut Vec<String>) -> [f64; 4] {
    match value {
        ShiftCosts::Scalar(v) => [*v; 4],
        ShiftCosts::PerLevel(values) => {
            if values.len() != 4 {
                errors.push(format!(
                    "{field}: expected 4 entries (shift levels 0..=3), got {}",
                    values.len()
                ));
                [0.0; 4]
            } else {
                [values[0], values[1], values[2], values[3]]
            }
        }
    }
}

/// Loads and validates an instance file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: InstanceFile =
        toml::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
    if file.schema != SCHEMA_VERSION {
        return Err(Error::parse(
            path,
            format!("unsupported schema version {}", file.schema),
        ));
    }
    instance_from_file(file)
}

fn instance_from_file(file: InstanceFile) -> Result<Instance> {
    let simulated = file
        .horizon
        .simulated_periods
        .unwrap_or(file.horizon.periods);
    let horizon = Horizon {
        periods: file.horizon.periods,
        simulated_periods: simulated,
        shift_length: file.horizon.l,
        allowed_shifts: file.horizon.allowed_shifts.clone(),
        initial_shifts: file.horizon.s0,
    };
    let options = ModelOptions {
        maintenance: file.options.maintenance,
        single_shift: file.options.single_shift,
        increasing_tax: file.options.increasing_tax,
    };

    let mut resolver = Resolver {
        machines: &file.machines,
        errors: Vec::new(),
    };

    let machines: Vec<Machine> = file
        .machines
        .iter()
        .map(|m| {
            let pool = match m.pool.as_str() {
                "existing" => MachinePool::Existing,
                "candidate" => MachinePool::Candidate,
                other => {
                    resolver.errors.push(format!(
                        "machine '{}': pool must be 'existing' or 'candidate', got '{other}'",
                        m.id
                    ));
                    MachinePool::Candidate
                }
            };
            Machine {
                id: m.id.clone(),
                technology: m.technology.clone(),
                pool,
                initial_state: m.s0,
                useful_life: m.v,
                max_utilization: m.mu,
                maintenance_interval: m.ftm,
                maintenance_durations: resolver.slots("RMT", &m.rmt, m),
                workers_required: m.workers,
                remaining_life_start: m.rl0,
            }
        })
        .collect();

    let items: Vec<Item> = file
        .items
        .iter()
        .map(|item| Item {
            id: item.id.clone(),
            demand: item.d.clone(),
            initial_inventory: item.i0,
            production_rate: resolver.per_machine(&format!("items.{}.r", item.id), &item.r),
            production_emission: resolver
                .per_machine(&format!("items.{}.ep", item.id), &item.ep),
            holding_emission: item.eh,
        })
        .collect();

    // CP is keyed by item id, each entry a per-machine spread.
    let mut production = Vec::with_capacity(items.len());
    for item in &file.items {
        match file.costs.cp.get(&item.id) {
            Some(spread) => {
                production.push(resolver.per_machine(&format!("CP.{}", item.id), spread))
            }
            None => {
                resolver
                    .errors
                    .push(format!("CP: no production cost for item '{}'", item.id));
                production.push(vec![0.0; machines.len()]);
            }
        }
    }
    for key in file.costs.cp.keys() {
        if !file.items.iter().any(|i| &i.id == key) {
            resolver.errors.push(format!("CP: unknown item id '{key}'"));
        }
    }

    // CH is keyed by item id (or a scalar).
    let holding: Vec<f64> = match &file.costs.ch {
        Spread::Scalar(v) => vec![*v; items.len()],
        Spread::ById(map) => {
            for key in map.keys() {
                if !file.items.iter().any(|i| &i.id == key) {
                    resolver.errors.push(format!("CH: unknown item id '{key}'"));
                }
            }
            file.items
                .iter()
                .map(|i| {
                    map.get(&i.id).copied().unwrap_or_else(|| {
                        resolver
                            .errors
                            .push(format!("CH: no value for item '{}'", i.id));
                        0.0
                    })
                })
                .collect()
        }
    };

    let costs = CostSchedule {
        discount_rate: file.costs.discount_rate,
        investment: resolver.per_machine("CI", &file.costs.ci),
        production,
        maintenance: resolver.per_machine_slots("CM", &file.costs.cm),
        labor: resolver.per_machine("CL", &file.costs.cl),
        hiring: resolver.per_machine("CA", &file.costs.ca),
        firing: resolver.per_machine("CF", &file.costs.cf),
        shift_opening: shift_costs("CO", &file.costs.co, &mut resolver.errors),
        shift_closing: shift_costs("CC", &file.costs.cc, &mut resolver.errors),
        holding,
        carbon_tax: file.costs.ct.clone(),
        salvage_rate: resolver.per_machine("alpha", &file.costs.alpha),
    };

    if !resolver.errors.is_empty() {
        return Err(Error::validation(resolver.errors));
    }

    Instance::new(
        horizon,
        machines,
        items,
        file.technologies.iter().map(|t| t.id.clone()).collect(),
        costs,
        options,
    )
}

/// Writes an instance back out in canonical form (per-machine maps, no
/// scalar shorthands).
pub fn save_instance(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = render_instance(instance);
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Serializes an instance to the canonical TOML form.
pub fn render_instance(instance: &Instance) -> String {
    let by_machine = |values: &[f64]| -> Spread {
        Spread::ById(
            instance
                .machines
                .iter()
                .zip(values)
                .map(|(m, &v)| (m.id.clone(), v))
                .collect(),
        )
    };

    let file = InstanceFile {
        schema: SCHEMA_VERSION,
        horizon: HorizonSection {
            periods: instance.horizon.periods,
            simulated_periods: Some(instance.horizon.simulated_periods),
            l: instance.horizon.shift_length,
            allowed_shifts: instance.horizon.allowed_shifts.clone(),
            s0: instance.horizon.initial_shifts,
        },
        options: OptionsSection {
            maintenance: instance.options.maintenance,
            single_shift: instance.options.single_shift,
            increasing_tax: instance.options.increasing_tax,
        },
        technologies: instance
            .technologies
            .iter()
            .map(|t| TechnologySection { id: t.id.clone() })
            .collect(),
        machines: instance
            .machines
            .iter()
            .map(|m| MachineSection {
                id: m.id.clone(),
                technology: m.technology.clone(),
                pool: match m.pool {
                    MachinePool::Existing => "existing".to_string(),
                    MachinePool::Candidate => "candidate".to_string(),
                },
                s0: m.initial_state,
                v: m.useful_life,
                mu: m.max_utilization,
                ftm: m.maintenance_interval,
                rmt: SlotValue::PerSlot(m.maintenance_durations.clone()),
                workers: m.workers_required,
                rl0: m.remaining_life_start,
            })
            .collect(),
        items: instance
            .items
            .iter()
            .map(|i| ItemSection {
                id: i.id.clone(),
                d: i.demand.clone(),
                i0: i.initial_inventory,
                eh: i.holding_emission,
                r: by_machine(&i.production_rate),
                ep: by_machine(&i.production_emission),
            })
            .collect(),
        costs: CostsSection {
            discount_rate: instance.costs.discount_rate,
            ci: by_machine(&instance.costs.investment),
            cp: instance
                .items
                .iter()
                .enumerate()
                .map(|(i, item)| (item.id.clone(), by_machine(&instance.costs.production[i])))
                .collect(),
            cm: SlotSpread::ById(
                instance
                    .machines
                    .iter()
                    .enumerate()
                    .map(|(k, m)| {
                        (
                            m.id.clone(),
                            SlotValue::PerSlot(instance.costs.maintenance[k].clone()),
                        )
                    })
                    .collect(),
            ),
            cl: by_machine(&instance.costs.labor),
            ca: by_machine(&instance.costs.hiring),
            cf: by_machine(&instance.costs.firing),
            co: ShiftCosts::PerLevel(instance.costs.shift_opening.to_vec()),
            cc: ShiftCosts::PerLevel(instance.costs.shift_closing.to_vec()),
            ch: Spread::ById(
                instance
                    .items
                    .iter()
                    .zip(&instance.costs.holding)
                    .map(|(i, &v)| (i.id.clone(), v))
                    .collect(),
            ),
            ct: instance.costs.carbon_tax.clone(),
            alpha: by_machine(&instance.costs.salvage_rate),
        },
    };
    toml::to_string_pretty(&file).expect("instance serializes to TOML")
}
