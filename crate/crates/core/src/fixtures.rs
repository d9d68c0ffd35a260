//! Bundled example instances.

use crate::error::{Error, Result};
use crate::instance::SystemInstance;

const LAPTOP: &str = include_str!("../fixtures/laptop.json");
const CHAIN: &str = include_str!("../fixtures/chain.json");
const CYCLE: &str = include_str!("../fixtures/cycle.json");

/// Names accepted by [`fixture`].
pub const FIXTURE_NAMES: [&str; 3] = ["laptop", "chain", "cycle"];

/// Load a bundled instance by name.
///
/// * `laptop` – a 13-part notebook computer.
/// * `chain` – two cog wheels joined by a 12-link chain; the chain can only be
///   removed by also breaking one of its own links.
/// * `cycle` – 13 unit-weight parts whose natural fractional cover contains a
///   five-LRU cycle. Rates and costs are placeholders meant to be redrawn.
pub fn fixture(name: &str) -> Result<SystemInstance> {
    let src = match name {
        "laptop" => LAPTOP,
        "chain" => CHAIN,
        "cycle" => CYCLE,
        other => return Err(Error::UnknownFixture(other.to_string())),
    };
    SystemInstance::from_json_str(src)
}
