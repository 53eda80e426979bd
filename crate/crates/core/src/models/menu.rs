//! Shared-randomness lunch model. Two diners agree on a pair of numbers,
//! walk into whatever restaurant they were sent to, and order the item at
//! that position on the local menu. Nothing passes between them afterwards.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Menu {
    rows: usize,
    cols: usize,
    /// Row-major.
    items: Vec<String>,
}

impl Menu {
    pub fn new(rows: usize, cols: usize, items: Vec<String>) -> Result<Self> {
        if rows == 0 || cols == 0 || items.len() != rows * cols {
            return Err(Error::config(format!(
                "menu grid {rows}x{cols} does not match {} items",
                items.len()
            )));
        }
        Ok(Self { rows, cols, items })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Item at `(row, col)`, clamping past-the-edge coordinates to the last
    /// row or column.
    pub fn at(&self, row: usize, col: usize) -> &str {
        let r = row.min(self.rows - 1);
        let c = col.min(self.cols - 1);
        &self.items[r * self.cols + c]
    }
}

/// Every chain and its menu. A chain's menu is the same at every branch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MenuWorld {
    chains: Vec<(String, Menu)>,
}

pub const DEFAULT_CHAINS: [&str; 3] = ["Dennys", "Elmers", "IHOP"];

impl MenuWorld {
    pub fn new(chains: Vec<(String, Menu)>) -> Result<Self> {
        if chains.is_empty() {
            return Err(Error::config("menu world needs at least one chain"));
        }
        for (i, (name, _)) in chains.iter().enumerate() {
            if chains[..i].iter().any(|(n, _)| n == name) {
                return Err(Error::config(format!("duplicate chain `{name}`")));
            }
        }
        Ok(Self { chains })
    }

    /// Chains with no item in common.
    pub fn disjoint(names: &[&str], rows: usize, cols: usize) -> Result<Self> {
        Self::build(names, rows, cols, |chain, r, c| format!("{chain} #{r}-{c}"))
    }

    /// Chains that all print the same menu.
    pub fn identical(names: &[&str], rows: usize, cols: usize) -> Result<Self> {
        Self::build(names, rows, cols, |_, r, c| format!("dish #{r}-{c}"))
    }

    /// Chains that share an item at every `every`-th grid cell (row-major)
    /// and differ elsewhere.
    pub fn overlapping(names: &[&str], rows: usize, cols: usize, every: usize) -> Result<Self> {
        if every == 0 {
            return Err(Error::config("overlap period must be positive"));
        }
        Self::build(names, rows, cols, |chain, r, c| {
            if (r * cols + c).is_multiple_of(every) {
                format!("dish #{r}-{c}")
            } else {
                format!("{chain} #{r}-{c}")
            }
        })
    }

    fn build(
        names: &[&str],
        rows: usize,
        cols: usize,
        item: impl Fn(&str, usize, usize) -> String,
    ) -> Result<Self> {
        let chains = names
            .iter()
            .map(|&name| {
                let items = (0..rows)
                    .flat_map(|r| (0..cols).map(move |c| (r, c)))
                    .map(|(r, c)| item(name, r, c))
                    .collect();
                Ok((name.to_string(), Menu::new(rows, cols, items)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(chains)
    }

    pub fn chain_names(&self) -> impl Iterator<Item = &str> {
        self.chains.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn menu(&self, chain: &str) -> Result<&Menu> {
        self.chains
            .iter()
            .find(|(n, _)| n == chain)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::UnknownChain(chain.to_string()))
    }

    pub(crate) fn menu_at(&self, index: usize) -> &Menu {
        &self.chains[index].1
    }

    /// The largest grid over all chains; shared numbers are drawn inside it.
    pub fn max_dims(&self) -> (usize, usize) {
        self.chains.iter().fold((0, 0), |(r, c), (_, m)| {
            let (mr, mc) = m.dims();
            (r.max(mr), c.max(mc))
        })
    }

    /// Draws the pair of numbers the diners agree on before parting.
    pub fn shared_numbers<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let (rows, cols) = self.max_dims();
        (rng.gen_range(0..rows), rng.gen_range(0..cols))
    }
}

/// What each diner orders. Each side only reads its own menu.
pub fn menu_lunch(
    world: &MenuWorld,
    chain_left: &str,
    chain_right: &str,
    shared: (usize, usize),
) -> Result<(String, String)> {
    let left = world.menu(chain_left)?.at(shared.0, shared.1).to_string();
    let right = world.menu(chain_right)?.at(shared.0, shared.1).to_string();
    Ok((left, right))
}
