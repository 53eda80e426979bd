//! Deterministic "instruction set" model: each pair carries a fixed answer for
//! each of three settings, with the right particle always the complement of
//! the left. Probabilities are exact rationals obtained by enumeration.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Angle;

pub type Rational = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// Three distinct setting angles shared by both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ThreeOptions([Angle; 3]);

impl ThreeOptions {
    pub fn new(degrees: [f64; 3]) -> Result<Self> {
        let mut out = [Angle::ZERO; 3];
        for (slot, d) in out.iter_mut().zip(degrees) {
            *slot = Angle::new(d)?;
        }
        for i in 0..3 {
            for j in i + 1..3 {
                if out[i] == out[j] {
                    return Err(Error::config(format!(
                        "setting options must be distinct, {} repeats",
                        out[i]
                    )));
                }
            }
        }
        Ok(Self(out))
    }

    pub fn angles(&self) -> [Angle; 3] {
        self.0
    }

    /// Index of the option equal to `deg` (mod 360).
    pub fn index_of(&self, deg: f64) -> Result<usize> {
        let a = Angle::new(deg)?;
        self.0
            .iter()
            .position(|o| o.separation(a) < 1e-9)
            .ok_or(Error::UnknownSetting(deg))
    }
}

impl TryFrom<[f64; 3]> for ThreeOptions {
    type Error = Error;

    fn try_from(d: [f64; 3]) -> Result<Self> {
        ThreeOptions::new(d)
    }
}

impl From<ThreeOptions> for [f64; 3] {
    fn from(o: ThreeOptions) -> [f64; 3] {
        o.0.map(Angle::degrees)
    }
}

/// A preprogrammed pair. Only the left triple is stored; the right side is
/// its elementwise complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Program {
    left: [Spin; 3],
}

impl Program {
    pub fn new(left: [Spin; 3]) -> Self {
        Self { left }
    }

    /// Program number `k` in `0..8`; bit `i` set means the left spin at
    /// setting `i` is `Down`. Index 0 is all-up.
    pub fn from_index(k: usize) -> Self {
        assert!(k < 8, "program index {k} out of range");
        let spin = |bit: usize| if k >> (2 - bit) & 1 == 1 { Spin::Down } else { Spin::Up };
        Self::new([spin(0), spin(1), spin(2)])
    }

    pub fn left(&self) -> [Spin; 3] {
        self.left
    }

    pub fn right(&self) -> [Spin; 3] {
        self.left.map(Spin::flip)
    }

    /// Whether the left spin at setting `i` equals the right spin at setting `j`.
    pub fn matches(&self, i: usize, j: usize) -> bool {
        self.left[i] == self.right()[j]
    }

    /// Fraction of the nine ordered setting pairs on which this program matches.
    pub fn overall(&self) -> Rational {
        let hits = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| self.matches(i, j))
            .count();
        Rational::new(hits as u64, 9)
    }
}

/// All eight programs in table order.
pub fn all_programs() -> [Program; 8] {
    std::array::from_fn(Program::from_index)
}

/// Match probability at setting indices `(i, j)` under a uniform mix of the
/// eight programs.
pub fn match_probability_at(i: usize, j: usize) -> Rational {
    let hits = all_programs().iter().filter(|p| p.matches(i, j)).count();
    Rational::new(hits as u64, 8)
}

/// Match probability for a left setting and a right setting given in degrees.
pub fn program_match_probability(options: &ThreeOptions, left_deg: f64, right_deg: f64) -> Result<Rational> {
    Ok(match_probability_at(options.index_of(left_deg)?, options.index_of(right_deg)?))
}

/// The 3×3 table of match probabilities, rows indexed by the left setting.
pub fn match_table() -> [[Rational; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| match_probability_at(i, j)))
}

/// Average match probability over the nine equally likely setting pairs.
/// Only the complement structure matters, so the angles themselves do not
/// enter.
pub fn program_overall(_options: &ThreeOptions) -> Rational {
    match_table().iter().flatten().sum::<Rational>() / Rational::from_integer(9)
}

/// The single program with the highest overall match probability.
pub fn best_program() -> (Program, Rational) {
    all_programs()
        .into_iter()
        .map(|p| (p, p.overall()))
        .max_by_key(|&(_, r)| r)
        .expect("eight programs")
}
