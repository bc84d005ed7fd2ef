use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// The ten Schwartz basic values, declared in circular order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValueId {
    Power,
    Achievement,
    Hedonism,
    Stimulation,
    SelfDirection,
    Universalism,
    Benevolence,
    Tradition,
    Conformity,
    Security,
}

impl ValueId {
    pub const COUNT: usize = 10;

    pub const ALL: [ValueId; 10] = [
        ValueId::Power,
        ValueId::Achievement,
        ValueId::Hedonism,
        ValueId::Stimulation,
        ValueId::SelfDirection,
        ValueId::Universalism,
        ValueId::Benevolence,
        ValueId::Tradition,
        ValueId::Conformity,
        ValueId::Security,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ValueId> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ValueId::Power => "POWER",
            ValueId::Achievement => "ACHIEVEMENT",
            ValueId::Hedonism => "HEDONISM",
            ValueId::Stimulation => "STIMULATION",
            ValueId::SelfDirection => "SELF_DIRECTION",
            ValueId::Universalism => "UNIVERSALISM",
            ValueId::Benevolence => "BENEVOLENCE",
            ValueId::Tradition => "TRADITION",
            ValueId::Conformity => "CONFORMITY",
            ValueId::Security => "SECURITY",
        }
    }
}

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown value `{0}`")]
pub struct UnknownValue(pub String);

impl FromStr for ValueId {
    type Err = UnknownValue;

    /// Case-insensitive; `-`, `_` and spaces are interchangeable and `SELF`
    /// is accepted for self-direction.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .trim()
            .chars()
            .map(|c| match c {
                '-' | ' ' => '_',
                c => c.to_ascii_uppercase(),
            })
            .collect();
        if norm == "SELF" || norm == "SELFDIRECTION" {
            return Ok(ValueId::SelfDirection);
        }
        ValueId::ALL
            .into_iter()
            .find(|v| v.name() == norm)
            .ok_or_else(|| UnknownValue(s.to_string()))
    }
}

/// One `T` per value, indexed by [`ValueId`]. Serializes as a JSON object
/// keyed by value name in canonical order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueMap<T>(pub [T; 10]);

/// A 10-component vector of real scores.
pub type ValueProfile = ValueMap<f64>;

impl<T> ValueMap<T> {
    pub fn from_fn(mut f: impl FnMut(ValueId) -> T) -> Self {
        ValueMap(std::array::from_fn(|i| f(ValueId::ALL[i])))
    }

    pub fn iter(&self) -> impl Iterator<Item = (ValueId, &T)> {
        ValueId::ALL.into_iter().zip(self.0.iter())
    }

    pub fn values(&self) -> &[T; 10] {
        &self.0
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> ValueMap<U> {
        ValueMap(std::array::from_fn(|i| f(&self.0[i])))
    }
}

impl<T: Default> Default for ValueMap<T> {
    fn default() -> Self {
        ValueMap(std::array::from_fn(|_| T::default()))
    }
}

impl<T> Index<ValueId> for ValueMap<T> {
    type Output = T;
    fn index(&self, v: ValueId) -> &T {
        &self.0[v.index()]
    }
}

impl<T> IndexMut<ValueId> for ValueMap<T> {
    fn index_mut(&mut self, v: ValueId) -> &mut T {
        &mut self.0[v.index()]
    }
}

impl<T: Serialize> Serialize for ValueMap<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(10))?;
        for (v, x) in self.iter() {
            map.serialize_entry(v.name(), x)?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for ValueMap<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct MapVisitor<T>(std::marker::PhantomData<T>);

        impl<'de, T: Deserialize<'de>> Visitor<'de> for MapVisitor<T> {
            type Value = ValueMap<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object with one entry per value")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<Self::Value, A::Error> {
                let mut slots: [Option<T>; 10] = Default::default();
                while let Some(key) = access.next_key::<String>()? {
                    let v: ValueId = key.parse().map_err(de::Error::custom)?;
                    if slots[v.index()].is_some() {
                        return Err(de::Error::custom(format!("duplicate value {v}")));
                    }
                    slots[v.index()] = Some(access.next_value()?);
                }
                let mut out = Vec::with_capacity(10);
                for (i, s) in slots.into_iter().enumerate() {
                    out.push(s.ok_or_else(|| {
                        de::Error::custom(format!("missing value {}", ValueId::ALL[i]))
                    })?);
                }
                let arr: [T; 10] = out.try_into().map_err(|_| de::Error::custom("arity"))?;
                Ok(ValueMap(arr))
            }
        }

        deserializer.deserialize_map(MapVisitor(std::marker::PhantomData))
    }
}

/// A catalog entry with its stratum assignments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SongRecord {
    pub song_id: String,
    pub title: String,
    pub artist: String,
    pub release_year: i32,
    /// Artist playlist frequency.
    pub popularity: f64,
    pub genre_topic: u32,
    pub lyric_topic: u32,
    /// Possibly partial lyrics.
    pub lyrics_text: String,
}

impl SongRecord {
    pub const MIN_YEAR: i32 = 1890;
    pub const END_YEAR: i32 = 2030;
    pub const GENRE_TOPICS: u32 = 25;
    pub const LYRIC_TOPICS: u32 = 9;
}

/// One rater's score and confidence for one value of one song.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub rater_id: String,
    pub song_id: String,
    pub value: ValueId,
    /// In [-100, 100].
    pub score: f64,
    /// In [0, 100].
    pub confidence: f64,
}
