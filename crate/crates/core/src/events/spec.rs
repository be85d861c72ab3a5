//! Event specifications and their text encoding.
//!
//! Grammar (version 1): `kind:key=value;key=value`.
//!
//! | text                              | event                                        |
//! |-----------------------------------|----------------------------------------------|
//! | `hard:n=8`                        | hard-way crossing of `[0,2n] x [0,n]`        |
//! | `square:n=64`                     | left-right crossing of `[0,n]^2`             |
//! | `rect:lo=0,0;hi=17,16;axis=h`     | crossing of a rectangle (`h` or `v`)         |
//! | `annulus:n=8;center=0,0`          | circuit in `B_{2n-1}(c) \ B_n(c)`            |
//! | `one:n=8`, `four:n=8`, `five:n=8` | one-, four- and five-arm events to `dB_n`    |
//! | `pivotal:edge=0,0,1,0;of=<event>` | the edge is pivotal for `<event>`            |
//!
//! `of=` must come last in a pivotal spec; everything after it is the inner
//! event. `center` defaults to the origin.

use std::fmt;
use std::str::FromStr;

use super::{
    annulus_circuit, five_arm, four_arm, hard_crossing, is_pivotal, one_arm, rect_crossing, Axis,
};
use crate::error::{Error, Result};
use crate::lattice::{Edge, Rect, Site};
use crate::sampling::BondConfig;

pub const EVENT_SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum EventSpec {
    HardCrossing { n: u32 },
    SquareCrossing { n: u32 },
    RectCrossing { rect: Rect, axis: Axis },
    AnnulusCircuit { center: Site, n: u32 },
    OneArm { n: u32 },
    FourArm { n: u32 },
    FiveArm { n: u32 },
    Pivotal { edge: Edge, inner: Box<EventSpec> },
}

impl EventSpec {
    /// The rectangle a configuration must cover for the event to be decided.
    pub fn region(&self) -> Result<Rect> {
        self.validate()?;
        let n = self.scale().map(i64::from).unwrap_or(0);
        Ok(match self {
            EventSpec::HardCrossing { .. } => Rect::new(Site::ORIGIN, Site::new(2 * n, n))?,
            EventSpec::SquareCrossing { .. } => Rect::new(Site::ORIGIN, Site::new(n, n))?,
            EventSpec::RectCrossing { rect, .. } => *rect,
            EventSpec::AnnulusCircuit { center, n } => Rect::ball(*center, 2 * n - 1),
            EventSpec::OneArm { n } | EventSpec::FourArm { n } | EventSpec::FiveArm { n } => {
                Rect::ball(Site::ORIGIN, *n)
            }
            EventSpec::Pivotal { inner, .. } => inner.region()?,
        })
    }

    pub fn scale(&self) -> Option<u32> {
        match self {
            EventSpec::HardCrossing { n }
            | EventSpec::SquareCrossing { n }
            | EventSpec::AnnulusCircuit { n, .. }
            | EventSpec::OneArm { n }
            | EventSpec::FourArm { n }
            | EventSpec::FiveArm { n } => Some(*n),
            EventSpec::RectCrossing { .. } => None,
            EventSpec::Pivotal { inner, .. } => inner.scale(),
        }
    }

    /// The same kind of event at scale `n`. Rectangle crossings and
    /// pivotality have no single scale parameter.
    pub fn rescaled(&self, n: u32) -> Result<Self> {
        let spec = match self {
            EventSpec::HardCrossing { .. } => EventSpec::HardCrossing { n },
            EventSpec::SquareCrossing { .. } => EventSpec::SquareCrossing { n },
            EventSpec::AnnulusCircuit { center, .. } => {
                EventSpec::AnnulusCircuit { center: *center, n }
            }
            EventSpec::OneArm { .. } => EventSpec::OneArm { n },
            EventSpec::FourArm { .. } => EventSpec::FourArm { n },
            EventSpec::FiveArm { .. } => EventSpec::FiveArm { n },
            EventSpec::RectCrossing { .. } | EventSpec::Pivotal { .. } => {
                return Err(Error::param(
                    "event",
                    format!("{self} has no scale parameter"),
                ))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Increasing events: opening edges never destroys them.
    pub fn is_increasing(&self) -> bool {
        !matches!(
            self,
            EventSpec::FourArm { .. } | EventSpec::FiveArm { .. } | EventSpec::Pivotal { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EventSpec::AnnulusCircuit { n, .. } if *n < 2 => {
                Err(Error::param("n", format!("annulus needs n >= 2, got {n}")))
            }
            EventSpec::HardCrossing { n }
            | EventSpec::SquareCrossing { n }
            | EventSpec::OneArm { n }
            | EventSpec::FourArm { n }
            | EventSpec::FiveArm { n }
                if *n == 0 =>
            {
                Err(Error::param("n", "scale must be at least 1"))
            }
            EventSpec::Pivotal { edge, inner } => {
                let region = inner.region()?;
                if region.contains_edge(edge) {
                    Ok(())
                } else {
                    Err(Error::param(
                        "edge",
                        format!("edge {edge} outside {region}"),
                    ))
                }
            }
            _ => Ok(()),
        }
    }

    pub fn occurs(&self, config: &BondConfig) -> Result<bool> {
        match self {
            EventSpec::HardCrossing { n } => hard_crossing(config, *n),
            EventSpec::SquareCrossing { .. } => {
                rect_crossing(config, &self.region()?, Axis::Horizontal)
            }
            EventSpec::RectCrossing { rect, axis } => rect_crossing(config, rect, *axis),
            EventSpec::AnnulusCircuit { center, n } => annulus_circuit(config, *center, *n),
            EventSpec::OneArm { n } => one_arm(config, *n),
            EventSpec::FourArm { n } => four_arm(config, *n),
            EventSpec::FiveArm { n } => five_arm(config, *n),
            EventSpec::Pivotal { edge, inner } => is_pivotal(config, edge, inner),
        }
    }
}

impl fmt::Display for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventSpec::HardCrossing { n } => write!(f, "hard:n={n}"),
            EventSpec::SquareCrossing { n } => write!(f, "square:n={n}"),
            EventSpec::RectCrossing { rect, axis } => {
                let a = match axis {
                    Axis::Horizontal => 'h',
                    Axis::Vertical => 'v',
                };
                write!(f, "rect:lo={};hi={};axis={a}", rect.lo(), rect.hi())
            }
            EventSpec::AnnulusCircuit { center, n } => write!(f, "annulus:n={n};center={center}"),
            EventSpec::OneArm { n } => write!(f, "one:n={n}"),
            EventSpec::FourArm { n } => write!(f, "four:n={n}"),
            EventSpec::FiveArm { n } => write!(f, "five:n={n}"),
            EventSpec::Pivotal { edge, inner } => write!(f, "pivotal:edge={edge};of={inner}"),
        }
    }
}

fn parse_ints<const N: usize>(input: &str, value: &str) -> Result<[i64; N]> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != N {
        return Err(Error::parse(
            "event spec",
            input,
            format!("expected {N} integers in {value:?}"),
        ));
    }
    let mut out = [0i64; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p
            .trim()
            .parse()
            .map_err(|_| Error::parse("event spec", input, format!("bad integer {p:?}")))?;
    }
    Ok(out)
}

struct Fields<'a> {
    input: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn parse(input: &'a str, body: &'a str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in body.split(';').filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                Error::parse(
                    "event spec",
                    input,
                    format!("expected key=value, got {item:?}"),
                )
            })?;
            pairs.push((k.trim(), v.trim()));
        }
        Ok(Fields { input, pairs })
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        let i = self.pairs.iter().position(|(k, _)| *k == key)?;
        Some(self.pairs.remove(i).1)
    }

    fn require(&mut self, key: &str) -> Result<&'a str> {
        self.take(key)
            .ok_or_else(|| Error::parse("event spec", self.input, format!("missing {key}")))
    }

    fn scale(&mut self) -> Result<u32> {
        let v = self.require("n")?;
        v.parse()
            .map_err(|_| Error::parse("event spec", self.input, format!("bad scale {v:?}")))
    }

    fn finish(self) -> Result<()> {
        match self.pairs.first() {
            None => Ok(()),
            Some((k, _)) => Err(Error::parse(
                "event spec",
                self.input,
                format!("unknown key {k:?}"),
            )),
        }
    }
}

impl FromStr for EventSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let input = input.trim();
        let (kind, body) = input
            .split_once(':')
            .ok_or_else(|| Error::parse("event spec", input, "expected kind:fields"))?;
        if kind == "pivotal" {
            let (head, inner) = body.split_once("of=").ok_or_else(|| {
                Error::parse("event spec", input, "pivotal needs of=<event> last")
            })?;
            let mut fields = Fields::parse(input, head)?;
            let [ax, ay, bx, by] = parse_ints::<4>(input, fields.require("edge")?)?;
            fields.finish()?;
            let edge = Edge::new(Site::new(ax, ay), Site::new(bx, by))?;
            let spec = EventSpec::Pivotal {
                edge,
                inner: Box::new(inner.parse()?),
            };
            spec.validate()?;
            return Ok(spec);
        }
        let mut fields = Fields::parse(input, body)?;
        let spec = match kind {
            "hard" => EventSpec::HardCrossing { n: fields.scale()? },
            "square" => EventSpec::SquareCrossing { n: fields.scale()? },
            "one" => EventSpec::OneArm { n: fields.scale()? },
            "four" => EventSpec::FourArm { n: fields.scale()? },
            "five" => EventSpec::FiveArm { n: fields.scale()? },
            "annulus" => {
                let n = fields.scale()?;
                let center = match fields.take("center") {
                    Some(v) => {
                        let [x, y] = parse_ints::<2>(input, v)?;
                        Site::new(x, y)
                    }
                    None => Site::ORIGIN,
                };
                EventSpec::AnnulusCircuit { center, n }
            }
            "rect" => {
                let [x0, y0] = parse_ints::<2>(input, fields.require("lo")?)?;
                let [x1, y1] = parse_ints::<2>(input, fields.require("hi")?)?;
                let axis = match fields.take("axis").unwrap_or("h") {
                    "h" => Axis::Horizontal,
                    "v" => Axis::Vertical,
                    other => {
                        return Err(Error::parse(
                            "event spec",
                            input,
                            format!("axis {other:?} is not h or v"),
                        ))
                    }
                };
                EventSpec::RectCrossing {
                    rect: Rect::new(Site::new(x0, y0), Site::new(x1, y1))?,
                    axis,
                }
            }
            other => {
                return Err(Error::parse(
                    "event spec",
                    input,
                    format!("unknown kind {other:?}"),
                ))
            }
        };
        fields.finish()?;
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text() {
        let cases = [
            "hard:n=8",
            "square:n=64",
            "rect:lo=0,0;hi=17,16;axis=h",
            "rect:lo=-1,2;hi=3,4;axis=v",
            "annulus:n=8;center=0,0",
            "annulus:n=3;center=-4,7",
            "one:n=5",
            "four:n=12",
            "five:n=2",
            "pivotal:edge=0,3,1,3;of=annulus:n=2;center=0,0",
            "pivotal:edge=0,0,0,1;of=pivotal:edge=1,1,2,1;of=square:n=3",
        ];
        for text in cases {
            let spec: EventSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
    }

    #[test]
    fn defaults_and_aliases() {
        let spec: EventSpec = "annulus:n=4".parse().unwrap();
        assert_eq!(
            spec,
            EventSpec::AnnulusCircuit {
                center: Site::ORIGIN,
                n: 4
            }
        );
        let spec: EventSpec = " rect:hi=2,2;lo=0,0 ".parse().unwrap();
        assert_eq!(spec.to_string(), "rect:lo=0,0;hi=2,2;axis=h");
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "",
            "hard",
            "hard:n=x",
            "hard:n=0",
            "annulus:n=1",
            "bogus:n=3",
            "four:n=3;extra=1",
            "rect:lo=0,0;hi=-1,2",
            "rect:lo=0,0;hi=2,2;axis=d",
            "pivotal:edge=0,0,1,1;of=square:n=3",
            "pivotal:edge=9,9,10,9;of=square:n=3",
            "pivotal:edge=0,0,1,0",
        ] {
            assert!(bad.parse::<EventSpec>().is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn regions() {
        let r = |s: &str| {
            s.parse::<EventSpec>()
                .unwrap()
                .region()
                .unwrap()
                .to_string()
        };
        assert_eq!(r("hard:n=4"), "[0..8]x[0..4]");
        assert_eq!(r("square:n=4"), "[0..4]x[0..4]");
        assert_eq!(r("annulus:n=3;center=1,1"), "[-4..6]x[-4..6]");
        assert_eq!(r("four:n=3"), "[-3..3]x[-3..3]");
    }

    #[test]
    fn rescaling() {
        let s: EventSpec = "annulus:n=3;center=1,1".parse().unwrap();
        assert_eq!(s.rescaled(5).unwrap().to_string(), "annulus:n=5;center=1,1");
        assert!(s.rescaled(1).is_err());
        let r: EventSpec = "rect:lo=0,0;hi=2,2".parse().unwrap();
        assert!(r.rescaled(3).is_err());
    }
}
