//! Bounds for the simplicial volume of one-relator groups ⟨S | r⟩.
//!
//! * [`words`]: free-group words, roots, abelianization, expressions.
//! * [`cancellation`]: pieces, C′(1/N), and the bounds that follow from them.
//! * [`diagram`]: van Kampen diagrams on closed surfaces (upper bounds).
//! * [`pods`]: rectangles, pods and the fragment basis.
//! * [`lallop`]: the linear program giving the lallop lower bound.
//! * [`survey`]: random words in the commutator subgroup.

pub mod cancellation;
pub mod diagram;
pub mod lallop;
pub mod pods;
pub mod survey;
pub mod words;

pub use ratlp::{format_rational, parse_rational, Rational};

/// Serde helpers writing rationals as "p/q" strings.
pub mod rational_serde {
    use ratlp::{format_rational, Rational};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(value))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(
            value: &Option<Rational>,
            serializer: S,
        ) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => serializer.serialize_str(&format_rational(v)),
                None => serializer.serialize_none(),
            }
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(value: &[Rational], serializer: S) -> Result<S::Ok, S::Error> {
            let mut seq = serializer.serialize_seq(Some(value.len()))?;
            for v in value {
                seq.serialize_element(&format_rational(v))?;
            }
            seq.end()
        }
    }
}
