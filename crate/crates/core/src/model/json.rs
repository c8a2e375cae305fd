use std::path::Path;

use serde_json::{json, Map, Value};

use super::NPartyModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name)
        .ok_or_else(|| Error::Structure(format!("missing field `{name}`")))
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Structure(format!("`{what}` must be an array")))
}

fn strings(v: &Value, what: &str) -> Result<Vec<String>> {
    array(v, what)?
        .iter()
        .map(|s| match s {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(Error::Structure(format!("`{what}` entries must be strings"))),
        })
        .collect()
}

fn numbers<T: Scalar>(v: &Value, what: &str) -> Result<Vec<T>> {
    array(v, what)?.iter().map(T::from_json).collect()
}

fn to_json_vec<T: Scalar>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(Scalar::to_json).collect())
}

impl<T: Scalar> NPartyModel<T> {
    pub fn from_json_value(doc: &Value) -> Result<Self> {
        let obj = doc
            .as_object()
            .ok_or_else(|| Error::Structure("model document must be a JSON object".into()))?;
        let parties = field(obj, "parties")?
            .as_u64()
            .ok_or_else(|| Error::Structure("`parties` must be a positive integer".into()))?
            as usize;
        let settings = array(field(obj, "settings")?, "settings")?
            .iter()
            .map(|s| strings(s, "settings"))
            .collect::<Result<Vec<_>>>()?;
        let outcomes = array(field(obj, "outcomes")?, "outcomes")?
            .iter()
            .map(|o| numbers::<T>(o, "outcomes"))
            .collect::<Result<Vec<_>>>()?;
        if settings.len() != parties || outcomes.len() != parties {
            return Err(Error::Structure(format!(
                "`parties` is {parties} but {} setting lists and {} outcome lists are given",
                settings.len(),
                outcomes.len()
            )));
        }
        let lambdas = strings(field(obj, "lambdas")?, "lambdas")?;
        let joint = array(field(obj, "joint")?, "joint")?
            .iter()
            .map(|rows| {
                array(rows, "joint")?
                    .iter()
                    .map(|r| numbers::<T>(r, "joint"))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let prior = array(field(obj, "prior")?, "prior")?
            .iter()
            .map(|r| numbers::<T>(r, "prior"))
            .collect::<Result<Vec<_>>>()?;
        let model = NPartyModel::new(settings, outcomes, lambdas, joint, prior)?;
        Ok(match obj.get("metadata") {
            Some(Value::Null) | None => model,
            Some(m) => model.with_metadata(m.clone()),
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        Self::from_json_value(&v)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_value(&self) -> Value {
        let mut doc = json!({
            "parties": self.parties(),
            "settings": self.settings(),
            "outcomes": self.outcomes().iter().map(|o| to_json_vec(o)).collect::<Vec<_>>(),
            "lambdas": self.lambdas(),
            "joint": self
                .joint_table()
                .iter()
                .map(|rows| Value::Array(rows.iter().map(|r| to_json_vec(r)).collect()))
                .collect::<Vec<_>>(),
            "prior": self.prior_table().iter().map(|r| to_json_vec(r)).collect::<Vec<_>>(),
        });
        if let Some(m) = self.metadata() {
            doc["metadata"] = m.clone();
        }
        doc
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json_value())?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    const DOC: &str = r#"{
        "parties": 2,
        "settings": [["x"], ["y", "y'"]],
        "outcomes": [[1, -1], [1, -1]],
        "lambdas": ["a", "b"],
        "joint": [
            [[1, 0, 0, 0], ["1/3", "2/3", 0, 0]],
            [[0.25, 0.25, 0.25, 0.25], [0, 0, 0, 1]]
        ],
        "prior": [["2/3", "1/3"], [0.5, 0.5]],
        "metadata": {"name": "test"}
    }"#;

    #[test]
    fn parses_rational_strings() {
        let m = NPartyModel::<Rational>::from_json_str(DOC).unwrap();
        assert_eq!(m.joint(0, 1)[0], Rational::ratio(1, 3));
        assert_eq!(m.prior(0)[0], Rational::ratio(2, 3));
        assert!(m.validate(&Rational::default_tolerance()).is_valid());
        let again = NPartyModel::<Rational>::from_json_value(&m.to_json_value()).unwrap();
        assert_eq!(again, m);

        let f = NPartyModel::<f64>::from_json_str(DOC).unwrap();
        assert!((f.joint(0, 1)[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f.metadata().unwrap()["name"], "test");
    }

    #[test]
    fn missing_entries_are_structural() {
        let broken = DOC.replace(r#"[0, 0, 0, 1]"#, "[0, 0, 1]");
        assert!(matches!(
            NPartyModel::<f64>::from_json_str(&broken),
            Err(Error::Structure(_))
        ));
        let no_prior = r#"{"parties":1,"settings":[["x"]],"outcomes":[[1,-1]],"lambdas":["l"],"joint":[[[1,0]]]}"#;
        assert!(matches!(
            NPartyModel::<f64>::from_json_str(no_prior),
            Err(Error::Structure(_))
        ));
    }
}
