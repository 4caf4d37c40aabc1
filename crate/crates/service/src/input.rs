//! Field-by-field request parsing so every rejection names its field.

use serde_json::{Map, Value};

use stakewise_core::game::{Family, GameSpec, Strategy};
use stakewise_core::numeric::rational::parse_rational;
use stakewise_core::{ModeChoice, Rational};

use crate::error::{ApiError, ApiResult};

pub struct Body<'a>(&'a Map<String, Value>);

impl<'a> Body<'a> {
    pub fn new(v: &'a Value) -> ApiResult<Self> {
        v.as_object()
            .map(Body)
            .ok_or_else(|| ApiError::bad_request("request body must be a JSON object"))
    }

    pub fn has(&self, field: &str) -> bool {
        self.0.get(field).is_some_and(|v| !v.is_null())
    }

    fn get(&self, field: &str) -> ApiResult<&'a Value> {
        match self.0.get(field) {
            Some(v) if !v.is_null() => Ok(v),
            _ => Err(ApiError::invalid(field, format!("{field} is required"))),
        }
    }

    pub fn rational(&self, field: &str) -> ApiResult<Rational> {
        let text = match self.get(field)? {
            Value::String(s) => s.clone(),
            Value::Number(n) => n.to_string(),
            _ => return Err(ApiError::invalid(field, format!("{field} must be a fraction string or a number"))),
        };
        parse_rational(&text).map_err(|e| ApiError::invalid(field, e.to_string()))
    }

    pub fn count(&self, field: &str) -> ApiResult<usize> {
        self.get(field)?
            .as_u64()
            .and_then(|n| usize::try_from(n).ok())
            .ok_or_else(|| ApiError::invalid(field, format!("{field} must be a nonnegative integer")))
    }

    pub fn opt_count(&self, field: &str) -> ApiResult<Option<usize>> {
        if self.has(field) {
            self.count(field).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn seed(&self, field: &str) -> ApiResult<u64> {
        self.get(field)?
            .as_u64()
            .ok_or_else(|| ApiError::invalid(field, format!("{field} must be a nonnegative integer")))
    }

    pub fn text(&self, field: &str) -> ApiResult<&'a str> {
        self.get(field)?
            .as_str()
            .ok_or_else(|| ApiError::invalid(field, format!("{field} must be a string")))
    }

    pub fn flag(&self, field: &str) -> ApiResult<bool> {
        match self.0.get(field) {
            None | Some(Value::Null) => Ok(false),
            Some(Value::Bool(b)) => Ok(*b),
            Some(_) => Err(ApiError::invalid(field, format!("{field} must be true or false"))),
        }
    }

    pub fn mode(&self) -> ApiResult<ModeChoice> {
        if !self.has("mode") {
            return Ok(ModeChoice::Auto);
        }
        self.text("mode")?
            .parse()
            .map_err(|e: stakewise_core::Error| ApiError::invalid("mode", e.to_string()))
    }

    pub fn spec(&self) -> ApiResult<GameSpec> {
        let p = self.rational("p")?;
        let goal = self.count("N")?;
        GameSpec::new(p, goal).map_err(ApiError::from)
    }

    pub fn capital(&self, spec: &GameSpec) -> ApiResult<usize> {
        let c = self.count("capital")?;
        spec.check_capital(c).map_err(|e| ApiError::engine("capital", e))?;
        Ok(c)
    }

    pub fn horizon(&self, field: &str) -> ApiResult<usize> {
        let t = self.count(field)?;
        if t < 1 {
            return Err(ApiError::invalid(field, "horizon must be at least 1"));
        }
        Ok(t)
    }

    pub fn opt_horizon(&self, field: &str) -> ApiResult<Option<usize>> {
        if self.has(field) {
            self.horizon(field).map(Some)
        } else {
            Ok(None)
        }
    }

    /// `strategy` as a family name or `stakes` as an explicit table.
    pub fn strategy(&self, goal: usize) -> ApiResult<Strategy> {
        if self.has("stakes") {
            let raw = self.get("stakes")?.as_array().ok_or_else(|| {
                ApiError::invalid("stakes", "stakes must be an array of positive integers")
            })?;
            let stakes = raw
                .iter()
                .map(|v| v.as_u64().and_then(|n| usize::try_from(n).ok()))
                .collect::<Option<Vec<usize>>>()
                .ok_or_else(|| ApiError::invalid("stakes", "stakes must be an array of positive integers"))?;
            return Ok(Strategy::from_stakes(stakes));
        }
        let family: Family = self
            .text("strategy")?
            .parse()
            .map_err(|e: stakewise_core::Error| ApiError::invalid("strategy", e.to_string()))?;
        family.build(goal).map_err(|e| ApiError::engine("strategy", e))
    }

    pub fn sig_digits(&self) -> ApiResult<usize> {
        match self.opt_count("sig_digits")? {
            None => Ok(stakewise_core::report::DEFAULT_SIG_DIGITS),
            Some(0) => Err(ApiError::invalid("sig_digits", "sig_digits must be at least 1")),
            Some(n) => Ok(n),
        }
    }
}
