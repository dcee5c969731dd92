use std::collections::BTreeMap;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::{LlmError, TokenUsage};

/// Rates in currency units per 1000 tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelPrice {
    pub prompt_per_1k: Decimal,
    pub completion_per_1k: Decimal,
}

impl ModelPrice {
    pub fn new(prompt_per_1k: Decimal, completion_per_1k: Decimal) -> Result<Self, LlmError> {
        let price = Self {
            prompt_per_1k,
            completion_per_1k,
        };
        price.validate()?;
        Ok(price)
    }

    fn validate(&self) -> Result<(), LlmError> {
        if self.prompt_per_1k.is_sign_negative() || self.completion_per_1k.is_sign_negative() {
            return Err(LlmError::Configuration("price rates must be non-negative".into()));
        }
        Ok(())
    }

    pub fn cost(&self, usage: TokenUsage) -> Decimal {
        let thousand = Decimal::from(1000);
        Decimal::from(usage.prompt_tokens) * self.prompt_per_1k / thousand
            + Decimal::from(usage.completion_tokens) * self.completion_per_1k / thousand
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceTable {
    models: BTreeMap<String, ModelPrice>,
}

impl PriceTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// OpenAI list prices as of June 2023 for the models the pipeline defaults
    /// to, plus GPT-4 (8K context) for comparison.
    pub fn june_2023() -> Self {
        let mut table = Self::new();
        let entries = [
            ("gpt-3.5-turbo-0301", Decimal::new(15, 4), Decimal::new(2, 3)),
            ("text-davinci-003", Decimal::new(2, 2), Decimal::new(2, 2)),
            ("gpt-4", Decimal::new(3, 2), Decimal::new(6, 2)),
        ];
        for (model, prompt, completion) in entries {
            table
                .insert(model, ModelPrice::new(prompt, completion).expect("static rates"))
                .expect("static rates");
        }
        table
    }

    pub fn insert(&mut self, model_id: impl Into<String>, price: ModelPrice) -> Result<(), LlmError> {
        price.validate()?;
        self.models.insert(model_id.into(), price);
        Ok(())
    }

    pub fn get(&self, model_id: &str) -> Option<&ModelPrice> {
        self.models.get(model_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ModelPrice)> {
        self.models.iter()
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        self.models.values().try_for_each(ModelPrice::validate)
    }
}

/// Total cost of a set of completions. Every model must be priced.
pub fn estimate_cost<S: AsRef<str>>(
    usages: &[(S, TokenUsage)],
    prices: &PriceTable,
) -> Result<Decimal, LlmError> {
    usages.iter().try_fold(Decimal::ZERO, |acc, (model, usage)| {
        let model = model.as_ref();
        let price = prices
            .get(model)
            .ok_or_else(|| LlmError::Configuration(format!("no price for model {model:?}")))?;
        Ok(acc + price.cost(*usage))
    })
}
