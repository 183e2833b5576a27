use crate::folksonomy::{Folksonomy, ResourceId, TagId};
use crate::ranking::{Query, RankedTags, RecommendError, TagRecommender};
use crate::topics::TopicModel;

/// Tags by `P(t | r) = Σ_z P(t | z) P(z | r)` under the trained model.
///
/// A resource without a trained mixture is folded in from its training tags,
/// or treated as uniform when it has none.
pub fn lda_rec(model: &TopicModel, train: &Folksonomy, resource: ResourceId, k: usize) -> RankedTags {
    let theta = model.resource_topics(resource, train);
    let scores = model.tags().iter().enumerate().map(|(column, &tag): (usize, &TagId)| {
        let p: f64 = theta
            .iter()
            .zip(model.phi())
            .map(|(weight, phi)| weight * phi[column])
            .sum();
        (tag, p)
    });
    RankedTags::from_scores(scores, k)
}

pub struct LdaRecommender<'a> {
    model: &'a TopicModel,
    train: &'a Folksonomy,
}

impl<'a> LdaRecommender<'a> {
    pub fn new(model: &'a TopicModel, train: &'a Folksonomy) -> Self {
        Self { model, train }
    }
}

impl TagRecommender for LdaRecommender<'_> {
    fn name(&self) -> &str {
        "lda"
    }

    fn recommend(&self, query: &Query, k: usize) -> Result<RankedTags, RecommendError> {
        Ok(lda_rec(self.model, self.train, query.resource, k))
    }
}
