use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::folksonomy::{Folksonomy, ResourceId, TagId, UserId};
use crate::ranking::{Query, RankedTags, RecommendError, TagRecommender};
use crate::threelayers::{check_beta, mix_components, AbsentTags};

fn by_frequency(counts: &BTreeMap<TagId, u32>, k: usize) -> RankedTags {
    RankedTags::from_scores(counts.iter().map(|(&t, &n)| (t, n as f64)), k)
}

fn as_scores(counts: &BTreeMap<TagId, u32>) -> Vec<(TagId, f64)> {
    counts.iter().map(|(&t, &n)| (t, n as f64)).collect()
}

/// MP: tags by global frequency.
pub fn mp(train: &Folksonomy, k: usize) -> RankedTags {
    RankedTags::from_scores(
        train
            .tag_frequencies()
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(t, &n)| (TagId(t as u32), n as f64)),
        k,
    )
}

/// MP_u: tags by frequency in the user's assignments.
pub fn mp_u(train: &Folksonomy, user: UserId, k: usize) -> RankedTags {
    by_frequency(train.user_tag_frequencies(user), k)
}

/// MP_r: tags by frequency in the resource's assignments.
pub fn mp_r(train: &Folksonomy, resource: ResourceId, k: usize) -> RankedTags {
    by_frequency(train.resource_tag_frequencies(resource), k)
}

/// MP_u,r: softmax-normalized user and resource frequencies mixed with
/// weight `beta` on the user side.
pub fn mp_ur(
    train: &Folksonomy,
    user: UserId,
    resource: ResourceId,
    beta: f64,
    k: usize,
) -> Result<RankedTags, RecommendError> {
    check_beta(beta)?;
    let mixed = mix_components(
        &as_scores(train.user_tag_frequencies(user)),
        &as_scores(train.resource_tag_frequencies(resource)),
        beta,
        AbsentTags::NeutralScore,
    );
    Ok(RankedTags::from_scores(mixed, k))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PopularityKind {
    Global,
    User,
    Resource,
    UserResource { beta: f64 },
}

/// Most-popular recommenders behind the common interface.
pub struct MostPopular<'a> {
    train: &'a Folksonomy,
    kind: PopularityKind,
}

impl<'a> MostPopular<'a> {
    pub fn new(train: &'a Folksonomy, kind: PopularityKind) -> Self {
        Self { train, kind }
    }
}

impl TagRecommender for MostPopular<'_> {
    fn name(&self) -> &str {
        match self.kind {
            PopularityKind::Global => "mp",
            PopularityKind::User => "mp-u",
            PopularityKind::Resource => "mp-r",
            PopularityKind::UserResource { .. } => "mp-ur",
        }
    }

    fn recommend(&self, query: &Query, k: usize) -> Result<RankedTags, RecommendError> {
        match self.kind {
            PopularityKind::Global => Ok(mp(self.train, k)),
            PopularityKind::User => Ok(mp_u(self.train, query.user, k)),
            PopularityKind::Resource => Ok(mp_r(self.train, query.resource, k)),
            PopularityKind::UserResource { beta } => mp_ur(self.train, query.user, query.resource, beta, k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folksonomy::{Blacklist, FolksonomyBuilder};

    fn train() -> Folksonomy {
        let mut b = FolksonomyBuilder::new(Blacklist::empty());
        for (u, r, t) in [
            ("u", "r1", "a"),
            ("u", "r1", "b"),
            ("u", "r2", "a"),
            ("u", "r2", "b"),
            ("v", "r1", "a"),
            ("v", "r3", "c"),
        ] {
            b.add_row(u, r, t, 1).unwrap();
        }
        b.build().unwrap()
    }

    fn names(f: &Folksonomy, r: &RankedTags) -> Vec<alloc::string::String> {
        r.tags().map(|t| f.tag_name(t).into()).collect()
    }

    #[test]
    fn global_counts() {
        let f = train();
        // a:3, b:2, c:1
        assert_eq!(names(&f, &mp(&f, 10)), ["a", "b", "c"]);
    }

    #[test]
    fn user_tie_broken_by_tag_id() {
        let f = train();
        let u = f.user_id("u").unwrap();
        // a:2, b:2
        assert_eq!(names(&f, &mp_u(&f, u, 10)), ["a", "b"]);
    }

    #[test]
    fn unseen_resource_is_empty() {
        let f = train();
        assert!(mp_r(&f, ResourceId(99), 10).is_empty());
        assert!(mp_u(&f, UserId(99), 10).is_empty());
    }

    #[test]
    fn mp_ur_reductions() {
        let f = train();
        let u = f.user_id("u").unwrap();
        let v = f.user_id("v").unwrap();
        let r1 = f.resource_id("r1").unwrap();
        let only_user = mp_ur(&f, v, ResourceId(99), 0.5, 10).unwrap();
        assert_eq!(names(&f, &only_user), names(&f, &mp_u(&f, v, 10)));
        let only_resource = mp_ur(&f, UserId(99), r1, 0.5, 10).unwrap();
        assert_eq!(names(&f, &only_resource), names(&f, &mp_r(&f, r1, 10)));
        assert!(mp_ur(&f, u, r1, -0.1, 10).is_err());
    }
}
