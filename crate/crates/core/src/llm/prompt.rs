//! The two fixed prompt templates.
//!
//! Template 1 asks for an open top-n list, template 2 re-ranks a supplied
//! candidate list. Both share the persona prefix and the profile rendering
//! ("Title" or "Title r/max" for explicit ratings); no domain word ever
//! appears, the model has to infer it from the titles.

use super::LlmError;

const PREFIX: &str = "Given a user, as a recommender system, provide recommendations.";

/// One profile row: a title plus the optional (rating, scale max) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileEntry {
    pub title: String,
    pub rating: Option<(f64, f64)>,
}

fn format_number(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Comma-separated profile, e.g. `Mad Max: Fury Road (2015) 5/5, Whiplash (2014) 4/5`.
pub fn render_profile(profile: &[ProfileEntry]) -> String {
    profile
        .iter()
        .map(|entry| match entry.rating {
            Some((r, max)) => {
                format!("{} {}/{}", entry.title, format_number(r), format_number(max))
            }
            None => entry.title.clone(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// Conservative provider-neutral token estimate: ceil(chars / 4).
pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

fn check_budget(
    prompt: String,
    raw_user: &str,
    token_budget: usize,
    response_reserve: usize,
) -> Result<String, LlmError> {
    let available = token_budget.saturating_sub(response_reserve);
    let estimated = estimate_tokens(&prompt);
    if estimated > available {
        return Err(LlmError::PromptOverBudget {
            user: raw_user.to_string(),
            estimated,
            available,
        });
    }
    Ok(prompt)
}

/// Template 1: `... Give me back {n} recommendations.`
pub fn build_prompt_top_n(
    raw_user: &str,
    profile: &[ProfileEntry],
    n: usize,
    token_budget: usize,
    response_reserve: usize,
) -> Result<String, LlmError> {
    if profile.is_empty() {
        return Err(LlmError::EmptyProfile(raw_user.to_string()));
    }
    let prompt = format!(
        "{PREFIX} The user {raw_user} likes the following items: {}. Give me back {n} recommendations.",
        render_profile(profile)
    );
    check_budget(prompt, raw_user, token_budget, response_reserve)
}

/// Template 2: `... Re-rank me the following list: {candidates}`
pub fn build_prompt_rerank(
    raw_user: &str,
    profile: &[ProfileEntry],
    candidates: &[String],
    token_budget: usize,
    response_reserve: usize,
) -> Result<String, LlmError> {
    if profile.is_empty() {
        return Err(LlmError::EmptyProfile(raw_user.to_string()));
    }
    if candidates.is_empty() {
        return Err(LlmError::EmptyCandidates(raw_user.to_string()));
    }
    let prompt = format!(
        "{PREFIX} The user {raw_user} likes the following items: {}. Re-rank me the following list: {}",
        render_profile(profile),
        candidates.join(", ")
    );
    check_budget(prompt, raw_user, token_budget, response_reserve)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rated(title: &str, r: f64, max: f64) -> ProfileEntry {
        ProfileEntry {
            title: title.into(),
            rating: Some((r, max)),
        }
    }

    fn implicit(title: &str) -> ProfileEntry {
        ProfileEntry {
            title: title.into(),
            rating: None,
        }
    }

    #[test]
    fn top_n_prompt_matches_template_exactly() {
        let prompt = build_prompt_top_n(
            "1",
            &[rated("Mad Max: Fury Road (2015)", 5.0, 5.0), rated("Whiplash (2014)", 4.0, 5.0)],
            50,
            4096,
            1000,
        )
        .unwrap();
        assert_eq!(
            prompt,
            "Given a user, as a recommender system, provide recommendations. \
             The user 1 likes the following items: Mad Max: Fury Road (2015) 5/5, \
             Whiplash (2014) 4/5. Give me back 50 recommendations."
        );
    }

    #[test]
    fn implicit_profiles_render_without_rating_suffix() {
        let prompt =
            build_prompt_top_n("u9", &[implicit("Dune"), implicit("Foundation")], 10, 4096, 1000)
                .unwrap();
        assert!(prompt.contains("likes the following items: Dune, Foundation."));
        assert!(!prompt.contains('/'));
    }

    #[test]
    fn fractional_ratings_keep_their_digits() {
        assert_eq!(render_profile(&[rated("X", 4.5, 5.0)]), "X 4.5/5");
    }

    #[test]
    fn rerank_prompt_preserves_candidate_order() {
        let candidates: Vec<String> = ["C", "A", "B"].into_iter().map(String::from).collect();
        let prompt =
            build_prompt_rerank("u1", &[implicit("Seed")], &candidates, 4096, 1000).unwrap();
        assert!(prompt.ends_with("Re-rank me the following list: C, A, B"));
    }

    #[test]
    fn empty_profile_is_rejected() {
        assert!(matches!(
            build_prompt_top_n("u1", &[], 50, 4096, 1000),
            Err(LlmError::EmptyProfile(_))
        ));
        assert!(matches!(
            build_prompt_rerank("u1", &[], &["A".into()], 4096, 1000),
            Err(LlmError::EmptyCandidates(_)) | Err(LlmError::EmptyProfile(_))
        ));
    }

    #[test]
    fn oversized_prompt_errors_with_the_user() {
        let profile: Vec<ProfileEntry> =
            (0..400).map(|i| implicit(&format!("Some Long Movie Title {i} (2001)"))).collect();
        match build_prompt_top_n("u7", &profile, 50, 4096, 1000) {
            Err(LlmError::PromptOverBudget { user, .. }) => assert_eq!(user, "u7"),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn estimate_is_ceil_of_quarter_chars() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("abcd"), 1);
        assert_eq!(estimate_tokens("abcde"), 2);
    }
}
