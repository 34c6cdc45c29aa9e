//! Deterministic offline stand-ins for a live endpoint, so the whole
//! pipeline is exercisable (and testable) without network access.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ChatClient, ChatRequest, LlmError};

/// Scripted chat clients selectable by name from the CLI.
pub enum StubClient {
    /// Replays a fixed titled list per user as a numbered response
    /// (wrapping any baseline's output turns the pipeline into an identity).
    Echo {
        id: String,
        lists: BTreeMap<String, Vec<String>>,
    },
    /// Returns the prompt's candidate list in reverse order.
    ReverseCandidates,
    /// Emits titles that match nothing in any real catalog.
    Gibberish { titles: usize, seed: u64 },
}

impl StubClient {
    pub fn echo(id: impl Into<String>, lists: BTreeMap<String, Vec<String>>) -> Self {
        StubClient::Echo {
            id: id.into(),
            lists,
        }
    }

    fn numbered(titles: &[String]) -> String {
        titles
            .iter()
            .enumerate()
            .map(|(i, t)| format!("{}. {t}", i + 1))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl ChatClient for StubClient {
    fn model_id(&self) -> &str {
        match self {
            StubClient::Echo { id, .. } => id,
            StubClient::ReverseCandidates => "stub:reverse-candidates",
            StubClient::Gibberish { .. } => "stub:gibberish",
        }
    }

    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, LlmError> {
        match self {
            StubClient::Echo { lists, .. } => {
                let titles = lists.get(request.raw_user).ok_or_else(|| {
                    LlmError::Transport(format!("echo stub has no list for {}", request.raw_user))
                })?;
                Ok(Self::numbered(titles))
            }
            StubClient::ReverseCandidates => {
                let candidates = request.candidates.ok_or_else(|| {
                    LlmError::Transport("reverse stub needs a candidate list".into())
                })?;
                let reversed: Vec<String> = candidates.iter().rev().cloned().collect();
                Ok(Self::numbered(&reversed))
            }
            StubClient::Gibberish { titles, seed } => {
                let mut h: u64 = 0xcbf29ce484222325;
                for b in request.raw_user.as_bytes() {
                    h ^= u64::from(*b);
                    h = h.wrapping_mul(0x100000001b3);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ h);
                let consonants: Vec<char> = "bcdfghjklmnpqrstvwxz".chars().collect();
                let lines: Vec<String> = (0..*titles)
                    .map(|_| {
                        let word = |rng: &mut ChaCha8Rng, len: usize| -> String {
                            (0..len)
                                .map(|_| consonants[rng.gen_range(0..consonants.len())])
                                .collect()
                        };
                        format!(
                            "{} {} {}",
                            word(&mut rng, 7),
                            word(&mut rng, 8),
                            word(&mut rng, 6)
                        )
                    })
                    .collect();
                Ok(Self::numbered(&lines))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_replays_the_configured_list() {
        let stub = StubClient::echo(
            "stub:echo",
            BTreeMap::from([("u1".to_string(), vec!["Dune".to_string(), "Alien".to_string()])]),
        );
        let reply = stub
            .complete(&ChatRequest {
                raw_user: "u1",
                prompt: "ignored",
                candidates: None,
            })
            .unwrap();
        assert_eq!(reply, "1. Dune\n2. Alien");
    }

    #[test]
    fn reverse_stub_reverses_candidates() {
        let candidates: Vec<String> = ["A", "B", "C"].into_iter().map(String::from).collect();
        let reply = StubClient::ReverseCandidates
            .complete(&ChatRequest {
                raw_user: "u1",
                prompt: "ignored",
                candidates: Some(&candidates),
            })
            .unwrap();
        assert_eq!(reply, "1. C\n2. B\n3. A");
    }

    #[test]
    fn gibberish_is_deterministic_per_user() {
        let stub = StubClient::Gibberish { titles: 5, seed: 9 };
        let req = |user: &'static str| ChatRequest {
            raw_user: user,
            prompt: "ignored",
            candidates: None,
        };
        assert_eq!(
            stub.complete(&req("u1")).unwrap(),
            stub.complete(&req("u1")).unwrap()
        );
        assert_ne!(
            stub.complete(&req("u1")).unwrap(),
            stub.complete(&req("u2")).unwrap()
        );
    }
}
