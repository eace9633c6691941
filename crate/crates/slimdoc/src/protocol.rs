//! The intent-tagged response wire format used for fine-tuning targets and
//! inference outputs, plus intent-classification scoring.
//!
//! Wire format, byte-exact:
//!
//! ```text
//! <intent>: summarization
//! <response>
//! ...task response...
//! </response>
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("no intent")]
    NoIntent,
    #[error("unknown intent: {0:?}")]
    UnknownIntent(String),
    #[error("unterminated response")]
    UnterminatedResponse,
    #[error("length mismatch: {predicted} predictions vs {gold} gold labels")]
    LengthMismatch { predicted: usize, gold: usize },
    #[error("empty input")]
    EmptyInput,
}

/// The three document-assistance tasks. Closed set; parsing any other token
/// is an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intent {
    Summarization,
    QuestionSuggestion,
    QuestionAnswering,
}

impl Intent {
    pub const ALL: [Intent; 3] = [
        Intent::Summarization,
        Intent::QuestionSuggestion,
        Intent::QuestionAnswering,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Intent::Summarization => "summarization",
            Intent::QuestionSuggestion => "question_suggestion",
            Intent::QuestionAnswering => "question_answering",
        }
    }
}

impl fmt::Display for Intent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Intent {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "summarization" => Ok(Intent::Summarization),
            "question_suggestion" => Ok(Intent::QuestionSuggestion),
            "question_answering" => Ok(Intent::QuestionAnswering),
            other => Err(ProtocolError::UnknownIntent(other.to_string())),
        }
    }
}

/// One assistant turn: a detected task plus the raw task response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssistantReply {
    pub intent: Intent,
    pub response: String,
}

const INTENT_TAG: &str = "<intent>:";
const RESPONSE_OPEN: &str = "<response>";
const RESPONSE_CLOSE: &str = "</response>";

/// Emits exactly `<intent>: {name}\n<response>\n{response}\n</response>`.
pub fn serialize_reply(reply: &AssistantReply) -> String {
    format!(
        "{INTENT_TAG} {}\n{RESPONSE_OPEN}\n{}\n{RESPONSE_CLOSE}",
        reply.intent, reply.response
    )
}

/// Parse a reply, tolerating leading/trailing whitespace around the block.
///
/// The intent token is matched case-sensitively. The response is the text
/// strictly between the first `<response>` and the *last* `</response>`, so
/// bodies containing the closing tag mid-text are still recoverable.
pub fn parse_reply(text: &str) -> Result<AssistantReply, ProtocolError> {
    let trimmed = text.trim();
    let intent_at = trimmed.find(INTENT_TAG).ok_or(ProtocolError::NoIntent)?;
    let after_tag = &trimmed[intent_at + INTENT_TAG.len()..];
    let intent_line = after_tag.lines().next().unwrap_or("");
    let intent: Intent = intent_line.trim().parse()?;

    let open_at = after_tag
        .find(RESPONSE_OPEN)
        .ok_or(ProtocolError::UnterminatedResponse)?;
    let body_start = open_at + RESPONSE_OPEN.len();
    let close_at = after_tag
        .rfind(RESPONSE_CLOSE)
        .filter(|&c| c >= body_start)
        .ok_or(ProtocolError::UnterminatedResponse)?;
    let raw = &after_tag[body_start..close_at];
    // serialize_reply frames the body with exactly one newline on each side.
    let body = raw.strip_prefix('\n').unwrap_or(raw);
    let body = body.strip_suffix('\n').unwrap_or(body);
    Ok(AssistantReply {
        intent,
        response: body.to_string(),
    })
}

/// Fraction of predictions matching gold; unparseable predictions (`None`)
/// count as wrong.
pub fn intent_accuracy(
    predicted: &[Option<Intent>],
    gold: &[Intent],
) -> Result<f64, ProtocolError> {
    if predicted.len() != gold.len() {
        return Err(ProtocolError::LengthMismatch {
            predicted: predicted.len(),
            gold: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(ProtocolError::EmptyInput);
    }
    let matches = predicted
        .iter()
        .zip(gold)
        .filter(|(p, g)| p.as_ref() == Some(g))
        .count();
    Ok(matches as f64 / gold.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn serialize_matches_wire_format() {
        let r = AssistantReply {
            intent: Intent::Summarization,
            response: "S.".into(),
        };
        assert_eq!(
            serialize_reply(&r),
            "<intent>: summarization\n<response>\nS.\n</response>"
        );
    }

    #[test]
    fn question_suggestion_payload_is_opaque() {
        let payload = r#"["Q one?","Q two?","Q three?"]"#;
        let r = AssistantReply {
            intent: Intent::QuestionSuggestion,
            response: payload.into(),
        };
        let parsed = parse_reply(&serialize_reply(&r)).unwrap();
        assert_eq!(parsed.response, payload);
    }

    #[test]
    fn parses_full_format_with_surrounding_whitespace() {
        let text = "\n  <intent>: question_answering\n<response>\nThe answer.\n</response>  \n";
        let r = parse_reply(text).unwrap();
        assert_eq!(r.intent, Intent::QuestionAnswering);
        assert_eq!(r.response, "The answer.");
    }

    #[test]
    fn missing_intent_line() {
        assert_eq!(parse_reply("hello"), Err(ProtocolError::NoIntent));
    }

    #[test]
    fn unknown_intent_token() {
        let text = "<intent>: translation\n<response>\nx\n</response>";
        assert!(matches!(
            parse_reply(text),
            Err(ProtocolError::UnknownIntent(_))
        ));
    }

    #[test]
    fn intent_is_case_sensitive() {
        let text = "<intent>: Summarization\n<response>\nx\n</response>";
        assert!(matches!(
            parse_reply(text),
            Err(ProtocolError::UnknownIntent(_))
        ));
    }

    #[test]
    fn unterminated_response_block() {
        let text = "<intent>: summarization\n<response>\nstill going";
        assert_eq!(parse_reply(text), Err(ProtocolError::UnterminatedResponse));
    }

    #[test]
    fn body_containing_closing_tag_mid_text_survives() {
        let body = "a </response> in the middle";
        let r = AssistantReply {
            intent: Intent::QuestionAnswering,
            response: body.into(),
        };
        assert_eq!(parse_reply(&serialize_reply(&r)).unwrap().response, body);
    }

    #[test]
    fn accuracy_three_of_four() {
        let gold = [
            Intent::Summarization,
            Intent::QuestionSuggestion,
            Intent::QuestionAnswering,
            Intent::Summarization,
        ];
        let pred = [
            Some(Intent::Summarization),
            Some(Intent::QuestionSuggestion),
            Some(Intent::QuestionAnswering),
            None,
        ];
        assert_eq!(intent_accuracy(&pred, &gold).unwrap(), 0.75);
    }

    #[test]
    fn accuracy_all_correct_is_one() {
        let gold = vec![Intent::QuestionAnswering; 8];
        let pred: Vec<_> = gold.iter().copied().map(Some).collect();
        assert_eq!(intent_accuracy(&pred, &gold).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_2097_of_2100() {
        let gold = vec![Intent::Summarization; 2100];
        let mut pred: Vec<_> = gold.iter().copied().map(Some).collect();
        pred[0] = None;
        pred[1] = Some(Intent::QuestionAnswering);
        pred[2] = Some(Intent::QuestionSuggestion);
        let acc = intent_accuracy(&pred, &gold).unwrap();
        assert_eq!(acc, 2097.0 / 2100.0);
        assert!((acc - 0.9986).abs() < 5e-5);
    }

    #[test]
    fn accuracy_length_mismatch_and_empty() {
        assert!(matches!(
            intent_accuracy(&[None], &[]),
            Err(ProtocolError::LengthMismatch { .. })
        ));
        assert!(matches!(
            intent_accuracy(&[], &[]),
            Err(ProtocolError::EmptyInput)
        ));
    }

    fn intent_strategy() -> impl Strategy<Value = Intent> {
        prop_oneof![
            Just(Intent::Summarization),
            Just(Intent::QuestionSuggestion),
            Just(Intent::QuestionAnswering),
        ]
    }

    proptest! {
        #[test]
        fn prop_serialize_parse_identity(
            intent in intent_strategy(),
            response in "\\PC{0,120}",
        ) {
            let r = AssistantReply { intent, response };
            prop_assert_eq!(parse_reply(&serialize_reply(&r)).unwrap(), r);
        }

        #[test]
        fn prop_parse_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
            let text = String::from_utf8_lossy(&bytes);
            let _ = parse_reply(&text);
        }
    }
}
