use std::fmt;

use super::prompt::build_system_prompt;
use super::transcript::Transcript;
use super::Role;
use crate::chatscript::Catalog;

/// The first outbound message that breaks the closed loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopViolation {
    pub exchange: usize,
    /// Position among all outbound messages in the transcript.
    pub message_index: usize,
    pub reason: String,
}

impl fmt::Display for LoopViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "outbound message {} (exchange {}): {}",
            self.message_index, self.exchange, self.reason
        )
    }
}

/// Passes iff every exchange sent exactly `[system prompt, user text]`, where
/// the system prompt is the one built from `catalog` and the user text is the
/// input recorded for that exchange, byte for byte. Anything else (extra
/// messages, reworded or augmented input) is reported at its index.
pub fn assert_closed_loop(transcript: &Transcript, catalog: &Catalog) -> Result<(), LoopViolation> {
    let prompt = build_system_prompt(catalog);
    let inputs = transcript.user_inputs();
    let mut message_index = 0;
    for ex in transcript.exchanges() {
        let fail = |offset: usize, reason: String| LoopViolation {
            exchange: ex.index,
            message_index: message_index + offset,
            reason,
        };
        let Some(system) = ex.outbound.first() else {
            return Err(fail(0, "exchange sent no messages".into()));
        };
        if system.role != Role::System || system.content != prompt {
            return Err(fail(
                0,
                "first message is not the catalog system prompt".into(),
            ));
        }
        let Some(user) = ex.outbound.get(1) else {
            return Err(fail(1, "no user message".into()));
        };
        let Some(input) = inputs.get(ex.input) else {
            return Err(fail(1, format!("refers to unrecorded input {}", ex.input)));
        };
        if user.role != Role::User || user.content != *input {
            return Err(fail(
                1,
                "user message differs from the text the user entered".into(),
            ));
        }
        if ex.outbound.len() > 2 {
            return Err(fail(
                2,
                format!("{} extra message(s) sent", ex.outbound.len() - 2),
            ));
        }
        message_index += ex.outbound.len();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::Message;
    use super::*;

    fn honest(t: &mut Transcript, text: &str) {
        let prompt = build_system_prompt(&Catalog::standard());
        let i = t.record_input(text);
        let x = t.begin("replay", i, &[Message::system(prompt), Message::user(text)]);
        t.finish(x, Ok("```\nset_yaw(1)\n```"));
    }

    #[test]
    fn empty_transcript_passes() {
        assert!(assert_closed_loop(&Transcript::new(), &Catalog::standard()).is_ok());
    }

    #[test]
    fn augmented_user_turn_fails_at_its_index() {
        let mut t = Transcript::new();
        honest(&mut t, "go to 1,2,3");
        honest(&mut t, "turn left");
        assert!(assert_closed_loop(&t, &Catalog::standard()).is_ok());
        t.exchanges_mut()[1].outbound[1]
            .content
            .push_str("\nget_bot_position() = (1, 2, 3)");
        let v = assert_closed_loop(&t, &Catalog::standard()).unwrap_err();
        assert_eq!((v.exchange, v.message_index), (1, 3));
    }

    #[test]
    fn history_or_altered_prompt_fails() {
        let mut t = Transcript::new();
        honest(&mut t, "a");
        t.exchanges_mut()[0]
            .outbound
            .push(Message::assistant("oyster_1 is at (3, 0, 0)"));
        assert_eq!(
            assert_closed_loop(&t, &Catalog::standard())
                .unwrap_err()
                .message_index,
            2
        );

        let mut t = Transcript::new();
        honest(&mut t, "a");
        t.exchanges_mut()[0].outbound[0]
            .content
            .push_str("agent at (0,0,0)");
        assert_eq!(
            assert_closed_loop(&t, &Catalog::standard())
                .unwrap_err()
                .message_index,
            0
        );
    }
}
