//! Pulls the script out of a chat reply.

const FENCE: &str = "```";

/// Returns the interior of the first ``` fenced block in `reply`, or the
/// whole reply trimmed when there is none. A word directly after the opening
/// fence (a language tag) is dropped. An unclosed fence runs to the end of
/// the text.
pub fn extract_script(reply: &str) -> String {
    let Some(open) = reply.find(FENCE) else {
        return reply.trim().to_string();
    };
    let after = &reply[open + FENCE.len()..];
    let (first_line, rest) = match after.find('\n') {
        Some(i) => (&after[..i], Some(&after[i + 1..])),
        None => (after, None),
    };
    if let Some(close) = first_line.find(FENCE) {
        return first_line[..close].trim().to_string();
    }
    let Some(rest) = rest else {
        return first_line.trim().to_string();
    };
    let tag = first_line.trim();
    let head = if is_language_tag(tag) { "" } else { first_line };
    let body = match rest.find(FENCE) {
        Some(close) => &rest[..close],
        None => rest,
    };
    let mut out = String::with_capacity(head.len() + body.len() + 1);
    if !head.trim().is_empty() {
        out.push_str(head);
        out.push('\n');
    }
    out.push_str(body);
    out.trim().to_string()
}

fn is_language_tag(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '+' | '.' | '#'))
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prose_around_fence() {
        assert_eq!(
            extract_script("Sure! ```\nset_bot_position((15,25,0))\n``` Done."),
            "set_bot_position((15,25,0))"
        );
    }

    #[test]
    fn bare_reply_verbatim() {
        assert_eq!(extract_script("set_yaw(90)"), "set_yaw(90)");
        assert_eq!(extract_script("  set_yaw(90)\n"), "set_yaw(90)");
        assert_eq!(extract_script(""), "");
    }

    #[test]
    fn first_block_wins_and_tags_are_dropped() {
        let reply = "```python\nset_yaw(1)\n```\nor\n```\nset_yaw(2)\n```";
        assert_eq!(extract_script(reply), "set_yaw(1)");
        assert_eq!(
            extract_script("```chatscript\nset_yaw(3)\n```"),
            "set_yaw(3)"
        );
    }

    #[test]
    fn code_on_the_fence_line_is_kept() {
        assert_eq!(extract_script("```set_yaw(1)```"), "set_yaw(1)");
        assert_eq!(
            extract_script("```set_yaw(1)\nset_pitch(2)\n```"),
            "set_yaw(1)\nset_pitch(2)"
        );
    }

    #[test]
    fn unclosed_fence_runs_to_end() {
        assert_eq!(extract_script("ok ```\nset_roll(5)\n"), "set_roll(5)");
        assert_eq!(extract_script("```"), "");
        assert_eq!(extract_script("``````"), "");
    }
}
