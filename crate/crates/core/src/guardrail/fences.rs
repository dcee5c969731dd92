//! Fenced code block detection.
//!
//! A fence is a line whose first non-blank characters are three or more
//! backticks. An opening fence may carry an info string, which must not
//! contain backticks (so ```` ```a``` ```` on its own line is inline code, not
//! a fence). A block closes at the next fence line of at least the same
//! length with nothing else on it, or at end of input.

struct FenceLine<'a> {
    ticks: usize,
    rest: &'a str,
}

fn fence_line(line: &str) -> Option<FenceLine<'_>> {
    let trimmed = line.trim_start_matches([' ', '\t']);
    let ticks = trimmed.bytes().take_while(|&b| b == b'`').count();
    (ticks >= 3).then(|| FenceLine {
        ticks,
        rest: &trimmed[ticks..],
    })
}

/// Number of fenced code blocks in `text`. An unterminated trailing block
/// counts as one.
pub fn detect_code_blocks(text: &str) -> usize {
    let mut count = 0;
    let mut open: Option<usize> = None;
    for line in text.lines() {
        let Some(fence) = fence_line(line) else { continue };
        match open {
            None => {
                if !fence.rest.contains('`') {
                    open = Some(fence.ticks);
                    count += 1;
                }
            }
            Some(ticks) => {
                if fence.ticks >= ticks && fence.rest.trim().is_empty() {
                    open = None;
                }
            }
        }
    }
    count
}

pub fn has_code_block(text: &str) -> bool {
    detect_code_blocks(text) > 0
}
