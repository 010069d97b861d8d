//! Outbound message framing and reply parsing.

/// One user message: the prompt verbatim, a blank line, then the code in a
/// fenced block tagged with the language.
pub fn build_message(prompt: &str, source_code: &str, language_hint: &str) -> String {
    let fence = fence_for(source_code);
    format!("{prompt}\n\n{fence}{language_hint}\n{source_code}\n{fence}")
}

/// A fence longer than any backtick run at the start of a code line, so the
/// code can never close the block early.
fn fence_for(code: &str) -> String {
    let longest = code
        .lines()
        .map(|l| l.trim_start().chars().take_while(|c| *c == '`').count())
        .max()
        .unwrap_or(0);
    "`".repeat(longest.max(2) + 1)
}

/// Text before the first fence: the prompt part of a framed message.
pub fn prompt_part(message: &str) -> &str {
    match find_block(message) {
        Some(block) => message[..block.start].trim_end_matches('\n'),
        None => message,
    }
}

/// Contents of the first fenced code block, without the fence lines.
pub fn extract_code(reply: &str) -> Option<String> {
    find_block(reply).map(|b| b.body)
}

/// Language tag of the first fenced block, if any.
pub fn extract_language(reply: &str) -> Option<String> {
    find_block(reply).map(|b| b.info).filter(|s| !s.is_empty())
}

struct Block {
    start: usize,
    info: String,
    body: String,
}

fn find_block(text: &str) -> Option<Block> {
    let mut offset = 0;
    let mut open: Option<(usize, usize, String)> = None;
    let mut body: Vec<&str> = Vec::new();
    for raw in text.split('\n') {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let line_start = offset;
        offset += raw.len() + 1;
        let ticks = line.chars().take_while(|c| *c == '`').count();
        match &open {
            None if ticks >= 3 => {
                open = Some((line_start, ticks, line[ticks..].trim().to_string()));
            }
            None => {}
            Some((start, width, info)) => {
                if ticks >= *width && line[ticks..].trim().is_empty() {
                    return Some(Block {
                        start: *start,
                        info: info.clone(),
                        body: body.join("\n"),
                    });
                }
                body.push(line);
            }
        }
    }
    None
}
