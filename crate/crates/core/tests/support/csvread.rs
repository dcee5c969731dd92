//! Minimal RFC 4180 reader.

pub fn parse(input: &str) -> Vec<Vec<String>> {
    let mut records = Vec::new();
    let mut record = Vec::new();
    let mut field = String::new();
    let mut chars = input.chars().peekable();
    let mut in_quotes = false;
    let mut field_started = false;

    while let Some(c) = chars.next() {
        if in_quotes {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    field.push('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push(c);
            }
            continue;
        }
        match c {
            '"' if !field_started => {
                in_quotes = true;
                field_started = true;
            }
            ',' => {
                record.push(std::mem::take(&mut field));
                field_started = false;
            }
            '\r' if chars.peek() == Some(&'\n') => {}
            '\n' => {
                record.push(std::mem::take(&mut field));
                records.push(std::mem::take(&mut record));
                field_started = false;
            }
            other => {
                field.push(other);
                field_started = true;
            }
        }
    }
    assert!(!in_quotes, "unterminated quoted field");
    if field_started || !record.is_empty() {
        record.push(field);
        records.push(record);
    }
    records
}

#[test]
fn reader_handles_quotes_and_embedded_newlines() {
    let rows = parse("a,b\r\n\"x,1\",\"say \"\"hi\"\"\nthere\"\r\n,\r\n");
    assert_eq!(
        rows,
        vec![
            vec!["a".to_string(), "b".to_string()],
            vec!["x,1".to_string(), "say \"hi\"\nthere".to_string()],
            vec![String::new(), String::new()],
        ]
    );
}
