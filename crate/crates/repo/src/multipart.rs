//! Just enough of `multipart/form-data` for the compile protocol.

pub(crate) struct Part {
    pub name: String,
    pub filename: Option<String>,
    pub data: Vec<u8>,
}

impl Part {
    pub fn field(name: &str, value: &str) -> Part {
        Part {
            name: name.into(),
            filename: None,
            data: value.as_bytes().to_vec(),
        }
    }

    pub fn file(name: &str, filename: &str, data: &[u8]) -> Part {
        Part {
            name: name.into(),
            filename: Some(filename.into()),
            data: data.to_vec(),
        }
    }

    pub fn text(&self) -> Result<String, String> {
        String::from_utf8(self.data.clone()).map_err(|_| format!("part {} is not UTF-8", self.name))
    }
}

/// Returns the Content-Type header value and the body.
pub(crate) fn write(parts: &[Part]) -> (String, Vec<u8>) {
    let boundary = pick_boundary(parts);
    let mut body = Vec::new();
    for p in parts {
        body.extend_from_slice(format!("--{boundary}\r\n").as_bytes());
        let disposition = match &p.filename {
            Some(f) => format!("Content-Disposition: form-data; name=\"{}\"; filename=\"{f}\"\r\n", p.name),
            None => format!("Content-Disposition: form-data; name=\"{}\"\r\n", p.name),
        };
        body.extend_from_slice(disposition.as_bytes());
        if p.filename.is_some() {
            body.extend_from_slice(b"Content-Type: application/octet-stream\r\n");
        }
        body.extend_from_slice(b"\r\n");
        body.extend_from_slice(&p.data);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    (format!("multipart/form-data; boundary={boundary}"), body)
}

fn pick_boundary(parts: &[Part]) -> String {
    let mut n = 0u32;
    loop {
        let b = format!("comodi-boundary-{n}");
        if !parts.iter().any(|p| find(&p.data, b.as_bytes(), 0).is_some()) {
            return b;
        }
        n += 1;
    }
}

fn find(hay: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    if needle.len() > hay.len() {
        return None;
    }
    (from..=hay.len() - needle.len()).find(|&i| &hay[i..i + needle.len()] == needle)
}

pub(crate) fn parse(content_type: &str, body: &[u8]) -> Result<Vec<Part>, String> {
    let (mime, params) = content_type.split_once(';').unwrap_or((content_type, ""));
    if !mime.trim().eq_ignore_ascii_case("multipart/form-data") {
        return Err(format!("expected multipart/form-data, got {content_type:?}"));
    }
    let boundary = params
        .split(';')
        .filter_map(|p| p.trim().split_once('='))
        .find(|(k, _)| k.eq_ignore_ascii_case("boundary"))
        .map(|(_, v)| v.trim_matches('"'))
        .filter(|b| !b.is_empty())
        .ok_or("multipart body without a boundary")?;
    let delim = format!("--{boundary}").into_bytes();
    let mut pos = find(body, &delim, 0).ok_or("no opening boundary")? + delim.len();
    let mut parts = Vec::new();
    loop {
        if body[pos..].starts_with(b"--") {
            return Ok(parts);
        }
        if !body[pos..].starts_with(b"\r\n") {
            return Err("malformed boundary line".into());
        }
        pos += 2;
        let head_end = find(body, b"\r\n\r\n", pos).ok_or("unterminated part headers")?;
        let head = std::str::from_utf8(&body[pos..head_end]).map_err(|_| "part headers are not UTF-8")?;
        let mut closing = b"\r\n".to_vec();
        closing.extend_from_slice(&delim);
        let data_start = head_end + 4;
        let data_end = find(body, &closing, data_start).ok_or("unterminated part")?;
        let (name, filename) = disposition(head)?;
        parts.push(Part {
            name,
            filename,
            data: body[data_start..data_end].to_vec(),
        });
        pos = data_end + closing.len();
    }
}

fn disposition(head: &str) -> Result<(String, Option<String>), String> {
    let line = head
        .lines()
        .find(|l| l.to_ascii_lowercase().starts_with("content-disposition:"))
        .ok_or("part without Content-Disposition")?;
    let param = |key: &str| {
        line.split(';')
            .map(str::trim)
            .find_map(|p| p.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
            .map(|v| v.trim_matches('"').to_string())
    };
    let name = param("name").ok_or("part without a name")?;
    Ok((name, param("filename")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let parts = vec![
            Part::field("language", "c"),
            Part::file("source", "a.c", b"int x;\r\n--comodi-boundary-0\r\n"),
            Part::file("source", "empty.h", b""),
        ];
        let (ct, body) = write(&parts);
        assert!(ct.ends_with("comodi-boundary-1"));
        let back = parse(&ct, &body).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[0].text().unwrap(), "c");
        assert_eq!(back[1].filename.as_deref(), Some("a.c"));
        assert_eq!(back[1].data, parts[1].data);
        assert!(back[2].data.is_empty());
    }

    #[test]
    fn rejects_missing_boundary() {
        assert!(parse("text/plain", b"").is_err());
        assert!(parse("multipart/form-data", b"").is_err());
        assert!(parse("multipart/form-data; boundary=x", b"--x\r\nno headers").is_err());
    }
}
