//! A small, strict XML reader for the MDL dialect.
//!
//! Supports exactly what MDL needs: an optional `<?xml ...?>` declaration,
//! comments, elements with attributes, self-closing tags and the five
//! predefined entities plus numeric character references. Non-whitespace
//! character data, CDATA, DOCTYPE and processing instructions are rejected.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::error::{ParseCode, ParseError, Span};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Attribute {
    pub name: String,
    pub value: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Element {
    pub name: String,
    pub attrs: Vec<Attribute>,
    pub children: Vec<Element>,
    pub span: Span,
}

pub(crate) fn read_document(text: &str) -> Result<Element, ParseError> {
    let mut r = Reader::new(text);
    r.skip_bom();
    r.skip_misc(true)?;
    if r.at_end() {
        return Err(r.error(ParseCode::MalformedXml, "document has no root element"));
    }
    let root = r.element()?;
    r.skip_misc(false)?;
    if !r.at_end() {
        return Err(r.error(ParseCode::MalformedXml, "content after the root element"));
    }
    Ok(root)
}

struct Reader<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0, line: 1, col: 1 }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn span(&self) -> Span {
        Span { line: self.line, col: self.col }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            for _ in s.chars() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(ParseCode::MalformedXml, &format!("expected `{s}`")))
        }
    }

    fn error(&self, code: ParseCode, message: &str) -> ParseError {
        self.error_at(self.span(), code, message)
    }

    fn error_at(&self, span: Span, code: ParseCode, message: &str) -> ParseError {
        ParseError { line: span.line, col: span.col, code, message: message.to_string() }
    }

    fn skip_bom(&mut self) {
        if self.rest().starts_with('\u{feff}') {
            self.pos += '\u{feff}'.len_utf8();
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r' | '\n')) {
            self.bump();
        }
    }

    /// Whitespace and comments, plus the XML declaration when `prolog`.
    fn skip_misc(&mut self, prolog: bool) -> Result<(), ParseError> {
        let mut first = true;
        loop {
            if prolog && first && self.rest().starts_with("<?xml") {
                self.declaration()?;
            }
            first = false;
            self.skip_ws();
            if self.rest().starts_with("<!--") {
                self.comment()?;
            } else if self.rest().starts_with("<?") {
                return Err(self.error(
                    ParseCode::MalformedXml,
                    "processing instructions are not allowed here",
                ));
            } else if self.rest().starts_with("<!") {
                return Err(self.error(ParseCode::MalformedXml, "DOCTYPE and CDATA are not supported"));
            } else {
                return Ok(());
            }
        }
    }

    fn declaration(&mut self) -> Result<(), ParseError> {
        let start = self.span();
        self.expect("<?xml")?;
        if !matches!(self.peek(), Some(' ' | '\t' | '\r' | '\n')) {
            return Err(self.error(ParseCode::MalformedXml, "malformed XML declaration"));
        }
        let attrs = self.attributes()?;
        self.skip_ws();
        if !self.eat("?>") {
            return Err(self.error_at(start, ParseCode::MalformedXml, "unterminated XML declaration"));
        }
        for a in &attrs {
            match a.name.as_str() {
                "version" | "standalone" => {}
                "encoding" if a.value.eq_ignore_ascii_case("utf-8") => {}
                "encoding" => {
                    return Err(self.error_at(a.span, ParseCode::MalformedXml, "only UTF-8 is supported"))
                }
                _ => {
                    return Err(self.error_at(
                        a.span,
                        ParseCode::MalformedXml,
                        "unexpected pseudo-attribute in XML declaration",
                    ))
                }
            }
        }
        Ok(())
    }

    fn comment(&mut self) -> Result<(), ParseError> {
        let start = self.span();
        self.expect("<!--")?;
        loop {
            if self.at_end() {
                return Err(self.error_at(start, ParseCode::MalformedXml, "unterminated comment"));
            }
            if self.eat("-->") {
                return Ok(());
            }
            if self.rest().starts_with("--") {
                return Err(self.error(ParseCode::MalformedXml, "`--` inside comment"));
            }
            self.bump();
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                self.bump();
            }
            _ => return Err(self.error(ParseCode::MalformedXml, "expected a name")),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | ':')) {
            self.bump();
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn attributes(&mut self) -> Result<Vec<Attribute>, ParseError> {
        let mut attrs: Vec<Attribute> = Vec::new();
        loop {
            let had_ws = matches!(self.peek(), Some(' ' | '\t' | '\r' | '\n'));
            self.skip_ws();
            match self.peek() {
                Some(c) if c.is_ascii_alphabetic() || c == '_' => {
                    if !had_ws {
                        return Err(self.error(ParseCode::MalformedXml, "attributes must be separated by whitespace"));
                    }
                }
                _ => return Ok(attrs),
            }
            let span = self.span();
            let name = self.name()?;
            self.skip_ws();
            self.expect("=")?;
            self.skip_ws();
            let value = self.quoted()?;
            if attrs.iter().any(|a| a.name == name) {
                return Err(self.error_at(span, ParseCode::MalformedXml, &format!("duplicate attribute `{name}`")));
            }
            attrs.push(Attribute { name, value, span });
        }
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        let start = self.span();
        let quote = match self.peek() {
            Some(q @ ('"' | '\'')) => q,
            _ => return Err(self.error(ParseCode::MalformedXml, "expected a quoted attribute value")),
        };
        self.bump();
        let mut out = String::new();
        loop {
            match self.peek() {
                None => return Err(self.error_at(start, ParseCode::MalformedXml, "unterminated attribute value")),
                Some(c) if c == quote => {
                    self.bump();
                    return Ok(out);
                }
                Some('<') => return Err(self.error(ParseCode::MalformedXml, "`<` in attribute value")),
                Some('&') => out.push(self.entity()?),
                Some(c) => {
                    self.bump();
                    out.push(c);
                }
            }
        }
    }

    fn entity(&mut self) -> Result<char, ParseError> {
        let start = self.span();
        self.expect("&")?;
        let body_start = self.pos;
        while matches!(self.peek(), Some(c) if c != ';' && c != '<' && c != '"' && c != '\'' && !c.is_whitespace()) {
            self.bump();
        }
        let body = &self.src[body_start..self.pos];
        if !self.eat(";") {
            return Err(self.error_at(start, ParseCode::MalformedXml, "unterminated entity reference"));
        }
        let c = match body {
            "lt" => Some('<'),
            "gt" => Some('>'),
            "amp" => Some('&'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            _ if body.starts_with("#x") => u32::from_str_radix(&body[2..], 16).ok().and_then(char::from_u32),
            _ if body.starts_with('#') => body[1..].parse::<u32>().ok().and_then(char::from_u32),
            _ => None,
        };
        c.ok_or_else(|| self.error_at(start, ParseCode::MalformedXml, &format!("unknown entity `&{body};`")))
    }

    fn element(&mut self) -> Result<Element, ParseError> {
        let span = self.span();
        self.expect("<")?;
        let name = self.name()?;
        let attrs = self.attributes()?;
        self.skip_ws();
        if self.eat("/>") {
            return Ok(Element { name, attrs, children: Vec::new(), span });
        }
        if !self.eat(">") {
            let msg = if self.at_end() {
                format!("unclosed `<{name}` tag")
            } else {
                format!("malformed `<{name}` tag")
            };
            return Err(self.error_at(span, ParseCode::MalformedXml, &msg));
        }
        let mut children = Vec::new();
        loop {
            self.skip_ws();
            if self.at_end() {
                return Err(self.error_at(span, ParseCode::MalformedXml, &format!("element `{name}` is never closed")));
            }
            if self.rest().starts_with("<!--") {
                self.comment()?;
            } else if self.rest().starts_with("</") {
                let close = self.span();
                self.expect("</")?;
                let end = self.name()?;
                self.skip_ws();
                self.expect(">")?;
                if end != name {
                    return Err(self.error_at(
                        close,
                        ParseCode::MalformedXml,
                        &format!("closing tag `{end}` does not match `{name}`"),
                    ));
                }
                return Ok(Element { name, attrs, children, span });
            } else if self.rest().starts_with("<!") || self.rest().starts_with("<?") {
                return Err(self.error(ParseCode::MalformedXml, "CDATA and processing instructions are not supported"));
            } else if self.rest().starts_with('<') {
                children.push(self.element()?);
            } else {
                return Err(self.error(ParseCode::MalformedXml, "unexpected character data"));
            }
        }
    }
}

/// Escapes a string for use inside a double-quoted attribute.
pub(crate) fn escape_attr(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
}
