//! Recursive-descent parser for document files.
//!
//! ```text
//! signature S { shape node / [L, R]; point bot; }
//! coalgebra C over S { state s = node(L: s, R: t); }
//! coalgebra D over underlying F { state r = a@C(id_C.b: r); }
//! indexed I over S { index [i, j]; fibre node = i; }
//! proto P over S { carrier [x]; ambient [a, b]; gamma x -> a; m node(L: x, R: x) -> a; }
//! category K { object C; morphism u : D -> C; compose v then u = w;
//!              pullback u with u = D (id_D, id_D); }
//! presheaf X over K { at C = [x0]; restrict u : x0 -> y0; }
//! morphism F from B to A { at C : b -> a; }
//! site T over K { cover C = [c1, c2]; }
//! family G over T using F { at C cover [c1, c2]; leg c1 = C1.s; leg c2 = C2.t; }
//! ```
//!
//! Position names may be dotted (`id_C.b`); all other names are single
//! identifiers.  Errors carry the 1-based line and column.

use thiserror::Error;

use crate::ast::{Decl, Document, Over, StateDecl};
use crate::lex::{lex, LexError, Token, TokenKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub col: usize,
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError { message: e.message, line: e.line, col: e.col }
    }
}

pub fn parse(input: &str) -> Result<Document, ParseError> {
    let tokens = lex(input)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut decls = Vec::new();
    while p.peek().kind != TokenKind::Eof {
        decls.push(p.decl()?);
    }
    Ok(Document { decls })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError { message: message.into(), line: t.line, col: t.col })
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token, ParseError> {
        if self.peek().kind == kind {
            Ok(self.next())
        } else {
            let t = self.peek().clone();
            Err(ParseError {
                message: format!("expected {kind}, found {}", describe(&t)),
                line: t.line,
                col: t.col,
            })
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        Ok(self.expect(TokenKind::Ident)?.text)
    }

    fn keyword(&mut self, word: &str) -> Result<(), ParseError> {
        let t = self.peek().clone();
        if t.kind == TokenKind::Ident && t.text == word {
            self.next();
            Ok(())
        } else {
            Err(ParseError {
                message: format!("expected `{word}`, found {}", describe(&t)),
                line: t.line,
                col: t.col,
            })
        }
    }

    fn at_keyword(&self, word: &str) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Ident && t.text == word
    }

    /// An identifier, optionally extended by `.ident` segments (position
    /// names over presheaf morphisms).
    fn dotted(&mut self) -> Result<String, ParseError> {
        let mut name = self.ident()?;
        while self.peek().kind == TokenKind::Dot {
            self.next();
            name.push('.');
            name.push_str(&self.ident()?);
        }
        Ok(name)
    }

    /// `[a, b, c]`, possibly empty, of plain identifiers.
    fn ident_list(&mut self) -> Result<Vec<String>, ParseError> {
        self.expect(TokenKind::LBracket)?;
        let mut out = Vec::new();
        if self.peek().kind != TokenKind::RBracket {
            loop {
                out.push(self.ident()?);
                if self.peek().kind == TokenKind::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RBracket)?;
        Ok(out)
    }

    /// `shape(pos: value, ...)`, where `pos` may be dotted.
    fn element(&mut self) -> Result<(String, Vec<(String, String)>), ParseError> {
        let shape = self.ident()?;
        self.expect(TokenKind::LParen)?;
        let mut children = Vec::new();
        if self.peek().kind != TokenKind::RParen {
            loop {
                let pos = self.dotted()?;
                self.expect(TokenKind::Colon)?;
                let value = self.ident()?;
                children.push((pos, value));
                if self.peek().kind == TokenKind::Comma {
                    self.next();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok((shape, children))
    }

    fn decl(&mut self) -> Result<Decl, ParseError> {
        let t = self.peek().clone();
        if t.kind != TokenKind::Ident {
            return self.error(format!("expected a declaration, found {}", describe(&t)));
        }
        match t.text.as_str() {
            "signature" => self.signature(),
            "coalgebra" => self.coalgebra(),
            "indexed" => self.indexed(),
            "proto" => self.proto(),
            "category" => self.category(),
            "presheaf" => self.presheaf(),
            "morphism" => self.psh_morphism(),
            "site" => self.site(),
            "family" => self.family(),
            other => self.error(format!("unknown declaration `{other}`")),
        }
    }

    fn signature(&mut self) -> Result<Decl, ParseError> {
        self.keyword("signature")?;
        let name = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut shapes = Vec::new();
        let mut point = None;
        while self.peek().kind != TokenKind::RBrace {
            if self.at_keyword("shape") {
                self.next();
                let shape = self.ident()?;
                // `/` would clash with comments; positions follow directly.
                let positions = self.ident_list()?;
                self.expect(TokenKind::Semi)?;
                shapes.push((shape, positions));
            } else if self.at_keyword("point") {
                self.next();
                let p = self.ident()?;
                self.expect(TokenKind::Semi)?;
                if point.replace(p).is_some() {
                    return self.error("duplicate `point`");
                }
            } else {
                return self.error("expected `shape` or `point`");
            }
        }
        self.expect(TokenKind::RBrace)?;
        Ok(Decl::Signature { name, shapes, point })
    }

    fn coalgebra(&mut self) -> Result<Decl, ParseError> {
        self.keyword("coalgebra")?;
        let name = self.ident()?;
        self.keyword("over")?;
        let over = if self.at_keyword("underlying") {
            self.next();
            Over::Underlying(self.ident()?)
        } else {
            Over::Signature(self.ident()?)
        };
        self.expect(TokenKind::LBrace)?;
        let mut states = Vec::new();
        while self.peek().kind != TokenKind::RBrace {
            self.keyword("state")?;
            let state = self.ident()?;
            self.expect(TokenKind::Equals)?;
            let (shape, children) = self.element()?;
            self.expect(TokenKind::Semi)?;
            states.push(StateDecl { name: state, shape, children });
        }
        self.expect(TokenKind::RBrace)?;
        Ok(Decl::Coalgebra { name, over, states })
    }

    fn indexed(&mut self) -> Result<Decl, ParseError> {
        self.keyword("indexed")?;
        let name = self.ident()?;
        self.keyword("over")?;
        let over = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut index = Vec::new();
        let mut fibres = Vec::new();
        let mut saw_index = false;
        while self.peek().kind != TokenKind::RBrace {
            if self.at_keyword("index") {
                self.next();
                if saw_index {
                    return self.error("duplicate `index`");
                }
                saw_index = true;
                index = self.ident_list()?;
                self.expect(TokenKind::Semi)?;
            } else if self.at_keyword("fibre") {
                self.next();
                let shape = self.ident()?;
                self.expect(TokenKind::Equals)?;
                let i = self.ident()?;
                self.expect(TokenKind::Semi)?;
                fibres.push((shape, i));
            } else {
                return self.error("expected `index` or `fibre`");
            }
        }
        self.expect(TokenKind::RBrace)?;
        Ok(Decl::Indexed { name, over, index, fibres })
    }

    fn proto(&mut self) -> Result<Decl, ParseError> {
        self.keyword("proto")?;
        let name = self.ident()?;
        self.keyword("over")?;
        let over = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut carrier = Vec::new();
        let mut ambient = Vec::new();
        let mut gamma = Vec::new();
        let mut branch = Vec::new();
        while self.peek().kind != TokenKind::RBrace {
            if self.at_keyword("carrier") {
                self.next();
                carrier = self.ident_list()?;
                self.expect(TokenKind::Semi)?;
            } else if self.at_keyword("ambient") {
                self.next();
                ambient = self.ident_list()?;
                self.expect(TokenKind::Semi)?;
            } else if self.at_keyword("gamma") {
                self.next();
                let x = self.ident()?;
                self.expect(TokenKind::Arrow)?;
                let y = self.ident()?;
                self.expect(TokenKind::Semi)?;
                gamma.push((x, y));
            } else if self.at_keyword("m") {
                self.next();
                let (shape, children) = self.element()?;
                self.expect(TokenKind::Arrow)?;
                let y = self.ident()?;
                self.expect(TokenKind::Semi)?;
                branch.push((StateDecl { name: String::new(), shape, children }, y));
            } else {
                return self.error("expected `carrier`, `ambient`, `gamma` or `m`");
            }
        }
        self.expect(TokenKind::RBrace)?;
        Ok(Decl::Proto { name, over, carrier, ambient, gamma, branch })
    }

    fn category(&mut self) -> Result<Decl, ParseError> {
        self.keyword("category")?;
        let name = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut objects = Vec::new();
        let mut morphisms = Vec::new();
        let mut composites = Vec::new();
        let mut pullbacks = Vec::new();
        while self.peek().kind != TokenKind::RBrace {
            if self.at_keyword("object") {
                self.next();
                objects.push(self.ident()?);
                self.expect(TokenKind::Semi)?;
            } else if self.at_keyword("morphism") {
                self.next();
                let id = self.ident()?;
                self.expect(TokenKind::Colon)?;
                let dom = self.ident()?;
                self.expect(TokenKind::Arrow)?;
                let cod = self.ident()?;
                self.expect(TokenKind::Semi)?;
                morphisms.push((id, dom, cod));
            } else if self.at_keyword("compose") {
                self.next();
                let f = self.ident()?;
                self.keyword("then")?;
                let g = self.ident()?;
                self.expect(TokenKind::Equals)?;
                let h = self.ident()?;
                self.expect(TokenKind::Semi)?;
                composites.push((f, g, h));
            } else if self.at_keyword("pullback") {
                self.next();
                let f = self.ident()?;
                self.keyword("with")?;
                let g = self.ident()?;
                self.expect(TokenKind::Equals)?;
                let apex = self.ident()?;
                self.expect(TokenKind::LParen)?;
                let p1 = self.ident()?;
                self.expect(TokenKind::Comma)?;
                let p2 = self.ident()?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::Semi)?;
                pullbacks.push((f, g, apex, p1, p2));
            } else {
                return self.error("expected `object`, `morphism`, `compose` or `pullback`");
            }
        }
        self.expect(TokenKind::RBrace)?;
        Ok(Decl::Category { name, objects, morphisms, composites, pullbacks })
    }

    fn presheaf(&mut self) -> Result<Decl, ParseError> {
        self.keyword("presheaf")?;
        let name = self.ident()?;
        self.keyword("over")?;
        let over = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut sections = Vec::new();
        let mut restrictions = Vec::new();
        while self.peek().kind != TokenKind::RBrace {
            if self.at_keyword("at") {
                self.next();
                let object = self.ident()?;
                self.expect(TokenKind::Equals)?;
                let secs = self.ident_list()?;
                self.expect(TokenKind::Semi)?;
                sections.push((object, secs));
            } else if self.at_keyword("restrict") {
                self.next();
                let m = self.ident()?;
                self.expect(TokenKind::Colon)?;
                let s = self.ident()?;
                self.expect(TokenKind::Arrow)?;
                let v = self.ident()?;
                self.expect(TokenKind::Semi)?;
                restrictions.push((m, s, v));
            } else {
                return self.error("expected `at` or `restrict`");
            }
        }
        self.expect(TokenKind::RBrace)?;
        Ok(Decl::Presheaf { name, over, sections, restrictions })
    }

    fn psh_morphism(&mut self) -> Result<Decl, ParseError> {
        self.keyword("morphism")?;
        let name = self.ident()?;
        self.keyword("from")?;
        let from = self.ident()?;
        self.keyword("to")?;
        let to = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut components = Vec::new();
        while self.peek().kind != TokenKind::RBrace {
            self.keyword("at")?;
            let object = self.ident()?;
            self.expect(TokenKind::Colon)?;
            let s = self.ident()?;
            self.expect(TokenKind::Arrow)?;
            let v = self.ident()?;
            self.expect(TokenKind::Semi)?;
            components.push((object, s, v));
        }
        self.expect(TokenKind::RBrace)?;
        Ok(Decl::PshMorphism { name, from, to, components })
    }

    fn site(&mut self) -> Result<Decl, ParseError> {
        self.keyword("site")?;
        let name = self.ident()?;
        self.keyword("over")?;
        let over = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut covers = Vec::new();
        while self.peek().kind != TokenKind::RBrace {
            self.keyword("cover")?;
            let object = self.ident()?;
            self.expect(TokenKind::Equals)?;
            let legs = self.ident_list()?;
            self.expect(TokenKind::Semi)?;
            covers.push((object, legs));
        }
        self.expect(TokenKind::RBrace)?;
        Ok(Decl::Site { name, over, covers })
    }

    fn family(&mut self) -> Result<Decl, ParseError> {
        self.keyword("family")?;
        let name = self.ident()?;
        self.keyword("over")?;
        let site = self.ident()?;
        self.keyword("using")?;
        let using = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        self.keyword("at")?;
        let at = self.ident()?;
        self.keyword("cover")?;
        let cover = self.ident_list()?;
        self.expect(TokenKind::Semi)?;
        let mut legs = Vec::new();
        while self.peek().kind != TokenKind::RBrace {
            self.keyword("leg")?;
            let leg = self.ident()?;
            self.expect(TokenKind::Equals)?;
            let coalg = self.ident()?;
            self.expect(TokenKind::Dot)?;
            let state = self.ident()?;
            self.expect(TokenKind::Semi)?;
            legs.push((leg, coalg, state));
        }
        self.expect(TokenKind::RBrace)?;
        Ok(Decl::Family { name, site, using, at, cover, legs })
    }
}

fn describe(t: &Token) -> String {
    match t.kind {
        TokenKind::Ident => format!("`{}`", t.text),
        TokenKind::Eof => "end of input".to_string(),
        _ => format!("{}", t.kind),
    }
}
