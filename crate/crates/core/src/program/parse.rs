use super::{AlchemyAction, Actions, Amount, BeakerRef, EntityAction, Fraction, Program, SceneAction, TangramsAction};
use crate::error::{ParseError, ParseErrorKind};
use crate::state::{Color, Domain, Span, TangramObject, ALCHEMY_BEAKERS, SCENE_POSITIONS, TANGRAMS_SLOTS};

/// Parses `action ; action ; ...` for `domain`. Whitespace between tokens is free.
pub fn parse_program(domain: Domain, text: &str) -> Result<Program, ParseError> {
    let mut cur = Cursor { src: text, pos: 0 };
    cur.skip_ws();
    if cur.at_end() {
        return Err(ParseError::new(cur.pos, ParseErrorKind::EmptyProgram));
    }
    let mut actions = match domain {
        Domain::Alchemy => Actions::Alchemy(vec![]),
        Domain::Scene => Actions::Scene(vec![]),
        Domain::Tangrams => Actions::Tangrams(vec![]),
        Domain::ProPara => Actions::ProPara(vec![]),
        Domain::Recipes => Actions::Recipes(vec![]),
    };
    loop {
        match &mut actions {
            Actions::Alchemy(v) => v.push(alchemy_action(&mut cur)?),
            Actions::Scene(v) => v.push(scene_action(&mut cur)?),
            Actions::Tangrams(v) => v.push(tangrams_action(&mut cur)?),
            Actions::ProPara(v) | Actions::Recipes(v) => v.push(entity_action(&mut cur)?),
        }
        cur.skip_ws();
        if cur.at_end() {
            break;
        }
        cur.expect(';')?;
    }
    Ok(Program::new(actions).expect("parser only builds in-range, non-empty programs"))
}

#[derive(Debug)]
enum Term {
    Int(i64),
    Frac(i64, i64),
    Word(String),
    Call(String, Vec<(usize, Term)>),
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError::new(self.pos, kind)
    }

    fn expect(&mut self, want: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.error(ParseErrorKind::Syntax(format!("expected `{want}`, found `{c}`")))),
            None => Err(self.error(ParseErrorKind::Syntax(format!("expected `{want}`, found end of input")))),
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
        &self.src[start..self.pos]
    }

    fn ident(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        if name.is_empty() {
            return Err(self.error(ParseErrorKind::Syntax("expected a function name".into())));
        }
        Ok((start, name))
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let negative = self.peek() == Some('-');
        if negative {
            self.bump();
            self.skip_ws();
        }
        let start = self.pos;
        let digits = self.take_while(|c| c.is_ascii_digit());
        if digits.is_empty() {
            return Err(self.error(ParseErrorKind::Syntax("expected a number".into())));
        }
        let value: i64 = digits
            .parse()
            .map_err(|_| ParseError::new(start, ParseErrorKind::OutOfRange(digits.to_string())))?;
        Ok(if negative { -value } else { value })
    }

    fn term(&mut self) -> Result<(usize, Term), ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c == '-' || c.is_ascii_digit() => {
                let n = self.int()?;
                self.skip_ws();
                if self.peek() == Some('/') {
                    self.bump();
                    let d = self.int()?;
                    return Ok((start, Term::Frac(n, d)));
                }
                Ok((start, Term::Int(n)))
            }
            Some(c) if c.is_alphabetic() => {
                let (_, name) = self.ident()?;
                self.skip_ws();
                if self.peek() == Some('(') {
                    let args = self.term_args()?;
                    return Ok((start, Term::Call(name.to_string(), args)));
                }
                Ok((start, Term::Word(name.to_string())))
            }
            Some(c) => Err(self.error(ParseErrorKind::Syntax(format!("unexpected `{c}`")))),
            None => Err(self.error(ParseErrorKind::Syntax("unexpected end of input".into()))),
        }
    }

    fn term_args(&mut self) -> Result<Vec<(usize, Term)>, ParseError> {
        self.expect('(')?;
        let mut args = vec![];
        self.skip_ws();
        if self.peek() == Some(')') {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            self.skip_ws();
            match self.bump() {
                Some(',') => continue,
                Some(')') => return Ok(args),
                Some(c) => {
                    return Err(ParseError::new(
                        self.pos - c.len_utf8(),
                        ParseErrorKind::Syntax(format!("expected `,` or `)`, found `{c}`")),
                    ))
                }
                None => return Err(self.error(ParseErrorKind::Syntax("unclosed `(`".into()))),
            }
        }
    }

    /// Free-text arguments for the entity grammars: everything up to `,` or `)`.
    fn span_args(&mut self) -> Result<Vec<(usize, &'a str)>, ParseError> {
        self.expect('(')?;
        let mut args = vec![];
        loop {
            let start = self.pos;
            let raw = self.take_while(|c| c != ',' && c != ')' && c != '(' && c != ';');
            let lead = raw.len() - raw.trim_start().len();
            args.push((start + lead, raw.trim()));
            match self.bump() {
                Some(',') => continue,
                Some(')') => return Ok(args),
                Some(c) => {
                    return Err(ParseError::new(
                        self.pos - 1,
                        ParseErrorKind::Syntax(format!("unexpected `{c}` in argument")),
                    ))
                }
                None => return Err(self.error(ParseErrorKind::Syntax("unclosed `(`".into()))),
            }
        }
    }
}

fn check_arity(function: &'static str, expected: usize, found: usize, pos: usize) -> Result<(), ParseError> {
    if expected == found {
        Ok(())
    } else {
        Err(ParseError::new(pos, ParseErrorKind::Arity { function, expected, found }))
    }
}

fn color_of((pos, term): &(usize, Term)) -> Result<Color, ParseError> {
    match term {
        Term::Word(w) => {
            let mut chars = w.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Color::from_code(c).ok_or_else(|| ParseError::new(*pos, ParseErrorKind::UnknownColor(c))),
                _ => Err(ParseError::new(*pos, ParseErrorKind::Syntax(format!("expected a color, found `{w}`")))),
            }
        }
        other => Err(ParseError::new(*pos, ParseErrorKind::Syntax(format!("expected a color, found {other:?}")))),
    }
}

fn position_of((pos, term): &(usize, Term), max: usize) -> Result<u8, ParseError> {
    match term {
        Term::Int(i) if (1..=max as i64).contains(i) => Ok(*i as u8),
        Term::Int(i) => Err(ParseError::new(*pos, ParseErrorKind::OutOfRange(format!("index {i} not in 1..={max}")))),
        other => Err(ParseError::new(*pos, ParseErrorKind::Syntax(format!("expected an index, found {other:?}")))),
    }
}

fn beaker_of((pos, term): &(usize, Term)) -> Result<BeakerRef, ParseError> {
    let Term::Call(name, args) = term else {
        return Err(ParseError::new(*pos, ParseErrorKind::Syntax("expected `Beaker ( ... )`".into())));
    };
    if name != "Beaker" {
        return Err(ParseError::new(*pos, ParseErrorKind::UnknownFunction(name.clone())));
    }
    if args.is_empty() || args.len() > 2 {
        return Err(ParseError::new(
            *pos,
            ParseErrorKind::Arity {
                function: "Beaker",
                expected: if args.is_empty() { 1 } else { 2 },
                found: args.len(),
            },
        ));
    }
    let (ipos, index) = &args[0];
    let index = match index {
        Term::Int(i) => *i,
        other => return Err(ParseError::new(*ipos, ParseErrorKind::Syntax(format!("expected an index, found {other:?}")))),
    };
    let color = args.get(1).map(color_of).transpose()?;
    let small = i8::try_from(index).ok();
    small.and_then(|i| BeakerRef::new(i, color)).ok_or_else(|| {
        ParseError::new(
            *ipos,
            ParseErrorKind::OutOfRange(format!("beaker index {index} not in ±1..=±{ALCHEMY_BEAKERS}")),
        )
    })
}

fn amount_of((pos, term): &(usize, Term)) -> Result<Amount, ParseError> {
    match term {
        Term::Int(k) if (1..=4).contains(k) => Ok(Amount::Units(*k as u8)),
        Term::Int(k) => Err(ParseError::new(*pos, ParseErrorKind::OutOfRange(format!("amount {k} not in 1..=4")))),
        Term::Frac(n, d) => u32::try_from(*n)
            .ok()
            .zip(u32::try_from(*d).ok())
            .and_then(|(n, d)| Fraction::from_parts(n, d))
            .map(Amount::Fraction)
            .ok_or_else(|| ParseError::new(*pos, ParseErrorKind::UnknownFraction(format!("{n}/{d}")))),
        other => Err(ParseError::new(*pos, ParseErrorKind::Syntax(format!("expected an amount, found {other:?}")))),
    }
}

fn call<'a>(cur: &mut Cursor<'a>, known: &[&'static str]) -> Result<(usize, &'static str), ParseError> {
    let (pos, name) = cur.ident()?;
    known
        .iter()
        .find(|k| **k == name)
        .map(|k| (pos, *k))
        .ok_or_else(|| ParseError::new(pos, ParseErrorKind::UnknownFunction(name.to_string())))
}

fn alchemy_action(cur: &mut Cursor<'_>) -> Result<AlchemyAction, ParseError> {
    let (pos, name) = call(cur, &["Mix", "Pour", "Drain"])?;
    let args = cur.term_args()?;
    match name {
        "Mix" => {
            check_arity(name, 1, args.len(), pos)?;
            Ok(AlchemyAction::Mix(beaker_of(&args[0])?))
        }
        "Pour" => {
            check_arity(name, 2, args.len(), pos)?;
            Ok(AlchemyAction::Pour(beaker_of(&args[0])?, beaker_of(&args[1])?))
        }
        _ => {
            check_arity(name, 2, args.len(), pos)?;
            Ok(AlchemyAction::Drain(beaker_of(&args[0])?, amount_of(&args[1])?))
        }
    }
}

fn scene_action(cur: &mut Cursor<'_>) -> Result<SceneAction, ParseError> {
    let (pos, name) = call(cur, &["Person", "RmPerson", "Hat", "RmHat"])?;
    let args = cur.term_args()?;
    let arity = if matches!(name, "Person" | "Hat") { 2 } else { 1 };
    check_arity(name, arity, args.len(), pos)?;
    let p = position_of(&args[0], SCENE_POSITIONS)?;
    Ok(match name {
        "Person" => SceneAction::Person(p, color_of(&args[1])?),
        "Hat" => SceneAction::Hat(p, color_of(&args[1])?),
        "RmPerson" => SceneAction::RmPerson(p),
        _ => SceneAction::RmHat(p),
    })
}

fn tangrams_action(cur: &mut Cursor<'_>) -> Result<TangramsAction, ParseError> {
    let (pos, name) = call(cur, &["Insert", "Remove"])?;
    let args = cur.term_args()?;
    if name == "Remove" {
        check_arity(name, 1, args.len(), pos)?;
        return Ok(TangramsAction::Remove(position_of(&args[0], TANGRAMS_SLOTS)?));
    }
    check_arity(name, 2, args.len(), pos)?;
    let p = position_of(&args[0], TANGRAMS_SLOTS)?;
    let (opos, obj) = &args[1];
    let object = match obj {
        Term::Word(w) if w.len() == 1 => TangramObject::from_name(w.chars().next().unwrap()),
        _ => None,
    }
    .ok_or_else(|| ParseError::new(*opos, ParseErrorKind::OutOfRange(format!("unknown object {obj:?}"))))?;
    Ok(TangramsAction::Insert(p, object))
}

fn span_of((pos, text): &(usize, &str)) -> Result<Span, ParseError> {
    Span::new(*text).map_err(|e| ParseError::new(*pos, ParseErrorKind::BadSpan(e)))
}

fn entity_action(cur: &mut Cursor<'_>) -> Result<EntityAction, ParseError> {
    let (pos, name) = call(cur, &["Create", "Move", "Destroy"])?;
    let args = cur.span_args()?;
    match name {
        "Create" => {
            check_arity(name, 2, args.len(), pos)?;
            let location = if args[1].1 == "?" { None } else { Some(span_of(&args[1])?) };
            Ok(EntityAction::Create {
                participant: span_of(&args[0])?,
                location,
            })
        }
        "Move" => {
            check_arity(name, 3, args.len(), pos)?;
            Ok(EntityAction::Move {
                participant: span_of(&args[0])?,
                from: span_of(&args[1])?,
                to: span_of(&args[2])?,
            })
        }
        _ => {
            check_arity(name, 1, args.len(), pos)?;
            Ok(EntityAction::Destroy {
                participant: span_of(&args[0])?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind(domain: Domain, text: &str) -> ParseErrorKind {
        parse_program(domain, text).unwrap_err().kind
    }

    #[test]
    fn parses_pour_with_colored_beaker() {
        let p = parse_program(Domain::Alchemy, "Pour ( Beaker ( 1 ) , Beaker ( 2 , g ) )").unwrap();
        assert_eq!(
            p.actions(),
            &Actions::Alchemy(vec![AlchemyAction::Pour(
                BeakerRef::new(1, None).unwrap(),
                BeakerRef::new(2, Some(Color::Green)).unwrap()
            )])
        );
        let loose = parse_program(Domain::Alchemy, "Pour (Beaker (1), Beaker (2, g) )").unwrap();
        assert_eq!(loose, p);
    }

    #[test]
    fn parses_tangrams_sequence() {
        let p = parse_program(Domain::Tangrams, "Remove ( 2 ) ; Insert ( 4 , B )").unwrap();
        assert_eq!(
            p.actions(),
            &Actions::Tangrams(vec![TangramsAction::Remove(2), TangramsAction::Insert(4, TangramObject::B)])
        );
    }

    #[test]
    fn parses_negative_indices_and_fractions() {
        let p = parse_program(Domain::Alchemy, "Drain(Beaker(-3,r), 2 / 4);Mix(Beaker( - 7 ))").unwrap();
        assert_eq!(p.render(), "Drain ( Beaker ( -3 , r ) , 2/4 ) ; Mix ( Beaker ( -7 ) )");
    }

    #[test]
    fn parses_entity_spans_with_spaces() {
        let p = parse_program(Domain::ProPara, "Move ( plant material ,  top soil , river bed ) ; Create ( sugar , ? )").unwrap();
        assert_eq!(p.render(), "Move ( plant material , top soil , river bed ) ; Create ( sugar , ? )");
    }

    #[test]
    fn reports_error_kinds() {
        assert!(matches!(kind(Domain::Alchemy, "Drain ( Beaker ( 1 ) , 2/5 )"), ParseErrorKind::UnknownFraction(f) if f == "2/5"));
        assert!(matches!(kind(Domain::Alchemy, "Stir ( Beaker ( 1 ) )"), ParseErrorKind::UnknownFunction(_)));
        assert!(matches!(kind(Domain::Alchemy, "Mix ( Beaker ( 8 ) )"), ParseErrorKind::OutOfRange(_)));
        assert!(matches!(kind(Domain::Alchemy, "Mix ( Beaker ( 0 ) )"), ParseErrorKind::OutOfRange(_)));
        assert!(matches!(kind(Domain::Alchemy, "Drain ( Beaker ( 1 ) , 5 )"), ParseErrorKind::OutOfRange(_)));
        assert!(matches!(kind(Domain::Alchemy, "Mix ( Beaker ( 1 ) , Beaker ( 2 ) )"), ParseErrorKind::Arity { function: "Mix", expected: 1, found: 2 }));
        assert!(matches!(kind(Domain::Alchemy, "Mix ( Beaker ( 1 , x ) )"), ParseErrorKind::UnknownColor('x')));
        assert!(matches!(kind(Domain::Scene, "Person ( 11 , r )"), ParseErrorKind::OutOfRange(_)));
        assert!(matches!(kind(Domain::Scene, "Insert ( 1 , A )"), ParseErrorKind::UnknownFunction(_)));
        assert!(matches!(kind(Domain::Tangrams, "Insert ( 1 , F )"), ParseErrorKind::OutOfRange(_)));
        assert!(matches!(kind(Domain::Tangrams, "Remove ( 1 , 2 )"), ParseErrorKind::Arity { .. }));
        assert!(matches!(kind(Domain::Recipes, "Move ( a , b )"), ParseErrorKind::Arity { .. }));
        assert!(matches!(kind(Domain::Recipes, "Destroy ( - )"), ParseErrorKind::BadSpan(_)));
        assert!(matches!(kind(Domain::Recipes, "Move ( a , ? , b )"), ParseErrorKind::BadSpan(_)));
        assert!(matches!(kind(Domain::Recipes, "   "), ParseErrorKind::EmptyProgram));
        assert!(matches!(kind(Domain::Tangrams, "Remove ( 1 ) ;"), ParseErrorKind::Syntax(_)));
        assert!(matches!(kind(Domain::Tangrams, "Remove ( 1 ) Remove ( 2 )"), ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn error_positions_point_at_offending_token() {
        let err = parse_program(Domain::Alchemy, "Mix ( Beaker ( 1 ) ) ; Mix ( Beaker ( 9 ) )").unwrap_err();
        assert_eq!(err.position, 38);
    }
}
