//! Points of Baire space as on-demand streams, and the tuple encoding.
//!
//! A [`Stream`] is an immutable handle to a node graph. Program-backed
//! nodes are driven lazily and memoize what they produced, so reading a
//! position twice always gives the same answer.
//!
//! Pairing is positional interleaving: `pair(x, y)(2k) = x(k)` and
//! `pair(x, y)(2k + 1) = y(k)`. Under left-associated nesting the innermost
//! component's first value sits at position 0, which is where the universal
//! functional looks for its program number.
//!
//! Pairs built with [`pair`] also keep their components structurally, so a
//! nested tuple still knows how many components it has ([`arity`]). The
//! interleaved values alone cannot tell `(n, d)` from `(n, d, y)`.

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::nat::Nat;

/// Why a position could not be produced.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StreamError {
    #[error("timeout")]
    Timeout,
    #[error("stuck: {0}")]
    Stuck(Arc<str>),
}

impl StreamError {
    pub fn stuck(reason: impl Into<String>) -> Self {
        StreamError::Stuck(Arc::from(reason.into()))
    }
}

/// One event from a lazily driven producer.
pub enum Produced {
    Value(Nat),
    /// The producer finished; every later position comes from this stream.
    Tail(Stream),
    Failed(StreamError),
}

/// Something that produces stream values incrementally (a suspended run).
pub trait Producer: Send {
    fn advance(&mut self) -> Produced;
}

type GenFn = dyn Fn(usize) -> Result<Nat, StreamError> + Send + Sync;

enum Node {
    Literal { prefix: Vec<Nat>, tail: Nat },
    Prefixed { prefix: Vec<Nat>, rest: Stream },
    Pair(Stream, Stream),
    Even(Stream),
    Odd(Stream),
    Gen(Box<GenFn>),
    Lazy(Mutex<LazyState>),
}

struct LazyState {
    producer: Option<Box<dyn Producer>>,
    values: Vec<Nat>,
    end: Option<Result<Stream, StreamError>>,
}

#[derive(Clone)]
pub struct Stream(Arc<Node>);

impl Stream {
    /// `[prefix... | tail]`: the prefix followed by the constant `tail`.
    pub fn literal(prefix: Vec<Nat>, tail: Nat) -> Stream {
        Stream(Arc::new(Node::Literal { prefix, tail }))
    }

    pub fn from_u64s(prefix: &[u64], tail: u64) -> Stream {
        Stream::literal(prefix.iter().map(|v| Nat::from(*v)).collect(), Nat::from(tail))
    }

    pub fn zeros() -> Stream {
        Stream::literal(Vec::new(), Nat::ZERO)
    }

    /// The prefix followed by an arbitrary stream.
    pub fn prefixed(prefix: Vec<Nat>, rest: Stream) -> Stream {
        if prefix.is_empty() {
            return rest;
        }
        Stream(Arc::new(Node::Prefixed { prefix, rest }))
    }

    pub fn from_fn(f: impl Fn(usize) -> Result<Nat, StreamError> + Send + Sync + 'static) -> Stream {
        Stream(Arc::new(Node::Gen(Box::new(f))))
    }

    pub fn lazy(producer: Box<dyn Producer>) -> Stream {
        Stream(Arc::new(Node::Lazy(Mutex::new(LazyState {
            producer: Some(producer),
            values: Vec::new(),
            end: None,
        }))))
    }

    pub fn get(&self, k: usize) -> Result<Nat, StreamError> {
        match &*self.0 {
            Node::Literal { prefix, tail } => Ok(prefix.get(k).unwrap_or(tail).clone()),
            Node::Prefixed { prefix, rest } => match prefix.get(k) {
                Some(v) => Ok(v.clone()),
                None => rest.get(k - prefix.len()),
            },
            Node::Pair(x, y) => {
                if k.is_multiple_of(2) {
                    x.get(k / 2)
                } else {
                    y.get(k / 2)
                }
            }
            Node::Even(s) => s.get(2 * k),
            Node::Odd(s) => s.get(2 * k + 1),
            Node::Gen(f) => f(k),
            Node::Lazy(state) => Self::get_lazy(state, k),
        }
    }

    fn get_lazy(state: &Mutex<LazyState>, k: usize) -> Result<Nat, StreamError> {
        let tail = {
            let mut st = state.lock().unwrap_or_else(|e| e.into_inner());
            loop {
                if let Some(v) = st.values.get(k) {
                    return Ok(v.clone());
                }
                match &st.end {
                    Some(Ok(tail)) => break (tail.clone(), st.values.len()),
                    Some(Err(e)) => return Err(e.clone()),
                    None => {}
                }
                let event = match st.producer.as_mut() {
                    Some(p) => p.advance(),
                    None => Produced::Failed(StreamError::stuck("producer missing")),
                };
                match event {
                    Produced::Value(v) => st.values.push(v),
                    Produced::Tail(t) => {
                        st.end = Some(Ok(t));
                        st.producer = None;
                    }
                    Produced::Failed(e) => {
                        st.end = Some(Err(e));
                        st.producer = None;
                    }
                }
            }
        };
        let (tail, emitted) = tail;
        tail.get(k - emitted)
    }

    /// Reads positions `0..len`, stopping at the first failure.
    pub fn take(&self, len: usize) -> Prefix {
        let mut values = Vec::with_capacity(len);
        for k in 0..len {
            match self.get(k) {
                Ok(v) => values.push(v),
                Err(e) => return Prefix { values: FiniteWord(values), error: Some(e) },
            }
        }
        Prefix { values: FiniteWord(values), error: None }
    }

    /// The first `len` values, or the failure that prevented them.
    pub fn prefix(&self, len: usize) -> Result<FiniteWord, StreamError> {
        let p = self.take(len);
        match p.error {
            None => Ok(p.values),
            Some(e) => Err(e),
        }
    }

    /// Structural components when this stream was built by [`pair`].
    pub fn as_pair(&self) -> Option<(&Stream, &Stream)> {
        match &*self.0 {
            Node::Pair(x, y) => Some((x, y)),
            _ => None,
        }
    }

    pub fn ptr_eq(&self, other: &Stream) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl fmt::Debug for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Stream{}", self.take(8))
    }
}

/// A finite word over the naturals.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FiniteWord(pub Vec<Nat>);

impl FiniteWord {
    pub fn from_u64s(values: &[u64]) -> FiniteWord {
        FiniteWord(values.iter().map(|v| Nat::from(*v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &FiniteWord) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn values(&self) -> &[Nat] {
        &self.0
    }
}

impl fmt::Display for FiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

/// A prefix read that may have been cut short.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prefix {
    pub values: FiniteWord,
    pub error: Option<StreamError>,
}

impl Prefix {
    pub fn is_complete(&self) -> bool {
        self.error.is_none()
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.error {
            None => write!(f, "{}", self.values),
            Some(e) => {
                let shown = self.values.to_string();
                let open = &shown[..shown.len() - 1];
                if self.values.is_empty() {
                    write!(f, "[!{e}]")
                } else {
                    write!(f, "{open} !{e}]")
                }
            }
        }
    }
}

/// `n, 0, 0, 0, ...`
pub fn iota(n: impl Into<Nat>) -> Stream {
    Stream::literal(vec![n.into()], Nat::ZERO)
}

pub fn pair(x: Stream, y: Stream) -> Stream {
    Stream(Arc::new(Node::Pair(x, y)))
}

/// Even and odd positions. Structural pairs hand back their components.
pub fn unpair(z: &Stream) -> (Stream, Stream) {
    match z.as_pair() {
        Some((x, y)) => (x.clone(), y.clone()),
        None => (Stream(Arc::new(Node::Even(z.clone()))), Stream(Arc::new(Node::Odd(z.clone())))),
    }
}

pub fn left(z: &Stream) -> Stream {
    unpair(z).0
}

pub fn right(z: &Stream) -> Stream {
    unpair(z).1
}

/// `(n, x1, ..., xr)` as `pair(...pair(pair(iota(n), x1), x2)..., xr)`.
pub fn encode_tuple(n: impl Into<Nat>, xs: &[Stream]) -> Stream {
    xs.iter().fold(iota(n), |acc, x| pair(acc, x.clone()))
}

/// `(z0, x1, ..., xr)` with an arbitrary innermost stream.
pub fn nest(innermost: Stream, xs: &[Stream]) -> Stream {
    xs.iter().fold(innermost, |acc, x| pair(acc, x.clone()))
}

/// Position 0: the innermost program number under left-nested pairing.
pub fn tuple_head(z: &Stream) -> Result<Nat, StreamError> {
    z.get(0)
}

/// Number of structural pairing levels along the left spine.
pub fn arity(z: &Stream) -> usize {
    let mut r = 0;
    let mut cur = z;
    while let Some((x, _)) = cur.as_pair() {
        r += 1;
        cur = x;
    }
    r
}

/// Component `j` of a structural tuple: 0 is the innermost stream,
/// `1..=arity` are the paired data streams in order.
pub fn component(z: &Stream, j: usize) -> Option<Stream> {
    let r = arity(z);
    if j > r {
        return None;
    }
    let mut cur = z.clone();
    for _ in 0..(r - j) {
        cur = cur.as_pair()?.0.clone();
    }
    if j == 0 {
        Some(cur)
    } else {
        Some(cur.as_pair()?.1.clone())
    }
}

/// All data components `x1..xr` of a structural tuple.
pub fn components(z: &Stream) -> Vec<Stream> {
    let r = arity(z);
    (1..=r).filter_map(|j| component(z, j)).collect()
}

/// The same tuple with its innermost stream replaced by `iota(n)`.
pub fn rehead(z: &Stream, n: &Nat) -> Stream {
    match z.as_pair() {
        Some((x, y)) => pair(rehead(x, n), y.clone()),
        None => iota(n.clone()),
    }
}

/// Agreement on the first `len` positions (both sides must produce them).
pub fn agree_on(a: &Stream, b: &Stream, len: usize) -> Result<bool, StreamError> {
    for k in 0..len {
        if a.get(k)? != b.get(k)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(values: &[u64]) -> FiniteWord {
        FiniteWord::from_u64s(values)
    }

    #[test]
    fn iota_prefixes() {
        assert_eq!(iota(0u64).prefix(4).unwrap(), w(&[0, 0, 0, 0]));
        assert_eq!(iota(7u64).prefix(4).unwrap(), w(&[7, 0, 0, 0]));
        assert_eq!(iota(3u64).get(0).unwrap(), Nat::from(3u64));
    }

    #[test]
    fn pair_and_unpair_examples() {
        assert_eq!(pair(iota(1u64), iota(2u64)).prefix(4).unwrap(), w(&[1, 2, 0, 0]));
        assert_eq!(pair(iota(0u64), iota(0u64)).prefix(4).unwrap(), w(&[0, 0, 0, 0]));
        let z = Stream::from_u64s(&[5, 6, 7, 8], 0);
        let (x, y) = unpair(&z);
        assert_eq!(x.prefix(2).unwrap(), w(&[5, 7]));
        assert_eq!(y.prefix(2).unwrap(), w(&[6, 8]));
        let (x, y) = unpair(&iota(9u64));
        assert_eq!(x.prefix(2).unwrap(), w(&[9, 0]));
        assert_eq!(y.prefix(2).unwrap(), w(&[0, 0]));
    }

    #[test]
    fn tuple_examples() {
        assert_eq!(encode_tuple(4u64, &[]).prefix(4).unwrap(), iota(4u64).prefix(4).unwrap());
        assert_eq!(encode_tuple(4u64, &[iota(1u64)]).prefix(4).unwrap(), w(&[4, 1, 0, 0]));
        let x = Stream::from_u64s(&[1, 2, 3], 4);
        let y = Stream::from_u64s(&[8], 9);
        assert_eq!(tuple_head(&encode_tuple(9u64, &[x.clone(), y.clone()])).unwrap(), Nat::from(9u64));
        assert_eq!(tuple_head(&iota(2u64)).unwrap(), Nat::from(2u64));
        assert_eq!(tuple_head(&pair(pair(iota(3u64), x), y)).unwrap(), Nat::from(3u64));
        for n in [0u64, 1, 5] {
            for r in 0..3 {
                let xs: Vec<Stream> = (0..r).map(|i| Stream::from_u64s(&[i + 11], i + 20)).collect();
                assert_eq!(tuple_head(&encode_tuple(n, &xs)).unwrap(), Nat::from(n));
            }
        }
    }

    #[test]
    fn structure_of_tuples() {
        let d = Stream::from_u64s(&[4, 4], 0);
        let y = iota(6u64);
        let t = encode_tuple(2u64, &[d.clone(), y.clone()]);
        assert_eq!(arity(&t), 2);
        assert_eq!(arity(&d), 0);
        assert!(component(&t, 1).unwrap().ptr_eq(&d));
        assert!(component(&t, 2).unwrap().ptr_eq(&y));
        assert_eq!(component(&t, 0).unwrap().prefix(2).unwrap(), w(&[2, 0]));
        assert!(component(&t, 3).is_none());
        let r = rehead(&t, &Nat::from(77u64));
        assert_eq!(arity(&r), 2);
        assert_eq!(tuple_head(&r).unwrap(), Nat::from(77u64));
        assert!(component(&r, 1).unwrap().ptr_eq(&d));
    }

    #[test]
    fn lazy_streams_memoize() {
        struct Counter(u64);
        impl Producer for Counter {
            fn advance(&mut self) -> Produced {
                self.0 += 1;
                if self.0 > 3 {
                    Produced::Tail(iota(100u64))
                } else {
                    Produced::Value(Nat::from(self.0))
                }
            }
        }
        let s = Stream::lazy(Box::new(Counter(0)));
        assert_eq!(s.prefix(5).unwrap(), w(&[1, 2, 3, 100, 0]));
        assert_eq!(s.get(1).unwrap(), Nat::from(2u64));
        assert_eq!(s.prefix(5).unwrap(), w(&[1, 2, 3, 100, 0]));
    }

    #[test]
    fn failures_are_reported_with_partial_prefix() {
        let s = Stream::from_fn(|k| if k < 2 { Ok(Nat::from(k)) } else { Err(StreamError::Timeout) });
        let p = s.take(4);
        assert_eq!(p.values, w(&[0, 1]));
        assert_eq!(p.error, Some(StreamError::Timeout));
        assert_eq!(p.to_string(), "[0 1 !timeout]");
        assert_eq!(s.prefix(4), Err(StreamError::Timeout));
    }

    fn word(max_len: usize) -> impl Strategy<Value = Vec<u64>> {
        proptest::collection::vec(0u64..50, 0..max_len)
    }

    proptest! {
        #[test]
        fn pair_unpair_inverse(xs in word(70), xt in 0u64..5, ys in word(70), yt in 0u64..5) {
            let x = Stream::from_u64s(&xs, xt);
            let y = Stream::from_u64s(&ys, yt);
            let z = pair(x.clone(), y.clone());
            let (x2, y2) = unpair(&z);
            prop_assert_eq!(x2.prefix(64).unwrap(), x.prefix(64).unwrap());
            prop_assert_eq!(y2.prefix(64).unwrap(), y.prefix(64).unwrap());
            // value-level views of an unstructured copy give the same answer
            let flat = Stream::literal(z.prefix(128).unwrap().0, Nat::ZERO);
            let (xf, yf) = unpair(&flat);
            prop_assert_eq!(xf.prefix(64).unwrap(), x.prefix(64).unwrap());
            prop_assert_eq!(yf.prefix(64).unwrap(), y.prefix(64).unwrap());
            prop_assert_eq!(pair(xf, yf).prefix(128).unwrap(), flat.prefix(128).unwrap());
        }

        #[test]
        fn encode_tuple_head_and_injectivity(n in 0u64..20, m in 0u64..20, comps in proptest::collection::vec((word(6), 0u64..3), 0..3)) {
            let xs: Vec<Stream> = comps.iter().map(|(p, t)| Stream::from_u64s(p, *t)).collect();
            let z = encode_tuple(n, &xs);
            prop_assert_eq!(tuple_head(&z).unwrap(), Nat::from(n));
            // components up to length L are recoverable from a 2^r * L prefix
            let r = xs.len();
            let l = 8;
            let flat = z.prefix((1 << r) * l).unwrap();
            let mut other = xs.clone();
            if let Some(first) = other.first_mut() {
                *first = pair(first.clone(), iota(1u64));
            }
            let z2 = encode_tuple(m, &other);
            let differs = n != m || !xs.is_empty();
            if differs {
                prop_assert_ne!(z2.prefix((1 << r) * l).unwrap(), flat);
            }
        }
    }
}
