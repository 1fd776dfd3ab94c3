//! Event traces: the in-memory form and the line format
//!
//! ```text
//! G <msgid> <origin> <step> <ttl>
//! D <msgid> <receiver> <hops> <step> <first:0|1>
//! ```

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use crate::error::{Error, Result};
use crate::protocol::MessageId;
use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Generation {
    pub msg: MessageId,
    pub origin: NodeId,
    pub step: u32,
    pub ttl: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub msg: MessageId,
    pub receiver: NodeId,
    pub hops: u32,
    pub step: u32,
    /// First time this node holds this message.
    pub first: bool,
}

/// Receives the events of a run as they happen.
pub trait TraceSink {
    fn generated(&mut self, g: &Generation);
    fn delivered(&mut self, d: &Delivery);
}

impl<T: TraceSink + ?Sized> TraceSink for &mut T {
    fn generated(&mut self, g: &Generation) {
        (**self).generated(g)
    }

    fn delivered(&mut self, d: &Delivery) {
        (**self).delivered(d)
    }
}

/// Discards everything.
impl TraceSink for () {
    fn generated(&mut self, _: &Generation) {}
    fn delivered(&mut self, _: &Delivery) {}
}

/// Fans events out to two sinks.
impl<A: TraceSink, B: TraceSink> TraceSink for (A, B) {
    fn generated(&mut self, g: &Generation) {
        self.0.generated(g);
        self.1.generated(g);
    }

    fn delivered(&mut self, d: &Delivery) {
        self.0.delivered(d);
        self.1.delivered(d);
    }
}

/// Complete record of a run. Every send produces exactly one delivery, so
/// the send count is `deliveries.len()`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventTrace {
    pub generations: Vec<Generation>,
    pub deliveries: Vec<Delivery>,
}

impl EventTrace {
    pub fn total_sends(&self) -> u64 {
        self.deliveries.len() as u64
    }

    pub fn write_to<W: Write>(&self, w: W) -> io::Result<W> {
        let mut tw = TraceWriter::new(w);
        // a live run emits each step's deliveries before its generations
        let (mut gi, mut di) = (0, 0);
        while gi < self.generations.len() || di < self.deliveries.len() {
            let take_gen = match (self.generations.get(gi), self.deliveries.get(di)) {
                (Some(g), Some(d)) => g.step < d.step,
                (Some(_), None) => true,
                _ => false,
            };
            if take_gen {
                tw.generated(&self.generations[gi]);
                gi += 1;
            } else {
                tw.delivered(&self.deliveries[di]);
                di += 1;
            }
        }
        tw.finish()
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut trace = EventTrace::default();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let bad = |detail: &str| Error::Parse {
                what: "trace",
                line: i + 1,
                detail: detail.to_string(),
            };
            let mut f = line.split_ascii_whitespace();
            let tag = f.next();
            let nums: Vec<u32> = f
                .map(|t| t.parse().map_err(|_| bad(&format!("bad field `{t}`"))))
                .collect::<Result<_>>()?;
            match (tag, nums.as_slice()) {
                (None, _) => {}
                (Some("G"), &[msg, origin, step, ttl]) => trace.generations.push(Generation {
                    msg,
                    origin,
                    step,
                    ttl,
                }),
                (Some("D"), &[msg, receiver, hops, step, first]) if first <= 1 => {
                    trace.deliveries.push(Delivery {
                        msg,
                        receiver,
                        hops,
                        step,
                        first: first == 1,
                    })
                }
                _ => return Err(bad(&format!("unrecognized record `{line}`"))),
            }
        }
        Ok(trace)
    }

    /// Read a trace file, gunzipping when the name ends in `.gz`.
    pub fn read_file(path: &Path) -> Result<Self> {
        let f = File::open(path)?;
        let r: Box<dyn Read> = if is_gz(path) {
            Box::new(MultiGzDecoder::new(f))
        } else {
            Box::new(f)
        };
        Self::read_from(BufReader::new(r))
    }
}

impl TraceSink for EventTrace {
    fn generated(&mut self, g: &Generation) {
        self.generations.push(*g);
    }

    fn delivered(&mut self, d: &Delivery) {
        self.deliveries.push(*d);
    }
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}

/// Streams events in the line format. The first write error is kept and
/// returned by [`TraceWriter::finish`].
pub struct TraceWriter<W: Write> {
    out: W,
    error: Option<io::Error>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Self {
        TraceWriter { out, error: None }
    }

    fn emit(&mut self, args: std::fmt::Arguments) {
        if self.error.is_none() {
            if let Err(e) = self.out.write_fmt(args) {
                self.error = Some(e);
            }
        }
    }

    pub fn finish(mut self) -> io::Result<W> {
        match self.error.take() {
            Some(e) => Err(e),
            None => {
                self.out.flush()?;
                Ok(self.out)
            }
        }
    }
}

impl<W: Write> TraceSink for TraceWriter<W> {
    fn generated(&mut self, g: &Generation) {
        self.emit(format_args!("G {} {} {} {}\n", g.msg, g.origin, g.step, g.ttl));
    }

    fn delivered(&mut self, d: &Delivery) {
        self.emit(format_args!(
            "D {} {} {} {} {}\n",
            d.msg, d.receiver, d.hops, d.step, d.first as u8
        ));
    }
}

/// Output stream of a trace file.
pub enum TraceFile {
    Plain(BufWriter<File>),
    Gz(GzEncoder<BufWriter<File>>),
}

impl TraceFile {
    /// Create `path`, compressing when `gz` is set.
    pub fn create(path: &Path, gz: bool) -> io::Result<Self> {
        let f = BufWriter::new(File::create(path)?);
        Ok(if gz {
            // fixed level and no timestamp keep the bytes reproducible
            TraceFile::Gz(GzEncoder::new(f, Compression::new(6)))
        } else {
            TraceFile::Plain(f)
        })
    }

    /// Flush and, for gz, write the trailer.
    pub fn close(self) -> io::Result<()> {
        match self {
            TraceFile::Plain(mut w) => w.flush(),
            TraceFile::Gz(w) => w.finish()?.flush(),
        }
    }
}

impl Write for TraceFile {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            TraceFile::Plain(w) => w.write(buf),
            TraceFile::Gz(w) => w.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            TraceFile::Plain(w) => w.flush(),
            TraceFile::Gz(w) => w.flush(),
        }
    }
}
