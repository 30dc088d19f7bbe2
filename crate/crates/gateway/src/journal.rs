//! Append-only JSON-lines event log.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use riverhelm_core::fleet::{FleetConfig, FleetRecord, TimedRecord};
use riverhelm_core::mdl::MapDocument;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Kind of the first record of every log: the map and config the run
/// started from.
pub const SESSION_KIND: &str = "session";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub seq: u64,
    pub timestamp: f64,
    pub kind: String,
    pub payload: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub map: MapDocument,
    pub config: FleetConfig,
}

impl LogRecord {
    pub fn from_fleet(seq: u64, r: TimedRecord) -> Self {
        let kind = r.record.kind().to_string();
        let payload = match serde_json::to_value(&r.record) {
            Ok(Value::Object(mut m)) => m.remove("payload").unwrap_or(Value::Null),
            _ => Value::Null,
        };
        Self { seq, timestamp: r.timestamp, kind, payload }
    }

    /// The fleet record this log line carries; `None` for session headers
    /// and unknown kinds.
    pub fn to_fleet(&self) -> Option<TimedRecord> {
        let v = serde_json::json!({ "kind": self.kind, "payload": self.payload });
        let record: FleetRecord = serde_json::from_value(v).ok()?;
        Some(TimedRecord { timestamp: self.timestamp, record })
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("log records always serialize")
    }
}

/// Sequencer plus optional file sink.
#[derive(Debug)]
pub struct Journal {
    next_seq: u64,
    sink: Option<BufWriter<File>>,
}

impl Journal {
    pub fn new(sink: Option<File>) -> Self {
        Self { next_seq: 0, sink: sink.map(BufWriter::new) }
    }

    pub fn create(path: Option<&Path>) -> io::Result<Self> {
        Ok(Self::new(path.map(File::create).transpose()?))
    }

    pub fn append(&mut self, timestamp: f64, kind: &str, payload: Value) -> io::Result<LogRecord> {
        let r = LogRecord { seq: self.next_seq, timestamp, kind: kind.to_string(), payload };
        self.write(&r)?;
        Ok(r)
    }

    pub fn append_fleet(&mut self, r: TimedRecord) -> io::Result<LogRecord> {
        let r = LogRecord::from_fleet(self.next_seq, r);
        self.write(&r)?;
        Ok(r)
    }

    fn write(&mut self, r: &LogRecord) -> io::Result<()> {
        if let Some(w) = &mut self.sink {
            writeln!(w, "{}", r.to_line())?;
        }
        self.next_seq += 1;
        Ok(())
    }

    pub fn flush(&mut self) -> io::Result<()> {
        if let Some(w) = &mut self.sink {
            w.flush()?;
        }
        Ok(())
    }
}

pub fn read_log(path: &Path) -> io::Result<Vec<LogRecord>> {
    let f = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: LogRecord = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", i + 1)))?;
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use riverhelm_core::guard::{ExceptionEvent, GuardState};

    #[test]
    fn fleet_record_survives_the_log_shape() {
        let ev = ExceptionEvent {
            robot_id: "r".into(),
            from: GuardState::Nominal,
            to: GuardState::Anchoring,
            causes: Default::default(),
            timestamp: 0.1 + 0.2,
        };
        let t = TimedRecord { timestamp: 0.1 + 0.2, record: FleetRecord::ExceptionEvent(ev) };
        let r = LogRecord::from_fleet(7, t.clone());
        assert_eq!(r.kind, "exception_event");
        let back: LogRecord = serde_json::from_str(&r.to_line()).unwrap();
        assert_eq!(back.to_fleet(), Some(t));
    }

    #[test]
    fn seq_is_strictly_increasing() {
        let mut j = Journal::new(None);
        let a = j.append(0.0, "x", Value::Null).unwrap();
        let b = j.append(0.0, "x", Value::Null).unwrap();
        assert!(b.seq > a.seq);
    }
}
