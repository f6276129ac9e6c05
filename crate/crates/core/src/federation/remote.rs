//! Newline-delimited request/response protocol for remote sources.
//!
//! ```text
//! client: LIST\n          server: <local_id>\n ... \n      (blank line ends)
//! client: GET <id>\n      server: <field>\t<value>\n ... \n
//! any failure:            server: ERR <message>\n         (no blank line)
//! ```
//!
//! One connection carries any number of requests.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use thiserror::Error;

use super::{split_field_line, FederationError, Harvest, RecordError, SourceAdapter, SourceRecord};

const CONNECT_TIMEOUT: Duration = Duration::from_secs(5);
const READ_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("remote error: {0}")]
    Remote(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

fn strip_scheme(location: &str) -> &str {
    location.strip_prefix("tcp://").unwrap_or(location)
}

pub struct RemoteLineClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl RemoteLineClient {
    /// Connect to `tcp://host:port` (the scheme is optional).
    pub fn connect(location: &str) -> io::Result<Self> {
        let mut last_err = io::Error::new(io::ErrorKind::NotFound, "address resolved to nothing");
        for addr in strip_scheme(location).to_socket_addrs()? {
            match TcpStream::connect_timeout(&addr, CONNECT_TIMEOUT) {
                Ok(stream) => {
                    stream.set_read_timeout(Some(READ_TIMEOUT))?;
                    stream.set_nodelay(true)?;
                    let writer = stream.try_clone()?;
                    return Ok(Self {
                        reader: BufReader::new(stream),
                        writer,
                    });
                }
                Err(e) => last_err = e,
            }
        }
        Err(last_err)
    }

    fn request(&mut self, line: &str) -> Result<Vec<String>, ProtocolError> {
        self.writer.write_all(format!("{line}\n").as_bytes())?;
        self.writer.flush()?;

        let mut block = Vec::new();
        loop {
            let mut buf = String::new();
            if self.reader.read_line(&mut buf)? == 0 {
                return Err(io::Error::new(
                    io::ErrorKind::UnexpectedEof,
                    "connection closed mid-response",
                )
                .into());
            }
            let line = buf.trim_end_matches(['\n', '\r']);
            if block.is_empty() {
                if let Some(message) = line.strip_prefix("ERR") {
                    return Err(ProtocolError::Remote(message.trim().to_string()));
                }
            }
            if line.is_empty() {
                return Ok(block);
            }
            block.push(line.to_string());
        }
    }

    pub fn list(&mut self) -> Result<Vec<String>, ProtocolError> {
        self.request("LIST")
    }

    pub fn get(&mut self, local_id: &str) -> Result<BTreeMap<String, String>, ProtocolError> {
        let lines = self.request(&format!("GET {local_id}"))?;
        let mut fields = BTreeMap::new();
        for line in &lines {
            let (field, value) = split_field_line(line).ok_or_else(|| {
                ProtocolError::Malformed(format!("{line:?} is not field<TAB>value"))
            })?;
            fields.insert(field.to_string(), value.to_string());
        }
        Ok(fields)
    }
}

pub(super) struct RemoteLineAdapter<'a> {
    source_id: &'a str,
    location: &'a str,
}

impl<'a> RemoteLineAdapter<'a> {
    pub(super) fn new(source_id: &'a str, location: &'a str) -> Self {
        Self {
            source_id,
            location,
        }
    }

    fn connect(&self) -> Result<RemoteLineClient, FederationError> {
        RemoteLineClient::connect(self.location).map_err(|e| {
            FederationError::unreachable(self.source_id, format!("{}: {e}", self.location))
        })
    }
}

impl SourceAdapter for RemoteLineAdapter<'_> {
    fn harvest(&self) -> Result<Harvest, FederationError> {
        let mut client = self.connect()?;
        let ids = client
            .list()
            .map_err(|e| FederationError::unreachable(self.source_id, e))?;
        let mut harvest = Harvest::default();
        for local_id in ids {
            match client.get(&local_id) {
                Ok(raw_fields) => harvest.records.push(SourceRecord {
                    source_id: self.source_id.to_string(),
                    local_id,
                    raw_fields,
                }),
                Err(e @ (ProtocolError::Remote(_) | ProtocolError::Malformed(_))) => {
                    harvest.errors.push(RecordError {
                        source_id: self.source_id.to_string(),
                        locator: local_id,
                        message: e.to_string(),
                    })
                }
                Err(e) => return Err(FederationError::unreachable(self.source_id, e)),
            }
        }
        Ok(harvest)
    }

    fn fetch(&self, local_id: &str) -> Result<SourceRecord, FederationError> {
        let mut client = self.connect()?;
        match client.get(local_id) {
            Ok(raw_fields) => Ok(SourceRecord {
                source_id: self.source_id.to_string(),
                local_id: local_id.to_string(),
                raw_fields,
            }),
            Err(ProtocolError::Remote(_)) => {
                Err(FederationError::NotFoundAtSource(local_id.to_string()))
            }
            Err(e) => Err(FederationError::unreachable(self.source_id, e)),
        }
    }
}

/// What the server answers for one local id: fields, or an `ERR` message.
pub type RemoteEntry = Result<BTreeMap<String, String>, String>;

/// A small threaded server for the line protocol, serving a fixed record set.
pub struct RemoteLineServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl RemoteLineServer {
    /// Serve on an ephemeral localhost port.
    pub fn start(entries: BTreeMap<String, RemoteEntry>) -> io::Result<Self> {
        Self::bind("127.0.0.1:0", entries)
    }

    pub fn bind(
        addr: impl ToSocketAddrs,
        entries: BTreeMap<String, RemoteEntry>,
    ) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let entries = Arc::new(entries);
        let handle = {
            let stop = Arc::clone(&stop);
            thread::spawn(move || {
                for stream in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let entries = Arc::clone(&entries);
                    thread::spawn(move || {
                        let _ = serve_connection(stream, &entries);
                    });
                }
            })
        };
        Ok(Self {
            addr,
            stop,
            handle: Some(handle),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Location string suitable for a remote-line source descriptor.
    pub fn location(&self) -> String {
        format!("tcp://{}", self.addr)
    }
}

impl Drop for RemoteLineServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop so it observes the flag.
        let _ = TcpStream::connect_timeout(&self.addr, Duration::from_millis(200));
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve_connection(stream: TcpStream, entries: &BTreeMap<String, RemoteEntry>) -> io::Result<()> {
    stream.set_nodelay(true)?;
    let mut writer = stream.try_clone()?;
    let reader = BufReader::new(stream);
    for line in reader.lines() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        let mut response = String::new();
        if line == "LIST" {
            for id in entries.keys() {
                response.push_str(id);
                response.push('\n');
            }
            response.push('\n');
        } else if let Some(id) = line.strip_prefix("GET ") {
            match entries.get(id) {
                Some(Ok(fields)) => {
                    for (field, value) in fields {
                        response.push_str(&format!("{field}\t{value}\n"));
                    }
                    response.push('\n');
                }
                Some(Err(message)) => response.push_str(&format!("ERR {message}\n")),
                None => response.push_str(&format!("ERR not found: {id}\n")),
            }
        } else {
            response.push_str("ERR unknown command\n");
        }
        writer.write_all(response.as_bytes())?;
        writer.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries() -> BTreeMap<String, RemoteEntry> {
        let mut m = BTreeMap::new();
        for id in ["r2", "r1", "r3"] {
            let fields = [("title".to_string(), format!("Remote {id}"))]
                .into_iter()
                .collect();
            m.insert(id.to_string(), Ok(fields));
        }
        m.insert("bad".to_string(), Err("storage failure".to_string()));
        m
    }

    #[test]
    fn harvest_over_the_wire() {
        let server = RemoteLineServer::start(entries()).unwrap();
        let location = server.location();
        let adapter = RemoteLineAdapter::new("rl", &location);
        let harvest = adapter.harvest().unwrap().finish();
        let ids: Vec<_> = harvest
            .records
            .iter()
            .map(|r| r.local_id.as_str())
            .collect();
        assert_eq!(ids, ["r1", "r2", "r3"]);
        assert_eq!(harvest.errors.len(), 1);
        assert_eq!(harvest.errors[0].locator, "bad");
        assert_eq!(
            adapter.fetch("r2").unwrap().raw_fields["title"],
            "Remote r2"
        );
        assert_eq!(
            adapter.fetch("ghost"),
            Err(FederationError::NotFoundAtSource("ghost".into()))
        );
    }

    #[test]
    fn refused_connection_is_unreachable() {
        // Bind then drop to obtain a port with nobody listening.
        let port = TcpListener::bind("127.0.0.1:0")
            .unwrap()
            .local_addr()
            .unwrap()
            .port();
        let location = format!("tcp://127.0.0.1:{port}");
        let adapter = RemoteLineAdapter::new("rl", &location);
        assert!(matches!(
            adapter.harvest(),
            Err(FederationError::SourceUnreachable { .. })
        ));
    }

    #[test]
    fn client_speaks_the_protocol() {
        let server = RemoteLineServer::start(entries()).unwrap();
        let mut client = RemoteLineClient::connect(&server.addr().to_string()).unwrap();
        assert_eq!(client.list().unwrap(), ["bad", "r1", "r2", "r3"]);
        assert!(
            matches!(client.get("bad"), Err(ProtocolError::Remote(m)) if m == "storage failure")
        );
        assert_eq!(client.get("r1").unwrap()["title"], "Remote r1");
        assert!(matches!(
            client.request("PING"),
            Err(ProtocolError::Remote(_))
        ));
    }
}
