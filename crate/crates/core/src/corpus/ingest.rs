//! Record ingestion.
//!
//! Two sources: a directory of `.html`/`.htm` files (read in sorted name
//! order) or a WARC 1.0/1.1 file, plain or gzip (detected by magic bytes).
//! From a WARC only `response` records whose HTTP payload declares an HTML
//! content type are kept; the HTTP header block is stripped so the record
//! body is the raw HTML. A truncated or mid-stream-corrupt WARC yields the
//! records read so far plus a warning count.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use flate2::bufread::MultiGzDecoder;
use warc::{RecordType, WarcHeader, WarcReader};

use super::{CorpusError, RawRecord};

/// Where records come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusSource {
    Directory(PathBuf),
    WarcFile(PathBuf),
}

impl CorpusSource {
    /// Directories ingest as file trees, anything else as a WARC file.
    pub fn auto(path: impl Into<PathBuf>) -> CorpusSource {
        let path = path.into();
        if path.is_dir() {
            CorpusSource::Directory(path)
        } else {
            CorpusSource::WarcFile(path)
        }
    }
}

/// Ingested records plus the number of skipped-with-warning events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestOutput {
    pub records: Vec<RawRecord>,
    pub warnings: usize,
}

/// Read all records from a source.
pub fn ingest(source: &CorpusSource) -> Result<IngestOutput, CorpusError> {
    match source {
        CorpusSource::Directory(dir) => ingest_dir(dir),
        CorpusSource::WarcFile(path) => ingest_warc(path),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn ingest_dir(dir: &Path) -> Result<IngestOutput, CorpusError> {
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        let path = entry.map_err(|e| io_err(dir, e))?.path();
        let is_html = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("html") || e.eq_ignore_ascii_case("htm"));
        if path.is_file() && is_html {
            paths.push(path);
        }
    }
    paths.sort();
    let mut records = Vec::with_capacity(paths.len());
    for path in paths {
        let body = std::fs::read(&path).map_err(|e| io_err(&path, e))?;
        records.push(RawRecord {
            doc_id: path.display().to_string(),
            url: None,
            body,
        });
    }
    Ok(IngestOutput {
        records,
        warnings: 0,
    })
}

fn ingest_warc(path: &Path) -> Result<IngestOutput, CorpusError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = BufReader::new(file);
    let gzipped = reader
        .fill_buf()
        .map_err(|e| io_err(path, e))?
        .starts_with(&[0x1f, 0x8b]);
    if gzipped {
        let mut decoder = BufReader::new(MultiGzDecoder::new(reader));
        check_warc_magic(&mut decoder, path)?;
        read_warc(WarcReader::new(decoder), path)
    } else {
        check_warc_magic(&mut reader, path)?;
        read_warc(WarcReader::new(reader), path)
    }
}

/// A stream that does not open with a `WARC/` version marker is not a WARC.
fn check_warc_magic<R: BufRead>(reader: &mut R, path: &Path) -> Result<(), CorpusError> {
    let head = reader.fill_buf().map_err(|e| io_err(path, e))?;
    if !head.starts_with(b"WARC/") {
        return Err(CorpusError::Warc {
            path: path.display().to_string(),
            message: "missing WARC/ version marker".to_string(),
        });
    }
    Ok(())
}

fn read_warc<R: BufRead>(reader: WarcReader<R>, path: &Path) -> Result<IngestOutput, CorpusError> {
    let mut records = Vec::new();
    let mut warnings = 0usize;
    let mut saw_any = false;
    for item in reader.iter_records() {
        match item {
            Err(error) => {
                if !saw_any {
                    // Nothing parseable at all: not a WARC stream.
                    return Err(CorpusError::Warc {
                        path: path.display().to_string(),
                        message: error.to_string(),
                    });
                }
                // Mid-stream failure (e.g. truncation): keep what we have.
                warnings += 1;
                break;
            }
            Ok(record) => {
                saw_any = true;
                if *record.warc_type() != RecordType::Response {
                    continue;
                }
                let Some((headers, payload)) = split_http_payload(record.body()) else {
                    warnings += 1;
                    continue;
                };
                if !declares_html(&headers) {
                    continue;
                }
                records.push(RawRecord {
                    doc_id: record.warc_id().to_string(),
                    url: record
                        .header(WarcHeader::TargetURI)
                        .map(|uri| uri.into_owned()),
                    body: payload.to_vec(),
                });
            }
        }
    }
    Ok(IngestOutput { records, warnings })
}

/// Split an HTTP response into (header block, body) at the blank line.
fn split_http_payload(body: &[u8]) -> Option<(String, &[u8])> {
    let boundary = body.windows(4).position(|w| w == b"\r\n\r\n")?;
    let headers = String::from_utf8_lossy(&body[..boundary]).to_string();
    Some((headers, &body[boundary + 4..]))
}

fn declares_html(headers: &str) -> bool {
    headers.lines().any(|line| {
        let Some((name, value)) = line.split_once(':') else {
            return false;
        };
        name.trim().eq_ignore_ascii_case("content-type")
            && value.to_ascii_lowercase().contains("text/html")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn directory_ingest_sorted_with_extensions_filtered() {
        let dir = tempfile::tempdir().unwrap();
        for (name, body) in [
            ("b.html", "<p>b</p>"),
            ("a.html", "<p>a</p>"),
            ("c.htm", "<p>c</p>"),
            ("notes.txt", "skip me"),
            ("d.HTML", "<p>d</p>"),
        ] {
            std::fs::write(dir.path().join(name), body).unwrap();
        }
        let out = ingest(&CorpusSource::auto(dir.path())).unwrap();
        assert_eq!(out.warnings, 0);
        let names: Vec<&str> = out
            .records
            .iter()
            .map(|r| {
                Path::new(&r.doc_id)
                    .file_name()
                    .unwrap()
                    .to_str()
                    .unwrap()
            })
            .collect();
        assert_eq!(names, ["a.html", "b.html", "c.htm", "d.HTML"]);
        assert_eq!(out.records[0].body, b"<p>a</p>");
        assert!(out.records[0].url.is_none());
    }

    #[test]
    fn empty_directory_is_an_empty_stream() {
        let dir = tempfile::tempdir().unwrap();
        let out = ingest(&CorpusSource::auto(dir.path())).unwrap();
        assert!(out.records.is_empty());
    }

    #[test]
    fn missing_directory_reports_io_error() {
        let err = ingest(&CorpusSource::Directory(PathBuf::from(
            "/nonexistent/corpus/dir",
        )))
        .unwrap_err();
        assert!(matches!(err, CorpusError::Io { .. }));
    }

    fn warc_record(kind: &str, id: &str, uri: &str, content_type: &str, payload: &str) -> Vec<u8> {
        let http = format!(
            "HTTP/1.1 200 OK\r\nContent-Type: {content_type}\r\n\r\n{payload}"
        );
        let header = format!(
            "WARC/1.0\r\n\
             WARC-Type: {kind}\r\n\
             WARC-Record-ID: <urn:uuid:{id}>\r\n\
             WARC-Target-URI: {uri}\r\n\
             WARC-Date: 2019-04-01T00:00:00Z\r\n\
             Content-Type: application/http;msgtype=response\r\n\
             Content-Length: {}\r\n\r\n",
            http.len()
        );
        let mut out = header.into_bytes();
        out.extend_from_slice(http.as_bytes());
        out.extend_from_slice(b"\r\n\r\n");
        out
    }

    fn mini_warc() -> Vec<u8> {
        let mut bytes = Vec::new();
        let info = "WARC/1.0\r\n\
                    WARC-Type: warcinfo\r\n\
                    WARC-Record-ID: <urn:uuid:info>\r\n\
                    WARC-Date: 2019-04-01T00:00:00Z\r\n\
                    Content-Type: application/warc-fields\r\n\
                    Content-Length: 12\r\n\r\n\
                    format: WARC\r\n\r\n";
        bytes.extend_from_slice(info.as_bytes());
        bytes.extend(warc_record(
            "response",
            "1111",
            "http://example.com/a",
            "text/html; charset=utf-8",
            "<p>Page one.</p>",
        ));
        bytes.extend(warc_record(
            "response",
            "2222",
            "http://example.com/logo",
            "image/png",
            "PNGDATA",
        ));
        bytes.extend(warc_record(
            "response",
            "3333",
            "http://example.com/b",
            "text/html",
            "<p>Page two.</p>",
        ));
        bytes
    }

    #[test]
    fn warc_keeps_only_html_responses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mini.warc");
        std::fs::write(&path, mini_warc()).unwrap();
        let out = ingest(&CorpusSource::auto(&path)).unwrap();
        assert_eq!(out.warnings, 0);
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].doc_id, "<urn:uuid:1111>");
        assert_eq!(out.records[0].url.as_deref(), Some("http://example.com/a"));
        assert_eq!(out.records[0].body, b"<p>Page one.</p>");
        assert_eq!(out.records[1].doc_id, "<urn:uuid:3333>");
    }

    #[test]
    fn gzipped_warc_is_detected_by_magic_bytes() {
        let dir = tempfile::tempdir().unwrap();
        // Extension does not say gzip; the sniffer must.
        let path = dir.path().join("mini.warc");
        let mut encoder =
            flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        encoder.write_all(&mini_warc()).unwrap();
        std::fs::write(&path, encoder.finish().unwrap()).unwrap();
        let out = ingest(&CorpusSource::auto(&path)).unwrap();
        assert_eq!(out.records.len(), 2);
    }

    #[test]
    fn truncated_warc_yields_prefix_plus_warning() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cut.warc");
        let bytes = mini_warc();
        // Cut inside the final record's body.
        std::fs::write(&path, &bytes[..bytes.len() - 20]).unwrap();
        let out = ingest(&CorpusSource::auto(&path)).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.warnings, 1);
    }

    #[test]
    fn non_warc_file_is_a_hard_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus.warc");
        std::fs::write(&path, b"this is not a warc file at all\n").unwrap();
        assert!(matches!(
            ingest(&CorpusSource::auto(&path)),
            Err(CorpusError::Warc { .. })
        ));
    }

    #[test]
    fn http_headers_are_stripped_from_the_body() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.warc");
        std::fs::write(
            &path,
            warc_record(
                "response",
                "9999",
                "http://example.com/x",
                "TEXT/HTML",
                "<html><body>Hi, there.</body></html>",
            ),
        )
        .unwrap();
        let out = ingest(&CorpusSource::auto(&path)).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].body, b"<html><body>Hi, there.</body></html>");
    }
}
