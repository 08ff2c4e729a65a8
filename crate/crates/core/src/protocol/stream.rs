use super::codec::{decode_frame, frame_len};
use super::message::Message;
use super::ProtocolError;

/// Incremental frame reassembly over an arbitrary chunking of the byte
/// stream. After `feed` returns, at most one partial frame is buffered.
///
/// A framing error leaves the stream without a trustworthy frame boundary,
/// so the buffer is discarded and the error returned; the caller decides
/// whether to reset the connection.
#[derive(Debug, Default)]
pub struct FrameParser {
    buf: Vec<u8>,
}

impl FrameParser {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bytes of the partial frame currently held.
    pub fn buffered(&self) -> usize {
        self.buf.len()
    }

    pub fn reset(&mut self) {
        self.buf.clear();
    }

    /// Appends `chunk` and returns every frame it completes.
    pub fn feed(&mut self, chunk: &[u8]) -> Result<Vec<Message>, ProtocolError> {
        self.buf.extend_from_slice(chunk);
        let mut out = Vec::new();
        let mut start = 0;
        loop {
            let rest = &self.buf[start..];
            let total = match frame_len(rest) {
                Ok(Some(total)) => total,
                Ok(None) => break,
                Err(e) => {
                    self.buf.clear();
                    return Err(e);
                }
            };
            if rest.len() < total {
                break;
            }
            match decode_frame(rest) {
                Ok((msg, used)) => {
                    out.push(msg);
                    start += used;
                }
                Err(e) => {
                    // the length prefix was sane, so skip this frame only
                    self.buf.drain(..start + total);
                    return Err(e);
                }
            }
        }
        self.buf.drain(..start);
        Ok(out)
    }
}
