//! Blocking helpers for stream sockets.

use std::io::{self, Read, Write};

use super::codec::{decode, encode, frame_len};
use super::message::Message;

fn invalid(e: impl std::fmt::Display) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, e.to_string())
}

pub fn write_message<W: Write>(w: &mut W, msg: &Message) -> io::Result<()> {
    let bytes = encode(msg).map_err(invalid)?;
    w.write_all(&bytes)
}

/// Reads exactly one frame. Returns `Ok(None)` on a clean EOF between frames.
pub fn read_message<R: Read>(r: &mut R) -> io::Result<Option<Message>> {
    let mut prefix = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match r.read(&mut prefix[got..])? {
            0 if got == 0 => return Ok(None),
            0 => return Err(io::ErrorKind::UnexpectedEof.into()),
            n => got += n,
        }
    }
    let total = frame_len(&prefix)
        .map_err(invalid)?
        .expect("four bytes read");
    let mut frame = vec![0u8; total];
    frame[..4].copy_from_slice(&prefix);
    r.read_exact(&mut frame[4..])?;
    decode(&frame).map(Some).map_err(invalid)
}
