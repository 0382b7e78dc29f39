use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use crate::session::Store;

/// Answers each request line on `stream` until the peer closes it.
pub fn serve_connection(stream: TcpStream, store: &Store) -> std::io::Result<()> {
    let mut out = stream.try_clone()?;
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut reply = store.handle_line(&line);
        reply.push('\n');
        out.write_all(reply.as_bytes())?;
        out.flush()?;
    }
    Ok(())
}

/// Accepts connections forever, one thread each.
pub fn serve(listener: TcpListener, store: Arc<Store>) -> std::io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let store = store.clone();
        thread::spawn(move || {
            if let Err(e) = serve_connection(stream, &store) {
                eprintln!("connection closed: {e}");
            }
        });
    }
    Ok(())
}
