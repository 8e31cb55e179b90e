//! Classical side channel.
//!
//! A measurement outcome travels from sender to receiver as a fixed 23-byte
//! frame: a 2-byte magic, a version byte, four big-endian u32 fields
//! (protocol dims n1 and n2, then the outcome labels i and k) and a CRC-32
//! over everything before it. Two transports carry frames: an in-process
//! queue and a TCP loopback pair.

use std::collections::VecDeque;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::engine::{apply_sender_unitary, fidelity, measure_alice, prepare_joint, recover};
use crate::error::{Error, Result};
use crate::state::{ResourceMatrix, StateVector};
use crate::synthesis::{ProtocolUnitary, RecoveryFamily};

/// Total frame length in bytes.
pub const FRAME_LEN: usize = 23;
/// First two frame bytes.
pub const MAGIC: [u8; 2] = [0x51, 0x54];
/// Current wire version.
pub const VERSION: u8 = 1;

const CRC_TABLE: [u32; 256] = build_crc_table();

const fn build_crc_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut n = 0;
    while n < 256 {
        let mut c = n as u32;
        let mut bit = 0;
        while bit < 8 {
            c = if c & 1 == 1 { 0xEDB8_8320 ^ (c >> 1) } else { c >> 1 };
            bit += 1;
        }
        table[n] = c;
        n += 1;
    }
    table
}

/// CRC-32 (IEEE 802.3) of a byte slice.
pub fn crc32(data: &[u8]) -> u32 {
    let mut c = 0xFFFF_FFFFu32;
    for &b in data {
        c = CRC_TABLE[((c ^ b as u32) & 0xFF) as usize] ^ (c >> 8);
    }
    c ^ 0xFFFF_FFFF
}

/// One measurement outcome in wire form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutcomeFrame {
    pub n1: u32,
    pub n2: u32,
    pub i: u32,
    pub k: u32,
}

impl OutcomeFrame {
    pub fn new(n1: usize, n2: usize, i: usize, k: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::Validation("frame dimensions must be positive".into()));
        }
        if n1 > u32::MAX as usize || n2 > u32::MAX as usize {
            return Err(Error::Validation("frame dimensions exceed u32".into()));
        }
        if i == 0 || i > n1 || k == 0 || k > n2 {
            return Err(Error::Validation(format!(
                "outcome ({i}, {k}) outside ({n1}, {n2})"
            )));
        }
        Ok(Self {
            n1: n1 as u32,
            n2: n2 as u32,
            i: i as u32,
            k: k as u32,
        })
    }

    pub fn encode(&self) -> [u8; FRAME_LEN] {
        let mut out = [0u8; FRAME_LEN];
        out[0] = MAGIC[0];
        out[1] = MAGIC[1];
        out[2] = VERSION;
        out[3..7].copy_from_slice(&self.n1.to_be_bytes());
        out[7..11].copy_from_slice(&self.n2.to_be_bytes());
        out[11..15].copy_from_slice(&self.i.to_be_bytes());
        out[15..19].copy_from_slice(&self.k.to_be_bytes());
        let crc = crc32(&out[..19]);
        out[19..23].copy_from_slice(&crc.to_be_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < FRAME_LEN {
            return Err(Error::IncompleteFrame {
                got: bytes.len(),
                need: FRAME_LEN,
            });
        }
        if bytes.len() > FRAME_LEN {
            return Err(Error::Protocol(format!(
                "frame carries {} trailing bytes",
                bytes.len() - FRAME_LEN
            )));
        }
        if bytes[0] != MAGIC[0] || bytes[1] != MAGIC[1] {
            return Err(Error::Protocol(format!(
                "bad magic {:#04x} {:#04x}",
                bytes[0], bytes[1]
            )));
        }
        if bytes[2] != VERSION {
            return Err(Error::Protocol(format!("unsupported version {}", bytes[2])));
        }
        let stored = u32::from_be_bytes(bytes[19..23].try_into().unwrap());
        let computed = crc32(&bytes[..19]);
        if stored != computed {
            return Err(Error::Corruption(format!(
                "checksum mismatch: stored {stored:#010x}, computed {computed:#010x}"
            )));
        }
        let n1 = u32::from_be_bytes(bytes[3..7].try_into().unwrap());
        let n2 = u32::from_be_bytes(bytes[7..11].try_into().unwrap());
        let i = u32::from_be_bytes(bytes[11..15].try_into().unwrap());
        let k = u32::from_be_bytes(bytes[15..19].try_into().unwrap());
        if n1 == 0 || n2 == 0 || i == 0 || i > n1 || k == 0 || k > n2 {
            return Err(Error::Validation(format!(
                "outcome ({i}, {k}) outside ({n1}, {n2})"
            )));
        }
        Ok(Self { n1, n2, i, k })
    }
}

/// How the classical frame travels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transport {
    /// In-process queue; sender and receiver run sequentially.
    Memory,
    /// Loopback TCP pair; the receiver runs on its own thread. Port 0 binds
    /// an ephemeral port.
    Tcp { host: String, port: u16 },
}

/// Outcome of one complete sender-to-receiver session.
#[derive(Debug, Clone)]
pub struct SessionResult {
    pub outcome_i: usize,
    pub outcome_k: usize,
    pub probability: f64,
    pub fidelity: f64,
    /// The exact bytes that crossed the classical channel.
    pub frame: [u8; FRAME_LEN],
}

fn read_frame(stream: &mut TcpStream) -> Result<[u8; FRAME_LEN]> {
    let mut buf = [0u8; FRAME_LEN];
    let mut got = 0;
    while got < FRAME_LEN {
        match stream.read(&mut buf[got..])? {
            0 => return Err(Error::IncompleteFrame { got, need: FRAME_LEN }),
            n => got += n,
        }
    }
    Ok(buf)
}

/// Receiver-side completion: decode the frame, apply the matching recovery
/// and score the result against the target.
fn complete_branch(
    bytes: &[u8],
    family: &RecoveryFamily,
    bob_state: crate::tensor::ComplexVector,
    target: &StateVector,
) -> Result<(OutcomeFrame, f64)> {
    let frame = OutcomeFrame::decode(bytes)?;
    if frame.n1 as usize != family.n1() || frame.n2 as usize != family.n2() {
        return Err(Error::Validation(format!(
            "frame dims ({}, {}) do not match protocol dims ({}, {})",
            frame.n1,
            frame.n2,
            family.n1(),
            family.n2()
        )));
    }
    let recovered = recover(&bob_state, family, frame.i as usize, frame.k as usize)?;
    let f = fidelity(&recovered, target.vector())?;
    Ok((frame, f))
}

/// Runs one full teleportation session: the sender prepares, transforms and
/// measures, the outcome frame crosses the chosen transport, and the
/// receiver corrects its half and reports the fidelity reached.
pub fn run_session(
    psi0: &StateVector,
    resource: &ResourceMatrix,
    unitary: &ProtocolUnitary,
    family: &RecoveryFamily,
    seed: u64,
    transport: &Transport,
) -> Result<SessionResult> {
    let n1 = unitary.n1();
    let n2 = unitary.n2();
    let n3 = resource.dim_receiver();
    let target = family.target_state(psi0)?;

    let joint = prepare_joint(psi0, resource)?;
    let post = apply_sender_unitary(&joint, unitary, n3)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (outcome, bob_state) = measure_alice(&post, n1, n2, n3, &mut rng)?;
    let frame_bytes = OutcomeFrame::new(n1, n2, outcome.i, outcome.k)?.encode();

    let (frame, f) = match transport {
        Transport::Memory => {
            let mut queue: VecDeque<Vec<u8>> = VecDeque::new();
            queue.push_back(frame_bytes.to_vec());
            let received = queue.pop_front().ok_or(Error::IncompleteFrame {
                got: 0,
                need: FRAME_LEN,
            })?;
            complete_branch(&received, family, bob_state, &target)?
        }
        Transport::Tcp { host, port } => {
            let listener = TcpListener::bind((host.as_str(), *port))?;
            let addr = listener.local_addr()?;
            std::thread::scope(|scope| -> Result<(OutcomeFrame, f64)> {
                let receiver = scope.spawn(move || -> Result<(OutcomeFrame, f64)> {
                    let (mut stream, _) = listener.accept()?;
                    let bytes = read_frame(&mut stream)?;
                    complete_branch(&bytes, family, bob_state, &target)
                });
                let mut stream = TcpStream::connect(addr)?;
                stream.write_all(&frame_bytes)?;
                stream.shutdown(std::net::Shutdown::Write)?;
                receiver
                    .join()
                    .map_err(|_| Error::Session("receiver thread panicked".into()))?
            })?
        }
    };

    Ok(SessionResult {
        outcome_i: frame.i as usize,
        outcome_k: frame.k as usize,
        probability: outcome.probability,
        fidelity: f,
        frame: frame_bytes,
    })
}
