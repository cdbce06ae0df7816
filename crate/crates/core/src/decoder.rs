//! Latent-to-program decoders used by the search front-ends.

use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::str::FromStr;
use std::sync::Mutex;

use thiserror::Error;

use crate::dsl::{Action, DslError, Program};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("decoder i/o: {0}")]
    Io(#[from] io::Error),
    #[error("decoder protocol: {0}")]
    Protocol(String),
    #[error("decoded text does not parse: {0}")]
    Parse(#[from] DslError),
    #[error("latent has {found} entries, decoder expects {expected}")]
    Dim { expected: usize, found: usize },
    #[error("bad decoder spec: {0}")]
    Spec(String),
}

pub trait Decoder: Send + Sync {
    fn dim(&self) -> usize;
    fn decode(&self, z: &[f64]) -> Result<Program, DecodeError>;
}

/// Oracle decoder over straight-line programs: the latent is `max_len`
/// blocks of 6 scores, one per primitive action plus a trailing "skip";
/// each block decodes to its argmax.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimitiveDecoder {
    pub max_len: usize,
}

pub const PRIMITIVE_BLOCK: usize = 6;

impl PrimitiveDecoder {
    pub fn new(max_len: usize) -> Self {
        PrimitiveDecoder { max_len }
    }

    /// One-hot latent that decodes to `program`. `None` if the program is
    /// not straight-line or too long.
    pub fn encode(&self, program: &Program) -> Option<Vec<f64>> {
        let actions = program.as_straight_line()?;
        if actions.len() > self.max_len {
            return None;
        }
        let mut z = vec![0.0; self.dim()];
        for b in 0..self.max_len {
            let k = actions.get(b).map(|a| a.index()).unwrap_or(PRIMITIVE_BLOCK - 1);
            z[b * PRIMITIVE_BLOCK + k] = 1.0;
        }
        Some(z)
    }
}

impl Decoder for PrimitiveDecoder {
    fn dim(&self) -> usize {
        self.max_len * PRIMITIVE_BLOCK
    }

    fn decode(&self, z: &[f64]) -> Result<Program, DecodeError> {
        if z.len() != self.dim() {
            return Err(DecodeError::Dim {
                expected: self.dim(),
                found: z.len(),
            });
        }
        let actions = z.chunks_exact(PRIMITIVE_BLOCK).filter_map(|block| {
            let mut arg = 0;
            for (i, v) in block.iter().enumerate() {
                if *v > block[arg] {
                    arg = i;
                }
            }
            Action::ALL.get(arg).copied()
        });
        Ok(Program::from_actions(actions))
    }
}

struct Pipe {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// External decoder process. Each request is one line holding a JSON array
/// of numbers; the reply is one line of program text.
pub struct CommandDecoder {
    dim: usize,
    pipe: Mutex<Pipe>,
}

impl CommandDecoder {
    pub fn spawn(command: &str, args: &[String], dim: usize) -> Result<Self, DecodeError> {
        let mut child = Command::new(command)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(CommandDecoder {
            dim,
            pipe: Mutex::new(Pipe { child, stdin, stdout }),
        })
    }
}

impl Decoder for CommandDecoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn decode(&self, z: &[f64]) -> Result<Program, DecodeError> {
        if z.len() != self.dim {
            return Err(DecodeError::Dim {
                expected: self.dim,
                found: z.len(),
            });
        }
        let request = serde_json::to_string(z).map_err(|e| DecodeError::Protocol(e.to_string()))?;
        let mut pipe = self.pipe.lock().map_err(|_| DecodeError::Protocol("decoder poisoned".into()))?;
        writeln!(pipe.stdin, "{request}")?;
        pipe.stdin.flush()?;
        let mut line = String::new();
        if pipe.stdout.read_line(&mut line)? == 0 {
            return Err(DecodeError::Protocol("decoder closed its output".into()));
        }
        Ok(line.trim().parse()?)
    }
}

impl Drop for CommandDecoder {
    fn drop(&mut self) {
        if let Ok(p) = self.pipe.get_mut() {
            let _ = p.child.kill();
            let _ = p.child.wait();
        }
    }
}

/// Textual decoder selection: `identity:<max_len>` or
/// `cmd:<dim>:<program> [args...]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecoderSpec {
    Identity { max_len: usize },
    Command { dim: usize, program: String, args: Vec<String> },
}

impl FromStr for DecoderSpec {
    type Err = DecodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DecodeError::Spec(s.to_string());
        if let Some(n) = s.strip_prefix("identity:") {
            return Ok(DecoderSpec::Identity {
                max_len: n.parse().map_err(|_| bad())?,
            });
        }
        if let Some(rest) = s.strip_prefix("cmd:") {
            let (dim, cmd) = rest.split_once(':').ok_or_else(bad)?;
            let mut words = cmd.split_whitespace().map(str::to_string);
            let program = words.next().ok_or_else(bad)?;
            return Ok(DecoderSpec::Command {
                dim: dim.parse().map_err(|_| bad())?,
                program,
                args: words.collect(),
            });
        }
        Err(bad())
    }
}

impl DecoderSpec {
    pub fn build(&self) -> Result<Box<dyn Decoder>, DecodeError> {
        Ok(match self {
            DecoderSpec::Identity { max_len } => Box::new(PrimitiveDecoder::new(*max_len)),
            DecoderSpec::Command { dim, program, args } => Box::new(CommandDecoder::spawn(program, args, *dim)?),
        })
    }
}
