use std::fs;
use std::path::Path;

use super::{AudioBuffer, AudioError};

const PCM_FORMAT: u16 = 1;
const EXTENSIBLE_FORMAT: u16 = 0xFFFE;

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Decodes a RIFF/WAVE PCM 16-bit mono byte stream.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioBuffer, AudioError> {
    let malformed = |reason: &str| AudioError::MalformedWav(reason.to_string());
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(malformed("missing RIFF/WAVE header"));
    }
    let mut pos = 12;
    let mut format: Option<(u16, u16, u32, u16)> = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        let Some(end) = body.checked_add(size).filter(|&e| e <= bytes.len()) else {
            return Err(malformed(&format!(
                "chunk {:?} claims {size} bytes but only {} remain",
                String::from_utf8_lossy(id),
                bytes.len() - body
            )));
        };
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(malformed("fmt chunk shorter than 16 bytes"));
                }
                let tag = u16_at(bytes, body);
                let channels = u16_at(bytes, body + 2);
                let rate = u32_at(bytes, body + 4);
                let bits = u16_at(bytes, body + 14);
                format = Some((tag, channels, rate, bits));
            }
            b"data" => {
                let (tag, channels, rate, bits) =
                    format.ok_or_else(|| malformed("data chunk before fmt chunk"))?;
                if tag != PCM_FORMAT && tag != EXTENSIBLE_FORMAT {
                    return Err(AudioError::UnsupportedWav(format!("format tag {tag} is not PCM")));
                }
                if channels != 1 {
                    return Err(AudioError::UnsupportedWav(format!("{channels} channels, need mono")));
                }
                if bits != 16 {
                    return Err(AudioError::UnsupportedWav(format!("{bits}-bit samples, need 16-bit")));
                }
                if rate == 0 {
                    return Err(malformed("sample rate is zero"));
                }
                if size % 2 != 0 {
                    return Err(malformed("odd data chunk length"));
                }
                let samples = bytes[body..end]
                    .chunks_exact(2)
                    .map(|c| i16::from_le_bytes([c[0], c[1]]))
                    .collect();
                return AudioBuffer::new(samples, rate);
            }
            _ => {}
        }
        // Chunks are word-aligned.
        pos = end + (size & 1);
    }
    Err(malformed("no data chunk"))
}

/// Encodes a buffer as a canonical 44-byte-header PCM WAV.
pub fn encode_wav(buffer: &AudioBuffer) -> Vec<u8> {
    let data_len = (buffer.samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&PCM_FORMAT.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&buffer.sample_rate.to_le_bytes());
    out.extend_from_slice(&(buffer.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in &buffer.samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

pub fn read_wav(path: &Path) -> Result<AudioBuffer, AudioError> {
    let bytes = fs::read(path).map_err(|source| AudioError::Io { path: path.display().to_string(), source })?;
    decode_wav(&bytes)
}

pub fn write_wav(path: &Path, buffer: &AudioBuffer) -> Result<(), AudioError> {
    fs::write(path, encode_wav(buffer))
        .map_err(|source| AudioError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn header(channels: u16, rate: u32, bits: u16, data_len: u32) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data_len).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&rate.to_le_bytes());
        out.extend_from_slice(&(rate * u32::from(channels) * u32::from(bits / 8)).to_le_bytes());
        out.extend_from_slice(&(channels * bits / 8).to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&data_len.to_le_bytes());
        out
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<i16> = (0..8000).map(|_| rng.random()).collect();
        let buf = AudioBuffer::new(samples, 8000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        write_wav(&path, &buf).unwrap();
        assert_eq!(read_wav(&path).unwrap(), buf);
    }

    #[test]
    fn stereo_44k_is_unsupported() {
        let mut bytes = header(2, 44100, 16, 8);
        bytes.extend_from_slice(&[0; 8]);
        assert!(matches!(decode_wav(&bytes), Err(AudioError::UnsupportedWav(_))));
    }

    #[test]
    fn eight_bit_is_unsupported() {
        let mut bytes = header(1, 8000, 8, 4);
        bytes.extend_from_slice(&[0; 4]);
        assert!(matches!(decode_wav(&bytes), Err(AudioError::UnsupportedWav(_))));
    }

    #[test]
    fn oversized_data_claim_is_malformed() {
        let mut bytes = header(1, 8000, 16, 1_000_000_000);
        bytes.resize(1024, 0);
        assert!(matches!(decode_wav(&bytes), Err(AudioError::MalformedWav(_))));
    }

    #[test]
    fn truncated_header_is_malformed() {
        let bytes = header(1, 8000, 16, 0);
        assert!(matches!(decode_wav(&bytes[..20]), Err(AudioError::MalformedWav(_))));
        assert!(matches!(decode_wav(b"RIFF"), Err(AudioError::MalformedWav(_))));
    }

    #[test]
    fn unknown_chunks_are_skipped() {
        let buf = AudioBuffer::new(vec![1, -2, 3], 8000).unwrap();
        let plain = encode_wav(&buf);
        let mut with_list = plain[..36].to_vec();
        with_list.extend_from_slice(b"LIST");
        with_list.extend_from_slice(&3u32.to_le_bytes());
        with_list.extend_from_slice(&[1, 2, 3, 0]);
        with_list.extend_from_slice(&plain[36..]);
        assert_eq!(decode_wav(&with_list).unwrap(), buf);
    }
}
