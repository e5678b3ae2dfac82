//! Minimal RIFF/WAVE reader: PCM, 16-bit, mono or stereo.

use super::{AudioClip, SoundError};

fn read_u16(bytes: &[u8], at: usize) -> Result<u16, SoundError> {
    bytes
        .get(at..at + 2)
        .map(|b| u16::from_le_bytes([b[0], b[1]]))
        .ok_or_else(|| SoundError::MalformedRiff("truncated chunk".into()))
}

fn read_u32(bytes: &[u8], at: usize) -> Result<u32, SoundError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| SoundError::MalformedRiff("truncated chunk".into()))
}

/// Parse a RIFF/WAVE byte stream into a mono [`AudioClip`].
///
/// 16-bit samples scale by 1/32768 into [-1, 1); stereo frames average
/// to mono. Chunks other than `fmt ` and `data` are skipped.
pub fn parse_wav(bytes: &[u8]) -> Result<AudioClip, SoundError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(SoundError::MalformedRiff("missing RIFF/WAVE header".into()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // tag, channels, rate, bits
    let mut data: Option<&[u8]> = None;
    let mut at = 12;
    while at + 8 <= bytes.len() {
        let id = &bytes[at..at + 4];
        let size = read_u32(bytes, at + 4)? as usize;
        let body_start = at + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&end| end <= bytes.len())
            .ok_or_else(|| SoundError::MalformedRiff("chunk overruns file".into()))?;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(SoundError::MalformedRiff("fmt chunk too small".into()));
                }
                let tag = read_u16(bytes, body_start)?;
                let channels = read_u16(bytes, body_start + 2)?;
                let rate = read_u32(bytes, body_start + 4)?;
                let bits = read_u16(bytes, body_start + 14)?;
                fmt = Some((tag, channels, rate, bits));
            }
            b"data" => data = Some(&bytes[body_start..body_end]),
            _ => {}
        }
        // Chunks are word aligned; odd sizes carry a pad byte.
        at = body_end + (size & 1);
    }

    let (tag, channels, rate, bits) =
        fmt.ok_or_else(|| SoundError::MalformedRiff("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| SoundError::MalformedRiff("no data chunk".into()))?;

    if tag != 1 {
        return Err(SoundError::UnsupportedFormat(format!(
            "format tag {tag}, only PCM (1) is supported"
        )));
    }
    if bits != 16 {
        return Err(SoundError::UnsupportedFormat(format!(
            "{bits}-bit samples, only 16-bit is supported"
        )));
    }
    if channels == 0 || channels > 2 {
        return Err(SoundError::UnsupportedFormat(format!(
            "{channels} channels, only mono or stereo is supported"
        )));
    }
    if rate == 0 {
        return Err(SoundError::MalformedRiff("zero sample rate".into()));
    }

    let frame_bytes = 2 * channels as usize;
    let frames = data.len() / frame_bytes;
    if frames == 0 {
        return Err(SoundError::MalformedRiff("empty data chunk".into()));
    }
    let mut samples = Vec::with_capacity(frames);
    for f in 0..frames {
        let mut acc = 0.0f64;
        for ch in 0..channels as usize {
            let at = f * frame_bytes + ch * 2;
            let raw = i16::from_le_bytes([data[at], data[at + 1]]);
            acc += raw as f64 / 32768.0;
        }
        samples.push(acc / channels as f64);
    }
    Ok(AudioClip {
        sample_rate: rate,
        samples,
    })
}

/// Encode a mono or stereo 16-bit PCM WAV. Mostly for tests and fixture
/// generation; the engine itself only reads audio.
pub fn write_wav(sample_rate: u32, channels: &[Vec<i16>]) -> Vec<u8> {
    assert!(!channels.is_empty() && channels.len() <= 2);
    let n_channels = channels.len() as u16;
    let frames = channels[0].len();
    let data_len = frames * 2 * n_channels as usize;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&n_channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    let byte_rate = sample_rate * 2 * n_channels as u32;
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&(2 * n_channels).to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for f in 0..frames {
        for ch in channels {
            out.extend_from_slice(&ch[f].to_le_bytes());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_mono_file() {
        let bytes = write_wav(44100, &[vec![0, 0, 0, 0]]);
        let clip = parse_wav(&bytes).unwrap();
        assert_eq!(clip.sample_rate, 44100);
        assert_eq!(clip.samples, vec![0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn full_scale_negative_is_exactly_minus_one() {
        let bytes = write_wav(8000, &[vec![-32768, 32767]]);
        let clip = parse_wav(&bytes).unwrap();
        assert_eq!(clip.samples[0], -1.0);
        assert!((clip.samples[1] - 32767.0 / 32768.0).abs() < 1e-15);
    }

    #[test]
    fn stereo_averages_to_mono() {
        // +0.5 and -0.5 (scaled) cancel per frame.
        let left = vec![16384i16, 16384];
        let right = vec![-16384i16, -16384];
        let bytes = write_wav(22050, &[left, right]);
        let clip = parse_wav(&bytes).unwrap();
        assert_eq!(clip.samples, vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_wrong_formats() {
        let mut bytes = write_wav(8000, &[vec![0, 0]]);
        bytes[20] = 3; // float format tag
        assert!(matches!(
            parse_wav(&bytes),
            Err(SoundError::UnsupportedFormat(_))
        ));
        let mut bytes = write_wav(8000, &[vec![0, 0]]);
        bytes[34] = 8; // 8-bit
        assert!(matches!(
            parse_wav(&bytes),
            Err(SoundError::UnsupportedFormat(_))
        ));
        assert!(matches!(
            parse_wav(b"not a riff file"),
            Err(SoundError::MalformedRiff(_))
        ));
    }

    #[test]
    fn skips_foreign_chunks() {
        let mut bytes = write_wav(8000, &[vec![100, -100]]);
        // Splice a LIST chunk between fmt and data.
        let mut spliced = bytes[..36].to_vec();
        spliced.extend_from_slice(b"LIST");
        spliced.extend_from_slice(&4u32.to_le_bytes());
        spliced.extend_from_slice(b"INFO");
        spliced.extend_from_slice(&bytes[36..]);
        let riff_len = (spliced.len() - 8) as u32;
        spliced[4..8].copy_from_slice(&riff_len.to_le_bytes());
        bytes = spliced;
        let clip = parse_wav(&bytes).unwrap();
        assert_eq!(clip.samples.len(), 2);
    }
}
