// Copyright 2026 The chanfuse Authors
//
// Licensed under the Apache License, Version 2.0

#ifndef CHANFUSE_WAVE_HPP
#define CHANFUSE_WAVE_HPP

#include <optional>
#include <string>
#include <vector>

#include "chanfuse/types.hpp"

namespace chanfuse {

/// Time-domain multi-channel audio. `samples` is K x N, one row per channel,
/// amplitudes in [-1, 1]. All channels share the same length and sample rate.
struct MultiChannelWave {
  int sample_rate = 0;
  RMat samples;  // K x N

  Eigen::Index channels() const { return samples.rows(); }
  Eigen::Index length() const { return samples.cols(); }
};

struct UtteranceSegment {
  std::string session_id;
  std::string speaker_id;
  double start_s = 0.0;
  double end_s = 0.0;
  std::vector<std::string> transcript;  // empty when not provided
  bool has_transcript = false;
};

struct DeviceEntry {
  std::string device_id;
  std::vector<std::string> files;  // one file per microphone
};

struct SessionManifest {
  std::string session_id;
  std::string scenario;  // chime6 | dipco | mixer6 | synthetic
  std::vector<DeviceEntry> devices;
  std::vector<UtteranceSegment> segments;
};

// ---- WAV I/O (RIFF, 16-bit PCM little-endian) ----

/// Reads a PCM16 WAV file. Multi-channel files yield one row per channel.
MultiChannelWave read_wav(const std::string& path);

/// Stacks one file per channel, in path order. All files must exist and share
/// one sample rate; lengths are truncated to the shortest file.
MultiChannelWave load_wave_set(const std::vector<std::string>& paths);

/// Writes PCM16. Round-trips through load_wave_set within one quantization
/// step per sample. Amplitudes outside [-1, 1] are a DataError.
void write_wave(const MultiChannelWave& wave, const std::string& path);

/// Returns samples [round(start_s*sr), round(end_s*sr)); ties round half up.
MultiChannelWave cut_segment(const MultiChannelWave& wave,
                             const UtteranceSegment& seg);

/// Sample index for a segment boundary (round half up).
Eigen::Index boundary_sample(double seconds, int sample_rate);

// ---- Manifest (one JSON object per line, UTF-8) ----

/// Parses a JSON-lines manifest. Unknown keys are ignored; a record missing a
/// required field raises DataError with the offending line number.
std::vector<SessionManifest> read_manifest(const std::string& path);

SessionManifest parse_manifest_line(const std::string& line, int line_no);

}  // namespace chanfuse

#endif  // CHANFUSE_WAVE_HPP
