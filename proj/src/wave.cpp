// Copyright 2026 The chanfuse Authors
//
// Licensed under the Apache License, Version 2.0

#include "chanfuse/wave.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace chanfuse {

namespace {

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
         uint32_t(b[3]) << 24;
}

uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return uint16_t(b[0]) | uint16_t(b[1]) << 8;
}

void write_u32(std::ostream& out, uint32_t v) {
  char b[4] = {char(v & 0xff), char(v >> 8 & 0xff), char(v >> 16 & 0xff),
               char(v >> 24 & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  char b[2] = {char(v & 0xff), char(v >> 8 & 0xff)};
  out.write(b, 2);
}

constexpr double kPcmScale = 32767.0;

}  // namespace

MultiChannelWave read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open wav file: " + path);

  char tag[5] = {0};
  in.read(tag, 4);
  uint32_t riff_size = read_u32(in);
  (void)riff_size;
  char wave_tag[5] = {0};
  in.read(wave_tag, 4);
  if (std::strncmp(tag, "RIFF", 4) != 0 || std::strncmp(wave_tag, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path);

  uint16_t format = 0, num_channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  bool have_fmt = false;
  std::vector<int16_t> pcm;

  while (in) {
    char chunk[5] = {0};
    in.read(chunk, 4);
    if (!in) break;
    uint32_t size = read_u32(in);
    if (std::strncmp(chunk, "fmt ", 4) == 0) {
      format = read_u16(in);
      num_channels = read_u16(in);
      sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (size > 16) in.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::strncmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw DataError("wav data chunk before fmt: " + path);
      if (format != 1 || bits != 16)
        throw DataError("unsupported wav encoding (PCM16 required): " + path);
      pcm.resize(size / 2);
      in.read(reinterpret_cast<char*>(pcm.data()),
              std::streamsize(pcm.size() * 2));
      break;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);  // chunks are word-aligned
    }
  }
  if (!have_fmt || num_channels == 0)
    throw DataError("malformed wav file: " + path);

  const Eigen::Index frames = Eigen::Index(pcm.size() / num_channels);
  MultiChannelWave wave;
  wave.sample_rate = int(sample_rate);
  wave.samples.resize(num_channels, frames);
  for (Eigen::Index n = 0; n < frames; ++n)
    for (int c = 0; c < num_channels; ++c)
      wave.samples(c, n) = double(pcm[size_t(n) * num_channels + c]) / kPcmScale;
  return wave;
}

MultiChannelWave load_wave_set(const std::vector<std::string>& paths) {
  if (paths.empty()) throw DataError("load_wave_set: empty path list");
  std::vector<MultiChannelWave> waves;
  waves.reserve(paths.size());
  Eigen::Index min_len = std::numeric_limits<Eigen::Index>::max();
  Eigen::Index total_ch = 0;
  for (const auto& p : paths) {
    waves.push_back(read_wav(p));
    if (waves.front().sample_rate != waves.back().sample_rate)
      throw DataError("sample rate mismatch across files: " + p);
    min_len = std::min(min_len, waves.back().length());
    total_ch += waves.back().channels();
  }
  // Recordings from one device drift by a few samples; truncate, don't fail.
  MultiChannelWave out;
  out.sample_rate = waves.front().sample_rate;
  out.samples.resize(total_ch, min_len);
  Eigen::Index row = 0;
  for (const auto& w : waves)
    for (Eigen::Index c = 0; c < w.channels(); ++c)
      out.samples.row(row++) = w.samples.row(c).head(min_len);
  return out;
}

void write_wave(const MultiChannelWave& wave, const std::string& path) {
  if (!wave.samples.allFinite())
    throw DataError("write_wave: non-finite amplitude");
  if ((wave.samples.array().abs() > 1.0).any())
    throw DataError("write_wave: amplitude out of range [-1, 1]");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write wav file: " + path);

  const uint16_t channels = uint16_t(wave.channels());
  const uint32_t frames = uint32_t(wave.length());
  const uint32_t data_bytes = frames * channels * 2;

  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, channels);
  write_u32(out, uint32_t(wave.sample_rate));
  write_u32(out, uint32_t(wave.sample_rate) * channels * 2);
  write_u16(out, channels * 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_bytes);

  for (uint32_t n = 0; n < frames; ++n) {
    for (uint16_t c = 0; c < channels; ++c) {
      double v = std::round(wave.samples(c, n) * kPcmScale);
      v = std::clamp(v, -32768.0, 32767.0);
      int16_t q = int16_t(v);
      char b[2] = {char(uint16_t(q) & 0xff), char(uint16_t(q) >> 8 & 0xff)};
      out.write(b, 2);
    }
  }
  if (!out) throw DataError("short write to wav file: " + path);
}

Eigen::Index boundary_sample(double seconds, int sample_rate) {
  return Eigen::Index(std::floor(seconds * sample_rate + 0.5));
}

MultiChannelWave cut_segment(const MultiChannelWave& wave,
                             const UtteranceSegment& seg) {
  if (!(seg.start_s >= 0.0 && seg.start_s < seg.end_s))
    throw DataError("cut_segment: invalid segment bounds");
  const Eigen::Index begin = boundary_sample(seg.start_s, wave.sample_rate);
  const Eigen::Index end = boundary_sample(seg.end_s, wave.sample_rate);
  if (end > wave.length())
    throw DataError("cut_segment: segment exceeds audio length");
  MultiChannelWave out;
  out.sample_rate = wave.sample_rate;
  out.samples = wave.samples.middleCols(begin, end - begin);
  return out;
}

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

[[noreturn]] void manifest_error(int line_no, const std::string& what) {
  throw DataError("manifest line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

SessionManifest parse_manifest_line(const std::string& line, int line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    manifest_error(line_no, std::string("invalid JSON: ") + e.what());
  }
  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key))
      manifest_error(line_no, std::string("missing field '") + key + "'");
    return j.at(key);
  };

  SessionManifest m;
  m.session_id = require("session_id").get<std::string>();
  m.scenario = require("scenario").get<std::string>();
  if (m.scenario != "chime6" && m.scenario != "dipco" &&
      m.scenario != "mixer6" && m.scenario != "synthetic")
    manifest_error(line_no, "unknown scenario '" + m.scenario + "'");

  for (const auto& d : require("devices")) {
    DeviceEntry dev;
    if (!d.contains("device_id") || !d.contains("files"))
      manifest_error(line_no, "device entry missing 'device_id' or 'files'");
    dev.device_id = d.at("device_id").get<std::string>();
    dev.files = d.at("files").get<std::vector<std::string>>();
    if (dev.files.empty()) manifest_error(line_no, "device with no files");
    m.devices.push_back(std::move(dev));
  }
  if (m.devices.empty()) manifest_error(line_no, "empty device list");

  if (j.contains("segments")) {
    for (const auto& s : j.at("segments")) {
      UtteranceSegment seg;
      seg.session_id = m.session_id;
      if (!s.contains("speaker_id") || !s.contains("start_s") ||
          !s.contains("end_s"))
        manifest_error(line_no, "segment missing speaker_id/start_s/end_s");
      seg.speaker_id = s.at("speaker_id").get<std::string>();
      seg.start_s = s.at("start_s").get<double>();
      seg.end_s = s.at("end_s").get<double>();
      if (!(seg.start_s >= 0.0 && seg.start_s < seg.end_s))
        manifest_error(line_no, "segment with start_s >= end_s");
      if (s.contains("transcript") && !s.at("transcript").is_null()) {
        seg.transcript = split_words(s.at("transcript").get<std::string>());
        seg.has_transcript = true;
      }
      m.segments.push_back(std::move(seg));
    }
  }
  return m;
}

std::vector<SessionManifest> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  std::vector<SessionManifest> sessions;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    sessions.push_back(parse_manifest_line(line, line_no));
  }
  if (sessions.empty()) throw DataError("empty manifest: " + path);
  return sessions;
}

}  // namespace chanfuse
