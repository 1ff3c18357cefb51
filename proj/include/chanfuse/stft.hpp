// Copyright 2026 The chanfuse Authors
//
// Licensed under the Apache License, Version 2.0

#ifndef CHANFUSE_STFT_HPP
#define CHANFUSE_STFT_HPP

#include <vector>

#include "chanfuse/types.hpp"
#include "chanfuse/wave.hpp"

namespace chanfuse {

struct StftParams {
  double window_ms = 32.0;
  double hop_ms = 16.0;
  int nfft = 512;

  int win_len(int sample_rate) const {
    return int(window_ms * sample_rate / 1000.0 + 0.5);
  }
  int hop_len(int sample_rate) const {
    return int(hop_ms * sample_rate / 1000.0 + 0.5);
  }
};

/// STFT tensor: per-channel T x F complex matrices, F = nfft/2 + 1.
/// Frames lie fully inside the signal (no center padding), so
/// T = 1 + floor((N - win_len) / hop_len).
struct ComplexSpectrogram {
  int sample_rate = 0;
  StftParams params;
  std::vector<CMat> ch;  // K entries, each T x F

  Eigen::Index channels() const { return Eigen::Index(ch.size()); }
  Eigen::Index frames() const { return ch.empty() ? 0 : ch[0].rows(); }
  Eigen::Index bins() const { return ch.empty() ? 0 : ch[0].cols(); }
};

/// cos of the inter-channel phase difference against a reference channel.
/// Values lie in [-1, 1]; the reference row is all ones; bins where either
/// magnitude falls below 1e-12 yield 1.0 (the phase of silence is undefined).
struct CosIPDFeatures {
  int ref_channel = 0;
  std::vector<RMat> ch;  // K entries, each T x F

  Eigen::Index channels() const { return Eigen::Index(ch.size()); }
  Eigen::Index frames() const { return ch.empty() ? 0 : ch[0].rows(); }
  Eigen::Index bins() const { return ch.empty() ? 0 : ch[0].cols(); }
};

/// Log mel-filterbank energies, the stand-in frontend feature.
struct LogMelFeatures {
  std::vector<RMat> ch;  // K entries, each T x M

  Eigen::Index channels() const { return Eigen::Index(ch.size()); }
  Eigen::Index frames() const { return ch.empty() ? 0 : ch[0].rows(); }
  Eigen::Index bands() const { return ch.empty() ? 0 : ch[0].cols(); }
};

/// Periodic Hann analysis window of the given length.
Vec hann_window(int win_len);

/// STFT with Hann window and no center padding. The signal must hold at
/// least one full window and win_len must not exceed nfft.
ComplexSpectrogram stft(const MultiChannelWave& wave,
                        const StftParams& params = {});

/// Overlap-add synthesis with window-square normalization. Interior samples
/// (outside the first/last window) reconstruct the analyzed signal.
/// Requires constant-overlap-add parameters (Hann at 50% hop qualifies).
MultiChannelWave istft(const ComplexSpectrogram& spec);

CosIPDFeatures cos_ipd(const ComplexSpectrogram& spec, int ref_channel = 0);

/// Triangular mel filterbank (HTK scale, 0 .. sr/2) on the power spectrum,
/// then log(max(e, 1e-10)).
LogMelFeatures log_mel(const ComplexSpectrogram& spec, int mel_bands = 80);

/// M x F filterbank matrix used by log_mel and the envelope-variance ranker.
Mat mel_filterbank(int mel_bands, int nfft, int sample_rate);

}  // namespace chanfuse

#endif  // CHANFUSE_STFT_HPP
