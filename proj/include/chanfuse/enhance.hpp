// Copyright 2026 The chanfuse Authors
//
// Licensed under the Apache License, Version 2.0

#ifndef CHANFUSE_ENHANCE_HPP
#define CHANFUSE_ENHANCE_HPP

#include <optional>
#include <string>
#include <vector>

#include "chanfuse/stft.hpp"
#include "chanfuse/types.hpp"
#include "chanfuse/wave.hpp"

namespace chanfuse {

struct WpeConfig {
  int taps = 10;
  int delay = 3;
  int iterations = 3;
};

/// Per-frequency multichannel linear-prediction dereverberation.
///
/// Each iteration estimates the time-varying power from the current estimate
/// (mean over channels of |.|^2, floored at 1e-10), solves the regularized
/// normal equations for prediction filters over frames
/// t-delay-taps+1 .. t-delay, and subtracts the prediction. Output shape
/// equals input shape. Frequencies whose normal equations stay singular after
/// regularization pass the input through; their count is reported via
/// `singular_bins` when given.
ComplexSpectrogram wpe_dereverb(const ComplexSpectrogram& spec,
                                const WpeConfig& cfg = {},
                                int* singular_bins = nullptr);

/// Integer TDOA per channel against `ref` via GCC-PHAT. Cross-power spectra
/// are phase-normalized per STFT frame and averaged over frames, which keeps
/// the estimate stable for narrowband content. Ties (e.g. silence) resolve
/// to the smallest |lag|, so all-zero input yields delay 0.
std::vector<int> gcc_phat_tdoa(const MultiChannelWave& wave, int ref = 0,
                               double max_delay_ms = 10.0);

/// Channels aligned by gcc_phat_tdoa, then averaged with equal weights.
/// Output length equals input length; shifted-in edges are zero-filled.
MultiChannelWave delay_and_sum(const MultiChannelWave& wave);

/// Envelope-variance channel scores, normalized so max = 1, plus the
/// descending order (ties broken by lower channel index).
struct EVRanking {
  Vec scores;               // K, in [0, 1], max = 1
  std::vector<int> order;   // permutation of 0..K-1, descending score
};

/// Per channel: cube-root compressed mel-band envelopes, each normalized by
/// its own temporal mean; the score is the summed per-band variance. Less
/// reverberant channels keep more envelope modulation and score higher.
/// All-silent input degenerates to uniform scores of 1.
EVRanking envelope_variance_rank(const MultiChannelWave& wave,
                                 int mel_bands = 20,
                                 const StftParams& params = {});

/// One device of a session: member microphones, plus the per-device pipeline
/// products (WPE output and the beamformed mono channel).
struct ArrayGroup {
  std::string device_id;
  MultiChannelWave members;     // M x N
  MultiChannelWave beamformed;  // 1 x N'
};

/// K-channel composite, one beamformed channel per device, in device order.
struct CompositeWave {
  MultiChannelWave wave;                  // K x N
  std::vector<std::string> provenance;    // channel index -> device_id
};

/// Fig-style per-device pipeline: WPE on each device's multichannel STFT,
/// synthesis, delay-and-sum to one channel, channels stacked in device
/// order. Single-microphone devices apply WPE only.
CompositeWave build_composite(const SessionManifest& session,
                              const WpeConfig& wpe = {},
                              const StftParams& stft_params = {},
                              int jobs = 1);

/// The enhanced reference signal: the override file when given (externally
/// produced), otherwise delay-and-sum over the composite channels.
MultiChannelWave reference_signal(const CompositeWave& composite,
                                  const std::optional<std::string>& override_path);

}  // namespace chanfuse

#endif  // CHANFUSE_ENHANCE_HPP
