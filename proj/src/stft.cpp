// Copyright 2026 The chanfuse Authors
//
// Licensed under the Apache License, Version 2.0

#include "chanfuse/stft.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace chanfuse {

Vec hann_window(int win_len) {
  Vec w(win_len);
  for (int n = 0; n < win_len; ++n)
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / win_len);
  return w;
}

ComplexSpectrogram stft(const MultiChannelWave& wave, const StftParams& params) {
  const int win = params.win_len(wave.sample_rate);
  const int hop = params.hop_len(wave.sample_rate);
  const int nfft = params.nfft;
  if (win > nfft) throw DataError("stft: window longer than nfft");
  if (wave.length() < win)
    throw DataError("stft: signal shorter than one window");

  const Eigen::Index frames = 1 + (wave.length() - win) / hop;
  const Eigen::Index bins = nfft / 2 + 1;
  const Vec window = hann_window(win);

  ComplexSpectrogram spec;
  spec.sample_rate = wave.sample_rate;
  spec.params = params;
  spec.ch.resize(size_t(wave.channels()));

  Eigen::FFT<double> fft;
  std::vector<double> buf(size_t(nfft));
  std::vector<Complex> out(size_t(nfft));
  for (Eigen::Index k = 0; k < wave.channels(); ++k) {
    CMat& S = spec.ch[size_t(k)];
    S.resize(frames, bins);
    for (Eigen::Index t = 0; t < frames; ++t) {
      for (int n = 0; n < win; ++n)
        buf[size_t(n)] = window[n] * wave.samples(k, t * hop + n);
      std::fill(buf.begin() + win, buf.end(), 0.0);
      fft.fwd(out, buf);
      for (Eigen::Index f = 0; f < bins; ++f) S(t, f) = out[size_t(f)];
    }
  }
  return spec;
}

MultiChannelWave istft(const ComplexSpectrogram& spec) {
  const int win = spec.params.win_len(spec.sample_rate);
  const int hop = spec.params.hop_len(spec.sample_rate);
  const int nfft = spec.params.nfft;
  if (win % hop != 0 || win / hop != 2)
    throw DataError("istft: non-COLA parameters (need 50% hop)");

  const Eigen::Index frames = spec.frames();
  const Eigen::Index n_out = win + (frames - 1) * hop;
  const Vec window = hann_window(win);

  MultiChannelWave wave;
  wave.sample_rate = spec.sample_rate;
  wave.samples = RMat::Zero(spec.channels(), n_out);

  // Accumulated synthesis-window energy; equals sum_t w^2(n - t*hop).
  Vec norm = Vec::Zero(n_out);
  for (Eigen::Index t = 0; t < frames; ++t)
    norm.segment(t * hop, win) += window.cwiseProduct(window);

  Eigen::FFT<double> fft;
  std::vector<Complex> full(size_t(nfft));
  std::vector<double> frame(size_t(nfft));
  for (Eigen::Index k = 0; k < spec.channels(); ++k) {
    const CMat& S = spec.ch[size_t(k)];
    for (Eigen::Index t = 0; t < frames; ++t) {
      for (Eigen::Index f = 0; f < spec.bins(); ++f) full[size_t(f)] = S(t, f);
      for (Eigen::Index f = spec.bins(); f < nfft; ++f)
        full[size_t(f)] = std::conj(S(t, nfft - f));
      fft.inv(frame, full);
      for (int n = 0; n < win; ++n)
        wave.samples(k, t * hop + n) += window[n] * frame[size_t(n)];
    }
  }
  for (Eigen::Index n = 0; n < n_out; ++n) {
    const double d = norm[n];
    if (d > 1e-12) wave.samples.col(n) /= d;
  }
  return wave;
}

CosIPDFeatures cos_ipd(const ComplexSpectrogram& spec, int ref_channel) {
  if (spec.channels() < 1 || ref_channel >= spec.channels())
    throw DataError("cos_ipd: reference channel out of range");
  constexpr double kSilence = 1e-12;

  CosIPDFeatures out;
  out.ref_channel = ref_channel;
  out.ch.resize(size_t(spec.channels()));
  const CMat& ref = spec.ch[size_t(ref_channel)];
  for (Eigen::Index k = 0; k < spec.channels(); ++k) {
    const CMat& S = spec.ch[size_t(k)];
    RMat& C = out.ch[size_t(k)];
    C.resize(spec.frames(), spec.bins());
    for (Eigen::Index t = 0; t < spec.frames(); ++t) {
      for (Eigen::Index f = 0; f < spec.bins(); ++f) {
        const Complex a = S(t, f), b = ref(t, f);
        const double ma = std::abs(a), mb = std::abs(b);
        // cos(arg a - arg b) = Re(a * conj(b)) / (|a| |b|)
        C(t, f) = (ma < kSilence || mb < kSilence)
                      ? 1.0
                      : std::clamp((a.real() * b.real() + a.imag() * b.imag()) /
                                       (ma * mb),
                                   -1.0, 1.0);
      }
    }
  }
  return out;
}

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

}  // namespace

Mat mel_filterbank(int mel_bands, int nfft, int sample_rate) {
  const int bins = nfft / 2 + 1;
  const double mel_max = hz_to_mel(sample_rate / 2.0);
  Vec edges(mel_bands + 2);
  for (int m = 0; m < mel_bands + 2; ++m)
    edges[m] = mel_to_hz(mel_max * m / (mel_bands + 1));

  Mat fb = Mat::Zero(mel_bands, bins);
  for (int m = 0; m < mel_bands; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int f = 0; f < bins; ++f) {
      const double hz = double(f) * sample_rate / nfft;
      if (hz > lo && hz < mid)
        fb(m, f) = (hz - lo) / (mid - lo);
      else if (hz >= mid && hz < hi)
        fb(m, f) = (hi - hz) / (hi - mid);
    }
  }
  return fb;
}

LogMelFeatures log_mel(const ComplexSpectrogram& spec, int mel_bands) {
  constexpr double kFloor = 1e-10;
  const Mat fb = mel_filterbank(mel_bands, spec.params.nfft, spec.sample_rate);

  LogMelFeatures out;
  out.ch.resize(size_t(spec.channels()));
  for (Eigen::Index k = 0; k < spec.channels(); ++k) {
    const Mat power = spec.ch[size_t(k)].cwiseAbs2();  // T x F
    out.ch[size_t(k)] =
        (power * fb.transpose()).array().max(kFloor).log().matrix();
  }
  return out;
}

}  // namespace chanfuse
