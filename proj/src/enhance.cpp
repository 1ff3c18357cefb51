// Copyright 2026 The chanfuse Authors
//
// Licensed under the Apache License, Version 2.0

#include "chanfuse/enhance.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <unsupported/Eigen/FFT>

namespace chanfuse {

ComplexSpectrogram wpe_dereverb(const ComplexSpectrogram& spec,
                                const WpeConfig& cfg, int* singular_bins) {
  const Eigen::Index K = spec.channels();
  const Eigen::Index T = spec.frames();
  const Eigen::Index F = spec.bins();
  if (T <= cfg.delay + cfg.taps)
    throw DataError("wpe_dereverb: too few frames for taps/delay");

  const Eigen::Index dim = K * cfg.taps;
  const Eigen::Index t0 = cfg.delay + cfg.taps - 1;  // first predictable frame
  constexpr double kPowerFloor = 1e-10;
  constexpr double kRegularizer = 1e-8;

  ComplexSpectrogram out = spec;
  int singular = 0;

  CMat Y(K, T);        // observed, per frequency
  CMat Z(K, T);        // dereverbed estimate
  CMat taps_mat(dim, T);  // stacked tap vectors per frame
  for (Eigen::Index f = 0; f < F; ++f) {
    for (Eigen::Index k = 0; k < K; ++k)
      Y.row(k) = spec.ch[size_t(k)].col(f).transpose();

    // Tap vector for frame t holds y(t-delay) .. y(t-delay-taps+1).
    for (Eigen::Index t = t0; t < T; ++t)
      for (int tap = 0; tap < cfg.taps; ++tap)
        taps_mat.col(t).segment(tap * K, K) = Y.col(t - cfg.delay - tap);

    Z = Y;
    bool ok = true;
    for (int it = 0; it < cfg.iterations && ok; ++it) {
      CMat R = CMat::Zero(dim, dim);
      CMat r = CMat::Zero(dim, K);
      for (Eigen::Index t = t0; t < T; ++t) {
        const double power = std::max(Z.col(t).squaredNorm() / double(K),
                                      kPowerFloor);
        R.noalias() += taps_mat.col(t) * taps_mat.col(t).adjoint() / power;
        r.noalias() += taps_mat.col(t) * Y.col(t).adjoint() / power;
      }
      const double scale = R.trace().real() / double(dim);
      if (!(scale > 0.0) || !R.allFinite()) {
        ok = false;
        break;
      }
      R.diagonal().array() += kRegularizer * scale;
      const CMat G = R.ldlt().solve(r);  // dim x K prediction filters
      if (!G.allFinite()) {
        ok = false;
        break;
      }
      Z = Y;
      for (Eigen::Index t = t0; t < T; ++t)
        Z.col(t).noalias() -= G.adjoint() * taps_mat.col(t);
    }
    if (!ok) {
      ++singular;
      Z = Y;  // report and pass the input through
    }
    for (Eigen::Index k = 0; k < K; ++k)
      out.ch[size_t(k)].col(f) = Z.row(k).transpose();
  }
  if (singular_bins) *singular_bins = singular;
  return out;
}

std::vector<int> gcc_phat_tdoa(const MultiChannelWave& wave, int ref,
                               double max_delay_ms) {
  const Eigen::Index K = wave.channels();
  if (K < 1 || ref >= K) throw DataError("gcc_phat_tdoa: bad reference");
  std::vector<int> delays(size_t(K), 0);
  if (K == 1) return delays;

  StftParams params;
  const int win = params.win_len(wave.sample_rate);
  const int nfft = params.nfft;
  MultiChannelWave padded;
  const MultiChannelWave* input = &wave;
  if (wave.length() < win) {
    padded.sample_rate = wave.sample_rate;
    padded.samples = RMat::Zero(K, win);
    padded.samples.leftCols(wave.length()) = wave.samples;
    input = &padded;
  }
  const ComplexSpectrogram spec = stft(*input, params);
  const Eigen::Index T = spec.frames();
  const Eigen::Index F = spec.bins();

  int max_lag = int(max_delay_ms * wave.sample_rate / 1000.0 + 0.5);
  max_lag = std::min(max_lag, nfft / 2 - 1);

  Eigen::FFT<double> fft;
  std::vector<Complex> full(size_t(nfft));
  std::vector<double> corr(size_t(nfft));
  for (Eigen::Index k = 0; k < K; ++k) {
    if (k == ref) continue;
    // Per-frame phase transform, averaged over frames. Averaging the
    // normalized cross-spectra suppresses bins whose phase is not stable
    // across time, which a single full-length transform cannot do.
    CVec avg = CVec::Zero(F);
    for (Eigen::Index t = 0; t < T; ++t) {
      for (Eigen::Index f = 0; f < F; ++f) {
        const Complex cps =
            spec.ch[size_t(k)](t, f) * std::conj(spec.ch[size_t(ref)](t, f));
        const double mag = std::abs(cps);
        if (mag > 1e-12) avg[f] += cps / mag;
      }
    }
    for (Eigen::Index f = 0; f < F; ++f) full[size_t(f)] = avg[f] / double(T);
    for (Eigen::Index f = F; f < nfft; ++f)
      full[size_t(f)] = std::conj(full[size_t(nfft - f)]);
    fft.inv(corr, full);

    // Visit lags by increasing |lag| with a strictly-greater test: ties
    // (all-zero correlation included) resolve to the smallest shift.
    int best_lag = 0;
    double best = corr[0];
    for (int a = 1; a <= max_lag; ++a) {
      for (int lag : {a, -a}) {
        const double v = corr[size_t((lag + nfft) % nfft)];
        if (v > best) {
          best = v;
          best_lag = lag;
        }
      }
    }
    delays[size_t(k)] = best_lag;
  }
  return delays;
}

MultiChannelWave delay_and_sum(const MultiChannelWave& wave) {
  const Eigen::Index K = wave.channels();
  const Eigen::Index N = wave.length();
  const std::vector<int> delays = gcc_phat_tdoa(wave);

  MultiChannelWave out;
  out.sample_rate = wave.sample_rate;
  out.samples = RMat::Zero(1, N);
  for (Eigen::Index k = 0; k < K; ++k) {
    const int d = delays[size_t(k)];
    // aligned_k[n] = x_k[n + d]; shifted-in region stays zero
    const Eigen::Index src_begin = std::max<Eigen::Index>(0, d);
    const Eigen::Index dst_begin = std::max<Eigen::Index>(0, -d);
    const Eigen::Index count = N - std::abs(d);
    if (count > 0)
      out.samples.row(0).segment(dst_begin, count) +=
          wave.samples.row(k).segment(src_begin, count);
  }
  out.samples /= double(K);
  return out;
}

EVRanking envelope_variance_rank(const MultiChannelWave& wave, int mel_bands,
                                 const StftParams& params) {
  const ComplexSpectrogram spec = stft(wave, params);
  const Mat fb = mel_filterbank(mel_bands, params.nfft, wave.sample_rate);
  const Eigen::Index K = wave.channels();

  EVRanking rank;
  rank.scores.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const Mat band_power = spec.ch[size_t(k)].cwiseAbs2() * fb.transpose();
    // Cube-root compression; mean normalization per band makes the score
    // invariant to per-channel gain.
    const Mat env = band_power.array().pow(1.0 / 3.0);
    double score = 0.0;
    for (int b = 0; b < mel_bands; ++b) {
      const double mean = env.col(b).mean();
      if (mean <= 0.0) continue;
      const Arr norm = env.col(b).array() / mean;
      score += (norm - norm.mean()).square().mean();
    }
    rank.scores[k] = score;
  }

  const double max_score = rank.scores.maxCoeff();
  if (max_score <= 0.0)
    rank.scores.setOnes();  // degenerate all-silent input
  else
    rank.scores /= max_score;

  rank.order.resize(size_t(K));
  for (Eigen::Index k = 0; k < K; ++k) rank.order[size_t(k)] = int(k);
  std::stable_sort(rank.order.begin(), rank.order.end(), [&](int a, int b) {
    return rank.scores[a] > rank.scores[b];
  });
  return rank;
}

CompositeWave build_composite(const SessionManifest& session,
                              const WpeConfig& wpe,
                              const StftParams& stft_params, int jobs) {
  const size_t n_dev = session.devices.size();
  if (n_dev == 0) throw DataError("build_composite: session has no devices");

  std::vector<MultiChannelWave> monos(n_dev);
  std::vector<std::exception_ptr> errors(n_dev);

  auto process_device = [&](size_t i) {
    const DeviceEntry& dev = session.devices[i];
    const MultiChannelWave members = load_wave_set(dev.files);
    const ComplexSpectrogram dereverbed =
        wpe_dereverb(stft(members, stft_params), wpe);
    MultiChannelWave synth = istft(dereverbed);
    monos[i] = synth.channels() > 1 ? delay_and_sum(synth) : std::move(synth);
  };

  jobs = std::max(1, jobs);
  if (jobs == 1 || n_dev == 1) {
    for (size_t i = 0; i < n_dev; ++i) process_device(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int j = 0; j < std::min<int>(jobs, int(n_dev)); ++j) {
      pool.emplace_back([&] {
        for (size_t i = next.fetch_add(1); i < n_dev; i = next.fetch_add(1)) {
          try {
            process_device(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  Eigen::Index min_len = monos[0].length();
  for (const auto& m : monos) min_len = std::min(min_len, m.length());

  CompositeWave composite;
  composite.wave.sample_rate = monos[0].sample_rate;
  composite.wave.samples.resize(Eigen::Index(n_dev), min_len);
  for (size_t i = 0; i < n_dev; ++i) {
    composite.wave.samples.row(Eigen::Index(i)) =
        monos[i].samples.row(0).head(min_len);
    composite.provenance.push_back(session.devices[i].device_id);
  }
  return composite;
}

MultiChannelWave reference_signal(
    const CompositeWave& composite,
    const std::optional<std::string>& override_path) {
  if (override_path) {
    MultiChannelWave ref = read_wav(*override_path);
    if (ref.channels() != 1)
      throw DataError("reference override must be a mono file: " +
                      *override_path);
    return ref;
  }
  if (composite.wave.channels() == 1) return composite.wave;
  return delay_and_sum(composite.wave);
}

}  // namespace chanfuse
