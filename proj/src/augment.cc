// src/augment.cc

// Copyright 2026  The svtk Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "svtk/augment.h"

#include <bit>
#include <cmath>
#include <complex>
#include <fstream>
#include <iterator>
#include <mutex>
#include <random>

#include <fftw3.h>

#include "svtk/error.h"

namespace svtk {

namespace {

void CheckSamples(const Waveform &w, const char *what) {
  if (!(w.sample_rate > 0.0) || !std::isfinite(w.sample_rate))
    throw Error(ErrorKind::kInvalidArgument,
                std::string(what) + ": sample rate must be positive");
  for (size_t i = 0; i < w.samples.size(); i++)
    if (!std::isfinite(w.samples[i]))
      throw Error(ErrorKind::kNonFiniteValue, what,
                  static_cast<int64_t>(i) + 1);
}

void CheckSameRate(const Waveform &a, const Waveform &b) {
  if (a.sample_rate != b.sample_rate)
    throw Error(ErrorKind::kSampleRateMismatch,
                std::to_string(a.sample_rate) + " Hz vs " +
                    std::to_string(b.sample_rate) + " Hz");
}

double MeanSquare(const std::vector<double> &x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return x.empty() ? 0.0 : sum / static_cast<double>(x.size());
}

std::vector<double> FitNoise(const std::vector<double> &noise, size_t n) {
  std::vector<double> out(n);
  for (size_t i = 0; i < n; i++) out[i] = noise[i % noise.size()];
  return out;
}

int UniformInt(std::mt19937_64 &gen, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(gen);
}

FeatureMatrix TimeWarp(const FeatureMatrix &in, int anchor, int target) {
  const Eigen::Index t_len = in.rows();
  FeatureMatrix out(t_len, in.cols());
  const double last = static_cast<double>(t_len - 1);
  for (Eigen::Index t = 0; t < t_len; t++) {
    double src;
    if (t < target)
      src = static_cast<double>(t) * anchor / target;
    else
      src = anchor + (t - target) * (last - anchor) / (last - target);
    Eigen::Index i0 = static_cast<Eigen::Index>(std::floor(src));
    i0 = std::clamp<Eigen::Index>(i0, 0, t_len - 1);
    const double frac = src - static_cast<double>(i0);
    if (frac <= 0.0 || i0 + 1 >= t_len)
      out.row(t) = in.row(i0);
    else
      out.row(t) = (1.0 - frac) * in.row(i0) + frac * in.row(i0 + 1);
  }
  return out;
}

struct Tap {
  size_t lag;
  double gain;
};

std::vector<Tap> NonZeroTaps(const std::vector<double> &h) {
  std::vector<Tap> taps;
  for (size_t k = 0; k < h.size(); k++)
    if (h[k] != 0.0) taps.push_back({k, h[k]});
  return taps;
}

// Truncated convolution over the non-zero taps only.
std::vector<double> DirectConvolve(const std::vector<double> &x,
                                   const std::vector<Tap> &taps) {
  std::vector<double> y(x.size(), 0.0);
  for (size_t t = 0; t < x.size(); t++) {
    double acc = 0.0;
    for (const Tap &tap : taps) {
      if (tap.lag > t) break;
      acc += tap.gain * x[t - tap.lag];
    }
    y[t] = acc;
  }
  return y;
}

std::mutex fftw_plan_mutex;

std::vector<double> FftConvolve(const std::vector<double> &x,
                                const std::vector<double> &h) {
  const size_t full = x.size() + h.size() - 1;
  size_t n = 1;
  while (n < full) n <<= 1;
  const size_t nc = n / 2 + 1;
  double *buf = fftw_alloc_real(n);
  fftw_complex *spec_x = fftw_alloc_complex(nc);
  fftw_complex *spec_h = fftw_alloc_complex(nc);
  fftw_plan fwd_x, fwd_h, inv;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fwd_x = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf, spec_x,
                                 FFTW_ESTIMATE);
    fwd_h = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf, spec_h,
                                 FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_x, buf,
                               FFTW_ESTIMATE);
  }
  std::fill(buf, buf + n, 0.0);
  std::copy(x.begin(), x.end(), buf);
  fftw_execute(fwd_x);
  std::fill(buf, buf + n, 0.0);
  std::copy(h.begin(), h.end(), buf);
  fftw_execute(fwd_h);
  for (size_t k = 0; k < nc; k++) {
    std::complex<double> a(spec_x[k][0], spec_x[k][1]);
    std::complex<double> b(spec_h[k][0], spec_h[k][1]);
    std::complex<double> c = a * b;
    spec_x[k][0] = c.real();
    spec_x[k][1] = c.imag();
  }
  fftw_execute(inv);
  std::vector<double> y(buf, buf + x.size());
  for (double &v : y) v /= static_cast<double>(n);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(fwd_x);
    fftw_destroy_plan(fwd_h);
    fftw_destroy_plan(inv);
  }
  fftw_free(buf);
  fftw_free(spec_x);
  fftw_free(spec_h);
  return y;
}

double PeakAbs(const std::vector<double> &x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

std::vector<float> ReadFloats(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0)
    throw Error(ErrorKind::kIo,
                path + ": size is not a multiple of 4 bytes");
  std::vector<float> out(bytes.size() / 4);
  for (size_t i = 0; i < out.size(); i++) {
    uint32_t bits = 0;
    for (int b = 0; b < 4; b++)
      bits |= static_cast<uint32_t>(bytes[4 * i + b]) << (8 * b);
    out[i] = std::bit_cast<float>(bits);
    if (!std::isfinite(out[i]))
      throw Error(ErrorKind::kNonFiniteValue, path,
                  static_cast<int64_t>(i) + 1);
  }
  return out;
}

void WriteFloats(const double *data, size_t n, const std::string &path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::kUnwritablePath, path);
  for (size_t i = 0; i < n; i++) {
    uint32_t bits = std::bit_cast<uint32_t>(static_cast<float>(data[i]));
    char b[4];
    for (int k = 0; k < 4; k++) b[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
    os.write(b, 4);
  }
  os.flush();
  if (!os) throw Error(ErrorKind::kUnwritablePath, path + ": write failed");
}

}  // namespace

SpecAugResult SpecAugment(const FeatureMatrix &features,
                          const SpecAugConfig &config, uint64_t seed) {
  const Eigen::Index t_len = features.rows(), f_len = features.cols();
  if (t_len < 1 || f_len < 1)
    throw Error(ErrorKind::kInvalidDimension, "empty feature matrix");
  if (!features.allFinite())
    throw Error(ErrorKind::kNonFiniteValue, "feature matrix");
  if (config.num_time_masks < 0 || config.num_freq_masks < 0 ||
      config.max_time_width < 0 || config.max_freq_width < 0 ||
      config.warp_window < 0)
    throw Error(ErrorKind::kInvalidArgument,
                "mask counts, widths and warp window must be non-negative");
  if (config.max_time_width > t_len)
    throw Error(ErrorKind::kMaskWiderThanAxis,
                "time mask width " + std::to_string(config.max_time_width) +
                    " exceeds " + std::to_string(t_len) + " frames");
  if (config.max_freq_width > f_len)
    throw Error(ErrorKind::kMaskWiderThanAxis,
                "frequency mask width " +
                    std::to_string(config.max_freq_width) + " exceeds " +
                    std::to_string(f_len) + " bins");

  std::mt19937_64 gen(seed);
  SpecAugResult r;
  const double fill = features.mean();
  const int t_int = static_cast<int>(t_len), f_int = static_cast<int>(f_len);
  const int w = config.warp_window;
  if (w > 0 && t_int >= 2 * w + 3) {
    r.warp_anchor = UniformInt(gen, w + 1, t_int - w - 2);
    r.warp_shift = UniformInt(gen, -w, w);
    r.features = TimeWarp(features, r.warp_anchor,
                          r.warp_anchor + r.warp_shift);
  } else {
    r.features = features;
  }
  for (int i = 0; i < config.num_time_masks; i++) {
    int width = UniformInt(gen, 0, config.max_time_width);
    int start = UniformInt(gen, 0, t_int - width);
    r.time_masks.push_back({start, width});
    r.features.middleRows(start, width).setConstant(fill);
  }
  for (int i = 0; i < config.num_freq_masks; i++) {
    int width = UniformInt(gen, 0, config.max_freq_width);
    int start = UniformInt(gen, 0, f_int - width);
    r.freq_masks.push_back({start, width});
    r.features.middleCols(start, width).setConstant(fill);
  }
  return r;
}

double SnrGain(const Waveform &signal, const Waveform &noise, double snr_db) {
  CheckSamples(signal, "signal");
  CheckSamples(noise, "noise");
  CheckSameRate(signal, noise);
  if (!std::isfinite(snr_db))
    throw Error(ErrorKind::kInvalidArgument, "SNR must be finite");
  if (noise.samples.empty())
    throw Error(ErrorKind::kZeroPowerInput, "noise is empty");
  const double ps = MeanSquare(signal.samples);
  const double pn = MeanSquare(FitNoise(noise.samples, signal.samples.size()));
  if (!(ps > 0.0)) throw Error(ErrorKind::kZeroPowerInput, "signal");
  if (!(pn > 0.0)) throw Error(ErrorKind::kZeroPowerInput, "noise");
  return std::sqrt(ps / (pn * std::pow(10.0, snr_db / 10.0)));
}

Waveform MixAtSnr(const Waveform &signal, const Waveform &noise,
                  double snr_db) {
  const double g = SnrGain(signal, noise, snr_db);
  std::vector<double> n = FitNoise(noise.samples, signal.samples.size());
  Waveform out = signal;
  for (size_t i = 0; i < n.size(); i++) out.samples[i] += g * n[i];
  return out;
}

Waveform Reverberate(const Waveform &signal, const Waveform &rir) {
  CheckSamples(signal, "signal");
  CheckSamples(rir, "impulse response");
  CheckSameRate(signal, rir);
  if (rir.samples.empty())
    throw Error(ErrorKind::kEmptyImpulseResponse, "");
  Waveform out;
  out.sample_rate = signal.sample_rate;
  if (signal.samples.empty()) return out;
  const std::vector<Tap> taps = NonZeroTaps(rir.samples);
  const double work = static_cast<double>(signal.samples.size()) *
                      static_cast<double>(taps.size());
  out.samples = work <= 1 << 16 ? DirectConvolve(signal.samples, taps)
                                : FftConvolve(signal.samples, rir.samples);
  const double peak_in = PeakAbs(signal.samples);
  const double peak_out = PeakAbs(out.samples);
  if (peak_out > 0.0 && peak_in != peak_out) {
    const double scale = peak_in / peak_out;
    for (double &v : out.samples) v *= scale;
  }
  return out;
}

Waveform SpeedPerturb(const Waveform &signal, double factor) {
  CheckSamples(signal, "signal");
  if (!(factor > 0.0) || !std::isfinite(factor))
    throw Error(ErrorKind::kInvalidArgument, "speed factor must be positive");
  const size_t len = signal.samples.size();
  const size_t out_len = static_cast<size_t>(
      std::llround(static_cast<double>(len) / factor));
  Waveform out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(out_len);
  if (out_len == 0) return out;
  if (len == 1 || out_len == 1) {
    std::fill(out.samples.begin(), out.samples.end(), signal.samples.front());
    return out;
  }
  const double span = static_cast<double>(len - 1);
  const double denom = static_cast<double>(out_len - 1);
  for (size_t i = 0; i < out_len; i++) {
    const double src = static_cast<double>(i) * span / denom;
    size_t i0 = static_cast<size_t>(src);
    if (i0 >= len - 1) {
      out.samples[i] = signal.samples[len - 1];
      continue;
    }
    const double frac = src - static_cast<double>(i0);
    out.samples[i] = frac == 0.0 ? signal.samples[i0]
                                 : (1.0 - frac) * signal.samples[i0] +
                                       frac * signal.samples[i0 + 1];
  }
  return out;
}

int64_t RemapSpeakerLabel(int64_t speaker, int factor_index,
                          int64_t num_speakers) {
  if (num_speakers < 1)
    throw Error(ErrorKind::kIndexOutOfRange, "speaker count must be positive");
  if (speaker < 0 || speaker >= num_speakers)
    throw Error(ErrorKind::kIndexOutOfRange,
                "speaker " + std::to_string(speaker) + " not in [0, " +
                    std::to_string(num_speakers) + ")");
  if (factor_index < 0 || factor_index >= kNumSpeedFactors)
    throw Error(ErrorKind::kIndexOutOfRange,
                "speed factor index " + std::to_string(factor_index));
  return speaker + factor_index * num_speakers;
}

Waveform ReadRawWaveform(const std::string &path, double sample_rate) {
  Waveform w;
  w.sample_rate = sample_rate;
  for (float f : ReadFloats(path)) w.samples.push_back(f);
  CheckSamples(w, path.c_str());
  return w;
}

void WriteRawWaveform(const Waveform &wave, const std::string &path) {
  WriteFloats(wave.samples.data(), wave.samples.size(), path);
}

FeatureMatrix ReadRawFeatures(const std::string &path, int num_bins) {
  if (num_bins < 1)
    throw Error(ErrorKind::kInvalidDimension, "number of bins must be >= 1");
  std::vector<float> v = ReadFloats(path);
  if (v.size() % static_cast<size_t>(num_bins) != 0)
    throw Error(ErrorKind::kDimensionMismatch,
                path + ": " + std::to_string(v.size()) +
                    " values is not a multiple of " +
                    std::to_string(num_bins) + " bins");
  const Eigen::Index frames = static_cast<Eigen::Index>(v.size() / num_bins);
  FeatureMatrix m(frames, num_bins);
  for (Eigen::Index t = 0; t < frames; t++)
    for (int f = 0; f < num_bins; f++) m(t, f) = v[t * num_bins + f];
  return m;
}

void WriteRawFeatures(const FeatureMatrix &features, const std::string &path) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm =
      features;
  WriteFloats(rm.data(), static_cast<size_t>(rm.size()), path);
}

}  // namespace svtk
