// include/svtk/augment.h

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

#ifndef SVTK_AUGMENT_H_
#define SVTK_AUGMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace svtk {

struct Waveform {
  std::vector<double> samples;
  double sample_rate = 16000.0;
};

/// Frames x bins.
using FeatureMatrix = Eigen::MatrixXd;

struct SpecAugConfig {
  int num_time_masks = 0;
  int max_time_width = 0;
  int num_freq_masks = 0;
  int max_freq_width = 0;
  int warp_window = 0;  // 0 disables time warping
};

struct Mask {
  int start;
  int width;
};

struct SpecAugResult {
  FeatureMatrix features;
  std::vector<Mask> time_masks;
  std::vector<Mask> freq_masks;
  int warp_anchor = -1;  // -1 when no warp was applied
  int warp_shift = 0;
};

/// Time warp (optional), then time masks, then frequency masks.  Widths are
/// drawn uniformly from [0, max] and starts uniformly over valid positions;
/// masked cells take the mean of the whole input matrix.  The warp moves one
/// anchor frame by up to +-warp_window frames and linearly interpolates the
/// two segments either side.  Deterministic in (input, config, seed).
SpecAugResult SpecAugment(const FeatureMatrix &features,
                          const SpecAugConfig &config, uint64_t seed);

/// Gain g such that 10 log10(P_signal / (g^2 P_noise)) = snr_db, with powers
/// as mean squares and the noise tiled or truncated to the signal length.
double SnrGain(const Waveform &signal, const Waveform &noise, double snr_db);

/// signal + g * noise (noise tiled or truncated from offset 0).
Waveform MixAtSnr(const Waveform &signal, const Waveform &noise,
                  double snr_db);

/// Linear convolution with `rir`, truncated to the signal length and
/// rescaled to the input's peak absolute amplitude.
Waveform Reverberate(const Waveform &signal, const Waveform &rir);

/// Linear-interpolation resampling to round(L / factor) samples with the
/// first and last samples aligned; the sample rate is unchanged.
Waveform SpeedPerturb(const Waveform &signal, double factor);

/// speaker + factor_index * num_speakers: each speed factor's copies become
/// a separate block of new speakers.
int64_t RemapSpeakerLabel(int64_t speaker, int factor_index,
                          int64_t num_speakers);

inline constexpr int kNumSpeedFactors = 3;

/// Headerless little-endian float32 samples.
Waveform ReadRawWaveform(const std::string &path, double sample_rate);
void WriteRawWaveform(const Waveform &wave, const std::string &path);

/// Headerless little-endian float32, row-major frames x num_bins.
FeatureMatrix ReadRawFeatures(const std::string &path, int num_bins);
void WriteRawFeatures(const FeatureMatrix &features, const std::string &path);

}  // namespace svtk

#endif  // SVTK_AUGMENT_H_
