// include/svtk/kernels.h

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

#ifndef SVTK_KERNELS_H_
#define SVTK_KERNELS_H_

#include <vector>

#include <Eigen/Dense>

namespace svtk {

// Frame-to-utterance pooling layers and margin losses, each with an
// analytic backward pass.  Frames are rows: a FrameMatrix is T x d.

using FrameMatrix = Eigen::MatrixXd;

/// Variance floor inside the square root of SP / ASP.
inline constexpr double kStdEpsilon = 1e-10;

/// Attention parameters shared by SAP, ASP and MHAP.  The attention score of
/// frame h is v' tanh(W h + b).  For MHAP, head g uses the g-th diagonal
/// block of W and the g-th slices of b and v.
struct PoolingParams {
  Eigen::MatrixXd w;  // d x d
  Eigen::VectorXd b;  // d
  Eigen::VectorXd v;  // d
  int heads = 1;

  int Dim() const { return static_cast<int>(b.size()); }
  /// Throws InvalidArgument / HeadMismatch.
  void Check(int dim) const;
};

/// Gradients of a scalar loss with respect to pooling inputs.
struct PoolingGrads {
  Eigen::MatrixXd frames;  // T x d
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
  Eigen::VectorXd v;
};

Eigen::VectorXd PoolTap(const FrameMatrix &frames);
Eigen::MatrixXd PoolTapBackward(const FrameMatrix &frames,
                                const Eigen::VectorXd &out_grad);

/// [mean; population std], std = sqrt(var + kStdEpsilon).
Eigen::VectorXd PoolSp(const FrameMatrix &frames);
Eigen::MatrixXd PoolSpBackward(const FrameMatrix &frames,
                               const Eigen::VectorXd &out_grad);

/// Softmax-over-time attention weights used by SAP and ASP.
Eigen::VectorXd AttentionWeights(const FrameMatrix &frames,
                                 const PoolingParams &params);

Eigen::VectorXd PoolSap(const FrameMatrix &frames,
                        const PoolingParams &params);
PoolingGrads PoolSapBackward(const FrameMatrix &frames,
                             const PoolingParams &params,
                             const Eigen::VectorXd &out_grad);

/// [attention-weighted mean; attention-weighted std].
Eigen::VectorXd PoolAsp(const FrameMatrix &frames,
                        const PoolingParams &params);
PoolingGrads PoolAspBackward(const FrameMatrix &frames,
                             const PoolingParams &params,
                             const Eigen::VectorXd &out_grad);

/// Channels split into params.heads contiguous groups, each pooled by SAP.
Eigen::VectorXd PoolMhap(const FrameMatrix &frames,
                         const PoolingParams &params);
PoolingGrads PoolMhapBackward(const FrameMatrix &frames,
                              const PoolingParams &params,
                              const Eigen::VectorXd &out_grad);

// ---- losses ----

struct LossParams {
  double scale = 30.0;
  double margin = 0.2;
  int subcenters = 3;
  double circle_margin = 0.25;
  double circle_gamma = 64.0;

  /// Large-margin fine-tuning raises margin and scale.
  static LossParams FineTune() {
    LossParams p;
    p.scale = 35.0;
    p.margin = 0.25;
    return p;
  }
  void Check() const;
};

struct LossResult {
  double loss;
  Eigen::VectorXd grad;
};

/// Cross entropy of softmax(logits) against class `label`.
LossResult SoftmaxCrossEntropy(const Eigen::VectorXd &logits, int label);

/// Additive angular margin softmax on class cosines.  The target logit is
/// s * cos(acos(c_y) + m), evaluated as s * (c_y cos m - sin(theta) sin m)
/// with c_y clamped to [-1 + 1e-7, 1 - 1e-7] inside sin(theta).
LossResult AamSoftmax(const Eigen::VectorXd &cosines, int label, double scale,
                      double margin);

inline constexpr double kCosineClamp = 1e-7;

/// Class centres for sub-center AAM: row c*K + k is sub-center k of class c.
struct SubcenterBank {
  int num_classes = 0;
  int num_subcenters = 0;
  Eigen::MatrixXd centers;  // (num_classes * num_subcenters) x d
};

/// Per-class cosine = max over that class's sub-centres (lowest index wins
/// ties); inputs are length-normalised internally.  Gradient is w.r.t. the
/// raw embedding and flows only through the winning sub-centre.
LossResult SubcenterAamSoftmax(const Eigen::VectorXd &embedding,
                               const SubcenterBank &bank, int label,
                               double scale, double margin);

/// The per-class max cosines SubcenterAamSoftmax feeds to AamSoftmax.
Eigen::VectorXd SubcenterCosines(const Eigen::VectorXd &embedding,
                                 const SubcenterBank &bank,
                                 std::vector<int> *argmax = nullptr);

struct CircleLossResult {
  double loss;
  Eigen::VectorXd grad_pos;
  Eigen::VectorXd grad_neg;
};

/// Circle loss over within-class similarities `pos` and between-class
/// similarities `neg`.  The self-paced weights are part of the function, so
/// the gradient is the full derivative.
CircleLossResult CircleLoss(const Eigen::VectorXd &pos,
                            const Eigen::VectorXd &neg, double margin,
                            double gamma);

}  // namespace svtk

#endif  // SVTK_KERNELS_H_
