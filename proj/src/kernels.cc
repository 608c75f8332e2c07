// src/kernels.cc

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

#include "svtk/kernels.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "svtk/error.h"

namespace svtk {

namespace {

void CheckFrames(const FrameMatrix &frames) {
  if (frames.rows() < 1 || frames.cols() < 1)
    throw Error(ErrorKind::kInvalidDimension,
                "frame matrix must be at least 1x1");
  if (!frames.allFinite())
    throw Error(ErrorKind::kNonFiniteValue, "frame matrix");
}

void CheckOutGrad(const Eigen::VectorXd &out_grad, Eigen::Index expected) {
  if (out_grad.size() != expected)
    throw Error(ErrorKind::kDimensionMismatch,
                "output gradient has size " + std::to_string(out_grad.size()) +
                    ", expected " + std::to_string(expected));
}

double LogSumExp(const Eigen::VectorXd &x) {
  double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

Eigen::VectorXd Softmax(const Eigen::VectorXd &x) {
  Eigen::VectorXd e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Intermediate values of the attention scorer, kept for the backward pass.
struct Attention {
  Eigen::MatrixXd hidden;  // tanh(F W' + b), T x d
  Eigen::VectorXd alpha;   // T
};

Attention ComputeAttention(const FrameMatrix &frames,
                           const Eigen::MatrixXd &w, const Eigen::VectorXd &b,
                           const Eigen::VectorXd &v) {
  Attention att;
  att.hidden = ((frames * w.transpose()).rowwise() + b.transpose())
                   .array()
                   .tanh()
                   .matrix();
  att.alpha = Softmax(att.hidden * v);
  return att;
}

// Back-propagates dalpha = d(loss)/d(alpha) through the softmax and the tanh
// scorer, accumulating into grads.
void AttentionBackward(const FrameMatrix &frames, const Eigen::MatrixXd &w,
                       const Eigen::VectorXd &v, const Attention &att,
                       const Eigen::VectorXd &dalpha, PoolingGrads *grads) {
  const Eigen::VectorXd &alpha = att.alpha;
  Eigen::VectorXd dscore =
      alpha.array() * (dalpha.array() - alpha.dot(dalpha));
  Eigen::MatrixXd dpre =
      ((dscore * v.transpose()).array() * (1.0 - att.hidden.array().square()))
          .matrix();
  grads->v += att.hidden.transpose() * dscore;
  grads->w += dpre.transpose() * frames;
  grads->b += dpre.colwise().sum().transpose();
  grads->frames += dpre * w;
}

PoolingGrads ZeroGrads(const FrameMatrix &frames, int dim) {
  PoolingGrads g;
  g.frames = Eigen::MatrixXd::Zero(frames.rows(), frames.cols());
  g.w = Eigen::MatrixXd::Zero(dim, dim);
  g.b = Eigen::VectorXd::Zero(dim);
  g.v = Eigen::VectorXd::Zero(dim);
  return g;
}

struct MomentStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;  // may be slightly negative from cancellation
  Eigen::VectorXd std;
};

MomentStats WeightedMoments(const FrameMatrix &frames,
                            const Eigen::VectorXd &weights) {
  MomentStats s;
  s.mean = frames.transpose() * weights;
  Eigen::VectorXd second = frames.array().square().matrix().transpose() *
                           weights;
  s.var = second - s.mean.cwiseProduct(s.mean);
  s.std = (s.var.array().max(0.0) + kStdEpsilon).sqrt().matrix();
  return s;
}

// Given d/d[mean; std], returns (d/dmean_total, d/dsecond_moment).
void MomentBackward(const MomentStats &s, const Eigen::VectorXd &out_grad,
                    Eigen::VectorXd *dmean, Eigen::VectorXd *dsecond) {
  const Eigen::Index d = s.mean.size();
  *dsecond = Eigen::VectorXd::Zero(d);
  for (Eigen::Index j = 0; j < d; j++)
    if (s.var[j] > 0.0) (*dsecond)[j] = out_grad[d + j] / (2.0 * s.std[j]);
  *dmean = out_grad.head(d) - 2.0 * s.mean.cwiseProduct(*dsecond);
}

Eigen::VectorXd UniformWeights(Eigen::Index t) {
  return Eigen::VectorXd::Constant(t, 1.0 / static_cast<double>(t));
}

}  // namespace

void PoolingParams::Check(int dim) const {
  if (w.rows() != dim || w.cols() != dim || b.size() != dim || v.size() != dim)
    throw Error(ErrorKind::kDimensionMismatch,
                "pooling parameters do not match channel count " +
                    std::to_string(dim));
  if (!w.allFinite() || !b.allFinite() || !v.allFinite())
    throw Error(ErrorKind::kNonFiniteValue, "pooling parameters");
  if (heads < 1)
    throw Error(ErrorKind::kInvalidArgument, "heads must be positive");
  if (dim % heads != 0)
    throw Error(ErrorKind::kHeadMismatch,
                std::to_string(dim) + " channels cannot be split into " +
                    std::to_string(heads) + " heads");
}

Eigen::VectorXd PoolTap(const FrameMatrix &frames) {
  CheckFrames(frames);
  return frames.colwise().mean().transpose();
}

Eigen::MatrixXd PoolTapBackward(const FrameMatrix &frames,
                                const Eigen::VectorXd &out_grad) {
  CheckFrames(frames);
  CheckOutGrad(out_grad, frames.cols());
  return (out_grad / static_cast<double>(frames.rows()))
      .transpose()
      .replicate(frames.rows(), 1);
}

Eigen::VectorXd PoolSp(const FrameMatrix &frames) {
  CheckFrames(frames);
  MomentStats s = WeightedMoments(frames, UniformWeights(frames.rows()));
  Eigen::VectorXd out(2 * frames.cols());
  out << s.mean, s.std;
  return out;
}

Eigen::MatrixXd PoolSpBackward(const FrameMatrix &frames,
                               const Eigen::VectorXd &out_grad) {
  CheckFrames(frames);
  CheckOutGrad(out_grad, 2 * frames.cols());
  MomentStats s = WeightedMoments(frames, UniformWeights(frames.rows()));
  Eigen::VectorXd dmean, dsecond;
  MomentBackward(s, out_grad, &dmean, &dsecond);
  Eigen::MatrixXd grad =
      (frames.array().rowwise() * (2.0 * dsecond).transpose().array()).matrix();
  grad.rowwise() += dmean.transpose();
  return grad / static_cast<double>(frames.rows());
}

Eigen::VectorXd AttentionWeights(const FrameMatrix &frames,
                                 const PoolingParams &params) {
  CheckFrames(frames);
  params.Check(static_cast<int>(frames.cols()));
  return ComputeAttention(frames, params.w, params.b, params.v).alpha;
}

Eigen::VectorXd PoolSap(const FrameMatrix &frames,
                        const PoolingParams &params) {
  Eigen::VectorXd alpha = AttentionWeights(frames, params);
  return frames.transpose() * alpha;
}

PoolingGrads PoolSapBackward(const FrameMatrix &frames,
                             const PoolingParams &params,
                             const Eigen::VectorXd &out_grad) {
  CheckFrames(frames);
  params.Check(static_cast<int>(frames.cols()));
  CheckOutGrad(out_grad, frames.cols());
  Attention att = ComputeAttention(frames, params.w, params.b, params.v);
  PoolingGrads grads = ZeroGrads(frames, static_cast<int>(frames.cols()));
  grads.frames = att.alpha * out_grad.transpose();
  AttentionBackward(frames, params.w, params.v, att, frames * out_grad,
                    &grads);
  return grads;
}

Eigen::VectorXd PoolAsp(const FrameMatrix &frames,
                        const PoolingParams &params) {
  Eigen::VectorXd alpha = AttentionWeights(frames, params);
  MomentStats s = WeightedMoments(frames, alpha);
  Eigen::VectorXd out(2 * frames.cols());
  out << s.mean, s.std;
  return out;
}

PoolingGrads PoolAspBackward(const FrameMatrix &frames,
                             const PoolingParams &params,
                             const Eigen::VectorXd &out_grad) {
  CheckFrames(frames);
  params.Check(static_cast<int>(frames.cols()));
  CheckOutGrad(out_grad, 2 * frames.cols());
  Attention att = ComputeAttention(frames, params.w, params.b, params.v);
  MomentStats s = WeightedMoments(frames, att.alpha);
  Eigen::VectorXd dmean, dsecond;
  MomentBackward(s, out_grad, &dmean, &dsecond);

  PoolingGrads grads = ZeroGrads(frames, static_cast<int>(frames.cols()));
  Eigen::MatrixXd per_frame =
      (frames.array().rowwise() * (2.0 * dsecond).transpose().array()).matrix();
  per_frame.rowwise() += dmean.transpose();
  grads.frames = per_frame.array().colwise() * att.alpha.array();
  Eigen::VectorXd dalpha =
      frames * dmean + frames.array().square().matrix() * dsecond;
  AttentionBackward(frames, params.w, params.v, att, dalpha, &grads);
  return grads;
}

Eigen::VectorXd PoolMhap(const FrameMatrix &frames,
                         const PoolingParams &params) {
  CheckFrames(frames);
  const int d = static_cast<int>(frames.cols());
  params.Check(d);
  const int hd = d / params.heads;
  Eigen::VectorXd out(d);
  for (int g = 0; g < params.heads; g++) {
    const int off = g * hd;
    Eigen::MatrixXd sub = frames.middleCols(off, hd);
    Attention att =
        ComputeAttention(sub, params.w.block(off, off, hd, hd),
                         params.b.segment(off, hd), params.v.segment(off, hd));
    out.segment(off, hd) = sub.transpose() * att.alpha;
  }
  return out;
}

PoolingGrads PoolMhapBackward(const FrameMatrix &frames,
                              const PoolingParams &params,
                              const Eigen::VectorXd &out_grad) {
  CheckFrames(frames);
  const int d = static_cast<int>(frames.cols());
  params.Check(d);
  CheckOutGrad(out_grad, d);
  const int hd = d / params.heads;
  PoolingGrads grads = ZeroGrads(frames, d);
  for (int g = 0; g < params.heads; g++) {
    const int off = g * hd;
    Eigen::MatrixXd sub = frames.middleCols(off, hd);
    Eigen::MatrixXd w = params.w.block(off, off, hd, hd);
    Eigen::VectorXd v = params.v.segment(off, hd);
    Attention att = ComputeAttention(sub, w, params.b.segment(off, hd), v);
    Eigen::VectorXd og = out_grad.segment(off, hd);

    PoolingGrads head = ZeroGrads(sub, hd);
    head.frames = att.alpha * og.transpose();
    AttentionBackward(sub, w, v, att, sub * og, &head);
    grads.frames.middleCols(off, hd) = head.frames;
    grads.w.block(off, off, hd, hd) = head.w;
    grads.b.segment(off, hd) = head.b;
    grads.v.segment(off, hd) = head.v;
  }
  return grads;
}

// ---- losses ----

void LossParams::Check() const {
  if (!(scale > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "scale must be positive");
  if (!(margin >= 0.0 && margin < std::numbers::pi / 2))
    throw Error(ErrorKind::kInvalidArgument, "margin must lie in [0, pi/2)");
  if (subcenters < 1)
    throw Error(ErrorKind::kInvalidArgument, "need at least one sub-center");
  if (!(circle_margin > 0.0 && circle_margin < 1.0))
    throw Error(ErrorKind::kInvalidArgument,
                "circle margin must lie in (0, 1)");
  if (!(circle_gamma > 0.0))
    throw Error(ErrorKind::kInvalidArgument, "circle gamma must be positive");
}

static void CheckLabel(Eigen::Index num_classes, int label) {
  if (num_classes < 2)
    throw Error(ErrorKind::kInvalidArgument, "need at least two classes");
  if (label < 0 || label >= num_classes)
    throw Error(ErrorKind::kIndexOutOfRange,
                "class index " + std::to_string(label) + " not in [0, " +
                    std::to_string(num_classes) + ")");
}

LossResult SoftmaxCrossEntropy(const Eigen::VectorXd &logits, int label) {
  CheckLabel(logits.size(), label);
  if (!logits.allFinite())
    throw Error(ErrorKind::kNonFiniteValue, "logits");
  LossResult r;
  r.loss = LogSumExp(logits) - logits[label];
  r.grad = Softmax(logits);
  r.grad[label] -= 1.0;
  return r;
}

LossResult AamSoftmax(const Eigen::VectorXd &cosines, int label, double scale,
                      double margin) {
  CheckLabel(cosines.size(), label);
  LossParams p;
  p.scale = scale;
  p.margin = margin;
  p.Check();
  if (!cosines.allFinite())
    throw Error(ErrorKind::kNonFiniteValue, "cosines");

  const double c = cosines[label];
  const double lo = -1.0 + kCosineClamp, hi = 1.0 - kCosineClamp;
  const bool clamped = c < lo || c > hi;
  const double cc = std::clamp(c, lo, hi);
  const double sin_theta = std::sqrt(1.0 - cc * cc);
  const double cos_m = std::cos(margin), sin_m = std::sin(margin);

  Eigen::VectorXd logits = scale * cosines;
  logits[label] = scale * (c * cos_m - sin_theta * sin_m);
  LossResult r = SoftmaxCrossEntropy(logits, label);
  const double dtarget = clamped ? cos_m : cos_m + cc * sin_m / sin_theta;
  r.grad *= scale;
  r.grad[label] *= dtarget;
  return r;
}

Eigen::VectorXd SubcenterCosines(const Eigen::VectorXd &embedding,
                                 const SubcenterBank &bank,
                                 std::vector<int> *argmax) {
  if (bank.num_subcenters < 1)
    throw Error(ErrorKind::kInvalidArgument,
                "sub-center count must be positive");
  if (bank.num_classes < 1 ||
      bank.centers.rows() != Eigen::Index(bank.num_classes) * bank.num_subcenters)
    throw Error(ErrorKind::kDimensionMismatch,
                "sub-center bank has " + std::to_string(bank.centers.rows()) +
                    " rows for " + std::to_string(bank.num_classes) + " x " +
                    std::to_string(bank.num_subcenters) + " centres");
  if (bank.centers.cols() != embedding.size())
    throw Error(ErrorKind::kDimensionMismatch,
                "embedding and sub-center dimensions differ");
  const double norm = embedding.norm();
  if (!(norm > 0.0))
    throw Error(ErrorKind::kZeroNormEmbedding, "embedding");
  Eigen::VectorXd row_norms = bank.centers.rowwise().norm();
  if (!(row_norms.minCoeff() > 0.0))
    throw Error(ErrorKind::kZeroNormEmbedding, "sub-center");

  Eigen::VectorXd all = (bank.centers * (embedding / norm)).cwiseQuotient(
      row_norms);
  Eigen::VectorXd best(bank.num_classes);
  if (argmax) argmax->assign(bank.num_classes, 0);
  for (int c = 0; c < bank.num_classes; c++) {
    int k_best = 0;
    for (int k = 1; k < bank.num_subcenters; k++)
      if (all[c * bank.num_subcenters + k] >
          all[c * bank.num_subcenters + k_best])
        k_best = k;
    best[c] = all[c * bank.num_subcenters + k_best];
    if (argmax) (*argmax)[c] = k_best;
  }
  return best;
}

LossResult SubcenterAamSoftmax(const Eigen::VectorXd &embedding,
                               const SubcenterBank &bank, int label,
                               double scale, double margin) {
  std::vector<int> argmax;
  Eigen::VectorXd cosines = SubcenterCosines(embedding, bank, &argmax);
  LossResult inner = AamSoftmax(cosines, label, scale, margin);

  const double norm = embedding.norm();
  const Eigen::VectorXd unit = embedding / norm;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(embedding.size());
  for (int c = 0; c < bank.num_classes; c++) {
    Eigen::VectorXd center =
        bank.centers.row(c * bank.num_subcenters + argmax[c]).transpose();
    center.normalize();
    grad += inner.grad[c] * (center - cosines[c] * unit);
  }
  return {inner.loss, grad / norm};
}

CircleLossResult CircleLoss(const Eigen::VectorXd &pos,
                            const Eigen::VectorXd &neg, double margin,
                            double gamma) {
  if (pos.size() == 0 || neg.size() == 0)
    throw Error(ErrorKind::kEmptySimilaritySet,
                pos.size() == 0 ? "no within-class similarities"
                                : "no between-class similarities");
  LossParams p;
  p.circle_margin = margin;
  p.circle_gamma = gamma;
  p.Check();
  if (!pos.allFinite() || !neg.allFinite())
    throw Error(ErrorKind::kNonFiniteValue, "similarities");

  const double delta_p = 1.0 - margin, delta_n = margin;
  Eigen::VectorXd alpha_p = (1.0 + margin - pos.array()).max(0.0).matrix();
  Eigen::VectorXd alpha_n = (neg.array() + margin).max(0.0).matrix();
  Eigen::VectorXd logit_p =
      (-gamma * alpha_p.array() * (pos.array() - delta_p)).matrix();
  Eigen::VectorXd logit_n =
      (gamma * alpha_n.array() * (neg.array() - delta_n)).matrix();

  const double z = LogSumExp(logit_p) + LogSumExp(logit_n);
  const double dz = Sigmoid(z);

  CircleLossResult r;
  r.loss = Softplus(z);
  Eigen::VectorXd wp = Softmax(logit_p), wn = Softmax(logit_n);
  r.grad_pos.resize(pos.size());
  for (Eigen::Index i = 0; i < pos.size(); i++) {
    double d = alpha_p[i] > 0.0
                   ? -gamma * (alpha_p[i] - (pos[i] - delta_p))
                   : 0.0;
    r.grad_pos[i] = dz * wp[i] * d;
  }
  r.grad_neg.resize(neg.size());
  for (Eigen::Index j = 0; j < neg.size(); j++) {
    double d = alpha_n[j] > 0.0
                   ? gamma * (alpha_n[j] + (neg[j] - delta_n))
                   : 0.0;
    r.grad_neg[j] = dz * wn[j] * d;
  }
  return r;
}

}  // namespace svtk
